#include "cardl/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cardl/errors.hpp"

namespace cardl {

Vector finite_diff_grad(const ScalarFunction& f, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw UsageError("finite difference step must be positive");
  Vector probe(x.begin(), x.end());
  Vector grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double original = probe[i];
    probe[i] = original + h;
    const double up = f(probe);
    probe[i] = original - h;
    const double down = f(probe);
    probe[i] = original;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("function is not finite near coordinate " + std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double max_relative_error(std::span<const double> analytic, std::span<const double> reference,
                          double floor) {
  if (analytic.size() != reference.size()) {
    throw DimensionError("gradient lengths " + std::to_string(analytic.size()) + " vs " +
                         std::to_string(reference.size()));
  }
  double scale = floor;
  double worst = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    scale = std::max(scale, std::abs(reference[i]));
    worst = std::max(worst, std::abs(analytic[i] - reference[i]));
  }
  return worst / scale;
}

}  // namespace cardl
