#include "cardl/loss.hpp"

#include <algorithm>
#include <cmath>

#include "cardl/errors.hpp"

namespace cardl {

Vector stable_softmax(std::span<const double> logits) {
  if (logits.empty()) throw UsageError("softmax of an empty vector");
  require_finite(logits, "softmax logits");
  const double shift = *std::max_element(logits.begin(), logits.end());
  Vector out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - shift);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

Matrix row_softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    Vector p = stable_softmax(logits.row(r));
    std::copy(p.begin(), p.end(), out.row(r).begin());
  }
  return out;
}

namespace {

void check_distributions(const Matrix& targets, const Matrix& probs) {
  if (targets.rows() != probs.rows() || targets.cols() != probs.cols()) {
    throw DimensionError("targets " + targets.shape_string() + " vs probabilities " +
                         probs.shape_string());
  }
  if (targets.empty()) throw DimensionError("cross entropy over an empty batch");
  for (double y : targets.values()) {
    if (!(y >= 0.0) || !std::isfinite(y)) throw DataError("negative or non-finite target mass");
  }
  for (double p : probs.values()) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw DataError("negative or non-finite probability");
  }
}

}  // namespace

double cross_entropy_eq2(const Matrix& targets, const Matrix& probs) {
  check_distributions(targets, probs);
  const double n = static_cast<double>(targets.rows());
  const double m = static_cast<double>(targets.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < targets.rows(); ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < targets.cols(); ++j) {
      const double y = targets(i, j);
      if (y > 0.0) row_sum += y * std::log(std::max(probs(i, j), kLogFloor));
    }
    total += row_sum / m;
  }
  // -0.0 would print oddly; the loss is nonnegative.
  const double loss = -total / n;
  return loss == 0.0 ? 0.0 : loss;
}

Matrix cross_entropy_softmax_grad(const Matrix& targets, const Matrix& probs) {
  check_distributions(targets, probs);
  const double scale = 1.0 / (static_cast<double>(targets.rows()) *
                              static_cast<double>(targets.cols()));
  Matrix grad(targets.rows(), targets.cols());
  for (std::size_t i = 0; i < targets.rows(); ++i) {
    double active_mass = 0.0;
    for (std::size_t j = 0; j < targets.cols(); ++j) {
      if (targets(i, j) > 0.0 && probs(i, j) >= kLogFloor) active_mass += targets(i, j);
    }
    for (std::size_t k = 0; k < targets.cols(); ++k) {
      const double y = (targets(i, k) > 0.0 && probs(i, k) >= kLogFloor) ? targets(i, k) : 0.0;
      grad(i, k) = scale * (probs(i, k) * active_mass - y);
    }
  }
  return grad;
}

}  // namespace cardl
