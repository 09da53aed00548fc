#pragma once

#include <functional>
#include <span>

#include "cardl/matrix.hpp"

namespace cardl {

using ScalarFunction = std::function<double(std::span<const double>)>;

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate.
// Used as the reference when checking analytic gradients.
Vector finite_diff_grad(const ScalarFunction& f, std::span<const double> x, double h = 1e-5);

// max_i |a_i - b_i| / max(max_i |b_i|, floor)
double max_relative_error(std::span<const double> analytic, std::span<const double> reference,
                          double floor = 1e-8);

}  // namespace cardl
