#pragma once

#include <span>

#include "cardl/matrix.hpp"

namespace cardl {

// Lower bound applied to p before taking log(p) wherever the target mass is positive.
inline constexpr double kLogFloor = 1e-12;

// Max-shifted softmax. Throws UsageError on empty input.
Vector stable_softmax(std::span<const double> logits);

// stable_softmax applied to each row.
Matrix row_softmax(const Matrix& logits);

// -(1/n) * sum_i (1/m) * sum_j y_ij * log(p_ij) over an n x m target matrix y
// and predicted matrix p. The 1/m factor is kept even for one-hot targets.
double cross_entropy_eq2(const Matrix& targets, const Matrix& probs);

// Gradient of cross_entropy_eq2(targets, row_softmax(logits)) with respect to
// the logits. Terms whose probability fell under the log floor contribute a
// constant and therefore no gradient.
Matrix cross_entropy_softmax_grad(const Matrix& targets, const Matrix& probs);

}  // namespace cardl
