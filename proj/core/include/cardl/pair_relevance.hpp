#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cardl/alignment.hpp"
#include "cardl/gradcheck.hpp"
#include "cardl/matrix.hpp"
#include "cardl/mlp.hpp"

namespace cardl {

// Two sentence embeddings and whether they belong together.
struct PairExample {
  Vector x;
  Vector y;
  bool relevant = false;
};

// Scores [x, y, |x - y|, max(x, y)] with a 4d -> 2d -> 1 network and a sigmoid.
struct PairHead {
  MlpParams mlp;

  std::size_t embedding_dim() const { return mlp.input_dim() / 4; }
  bool operator==(const PairHead&) const = default;
};

// [x || y || |x - y| || max(x, y)], elementwise for the last two blocks.
Vector combine_pair(std::span<const double> x, std::span<const double> y);

PairHead init_pair_head(std::size_t embedding_dim, std::uint64_t seed);

// Head whose every parameter is zero; it scores every pair 0.5.
PairHead zero_pair_head(std::size_t embedding_dim);

double predict_pair(const PairHead& head, std::span<const double> x, std::span<const double> y);

// Mean binary cross entropy of the head over the examples.
double pair_loss(const PairHead& head, std::span<const PairExample> examples);

struct PairLossGradient {
  double loss = 0.0;
  GradientSet grads;
};
PairLossGradient pair_loss_and_grad(const PairHead& head, std::span<const PairExample> examples);

// Mini-batch Adam on binary cross entropy. Uses epochs, batch_size, seed and
// adam from the config; the architecture is fixed by the embedding dimension.
PairHead fit_pair_head(std::span<const PairExample> examples, const TrainConfig& config);

// Fraction of examples where (score > 0.5) == relevant.
double pair_accuracy(const PairHead& head, std::span<const PairExample> examples);

// One mismatched negative per positive: y is replaced by the y of a different,
// uniformly drawn positive.
std::vector<PairExample> sample_negative_pairs(std::span<const PairExample> positives,
                                               std::uint64_t seed);

// Toy set with count/2 positives (x == y) and count/2 negatives (y orthogonal
// to x), all vectors unit length.
std::vector<PairExample> make_separable_pairs(std::size_t count, std::size_t dim,
                                              std::uint64_t seed);

}  // namespace cardl
