#include "cardl/pair_relevance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cardl/errors.hpp"

namespace cardl {

Vector combine_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DimensionError("pair dims " + std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()));
  }
  const std::size_t d = x.size();
  Vector out(4 * d);
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = x[i];
    out[d + i] = y[i];
    out[2 * d + i] = std::abs(x[i] - y[i]);
    out[3 * d + i] = std::max(x[i], y[i]);
  }
  return out;
}

PairHead init_pair_head(std::size_t embedding_dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<std::size_t> dims{4 * embedding_dim, 2 * embedding_dim, 1};
  return PairHead{init_mlp(dims, rng)};
}

PairHead zero_pair_head(std::size_t embedding_dim) {
  const std::vector<std::size_t> dims{4 * embedding_dim, 2 * embedding_dim, 1};
  return PairHead{zero_mlp(dims)};
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

Matrix combined_batch(const PairHead& head, std::span<const PairExample> examples) {
  const std::size_t d = head.embedding_dim();
  Matrix batch(examples.size(), 4 * d);
  for (std::size_t r = 0; r < examples.size(); ++r) {
    if (examples[r].x.size() != d) {
      throw DimensionError("pair embedding dim " + std::to_string(examples[r].x.size()) +
                           " vs head dim " + std::to_string(d));
    }
    Vector row = combine_pair(examples[r].x, examples[r].y);
    std::copy(row.begin(), row.end(), batch.row(r).begin());
  }
  return batch;
}

void check_classes(std::span<const PairExample> examples) {
  const auto positives = std::count_if(examples.begin(), examples.end(),
                                       [](const PairExample& e) { return e.relevant; });
  if (positives == 0 || static_cast<std::size_t>(positives) == examples.size()) {
    throw DataError("pair training needs at least one relevant and one irrelevant example");
  }
}

}  // namespace

double predict_pair(const PairHead& head, std::span<const double> x, std::span<const double> y) {
  if (x.size() != head.embedding_dim()) {
    throw DimensionError("pair embedding dim " + std::to_string(x.size()) + " vs head dim " +
                         std::to_string(head.embedding_dim()));
  }
  const Vector combined = combine_pair(x, y);
  const Matrix out = mlp_apply(head.mlp, Matrix(1, combined.size(), combined));
  return sigmoid(out(0, 0));
}

double pair_loss(const PairHead& head, std::span<const PairExample> examples) {
  return pair_loss_and_grad(head, examples).loss;
}

PairLossGradient pair_loss_and_grad(const PairHead& head, std::span<const PairExample> examples) {
  if (examples.empty()) throw DataError("no pair examples");
  ForwardResult forward = mlp_forward(head.mlp, combined_batch(head, examples));
  const double n = static_cast<double>(examples.size());
  PairLossGradient out;
  Matrix grad_out(examples.size(), 1);
  for (std::size_t r = 0; r < examples.size(); ++r) {
    const double z = forward.output(r, 0);
    const double target = examples[r].relevant ? 1.0 : 0.0;
    // -[t log s(z) + (1 - t) log(1 - s(z))] = softplus(z) - t z
    out.loss += (softplus(z) - target * z) / n;
    grad_out(r, 0) = (sigmoid(z) - target) / n;
  }
  out.grads = mlp_backward(head.mlp, forward.cache, grad_out);
  return out;
}

PairHead fit_pair_head(std::span<const PairExample> examples, const TrainConfig& config) {
  if (examples.empty()) throw DataError("no pair examples");
  check_classes(examples);
  if (config.batch_size == 0) throw UsageError("batch_size must be positive");
  const std::size_t d = examples.front().x.size();
  if (d == 0) throw DataError("pair embeddings are empty");
  for (const auto& e : examples) {
    if (e.x.size() != d || e.y.size() != d) {
      throw DimensionError("pair embedding dims " + std::to_string(e.x.size()) + "/" +
                           std::to_string(e.y.size()) + " vs " + std::to_string(d));
    }
  }

  PairHead head = init_pair_head(d, config.seed);
  AdamState state = AdamState::zeros_like(head.mlp);
  std::vector<std::size_t> order(examples.size());
  std::vector<PairExample> batch;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                      static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(epoch)};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(examples[order[k]]);
      PairLossGradient step = pair_loss_and_grad(head, batch);
      if (!std::isfinite(step.loss)) {
        throw NumericError("non-finite pair loss at epoch " + std::to_string(epoch));
      }
      adam_step(head.mlp, step.grads, state, config.adam);
    }
  }
  return head;
}

double pair_accuracy(const PairHead& head, std::span<const PairExample> examples) {
  if (examples.empty()) throw DataError("no pair examples");
  std::size_t correct = 0;
  for (const auto& e : examples) {
    if ((predict_pair(head, e.x, e.y) > 0.5) == e.relevant) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

std::vector<PairExample> sample_negative_pairs(std::span<const PairExample> positives,
                                               std::uint64_t seed) {
  if (positives.size() < 2) throw DataError("negative sampling needs at least 2 positives");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, positives.size() - 2);
  std::vector<PairExample> negatives;
  negatives.reserve(positives.size());
  for (std::size_t i = 0; i < positives.size(); ++i) {
    std::size_t j = pick(rng);
    if (j >= i) ++j;  // any index except i
    negatives.push_back({positives[i].x, positives[j].y, false});
  }
  return negatives;
}

std::vector<PairExample> make_separable_pairs(std::size_t count, std::size_t dim,
                                              std::uint64_t seed) {
  if (dim < 2) throw UsageError("orthogonal negatives need dim >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto unit = [&](Vector v) {
    const double norm = l2_norm(v);
    for (double& e : v) e /= norm;
    return v;
  };
  auto draw = [&] {
    Vector v(dim);
    for (double& e : v) e = normal(rng);
    return v;
  };

  std::vector<PairExample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vector x = unit(draw());
    if (i % 2 == 0) {
      out.push_back({x, x, true});
    } else {
      Vector y = draw();
      const double along = dot(x, y);
      for (std::size_t k = 0; k < dim; ++k) y[k] -= along * x[k];
      out.push_back({std::move(x), unit(std::move(y)), false});
    }
  }
  return out;
}

}  // namespace cardl
