#include "cardl/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cardl/errors.hpp"
#include "cardl/loss.hpp"

namespace cardl {

void TrainConfig::validate() const {
  if (batch_size < 2) throw UsageError("batch_size must be at least 2");
  if (!(temperature > 0.0)) throw UsageError("temperature must be positive");
  if (!(adam.learning_rate > 0.0)) throw UsageError("learning rate must be positive");
  if (unified_dim == 0) throw UsageError("unified_dim must be positive");
  for (std::size_t h : hidden_dims) {
    if (h == 0) throw UsageError("hidden layer width must be positive");
  }
}

void AlignmentModel::validate() const {
  text_head.validate();
  image_head.validate();
  if (text_head.output_dim() != unified_dim || image_head.output_dim() != unified_dim) {
    throw DimensionError("head output dims " + std::to_string(text_head.output_dim()) + "/" +
                         std::to_string(image_head.output_dim()) + " vs unified_dim " +
                         std::to_string(unified_dim));
  }
  if (!(temperature > 0.0)) throw DataError("temperature must be positive");
}

namespace {

struct Projection {
  Matrix unified;
  Vector norms;
  ForwardCache cache;
};

Projection project_with_cache(const MlpParams& head, const Matrix& features,
                              std::span<const std::string> row_ids) {
  ForwardResult forward = mlp_forward(head, features);
  Projection out{std::move(forward.output), Vector(features.rows()), std::move(forward.cache)};
  for (std::size_t r = 0; r < out.unified.rows(); ++r) {
    auto row = out.unified.row(r);
    require_finite(row, "projection row " + std::to_string(r));
    const double norm = l2_norm(row);
    if (norm == 0.0) {
      const std::string who = r < row_ids.size() ? "'" + row_ids[r] + "'" : std::to_string(r);
      throw NumericError("projection of row " + who + " is the zero vector");
    }
    out.norms[r] = norm;
    for (double& v : row) v /= norm;
  }
  return out;
}

// Back-propagates through u = z / |z|.
Matrix normalize_backward(const Projection& p, const Matrix& grad_unified) {
  Matrix grad(grad_unified.rows(), grad_unified.cols());
  for (std::size_t r = 0; r < grad.rows(); ++r) {
    auto u = p.unified.row(r);
    auto du = grad_unified.row(r);
    const double along = dot(u, du);
    auto out = grad.row(r);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = (du[c] - u[c] * along) / p.norms[r];
  }
  return grad;
}

Matrix transposed_targets(const Matrix& targets) {
  Matrix t = targets.transposed();
  for (std::size_t r = 0; r < t.rows(); ++r) {
    auto row = t.row(r);
    double sum = 0.0;
    for (double v : row) sum += v;
    if (!(sum > 0.0)) {
      throw DataError("text " + std::to_string(r) + " has no positive image in the batch");
    }
    for (double& v : row) v /= sum;
  }
  return t;
}

void check_targets(const Matrix& logits, const Matrix& targets) {
  if (logits.rows() != targets.rows() || logits.cols() != targets.cols()) {
    throw DimensionError("logits " + logits.shape_string() + " vs targets " +
                         targets.shape_string());
  }
  for (std::size_t i = 0; i < targets.rows(); ++i) {
    double sum = 0.0;
    bool positive = false;
    for (double y : targets.row(i)) {
      if (!(y >= 0.0)) throw DataError("target row " + std::to_string(i) + " has negative mass");
      sum += y;
      positive = positive || y > 0.0;
    }
    if (!positive || std::abs(sum - 1.0) > 1e-12) {
      throw DataError("target row " + std::to_string(i) + " is not a distribution");
    }
  }
}

}  // namespace

Matrix project(const MlpParams& head, const Matrix& features, std::span<const std::string> row_ids) {
  return project_with_cache(head, features, row_ids).unified;
}

Matrix batch_logits(const Matrix& image_unified, const Matrix& text_unified, double temperature) {
  if (!(temperature > 0.0)) throw UsageError("temperature must be positive");
  if (image_unified.cols() != text_unified.cols()) {
    throw DimensionError("image batch " + image_unified.shape_string() + " vs text batch " +
                         text_unified.shape_string());
  }
  Matrix logits = matmul_bt(image_unified, text_unified);
  for (double& v : logits.values()) v /= temperature;
  return logits;
}

Matrix batch_targets(std::span<const std::optional<std::string>> labels) {
  const std::size_t n = labels.size();
  Matrix y(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const bool positive = i == j || (labels[i] && labels[j] && *labels[i] == *labels[j]);
      if (positive) {
        y(i, j) = 1.0;
        ++count;
      }
    }
    for (double& v : y.row(i)) v /= static_cast<double>(count);
  }
  return y;
}

AlignmentLoss alignment_loss(const Matrix& logits, const Matrix& targets) {
  check_targets(logits, targets);
  AlignmentLoss loss;
  loss.image_to_text = cross_entropy_eq2(targets, row_softmax(logits));
  loss.text_to_image =
      cross_entropy_eq2(transposed_targets(targets), row_softmax(logits.transposed()));
  loss.total = loss.image_to_text + loss.text_to_image;
  return loss;
}

AlignmentGradient alignment_loss_and_grad(const AlignmentModel& model, const Matrix& text_batch,
                                          const Matrix& image_batch, const Matrix& targets) {
  const Projection text = project_with_cache(model.text_head, text_batch, {});
  const Projection image = project_with_cache(model.image_head, image_batch, {});
  const Matrix logits = batch_logits(image.unified, text.unified, model.temperature);
  check_targets(logits, targets);

  const Matrix probs_i2t = row_softmax(logits);
  const Matrix logits_t = logits.transposed();
  const Matrix probs_t2i = row_softmax(logits_t);
  const Matrix targets_t = transposed_targets(targets);

  AlignmentGradient out;
  out.loss.image_to_text = cross_entropy_eq2(targets, probs_i2t);
  out.loss.text_to_image = cross_entropy_eq2(targets_t, probs_t2i);
  out.loss.total = out.loss.image_to_text + out.loss.text_to_image;

  Matrix grad_logits = cross_entropy_softmax_grad(targets, probs_i2t);
  const Matrix grad_logits_t = cross_entropy_softmax_grad(targets_t, probs_t2i);
  for (std::size_t i = 0; i < grad_logits.rows(); ++i)
    for (std::size_t j = 0; j < grad_logits.cols(); ++j) grad_logits(i, j) += grad_logits_t(j, i);
  for (double& v : grad_logits.values()) v /= model.temperature;

  const Matrix grad_image_unified = matmul(grad_logits, text.unified);
  const Matrix grad_text_unified = matmul_at(grad_logits, image.unified);
  out.image = mlp_backward(model.image_head, image.cache, normalize_backward(image, grad_image_unified));
  out.text = mlp_backward(model.text_head, text.cache, normalize_backward(text, grad_text_unified));
  return out;
}

AlignmentModel init_alignment_model(std::size_t text_dim, std::size_t image_dim,
                                    const TrainConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  auto dims_for = [&](std::size_t input) {
    std::vector<std::size_t> dims{input};
    dims.insert(dims.end(), config.hidden_dims.begin(), config.hidden_dims.end());
    dims.push_back(config.unified_dim);
    return dims;
  };
  AlignmentModel model;
  model.text_head = init_mlp(dims_for(text_dim), rng);
  model.image_head = init_mlp(dims_for(image_dim), rng);
  model.unified_dim = config.unified_dim;
  model.temperature = config.temperature;
  return model;
}

FitResult fit(const FeatureSet& text, const FeatureSet& image,
              std::span<const PairedExample> pairs, const TrainConfig& config) {
  config.validate();
  if (pairs.size() < 2) throw DataError("training needs at least 2 pairs");
  if (text.modality() != Modality::kText || image.modality() != Modality::kImage) {
    throw UsageError("fit expects a text feature set and an image feature set");
  }
  for (const auto& pair : pairs) {
    text.find(pair.text_id);
    image.find(pair.image_id);
  }

  FitResult result;
  result.model = init_alignment_model(text.dimension(), image.dimension(), config);
  AlignmentModel& model = result.model;
  AdamState text_state = AdamState::zeros_like(model.text_head);
  AdamState image_state = AdamState::zeros_like(model.image_head);

  std::vector<std::size_t> order(pairs.size());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                      static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(epoch)};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      if (end - start < 2) break;
      std::vector<std::string> text_ids;
      std::vector<std::string> image_ids;
      std::vector<std::optional<std::string>> labels;
      for (std::size_t k = start; k < end; ++k) {
        const auto& pair = pairs[order[k]];
        text_ids.push_back(pair.text_id);
        image_ids.push_back(pair.image_id);
        labels.push_back(pair.label);
      }
      AlignmentGradient step = alignment_loss_and_grad(model, text.gather(text_ids),
                                                       image.gather(image_ids),
                                                       batch_targets(labels));
      if (!std::isfinite(step.loss.total)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batches));
      }
      adam_step(model.text_head, step.text, text_state, config.adam);
      adam_step(model.image_head, step.image, image_state, config.adam);
      loss_sum += step.loss.total;
      ++batches;
    }
    result.loss_history.push_back(batches == 0 ? 0.0 : loss_sum / static_cast<double>(batches));
  }
  return result;
}

}  // namespace cardl
