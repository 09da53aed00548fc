#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cardl/adam.hpp"
#include "cardl/features.hpp"
#include "cardl/matrix.hpp"
#include "cardl/mlp.hpp"
#include "cardl/types.hpp"

namespace cardl {

inline constexpr std::size_t kDefaultUnifiedDim = 64;
inline constexpr double kDefaultTemperature = 0.07;

// Hyperparameters for the projection heads and the training loop.
struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double temperature = kDefaultTemperature;
  std::vector<std::size_t> hidden_dims{256};
  std::size_t unified_dim = kDefaultUnifiedDim;
  std::uint64_t seed = 42;
  AdamHyper adam;

  void validate() const;
};

// Two projection heads into a shared unit-norm space.
struct AlignmentModel {
  MlpParams text_head;
  MlpParams image_head;
  std::size_t unified_dim = kDefaultUnifiedDim;
  double temperature = kDefaultTemperature;

  std::size_t text_input_dim() const { return text_head.input_dim(); }
  std::size_t image_input_dim() const { return image_head.input_dim(); }
  const MlpParams& head(Modality modality) const {
    return modality == Modality::kText ? text_head : image_head;
  }

  void validate() const;

  bool operator==(const AlignmentModel&) const = default;
};

// A (text, image) correspondence. Items sharing a label are treated as
// additional positives for each other inside a batch.
struct PairedExample {
  std::string text_id;
  std::string image_id;
  std::optional<std::string> label;

  bool operator==(const PairedExample&) const = default;
};

// Runs the head and L2-normalizes every output row. `row_ids`, when given,
// names the offending row in the zero-norm error.
Matrix project(const MlpParams& head, const Matrix& features,
               std::span<const std::string> row_ids = {});

// logits(i, j) = <image_i, text_j> / temperature for unit-norm rows.
Matrix batch_logits(const Matrix& image_unified, const Matrix& text_unified, double temperature);

// Target distribution for a batch of pairs: the paired item plus any
// same-label items share the row's mass uniformly.
Matrix batch_targets(std::span<const std::optional<std::string>> labels);

struct AlignmentLoss {
  double image_to_text = 0.0;
  double text_to_image = 0.0;
  double total = 0.0;
};

// Bidirectional in-batch cross entropy over an n x m logit matrix (rows are
// images, columns texts). The text-to-image term uses the transposed targets
// with each row renormalized.
AlignmentLoss alignment_loss(const Matrix& logits, const Matrix& targets);

struct AlignmentGradient {
  AlignmentLoss loss;
  GradientSet text;
  GradientSet image;
};

// Loss and analytic gradients for one batch of paired raw features.
AlignmentGradient alignment_loss_and_grad(const AlignmentModel& model, const Matrix& text_batch,
                                          const Matrix& image_batch, const Matrix& targets);

AlignmentModel init_alignment_model(std::size_t text_dim, std::size_t image_dim,
                                    const TrainConfig& config);

struct FitResult {
  AlignmentModel model;
  std::vector<double> loss_history;  // mean total loss per epoch
};

FitResult fit(const FeatureSet& text, const FeatureSet& image,
              std::span<const PairedExample> pairs, const TrainConfig& config);

}  // namespace cardl
