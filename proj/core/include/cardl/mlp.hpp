#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "cardl/matrix.hpp"

namespace cardl {

// One affine layer: output = input * weight^T + bias. weight is out x in.
struct Layer {
  Matrix weight;
  Vector bias;

  bool operator==(const Layer&) const = default;
};

// Feed-forward network with rectifier hidden layers. The output layer is
// linear unless rectify_output is set.
struct MlpParams {
  std::vector<Layer> layers;
  bool rectify_output = false;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const;

  // Throws DimensionError if layer shapes do not chain or a bias length is off.
  void validate() const;

  bool operator==(const MlpParams&) const = default;
};

// Inputs and pre-activations of every layer, kept for the backward pass.
struct ForwardCache {
  std::vector<Matrix> inputs;
  std::vector<Matrix> pre_activations;

  bool empty() const { return inputs.empty(); }
};

struct ForwardResult {
  Matrix output;
  ForwardCache cache;
};

struct LayerGrad {
  Matrix weight;
  Vector bias;
};

// Gradients mirroring MlpParams, plus the gradient with respect to the input batch.
struct GradientSet {
  std::vector<LayerGrad> layers;
  Matrix input;
};

ForwardResult mlp_forward(const MlpParams& params, const Matrix& batch);

// Forward pass without retaining the cache.
Matrix mlp_apply(const MlpParams& params, const Matrix& batch);

GradientSet mlp_backward(const MlpParams& params, const ForwardCache& cache,
                         const Matrix& grad_out);

// dims = {input, hidden..., output}. Weights uniform in
// +-sqrt(6 / (fan_in + fan_out)), biases zero.
MlpParams init_mlp(std::span<const std::size_t> dims, std::mt19937_64& rng);

// Same shapes as init_mlp with every parameter zero.
MlpParams zero_mlp(std::span<const std::size_t> dims);

// Parameters in layer order, each layer as weight (row-major) then bias.
Vector flatten_params(const MlpParams& params);
void assign_params(MlpParams& params, std::span<const double> flat);
Vector flatten_grads(const GradientSet& grads);

// Elementwise a += b; shapes must agree.
void accumulate(GradientSet& into, const GradientSet& other);

}  // namespace cardl
