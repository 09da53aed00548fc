#include "cardl/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cardl/errors.hpp"

namespace cardl {

std::size_t MlpParams::input_dim() const {
  return layers.empty() ? 0 : layers.front().weight.cols();
}

std::size_t MlpParams::output_dim() const {
  return layers.empty() ? 0 : layers.back().weight.rows();
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.weight.size() + layer.bias.size();
  return n;
}

void MlpParams::validate() const {
  if (layers.empty()) throw DimensionError("mlp has no layers");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& layer = layers[k];
    if (layer.bias.size() != layer.weight.rows()) {
      throw DimensionError("layer " + std::to_string(k) + ": bias length " +
                           std::to_string(layer.bias.size()) + " vs weight " +
                           layer.weight.shape_string());
    }
    if (k > 0 && layer.weight.cols() != layers[k - 1].weight.rows()) {
      throw DimensionError("layer " + std::to_string(k) + " weight " +
                           layer.weight.shape_string() + " does not chain onto layer " +
                           std::to_string(k - 1) + " weight " +
                           layers[k - 1].weight.shape_string());
    }
  }
}

namespace {

bool rectified(const MlpParams& params, std::size_t k) {
  return k + 1 < params.layers.size() || params.rectify_output;
}

Matrix affine(const Layer& layer, const Matrix& input) {
  Matrix z = matmul_bt(input, layer.weight);
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += layer.bias[c];
  }
  return z;
}

void relu_inplace(Matrix& m) {
  for (double& v : m.values()) v = v > 0.0 ? v : 0.0;
}

void check_input(const MlpParams& params, const Matrix& batch) {
  params.validate();
  if (batch.cols() != params.input_dim()) {
    throw DimensionError("mlp input " + batch.shape_string() + " vs first layer weight " +
                         params.layers.front().weight.shape_string());
  }
}

}  // namespace

ForwardResult mlp_forward(const MlpParams& params, const Matrix& batch) {
  check_input(params, batch);
  ForwardResult result;
  Matrix current = batch;
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    Matrix z = affine(params.layers[k], current);
    result.cache.inputs.push_back(std::move(current));
    current = z;
    if (rectified(params, k)) relu_inplace(current);
    result.cache.pre_activations.push_back(std::move(z));
  }
  result.output = std::move(current);
  return result;
}

Matrix mlp_apply(const MlpParams& params, const Matrix& batch) {
  check_input(params, batch);
  Matrix current = batch;
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    current = affine(params.layers[k], current);
    if (rectified(params, k)) relu_inplace(current);
  }
  return current;
}

GradientSet mlp_backward(const MlpParams& params, const ForwardCache& cache,
                         const Matrix& grad_out) {
  if (cache.empty()) throw UsageError("mlp_backward called without a forward cache");
  if (cache.inputs.size() != params.layers.size() ||
      cache.pre_activations.size() != params.layers.size()) {
    throw UsageError("forward cache does not belong to this network");
  }
  const Matrix& last = cache.pre_activations.back();
  if (grad_out.rows() != last.rows() || grad_out.cols() != last.cols()) {
    throw DimensionError("grad_out " + grad_out.shape_string() + " vs forward output " +
                         last.shape_string());
  }

  GradientSet grads;
  grads.layers.resize(params.layers.size());
  Matrix delta = grad_out;
  for (std::size_t k = params.layers.size(); k-- > 0;) {
    if (rectified(params, k)) {
      const auto& z = cache.pre_activations[k].values();
      auto& d = delta.values();
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (!(z[i] > 0.0)) d[i] = 0.0;
      }
    }
    LayerGrad& g = grads.layers[k];
    g.weight = matmul_at(delta, cache.inputs[k]);
    g.bias.assign(delta.cols(), 0.0);
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      auto row = delta.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) g.bias[c] += row[c];
    }
    delta = matmul(delta, params.layers[k].weight);
  }
  grads.input = std::move(delta);
  return grads;
}

namespace {

void check_dims(std::span<const std::size_t> dims) {
  if (dims.size() < 2) throw UsageError("mlp needs at least input and output dims");
  for (std::size_t d : dims) {
    if (d == 0) throw UsageError("mlp layer width must be positive");
  }
}

}  // namespace

MlpParams init_mlp(std::span<const std::size_t> dims, std::mt19937_64& rng) {
  check_dims(dims);
  MlpParams params;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const std::size_t fan_in = dims[k];
    const std::size_t fan_out = dims[k + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Layer layer{Matrix(fan_out, fan_in), Vector(fan_out, 0.0)};
    for (double& w : layer.weight.values()) w = dist(rng);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

MlpParams zero_mlp(std::span<const std::size_t> dims) {
  check_dims(dims);
  MlpParams params;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    params.layers.push_back({Matrix(dims[k + 1], dims[k]), Vector(dims[k + 1], 0.0)});
  }
  return params;
}

Vector flatten_params(const MlpParams& params) {
  Vector flat;
  flat.reserve(params.parameter_count());
  for (const auto& layer : params.layers) {
    flat.insert(flat.end(), layer.weight.values().begin(), layer.weight.values().end());
    flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
  }
  return flat;
}

void assign_params(MlpParams& params, std::span<const double> flat) {
  if (flat.size() != params.parameter_count()) {
    throw DimensionError("flat parameter vector of length " + std::to_string(flat.size()) +
                         " vs " + std::to_string(params.parameter_count()) + " parameters");
  }
  std::size_t offset = 0;
  for (auto& layer : params.layers) {
    auto& w = layer.weight.values();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), w.size(), w.begin());
    offset += w.size();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), layer.bias.size(),
                layer.bias.begin());
    offset += layer.bias.size();
  }
}

Vector flatten_grads(const GradientSet& grads) {
  Vector flat;
  for (const auto& layer : grads.layers) {
    flat.insert(flat.end(), layer.weight.values().begin(), layer.weight.values().end());
    flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
  }
  return flat;
}

void accumulate(GradientSet& into, const GradientSet& other) {
  if (into.layers.size() != other.layers.size()) {
    throw DimensionError("gradient sets have different layer counts");
  }
  for (std::size_t k = 0; k < into.layers.size(); ++k) {
    auto& a = into.layers[k];
    const auto& b = other.layers[k];
    if (a.weight.size() != b.weight.size() || a.bias.size() != b.bias.size()) {
      throw DimensionError("gradient layer " + std::to_string(k) + " shape mismatch");
    }
    for (std::size_t i = 0; i < a.weight.size(); ++i) a.weight.values()[i] += b.weight.values()[i];
    for (std::size_t i = 0; i < a.bias.size(); ++i) a.bias[i] += b.bias[i];
  }
}

}  // namespace cardl
