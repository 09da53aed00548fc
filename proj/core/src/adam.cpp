#include "cardl/adam.hpp"

#include <cmath>
#include <string>

#include "cardl/errors.hpp"

namespace cardl {

AdamState AdamState::zeros_like(const MlpParams& params) {
  AdamState state;
  for (const auto& layer : params.layers) {
    LayerGrad zero{Matrix(layer.weight.rows(), layer.weight.cols()),
                   Vector(layer.bias.size(), 0.0)};
    state.first_moment.push_back(zero);
    state.second_moment.push_back(std::move(zero));
  }
  return state;
}

namespace {

void update(std::vector<double>& param, const std::vector<double>& grad,
            std::vector<double>& m, std::vector<double>& v, const AdamHyper& hyper,
            double correction1, double correction2) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g;
    v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g * g;
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    param[i] -= hyper.learning_rate * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
  }
}

}  // namespace

void adam_step(MlpParams& params, const GradientSet& grads, AdamState& state,
               const AdamHyper& hyper) {
  const std::size_t n = params.layers.size();
  if (grads.layers.size() != n || state.first_moment.size() != n ||
      state.second_moment.size() != n) {
    throw DimensionError("adam_step: params, gradients and state have different layer counts");
  }
  for (std::size_t k = 0; k < n; ++k) {
    const auto& p = params.layers[k];
    const auto& g = grads.layers[k];
    const std::string name = "layer " + std::to_string(k);
    if (g.weight.rows() != p.weight.rows() || g.weight.cols() != p.weight.cols() ||
        g.bias.size() != p.bias.size() || state.first_moment[k].weight.size() != p.weight.size() ||
        state.second_moment[k].bias.size() != p.bias.size()) {
      throw DimensionError("adam_step: shape mismatch at " + name);
    }
    require_finite(g.weight.values(), "weight gradient of " + name);
    require_finite(g.bias, "bias gradient of " + name);
  }

  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(hyper.beta1, t);
  const double correction2 = 1.0 - std::pow(hyper.beta2, t);
  for (std::size_t k = 0; k < n; ++k) {
    update(params.layers[k].weight.values(), grads.layers[k].weight.values(),
           state.first_moment[k].weight.values(), state.second_moment[k].weight.values(), hyper,
           correction1, correction2);
    update(params.layers[k].bias, grads.layers[k].bias, state.first_moment[k].bias,
           state.second_moment[k].bias, hyper, correction1, correction2);
  }
}

}  // namespace cardl
