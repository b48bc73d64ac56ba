#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "frdetect/tensor.hpp"

namespace frdetect {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment accumulators for a fixed list of parameter tensors. The moments
/// are allocated lazily on the first step to match the parameter shapes.
struct AdamState {
  AdamOptions options;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step = 0;
};

/// One bias-corrected Adam update of every parameter in place.
inline void adam_step(std::span<Tensor* const> params,
                      std::span<const Tensor* const> grads, AdamState& state) {
  if (params.size() != grads.size()) {
    throw Error("adam_step: parameter and gradient counts differ");
  }
  if (state.first_moment.empty()) {
    for (const Tensor* p : params) {
      state.first_moment.emplace_back(p->shape());
      state.second_moment.emplace_back(p->shape());
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw Error("adam_step: optimizer state tracks a different parameter set");
  }
  ++state.step;
  const AdamOptions& o = state.options;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(o.beta1, t);
  const double correction2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = *grads[i];
    if (p.shape() != g.shape() || p.shape() != state.first_moment[i].shape()) {
      throw Error("adam_step: shape mismatch for parameter " +
                  std::to_string(i) + " " + shape_string(p.shape()));
    }
    Tensor& m = state.first_moment[i];
    Tensor& v = state.second_moment[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = o.beta1 * m[j] + (1.0 - o.beta1) * g[j];
      v[j] = o.beta2 * v[j] + (1.0 - o.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p[j] -= o.learning_rate * m_hat / (std::sqrt(v_hat) + o.epsilon);
    }
  }
}

}  // namespace frdetect
