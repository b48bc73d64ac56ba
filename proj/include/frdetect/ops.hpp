#pragma once

// Forward and backward kernels for the handful of layers the classifier is
// built from. Every backward function accumulates (+=) into parameter
// gradients so a mini-batch can be summed article by article.

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "frdetect/tensor.hpp"

namespace frdetect {

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

/// A single 1x2xd convolution kernel and its bias.
struct ConvFilter {
  Tensor weights;  // (1, 2, depth)
  double bias = 0.0;
};

namespace detail {

inline void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw Error(std::string(what) + ": expected rank " + std::to_string(rank) +
                " tensor, got " + shape_string(t.shape()));
  }
}

inline void require_window(std::size_t width) {
  if (width < 2) throw Error("window larger than input");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Convolution with k filters of size 1x2xdepth: (rows, w, depth) ->
// (rows, w-1, k), ReLU applied. weights: (k, 2, depth), bias: (k).
// ---------------------------------------------------------------------------

inline Tensor conv_full_forward(const Tensor& input, const Tensor& weights,
                                const Tensor& bias) {
  detail::require_rank(input, 3, "conv");
  const std::size_t rows = input.dim(0), width = input.dim(1),
                    depth = input.dim(2);
  detail::require_window(width);
  const std::size_t k = weights.dim(0);
  if (weights.rank() != 3 || weights.dim(1) != 2 || weights.dim(2) != depth) {
    throw Error("conv: filter shape " + shape_string(weights.shape()) +
                " does not match input depth " + std::to_string(depth));
  }
  const std::size_t out_w = width - 1;
  Tensor out({rows, out_w, k});
  const double* x = input.raw().data();
  const double* w = weights.raw().data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < out_w; ++j) {
      // The 1x2 window is two consecutive depth vectors, contiguous in memory.
      const double* window = x + (r * width + j) * depth;
      for (std::size_t c = 0; c < k; ++c) {
        const double* f = w + c * 2 * depth;
        double acc = bias[c];
        for (std::size_t i = 0; i < 2 * depth; ++i) acc += f[i] * window[i];
        out.at(r, j, c) = relu(acc);
      }
    }
  }
  return out;
}

/// Backward of conv_full_forward. `output` is the post-ReLU forward result.
/// Returns the input gradient when `want_input_grad`, else an empty tensor.
inline Tensor conv_full_backward(const Tensor& input, const Tensor& weights,
                                 const Tensor& output, const Tensor& grad_out,
                                 Tensor& grad_weights, Tensor& grad_bias,
                                 bool want_input_grad) {
  const std::size_t rows = input.dim(0), width = input.dim(1),
                    depth = input.dim(2);
  const std::size_t k = weights.dim(0), out_w = width - 1;
  Tensor grad_in;
  if (want_input_grad) grad_in = Tensor(input.shape());
  const double* x = input.raw().data();
  const double* w = weights.raw().data();
  double* gw = grad_weights.raw().data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < out_w; ++j) {
      const double* window = x + (r * width + j) * depth;
      for (std::size_t c = 0; c < k; ++c) {
        if (output.at(r, j, c) <= 0.0) continue;
        const double g = grad_out.at(r, j, c);
        if (g == 0.0) continue;
        grad_bias[c] += g;
        double* gf = gw + c * 2 * depth;
        for (std::size_t i = 0; i < 2 * depth; ++i) gf[i] += g * window[i];
        if (want_input_grad) {
          const double* f = w + c * 2 * depth;
          double* gx = grad_in.raw().data() + (r * width + j) * depth;
          for (std::size_t i = 0; i < 2 * depth; ++i) gx[i] += g * f[i];
        }
      }
    }
  }
  return grad_in;
}

// ---------------------------------------------------------------------------
// Depthwise 1x2 convolution: channel c of the input only sees kernel c.
// (rows, w, k) -> (rows, w-1, k), ReLU applied. weights: (k, 2), bias: (k).
// ---------------------------------------------------------------------------

inline Tensor conv_depthwise_forward(const Tensor& input, const Tensor& weights,
                                     const Tensor& bias) {
  detail::require_rank(input, 3, "depthwise conv");
  const std::size_t rows = input.dim(0), width = input.dim(1),
                    k = input.dim(2);
  detail::require_window(width);
  if (weights.rank() != 2 || weights.dim(0) != k || weights.dim(1) != 2) {
    throw Error("depthwise conv: filter shape " +
                shape_string(weights.shape()) + " does not match " +
                std::to_string(k) + " channels");
  }
  Tensor out({rows, width - 1, k});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j + 1 < width; ++j) {
      for (std::size_t c = 0; c < k; ++c) {
        out.at(r, j, c) = relu(weights.at(c, 0) * input.at(r, j, c) +
                               weights.at(c, 1) * input.at(r, j + 1, c) +
                               bias[c]);
      }
    }
  }
  return out;
}

inline Tensor conv_depthwise_backward(const Tensor& input,
                                      const Tensor& weights,
                                      const Tensor& output,
                                      const Tensor& grad_out,
                                      Tensor& grad_weights, Tensor& grad_bias) {
  const std::size_t rows = input.dim(0), width = input.dim(1),
                    k = input.dim(2);
  Tensor grad_in(input.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j + 1 < width; ++j) {
      for (std::size_t c = 0; c < k; ++c) {
        if (output.at(r, j, c) <= 0.0) continue;
        const double g = grad_out.at(r, j, c);
        grad_bias[c] += g;
        grad_weights.at(c, 0) += g * input.at(r, j, c);
        grad_weights.at(c, 1) += g * input.at(r, j + 1, c);
        grad_in.at(r, j, c) += g * weights.at(c, 0);
        grad_in.at(r, j + 1, c) += g * weights.at(c, 1);
      }
    }
  }
  return grad_in;
}

/// Single-filter convolution over (rows, width, depth) producing
/// (rows, width-1).
inline Tensor conv_1x2(const Tensor& input, const ConvFilter& filter) {
  detail::require_rank(input, 3, "conv_1x2");
  detail::require_window(input.dim(1));
  const std::size_t depth = input.dim(2);
  if (filter.weights.size() != 2 * depth) {
    throw Error("conv_1x2: filter depth does not match input depth");
  }
  Tensor w = filter.weights.reshaped({1, 2, depth});
  Tensor b({1}, filter.bias);
  Tensor out = conv_full_forward(input, w, b);
  return out.reshaped({input.dim(0), input.dim(1) - 1});
}

// ---------------------------------------------------------------------------
// Non-overlapping width-2 max pooling along axis 1 of a (rows, w, c) tensor.
// A trailing odd column is dropped. Ties resolve to the left element.
// ---------------------------------------------------------------------------

inline Tensor maxpool2_forward(const Tensor& input) {
  detail::require_rank(input, 3, "maxpool2");
  const std::size_t rows = input.dim(0), width = input.dim(1),
                    ch = input.dim(2);
  detail::require_window(width);
  const std::size_t out_w = width / 2;
  Tensor out({rows, out_w, ch});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < out_w; ++j)
      for (std::size_t c = 0; c < ch; ++c)
        out.at(r, j, c) =
            std::max(input.at(r, 2 * j, c), input.at(r, 2 * j + 1, c));
  return out;
}

inline Tensor maxpool2_backward(const Tensor& input, const Tensor& grad_out) {
  const std::size_t rows = input.dim(0), ch = input.dim(2);
  const std::size_t out_w = grad_out.dim(1);
  Tensor grad_in(input.shape());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < out_w; ++j)
      for (std::size_t c = 0; c < ch; ++c) {
        const bool left = input.at(r, 2 * j, c) >= input.at(r, 2 * j + 1, c);
        grad_in.at(r, left ? 2 * j : 2 * j + 1, c) += grad_out.at(r, j, c);
      }
  return grad_in;
}

/// Rank-2 convenience form: (rows, width) -> (rows, floor(width/2)).
inline Tensor maxpool2(const Tensor& input) {
  detail::require_rank(input, 2, "maxpool2");
  detail::require_window(input.dim(1));
  Tensor out = maxpool2_forward(input.reshaped({input.dim(0), input.dim(1), 1}));
  return out.reshaped({input.dim(0), input.dim(1) / 2});
}

// ---------------------------------------------------------------------------
// Dense layer y = x W + b with W of shape (n, m); ReLU on hidden layers.
// ---------------------------------------------------------------------------

inline std::vector<double> dense_forward(std::span<const double> input,
                                         const Tensor& weights,
                                         const Tensor& bias, bool apply_relu) {
  if (weights.rank() != 2 || weights.dim(0) != input.size() ||
      bias.size() != weights.dim(1)) {
    throw Error("dense: input of length " + std::to_string(input.size()) +
                " does not fit weights " + shape_string(weights.shape()) +
                " and bias " + shape_string(bias.shape()));
  }
  const std::size_t n = weights.dim(0), m = weights.dim(1);
  std::vector<double> out(bias.raw());
  const double* w = weights.raw().data();
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = input[i];
    if (xi == 0.0) continue;
    const double* row = w + i * m;
    for (std::size_t j = 0; j < m; ++j) out[j] += xi * row[j];
  }
  if (apply_relu)
    for (double& v : out) v = relu(v);
  return out;
}

inline std::vector<double> dense(std::span<const double> input,
                                 const Tensor& weights, const Tensor& bias) {
  return dense_forward(input, weights, bias, true);
}

/// Backward of dense_forward; `output` is the forward result (post-ReLU when
/// `applied_relu`). Returns the input gradient.
inline std::vector<double> dense_backward(std::span<const double> input,
                                          const Tensor& weights,
                                          std::span<const double> output,
                                          std::span<const double> grad_out,
                                          bool applied_relu,
                                          Tensor& grad_weights,
                                          Tensor& grad_bias) {
  const std::size_t n = weights.dim(0), m = weights.dim(1);
  std::vector<double> g(grad_out.begin(), grad_out.end());
  if (applied_relu)
    for (std::size_t j = 0; j < m; ++j)
      if (output[j] <= 0.0) g[j] = 0.0;
  for (std::size_t j = 0; j < m; ++j) grad_bias[j] += g[j];
  std::vector<double> grad_in(n, 0.0);
  const double* w = weights.raw().data();
  double* gw = grad_weights.raw().data();
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = input[i];
    const double* row = w + i * m;
    double* grow = gw + i * m;
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      grow[j] += xi * g[j];
      acc += row[j] * g[j];
    }
    grad_in[i] = acc;
  }
  return grad_in;
}

// ---------------------------------------------------------------------------
// Softmax with cross-entropy.
// ---------------------------------------------------------------------------

struct SoftmaxResult {
  std::vector<double> probabilities;
  double loss = 0.0;
};

inline SoftmaxResult softmax_xent(std::span<const double> logits,
                                  std::size_t label) {
  if (logits.empty() || label >= logits.size()) {
    throw Error("softmax_xent: label out of range");
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  SoftmaxResult res;
  res.probabilities.resize(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    res.probabilities[i] = std::exp(logits[i] - top);
    z += res.probabilities[i];
  }
  for (double& p : res.probabilities) p /= z;
  res.loss = -(logits[label] - top - std::log(z));
  return res;
}

/// d loss / d logits = p - onehot(label).
inline std::vector<double> softmax_xent_grad(std::span<const double> probs,
                                             std::size_t label) {
  std::vector<double> g(probs.begin(), probs.end());
  g[label] -= 1.0;
  return g;
}

// ---------------------------------------------------------------------------
// Inverted dropout.
// ---------------------------------------------------------------------------

enum class Mode { Train, Eval };

struct DropoutResult {
  std::vector<double> output;
  std::vector<double> mask;  // 0 or 1/(1-rate); empty in eval mode
};

template <typename Rng>
DropoutResult dropout(std::span<const double> input, double rate, Mode mode,
                      Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  DropoutResult res;
  res.output.assign(input.begin(), input.end());
  if (mode == Mode::Eval || rate == 0.0) return res;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::bernoulli_distribution drop(rate);
  res.mask.resize(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    res.mask[i] = drop(rng) ? 0.0 : keep_scale;
    res.output[i] *= res.mask[i];
  }
  return res;
}

inline std::vector<double> dropout_backward(std::span<const double> grad_out,
                                            std::span<const double> mask) {
  std::vector<double> g(grad_out.begin(), grad_out.end());
  if (mask.empty()) return g;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= mask[i];
  return g;
}

}  // namespace frdetect
