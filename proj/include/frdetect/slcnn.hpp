#pragma once

// Horizontal convolutional blocks (two 1x2 conv+ReLU layers, then width-2
// max pooling along each row) and the sentence-level CNN built from them.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "frdetect/ops.hpp"
#include "frdetect/tensor.hpp"

namespace frdetect {

inline constexpr std::size_t kDefaultFilters = 8;

/// Width after one block: w -> floor((w - 2) / 2).
inline std::size_t hcb_output_width(std::size_t width) {
  if (width < 4) {
    throw Error("block cannot reduce input of width " + std::to_string(width));
  }
  return (width - 2) / 2;
}

/// Number of blocks needed to bring `width` down to exactly 1.
inline std::size_t required_hcbs(std::size_t width) {
  if (width == 0) throw Error("width must be positive");
  std::size_t blocks = 0;
  while (width != 1) {
    if (width < 4) {
      throw Error("width cannot be reduced to 1 by blocks; recurrence stops at " +
                  std::to_string(width));
    }
    width = hcb_output_width(width);
    ++blocks;
  }
  return blocks;
}

/// Widths seen along one row: input, after each conv, after each pool.
inline std::vector<std::size_t> width_trace(std::size_t width) {
  std::vector<std::size_t> trace{width};
  const std::size_t blocks = required_hcbs(width);
  for (std::size_t b = 0; b < blocks; ++b) {
    trace.push_back(width - 1);
    trace.push_back(width - 2);
    width = (width - 2) / 2;
    trace.push_back(width);
  }
  return trace;
}

/// One HCB. The first conv either mixes the full input depth into k channels
/// (`mixing`, weights k x 2 x depth) or is depthwise (weights k x 2); the
/// second conv is always depthwise.
struct HcbBlock {
  bool mixing = false;
  Tensor conv1_weights;
  Tensor conv1_bias;
  Tensor conv2_weights;
  Tensor conv2_bias;

  static HcbBlock make(bool mixing, std::size_t in_depth, std::size_t k) {
    HcbBlock b;
    b.mixing = mixing;
    b.conv1_weights = mixing ? Tensor({k, 2, in_depth}) : Tensor({k, 2});
    b.conv1_bias = Tensor({k});
    b.conv2_weights = Tensor({k, 2});
    b.conv2_bias = Tensor({k});
    return b;
  }

  std::size_t filters() const { return conv1_bias.size(); }

  std::vector<Tensor*> parameters() {
    return {&conv1_weights, &conv1_bias, &conv2_weights, &conv2_bias};
  }
  std::vector<const Tensor*> parameters() const {
    return {&conv1_weights, &conv1_bias, &conv2_weights, &conv2_bias};
  }

  HcbBlock zeros_like() const {
    HcbBlock z;
    z.mixing = mixing;
    z.conv1_weights = Tensor(conv1_weights.shape());
    z.conv1_bias = Tensor(conv1_bias.shape());
    z.conv2_weights = Tensor(conv2_weights.shape());
    z.conv2_bias = Tensor(conv2_bias.shape());
    return z;
  }
};

/// Intermediate activations of one block, kept for the backward pass.
struct HcbTrace {
  Tensor input;
  Tensor conv1;
  Tensor conv2;
};

inline Tensor hcb_forward(const Tensor& input, const HcbBlock& block,
                          HcbTrace* trace = nullptr) {
  if (input.rank() != 3) {
    throw Error("block input must be (rows, width, channels), got " +
                shape_string(input.shape()));
  }
  hcb_output_width(input.dim(1));
  Tensor c1 = block.mixing
                  ? conv_full_forward(input, block.conv1_weights, block.conv1_bias)
                  : conv_depthwise_forward(input, block.conv1_weights,
                                           block.conv1_bias);
  Tensor c2 = conv_depthwise_forward(c1, block.conv2_weights, block.conv2_bias);
  Tensor out = maxpool2_forward(c2);
  if (trace) {
    trace->input = input;
    trace->conv1 = std::move(c1);
    trace->conv2 = std::move(c2);
  }
  return out;
}

inline Tensor hcb_backward(const HcbTrace& trace, const HcbBlock& block,
                           const Tensor& grad_out, HcbBlock& grads,
                           bool want_input_grad) {
  Tensor g2 = maxpool2_backward(trace.conv2, grad_out);
  Tensor g1 = conv_depthwise_backward(trace.conv1, block.conv2_weights,
                                      trace.conv2, g2, grads.conv2_weights,
                                      grads.conv2_bias);
  if (block.mixing) {
    return conv_full_backward(trace.input, block.conv1_weights, trace.conv1, g1,
                              grads.conv1_weights, grads.conv1_bias,
                              want_input_grad);
  }
  return conv_depthwise_backward(trace.input, block.conv1_weights, trace.conv1,
                                 g1, grads.conv1_weights, grads.conv1_bias);
}

/// A chain of HCBs that maps (rows, width, depth) to (rows, k), one k-vector
/// per row. Used both as the SLCNN and as the integrator reduction.
class HcbStack {
 public:
  HcbStack() = default;

  /// `width` must reduce to exactly 1; the first block mixes `depth` input
  /// channels into k filters.
  HcbStack(std::size_t width, std::size_t depth, std::size_t k)
      : width_(width), depth_(depth) {
    if (k == 0) throw Error("filter count must be at least 1");
    const std::size_t n = required_hcbs(width);
    if (n == 0) throw Error("input width 1 leaves nothing for blocks to do");
    for (std::size_t b = 0; b < n; ++b)
      blocks_.push_back(HcbBlock::make(b == 0, depth, k));
  }

  std::size_t width() const { return width_; }
  std::size_t depth() const { return depth_; }
  std::size_t filters() const { return blocks_.front().filters(); }
  std::vector<HcbBlock>& blocks() { return blocks_; }
  const std::vector<HcbBlock>& blocks() const { return blocks_; }

  /// He-uniform for the mixing conv; depthwise kernels start positive so
  /// channels carry signal through the whole stack at initialization.
  template <typename Rng>
  void initialize(Rng& rng) {
    for (HcbBlock& b : blocks_) {
      if (b.mixing) {
        const double limit = std::sqrt(6.0 / static_cast<double>(2 * depth_));
        std::uniform_real_distribution<double> he(-limit, limit);
        for (double& w : b.conv1_weights.raw()) w = he(rng);
      } else {
        fill_depthwise(b.conv1_weights, rng);
      }
      fill_depthwise(b.conv2_weights, rng);
      b.conv1_bias.fill(0.0);
      b.conv2_bias.fill(0.0);
    }
  }

  std::vector<Tensor*> parameters() {
    std::vector<Tensor*> out;
    for (auto& b : blocks_)
      for (Tensor* t : b.parameters()) out.push_back(t);
    return out;
  }
  std::vector<const Tensor*> parameters() const {
    std::vector<const Tensor*> out;
    for (const auto& b : blocks_)
      for (const Tensor* t : b.parameters()) out.push_back(t);
    return out;
  }

  HcbStack zeros_like() const {
    HcbStack z;
    z.width_ = width_;
    z.depth_ = depth_;
    for (const auto& b : blocks_) z.blocks_.push_back(b.zeros_like());
    return z;
  }

  /// (rows, width, depth) -> (rows, k).
  Tensor forward(const Tensor& input, std::vector<HcbTrace>* traces = nullptr) const {
    if (input.rank() != 3 || input.dim(1) != width_ || input.dim(2) != depth_) {
      throw Error("block stack expects (rows, " + std::to_string(width_) + ", " +
                  std::to_string(depth_) + ") input, got " +
                  shape_string(input.shape()));
    }
    if (traces) traces->assign(blocks_.size(), HcbTrace{});
    Tensor x = input;
    for (std::size_t b = 0; b < blocks_.size(); ++b)
      x = hcb_forward(x, blocks_[b], traces ? &(*traces)[b] : nullptr);
    return x.reshaped({input.dim(0), filters()});
  }

  /// grad_out has shape (rows, k). Accumulates into `grads`.
  Tensor backward(const std::vector<HcbTrace>& traces, const Tensor& grad_out,
                  HcbStack& grads, bool want_input_grad) const {
    Tensor g = grad_out.reshaped({grad_out.dim(0), 1, filters()});
    for (std::size_t b = blocks_.size(); b-- > 0;) {
      const bool need = b > 0 || want_input_grad;
      g = hcb_backward(traces[b], blocks_[b], g, grads.blocks_[b], need);
    }
    return g;
  }

 private:
  template <typename Rng>
  static void fill_depthwise(Tensor& w, Rng& rng) {
    std::uniform_real_distribution<double> pos(0.25, 0.75);
    for (double& v : w.raw()) v = pos(rng);
  }

  std::size_t width_ = 0;
  std::size_t depth_ = 0;
  std::vector<HcbBlock> blocks_;
};

/// Sentence-level CNN over article tensors of shape (t_d + 1, t_s, E).
class Slcnn {
 public:
  Slcnn() = default;
  Slcnn(std::size_t t_s, std::size_t embedding_dim, std::size_t k = kDefaultFilters)
      : stack_(t_s, embedding_dim, k) {}

  HcbStack& stack() { return stack_; }
  const HcbStack& stack() const { return stack_; }
  std::size_t block_count() const { return stack_.blocks().size(); }

  Tensor forward(const Tensor& article, std::vector<HcbTrace>* traces = nullptr) const {
    return stack_.forward(article, traces);
  }

 private:
  HcbStack stack_;
};

inline Tensor slcnn_forward(const Slcnn& model, const Tensor& article) {
  return model.forward(article);
}

}  // namespace frdetect
