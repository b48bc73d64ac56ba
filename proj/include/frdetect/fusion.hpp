#pragma once

// Integrator (sentence-level concatenation of publisher features with the
// latent rows, reduced again by HCBs) and the dense softmax classifier, plus
// the composed end-to-end model with its backward pass.

#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "frdetect/corpus.hpp"
#include "frdetect/ops.hpp"
#include "frdetect/slcnn.hpp"
#include "frdetect/social.hpp"
#include "frdetect/tensor.hpp"

namespace frdetect {

/// Which publisher features feed the integrator.
enum class Variant { Slcnn, SlcnnCredit, SlcnnInfluence, Full };

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::Slcnn: return "slcnn";
    case Variant::SlcnnCredit: return "slcnn_c";
    case Variant::SlcnnInfluence: return "slcnn_i";
    case Variant::Full: return "full";
  }
  return "full";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "slcnn") return Variant::Slcnn;
  if (s == "slcnn_c") return Variant::SlcnnCredit;
  if (s == "slcnn_i") return Variant::SlcnnInfluence;
  if (s == "full") return Variant::Full;
  throw Error("unknown model variant '" + s +
              "' (expected slcnn, slcnn_c, slcnn_i or full)");
}

inline constexpr Variant kAllVariants[] = {Variant::Slcnn, Variant::SlcnnCredit,
                                           Variant::SlcnnInfluence, Variant::Full};

inline std::size_t explicit_width(Variant v) {
  switch (v) {
    case Variant::Slcnn: return 0;
    case Variant::SlcnnCredit: return 3;
    case Variant::SlcnnInfluence: return 2;
    case Variant::Full: return 5;
  }
  return 0;
}

/// Explicit columns in fixed order: NCT, NCF, numP (credit) then NI, numP
/// (influence), restricted to what the variant uses.
inline std::vector<double> explicit_features(Variant v, const CreditVector& c,
                                             const InfluenceVector& i) {
  switch (v) {
    case Variant::Slcnn: return {};
    case Variant::SlcnnCredit: return {c.nct, c.ncf, c.num_p};
    case Variant::SlcnnInfluence: return {i.ni, i.num_p};
    case Variant::Full: return {c.nct, c.ncf, c.num_p, i.ni, i.num_p};
  }
  return {};
}

/// Appends the same explicit values to every latent row: (rows, k) ->
/// (rows, k + m).
inline Tensor integrate(const Tensor& latent, std::span<const double> explicit_values) {
  if (latent.rank() != 2) {
    throw Error("latent features must be (rows, k), got " +
                shape_string(latent.shape()));
  }
  const std::size_t rows = latent.dim(0), k = latent.dim(1);
  const std::size_t width = k + explicit_values.size();
  Tensor out({rows, width});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < k; ++c) out.at(r, c) = latent.at(r, c);
    for (std::size_t c = 0; c < explicit_values.size(); ++c)
      out.at(r, k + c) = explicit_values[c];
  }
  return out;
}

inline Tensor integrate(const Tensor& latent, const CreditVector& credit,
                        const InfluenceVector& influence,
                        Variant variant = Variant::Full) {
  return integrate(latent, explicit_features(variant, credit, influence));
}

/// HCB reduction of integrated rows back to one k-vector per row. The
/// integrated matrix is treated as a depth-1 input.
class Integrator {
 public:
  Integrator() = default;
  Integrator(std::size_t row_width, std::size_t k) : stack_(row_width, 1, k) {}

  HcbStack& stack() { return stack_; }
  const HcbStack& stack() const { return stack_; }

  Tensor forward(const Tensor& integrated,
                 std::vector<HcbTrace>* traces = nullptr) const {
    return stack_.forward(
        integrated.reshaped({integrated.dim(0), integrated.dim(1), 1}), traces);
  }

 private:
  HcbStack stack_;
};

inline Tensor integrator_reduce(const Tensor& integrated, const Integrator& integrator) {
  return integrator.forward(integrated);
}

// ---------------------------------------------------------------------------
// Classifier head
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDefaultDenseWidth = 64;
inline constexpr double kDefaultDropout = 0.5;

struct ClassifierHead {
  Tensor w1, b1, w2, b2, w3, b3;
  double dropout_rate = kDefaultDropout;

  ClassifierHead() = default;
  ClassifierHead(std::size_t inputs, std::size_t hidden, double dropout)
      : w1({inputs, hidden}),
        b1({hidden}),
        w2({hidden, hidden}),
        b2({hidden}),
        w3({hidden, 2}),
        b3({2}),
        dropout_rate(dropout) {}

  std::size_t inputs() const { return w1.dim(0); }

  template <typename Rng>
  void initialize(Rng& rng) {
    auto he = [&](Tensor& w) {
      const double limit = std::sqrt(6.0 / static_cast<double>(w.dim(0)));
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (double& v : w.raw()) v = dist(rng);
    };
    auto glorot = [&](Tensor& w) {
      const double limit = std::sqrt(6.0 / static_cast<double>(w.dim(0) + w.dim(1)));
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (double& v : w.raw()) v = dist(rng);
    };
    he(w1);
    he(w2);
    glorot(w3);
    b1.fill(0.0);
    b2.fill(0.0);
    b3.fill(0.0);
  }

  std::vector<Tensor*> parameters() { return {&w1, &b1, &w2, &b2, &w3, &b3}; }
  std::vector<const Tensor*> parameters() const {
    return {&w1, &b1, &w2, &b2, &w3, &b3};
  }
};

struct HeadTrace {
  std::vector<double> input;
  std::vector<double> hidden1, drop1_mask, dropped1;
  std::vector<double> hidden2, drop2_mask, dropped2;
  std::vector<double> logits;
  std::vector<double> probabilities;
};

struct Prediction {
  std::vector<double> probabilities;  // [p_real, p_fake]
  Label label = Label::Real;
};

/// Ties go to Real: Fake needs strictly greater probability.
inline Label decide(std::span<const double> probabilities) {
  return probabilities[1] > probabilities[0] ? Label::Fake : Label::Real;
}

template <typename Rng>
std::vector<double> head_forward(const ClassifierHead& head,
                                 std::span<const double> features, Mode mode,
                                 Rng& rng, HeadTrace* trace) {
  auto h1 = dense_forward(features, head.w1, head.b1, true);
  auto d1 = dropout(h1, head.dropout_rate, mode, rng);
  auto h2 = dense_forward(d1.output, head.w2, head.b2, true);
  auto d2 = dropout(h2, head.dropout_rate, mode, rng);
  auto logits = dense_forward(d2.output, head.w3, head.b3, false);
  if (trace) {
    trace->input.assign(features.begin(), features.end());
    trace->hidden1 = std::move(h1);
    trace->drop1_mask = std::move(d1.mask);
    trace->dropped1 = std::move(d1.output);
    trace->hidden2 = std::move(h2);
    trace->drop2_mask = std::move(d2.mask);
    trace->dropped2 = std::move(d2.output);
    trace->logits = logits;
  }
  return logits;
}

/// Returns d loss / d features.
inline std::vector<double> head_backward(const ClassifierHead& head,
                                         const HeadTrace& t,
                                         std::span<const double> grad_logits,
                                         ClassifierHead& grads) {
  auto g = dense_backward(t.dropped2, head.w3, t.logits, grad_logits, false,
                          grads.w3, grads.b3);
  g = dropout_backward(g, t.drop2_mask);
  g = dense_backward(t.dropped1, head.w2, t.hidden2, g, true, grads.w2, grads.b2);
  g = dropout_backward(g, t.drop1_mask);
  return dense_backward(t.input, head.w1, t.hidden1, g, true, grads.w1, grads.b1);
}

template <typename Rng>
Prediction classify(const ClassifierHead& head, std::span<const double> features,
                    Mode mode, Rng& rng) {
  const auto logits = head_forward(head, features, mode, rng, nullptr);
  Prediction p;
  p.probabilities = softmax_xent(logits, 0).probabilities;
  p.label = decide(p.probabilities);
  return p;
}

inline Prediction classify(const ClassifierHead& head,
                           std::span<const double> features) {
  std::mt19937_64 unused(0);
  return classify(head, features, Mode::Eval, unused);
}

// ---------------------------------------------------------------------------
// End-to-end model
// ---------------------------------------------------------------------------

struct ModelShape {
  Variant variant = Variant::Full;
  std::size_t t_s = kDefaultWordsPerSentence;
  std::size_t t_d = 1;
  std::size_t embedding_dim = 100;
  std::size_t filters = kDefaultFilters;
  std::size_t dense_width = kDefaultDenseWidth;
  double dropout = kDefaultDropout;

  std::size_t rows() const { return t_d + 1; }
  bool operator==(const ModelShape&) const = default;
};

struct ModelTrace {
  std::vector<HcbTrace> slcnn;
  std::vector<HcbTrace> integrator;
  HeadTrace head;
};

class FrDetectModel {
 public:
  FrDetectModel() = default;

  explicit FrDetectModel(const ModelShape& shape)
      : shape_(shape), slcnn_(shape.t_s, shape.embedding_dim, shape.filters) {
    if (explicit_width(shape.variant) > 0) {
      integrator_.emplace(shape.filters + explicit_width(shape.variant),
                          shape.filters);
    }
    head_ = ClassifierHead(shape.rows() * shape.filters, shape.dense_width,
                           shape.dropout);
  }

  template <typename Rng>
  void initialize(Rng& rng) {
    slcnn_.stack().initialize(rng);
    if (integrator_) integrator_->stack().initialize(rng);
    head_.initialize(rng);
  }

  const ModelShape& shape() const { return shape_; }
  Slcnn& slcnn() { return slcnn_; }
  const Slcnn& slcnn() const { return slcnn_; }
  std::optional<Integrator>& integrator() { return integrator_; }
  const std::optional<Integrator>& integrator() const { return integrator_; }
  ClassifierHead& head() { return head_; }
  const ClassifierHead& head() const { return head_; }

  FrDetectModel zeros_like() const {
    FrDetectModel z = *this;
    for (Tensor* t : z.parameters()) t->fill(0.0);
    return z;
  }

  std::vector<Tensor*> parameters() {
    std::vector<Tensor*> out = slcnn_.stack().parameters();
    if (integrator_)
      for (Tensor* t : integrator_->stack().parameters()) out.push_back(t);
    for (Tensor* t : head_.parameters()) out.push_back(t);
    return out;
  }

  std::vector<const Tensor*> parameters() const {
    std::vector<const Tensor*> out = slcnn_.stack().parameters();
    if (integrator_)
      for (const Tensor* t : integrator_->stack().parameters()) out.push_back(t);
    for (const Tensor* t : head_.parameters()) out.push_back(t);
    return out;
  }

  /// Stable names for checkpoints, parallel to parameters().
  std::vector<std::string> parameter_names() const {
    std::vector<std::string> names;
    auto add_stack = [&](const std::string& prefix, const HcbStack& s) {
      for (std::size_t b = 0; b < s.blocks().size(); ++b) {
        const std::string p = prefix + ".block" + std::to_string(b);
        names.push_back(p + ".conv1.weight");
        names.push_back(p + ".conv1.bias");
        names.push_back(p + ".conv2.weight");
        names.push_back(p + ".conv2.bias");
      }
    };
    add_stack("slcnn", slcnn_.stack());
    if (integrator_) add_stack("integrator", integrator_->stack());
    for (const char* n : {"dense1.weight", "dense1.bias", "dense2.weight",
                          "dense2.bias", "output.weight", "output.bias"})
      names.push_back(std::string("head.") + n);
    return names;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const Tensor* t : parameters()) n += t->size();
    return n;
  }

  /// Flattened (rows * k) feature vector fed to the classifier.
  std::vector<double> features(const Tensor& article,
                               std::span<const double> explicit_values,
                               ModelTrace* trace) const {
    check_explicit(explicit_values);
    Tensor latent = slcnn_.forward(article, trace ? &trace->slcnn : nullptr);
    if (!integrator_) return latent.raw();
    Tensor fused = integrate(latent, explicit_values);
    return integrator_->forward(fused, trace ? &trace->integrator : nullptr).raw();
  }

  template <typename Rng>
  std::vector<double> logits(const Tensor& article,
                             std::span<const double> explicit_values, Mode mode,
                             Rng& rng, ModelTrace* trace = nullptr) const {
    const auto flat = features(article, explicit_values, trace);
    return head_forward(head_, flat, mode, rng, trace ? &trace->head : nullptr);
  }

  Prediction predict(const Tensor& article,
                     std::span<const double> explicit_values) const {
    std::mt19937_64 unused(0);
    const auto l = logits(article, explicit_values, Mode::Eval, unused);
    Prediction p;
    p.probabilities = softmax_xent(l, 0).probabilities;
    p.label = decide(p.probabilities);
    return p;
  }

  /// Forward + backward for one article. Gradients accumulate into `grads`
  /// (a zeros_like() copy). Returns the cross-entropy loss. `article_grad`,
  /// when given, receives d loss / d article.
  template <typename Rng>
  double accumulate_gradient(const Tensor& article,
                             std::span<const double> explicit_values, Label label,
                             Mode mode, Rng& rng, FrDetectModel& grads,
                             Prediction* prediction = nullptr,
                             Tensor* article_grad = nullptr) const {
    ModelTrace trace;
    const auto l = logits(article, explicit_values, mode, rng, &trace);
    const auto sm = softmax_xent(l, static_cast<std::size_t>(label));
    if (prediction) {
      prediction->probabilities = sm.probabilities;
      prediction->label = decide(sm.probabilities);
    }
    const auto g_logits =
        softmax_xent_grad(sm.probabilities, static_cast<std::size_t>(label));
    const auto g_flat = head_backward(head_, trace.head, g_logits, grads.head_);

    const std::size_t rows = shape_.rows(), k = shape_.filters;
    Tensor g_latent({rows, k}, g_flat);
    if (integrator_) {
      Tensor g_fused = integrator_->stack().backward(
          trace.integrator, g_latent, grads.integrator_->stack(), true);
      // Drop the explicit-feature columns; they are inputs, not parameters.
      const std::size_t width = g_fused.dim(1);
      Tensor g({rows, k});
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < k; ++c) g.at(r, c) = g_fused[r * width + c];
      g_latent = std::move(g);
    }
    Tensor g_article = slcnn_.stack().backward(trace.slcnn, g_latent, grads.slcnn_.stack(),
                                               article_grad != nullptr);
    if (article_grad) *article_grad = g_article.reshaped(article.shape());
    return sm.loss;
  }

 private:
  void check_explicit(std::span<const double> values) const {
    if (values.size() != explicit_width(shape_.variant)) {
      throw Error("variant " + to_string(shape_.variant) + " expects " +
                  std::to_string(explicit_width(shape_.variant)) +
                  " explicit features, got " + std::to_string(values.size()));
    }
  }

  ModelShape shape_;
  Slcnn slcnn_;
  std::optional<Integrator> integrator_;
  ClassifierHead head_;
};

}  // namespace frdetect
