#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "frdetect/corpus.hpp"

namespace frdetect {

/// Binary confusion counts with Fake as the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  void add(Label truth, Label predicted) {
    if (predicted == Label::Fake) {
      (truth == Label::Fake ? tp : fp)++;
    } else {
      (truth == Label::Real ? tn : fn)++;
    }
  }

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct EvalReport {
  ConfusionMatrix counts;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when a ratio had a zero denominator and was reported as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

inline EvalReport make_report(const ConfusionMatrix& m) {
  if (m.total() == 0) throw Error("cannot evaluate an empty test set");
  EvalReport r;
  r.counts = m;
  const auto ratio = [](std::size_t num, std::size_t den, bool& undefined) {
    undefined = den == 0;
    return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  bool unused = false;
  r.accuracy = ratio(m.tp + m.tn, m.total(), unused);
  r.precision = ratio(m.tp, m.tp + m.fp, r.precision_undefined);
  r.recall = ratio(m.tp, m.tp + m.fn, r.recall_undefined);
  r.f1_undefined = r.precision + r.recall == 0.0;
  r.f1 = r.f1_undefined ? 0.0
                        : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

inline EvalReport evaluate_predictions(std::span<const Label> truth,
                                       std::span<const Label> predicted) {
  if (truth.size() != predicted.size()) {
    throw Error("label and prediction counts differ");
  }
  ConfusionMatrix m;
  for (std::size_t i = 0; i < truth.size(); ++i) m.add(truth[i], predicted[i]);
  return make_report(m);
}

}  // namespace frdetect
