#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "frdetect/tensor.hpp"

namespace frdetect {

/// One parameter block: its live values (perturbed in place during the
/// check) and the analytic gradient computed beforehand at those values.
struct ParamSlot {
  std::span<double> values;
  std::span<const double> analytic;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;

  bool passed(double tolerance) const { return max_rel_error <= tolerance; }
};

/// Compares analytic gradients against central finite differences on up to
/// `max_coords` coordinates sampled without replacement. The loss closure
/// must be deterministic.
inline GradCheckResult grad_check(const std::function<double()>& loss,
                                  std::span<const ParamSlot> params,
                                  std::size_t max_coords, std::uint64_t seed,
                                  double step = 1e-4) {
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].values.size() != params[b].analytic.size()) {
      throw Error("grad_check: gradient length differs from parameter length");
    }
    for (std::size_t i = 0; i < params[b].values.size(); ++i)
      coords.emplace_back(b, i);
  }
  GradCheckResult result;
  if (coords.empty()) return result;

  if (coords.size() > max_coords) {
    std::vector<std::pair<std::size_t, std::size_t>> picked;
    std::mt19937_64 rng(seed);
    std::sample(coords.begin(), coords.end(), std::back_inserter(picked),
                max_coords, rng);
    coords = std::move(picked);
  }

  auto evaluate = [&] {
    const double v = loss();
    if (!std::isfinite(v)) throw Error("grad_check: loss is not finite");
    return v;
  };
  evaluate();

  for (auto [b, i] : coords) {
    double& x = params[b].values[i];
    const double saved = x;
    x = saved + step;
    const double up = evaluate();
    x = saved - step;
    const double down = evaluate();
    x = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double analytic = params[b].analytic[i];
    const double rel = std::abs(analytic - numeric) /
                       std::max(1e-8, std::abs(analytic) + std::abs(numeric));
    result.max_rel_error = std::max(result.max_rel_error, rel);
    ++result.coordinates;
  }
  return result;
}

}  // namespace frdetect
