#pragma once

// Slow, literal reference implementations used only by tests.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

using Edge = std::pair<std::size_t, std::size_t>;  // follower, followed

/// f_i(u) by the recursive set definition: level 1 is everyone following u,
/// level i is everyone following some member of level i-1. Sets are bitmasks,
/// so at most 64 nodes.
inline std::vector<std::uint64_t> level_sets(std::size_t nodes, const std::vector<Edge>& edges,
                                             std::size_t u, std::size_t levels) {
  if (nodes > 64) throw std::invalid_argument("oracle handles at most 64 nodes");
  std::vector<std::uint64_t> f;
  for (std::size_t i = 1; i <= levels; ++i) {
    std::uint64_t level = 0;
    for (const auto& [a, b] : edges) {
      if (a == b) continue;  // self-follows carry no audience
      const bool target = i == 1 ? b == u : (f.back() >> b & 1u) != 0;
      if (target) level |= std::uint64_t{1} << a;
    }
    f.push_back(level);
  }
  return f;
}

/// UI(u) = (|f_1| + sum_{i>=2} p^(i-1) |f_i minus earlier levels|) / (N - 1),
/// with u never counted. Levels beyond `nodes` add nothing new, so summing to
/// `nodes` covers the diameter. d_max = 0 means no cap.
inline double influence(std::size_t nodes, const std::vector<Edge>& edges, std::size_t u,
                        double p, std::size_t total_users, std::size_t d_max = 0) {
  const std::size_t levels = d_max == 0 ? nodes : std::min(nodes, d_max);
  const auto f = level_sets(nodes, edges, u, levels);
  std::uint64_t earlier = std::uint64_t{1} << u;
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto fresh = std::popcount(f[i] & ~earlier);
    sum += std::pow(p, static_cast<double>(i)) * static_cast<double>(fresh);
    earlier |= f[i];
  }
  return sum / static_cast<double>(total_users - 1);
}

struct Scores {
  double accuracy, precision, recall, f1;
};

/// Fake (true) is the positive class; undefined ratios are 0.
inline Scores score(const std::vector<bool>& truth, const std::vector<bool>& pred) {
  double tp = 0, fp = 0, fn = 0, correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == pred[i]) correct += 1;
    if (truth[i] && pred[i]) tp += 1;
    if (!truth[i] && pred[i]) fp += 1;
    if (truth[i] && !pred[i]) fn += 1;
  }
  Scores s{};
  s.accuracy = correct / static_cast<double>(truth.size());
  s.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  s.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall)
                                    : 0.0;
  return s;
}

}  // namespace oracle
