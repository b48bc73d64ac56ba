#pragma once

// Publisher-side features: activity credibility tallies, follower-graph
// influence, and their per-article averages with min-max normalization.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "frdetect/corpus.hpp"
#include "frdetect/tensor.hpp"

namespace frdetect {

// ---------------------------------------------------------------------------
// Activity credibility
// ---------------------------------------------------------------------------

struct CreditTally {
  std::uint64_t total = 0;  // UCT
  std::uint64_t fake = 0;   // UCF

  bool operator==(const CreditTally&) const = default;
};

class CreditLedger {
 public:
  CreditTally lookup(const std::string& user) const {
    auto it = tallies_.find(user);
    return it == tallies_.end() ? CreditTally{} : it->second;
  }

  void record(const std::string& user, Label label) {
    CreditTally& t = tallies_[user];
    ++t.total;
    if (label == Label::Fake) ++t.fake;
  }

  std::size_t user_count() const { return tallies_.size(); }
  const std::unordered_map<std::string, CreditTally>& tallies() const {
    return tallies_;
  }

 private:
  std::unordered_map<std::string, CreditTally> tallies_;
};

/// Counts, per publisher, the training articles they published and how many
/// of those are fake. A publisher listed twice on one article counts once.
inline CreditLedger tally_credit(std::span<const NewsArticle> train) {
  CreditLedger ledger;
  for (const NewsArticle& a : train) {
    std::unordered_set<std::string> seen;
    for (const std::string& p : a.publisher_ids)
      if (seen.insert(p).second) ledger.record(p, a.label);
  }
  return ledger;
}

// ---------------------------------------------------------------------------
// Follower graph
// ---------------------------------------------------------------------------

enum class InfluenceMode { Exact, FollowerCount };

inline std::string to_string(InfluenceMode m) {
  return m == InfluenceMode::Exact ? "exact" : "follower_count";
}

inline InfluenceMode parse_influence_mode(const std::string& s) {
  if (s == "exact") return InfluenceMode::Exact;
  if (s == "follower_count") return InfluenceMode::FollowerCount;
  throw Error("unknown influence mode '" + s +
              "' (expected exact or follower_count)");
}

/// Directed "is followed by" adjacency. N (total users on the network) may
/// exceed the number of users that appear in edges.
class FollowerGraph {
 public:
  FollowerGraph() = default;

  std::size_t add_user(const std::string& user) {
    auto [it, inserted] = index_.try_emplace(user, names_.size());
    if (inserted) {
      names_.push_back(user);
      followers_.emplace_back();
    }
    return it->second;
  }

  /// `follower` follows `followed`. Duplicates and self-follows are ignored.
  void add_follow(const std::string& follower, const std::string& followed) {
    const std::size_t a = add_user(follower);
    const std::size_t b = add_user(followed);
    if (a == b) return;
    auto& list = followers_[b];
    if (std::find(list.begin(), list.end(), a) == list.end()) list.push_back(a);
  }

  /// Edge-list text: one `follower_id followed_id` pair per line.
  static FollowerGraph load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open edge list " + path);
    FollowerGraph g;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::istringstream ls(line);
      std::string follower, followed, extra;
      if (!(ls >> follower)) continue;
      if (follower.front() == '#') continue;
      if (!(ls >> followed) || (ls >> extra)) {
        throw Error(path + ":" + std::to_string(line_no) +
                    ": expected 'follower_id followed_id'");
      }
      g.add_follow(follower, followed);
    }
    return g;
  }

  bool contains(const std::string& user) const { return index_.count(user) != 0; }
  std::size_t node_count() const { return names_.size(); }
  const std::string& name(std::size_t id) const { return names_.at(id); }

  std::size_t id(const std::string& user) const {
    auto it = index_.find(user);
    if (it == index_.end()) throw Error("unknown user '" + user + "'");
    return it->second;
  }

  const std::vector<std::size_t>& followers(std::size_t id) const {
    return followers_.at(id);
  }

  /// N in the influence formula; defaults to the number of known users.
  std::size_t total_users() const {
    return std::max(total_users_, names_.size());
  }
  void set_total_users(std::size_t n) {
    if (n != 0 && n < names_.size()) {
      throw Error("total user count " + std::to_string(n) +
                  " is smaller than the " + std::to_string(names_.size()) +
                  " users in the graph");
    }
    total_users_ = n;
  }

  double share_probability() const { return share_probability_; }
  void set_share_probability(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error("share probability must lie in [0, 1]");
    share_probability_ = p;
  }

  /// Deepest follower level summed by user_influence; 0 means unbounded.
  std::size_t max_depth() const { return max_depth_; }
  void set_max_depth(std::size_t d) { max_depth_ = d; }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> names_;
  std::vector<std::vector<std::size_t>> followers_;
  std::size_t total_users_ = 0;
  double share_probability_ = 0.0;
  std::size_t max_depth_ = 0;
};

/// Level-i followers: level 1 is the follower set, level i the union of the
/// followers of level i-1. `u` itself is removed from the returned set but
/// still expands when a cycle reaches it.
inline std::set<std::string> level_followers(const FollowerGraph& g,
                                             const std::string& u,
                                             std::size_t level) {
  if (level == 0) throw Error("follower level must be at least 1");
  const std::size_t root = g.id(u);
  std::set<std::size_t> frontier(g.followers(root).begin(),
                                 g.followers(root).end());
  for (std::size_t i = 2; i <= level && !frontier.empty(); ++i) {
    std::set<std::size_t> next;
    for (std::size_t x : frontier)
      next.insert(g.followers(x).begin(), g.followers(x).end());
    frontier = std::move(next);
  }
  std::set<std::string> out;
  for (std::size_t x : frontier)
    if (x != root) out.insert(g.name(x));
  return out;
}

/// Expected audience share of `u`: users first reached at follower level i
/// count with weight p^(i-1), normalized by N - 1. `u` never counts toward
/// its own audience.
inline double user_influence(const FollowerGraph& g, const std::string& u) {
  const std::size_t n = g.total_users();
  if (n < 2) throw Error("influence needs at least 2 users on the network");
  const std::size_t root = g.id(u);
  const std::size_t depth_limit = g.max_depth();
  const double p = g.share_probability();

  std::vector<char> reached(g.node_count(), 0);
  reached[root] = 1;
  std::vector<std::size_t> frontier{root};
  double sum = 0.0;
  double weight = 1.0;
  for (std::size_t level = 1; !frontier.empty(); ++level) {
    if (depth_limit != 0 && level > depth_limit) break;
    std::vector<std::size_t> next;
    for (std::size_t x : frontier)
      for (std::size_t f : g.followers(x))
        if (!reached[f]) {
          reached[f] = 1;
          next.push_back(f);
        }
    sum += weight * static_cast<double>(next.size());
    weight *= p;
    frontier = std::move(next);
  }
  return sum / static_cast<double>(n - 1);
}

inline double follower_count_influence(const FollowerGraph& g,
                                       const std::string& u) {
  return static_cast<double>(g.followers(g.id(u)).size());
}

/// Per-user follower counts, tab-separated `user_id<TAB>follower_count`.
inline std::unordered_map<std::string, double> load_follower_counts(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open publishers file " + path);
  std::unordered_map<std::string, double> counts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(path + ":" + std::to_string(line_no) +
                  ": expected 'user_id<TAB>follower_count'");
    }
    try {
      std::size_t used = 0;
      const std::string num = line.substr(tab + 1);
      const long long c = std::stoll(num, &used);
      if (c < 0 || used != num.size()) throw std::invalid_argument(num);
      counts[line.substr(0, tab)] = static_cast<double>(c);
    } catch (const std::exception&) {
      throw Error(path + ":" + std::to_string(line_no) + ": bad follower count");
    }
  }
  return counts;
}

/// Influence per publisher, precomputed once. Users the source knows nothing
/// about have influence 0.
class InfluenceTable {
 public:
  InfluenceTable() = default;

  static InfluenceTable from_counts(std::unordered_map<std::string, double> counts) {
    InfluenceTable t;
    t.values_ = std::move(counts);
    return t;
  }

  static InfluenceTable from_graph(const FollowerGraph& g, InfluenceMode mode,
                                   std::span<const std::string> users) {
    InfluenceTable t;
    for (const std::string& u : users) {
      if (!g.contains(u) || t.values_.count(u)) continue;
      t.values_[u] = mode == InfluenceMode::Exact ? user_influence(g, u)
                                                  : follower_count_influence(g, u);
    }
    return t;
  }

  double lookup(const std::string& user) const {
    auto it = values_.find(user);
    return it == values_.end() ? 0.0 : it->second;
  }

 private:
  std::unordered_map<std::string, double> values_;
};

// ---------------------------------------------------------------------------
// Min-max normalization
// ---------------------------------------------------------------------------

class MinMaxScaler {
 public:
  MinMaxScaler() = default;
  MinMaxScaler(std::vector<double> mins, std::vector<double> maxs)
      : min_(std::move(mins)), max_(std::move(maxs)) {
    if (min_.size() != max_.size()) throw Error("scaler bounds differ in length");
    for (std::size_t i = 0; i < min_.size(); ++i)
      if (max_[i] < min_[i]) throw Error("scaler max below min");
  }

  /// Fits per-feature bounds over rows of equal length.
  static MinMaxScaler fit(std::span<const std::vector<double>> rows) {
    if (rows.empty()) throw Error("cannot fit min-max scaler on no data");
    const std::size_t n = rows.front().size();
    std::vector<double> lo(rows.front()), hi(rows.front());
    for (const auto& r : rows) {
      if (r.size() != n) throw Error("scaler rows differ in length");
      for (std::size_t i = 0; i < n; ++i) {
        lo[i] = std::min(lo[i], r[i]);
        hi[i] = std::max(hi[i], r[i]);
      }
    }
    return MinMaxScaler(std::move(lo), std::move(hi));
  }

  std::size_t features() const { return min_.size(); }
  const std::vector<double>& mins() const { return min_; }
  const std::vector<double>& maxs() const { return max_; }

  double apply(std::size_t feature, double x) const {
    const double lo = min_.at(feature), hi = max_.at(feature);
    if (hi == lo) return 0.0;
    return std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
  }

  std::vector<double> apply(std::span<const double> row) const {
    if (row.size() != features()) throw Error("scaler applied to wrong width");
    std::vector<double> out(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) out[i] = apply(i, row[i]);
    return out;
  }

 private:
  std::vector<double> min_;
  std::vector<double> max_;
};

/// Single-feature convenience.
inline MinMaxScaler fit_minmax(std::span<const double> values) {
  std::vector<std::vector<double>> rows;
  for (double v : values) rows.push_back({v});
  return MinMaxScaler::fit(rows);
}

inline double apply_minmax(const MinMaxScaler& s, double x) {
  return s.apply(0, x);
}

// ---------------------------------------------------------------------------
// Per-article vectors
// ---------------------------------------------------------------------------

struct CreditVector {
  double nct = 0.0;
  double ncf = 0.0;
  double num_p = 0.0;
  bool cold = false;  // article has no publishers

  std::vector<double> values() const { return {nct, ncf, num_p}; }
};

struct InfluenceVector {
  double ni = 0.0;
  double num_p = 0.0;
  bool cold = false;

  std::vector<double> values() const { return {ni, num_p}; }
};

namespace detail {

inline std::vector<std::string> distinct_publishers(const NewsArticle& a) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& p : a.publisher_ids)
    if (seen.insert(p).second) out.push_back(p);
  return out;
}

}  // namespace detail

/// Mean (UCT, UCF) over the article's publishers plus the publisher count,
/// before normalization.
inline CreditVector raw_credit(const NewsArticle& article,
                               const CreditLedger& ledger) {
  const auto pubs = detail::distinct_publishers(article);
  CreditVector v;
  if (pubs.empty()) {
    v.cold = true;
    return v;
  }
  for (const auto& p : pubs) {
    const CreditTally t = ledger.lookup(p);
    v.nct += static_cast<double>(t.total);
    v.ncf += static_cast<double>(t.fake);
  }
  const double n = static_cast<double>(pubs.size());
  v.nct /= n;
  v.ncf /= n;
  v.num_p = n;
  return v;
}

inline InfluenceVector raw_influence(const NewsArticle& article,
                                     const InfluenceTable& influence) {
  const auto pubs = detail::distinct_publishers(article);
  InfluenceVector v;
  if (pubs.empty()) {
    v.cold = true;
    return v;
  }
  for (const auto& p : pubs) v.ni += influence.lookup(p);
  const double n = static_cast<double>(pubs.size());
  v.ni /= n;
  v.num_p = n;
  return v;
}

inline CreditVector normalize(const CreditVector& raw, const MinMaxScaler& s) {
  const auto x = s.apply(raw.values());
  return CreditVector{x[0], x[1], x[2], raw.cold};
}

inline InfluenceVector normalize(const InfluenceVector& raw,
                                 const MinMaxScaler& s) {
  const auto x = s.apply(raw.values());
  return InfluenceVector{x[0], x[1], raw.cold};
}

inline CreditVector article_credit(const NewsArticle& article,
                                   const CreditLedger& ledger,
                                   const MinMaxScaler& scaler) {
  return normalize(raw_credit(article, ledger), scaler);
}

inline InfluenceVector article_influence(const NewsArticle& article,
                                         const InfluenceTable& influence,
                                         const MinMaxScaler& scaler) {
  return normalize(raw_influence(article, influence), scaler);
}

}  // namespace frdetect
