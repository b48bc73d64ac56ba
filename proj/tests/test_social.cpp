#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "frdetect/social.hpp"
#include "oracles.hpp"

using namespace frdetect;

namespace {

NewsArticle news(std::string id, Label label, std::vector<std::string> pubs) {
  NewsArticle a;
  a.id = std::move(id);
  a.label = label;
  a.publisher_ids = std::move(pubs);
  return a;
}

std::string node(std::size_t i) { return "n" + std::to_string(i); }

FollowerGraph build(std::size_t nodes, const std::vector<oracle::Edge>& edges) {
  FollowerGraph g;
  for (std::size_t i = 0; i < nodes; ++i) g.add_user(node(i));
  for (const auto& [a, b] : edges) g.add_follow(node(a), node(b));
  return g;
}

}  // namespace

TEST(Credit, TalliesTrainingHistory) {
  std::vector<NewsArticle> train;
  for (int i = 0; i < 5; ++i)
    train.push_back(news("a" + std::to_string(i), i < 2 ? Label::Fake : Label::Real, {"P"}));
  train.push_back(news("dup", Label::Fake, {"Q", "Q"}));
  const auto ledger = tally_credit(train);
  EXPECT_EQ(ledger.lookup("P"), (CreditTally{5, 2}));
  EXPECT_EQ(ledger.lookup("Q"), (CreditTally{1, 1}));
  EXPECT_EQ(ledger.lookup("nobody"), (CreditTally{0, 0}));
}

TEST(Credit, ArticleVectorAveragesPublishers) {
  CreditLedger ledger;
  for (int i = 0; i < 4; ++i) ledger.record("A", i == 0 ? Label::Fake : Label::Real);
  for (int i = 0; i < 6; ++i) ledger.record("B", i < 3 ? Label::Fake : Label::Real);
  const auto v = raw_credit(news("x", Label::Real, {"A", "B"}), ledger);
  EXPECT_DOUBLE_EQ(v.nct, 5.0);
  EXPECT_DOUBLE_EQ(v.ncf, 2.0);
  EXPECT_DOUBLE_EQ(v.num_p, 2.0);
  EXPECT_FALSE(v.cold);

  const auto swapped = raw_credit(news("y", Label::Real, {"B", "A"}), ledger);
  EXPECT_EQ(swapped.values(), v.values());

  const auto cold = raw_credit(news("z", Label::Real, {}), ledger);
  EXPECT_TRUE(cold.cold);
  EXPECT_EQ(cold.values(), (std::vector<double>{0, 0, 0}));
}

TEST(Influence, ArticleVectorAveragesPublishers) {
  auto table = InfluenceTable::from_counts({{"A", 10}, {"B", 30}});
  const auto v = raw_influence(news("x", Label::Real, {"A", "B"}), table);
  EXPECT_DOUBLE_EQ(v.ni, 20.0);
  EXPECT_DOUBLE_EQ(v.num_p, 2.0);
  EXPECT_DOUBLE_EQ(raw_influence(news("y", Label::Real, {"A", "ghost"}), table).ni, 5.0);
  EXPECT_TRUE(raw_influence(news("z", Label::Real, {}), table).cold);
}

TEST(FollowerGraph, LevelSets) {
  // chain: n1 follows n0, n2 follows n1
  auto chain = build(3, {{1, 0}, {2, 1}});
  EXPECT_EQ(level_followers(chain, "n0", 1), (std::set<std::string>{"n1"}));
  EXPECT_EQ(level_followers(chain, "n0", 2), (std::set<std::string>{"n2"}));
  EXPECT_TRUE(level_followers(chain, "n0", 3).empty());

  auto isolated = build(3, {});
  EXPECT_TRUE(level_followers(isolated, "n0", 1).empty());

  // Mutual follow: level 2 returns to n0, which is excluded.
  auto cycle = build(2, {{0, 1}, {1, 0}});
  EXPECT_EQ(level_followers(cycle, "n0", 1), (std::set<std::string>{"n1"}));
  EXPECT_TRUE(level_followers(cycle, "n0", 2).empty());
  EXPECT_EQ(level_followers(cycle, "n0", 3), (std::set<std::string>{"n1"}));

  EXPECT_THROW(level_followers(chain, "n0", 0), Error);
  EXPECT_THROW(level_followers(chain, "ghost", 1), Error);
}

TEST(FollowerGraph, IgnoresDuplicatesAndSelfFollows) {
  FollowerGraph g;
  g.add_follow("a", "b");
  g.add_follow("a", "b");
  g.add_follow("b", "b");
  EXPECT_EQ(g.followers(g.id("b")).size(), 1u);
  EXPECT_EQ(g.node_count(), 2u);
}

TEST(UserInfluence, HandCases) {
  // Star of 5 followers, N = 6.
  auto star = build(6, {{1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}});
  star.set_share_probability(0.3);
  EXPECT_DOUBLE_EQ(user_influence(star, "n0"), 1.0);
  EXPECT_DOUBLE_EQ(follower_count_influence(star, "n0"), 5.0);
  EXPECT_DOUBLE_EQ(follower_count_influence(star, "n1"), 0.0);

  // Chain of 3 with p = 0.5: (1 + 0.5) / 2.
  auto chain = build(3, {{1, 0}, {2, 1}});
  chain.set_share_probability(0.5);
  EXPECT_DOUBLE_EQ(user_influence(chain, "n0"), 0.75);
  chain.set_max_depth(1);
  EXPECT_DOUBLE_EQ(user_influence(chain, "n0"), 0.5);

  auto isolated = build(4, {});
  EXPECT_EQ(user_influence(isolated, "n2"), 0.0);

  auto lonely = build(1, {});
  EXPECT_THROW(user_influence(lonely, "n0"), Error);
}

TEST(UserInfluence, StarMatchesFollowerCount) {
  for (std::size_t k = 1; k < 10; ++k) {
    std::vector<oracle::Edge> edges;
    for (std::size_t i = 1; i <= k; ++i) edges.push_back({i, 0});
    auto g = build(k + 1, edges);
    g.set_share_probability(0.7);
    EXPECT_DOUBLE_EQ(user_influence(g, "n0") * static_cast<double>(k),
                     follower_count_influence(g, "n0"));
  }
}

TEST(UserInfluence, MatchesOracleOnRandomGraphs) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 9;
    std::vector<oracle::Edge> edges;
    const double density = unit(rng) * 0.5;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (a != b && unit(rng) < density) edges.push_back({a, b});
    auto g = build(n, edges);
    const double p = unit(rng);
    const std::size_t d_max = trial % 3 == 0 ? 2 : 0;
    g.set_share_probability(p);
    g.set_max_depth(d_max);
    for (std::size_t u = 0; u < n; ++u) {
      const double ui = user_influence(g, node(u));
      EXPECT_NEAR(ui, oracle::influence(n, edges, u, p, n, d_max), 1e-12);
      EXPECT_GE(ui, 0.0);
      EXPECT_LE(ui, 1.0);
    }
  }
}

TEST(UserInfluence, MonotoneInAddedFollowers) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> pick(0, 7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<oracle::Edge> edges;
    for (int e = 0; e < 10; ++e) edges.push_back({pick(rng), pick(rng)});
    auto before = build(8, edges);
    before.set_share_probability(0.4);
    edges.push_back({pick(rng), 0});
    auto after = build(8, edges);
    after.set_share_probability(0.4);
    EXPECT_GE(user_influence(after, "n0"), user_influence(before, "n0") - 1e-15);
  }
}

TEST(UserInfluence, TotalUsersWidensTheDenominator) {
  auto g = build(3, {{1, 0}, {2, 0}});
  g.set_total_users(5);
  EXPECT_DOUBLE_EQ(user_influence(g, "n0"), 0.5);
  EXPECT_THROW(g.set_total_users(2), Error);
  EXPECT_THROW(g.set_share_probability(1.5), Error);
}

TEST(InfluenceTable, FromGraphAndLookup) {
  auto g = build(4, {{1, 0}, {2, 0}, {3, 1}});
  g.set_share_probability(0.5);
  std::vector<std::string> users{"n0", "n1", "ghost"};
  auto counts = InfluenceTable::from_graph(g, InfluenceMode::FollowerCount, users);
  EXPECT_EQ(counts.lookup("n0"), 2.0);
  EXPECT_EQ(counts.lookup("n1"), 1.0);
  EXPECT_EQ(counts.lookup("ghost"), 0.0);
  auto exact = InfluenceTable::from_graph(g, InfluenceMode::Exact, users);
  EXPECT_DOUBLE_EQ(exact.lookup("n0"), (2 + 0.5) / 3.0);
}

TEST(FileFormats, EdgeListAndFollowerCounts) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto edges = dir / "frdetect_social_edges.txt";
  std::ofstream(edges) << "# follower followed\na b\nc b\n\nc a\n";
  auto g = FollowerGraph::load_edge_list(edges.string());
  EXPECT_EQ(g.node_count(), 3u);
  EXPECT_EQ(g.followers(g.id("b")).size(), 2u);

  const auto bad = dir / "frdetect_social_bad.txt";
  std::ofstream(bad) << "a b c\n";
  EXPECT_THROW(FollowerGraph::load_edge_list(bad.string()), Error);

  const auto counts = dir / "frdetect_social_counts.tsv";
  std::ofstream(counts) << "alice\t512\nbob\t370\n";
  auto m = load_follower_counts(counts.string());
  EXPECT_EQ(m.at("alice"), 512.0);
  EXPECT_EQ(m.at("bob"), 370.0);
  std::ofstream(bad) << "alice\t-3\n";
  EXPECT_THROW(load_follower_counts(bad.string()), Error);
}

TEST(MinMax, Examples) {
  std::vector<double> v{2, 4, 10};
  auto s = fit_minmax(v);
  EXPECT_DOUBLE_EQ(apply_minmax(s, 4), 0.25);
  EXPECT_EQ(apply_minmax(s, 2), 0.0);
  EXPECT_EQ(apply_minmax(s, 10), 1.0);
  EXPECT_EQ(apply_minmax(s, 40), 1.0);
  EXPECT_EQ(apply_minmax(s, -1), 0.0);

  std::vector<double> flat{3, 3, 3};
  EXPECT_EQ(apply_minmax(fit_minmax(flat), 3), 0.0);
  EXPECT_THROW(fit_minmax(std::vector<double>{}), Error);
}

TEST(MinMax, LargeCountsStayFinite) {
  std::vector<double> v{512, 370, 0};
  auto s = fit_minmax(v);
  EXPECT_DOUBLE_EQ(apply_minmax(s, 370), 370.0 / 512.0);
}

TEST(FollowerGraph, LevelSetsMatchOracle) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<std::size_t> pick(0, 6);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<oracle::Edge> edges;
    for (int e = 0; e < 12; ++e) edges.push_back({pick(rng), pick(rng)});
    const auto g = build(7, edges);
    const std::size_t u = pick(rng);
    const auto want = oracle::level_sets(7, edges, u, 6);
    for (std::size_t level = 1; level <= 6; ++level) {
      std::set<std::string> expect;
      for (std::size_t x = 0; x < 7; ++x)
        if (x != u && (want[level - 1] >> x & 1u)) expect.insert(node(x));
      EXPECT_EQ(level_followers(g, node(u), level), expect);
    }
  }
}
