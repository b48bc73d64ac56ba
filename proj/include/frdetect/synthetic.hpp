#pragma once

// Desk-scale synthetic corpora with a controllable amount of label signal in
// the text and in the publishers' histories.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "frdetect/corpus.hpp"
#include "frdetect/social.hpp"

namespace frdetect {

struct SyntheticSpec {
  std::size_t real_count = 20;
  std::size_t fake_count = 20;
  double test_fraction = 0.0;

  std::size_t vocab_size = 200;
  std::size_t embedding_dim = 16;
  // Probability that a word is drawn from the label's indicative vocabulary.
  double text_signal = 0.3;
  // 0: publishers are chosen independently of the label; 1: fake-prone
  // publishers publish only fake news and reliable ones only real news.
  double publisher_signal = 0.5;

  std::size_t publishers = 20;
  std::size_t audience = 200;
  std::size_t min_sentences = 2;
  std::size_t max_sentences = 6;
  std::size_t min_words = 4;
  std::size_t max_words = 16;
};

struct SyntheticCorpus {
  std::vector<NewsArticle> train;
  std::vector<NewsArticle> test;
  std::vector<std::pair<std::string, std::vector<double>>> embeddings;
  std::vector<std::pair<std::string, std::string>> edges;  // follower, followed
  std::vector<std::pair<std::string, std::size_t>> follower_counts;
  std::vector<bool> fake_prone;  // per publisher index
};

inline void validate(const SyntheticSpec& s) {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (s.real_count + s.fake_count == 0) throw Error("synthetic corpus needs articles");
  if (!(s.test_fraction >= 0.0 && s.test_fraction < 1.0))
    throw Error("test fraction must lie in [0, 1)");
  if (s.vocab_size < 20) throw Error("vocabulary must hold at least 20 words");
  if (s.embedding_dim == 0) throw Error("embedding dimension must be positive");
  if (!in_unit(s.text_signal)) throw Error("text signal must lie in [0, 1]");
  if (!in_unit(s.publisher_signal)) throw Error("publisher signal must lie in [0, 1]");
  if (s.publishers < 2) throw Error("need at least 2 publishers");
  if (s.min_sentences == 0 || s.min_sentences > s.max_sentences)
    throw Error("bad sentence count range");
  if (s.min_words == 0 || s.min_words > s.max_words) throw Error("bad word count range");
}

inline std::string synthetic_publisher_id(std::size_t i) { return "pub" + std::to_string(i); }

inline SyntheticCorpus gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  validate(spec);
  std::mt19937_64 rng(seed);
  auto uniform_index = [&](std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  };
  auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };

  SyntheticCorpus out;

  // Vocabulary: the first tenth signals "fake", the next tenth "real", the
  // rest is shared.
  std::vector<std::string> vocab;
  for (std::size_t i = 0; i < spec.vocab_size; ++i) vocab.push_back("w" + std::to_string(i));
  const std::size_t band = spec.vocab_size / 10;
  std::normal_distribution<double> gauss(0.0, 0.5);
  for (const auto& w : vocab) {
    std::vector<double> v(spec.embedding_dim);
    for (double& x : v) x = gauss(rng);
    out.embeddings.emplace_back(w, std::move(v));
  }
  auto draw_word = [&](Label label) -> const std::string& {
    if (chance(spec.text_signal)) {
      const std::size_t offset = label == Label::Fake ? 0 : band;
      return vocab[offset + uniform_index(band)];
    }
    return vocab[2 * band + uniform_index(spec.vocab_size - 2 * band)];
  };
  auto sentence = [&](Label label, std::size_t words) {
    std::string s;
    for (std::size_t i = 0; i < words; ++i) {
      if (i) s += ' ';
      std::string w = draw_word(label);
      if (i == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
      s += w;
    }
    return s;
  };

  // Publishers: alternate fake-prone / reliable.
  std::vector<std::size_t> prone, reliable;
  for (std::size_t i = 0; i < spec.publishers; ++i) {
    out.fake_prone.push_back(i % 2 == 0);
    (i % 2 == 0 ? prone : reliable).push_back(i);
  }

  // Labels in a shuffled order so the train/test split mixes classes.
  std::vector<Label> labels(spec.real_count, Label::Real);
  labels.insert(labels.end(), spec.fake_count, Label::Fake);
  std::shuffle(labels.begin(), labels.end(), rng);

  const double s = spec.publisher_signal;
  std::vector<NewsArticle> articles;
  for (std::size_t a = 0; a < labels.size(); ++a) {
    NewsArticle art;
    art.id = "syn" + std::to_string(a);
    art.label = labels[a];
    art.headline = sentence(art.label, spec.min_words +
                                           uniform_index(spec.max_words - spec.min_words + 1));
    const std::size_t sentences =
        spec.min_sentences + uniform_index(spec.max_sentences - spec.min_sentences + 1);
    for (std::size_t i = 0; i < sentences; ++i) {
      if (i) art.body += ' ';
      art.body += sentence(art.label, spec.min_words +
                                          uniform_index(spec.max_words - spec.min_words + 1));
      art.body += '.';
    }

    // Real news tends to have more publishers when the signal is on.
    std::size_t n_pub = 1 + uniform_index(3);
    if (art.label == Label::Real && chance(s)) n_pub += 1;
    const auto& own = art.label == Label::Fake ? prone : reliable;
    for (std::size_t i = 0; i < n_pub; ++i) {
      const std::size_t p = chance(s) ? own[uniform_index(own.size())]
                                      : uniform_index(spec.publishers);
      art.publisher_ids.push_back(synthetic_publisher_id(p));
    }
    articles.push_back(std::move(art));
  }

  // Followers: fake-prone publishers have fewer followers as the signal grows.
  const std::size_t audience = std::max<std::size_t>(spec.audience, 10);
  for (std::size_t p = 0; p < spec.publishers; ++p) {
    const double mean_share = out.fake_prone[p] ? 0.2 - 0.15 * s : 0.2 + 0.15 * s;
    std::size_t count = 0;
    for (std::size_t u = 0; u < audience; ++u) {
      if (chance(mean_share)) {
        out.edges.emplace_back("aud" + std::to_string(u), synthetic_publisher_id(p));
        ++count;
      }
    }
    out.follower_counts.emplace_back(synthetic_publisher_id(p), count);
  }
  // Sparse audience-to-audience follows give the graph depth.
  for (std::size_t u = 0; u < audience; ++u) {
    const std::size_t v = uniform_index(audience);
    if (v != u)
      out.edges.emplace_back("aud" + std::to_string(u), "aud" + std::to_string(v));
  }

  const auto n_test = static_cast<std::size_t>(
      std::llround(spec.test_fraction * static_cast<double>(articles.size())));
  const std::size_t n_train = articles.size() - n_test;
  out.train.assign(articles.begin(), articles.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(articles.begin() + static_cast<std::ptrdiff_t>(n_train), articles.end());
  return out;
}

struct SyntheticPaths {
  std::string train, test, embeddings, publishers, edges;
};

inline SyntheticPaths write_synthetic(const SyntheticCorpus& corpus, const std::string& dir) {
  SyntheticPaths p{dir + "/train.jsonl", dir + "/test.jsonl", dir + "/embeddings.txt",
                   dir + "/publishers.tsv", dir + "/edges.txt"};
  save_corpus(p.train, corpus.train);
  save_corpus(p.test, corpus.test);
  {
    std::ofstream out(p.embeddings);
    if (!out) throw Error("cannot write " + p.embeddings);
    out.precision(17);
    for (const auto& [w, v] : corpus.embeddings) {
      out << w;
      for (double x : v) out << ' ' << x;
      out << '\n';
    }
  }
  {
    std::ofstream out(p.publishers);
    if (!out) throw Error("cannot write " + p.publishers);
    for (const auto& [u, c] : corpus.follower_counts) out << u << '\t' << c << '\n';
  }
  {
    std::ofstream out(p.edges);
    if (!out) throw Error("cannot write " + p.edges);
    for (const auto& [a, b] : corpus.edges) out << a << ' ' << b << '\n';
  }
  return p;
}

inline EmbeddingTable synthetic_embedding_table(const SyntheticCorpus& corpus,
                                                std::uint64_t oov_seed) {
  EmbeddingTable t(corpus.embeddings.front().second.size(), oov_seed);
  for (const auto& [w, v] : corpus.embeddings) t.insert(w, v);
  return t;
}

inline std::unordered_map<std::string, double> synthetic_follower_counts(
    const SyntheticCorpus& corpus) {
  std::unordered_map<std::string, double> m;
  for (const auto& [u, c] : corpus.follower_counts) m[u] = static_cast<double>(c);
  return m;
}

}  // namespace frdetect
