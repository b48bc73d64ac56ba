#pragma once

// Article records, tokenization, size thresholds, word embeddings and the
// fixed-shape (t_d + 1) x t_s x E article tensor.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "frdetect/tensor.hpp"

namespace frdetect {

enum class Label : std::size_t { Real = 0, Fake = 1 };

inline std::string to_string(Label label) {
  return label == Label::Fake ? "fake" : "real";
}

inline Label parse_label(std::string_view text) {
  if (text == "real") return Label::Real;
  if (text == "fake") return Label::Fake;
  throw Error("unknown label '" + std::string(text) +
              "' (expected \"real\" or \"fake\")");
}

struct NewsArticle {
  std::string id;
  std::string headline;
  std::string body;
  Label label = Label::Real;
  std::vector<std::string> publisher_ids;
};

struct TokenizedArticle {
  std::vector<std::string> headline_tokens;
  std::vector<std::vector<std::string>> body_sentences;
};

// ---------------------------------------------------------------------------
// Tokenization
// ---------------------------------------------------------------------------

namespace detail {

inline bool is_ascii_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

inline bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

inline bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

}  // namespace detail

/// Splits on whitespace, trims ASCII punctuation from both ends of each raw
/// token and lowercases ASCII letters. A raw token whose trailing punctuation
/// contains '.', '!' or '?' closes the current sentence. Punctuation-only
/// tokens vanish but still close a sentence when they carry a terminator.
inline std::vector<std::vector<std::string>> split_sentences(
    std::string_view text) {
  std::vector<std::vector<std::string>> sentences;
  std::vector<std::string> current;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && detail::is_space(text[pos])) ++pos;
    const std::size_t start = pos;
    while (pos < text.size() && !detail::is_space(text[pos])) ++pos;
    if (start == pos) break;
    std::string_view raw = text.substr(start, pos - start);

    std::size_t first = 0, last = raw.size();
    while (first < last && detail::is_ascii_punct(raw[first])) ++first;
    while (last > first && detail::is_ascii_punct(raw[last - 1])) --last;
    bool ends_sentence = false;
    for (std::size_t i = last; i < raw.size(); ++i)
      if (detail::is_terminator(raw[i])) ends_sentence = true;

    if (first < last) {
      std::string word(raw.substr(first, last - first));
      for (char& c : word)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      current.push_back(std::move(word));
    }
    if (ends_sentence && !current.empty()) {
      sentences.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) sentences.push_back(std::move(current));
  return sentences;
}

/// Headline words are the concatenation of all its "sentences"; body keeps
/// sentence structure. No cropping happens here.
inline TokenizedArticle split_article(const NewsArticle& article) {
  TokenizedArticle tok;
  for (auto& s : split_sentences(article.headline))
    for (auto& w : s) tok.headline_tokens.push_back(std::move(w));
  tok.body_sentences = split_sentences(article.body);
  return tok;
}

// ---------------------------------------------------------------------------
// Thresholds
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDefaultWordsPerSentence = 46;

struct Thresholds {
  std::size_t t_s = kDefaultWordsPerSentence;  // words per sentence
  std::size_t t_d = 1;                         // body sentences
};

/// t_d = ceil(mean + population stddev) of the body sentence counts.
inline Thresholds compute_thresholds(std::span<const TokenizedArticle> train,
                                     std::size_t t_s_fixed =
                                         kDefaultWordsPerSentence) {
  if (train.empty()) throw Error("empty corpus");
  if (t_s_fixed == 0) throw Error("t_s must be positive");
  const double n = static_cast<double>(train.size());
  double mean = 0.0;
  for (const auto& a : train) mean += static_cast<double>(a.body_sentences.size());
  mean /= n;
  double var = 0.0;
  for (const auto& a : train) {
    const double d = static_cast<double>(a.body_sentences.size()) - mean;
    var += d * d;
  }
  var /= n;
  const double t_d = std::ceil(mean + std::sqrt(var));
  return Thresholds{t_s_fixed, std::max<std::size_t>(1, static_cast<std::size_t>(t_d))};
}

// ---------------------------------------------------------------------------
// Embeddings
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Word vectors loaded from the whitespace-separated text layout
/// `word v1 ... vE`. Out-of-vocabulary words get a uniform random vector that
/// depends only on (oov_seed, word), so lookups never mutate the table.
class EmbeddingTable {
 public:
  static constexpr std::string_view kPadToken = "<pad>";

  EmbeddingTable(std::size_t dimension, std::uint64_t oov_seed,
                 double oov_low = -0.01, double oov_high = 0.01)
      : dimension_(dimension),
        oov_seed_(oov_seed),
        oov_low_(oov_low),
        oov_high_(oov_high) {
    if (dimension == 0) throw Error("embedding dimension must be positive");
    if (!(oov_low <= oov_high)) throw Error("OOV range is empty");
  }

  static EmbeddingTable load(const std::string& path, std::uint64_t oov_seed) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open embeddings file " + path);
    std::unique_ptr<EmbeddingTable> table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::istringstream ls(line);
      std::string word;
      if (!(ls >> word)) continue;
      std::vector<double> vec;
      std::string tok;
      while (ls >> tok) {
        try {
          std::size_t used = 0;
          vec.push_back(std::stod(tok, &used));
          if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
          throw Error(path + ":" + std::to_string(line_no) +
                      ": bad number '" + tok + "'");
        }
      }
      if (!table) {
        if (vec.empty())
          throw Error(path + ":" + std::to_string(line_no) + ": no vector");
        table = std::make_unique<EmbeddingTable>(vec.size(), oov_seed);
      }
      if (vec.size() != table->dimension()) {
        throw Error(path + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(table->dimension()) + " components, got " +
                    std::to_string(vec.size()));
      }
      table->insert(word, std::move(vec));
    }
    if (!table) throw Error("embeddings file " + path + " is empty");
    return std::move(*table);
  }

  void insert(const std::string& word, std::vector<double> vec) {
    if (vec.size() != dimension_) {
      throw Error("embedding for '" + word + "' has wrong dimension");
    }
    vectors_[word] = std::move(vec);
  }

  std::size_t dimension() const { return dimension_; }
  std::size_t vocabulary_size() const { return vectors_.size(); }
  std::uint64_t oov_seed() const { return oov_seed_; }
  bool contains(const std::string& word) const {
    return vectors_.count(word) != 0;
  }

  std::vector<double> embed(const std::string& word) const {
    if (word == kPadToken) return std::vector<double>(dimension_, 0.0);
    if (auto it = vectors_.find(word); it != vectors_.end()) return it->second;
    std::mt19937_64 rng(
        detail::splitmix64(oov_seed_ ^ detail::splitmix64(detail::fnv1a(word))));
    std::uniform_real_distribution<double> dist(oov_low_, oov_high_);
    std::vector<double> vec(dimension_);
    for (double& v : vec) v = dist(rng);
    return vec;
  }

 private:
  std::size_t dimension_;
  std::uint64_t oov_seed_;
  double oov_low_;
  double oov_high_;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

inline std::vector<double> embed_word(const EmbeddingTable& table,
                                      const std::string& word) {
  return table.embed(word);
}

// ---------------------------------------------------------------------------
// Article tensor
// ---------------------------------------------------------------------------

/// Shape (t_d + 1, t_s, E). Row 0 is the headline, rows 1..t_d the first
/// t_d body sentences; everything past the available words is zero.
inline Tensor build_tensor(const TokenizedArticle& tok, const Thresholds& th,
                           const EmbeddingTable& table) {
  const std::size_t e = table.dimension();
  Tensor out({th.t_d + 1, th.t_s, e});
  auto write_row = [&](std::size_t row, const std::vector<std::string>& words) {
    const std::size_t n = std::min(words.size(), th.t_s);
    for (std::size_t col = 0; col < n; ++col) {
      const std::vector<double> vec = table.embed(words[col]);
      std::copy(vec.begin(), vec.end(), &out.at(row, col, 0));
    }
  };
  write_row(0, tok.headline_tokens);
  const std::size_t sentences = std::min(tok.body_sentences.size(), th.t_d);
  for (std::size_t s = 0; s < sentences; ++s) write_row(s + 1, tok.body_sentences[s]);
  return out;
}

// ---------------------------------------------------------------------------
// JSON Lines corpus files
// ---------------------------------------------------------------------------

inline NewsArticle article_from_json(const nlohmann::json& j) {
  NewsArticle a;
  a.id = j.at("id").get<std::string>();
  a.headline = j.value("headline", std::string());
  a.body = j.value("body", std::string());
  a.label = parse_label(j.at("label").get<std::string>());
  if (j.contains("publishers"))
    a.publisher_ids = j.at("publishers").get<std::vector<std::string>>();
  return a;
}

inline nlohmann::json article_to_json(const NewsArticle& a) {
  return nlohmann::json{{"id", a.id},
                        {"headline", a.headline},
                        {"body", a.body},
                        {"label", to_string(a.label)},
                        {"publishers", a.publisher_ids}};
}

inline std::vector<NewsArticle> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file " + path);
  std::vector<NewsArticle> out;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(article_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw Error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!ids.insert(out.back().id).second) {
      throw Error(path + ":" + std::to_string(line_no) + ": duplicate id '" +
                  out.back().id + "'");
    }
  }
  return out;
}

inline void save_corpus(const std::string& path,
                        std::span<const NewsArticle> articles) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write corpus file " + path);
  for (const auto& a : articles) out << article_to_json(a).dump() << '\n';
}

}  // namespace frdetect
