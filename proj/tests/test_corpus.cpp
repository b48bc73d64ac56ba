#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "frdetect/corpus.hpp"

using namespace frdetect;

namespace {

NewsArticle article(std::string headline, std::string body) {
  NewsArticle a;
  a.id = "a";
  a.headline = std::move(headline);
  a.body = std::move(body);
  return a;
}

TokenizedArticle with_sentence_count(std::size_t n) {
  TokenizedArticle t;
  t.body_sentences.assign(n, {"x"});
  return t;
}

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
  auto p = std::filesystem::temp_directory_path() / ("frdetect_corpus_" + name);
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(SplitArticle, TerminalPeriodsSplitSentences) {
  auto t = split_article(article("", "A b. C d e."));
  ASSERT_EQ(t.body_sentences.size(), 2u);
  EXPECT_EQ(t.body_sentences[0], (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(t.body_sentences[1], (std::vector<std::string>{"c", "d", "e"}));
  EXPECT_TRUE(t.headline_tokens.empty());
}

TEST(SplitArticle, PunctuationOnlyTokensDropAndCaseFolds) {
  auto t = split_article(article("Breaking: \"Big\" NEWS -- today!", "Wait ... what?! Yes."));
  EXPECT_EQ(t.headline_tokens,
            (std::vector<std::string>{"breaking", "big", "news", "today"}));
  // A free-standing "..." carries no word and does not end the sentence.
  ASSERT_EQ(t.body_sentences.size(), 2u);
  EXPECT_EQ(t.body_sentences[0], (std::vector<std::string>{"wait", "what"}));
  EXPECT_EQ(t.body_sentences[1], (std::vector<std::string>{"yes"}));
}

TEST(SplitArticle, DoesNotCrop) {
  std::string body;
  for (int i = 0; i < 50; ++i) body += "word" + std::to_string(i) + " ";
  auto t = split_article(article("h", body));
  ASSERT_EQ(t.body_sentences.size(), 1u);
  EXPECT_EQ(t.body_sentences[0].size(), 50u);
}

TEST(SplitArticle, EmptyBodyHasNoSentences) {
  EXPECT_TRUE(split_article(article("Title", "")).body_sentences.empty());
  EXPECT_TRUE(split_article(article("Title", "  \n\t ")).body_sentences.empty());
}

TEST(Thresholds, MeanPlusPopulationStddev) {
  std::vector<TokenizedArticle> train;
  for (std::size_t n : {3, 5, 4, 8, 5}) train.push_back(with_sentence_count(n));
  // mu = 5, sigma = sqrt(2.8) = 1.6733 -> ceil(6.6733) = 7
  const auto th = compute_thresholds(train);
  EXPECT_EQ(th.t_d, 7u);
  EXPECT_EQ(th.t_s, 46u);
}

TEST(Thresholds, ZeroVarianceGivesTheCommonCount) {
  std::vector<TokenizedArticle> train(6, with_sentence_count(9));
  EXPECT_EQ(compute_thresholds(train, 13).t_d, 9u);
  EXPECT_EQ(compute_thresholds(train, 13).t_s, 13u);
}

TEST(Thresholds, EmptyCorpusThrows) {
  try {
    compute_thresholds(std::vector<TokenizedArticle>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "empty corpus");
  }
}

TEST(Thresholds, PermutationInvariant) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> d(0, 40);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TokenizedArticle> train;
    for (int i = 0; i < 17; ++i) train.push_back(with_sentence_count(d(rng)));
    const auto a = compute_thresholds(train);
    std::shuffle(train.begin(), train.end(), rng);
    EXPECT_EQ(compute_thresholds(train).t_d, a.t_d);
  }
}

TEST(Embeddings, LookupOovAndPadding) {
  EmbeddingTable t(3, 77);
  t.insert("the", {0.1, 0.2, 0.3});
  EXPECT_EQ(t.embed("the"), (std::vector<double>{0.1, 0.2, 0.3}));

  const auto a = t.embed("zxqv");
  const auto b = embed_word(t, "zxqv");
  EXPECT_EQ(a, b);
  for (double v : a) {
    EXPECT_GE(v, -0.01);
    EXPECT_LE(v, 0.01);
  }
  EXPECT_NE(a, t.embed("zxqw"));
  EXPECT_EQ(t.embed(std::string(EmbeddingTable::kPadToken)), (std::vector<double>(3, 0.0)));

  // Same seed in a separate table yields the same OOV vector.
  EmbeddingTable u(3, 77);
  EXPECT_EQ(u.embed("zxqv"), a);
  EmbeddingTable other_seed(3, 78);
  EXPECT_NE(other_seed.embed("zxqv"), a);
}

TEST(Embeddings, LoadsGloveTextLayout) {
  auto p = temp_file("emb.txt", "the 0.5 -1 2\ncat 1e-3 0 0\n\n");
  auto t = EmbeddingTable::load(p.string(), 1);
  EXPECT_EQ(t.dimension(), 3u);
  EXPECT_EQ(t.vocabulary_size(), 2u);
  EXPECT_EQ(t.embed("cat"), (std::vector<double>{1e-3, 0, 0}));
}

TEST(Embeddings, LoadErrorsNameTheLine) {
  auto p = temp_file("emb_bad.txt", "the 0.5 1\ncat 1\n");
  try {
    EmbeddingTable::load(p.string(), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
  }
  auto q = temp_file("emb_nan.txt", "the 0.5 x1\n");
  EXPECT_THROW(EmbeddingTable::load(q.string(), 1), Error);
  EXPECT_THROW(EmbeddingTable::load("/nonexistent/emb.txt", 1), Error);
}

TEST(BuildTensor, CropPadAndShape) {
  EmbeddingTable table(4, 3);
  TokenizedArticle tok;
  tok.headline_tokens = {"h1", "h2"};
  std::vector<std::string> long_sentence;
  for (int i = 0; i < 50; ++i) long_sentence.push_back("w" + std::to_string(i));
  tok.body_sentences = {long_sentence, {"a", "b"}};
  Thresholds th{46, 7};
  Tensor x = build_tensor(tok, th, table);
  ASSERT_EQ(x.shape(), (Shape{8, 46, 4}));

  // Word 46 (0-based 45) of sentence 1 is present; nothing beyond width 46.
  EXPECT_EQ(std::vector<double>(&x.at(1, 45, 0), &x.at(1, 45, 0) + 4), table.embed("w45"));
  // Headline beyond 2 words, sentence 2 beyond 2 words, rows 3..7: zero.
  for (std::size_t r = 0; r < 8; ++r) {
    const std::size_t len = r == 0 ? 2 : r == 1 ? 46 : r == 2 ? 2 : 0;
    for (std::size_t c = len; c < 46; ++c)
      for (std::size_t e = 0; e < 4; ++e) EXPECT_EQ(x.at(r, c, e), 0.0);
  }
}

TEST(BuildTensor, ExtraSentencesAreDropped) {
  EmbeddingTable table(2, 3);
  TokenizedArticle tok;
  tok.body_sentences.assign(10, {"x"});
  Tensor x = build_tensor(tok, Thresholds{4, 3}, table);
  EXPECT_EQ(x.shape(), (Shape{4, 4, 2}));
  EXPECT_NE(x.at(3, 0, 0), 0.0);
}

TEST(CorpusFile, RoundTripsAndReportsErrors) {
  auto p = temp_file("c.jsonl",
                     R"({"id":"1","headline":"H","body":"B.","label":"fake","publishers":["u1","u2"]})"
                     "\n\n"
                     R"({"id":"2","headline":"","body":"","label":"real"})"
                     "\n");
  auto c = load_corpus(p.string());
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].label, Label::Fake);
  EXPECT_EQ(c[0].publisher_ids, (std::vector<std::string>{"u1", "u2"}));
  EXPECT_TRUE(c[1].publisher_ids.empty());

  auto dup = temp_file("dup.jsonl", R"({"id":"1","label":"real"})"
                                    "\n"
                                    R"({"id":"1","label":"real"})"
                                    "\n");
  EXPECT_THROW(load_corpus(dup.string()), Error);
  auto bad = temp_file("bad.jsonl", R"({"id":"1","label":"maybe"})"
                                    "\n");
  try {
    load_corpus(bad.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("bad.jsonl:1"), std::string::npos);
  }
}
