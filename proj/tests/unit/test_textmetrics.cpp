#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "provkit/rng.hpp"
#include "provkit/textmetrics.hpp"

using namespace provkit;

namespace {

TokenSeq words(std::vector<std::string> t) { return TokenSeq{std::move(t), TokenMode::word}; }

TokenSeq random_seq(Rng& rng, std::size_t max_len, std::size_t alphabet) {
  TokenSeq s;
  const std::size_t n = rng.below(max_len + 1);
  for (std::size_t i = 0; i < n; ++i) s.tokens.push_back(std::string(1, static_cast<char>('a' + rng.below(alphabet))));
  return s;
}

}  // namespace

TEST(Tokenize, CollapsesWhitespaceRuns) {
  EXPECT_EQ(tokenize("a b  c", TokenMode::word).tokens, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(tokenize("  a\t\nb \r\n", TokenMode::word).tokens, (std::vector<std::string>{"a", "b"}));
}

TEST(Tokenize, UnicodeWhitespaceSeparatesWords) {
  // U+3000 ideographic space and U+00A0 no-break space.
  EXPECT_EQ(tokenize("x　y z", TokenMode::word).tokens, (std::vector<std::string>{"x", "y", "z"}));
}

TEST(Tokenize, CharModeSplitsCodePoints) {
  EXPECT_EQ(tokenize("你好", TokenMode::char_).tokens, (std::vector<std::string>{"你", "好"}));
  EXPECT_EQ(tokenize("a b", TokenMode::char_).tokens, (std::vector<std::string>{"a", "b"}));
}

TEST(Tokenize, EmptyInput) {
  EXPECT_TRUE(tokenize("", TokenMode::word).empty());
  EXPECT_TRUE(tokenize("", TokenMode::char_).empty());
  EXPECT_TRUE(tokenize(" \t ", TokenMode::word).empty());
}

TEST(Tokenize, KeepsCaseAndPunctuation) {
  EXPECT_EQ(tokenize("Hello, World.", TokenMode::word).tokens, (std::vector<std::string>{"Hello,", "World."}));
}

TEST(Tokenize, ModeNamesRoundTrip) {
  EXPECT_EQ(token_mode_from_string(to_string(TokenMode::word)), TokenMode::word);
  EXPECT_EQ(token_mode_from_string(to_string(TokenMode::char_)), TokenMode::char_);
  EXPECT_ANY_THROW(token_mode_from_string("bytes"));
}

TEST(Jaccard, Examples) {
  EXPECT_EQ(jaccard_distance(words({"a", "b"}), words({"b", "a"})), 0.0);
  EXPECT_EQ(jaccard_distance(words({"a", "b"}), words({"c", "d"})), 1.0);
  EXPECT_DOUBLE_EQ(jaccard_distance(words({"the", "cat", "sat"}), words({"the", "dog", "sat"})), 0.5);
  EXPECT_EQ(jaccard_distance(words({}), words({})), 0.0);
  EXPECT_EQ(jaccard_distance(words({}), words({"x"})), 1.0);
}

TEST(Jaccard, UsesSetsNotMultisets) {
  EXPECT_EQ(jaccard_distance(words({"a", "a", "b"}), words({"a", "b", "b"})), 0.0);
}

TEST(Jaccard, ModeMismatchRejected) {
  EXPECT_THROW(jaccard_distance(tokenize("a", TokenMode::word), tokenize("a", TokenMode::char_)),
               std::invalid_argument);
}

TEST(Levenshtein, Examples) {
  EXPECT_EQ(levenshtein(words({}), words({"x", "y"})), 2u);
  EXPECT_EQ(levenshtein(words({"a", "b", "c"}), words({"a", "c"})), 1u);
  EXPECT_EQ(levenshtein(words({"a", "b", "c"}), words({"a", "b", "c"})), 0u);
  EXPECT_EQ(levenshtein(words({"k", "i", "t", "t", "e", "n"}), words({"s", "i", "t", "t", "i", "n", "g"})), 3u);
}

TEST(Levenshtein, NormalizedExamples) {
  EXPECT_DOUBLE_EQ(normalized_levenshtein(words({"a", "b", "c"}), words({"a", "c"})), 1.0 / 3.0);
  EXPECT_EQ(normalized_levenshtein(words({}), words({})), 0.0);
  EXPECT_EQ(normalized_levenshtein(words({"a", "b", "c"}), words({"x", "y", "z"})), 1.0);
}

TEST(Levenshtein, MatchesRecursiveOracleOnRandomPairs) {
  Rng rng(1);
  for (int t = 0; t < 2000; ++t) {
    const auto a = random_seq(rng, 10, 4), b = random_seq(rng, 10, 4);
    ASSERT_EQ(levenshtein(a, b), oracle::levenshtein(a.tokens, b.tokens));
  }
}

TEST(Levenshtein, BoundsAndLengthDifference) {
  Rng rng(2);
  for (int t = 0; t < 2000; ++t) {
    const auto a = random_seq(rng, 12, 3), b = random_seq(rng, 12, 3);
    const auto d = levenshtein(a, b);
    const auto gap = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
    EXPECT_GE(d, gap);
    EXPECT_LE(d, std::max(a.size(), b.size()));
    const double nd = normalized_levenshtein(a, b);
    EXPECT_GE(nd, 0.0);
    EXPECT_LE(nd, 1.0);
  }
}

TEST(MetricAxioms, RandomTriples) {
  Rng rng(3);
  for (int t = 0; t < 3000; ++t) {
    const auto x = random_seq(rng, 7, 4), y = random_seq(rng, 7, 4), z = random_seq(rng, 7, 4);
    EXPECT_EQ(levenshtein(x, y), levenshtein(y, x));
    EXPECT_LE(levenshtein(x, z), levenshtein(x, y) + levenshtein(y, z));
    EXPECT_EQ(levenshtein(x, y) == 0, x == y);
    EXPECT_EQ(jaccard_distance(x, y), jaccard_distance(y, x));
    EXPECT_LE(jaccard_distance(x, z), jaccard_distance(x, y) + jaccard_distance(y, z) + 1e-12);
    const std::set<std::string> sx(x.tokens.begin(), x.tokens.end()), sy(y.tokens.begin(), y.tokens.end());
    EXPECT_EQ(jaccard_distance(x, y) == 0.0, sx == sy);
  }
}

TEST(Cosine, Examples) {
  const FeatureVector u{{1.0, 2.0, -3.0}};
  EXPECT_NEAR(cosine_similarity(u, u), 1.0, 1e-15);
  EXPECT_NEAR(cosine_similarity(u, FeatureVector{{-1.0, -2.0, 3.0}}), -1.0, 1e-15);
  EXPECT_EQ(cosine_similarity(FeatureVector{{1, 0, 0}}, FeatureVector{{0, 1, 0}}), 0.0);
  EXPECT_EQ(cosine_similarity(FeatureVector{{0, 0, 0}}, u), 0.0);
}

TEST(Cosine, ScaleInvariantAndBounded) {
  Rng rng(4);
  for (int t = 0; t < 500; ++t) {
    FeatureVector u, v, su;
    for (int d = 0; d < 8; ++d) {
      u.values.push_back(rng.normal());
      v.values.push_back(rng.normal());
    }
    for (double x : u.values) su.values.push_back(3.5 * x);
    const double c = cosine_similarity(u, v);
    EXPECT_LE(std::abs(c), 1.0 + 1e-12);
    EXPECT_NEAR(cosine_similarity(su, v), c, 1e-12);
  }
}

TEST(Cosine, DimensionMismatchRejected) {
  EXPECT_THROW(cosine_similarity(FeatureVector{{1, 2}}, FeatureVector{{1, 2, 3}}), std::invalid_argument);
}
