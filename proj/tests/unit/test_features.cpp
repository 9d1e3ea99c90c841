#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "provkit/errors.hpp"
#include "provkit/features.hpp"
#include "provkit/textmetrics.hpp"

using namespace provkit;

namespace {

double norm(const FeatureVector& v) {
  double s = 0.0;
  for (double x : v.values) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST(Murmur, ReferenceVectors) {
  // Published MurmurHash3_x86_32 test values.
  EXPECT_EQ(murmur3_32("", 0), 0u);
  EXPECT_EQ(murmur3_32("", 1), 0x514E28B7u);
  EXPECT_EQ(murmur3_32("", 0xffffffffu), 0x81F16F39u);
  EXPECT_EQ(murmur3_32("test", 0), 0xba6bd213u);
  EXPECT_EQ(murmur3_32("Hello, world!", 0), 0xc0363e43u);
  EXPECT_EQ(murmur3_32("The quick brown fox jumps over the lazy dog", 0), 0x2e4ff723u);
  EXPECT_EQ(murmur3_32("aaaa", 0x9747b28c), 0x5A97808Au);
  EXPECT_EQ(murmur3_32("abc", 0), 0xB3DD93FAu);
}

TEST(Featurize, DefaultDimension) {
  EXPECT_EQ(featurize("any text at all").dim(), 768u);
}

TEST(Featurize, Deterministic) {
  EXPECT_EQ(featurize("same text, same config"), featurize("same text, same config"));
}

TEST(Featurize, EmptyIsZero) {
  const auto v = featurize("");
  EXPECT_EQ(v.dim(), 768u);
  EXPECT_EQ(norm(v), 0.0);
}

TEST(Featurize, UnitNorm) {
  for (const char* t : {"a", "hello world", "请润色以下文本", "x y z x y z"}) {
    EXPECT_NEAR(norm(featurize(t)), 1.0, 1e-12) << t;
  }
}

TEST(Featurize, WordOnlyIgnoresWhitespaceLayout) {
  FeaturizerConfig cfg;
  cfg.char_ngram_max = 0;
  EXPECT_EQ(featurize("a b  c", cfg), featurize("a\tb c\n", cfg));
}

TEST(Featurize, SimilarTextsAreCloser) {
  const auto a = featurize("the model shows strong results on the test set");
  const auto b = featurize("the model shows strong results on the val set");
  const auto c = featurize("completely unrelated words appear here instead");
  EXPECT_GT(cosine_similarity(a, b), cosine_similarity(a, c));
}

TEST(Featurize, SeedAndDimChangeOutput) {
  FeaturizerConfig seeded;
  seeded.hash_seed = 42;
  EXPECT_NE(featurize("text", seeded), featurize("text"));
  FeaturizerConfig small;
  small.dim = 16;
  EXPECT_EQ(featurize("text", small).dim(), 16u);
}

TEST(Featurize, InvalidConfig) {
  FeaturizerConfig cfg;
  cfg.dim = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.char_ngram_min = 6;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(Fingerprint, TracksEveryField) {
  const FeaturizerConfig base;
  EXPECT_EQ(base.fingerprint(), FeaturizerConfig{}.fingerprint());
  std::vector<FeaturizerConfig> variants(5);
  variants[0].dim = 512;
  variants[1].char_ngram_min = 2;
  variants[2].char_ngram_max = 4;
  variants[3].include_word_unigrams = false;
  variants[4].hash_seed = 9;
  for (const auto& v : variants) EXPECT_NE(v.fingerprint(), base.fingerprint());
}

TEST(Fingerprint, JsonRoundTrip) {
  FeaturizerConfig cfg;
  cfg.dim = 300;
  cfg.hash_seed = 5;
  EXPECT_EQ(featurizer_config_from_json(to_json(cfg)).fingerprint(), cfg.fingerprint());
}

TEST(Embeddings, ImportValid) {
  std::istringstream in("{\"id\":\"a\",\"vector\":[1,2,3]}\n{\"id\":\"b\",\"vector\":[0,0,1]}\n");
  const auto m = parse_embeddings(in, 3);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.at("a").values, (std::vector<double>{1, 2, 3}));
}

TEST(Embeddings, ImportErrors) {
  std::istringstream wrong_dim("{\"id\":\"a\",\"vector\":[1,2,3]}\n{\"id\":\"b\",\"vector\":[0,1]}\n");
  try {
    parse_embeddings(wrong_dim, 3, "emb");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("emb:2:"), std::string::npos) << e.what();
  }
  std::istringstream dup("{\"id\":\"a\",\"vector\":[1]}\n{\"id\":\"a\",\"vector\":[2]}\n");
  EXPECT_THROW(parse_embeddings(dup, 1), ValidationError);
  std::istringstream text("{\"id\":\"a\",\"vector\":[\"x\"]}\n");
  EXPECT_THROW(parse_embeddings(text, 1), ValidationError);
}
