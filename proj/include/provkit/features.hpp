#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "provkit/feature_vector.hpp"

namespace provkit {

// MurmurHash3 x86_32. Blocks are assembled little-endian byte by byte, so
// the result does not depend on host endianness.
std::uint32_t murmur3_32(std::string_view data, std::uint32_t seed);

struct FeaturizerConfig {
  std::size_t dim = 768;
  // Character n-gram lengths, in code points; max 0 disables them.
  std::size_t char_ngram_min = 3;
  std::size_t char_ngram_max = 5;
  bool include_word_unigrams = true;
  std::uint32_t hash_seed = 0;

  void validate() const;
  // Stable hex digest of every field. Model files store it so that a head
  // is never applied to vectors from a different featurizer.
  std::string fingerprint() const;
};

nlohmann::json to_json(const FeaturizerConfig& cfg);
FeaturizerConfig featurizer_config_from_json(const nlohmann::json& j);

/// Signed feature hashing of character n-grams (over the raw string,
/// whitespace included) and whitespace-tokenized words, L2-normalized.
/// Empty text, or text with no features, gives the zero vector.
FeatureVector featurize(std::string_view text, const FeaturizerConfig& cfg = {});

/// Reads {id, vector} JSONL produced by an external encoder.
std::map<std::string, FeatureVector> import_embeddings(const std::filesystem::path& path, std::size_t dim);
std::map<std::string, FeatureVector> parse_embeddings(std::istream& in, std::size_t dim,
                                                      std::string_view origin = "<stream>");

}  // namespace provkit
