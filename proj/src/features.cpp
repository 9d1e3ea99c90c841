#include "provkit/features.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "provkit/errors.hpp"
#include "provkit/textmetrics.hpp"
#include "provkit/utf8.hpp"

namespace provkit {

using nlohmann::json;

std::uint32_t murmur3_32(std::string_view data, std::uint32_t seed) {
  constexpr std::uint32_t c1 = 0xcc9e2d51;
  constexpr std::uint32_t c2 = 0x1b873593;
  auto rotl = [](std::uint32_t x, int r) { return (x << r) | (x >> (32 - r)); };
  auto byte = [&](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(data[i])); };

  std::uint32_t h = seed;
  const std::size_t nblocks = data.size() / 4;
  for (std::size_t b = 0; b < nblocks; ++b) {
    const std::size_t i = 4 * b;
    std::uint32_t k = byte(i) | (byte(i + 1) << 8) | (byte(i + 2) << 16) | (byte(i + 3) << 24);
    k *= c1;
    k = rotl(k, 15);
    k *= c2;
    h ^= k;
    h = rotl(h, 13);
    h = h * 5 + 0xe6546b64;
  }
  const std::size_t tail = 4 * nblocks;
  std::uint32_t k = 0;
  switch (data.size() & 3) {
    case 3: k ^= byte(tail + 2) << 16; [[fallthrough]];
    case 2: k ^= byte(tail + 1) << 8; [[fallthrough]];
    case 1:
      k ^= byte(tail);
      k *= c1;
      k = rotl(k, 15);
      k *= c2;
      h ^= k;
  }
  h ^= static_cast<std::uint32_t>(data.size());
  h ^= h >> 16;
  h *= 0x85ebca6b;
  h ^= h >> 13;
  h *= 0xc2b2ae35;
  h ^= h >> 16;
  return h;
}

void FeaturizerConfig::validate() const {
  if (dim < 2) throw ValidationError("featurizer dim must be >= 2");
  if (char_ngram_max > 0 && (char_ngram_min < 1 || char_ngram_min > char_ngram_max)) {
    throw ValidationError("char n-gram range must satisfy 1 <= min <= max");
  }
}

std::string FeaturizerConfig::fingerprint() const {
  const std::string canon = fmt::format("hashing-v1|dim={}|char={}..{}|words={}|seed={}", dim, char_ngram_min,
                                        char_ngram_max, include_word_unigrams ? 1 : 0, hash_seed);
  return fmt::format("{:08x}{:08x}", murmur3_32(canon, 0), murmur3_32(canon, 0x5bd1e995));
}

json to_json(const FeaturizerConfig& cfg) {
  return {{"dim", cfg.dim},
          {"char_ngram_min", cfg.char_ngram_min},
          {"char_ngram_max", cfg.char_ngram_max},
          {"include_word_unigrams", cfg.include_word_unigrams},
          {"hash_seed", cfg.hash_seed}};
}

FeaturizerConfig featurizer_config_from_json(const json& j) {
  FeaturizerConfig cfg;
  if (!j.is_object()) throw ValidationError("featurizer config must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "dim") {
      cfg.dim = value.get<std::size_t>();
    } else if (key == "char_ngram_min") {
      cfg.char_ngram_min = value.get<std::size_t>();
    } else if (key == "char_ngram_max") {
      cfg.char_ngram_max = value.get<std::size_t>();
    } else if (key == "include_word_unigrams") {
      cfg.include_word_unigrams = value.get<bool>();
    } else if (key == "hash_seed") {
      cfg.hash_seed = value.get<std::uint32_t>();
    } else {
      throw ValidationError("unknown featurizer option '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

namespace {

void add_feature(std::vector<double>& acc, std::string_view feature, std::uint32_t seed) {
  const std::uint32_t h = murmur3_32(feature, seed);
  const std::uint32_t s = murmur3_32(feature, seed ^ 0x9e3779b9u);
  acc[h % acc.size()] += (s & 1u) ? 1.0 : -1.0;
}

}  // namespace

FeatureVector featurize(std::string_view text, const FeaturizerConfig& cfg) {
  cfg.validate();
  std::vector<double> acc(cfg.dim, 0.0);
  std::string buf;

  if (cfg.char_ngram_max > 0) {
    const auto cps = utf8::decode(text);
    for (std::size_t n = cfg.char_ngram_min; n <= cfg.char_ngram_max; ++n) {
      for (std::size_t i = 0; i + n <= cps.size(); ++i) {
        buf.assign("c:");
        for (std::size_t k = 0; k < n; ++k) buf.append(cps[i + k].bytes);
        add_feature(acc, buf, cfg.hash_seed);
      }
    }
  }
  if (cfg.include_word_unigrams) {
    for (const auto& w : tokenize(text, TokenMode::word).tokens) {
      buf.assign("w:");
      buf.append(w);
      add_feature(acc, buf, cfg.hash_seed);
    }
  }

  double norm = 0.0;
  for (double v : acc) norm += v * v;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& v : acc) v /= norm;
  }
  return FeatureVector{std::move(acc)};
}

std::map<std::string, FeatureVector> parse_embeddings(std::istream& in, std::size_t dim, std::string_view origin) {
  std::map<std::string, FeatureVector> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& msg) {
      throw ValidationError(fmt::format("{}:{}: {}", origin, line_no, msg));
    };
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string()) fail("record needs a string 'id'");
    if (!obj.contains("vector") || !obj["vector"].is_array()) fail("record needs a 'vector' array");
    const auto& arr = obj["vector"];
    if (arr.size() != dim) fail(fmt::format("vector has dimension {}, expected {}", arr.size(), dim));
    FeatureVector v;
    v.values.reserve(dim);
    for (const auto& x : arr) {
      if (!x.is_number()) fail("vector entries must be numbers");
      const double d = x.get<double>();
      if (!std::isfinite(d)) fail("non-finite vector entry");
      v.values.push_back(d);
    }
    const auto id = obj["id"].get<std::string>();
    if (!out.emplace(id, std::move(v)).second) fail("duplicate id '" + id + "'");
  }
  return out;
}

std::map<std::string, FeatureVector> import_embeddings(const std::filesystem::path& path, std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return parse_embeddings(in, dim, path.string());
}

}  // namespace provkit
