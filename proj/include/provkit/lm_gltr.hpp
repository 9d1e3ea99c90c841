#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "provkit/textmetrics.hpp"

namespace provkit {

inline constexpr std::string_view kUnknownToken = "<unk>";

// Next-token model used by the GLTR statistics. Distributions are dense and
// aligned with vocab(); implementations must be immutable once built.
class LMBackend {
 public:
  virtual ~LMBackend() = default;

  virtual const std::vector<std::string>& vocab() const = 0;
  virtual std::vector<double> next_distribution(std::span<const std::string> context) const = 0;
  virtual nlohmann::json metadata() const = 0;

  // Index of token in vocab(), or of the unknown sentinel.
  std::size_t index_of(const std::string& token) const;

 protected:
  void build_index();

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t unknown_index_ = 0;
};

// Equal mass on every entry; useful as a null model and in tests.
class UniformLM final : public LMBackend {
 public:
  explicit UniformLM(std::vector<std::string> vocab);
  const std::vector<std::string>& vocab() const override { return vocab_; }
  std::vector<double> next_distribution(std::span<const std::string> context) const override;
  nlohmann::json metadata() const override;

 private:
  std::vector<std::string> vocab_;
};

// Add-k smoothed n-gram model. The longest suffix of the context (up to
// order-1 tokens) that was seen in training decides the distribution;
// unseen contexts fall back to shorter ones and finally to the unigram.
class NGramLM final : public LMBackend {
 public:
  NGramLM(std::span<const TokenSeq> corpus, int order, double add_k);

  const std::vector<std::string>& vocab() const override { return vocab_; }
  std::vector<double> next_distribution(std::span<const std::string> context) const override;
  nlohmann::json metadata() const override;

  int order() const { return order_; }
  double add_k() const { return add_k_; }

 private:
  using Key = std::vector<std::size_t>;
  struct Counts {
    std::map<std::size_t, std::size_t> next;
    std::size_t total = 0;
  };

  int order_;
  double add_k_;
  std::vector<std::string> vocab_;
  // contexts_[n] holds contexts of length n; contexts_[0] has the single
  // empty context, i.e. unigram counts.
  std::vector<std::map<Key, Counts>> contexts_;
};

std::unique_ptr<NGramLM> train_ngram_lm(std::span<const TokenSeq> corpus, int order = 3, double add_k = 0.1);

struct TokenStats {
  std::string token;
  double prob = 0.0;
  std::size_t rank = 1;
  double entropy = 0.0;  // nats

  bool operator==(const TokenStats&) const = default;
};

/// Stats for every position of doc. Rank is 1-based over descending
/// probability, with ties going to the lower vocab index.
std::vector<TokenStats> token_stats(const LMBackend& lm, const TokenSeq& doc);

struct RankHistogram {
  std::size_t le10 = 0;    // rank <= 10
  std::size_t le100 = 0;   // 10 < rank <= 100
  std::size_t le1000 = 0;  // 100 < rank <= 1000
  std::size_t rest = 0;    // rank > 1000

  bool operator==(const RankHistogram&) const = default;
};

RankHistogram bucket_histogram(std::span<const TokenStats> stats);

// Marker standing in for the usual green/yellow/red/purple colouring.
char bucket_marker(std::size_t rank);

/// Reads externally computed stats, one {token, prob, rank, entropy} per line.
std::vector<TokenStats> import_token_stats(const std::filesystem::path& path);
std::vector<TokenStats> parse_token_stats(std::istream& in, std::string_view origin = "<stream>");

nlohmann::json to_json(const TokenStats& s);
nlohmann::json to_json(const RankHistogram& h);

}  // namespace provkit
