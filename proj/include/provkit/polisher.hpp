#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "provkit/corpus.hpp"
#include "provkit/rng.hpp"

namespace provkit {

inline constexpr std::string_view kPromptPlaceholder = "<abstracts>";
inline constexpr std::string_view kEnglishPolishPrompt = "please polish the following sentences:<abstracts>";
inline constexpr std::string_view kChinesePolishPrompt = "请润色以下文本：<abstracts>";

// Named prompt presets: "en" and "zh".
std::string_view prompt_preset(std::string_view name);

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_backoff{500};
  std::chrono::milliseconds max_backoff{30000};
  // Each delay is base * 2^(attempt-1) * (1 + jitter * U[0,1)).
  double jitter = 0.25;
};

struct PolisherConfig {
  std::string endpoint = "http://127.0.0.1:8000/v1/chat/completions";
  std::string model = "gpt-3.5-turbo";
  std::string prompt_template{kEnglishPolishPrompt};
  std::size_t max_in_flight = 4;
  RetryPolicy retry;
  std::filesystem::path cache_dir = ".provkit-cache";
  // Empty means the endpoint needs no Authorization header.
  std::string api_key_env = "OPENAI_API_KEY";
  std::chrono::milliseconds timeout{120000};

  // Request shape. The model name is written at model_pointer and the filled
  // prompt at prompt_pointer inside request_template; extra_body is merged on
  // top (decoding parameters and the like).
  nlohmann::json request_template = {{"model", ""},
                                     {"messages", {{{"role", "user"}, {"content", ""}}}}};
  std::string model_pointer = "/model";
  std::string prompt_pointer = "/messages/0/content";
  std::string response_pointer = "/choices/0/message/content";
  nlohmann::json extra_body = nlohmann::json::object();

  void validate() const;
  std::string render_prompt(std::string_view text) const;
  nlohmann::json request_body(std::string_view text) const;
};

nlohmann::json to_json(const PolisherConfig& cfg);
PolisherConfig polisher_config_from_json(const nlohmann::json& j);

class PolishError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PolisherStats {
  std::uint64_t network_requests = 0;
  std::uint64_t cache_hits = 0;
  std::vector<std::chrono::milliseconds> backoff_delays;
};

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Client for a chat-completion style endpoint with a content-addressed file
/// cache. polish() may be called from several threads; at most
/// max_in_flight requests are outstanding at once.
class Polisher {
 public:
  explicit Polisher(PolisherConfig cfg);

  const PolisherConfig& config() const { return cfg_; }

  std::string polish(std::string_view text);

  /// Polishes the original text of every record (all must be human-sourced),
  /// marks them source=polished and clears stale labels. Throws PolishError
  /// naming every id that could not be polished; successes stay cached.
  RecordSet polish_corpus(RecordSet set);

  // Hash of (endpoint, model, prompt_template, text).
  std::string cache_key(std::string_view text) const;
  std::filesystem::path cache_path(std::string_view text) const;

  PolisherStats stats() const;

 private:
  std::optional<std::string> cache_lookup(const std::string& key) const;
  void cache_store(const std::string& key, const std::string& completion) const;
  std::string request_with_retry(std::string_view text, const std::string& api_key);
  std::chrono::milliseconds backoff_delay(int attempt);

  PolisherConfig cfg_;
  std::string scheme_host_port_;
  std::string path_;

  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> cache_hits_{0};

  mutable std::mutex mu_;
  std::condition_variable slot_cv_;
  std::size_t in_flight_ = 0;
  std::vector<std::chrono::milliseconds> delays_;
  Rng jitter_rng_;
};

std::string polish(std::string_view text, const PolisherConfig& cfg);
RecordSet polish_corpus(RecordSet set, const PolisherConfig& cfg);

}  // namespace provkit
