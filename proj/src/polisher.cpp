#include "provkit/polisher.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <httplib.h>

#include "provkit/errors.hpp"
#include "provkit/json_io.hpp"

namespace provkit {

using nlohmann::json;

std::string_view prompt_preset(std::string_view name) {
  if (name == "en") return kEnglishPolishPrompt;
  if (name == "zh") return kChinesePolishPrompt;
  throw ValidationError("unknown prompt preset '" + std::string(name) + "' (expected en|zh)");
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

void PolisherConfig::validate() const {
  const auto first = prompt_template.find(kPromptPlaceholder);
  if (first == std::string::npos || prompt_template.find(kPromptPlaceholder, first + 1) != std::string::npos) {
    throw ValidationError("prompt_template must contain <abstracts> exactly once");
  }
  if (max_in_flight < 1) throw ValidationError("max_in_flight must be >= 1");
  if (retry.max_attempts < 1) throw ValidationError("retry.max_attempts must be >= 1");
  if (retry.base_backoff.count() < 0 || retry.jitter < 0.0) throw ValidationError("backoff must be non-negative");
  if (endpoint.find("://") == std::string::npos) throw ValidationError("endpoint must be an absolute URL");
  if (!request_template.is_object()) throw ValidationError("request_template must be a JSON object");
  if (!extra_body.is_object()) throw ValidationError("extra_body must be a JSON object");
}

std::string PolisherConfig::render_prompt(std::string_view text) const {
  std::string out = prompt_template;
  out.replace(out.find(kPromptPlaceholder), kPromptPlaceholder.size(), text);
  return out;
}

json PolisherConfig::request_body(std::string_view text) const {
  json body = request_template;
  body[json::json_pointer(model_pointer)] = model;
  body[json::json_pointer(prompt_pointer)] = render_prompt(text);
  body.merge_patch(extra_body);
  return body;
}

json to_json(const PolisherConfig& cfg) {
  return {{"endpoint", cfg.endpoint},
          {"model", cfg.model},
          {"prompt_template", cfg.prompt_template},
          {"max_in_flight", cfg.max_in_flight},
          {"retry",
           {{"max_attempts", cfg.retry.max_attempts},
            {"base_backoff_ms", cfg.retry.base_backoff.count()},
            {"max_backoff_ms", cfg.retry.max_backoff.count()},
            {"jitter", cfg.retry.jitter}}},
          {"cache_dir", cfg.cache_dir.string()},
          {"api_key_env", cfg.api_key_env},
          {"timeout_ms", cfg.timeout.count()},
          {"request_template", cfg.request_template},
          {"model_pointer", cfg.model_pointer},
          {"prompt_pointer", cfg.prompt_pointer},
          {"response_pointer", cfg.response_pointer},
          {"extra_body", cfg.extra_body}};
}

PolisherConfig polisher_config_from_json(const json& j) {
  PolisherConfig cfg;
  if (!j.is_object()) throw ValidationError("polisher config must be an object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "endpoint") {
        cfg.endpoint = v.get<std::string>();
      } else if (key == "model") {
        cfg.model = v.get<std::string>();
      } else if (key == "prompt_template") {
        cfg.prompt_template = v.get<std::string>();
      } else if (key == "prompt_preset") {
        cfg.prompt_template = std::string(prompt_preset(v.get<std::string>()));
      } else if (key == "max_in_flight") {
        cfg.max_in_flight = v.get<std::size_t>();
      } else if (key == "retry") {
        for (const auto& [rk, rv] : v.items()) {
          if (rk == "max_attempts") {
            cfg.retry.max_attempts = rv.get<int>();
          } else if (rk == "base_backoff_ms") {
            cfg.retry.base_backoff = std::chrono::milliseconds(rv.get<long long>());
          } else if (rk == "max_backoff_ms") {
            cfg.retry.max_backoff = std::chrono::milliseconds(rv.get<long long>());
          } else if (rk == "jitter") {
            cfg.retry.jitter = rv.get<double>();
          } else {
            throw ValidationError("unknown retry option '" + rk + "'");
          }
        }
      } else if (key == "cache_dir") {
        cfg.cache_dir = v.get<std::string>();
      } else if (key == "api_key_env") {
        cfg.api_key_env = v.get<std::string>();
      } else if (key == "timeout_ms") {
        cfg.timeout = std::chrono::milliseconds(v.get<long long>());
      } else if (key == "request_template") {
        cfg.request_template = v;
      } else if (key == "model_pointer") {
        cfg.model_pointer = v.get<std::string>();
      } else if (key == "prompt_pointer") {
        cfg.prompt_pointer = v.get<std::string>();
      } else if (key == "response_pointer") {
        cfg.response_pointer = v.get<std::string>();
      } else if (key == "extra_body") {
        cfg.extra_body = v;
      } else {
        throw ValidationError("unknown polisher option '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad polisher config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------

Polisher::Polisher(PolisherConfig cfg) : cfg_(std::move(cfg)), jitter_rng_(std::random_device{}()) {
  cfg_.validate();
  const auto scheme_end = cfg_.endpoint.find("://");
  const auto path_start = cfg_.endpoint.find('/', scheme_end + 3);
  scheme_host_port_ = cfg_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : cfg_.endpoint.substr(path_start);
}

std::string Polisher::cache_key(std::string_view text) const {
  // JSON array encoding keeps field boundaries unambiguous.
  return sha256_hex(json::array({cfg_.endpoint, cfg_.model, cfg_.prompt_template, std::string(text)}).dump());
}

std::filesystem::path Polisher::cache_path(std::string_view text) const {
  return cfg_.cache_dir / (cache_key(text) + ".json");
}

std::optional<std::string> Polisher::cache_lookup(const std::string& key) const {
  const auto path = cfg_.cache_dir / (key + ".json");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    const json entry = json::parse(in);
    const auto& completion = entry.at("completion");
    if (!completion.is_string() || completion.get_ref<const std::string&>().empty()) return std::nullopt;
    return completion.get<std::string>();
  } catch (const json::exception&) {
    return std::nullopt;  // unreadable entries are refetched and overwritten
  }
}

void Polisher::cache_store(const std::string& key, const std::string& completion) const {
  std::filesystem::create_directories(cfg_.cache_dir);
  const json entry = {
      {"request_fingerprint",
       {{"endpoint", cfg_.endpoint}, {"model", cfg_.model}, {"prompt_template", cfg_.prompt_template}}},
      {"completion", completion},
      {"timestamp", fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)))}};
  write_file_atomic(cfg_.cache_dir / (key + ".json"), entry.dump(1) + "\n");
}

std::chrono::milliseconds Polisher::backoff_delay(int attempt) {
  const double base = static_cast<double>(cfg_.retry.base_backoff.count()) * std::ldexp(1.0, attempt - 1);
  double u;
  {
    std::lock_guard lock(mu_);
    u = jitter_rng_.uniform();
  }
  const double raw = std::min(base * (1.0 + cfg_.retry.jitter * u), static_cast<double>(cfg_.retry.max_backoff.count()));
  return std::chrono::milliseconds(static_cast<long long>(std::ceil(std::max(raw, 0.0))));
}

std::string Polisher::request_with_retry(std::string_view text, const std::string& api_key) {
  const std::string body = cfg_.request_body(text).dump();
  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

  std::string last_error;
  for (int attempt = 1; attempt <= cfg_.retry.max_attempts; ++attempt) {
    if (attempt > 1) {
      const auto delay = backoff_delay(attempt - 1);
      {
        std::lock_guard lock(mu_);
        delays_.push_back(delay);
      }
      std::this_thread::sleep_for(delay);
    }
    {
      std::unique_lock lock(mu_);
      slot_cv_.wait(lock, [&] { return in_flight_ < cfg_.max_in_flight; });
      ++in_flight_;
    }
    ++requests_;
    auto res = client.Post(path_, headers, body, "application/json");
    {
      std::lock_guard lock(mu_);
      --in_flight_;
    }
    slot_cv_.notify_one();

    if (!res) {
      last_error = "network error: " + httplib::to_string(res.error());
      continue;
    }
    const int status = res->status;
    if (status >= 200 && status < 300) {
      json reply;
      try {
        reply = json::parse(res->body);
      } catch (const json::parse_error&) {
        throw PolishError("endpoint returned a non-JSON body");
      }
      const json::json_pointer ptr(cfg_.response_pointer);
      if (!reply.contains(ptr) || !reply[ptr].is_string()) {
        throw PolishError("response has no string at " + cfg_.response_pointer);
      }
      std::string completion = reply[ptr].get<std::string>();
      if (completion.find_first_not_of(" \t\r\n") == std::string::npos) throw PolishError("empty completion");
      return completion;
    }
    last_error = fmt::format("HTTP {}", status);
    const bool retryable = status == 408 || status == 429 || status >= 500;
    if (!retryable) throw PolishError(fmt::format("endpoint rejected request: HTTP {}: {}", status, res->body));
  }
  throw PolishError(fmt::format("giving up after {} attempts: {}", cfg_.retry.max_attempts, last_error));
}

std::string Polisher::polish(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw ValidationError("cannot polish empty text");
  }
  const std::string key = cache_key(text);
  if (auto hit = cache_lookup(key)) {
    ++cache_hits_;
    return *hit;
  }
  std::string api_key;
  if (!cfg_.api_key_env.empty()) {
    const char* v = std::getenv(cfg_.api_key_env.c_str());
    if (v == nullptr || *v == '\0') throw PolishError("API key variable " + cfg_.api_key_env + " is not set");
    api_key = v;
  }
  std::string completion = request_with_retry(text, api_key);
  cache_store(key, completion);
  return completion;
}

RecordSet Polisher::polish_corpus(RecordSet set) {
  for (const auto& r : set.records) {
    if (r.source != Source::human) {
      throw ValidationError("record '" + r.id + "' is not human-sourced; only human records can be polished");
    }
  }
  const std::size_t n = set.records.size();
  std::vector<std::optional<std::string>> results(n);
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = polish(set.records[i].original);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t workers = std::min(cfg_.max_in_flight, std::max<std::size_t>(n, 1));
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  std::string failed;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (results[i]) continue;
    ++failures;
    failed += fmt::format("\n  {}: {}", set.records[i].id, errors[i]);
  }
  if (failures > 0) {
    throw PolishError(fmt::format("{} of {} records could not be polished:{}", failures, n, failed));
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = set.records[i];
    r.polished = std::move(*results[i]);
    r.source = Source::polished;
    r.labels.reset();
  }
  return set;
}

PolisherStats Polisher::stats() const {
  std::lock_guard lock(mu_);
  return {requests_.load(), cache_hits_.load(), delays_};
}

std::string polish(std::string_view text, const PolisherConfig& cfg) { return Polisher(cfg).polish(text); }

RecordSet polish_corpus(RecordSet set, const PolisherConfig& cfg) {
  return Polisher(cfg).polish_corpus(std::move(set));
}

}  // namespace provkit
