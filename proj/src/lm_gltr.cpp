#include "provkit/lm_gltr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "provkit/errors.hpp"

namespace provkit {

using nlohmann::json;

std::size_t LMBackend::index_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? unknown_index_ : it->second;
}

void LMBackend::build_index() {
  const auto& v = vocab();
  index_.clear();
  for (std::size_t i = 0; i < v.size(); ++i) index_.emplace(v[i], i);
  auto it = index_.find(std::string(kUnknownToken));
  unknown_index_ = it == index_.end() ? 0 : it->second;
}

UniformLM::UniformLM(std::vector<std::string> vocab) : vocab_(std::move(vocab)) {
  if (vocab_.empty()) throw std::invalid_argument("UniformLM needs a non-empty vocabulary");
  build_index();
}

std::vector<double> UniformLM::next_distribution(std::span<const std::string>) const {
  return std::vector<double>(vocab_.size(), 1.0 / static_cast<double>(vocab_.size()));
}

json UniformLM::metadata() const {
  return {{"backend", "uniform"}, {"vocab_size", vocab_.size()}, {"entropy_base", "e"}};
}

NGramLM::NGramLM(std::span<const TokenSeq> corpus, int order, double add_k)
    : order_(order), add_k_(add_k) {
  if (corpus.empty()) throw ValidationError("cannot train an n-gram model on an empty corpus");
  if (order < 1 || order > 5) throw ValidationError("n-gram order must be in [1, 5]");
  if (!(add_k > 0.0) || !std::isfinite(add_k)) throw ValidationError("add_k must be a positive real");

  std::set<std::string> types;
  for (const auto& doc : corpus) types.insert(doc.tokens.begin(), doc.tokens.end());
  types.erase(std::string(kUnknownToken));
  vocab_.emplace_back(kUnknownToken);
  vocab_.insert(vocab_.end(), types.begin(), types.end());
  build_index();

  contexts_.resize(static_cast<std::size_t>(order_));
  for (const auto& doc : corpus) {
    std::vector<std::size_t> ids;
    ids.reserve(doc.size());
    for (const auto& t : doc.tokens) ids.push_back(index_of(t));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t n = 0; n < contexts_.size() && n <= i; ++n) {
        Key key(ids.begin() + static_cast<std::ptrdiff_t>(i - n), ids.begin() + static_cast<std::ptrdiff_t>(i));
        auto& c = contexts_[n][key];
        ++c.next[ids[i]];
        ++c.total;
      }
    }
  }
}

std::vector<double> NGramLM::next_distribution(std::span<const std::string> context) const {
  const std::size_t v = vocab_.size();
  const std::size_t max_n = std::min(context.size(), contexts_.size() - 1);
  Key key;
  for (std::size_t n = max_n + 1; n-- > 0;) {
    key.clear();
    for (std::size_t j = context.size() - n; j < context.size(); ++j) key.push_back(index_of(context[j]));
    auto it = contexts_[n].find(key);
    if (it == contexts_[n].end()) continue;
    const Counts& c = it->second;
    const double denom = static_cast<double>(c.total) + add_k_ * static_cast<double>(v);
    std::vector<double> dist(v, add_k_ / denom);
    for (const auto& [w, count] : c.next) dist[w] = (static_cast<double>(count) + add_k_) / denom;
    return dist;
  }
  // contexts_[0] always holds the empty context once the corpus has a token;
  // an all-empty corpus leaves only the sentinel.
  return std::vector<double>(v, 1.0 / static_cast<double>(v));
}

json NGramLM::metadata() const {
  return {{"backend", "ngram"}, {"order", order_}, {"add_k", add_k_},
          {"vocab_size", vocab_.size()}, {"entropy_base", "e"}};
}

std::unique_ptr<NGramLM> train_ngram_lm(std::span<const TokenSeq> corpus, int order, double add_k) {
  return std::make_unique<NGramLM>(corpus, order, add_k);
}

std::vector<TokenStats> token_stats(const LMBackend& lm, const TokenSeq& doc) {
  if (doc.empty()) throw ValidationError("token_stats needs a non-empty document");
  std::vector<TokenStats> out;
  out.reserve(doc.size());
  const std::span<const std::string> tokens(doc.tokens);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto dist = lm.next_distribution(tokens.first(i));
    const std::size_t idx = lm.index_of(tokens[i]);
    const double p = dist[idx];
    std::size_t rank = 1;
    double entropy = 0.0;
    for (std::size_t w = 0; w < dist.size(); ++w) {
      if (dist[w] > p || (dist[w] == p && w < idx)) ++rank;
      if (dist[w] > 0.0) entropy -= dist[w] * std::log(dist[w]);
    }
    out.push_back({tokens[i], p, rank, std::max(0.0, entropy)});
  }
  return out;
}

RankHistogram bucket_histogram(std::span<const TokenStats> stats) {
  RankHistogram h;
  for (const auto& s : stats) {
    if (s.rank <= 10) {
      ++h.le10;
    } else if (s.rank <= 100) {
      ++h.le100;
    } else if (s.rank <= 1000) {
      ++h.le1000;
    } else {
      ++h.rest;
    }
  }
  return h;
}

char bucket_marker(std::size_t rank) {
  if (rank <= 10) return 'G';
  if (rank <= 100) return 'Y';
  if (rank <= 1000) return 'R';
  return 'P';
}

std::vector<TokenStats> parse_token_stats(std::istream& in, std::string_view origin) {
  std::vector<TokenStats> out;
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
    if (!obj.is_object()) fail("line is not a JSON object");
    for (const char* key : {"token", "prob", "rank", "entropy"}) {
      if (!obj.contains(key)) fail(std::string("missing field '") + key + "'");
    }
    if (!obj["token"].is_string()) fail("token must be a string");
    if (!obj["prob"].is_number() || !obj["entropy"].is_number()) fail("prob and entropy must be numbers");
    if (!obj["rank"].is_number_integer()) fail("rank must be an integer");
    TokenStats s;
    s.token = obj["token"].get<std::string>();
    s.prob = obj["prob"].get<double>();
    s.entropy = obj["entropy"].get<double>();
    const auto rank = obj["rank"].get<long long>();
    if (!(s.prob >= 0.0 && s.prob <= 1.0)) fail("prob outside [0,1]");
    if (rank < 1) fail("rank must be >= 1");
    if (!(s.entropy >= 0.0) || !std::isfinite(s.entropy)) fail("entropy must be a finite non-negative number");
    s.rank = static_cast<std::size_t>(rank);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TokenStats> import_token_stats(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return parse_token_stats(in, path.string());
}

json to_json(const TokenStats& s) {
  return {{"token", s.token}, {"prob", s.prob}, {"rank", s.rank}, {"entropy", s.entropy}};
}

json to_json(const RankHistogram& h) {
  return {{"le10", h.le10}, {"le100", h.le100}, {"le1000", h.le1000}, {"rest", h.rest}};
}

}  // namespace provkit
