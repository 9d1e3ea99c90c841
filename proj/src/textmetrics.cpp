#include "provkit/textmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "provkit/errors.hpp"
#include "provkit/utf8.hpp"

namespace provkit {

namespace {

void require_same_mode(const TokenSeq& a, const TokenSeq& b) {
  if (a.mode != b.mode) {
    throw std::invalid_argument("token sequences use different tokenizer modes");
  }
}

}  // namespace

std::string_view to_string(TokenMode mode) {
  return mode == TokenMode::word ? "word" : "char";
}

TokenMode token_mode_from_string(std::string_view s) {
  if (s == "word") return TokenMode::word;
  if (s == "char") return TokenMode::char_;
  throw ValidationError("unknown tokenizer mode '" + std::string(s) + "' (expected word|char)");
}

TokenSeq tokenize(std::string_view text, TokenMode mode) {
  TokenSeq seq;
  seq.mode = mode;
  const auto cps = utf8::decode(text);
  if (mode == TokenMode::char_) {
    for (const auto& cp : cps) {
      if (!utf8::is_space(cp.value)) seq.tokens.emplace_back(cp.bytes);
    }
    return seq;
  }
  std::string current;
  for (const auto& cp : cps) {
    if (utf8::is_space(cp.value)) {
      if (!current.empty()) seq.tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.append(cp.bytes);
    }
  }
  if (!current.empty()) seq.tokens.push_back(std::move(current));
  return seq;
}

double jaccard_distance(const TokenSeq& a, const TokenSeq& b) {
  require_same_mode(a, b);
  const std::unordered_set<std::string_view> sa(a.tokens.begin(), a.tokens.end());
  const std::unordered_set<std::string_view> sb(b.tokens.begin(), b.tokens.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

std::size_t levenshtein(const TokenSeq& a, const TokenSeq& b) {
  require_same_mode(a, b);
  const auto& x = a.tokens.size() >= b.tokens.size() ? a.tokens : b.tokens;
  const auto& y = a.tokens.size() >= b.tokens.size() ? b.tokens : a.tokens;
  // Two rows over the shorter sequence.
  std::vector<std::size_t> prev(y.size() + 1), cur(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[y.size()];
}

double normalized_levenshtein(const TokenSeq& a, const TokenSeq& b) {
  const std::size_t d = levenshtein(a, b);
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 0.0;
  return static_cast<double>(d) / static_cast<double>(longest);
}

double cosine_similarity(const FeatureVector& u, const FeatureVector& v) {
  if (u.dim() != v.dim()) {
    throw std::invalid_argument("cosine_similarity: dimension mismatch (" + std::to_string(u.dim()) +
                                " vs " + std::to_string(v.dim()) + ")");
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.dim(); ++i) {
    dot += u.values[i] * v.values[i];
    nu += u.values[i] * u.values[i];
    nv += v.values[i] * v.values[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

}  // namespace provkit
