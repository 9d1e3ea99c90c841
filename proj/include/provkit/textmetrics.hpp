#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "provkit/feature_vector.hpp"

namespace provkit {

enum class TokenMode { word, char_ };

std::string_view to_string(TokenMode mode);
TokenMode token_mode_from_string(std::string_view s);

struct TokenSeq {
  std::vector<std::string> tokens;
  TokenMode mode = TokenMode::word;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  bool operator==(const TokenSeq&) const = default;
};

// Recorded in dataset metadata so stored labels can be traced to the code
// that produced them.
inline constexpr std::string_view kMetricVersion = "textmetrics/1";

/// Word mode splits on runs of Unicode whitespace; char mode yields one token
/// per non-whitespace code point. Case and punctuation are kept as-is.
TokenSeq tokenize(std::string_view text, TokenMode mode);

/// 1 - |A ∩ B| / |A ∪ B| over the token sets; 0 when both are empty.
double jaccard_distance(const TokenSeq& a, const TokenSeq& b);

/// Minimum number of token insertions, deletions and substitutions.
std::size_t levenshtein(const TokenSeq& a, const TokenSeq& b);

/// levenshtein / max(|a|, |b|); 0 when both are empty.
double normalized_levenshtein(const TokenSeq& a, const TokenSeq& b);

/// Cosine of the angle between u and v, or 0 if either is all zeros.
double cosine_similarity(const FeatureVector& u, const FeatureVector& v);

}  // namespace provkit
