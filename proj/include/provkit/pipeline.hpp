#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "provkit/corpus.hpp"
#include "provkit/evalmetrics.hpp"
#include "provkit/features.hpp"
#include "provkit/learn.hpp"
#include "provkit/polisher.hpp"

namespace provkit {

// Which similarity label serves as the Polish Ratio target.
enum class PrTarget { levenshtein_norm, jaccard };
PrTarget pr_target_from_string(std::string_view s);
std::string_view to_string(PrTarget t);

// One text to featurize, derived from a record.
//   human row      -> its original (detect 0, PR 0, group HW)
//   polished row   -> its polished text (detect 1, PR = label, group CP), plus
//                     the original as "<id>:original" (HW) unless the pair
//                     group already has a separate human row
//   generated row  -> its original (detect 1, PR = label if any, group CG)
struct Sample {
  std::string id;
  std::string text;
  int detect_label = 0;
  std::optional<double> pr_label;
  std::string group;  // HW, CP or CG
  std::optional<Split> split;
};

inline constexpr std::string_view kGroupHuman = "HW";
inline constexpr std::string_view kGroupPolished = "CP";
inline constexpr std::string_view kGroupGenerated = "CG";

/// Throws ValidationError if a polished row lacks labels.
std::vector<Sample> expand_samples(const RecordSet& set, PrTarget target = PrTarget::levenshtein_norm);

// Features for each sample: hashed from text, or looked up by sample id in
// imported embeddings.
std::vector<FeatureVector> featurize_samples(const std::vector<Sample>& samples, const FeaturizerConfig& cfg);
std::vector<FeatureVector> lookup_embeddings(const std::vector<Sample>& samples,
                                             const std::map<std::string, FeatureVector>& embeddings);

// ---------------------------------------------------------------------------
// Synthetic corpus

struct SynthParams {
  std::size_t pairs = 2000;
  std::vector<double> rates = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  std::uint64_t seed = 0;
  std::size_t min_len = 40;
  std::size_t max_len = 80;
  std::size_t generated = 0;  // additional fully machine-written records
};

// Word pools: human-proxy text draws from the first, substitutions and
// generated text from the second. The pools are disjoint.
const std::vector<std::string>& synth_human_pool();
const std::vector<std::string>& synth_polisher_pool();

/// Pair i uses rate rates[i % rates.size()]; every token of its human text
/// is replaced by a polisher-pool word with that probability. Records come
/// back labelled, with ids "syn-r<rate>-<index>" (generated records use
/// "gen-<index>").
RecordSet synthesize(const SynthParams& params);

// Rate encoded in a synthetic id, if any.
std::optional<double> synth_rate_from_id(std::string_view id);

// ---------------------------------------------------------------------------
// Highlighted diff

struct DiffToken {
  std::string text;
  bool edited = false;
};

struct DiffResult {
  std::vector<DiffToken> tokens;  // the polished side
  std::size_t edited_count = 0;
  double levenshtein_norm = 0.0;
  double jaccard = 0.0;
  TokenMode mode = TokenMode::word;
};

/// Marks polished tokens that are not part of a longest common subsequence
/// with the original.
DiffResult highlight_diff(std::string_view original, std::string_view polished, TokenMode mode);
std::string render_diff_text(const DiffResult& d);  // edits wrapped in {+ +}
std::string render_diff_html(const DiffResult& d);

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  std::uint64_t seed = 0;
  TokenMode mode = TokenMode::word;
  SplitRatios ratios;
  FeaturizerConfig featurizer;
  TrainConfig detect_train = TrainConfig::defaults(Task::detect);
  TrainConfig pr_train = TrainConfig::defaults(Task::pr_regress);
  PolisherConfig polisher;
  PrThresholds thresholds;
  PrTarget pr_target = PrTarget::levenshtein_norm;
  int lm_order = 3;
  double lm_add_k = 0.1;
};

nlohmann::json to_json(const RunConfig& cfg);

/// Applies a config tree on top of defaults. Unknown keys are rejected. The
/// top-level seed also seeds training unless a train section sets its own.
RunConfig run_config_from_json(const nlohmann::json& j);

}  // namespace provkit
