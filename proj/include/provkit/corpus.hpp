#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "provkit/textmetrics.hpp"

namespace provkit {

enum class Source { human, polished, generated };
enum class Split { train, val, test };

std::string_view to_string(Source s);
std::string_view to_string(Split s);
Source source_from_string(std::string_view s);
Split split_from_string(std::string_view s);

struct SimilarityLabels {
  double jaccard = 0.0;
  double levenshtein_norm = 0.0;
  bool operator==(const SimilarityLabels&) const = default;
};

struct PairedRecord {
  std::string id;
  std::string original;
  std::optional<std::string> polished;
  Source source = Source::human;
  TokenMode lang_mode = TokenMode::word;
  std::optional<SimilarityLabels> labels;
  std::optional<Split> split;

  bool operator==(const PairedRecord&) const = default;
};

struct RecordSetMeta {
  std::string created_at;
  TokenMode tokenizer_mode = TokenMode::word;
  std::string metric_versions{kMetricVersion};
};

// Records are kept sorted by id, which is also the on-disk order.
struct RecordSet {
  std::vector<PairedRecord> records;
  RecordSetMeta meta;

  std::size_t size() const { return records.size(); }
};

// Checks every record invariant and set-level invariant (unique ids, shared
// lang_mode). Throws ValidationError naming the offending record.
void validate(const RecordSet& set);

/// Reads a JSONL record file. The whole file is rejected on the first bad
/// line; the error message carries the 1-based line number.
RecordSet ingest(const std::filesystem::path& path);
RecordSet parse_jsonl(std::istream& in, std::string_view origin = "<stream>");

/// Writes records sorted by id, one JSON object per line.
void write_jsonl(const RecordSet& set, std::ostream& out);
void write_jsonl(const RecordSet& set, const std::filesystem::path& path);
std::string record_to_json_line(const PairedRecord& r);

/// Fills similarity labels: distances between tokenized original and polished
/// text, or {0, 0} for human-sourced records. Records without polished text
/// that are not human keep whatever labels they had.
RecordSet label(RecordSet set);

// Ratios are ordered (train, test, val): "6:3:1" means 60% train, 30% test,
// 10% val.
struct SplitRatios {
  std::uint32_t train = 6;
  std::uint32_t test = 3;
  std::uint32_t val = 1;
};

SplitRatios parse_ratios(std::string_view text);  // "6:3:1"

// Records whose ids share the part before the first '#' form one pair group
// ("a17#h" and "a17#p"); an id without '#' is its own group.
std::string_view pair_key(std::string_view id);

/// Largest-remainder apportionment of n units into (train, test, val).
std::array<std::size_t, 3> apportion(std::size_t n, const SplitRatios& ratios);

/// Assigns every record a split. Pair groups are shuffled with the seed
/// (starting from sorted order) and cut into apportioned blocks, so the
/// result depends only on (seed, ids) and pairs never straddle splits.
RecordSet split(RecordSet set, const SplitRatios& ratios, std::uint64_t seed);

}  // namespace provkit
