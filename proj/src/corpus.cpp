#include "provkit/corpus.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "provkit/errors.hpp"
#include "provkit/json_io.hpp"
#include "provkit/rng.hpp"

namespace provkit {

using nlohmann::json;

std::string_view to_string(Source s) {
  switch (s) {
    case Source::human: return "human";
    case Source::polished: return "polished";
    case Source::generated: return "generated";
  }
  return "?";
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Source source_from_string(std::string_view s) {
  if (s == "human") return Source::human;
  if (s == "polished") return Source::polished;
  if (s == "generated") return Source::generated;
  throw ValidationError("unknown source '" + std::string(s) + "'");
}

Split split_from_string(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw ValidationError("unknown split '" + std::string(s) + "'");
}

namespace {

std::string now_iso8601() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(
                                                    std::chrono::system_clock::now())));
}

void check_record(const PairedRecord& r) {
  if (r.id.empty()) throw ValidationError("record has an empty id");
  if (r.source == Source::polished && !r.polished) {
    throw ValidationError("record '" + r.id + "': source is polished but polished text is missing");
  }
  if (r.labels) {
    for (double v : {r.labels->jaccard, r.labels->levenshtein_norm}) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw ValidationError("record '" + r.id + "': label " + fmt::format("{}", v) + " outside [0,1]");
      }
    }
    if (r.source == Source::human && (r.labels->jaccard != 0.0 || r.labels->levenshtein_norm != 0.0)) {
      throw ValidationError("record '" + r.id + "': human records must carry zero labels");
    }
  }
}

const std::string& require_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) throw ValidationError(std::string("missing required field '") + key + "'");
  if (!it->is_string()) throw ValidationError(std::string("field '") + key + "' must be a string");
  return it->get_ref<const std::string&>();
}

const json* optional_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

PairedRecord record_from_json(const json& obj) {
  if (!obj.is_object()) throw ValidationError("line is not a JSON object");
  static const std::unordered_set<std::string> kKnown = {"id", "original", "polished", "source",
                                                         "lang_mode", "labels", "split"};
  for (const auto& [key, _] : obj.items()) {
    if (!kKnown.count(key)) throw ValidationError("unknown field '" + key + "'");
  }
  PairedRecord r;
  r.id = require_string(obj, "id");
  r.original = require_string(obj, "original");
  r.source = source_from_string(require_string(obj, "source"));
  if (const json* p = optional_field(obj, "polished")) {
    if (!p->is_string()) throw ValidationError("field 'polished' must be a string or null");
    r.polished = p->get<std::string>();
  }
  if (const json* m = optional_field(obj, "lang_mode")) {
    if (!m->is_string()) throw ValidationError("field 'lang_mode' must be a string");
    r.lang_mode = token_mode_from_string(m->get<std::string>());
  }
  if (const json* l = optional_field(obj, "labels")) {
    if (!l->is_object()) throw ValidationError("field 'labels' must be an object or null");
    SimilarityLabels labels;
    for (const auto& [key, value] : l->items()) {
      if (!value.is_number()) throw ValidationError("label '" + key + "' must be a number");
      if (key == "jaccard") {
        labels.jaccard = value.get<double>();
      } else if (key == "levenshtein_norm") {
        labels.levenshtein_norm = value.get<double>();
      } else {
        throw ValidationError("unknown label '" + key + "'");
      }
    }
    if (!l->contains("jaccard") || !l->contains("levenshtein_norm")) {
      throw ValidationError("labels must contain both 'jaccard' and 'levenshtein_norm'");
    }
    r.labels = labels;
  }
  if (const json* s = optional_field(obj, "split")) {
    if (!s->is_string()) throw ValidationError("field 'split' must be a string or null");
    r.split = split_from_string(s->get<std::string>());
  }
  check_record(r);
  return r;
}

void sort_by_id(RecordSet& set) {
  std::sort(set.records.begin(), set.records.end(),
            [](const PairedRecord& a, const PairedRecord& b) { return a.id < b.id; });
}

}  // namespace

void validate(const RecordSet& set) {
  std::unordered_set<std::string_view> ids;
  for (const auto& r : set.records) {
    check_record(r);
    if (!ids.insert(r.id).second) throw ValidationError("duplicate id '" + r.id + "'");
    if (r.lang_mode != set.records.front().lang_mode) {
      throw ValidationError("record '" + r.id + "': lang_mode differs from the rest of the set");
    }
  }
}

RecordSet parse_jsonl(std::istream& in, std::string_view origin) {
  RecordSet set;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      json obj;
      try {
        obj = json::parse(line);
      } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed JSON: ") + e.what());
      }
      PairedRecord r = record_from_json(obj);
      if (!ids.insert(r.id).second) throw ValidationError("duplicate id '" + r.id + "'");
      if (!set.records.empty() && r.lang_mode != set.records.front().lang_mode) {
        throw ValidationError("lang_mode differs from earlier records");
      }
      set.records.push_back(std::move(r));
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("{}:{}: {}", origin, line_no, e.what()));
    }
  }
  sort_by_id(set);
  set.meta.created_at = now_iso8601();
  if (!set.records.empty()) set.meta.tokenizer_mode = set.records.front().lang_mode;
  return set;
}

RecordSet ingest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ValidationError("dataset not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return parse_jsonl(in, path.string());
}

std::string record_to_json_line(const PairedRecord& r) {
  std::string out = "{\"id\": " + json_quote(r.id) + ", \"original\": " + json_quote(r.original);
  out += ", \"polished\": " + (r.polished ? json_quote(*r.polished) : std::string("null"));
  out += fmt::format(", \"source\": \"{}\", \"lang_mode\": \"{}\"", to_string(r.source), to_string(r.lang_mode));
  if (r.labels) {
    out += ", \"labels\": {\"jaccard\": " + format_real(r.labels->jaccard) +
           ", \"levenshtein_norm\": " + format_real(r.labels->levenshtein_norm) + "}";
  } else {
    out += ", \"labels\": null";
  }
  out += ", \"split\": " + (r.split ? fmt::format("\"{}\"", to_string(*r.split)) : std::string("null"));
  out += "}";
  return out;
}

void write_jsonl(const RecordSet& set, std::ostream& out) {
  std::vector<const PairedRecord*> order;
  order.reserve(set.records.size());
  for (const auto& r : set.records) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->id < b->id; });
  for (const auto* r : order) out << record_to_json_line(*r) << '\n';
}

void write_jsonl(const RecordSet& set, const std::filesystem::path& path) {
  std::ostringstream buf;
  write_jsonl(set, buf);
  write_file_atomic(path, buf.str());
}

RecordSet label(RecordSet set) {
  for (auto& r : set.records) {
    if (r.source == Source::human) {
      r.labels = SimilarityLabels{0.0, 0.0};
    } else if (r.polished) {
      const TokenSeq a = tokenize(r.original, r.lang_mode);
      const TokenSeq b = tokenize(*r.polished, r.lang_mode);
      r.labels = SimilarityLabels{jaccard_distance(a, b), normalized_levenshtein(a, b)};
    }
  }
  set.meta.metric_versions = std::string(kMetricVersion);
  return set;
}

SplitRatios parse_ratios(std::string_view text) {
  SplitRatios r;
  std::array<std::uint32_t, 3> parts{};
  std::size_t start = 0;
  for (int k = 0; k < 3; ++k) {
    const std::size_t end = k < 2 ? text.find(':', start) : text.size();
    if (end == std::string_view::npos) throw ValidationError("ratios must look like 6:3:1");
    const std::string piece(text.substr(start, end - start));
    if (piece.empty() || piece.find_first_not_of("0123456789") != std::string::npos) {
      throw ValidationError("ratios must be non-negative integers, got '" + std::string(text) + "'");
    }
    parts[k] = static_cast<std::uint32_t>(std::stoul(piece));
    start = end + 1;
  }
  r.train = parts[0];
  r.test = parts[1];
  r.val = parts[2];
  if (r.train + r.test + r.val == 0) throw ValidationError("ratios must not all be zero");
  return r;
}

std::string_view pair_key(std::string_view id) {
  return id.substr(0, id.find('#'));
}

std::array<std::size_t, 3> apportion(std::size_t n, const SplitRatios& ratios) {
  const std::array<std::uint64_t, 3> w = {ratios.train, ratios.test, ratios.val};
  const std::uint64_t total = w[0] + w[1] + w[2];
  if (total == 0) throw ValidationError("ratios must not all be zero");
  std::array<std::size_t, 3> counts{};
  std::array<std::uint64_t, 3> remainder{};
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    counts[k] = static_cast<std::size_t>(n * w[k] / total);
    remainder[k] = n * w[k] % total;
    assigned += counts[k];
  }
  // Exact integer remainders; ties go to the earlier bucket.
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++counts[order[i]];
  return counts;
}

RecordSet split(RecordSet set, const SplitRatios& ratios, std::uint64_t seed) {
  if (set.records.empty()) throw ValidationError("cannot split an empty record set");
  sort_by_id(set);
  std::vector<std::string> keys;
  for (const auto& r : set.records) keys.emplace_back(pair_key(r.id));
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  const int nonzero = (ratios.train > 0) + (ratios.test > 0) + (ratios.val > 0);
  if (keys.size() < static_cast<std::size_t>(nonzero)) {
    throw ValidationError(fmt::format("{} pair groups cannot fill {} non-empty splits", keys.size(), nonzero));
  }
  const auto counts = apportion(keys.size(), ratios);
  Rng rng(seed);
  rng.shuffle(keys);

  std::map<std::string, Split, std::less<>> assignment;
  std::size_t i = 0;
  constexpr std::array<Split, 3> kOrder = {Split::train, Split::test, Split::val};
  for (int k = 0; k < 3; ++k) {
    for (std::size_t c = 0; c < counts[k]; ++c) assignment.emplace(keys[i++], kOrder[k]);
  }
  for (auto& r : set.records) r.split = assignment.find(pair_key(r.id))->second;
  return set;
}

}  // namespace provkit
