#include "provkit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "provkit/errors.hpp"
#include "provkit/rng.hpp"

namespace provkit {

using nlohmann::json;

PrTarget pr_target_from_string(std::string_view s) {
  if (s == "levenshtein_norm" || s == "levenshtein") return PrTarget::levenshtein_norm;
  if (s == "jaccard") return PrTarget::jaccard;
  throw ValidationError("unknown PR target '" + std::string(s) + "' (expected levenshtein_norm|jaccard)");
}

std::string_view to_string(PrTarget t) { return t == PrTarget::jaccard ? "jaccard" : "levenshtein_norm"; }

std::vector<Sample> expand_samples(const RecordSet& set, PrTarget target) {
  std::set<std::string_view> groups_with_human;
  for (const auto& r : set.records) {
    if (r.source == Source::human) groups_with_human.insert(pair_key(r.id));
  }
  auto pick = [&](const SimilarityLabels& l) {
    return target == PrTarget::jaccard ? l.jaccard : l.levenshtein_norm;
  };
  std::vector<Sample> out;
  for (const auto& r : set.records) {
    switch (r.source) {
      case Source::human:
        out.push_back({r.id, r.original, 0, 0.0, std::string(kGroupHuman), r.split});
        break;
      case Source::polished:
        if (!r.labels) throw ValidationError("record '" + r.id + "' has no labels; run `provkit label` first");
        if (!groups_with_human.count(pair_key(r.id))) {
          out.push_back({r.id + ":original", r.original, 0, 0.0, std::string(kGroupHuman), r.split});
        }
        out.push_back({r.id, *r.polished, 1, pick(*r.labels), std::string(kGroupPolished), r.split});
        break;
      case Source::generated: {
        std::optional<double> pr;
        if (r.labels) pr = pick(*r.labels);
        out.push_back({r.id, r.original, 1, pr, std::string(kGroupGenerated), r.split});
        break;
      }
    }
  }
  return out;
}

std::vector<FeatureVector> featurize_samples(const std::vector<Sample>& samples, const FeaturizerConfig& cfg) {
  std::vector<FeatureVector> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(featurize(s.text, cfg));
  return out;
}

std::vector<FeatureVector> lookup_embeddings(const std::vector<Sample>& samples,
                                             const std::map<std::string, FeatureVector>& embeddings) {
  std::vector<FeatureVector> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    auto it = embeddings.find(s.id);
    if (it == embeddings.end()) throw ValidationError("no embedding for sample '" + s.id + "'");
    out.push_back(it->second);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

const std::vector<std::string>& synth_human_pool() {
  static const std::vector<std::string> pool = {
      "the", "of", "and", "to", "in", "we", "a", "is", "for", "that", "on", "with", "this", "are", "by", "as",
      "model", "models", "data", "task", "tasks", "results", "show", "our", "method", "methods", "use", "used",
      "text", "language", "word", "words", "training", "learning", "performance", "approach", "new", "set",
      "which", "from", "can", "be", "it", "not", "also", "two", "these", "based", "work", "draft", "propose",
      "proposed", "using", "than", "more", "large", "small", "well", "first", "both", "each", "different",
      "such", "other", "between", "only", "how", "when", "where", "while", "most", "many", "some",
      "find", "found", "test", "tests", "corpus", "sentence", "sentences", "level", "labels", "label", "baseline",
      "baselines", "system", "systems", "fine", "tuned", "trained", "human", "humans", "experiments", "experiment",
      "evaluation", "evaluate", "study", "studies", "analysis", "datasets", "dataset", "way", "better", "best",
      "good", "high", "low", "number", "time", "order", "case", "cases", "input", "output", "given", "make",
      "makes", "made", "take", "takes", "give", "gives", "look", "looks", "try", "tried", "help", "helps",
      "simple", "hard", "easy", "big", "long", "short", "old", "across", "over", "under", "into", "out", "up",
      "down", "about", "after", "before", "then", "so", "but", "or", "if", "all", "any", "no", "very", "much",
      "still", "get", "gets", "got", "run", "runs", "ran", "see", "seen", "know", "known", "think", "thought",
      "need", "needs", "keep", "kept", "start", "end", "part", "parts", "point", "points", "idea", "ideas"};
  return pool;
}

const std::vector<std::string>& synth_polisher_pool() {
  static const std::vector<std::string> pool = {
      "furthermore", "moreover", "additionally", "notably", "consequently", "subsequently", "leverage",
      "leverages", "leveraging", "utilize", "utilizes", "utilizing", "facilitate", "facilitates", "demonstrate",
      "demonstrates", "demonstrated", "comprehensive", "robust", "novel", "innovative", "significantly",
      "substantially", "remarkable", "remarkably", "enhance", "enhances", "enhanced", "enhancement", "delve",
      "delves", "intricate", "nuanced", "pivotal", "crucial", "paramount", "meticulous", "meticulously",
      "underscore", "underscores", "showcase", "showcases", "elucidate", "elucidates", "endeavor", "endeavors",
      "encompass", "encompasses", "multifaceted", "landscape", "realm", "paradigm", "holistic", "seamless",
      "seamlessly", "streamline", "streamlines", "optimal", "optimize", "optimizes", "efficacy", "efficacious",
      "exemplify", "exemplifies", "noteworthy", "thereby", "therein", "wherein", "hence", "thus", "albeit",
      "commence", "commences", "ascertain", "ascertains", "augment", "augments", "bolster", "bolsters",
      "culminate", "culminates", "discern", "discerns", "embark", "embarks", "foster", "fosters", "harness",
      "harnesses", "illuminate", "illuminates", "navigate", "navigates", "orchestrate", "spearhead",
      "transformative", "unparalleled", "unprecedented", "vital", "versatile", "profound", "insightful"};
  return pool;
}

namespace {

std::vector<std::string> draw_words(Rng& rng, const std::vector<std::string>& pool, std::size_t n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(pool[rng.below(pool.size())]);
  return out;
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace

RecordSet synthesize(const SynthParams& p) {
  if (p.pairs == 0 && p.generated == 0) throw ValidationError("synth needs at least one pair or generated record");
  if (p.pairs > 0 && p.rates.empty()) throw ValidationError("synth needs at least one substitution rate");
  for (double r : p.rates) {
    if (!(r >= 0.0 && r <= 1.0)) throw ValidationError(fmt::format("substitution rate {} outside [0,1]", r));
  }
  if (p.min_len < 1 || p.min_len > p.max_len) throw ValidationError("synth lengths must satisfy 1 <= min <= max");

  Rng rng(p.seed);
  const auto& human = synth_human_pool();
  const auto& polisher = synth_polisher_pool();
  RecordSet set;
  for (std::size_t i = 0; i < p.pairs; ++i) {
    const double rate = p.rates[i % p.rates.size()];
    const std::size_t len = p.min_len + rng.below(p.max_len - p.min_len + 1);
    auto words = draw_words(rng, human, len);
    auto edited = words;
    for (auto& w : edited) {
      if (rng.uniform() < rate) w = polisher[rng.below(polisher.size())];
    }
    PairedRecord r;
    r.id = fmt::format("syn-r{:.2f}-{:06d}", rate, i);
    r.original = join(words);
    r.polished = join(edited);
    r.source = Source::polished;
    set.records.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < p.generated; ++i) {
    const std::size_t len = p.min_len + rng.below(p.max_len - p.min_len + 1);
    PairedRecord r;
    r.id = fmt::format("gen-{:06d}", i);
    r.original = join(draw_words(rng, polisher, len));
    r.source = Source::generated;
    set.records.push_back(std::move(r));
  }
  std::sort(set.records.begin(), set.records.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  set.meta.tokenizer_mode = TokenMode::word;
  return label(std::move(set));
}

std::optional<double> synth_rate_from_id(std::string_view id) {
  if (!id.starts_with("syn-r")) return std::nullopt;
  const auto rest = id.substr(5);
  const auto dash = rest.find('-');
  if (dash == std::string_view::npos) return std::nullopt;
  try {
    return std::stod(std::string(rest.substr(0, dash)));
  } catch (const std::logic_error&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Highlighted diff

DiffResult highlight_diff(std::string_view original, std::string_view polished, TokenMode mode) {
  const TokenSeq a = tokenize(original, mode);
  const TokenSeq b = tokenize(polished, mode);
  const std::size_t n = a.size(), m = b.size();
  // lcs[i][j] = LCS length of a[i:] and b[j:].
  std::vector<std::vector<std::size_t>> lcs(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      lcs[i][j] = a.tokens[i] == b.tokens[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }
  DiffResult d;
  d.mode = mode;
  std::size_t i = 0, j = 0;
  while (j < m) {
    if (i < n && a.tokens[i] == b.tokens[j]) {
      d.tokens.push_back({b.tokens[j], false});
      ++i;
      ++j;
    } else if (i < n && lcs[i + 1][j] >= lcs[i][j + 1]) {
      ++i;  // original token dropped; nothing to show on the polished side
    } else {
      d.tokens.push_back({b.tokens[j], true});
      ++d.edited_count;
      ++j;
    }
  }
  d.levenshtein_norm = normalized_levenshtein(a, b);
  d.jaccard = jaccard_distance(a, b);
  return d;
}

namespace {

template <typename Open, typename Close, typename Escape>
std::string render(const DiffResult& d, Open open, Close close, Escape escape) {
  const std::string sep = d.mode == TokenMode::word ? " " : "";
  std::string out;
  bool in_edit = false;
  for (std::size_t k = 0; k < d.tokens.size(); ++k) {
    const auto& t = d.tokens[k];
    if (t.edited && !in_edit) {
      if (k > 0) out += sep;
      out += open;
      in_edit = true;
    } else if (!t.edited && in_edit) {
      out += close;
      in_edit = false;
      out += sep;
    } else if (k > 0) {
      out += sep;
    }
    out += escape(t.text);
  }
  if (in_edit) out += close;
  return out;
}

}  // namespace

std::string render_diff_text(const DiffResult& d) {
  return render(d, "{+", "+}", [](const std::string& s) { return s; });
}

std::string render_diff_html(const DiffResult& d) {
  auto escape = [](const std::string& s) {
    std::string out;
    for (char c : s) {
      switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
      }
    }
    return out;
  };
  return "<p>" + render(d, "<span class=\"edited\" style=\"color:red\">", "</span>", escape) + "</p>";
}

// ---------------------------------------------------------------------------
// Run configuration

json to_json(const RunConfig& cfg) {
  return {{"seed", cfg.seed},
          {"mode", to_string(cfg.mode)},
          {"ratios", fmt::format("{}:{}:{}", cfg.ratios.train, cfg.ratios.test, cfg.ratios.val)},
          {"featurizer", to_json(cfg.featurizer)},
          {"train", {{"detect", to_json(cfg.detect_train)}, {"pr", to_json(cfg.pr_train)}}},
          {"polisher", to_json(cfg.polisher)},
          {"thresholds", {cfg.thresholds.involvement, cfg.thresholds.majority}},
          {"pr_target", to_string(cfg.pr_target)},
          {"lm", {{"order", cfg.lm_order}, {"add_k", cfg.lm_add_k}}}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  if (!j.is_object()) throw ValidationError("config root must be an object");
  try {
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    cfg.detect_train.seed = cfg.seed;
    cfg.pr_train.seed = cfg.seed;
    for (const auto& [key, v] : j.items()) {
      if (key == "seed") {
        continue;
      } else if (key == "mode") {
        cfg.mode = token_mode_from_string(v.get<std::string>());
      } else if (key == "ratios") {
        cfg.ratios = parse_ratios(v.get<std::string>());
      } else if (key == "featurizer") {
        cfg.featurizer = featurizer_config_from_json(v);
      } else if (key == "train") {
        for (const auto& [task, tv] : v.items()) {
          json merged = tv;
          if (!merged.contains("seed")) merged["seed"] = cfg.seed;
          if (task == "detect") {
            cfg.detect_train = train_config_from_json(merged, Task::detect);
          } else if (task == "pr") {
            cfg.pr_train = train_config_from_json(merged, Task::pr_regress);
          } else {
            throw ValidationError("unknown train section '" + task + "' (expected detect|pr)");
          }
        }
      } else if (key == "polisher") {
        cfg.polisher = polisher_config_from_json(v);
      } else if (key == "thresholds") {
        const auto t = v.get<std::vector<double>>();
        if (t.size() != 2) throw ValidationError("thresholds must have two entries");
        cfg.thresholds = parse_thresholds(fmt::format("{},{}", t[0], t[1]));
      } else if (key == "pr_target") {
        cfg.pr_target = pr_target_from_string(v.get<std::string>());
      } else if (key == "lm") {
        for (const auto& [lk, lv] : v.items()) {
          if (lk == "order") {
            cfg.lm_order = lv.get<int>();
          } else if (lk == "add_k") {
            cfg.lm_add_k = lv.get<double>();
          } else {
            throw ValidationError("unknown lm option '" + lk + "'");
          }
        }
      } else {
        throw ValidationError("unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad config: ") + e.what());
  }
  return cfg;
}

}  // namespace provkit
