#include "provkit/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "provkit/corpus.hpp"
#include "provkit/errors.hpp"
#include "provkit/evalmetrics.hpp"
#include "provkit/features.hpp"
#include "provkit/json_io.hpp"
#include "provkit/learn.hpp"
#include "provkit/lm_gltr.hpp"
#include "provkit/pipeline.hpp"
#include "provkit/polisher.hpp"

namespace provkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Raw flag values; anything left unset keeps the value from --config.
struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string dataset;
  std::string out;
  std::optional<std::string> ratios;
  std::optional<std::string> mode;
  std::optional<std::string> loss;
  std::optional<std::string> smooth_l1_mode;
  std::optional<std::string> thresholds;
  std::optional<double> beta;
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> hidden;
  std::optional<std::string> pr_target;

  // polish
  std::optional<std::string> endpoint;
  std::optional<std::string> llm_model;
  std::optional<std::string> cache_dir;
  std::optional<std::string> api_key_env;
  std::optional<std::size_t> max_in_flight;
  std::optional<std::string> prompt_preset;

  // train / score / eval
  std::string task;
  std::vector<std::string> models;
  std::string history;
  std::string embeddings;
  double min_polished_pr = 0.0;
  std::string split_name = "test";
  std::string csv;

  // texts
  std::string input;
  std::vector<std::string> texts;

  // gltr
  std::string backend = "ngram";
  std::string lm_corpus;
  std::string stats;
  std::optional<int> order;
  std::optional<double> add_k;
  bool render = false;

  // diff
  std::string original, polished, original_file, polished_file;
  std::string format = "text";

  // synth
  std::size_t pairs = 2000;
  std::string rates = "0.1,0.2,0.3,0.4,0.5,0.6,0.7";
  std::size_t min_len = 40, max_len = 80, generated = 0;
};

RunConfig resolve_config(const Flags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : run_config_from_json(read_json_file(f.config));
  if (f.seed) {
    cfg.seed = *f.seed;
    cfg.detect_train.seed = *f.seed;
    cfg.pr_train.seed = *f.seed;
  }
  if (f.ratios) cfg.ratios = parse_ratios(*f.ratios);
  if (f.mode) cfg.mode = token_mode_from_string(*f.mode);
  if (f.thresholds) cfg.thresholds = parse_thresholds(*f.thresholds);
  if (f.pr_target) cfg.pr_target = pr_target_from_string(*f.pr_target);
  for (TrainConfig* t : {&cfg.detect_train, &cfg.pr_train}) {
    if (f.smooth_l1_mode) t->smooth_l1_mode = smooth_l1_mode_from_string(*f.smooth_l1_mode);
    if (f.beta) t->beta = *f.beta;
    if (f.epochs) t->max_epochs = *f.epochs;
    if (f.lr) t->learning_rate = *f.lr;
    if (f.batch_size) t->batch_size = *f.batch_size;
    if (f.hidden) t->hidden = *f.hidden;
  }
  // --loss names a regression loss; the detector keeps cross-entropy.
  if (f.loss) cfg.pr_train.loss = loss_from_string(*f.loss);
  if (f.endpoint) cfg.polisher.endpoint = *f.endpoint;
  if (f.llm_model) cfg.polisher.model = *f.llm_model;
  if (f.cache_dir) cfg.polisher.cache_dir = *f.cache_dir;
  if (f.api_key_env) cfg.polisher.api_key_env = *f.api_key_env;
  if (f.max_in_flight) cfg.polisher.max_in_flight = *f.max_in_flight;
  if (f.prompt_preset) cfg.polisher.prompt_template = std::string(prompt_preset(*f.prompt_preset));
  if (f.order) cfg.lm_order = *f.order;
  if (f.add_k) cfg.lm_add_k = *f.add_k;
  cfg.detect_train.validate();
  cfg.pr_train.validate();
  cfg.polisher.validate();
  cfg.featurizer.validate();
  return cfg;
}

fs::path sibling(const fs::path& out, std::string_view suffix) {
  fs::path p = out;
  p.replace_extension(std::string(suffix));
  return p;
}

void write_provenance(const fs::path& out, std::string_view command, const RunConfig& cfg) {
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  const json doc = {{"command", command}, {"config", to_json(cfg)}};
  write_file_atomic(sibling(out, ".runconfig.json"), doc.dump(2) + "\n");
}

void write_text(const fs::path& path, const std::string& contents) { write_file_atomic(path, contents); }

std::string require(const std::string& value, const char* flag) {
  if (value.empty()) throw ValidationError(std::string("missing required flag ") + flag);
  return value;
}

std::map<std::string, std::size_t> count_by(const RecordSet& set, bool by_split) {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : set.records) {
    if (by_split) {
      counts[r.split ? std::string(to_string(*r.split)) : "unassigned"]++;
    } else {
      counts[std::string(to_string(r.source))]++;
    }
  }
  return counts;
}

void print_counts(std::ostream& out, const RecordSet& set) {
  out << "records: " << set.size() << "\n";
  for (const auto& [k, v] : count_by(set, false)) out << "  source " << k << ": " << v << "\n";
  for (const auto& [k, v] : count_by(set, true)) out << "  split " << k << ": " << v << "\n";
}

std::vector<std::string> read_texts(const Flags& f) {
  std::vector<std::string> texts = f.texts;
  if (!f.input.empty()) {
    std::ifstream in(f.input);
    if (!in) throw ValidationError("cannot open " + f.input);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) texts.push_back(line);
    }
  }
  if (texts.empty()) throw ValidationError("no input texts: pass --input FILE or --text TEXT");
  return texts;
}

std::string read_whole(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void emit(const Flags& f, std::ostream& out, const std::string& contents) {
  if (f.out.empty()) {
    out << contents;
  } else {
    write_text(f.out, contents);
  }
}

// --------------------------------------------------------------------------
// Subcommands

int cmd_ingest(const Flags& f, std::ostream& out) {
  const RecordSet set = ingest(require(f.dataset, "--dataset"));
  if (!f.out.empty()) {
    write_provenance(f.out, "ingest", resolve_config(f));
    write_jsonl(set, fs::path(f.out));
  }
  print_counts(out, set);
  return kExitOk;
}

int cmd_polish(const Flags& f, std::ostream& out) {
  const RunConfig cfg = resolve_config(f);
  const std::string dest = f.out.empty() ? require(f.dataset, "--dataset") : f.out;
  RecordSet set = ingest(require(f.dataset, "--dataset"));
  write_provenance(dest, "polish", cfg);
  Polisher polisher(cfg.polisher);
  set = polisher.polish_corpus(std::move(set));
  write_jsonl(set, fs::path(dest));
  const auto stats = polisher.stats();
  out << fmt::format("polished {} records ({} requests, {} cache hits)\n", set.size(), stats.network_requests,
                     stats.cache_hits);
  return kExitOk;
}

int cmd_label(const Flags& f, std::ostream& out) {
  const RunConfig cfg = resolve_config(f);
  const std::string dest = f.out.empty() ? require(f.dataset, "--dataset") : f.out;
  RecordSet set = label(ingest(require(f.dataset, "--dataset")));
  write_provenance(dest, "label", cfg);
  write_jsonl(set, fs::path(dest));
  std::size_t labelled = 0;
  for (const auto& r : set.records) labelled += r.labels.has_value();
  out << fmt::format("labelled {} of {} records\n", labelled, set.size());
  return kExitOk;
}

int cmd_split(const Flags& f, std::ostream& out) {
  const RunConfig cfg = resolve_config(f);
  const std::string dest = f.out.empty() ? require(f.dataset, "--dataset") : f.out;
  RecordSet set = split(ingest(require(f.dataset, "--dataset")), cfg.ratios, cfg.seed);
  write_provenance(dest, "split", cfg);
  write_jsonl(set, fs::path(dest));
  print_counts(out, set);
  return kExitOk;
}

struct FeaturizedSet {
  std::vector<Sample> samples;
  std::vector<FeatureVector> features;
};

FeaturizedSet load_features(const RecordSet& set, const RunConfig& cfg, const std::string& embeddings,
                            std::size_t dim_hint) {
  FeaturizedSet fs_;
  fs_.samples = expand_samples(set, cfg.pr_target);
  if (embeddings.empty()) {
    fs_.features = featurize_samples(fs_.samples, cfg.featurizer);
  } else {
    fs_.features = lookup_embeddings(fs_.samples, import_embeddings(embeddings, dim_hint));
  }
  return fs_;
}

std::size_t embedding_dim(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      return json::parse(line).at("vector").size();
    } catch (const json::exception&) {
      throw ValidationError(path + ": first record has no 'vector' array");
    }
  }
  throw ValidationError(path + ": no embeddings");
}

int cmd_train(const Flags& f, std::ostream& out) {
  const Task task = task_from_string(require(f.task, "--task"));
  const RunConfig cfg = resolve_config(f);
  const fs::path model_path = require(f.out, "--out");
  const fs::path history_path = f.history.empty() ? sibling(model_path, ".history.json") : fs::path(f.history);
  const RecordSet set = ingest(require(f.dataset, "--dataset"));
  for (const auto& r : set.records) {
    if (!r.split) {
      throw ValidationError("record '" + r.id + "' has no split assignment; run `provkit split` first");
    }
  }
  const TrainConfig& tcfg = task == Task::detect ? cfg.detect_train : cfg.pr_train;
  write_provenance(model_path, "train", cfg);

  const std::size_t dim = f.embeddings.empty() ? cfg.featurizer.dim : embedding_dim(f.embeddings);
  const FeaturizedSet data = load_features(set, cfg, f.embeddings, dim);
  Batch train_set, val_set;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const Sample& s = data.samples[i];
    double y;
    if (task == Task::detect) {
      if (s.group == kGroupPolished && s.pr_label && *s.pr_label < f.min_polished_pr) continue;
      y = s.detect_label;
    } else {
      if (!s.pr_label) continue;
      y = *s.pr_label;
    }
    Batch* dest = *s.split == Split::train ? &train_set : (*s.split == Split::val ? &val_set : nullptr);
    if (dest == nullptr) continue;
    dest->x.push_back(data.features[i]);
    dest->y.push_back(y);
  }
  const TrainResult result = train(task, train_set, val_set, tcfg);

  ModelArtifact artifact;
  artifact.head = result.best_head;
  if (f.embeddings.empty()) {
    artifact.featurizer = cfg.featurizer;
    artifact.featurizer_hash = cfg.featurizer.fingerprint();
  } else {
    artifact.featurizer_hash = external_featurizer_hash(dim);
  }
  artifact.train_config = tcfg;
  artifact.selection_metric = tcfg.selection_metric;
  artifact.selection_value = result.history.best_value;
  save_model(artifact, model_path);
  write_text(history_path, to_json(result.history).dump(2) + "\n");
  out << fmt::format("trained {} head on {} samples (val {}): best {} = {:.6f} at epoch {}\n", to_string(task),
                     train_set.size(), val_set.size(), to_string(tcfg.selection_metric), result.history.best_value,
                     result.history.best_epoch);
  return kExitOk;
}

struct LoadedModels {
  std::optional<ModelArtifact> detect;
  std::optional<ModelArtifact> pr;
};

LoadedModels load_models(const Flags& f, const RunConfig& cfg, std::optional<std::size_t> embedding_dim_) {
  if (f.models.empty()) throw ValidationError("missing required flag --model");
  LoadedModels m;
  const std::string expected =
      embedding_dim_ ? external_featurizer_hash(*embedding_dim_) : cfg.featurizer.fingerprint();
  for (const auto& path : f.models) {
    ModelArtifact a = load_model(path, expected);
    auto& slot = a.head.task() == Task::detect ? m.detect : m.pr;
    if (slot) throw ValidationError("two models given for task " + std::string(to_string(a.head.task())));
    slot = std::move(a);
  }
  return m;
}

int cmd_score(const Flags& f, std::ostream& out) {
  const RunConfig cfg = resolve_config(f);
  const LoadedModels models = load_models(f, cfg, std::nullopt);
  const auto texts = read_texts(f);
  if (!f.out.empty()) write_provenance(f.out, "score", cfg);
  std::string lines;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const FeatureVector x = featurize(texts[i], cfg.featurizer);
    json row = {{"index", i}, {"detect_prob", nullptr}, {"pr_estimate", nullptr}, {"pr_category", nullptr}};
    if (models.detect) row["detect_prob"] = models.detect->head.forward(x);
    if (models.pr) {
      const double pr = models.pr->head.forward(x);
      row["pr_estimate"] = pr;
      row["pr_category"] = to_string(interpret_pr(pr, cfg.thresholds));
    }
    lines += row.dump() + "\n";
  }
  emit(f, out, lines);
  return kExitOk;
}

int cmd_gltr(const Flags& f, std::ostream& out) {
  const RunConfig cfg = resolve_config(f);
  json report = {{"documents", json::array()}};
  std::vector<std::vector<TokenStats>> docs;

  if (f.backend == "import") {
    docs.push_back(import_token_stats(require(f.stats, "--stats")));
    report["backend"] = {{"backend", "import"}, {"source", f.stats}, {"entropy_base", "e"}};
  } else {
    std::unique_ptr<LMBackend> lm;
    if (f.backend == "ngram") {
      std::vector<TokenSeq> corpus;
      if (!f.lm_corpus.empty()) {
        std::ifstream in(f.lm_corpus);
        if (!in) throw ValidationError("cannot open " + f.lm_corpus);
        std::string line;
        while (std::getline(in, line)) corpus.push_back(tokenize(line, cfg.mode));
      } else {
        for (const auto& r : ingest(require(f.dataset, "--dataset or --lm-corpus")).records) {
          corpus.push_back(tokenize(r.original, r.lang_mode));
        }
      }
      lm = train_ngram_lm(corpus, cfg.lm_order, cfg.lm_add_k);
    } else {
      throw ValidationError("unknown backend '" + f.backend + "' (expected ngram|import)");
    }
    report["backend"] = lm->metadata();
    for (const auto& text : read_texts(f)) docs.push_back(token_stats(*lm, tokenize(text, cfg.mode)));
  }

  std::string rendering;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    json tokens = json::array();
    for (const auto& s : docs[d]) tokens.push_back(to_json(s));
    report["documents"].push_back({{"index", d}, {"tokens", tokens}, {"histogram", to_json(bucket_histogram(docs[d]))}});
    if (f.render) {
      for (std::size_t k = 0; k < docs[d].size(); ++k) {
        rendering += fmt::format("{}[{}]{}", k ? " " : "", bucket_marker(docs[d][k].rank), docs[d][k].token);
      }
      rendering += "\n";
    }
  }
  if (!f.out.empty()) write_provenance(f.out, "gltr", cfg);
  emit(f, out, report.dump(2) + "\n");
  if (f.render) {
    out << "# markers: G rank<=10, Y rank<=100, R rank<=1000, P rest\n" << rendering;
  }
  return kExitOk;
}

int cmd_eval(const Flags& f, std::ostream& out) {
  const RunConfig cfg = resolve_config(f);
  const fs::path report_path = require(f.out, "--out");
  std::optional<std::size_t> edim;
  if (!f.embeddings.empty()) edim = embedding_dim(f.embeddings);
  const LoadedModels models = load_models(f, cfg, edim);
  const RecordSet set = ingest(require(f.dataset, "--dataset"));
  std::optional<Split> wanted;
  if (f.split_name != "all") wanted = split_from_string(f.split_name);
  write_provenance(report_path, "eval", cfg);

  const FeaturizedSet data = load_features(set, cfg, f.embeddings, edim.value_or(cfg.featurizer.dim));
  EvalReport report;
  std::vector<int> truth, pred;
  std::vector<double> det_scores, pr_pred, pr_truth;
  std::map<std::string, std::vector<double>> groups;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const Sample& s = data.samples[i];
    if (wanted && s.split != wanted) continue;
    ++report.samples;
    std::optional<int> det_pred;
    if (models.detect) {
      const double p = models.detect->head.forward(data.features[i]);
      det_scores.push_back(p);
      truth.push_back(s.detect_label);
      det_pred = p >= 0.5 ? 1 : 0;
      pred.push_back(*det_pred);
    }
    if (models.pr) {
      const double pr = models.pr->head.forward(data.features[i]);
      groups[s.group].push_back(pr);
      if (det_pred && *det_pred != s.detect_label) groups["misclassified_" + s.group].push_back(pr);
      if (s.pr_label) {
        pr_pred.push_back(pr);
        pr_truth.push_back(*s.pr_label);
      }
    }
  }
  if (report.samples == 0) throw ValidationError("no samples in split '" + f.split_name + "'");
  if (!truth.empty()) {
    report.accuracy = accuracy(pred, truth);
    report.per_class = precision_recall(pred, truth);
    const bool both = std::find(truth.begin(), truth.end(), 0) != truth.end() &&
                      std::find(truth.begin(), truth.end(), 1) != truth.end();
    if (both) report.auroc = auroc(det_scores, truth);
  }
  if (!pr_pred.empty()) report.mae = mae(pr_pred, pr_truth);
  report.distribution = distribution_summary(groups);

  json doc = to_json(report);
  doc["split"] = f.split_name;
  json cats = json::object();
  for (const auto& [name, values] : groups) {
    std::map<std::string, std::size_t> c;
    for (double v : values) c[std::string(to_string(interpret_pr(v, cfg.thresholds)))]++;
    cats[name] = c;
  }
  doc["pr_categories"] = cats;
  write_text(report_path, doc.dump(2) + "\n");
  write_text(f.csv.empty() ? sibling(report_path, ".distribution.csv") : fs::path(f.csv),
             distribution_csv(report.distribution));
  out << fmt::format("evaluated {} samples from split {}", report.samples, f.split_name);
  if (report.accuracy) out << fmt::format("; accuracy {:.4f}", *report.accuracy);
  if (report.auroc) out << fmt::format("; auroc {:.4f}", *report.auroc);
  if (report.mae) out << fmt::format("; mae {:.4f}", *report.mae);
  out << "\n";
  return kExitOk;
}

int cmd_diff(const Flags& f, std::ostream& out) {
  const RunConfig cfg = resolve_config(f);
  const std::string original = f.original_file.empty() ? f.original : read_whole(f.original_file);
  const std::string polished = f.polished_file.empty() ? f.polished : read_whole(f.polished_file);
  const DiffResult d = highlight_diff(original, polished, cfg.mode);
  std::string body;
  if (f.format == "html") {
    body = render_diff_html(d) + "\n" +
           fmt::format("<p>PR (normalized Levenshtein): {:.4f}; Jaccard distance: {:.4f}; edited tokens: {}</p>\n",
                       d.levenshtein_norm, d.jaccard, d.edited_count);
  } else if (f.format == "text") {
    body = render_diff_text(d) + "\n" +
           fmt::format("PR (normalized Levenshtein): {:.4f}\nJaccard distance: {:.4f}\nedited tokens: {}\n",
                       d.levenshtein_norm, d.jaccard, d.edited_count);
  } else {
    throw ValidationError("unknown diff format '" + f.format + "' (expected text|html)");
  }
  if (!f.out.empty()) write_provenance(f.out, "diff", cfg);
  emit(f, out, body);
  return kExitOk;
}

std::vector<double> parse_rates(const std::string& text) {
  std::vector<double> rates;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    try {
      std::size_t used = 0;
      rates.push_back(std::stod(piece, &used));
      if (used != piece.size()) throw std::invalid_argument(piece);
    } catch (const std::logic_error&) {
      throw ValidationError("bad rate '" + piece + "' in --rates");
    }
  }
  return rates;
}

int cmd_synth(const Flags& f, std::ostream& out) {
  const RunConfig cfg = resolve_config(f);
  const fs::path dest = require(f.out, "--out");
  SynthParams p;
  p.pairs = f.pairs;
  p.rates = parse_rates(f.rates);
  p.seed = cfg.seed;
  p.min_len = f.min_len;
  p.max_len = f.max_len;
  p.generated = f.generated;
  write_provenance(dest, "synth", cfg);
  const RecordSet set = synthesize(p);
  write_jsonl(set, dest);
  print_counts(out, set);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"provkit: label, detect and explain LLM involvement in text"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "global seed");
    sub->add_option("--out", f.out, "output path");
    return sub;
  };
  auto dataset = [&](CLI::App* sub) { return sub->add_option("--dataset", f.dataset, "JSONL record file"); };
  auto texts = [&](CLI::App* sub) {
    sub->add_option("--input", f.input, "text file, one document per line");
    sub->add_option("--text", f.texts, "document text (repeatable)");
  };
  auto train_flags = [&](CLI::App* sub) {
    sub->add_option("--loss", f.loss, "PR loss: mse|l1|smooth_l1");
    sub->add_option("--smooth-l1-mode", f.smooth_l1_mode, "standard|paper-literal");
    sub->add_option("--beta", f.beta, "smooth-L1 threshold");
    sub->add_option("--epochs", f.epochs);
    sub->add_option("--lr", f.lr, "learning rate");
    sub->add_option("--batch-size", f.batch_size);
    sub->add_option("--hidden", f.hidden, "hidden units");
  };

  auto* ingest_cmd = common(app.add_subcommand("ingest", "validate a dataset and print counts"));
  dataset(ingest_cmd);

  auto* polish_cmd = common(app.add_subcommand("polish", "fill polished text through an LLM endpoint"));
  dataset(polish_cmd);
  polish_cmd->add_option("--endpoint", f.endpoint, "chat-completion URL");
  polish_cmd->add_option("--llm-model", f.llm_model, "model name sent to the endpoint");
  polish_cmd->add_option("--cache-dir", f.cache_dir);
  polish_cmd->add_option("--api-key-env", f.api_key_env, "environment variable holding the API key");
  polish_cmd->add_option("--max-in-flight", f.max_in_flight);
  polish_cmd->add_option("--prompt-preset", f.prompt_preset, "en|zh");

  auto* label_cmd = common(app.add_subcommand("label", "compute Polish Ratio labels"));
  dataset(label_cmd);

  auto* split_cmd = common(app.add_subcommand("split", "assign train/test/val splits"));
  dataset(split_cmd);
  split_cmd->add_option("--ratios", f.ratios, "train:test:val, e.g. 6:3:1");

  auto* train_cmd = common(app.add_subcommand("train", "train a detector or PR regressor"));
  dataset(train_cmd);
  train_cmd->add_option("--task", f.task, "detect|pr")->required();
  train_cmd->add_option("--history", f.history, "history JSON path");
  train_cmd->add_option("--embeddings", f.embeddings, "JSONL of {id, vector} to use instead of hashing");
  train_cmd->add_option("--pr-target", f.pr_target, "levenshtein_norm|jaccard");
  train_cmd->add_option("--min-polished-pr", f.min_polished_pr, "detector: drop polished samples below this PR");
  train_flags(train_cmd);

  auto* score_cmd = common(app.add_subcommand("score", "score texts with trained models"));
  score_cmd->add_option("--model", f.models, "model file (repeatable: detector and/or PR)");
  score_cmd->add_option("--thresholds", f.thresholds, "PR category thresholds, e.g. 0.2,0.6");
  texts(score_cmd);

  auto* gltr_cmd = common(app.add_subcommand("gltr", "per-token probability/rank/entropy report"));
  dataset(gltr_cmd);
  gltr_cmd->add_option("--backend", f.backend, "ngram|import");
  gltr_cmd->add_option("--lm-corpus", f.lm_corpus, "text file used to train the n-gram model");
  gltr_cmd->add_option("--stats", f.stats, "token stats JSONL for --backend import");
  gltr_cmd->add_option("--order", f.order);
  gltr_cmd->add_option("--add-k", f.add_k);
  gltr_cmd->add_option("--mode", f.mode, "word|char");
  gltr_cmd->add_flag("--render", f.render, "also print tokens with rank-bucket markers");
  texts(gltr_cmd);

  auto* eval_cmd = common(app.add_subcommand("eval", "evaluate models on a labelled dataset"));
  dataset(eval_cmd);
  eval_cmd->add_option("--model", f.models, "model file (repeatable)");
  eval_cmd->add_option("--split", f.split_name, "train|val|test|all");
  eval_cmd->add_option("--csv", f.csv, "distribution CSV path");
  eval_cmd->add_option("--embeddings", f.embeddings);
  eval_cmd->add_option("--pr-target", f.pr_target);
  eval_cmd->add_option("--thresholds", f.thresholds);

  auto* diff_cmd = common(app.add_subcommand("diff", "highlight edits between an original and its polished text"));
  diff_cmd->add_option("--original", f.original);
  diff_cmd->add_option("--polished", f.polished);
  diff_cmd->add_option("--original-file", f.original_file);
  diff_cmd->add_option("--polished-file", f.polished_file);
  diff_cmd->add_option("--format", f.format, "text|html");
  diff_cmd->add_option("--mode", f.mode, "word|char");

  auto* synth_cmd = common(app.add_subcommand("synth", "generate a synthetic labelled corpus"));
  synth_cmd->add_option("--pairs", f.pairs);
  synth_cmd->add_option("--rates", f.rates, "comma-separated substitution rates");
  synth_cmd->add_option("--min-len", f.min_len);
  synth_cmd->add_option("--max-len", f.max_len);
  synth_cmd->add_option("--generated", f.generated, "number of fully generated records");

  for (auto* sub : {label_cmd, split_cmd}) sub->add_option("--mode", f.mode, "word|char");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest_cmd) return cmd_ingest(f, out);
    if (*polish_cmd) return cmd_polish(f, out);
    if (*label_cmd) return cmd_label(f, out);
    if (*split_cmd) return cmd_split(f, out);
    if (*train_cmd) return cmd_train(f, out);
    if (*score_cmd) return cmd_score(f, out);
    if (*gltr_cmd) return cmd_gltr(f, out);
    if (*eval_cmd) return cmd_eval(f, out);
    if (*diff_cmd) return cmd_diff(f, out);
    if (*synth_cmd) return cmd_synth(f, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace provkit
