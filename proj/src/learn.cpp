#include "provkit/learn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "provkit/errors.hpp"
#include "provkit/json_io.hpp"

namespace provkit {

using nlohmann::json;

std::string_view to_string(Task t) { return t == Task::detect ? "detect" : "pr_regress"; }

std::string_view to_string(LossKind k) {
  switch (k) {
    case LossKind::l1: return "l1";
    case LossKind::smooth_l1: return "smooth_l1";
    case LossKind::mse: return "mse";
    case LossKind::bce: return "bce";
  }
  return "?";
}

std::string_view to_string(SmoothL1Mode m) { return m == SmoothL1Mode::standard ? "standard" : "paper_literal"; }

std::string_view to_string(SelectionMetric m) {
  return m == SelectionMetric::val_accuracy ? "val_accuracy" : "val_mae";
}

Task task_from_string(std::string_view s) {
  if (s == "detect") return Task::detect;
  if (s == "pr" || s == "pr_regress") return Task::pr_regress;
  throw ValidationError("unknown task '" + std::string(s) + "' (expected detect|pr)");
}

LossKind loss_from_string(std::string_view s) {
  if (s == "l1") return LossKind::l1;
  if (s == "smooth_l1") return LossKind::smooth_l1;
  if (s == "mse") return LossKind::mse;
  if (s == "bce") return LossKind::bce;
  throw ValidationError("unknown loss '" + std::string(s) + "' (expected mse|l1|smooth_l1|bce)");
}

SmoothL1Mode smooth_l1_mode_from_string(std::string_view s) {
  if (s == "standard") return SmoothL1Mode::standard;
  if (s == "paper-literal" || s == "paper_literal") return SmoothL1Mode::paper_literal;
  throw ValidationError("unknown smooth-l1 mode '" + std::string(s) + "' (expected standard|paper-literal)");
}

SelectionMetric selection_metric_from_string(std::string_view s) {
  if (s == "val_accuracy") return SelectionMetric::val_accuracy;
  if (s == "val_mae") return SelectionMetric::val_mae;
  throw ValidationError("unknown selection metric '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// MLPHead

MLPHead::MLPHead(std::size_t input_dim, std::size_t hidden, Task task)
    : input_dim_(input_dim), hidden_(hidden), task_(task), params_(hidden * (input_dim + 2) + 1, 0.0) {
  if (input_dim == 0 || hidden == 0) throw std::invalid_argument("MLPHead dimensions must be positive");
}

MLPHead MLPHead::random(std::size_t input_dim, std::size_t hidden, Task task, Rng& rng) {
  MLPHead head(input_dim, hidden, task);
  const double a1 = std::sqrt(6.0 / static_cast<double>(input_dim + hidden));
  const double a2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  auto p = head.params();
  const std::size_t n_w1 = hidden * input_dim;
  for (std::size_t i = 0; i < n_w1; ++i) p[i] = rng.uniform(-a1, a1);
  for (std::size_t j = 0; j < hidden; ++j) p[n_w1 + hidden + j] = rng.uniform(-a2, a2);
  return head;
}

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void check_dim(const MLPHead& head, std::size_t dim) {
  if (dim != head.input_dim()) {
    throw std::invalid_argument(fmt::format("feature dimension {} does not match head input {}", dim,
                                            head.input_dim()));
  }
}

// Hidden activations for x, written into h; returns the logit.
double forward_hidden(const MLPHead& head, std::span<const double> x, std::vector<double>& h) {
  const std::size_t d = head.input_dim();
  const std::size_t hid = head.hidden();
  const double* w1 = head.w1().data();
  const auto b1 = head.b1();
  const auto w2 = head.w2();
  h.resize(hid);
  double z = head.b2();
  for (std::size_t j = 0; j < hid; ++j) {
    const double* row = w1 + j * d;
    double a = b1[j];
    for (std::size_t k = 0; k < d; ++k) a += row[k] * x[k];
    h[j] = std::tanh(a);
    z += w2[j] * h[j];
  }
  return z;
}

double sample_loss_from_logit(const LossSpec& spec, double y, double z) {
  if (spec.kind == LossKind::bce) return softplus(z) - y * z;
  return loss(spec, y, sigmoid(z));
}

// dL/dz for one sample.
double dloss_dlogit(const LossSpec& spec, double y, double z) {
  const double p = sigmoid(z);
  if (spec.kind == LossKind::bce) return p - y;
  const double e = p - y;
  const double sgn = e > 0 ? 1.0 : (e < 0 ? -1.0 : 0.0);
  double dp = 0.0;
  switch (spec.kind) {
    case LossKind::l1: dp = sgn; break;
    case LossKind::mse: dp = 2.0 * e; break;
    case LossKind::smooth_l1:
      if (std::fabs(e) < spec.beta) {
        dp = spec.mode == SmoothL1Mode::standard ? e / spec.beta : e;
      } else {
        dp = sgn;
      }
      break;
    case LossKind::bce: break;
  }
  return dp * p * (1.0 - p);
}

// Adds scale * d(loss)/d(params) for one sample into grad; returns the loss.
double accumulate_sample(const MLPHead& head, std::span<const double> x, double y, const LossSpec& spec,
                         double scale, std::vector<double>& h, std::span<double> grad) {
  const double z = forward_hidden(head, x, h);
  const double l = sample_loss_from_logit(spec, y, z);
  const double dz = dloss_dlogit(spec, y, z) * scale;
  const std::size_t d = head.input_dim();
  const std::size_t hid = head.hidden();
  const std::size_t off_b1 = hid * d;
  const std::size_t off_w2 = off_b1 + hid;
  const auto w2 = head.w2();
  grad.back() += dz;
  for (std::size_t j = 0; j < hid; ++j) {
    grad[off_w2 + j] += dz * h[j];
    const double dh = dz * w2[j] * (1.0 - h[j] * h[j]);
    if (dh == 0.0) continue;
    grad[off_b1 + j] += dh;
    double* row = grad.data() + j * d;
    for (std::size_t k = 0; k < d; ++k) row[k] += dh * x[k];
  }
  return l;
}

}  // namespace

double MLPHead::logit(std::span<const double> x) const {
  check_dim(*this, x.size());
  std::vector<double> h;
  return forward_hidden(*this, x, h);
}

double MLPHead::forward(std::span<const double> x) const { return sigmoid(logit(x)); }

// ---------------------------------------------------------------------------
// Losses and gradients

double loss(LossKind kind, double y, double y_hat, double beta, SmoothL1Mode mode) {
  const double e = y - y_hat;
  const double ae = std::fabs(e);
  switch (kind) {
    case LossKind::l1: return ae;
    case LossKind::mse: return e * e;
    case LossKind::smooth_l1:
      if (ae < beta) return mode == SmoothL1Mode::standard ? 0.5 * e * e / beta : 0.5 * e * e;
      return ae - 0.5 * beta;
    case LossKind::bce: {
      constexpr double eps = 1e-15;
      const double p = std::clamp(y_hat, eps, 1.0 - eps);
      return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    }
  }
  return 0.0;
}

double batch_loss(const MLPHead& head, const Batch& batch, const LossSpec& spec) {
  if (batch.empty()) throw std::invalid_argument("batch_loss on an empty batch");
  std::vector<double> h;
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    check_dim(head, batch.x[i].dim());
    total += sample_loss_from_logit(spec, batch.y[i], forward_hidden(head, batch.x[i].values, h));
  }
  return total / static_cast<double>(batch.size());
}

std::vector<double> batch_gradient(const MLPHead& head, const Batch& batch, const LossSpec& spec) {
  if (batch.empty()) throw std::invalid_argument("batch_gradient on an empty batch");
  std::vector<double> grad(head.num_params(), 0.0);
  std::vector<double> h;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    check_dim(head, batch.x[i].dim());
    accumulate_sample(head, batch.x[i].values, batch.y[i], spec, scale, h, grad);
  }
  return grad;
}

double grad_check(const MLPHead& head, const Batch& batch, const LossSpec& spec) {
  constexpr double step = 1e-5;
  const auto analytic = batch_gradient(head, batch, spec);
  MLPHead probe = head;
  auto p = probe.params();
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double orig = p[i];
    p[i] = orig + step;
    const double up = batch_loss(probe, batch, spec);
    p[i] = orig - step;
    const double down = batch_loss(probe, batch, spec);
    p[i] = orig;
    const double numeric = (up - down) / (2.0 * step);
    const double scale = std::max(std::fabs(analytic[i]), std::fabs(numeric));
    if (scale < 1e-10) continue;
    worst = std::max(worst, std::fabs(analytic[i] - numeric) / scale);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Training

TrainConfig TrainConfig::defaults(Task task) {
  TrainConfig cfg;
  if (task == Task::detect) {
    cfg.batch_size = 16;
    cfg.max_epochs = 10;
    cfg.loss = LossKind::bce;
    cfg.selection_metric = SelectionMetric::val_accuracy;
  } else {
    cfg.batch_size = 4;
    cfg.max_epochs = 15;
    cfg.loss = LossKind::mse;
    cfg.selection_metric = SelectionMetric::val_mae;
  }
  cfg.learning_rate = 0.05;
  return cfg;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ValidationError("learning_rate must be > 0");
  if (max_epochs < 1) throw ValidationError("max_epochs must be >= 1");
  if (!(beta > 0.0)) throw ValidationError("beta must be > 0");
  if (hidden < 1) throw ValidationError("hidden must be >= 1");
}

json to_json(const TrainConfig& cfg) {
  return {{"batch_size", cfg.batch_size},
          {"learning_rate", cfg.learning_rate},
          {"max_epochs", cfg.max_epochs},
          {"seed", cfg.seed},
          {"loss", to_string(cfg.loss)},
          {"beta", cfg.beta},
          {"smooth_l1_mode", to_string(cfg.smooth_l1_mode)},
          {"selection_metric", to_string(cfg.selection_metric)},
          {"hidden", cfg.hidden}};
}

TrainConfig train_config_from_json(const json& j, Task task) {
  TrainConfig cfg = TrainConfig::defaults(task);
  if (!j.is_object()) throw ValidationError("train config must be an object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "batch_size") {
        cfg.batch_size = value.get<std::size_t>();
      } else if (key == "learning_rate") {
        cfg.learning_rate = value.get<double>();
      } else if (key == "max_epochs") {
        cfg.max_epochs = value.get<std::size_t>();
      } else if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
      } else if (key == "loss") {
        cfg.loss = loss_from_string(value.get<std::string>());
      } else if (key == "beta") {
        cfg.beta = value.get<double>();
      } else if (key == "smooth_l1_mode") {
        cfg.smooth_l1_mode = smooth_l1_mode_from_string(value.get<std::string>());
      } else if (key == "selection_metric") {
        cfg.selection_metric = selection_metric_from_string(value.get<std::string>());
      } else if (key == "hidden") {
        cfg.hidden = value.get<std::size_t>();
      } else {
        throw ValidationError("unknown train option '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad train config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json to_json(const TrainHistory& h) {
  json epochs = json::array();
  for (const auto& e : h.epochs) {
    epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_metric", e.val_metric}});
  }
  return {{"selection_metric", to_string(h.metric)},
          {"epochs", epochs},
          {"best_epoch", h.best_epoch},
          {"best_value", h.best_value}};
}

double evaluate_metric(const MLPHead& head, const Batch& data, SelectionMetric metric) {
  if (data.empty()) throw std::invalid_argument("evaluate_metric on an empty set");
  std::vector<double> h;
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    check_dim(head, data.x[i].dim());
    const double p = sigmoid(forward_hidden(head, data.x[i].values, h));
    if (metric == SelectionMetric::val_accuracy) {
      acc += (p >= 0.5) == (data.y[i] >= 0.5) ? 1.0 : 0.0;
    } else {
      acc += std::fabs(p - data.y[i]);
    }
  }
  return acc / static_cast<double>(data.size());
}

namespace {

void check_labels(const Batch& b, Task task, const char* name) {
  if (b.empty()) throw ValidationError(std::string(name) + " split is empty");
  if (b.x.size() != b.y.size()) throw std::invalid_argument("batch has mismatched x/y sizes");
  for (double y : b.y) {
    if (!(y >= 0.0 && y <= 1.0)) throw ValidationError(fmt::format("{} label {} outside [0,1]", name, y));
    if (task == Task::detect && y != 0.0 && y != 1.0) {
      throw ValidationError(fmt::format("{} label {} is not binary", name, y));
    }
  }
}

}  // namespace

TrainResult train(MLPHead head, const Batch& train_set, const Batch& val_set, const TrainConfig& cfg) {
  cfg.validate();
  check_labels(train_set, head.task(), "train");
  check_labels(val_set, head.task(), "val");
  const LossSpec spec = cfg.loss_spec();

  Rng shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad(head.num_params());
  std::vector<double> h;

  TrainResult result{head, {}};
  result.history.metric = cfg.selection_metric;
  const bool higher_is_better = cfg.selection_metric == SelectionMetric::val_accuracy;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0, batch_no = 0; start < order.size(); start += cfg.batch_size, ++batch_no) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t s = order[i];
        check_dim(head, train_set.x[s].dim());
        const double l = accumulate_sample(head, train_set.x[s].values, train_set.y[s], spec, scale, h, grad);
        if (!std::isfinite(l)) {
          throw std::runtime_error(fmt::format("non-finite loss at epoch {}, batch {} (sample {}); "
                                               "try a smaller learning rate",
                                               epoch, batch_no, s));
        }
        epoch_loss += l;
      }
      auto p = head.params();
      for (std::size_t k = 0; k < p.size(); ++k) p[k] -= cfg.learning_rate * grad[k];
    }
    EpochRecord rec{epoch, epoch_loss / static_cast<double>(order.size()),
                    evaluate_metric(head, val_set, cfg.selection_metric)};
    result.history.epochs.push_back(rec);
    const bool better = epoch == 1 || (higher_is_better ? rec.val_metric > result.history.best_value
                                                        : rec.val_metric < result.history.best_value);
    if (better) {
      result.history.best_epoch = epoch;
      result.history.best_value = rec.val_metric;
      result.best_head = head;
    }
  }
  return result;
}

TrainResult train(Task task, const Batch& train_set, const Batch& val_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.empty()) throw ValidationError("train split is empty");
  Rng init_rng(cfg.seed);
  return train(MLPHead::random(train_set.x.front().dim(), cfg.hidden, task, init_rng), train_set, val_set, cfg);
}

// ---------------------------------------------------------------------------
// Model artifacts

std::string external_featurizer_hash(std::size_t dim) { return fmt::format("external-embeddings/dim={}", dim); }

json to_json(const ModelArtifact& m) {
  const auto& head = m.head;
  auto to_array = [](std::span<const double> s) { return json(std::vector<double>(s.begin(), s.end())); };
  return {{"format", "provkit-mlp-head"},
          {"format_version", kModelFormatVersion},
          {"task", to_string(head.task())},
          {"dims", {head.input_dim(), head.hidden(), 1}},
          {"activations", {"tanh", "sigmoid"}},
          {"featurizer", m.featurizer ? to_json(*m.featurizer) : json(nullptr)},
          {"featurizer_hash", m.featurizer_hash},
          {"train_config", to_json(m.train_config)},
          {"selection_metric", {{"name", to_string(m.selection_metric)}, {"value", m.selection_value}}},
          {"parameters",
           {{"w1", to_array(head.w1())}, {"b1", to_array(head.b1())}, {"w2", to_array(head.w2())},
            {"b2", head.b2()}}}};
}

ModelArtifact model_from_json(const json& j) {
  try {
    if (j.value("format", "") != "provkit-mlp-head") throw ValidationError("not a provkit model file");
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      throw ValidationError("unsupported model format version " + j.at("format_version").dump());
    }
    const auto dims = j.at("dims").get<std::vector<std::size_t>>();
    if (dims.size() != 3 || dims[2] != 1) throw ValidationError("model dims must be [D, H, 1]");
    if (j.at("activations") != json({"tanh", "sigmoid"})) throw ValidationError("unsupported activations");
    ModelArtifact m;
    const Task task = task_from_string(j.at("task").get<std::string>());
    m.head = MLPHead(dims[0], dims[1], task);
    const auto& params = j.at("parameters");
    const auto w1 = params.at("w1").get<std::vector<double>>();
    const auto b1 = params.at("b1").get<std::vector<double>>();
    const auto w2 = params.at("w2").get<std::vector<double>>();
    if (w1.size() != dims[0] * dims[1] || b1.size() != dims[1] || w2.size() != dims[1]) {
      throw ValidationError("parameter arrays do not match dims");
    }
    auto p = m.head.params();
    std::copy(w1.begin(), w1.end(), p.begin());
    std::copy(b1.begin(), b1.end(), p.begin() + static_cast<std::ptrdiff_t>(w1.size()));
    std::copy(w2.begin(), w2.end(), p.begin() + static_cast<std::ptrdiff_t>(w1.size() + b1.size()));
    m.head.b2() = params.at("b2").get<double>();
    for (double v : m.head.params()) {
      if (!std::isfinite(v)) throw ValidationError("model contains non-finite parameters");
    }
    if (!j.at("featurizer").is_null()) m.featurizer = featurizer_config_from_json(j.at("featurizer"));
    m.featurizer_hash = j.at("featurizer_hash").get<std::string>();
    const std::string derived = m.featurizer ? m.featurizer->fingerprint() : external_featurizer_hash(dims[0]);
    if (derived != m.featurizer_hash) throw ValidationError("featurizer_hash does not match featurizer config");
    if (m.featurizer && m.featurizer->dim != dims[0]) throw ValidationError("featurizer dim does not match model");
    m.train_config = train_config_from_json(j.at("train_config"), task);
    m.selection_metric = selection_metric_from_string(j.at("selection_metric").at("name").get<std::string>());
    m.selection_value = j.at("selection_metric").at("value").get<double>();
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const ModelArtifact& m, const std::filesystem::path& path) {
  write_file_atomic(path, to_json(m).dump(1) + "\n");
}

ModelArtifact load_model(const std::filesystem::path& path, std::optional<std::string_view> expected_hash) {
  ModelArtifact m = model_from_json(read_json_file(path));
  if (expected_hash && *expected_hash != m.featurizer_hash) {
    throw ValidationError(fmt::format("{}: model was trained with featurizer {} but {} is in use", path.string(),
                                      m.featurizer_hash, *expected_hash));
  }
  return m;
}

}  // namespace provkit
