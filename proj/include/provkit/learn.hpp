#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "provkit/feature_vector.hpp"
#include "provkit/features.hpp"
#include "provkit/rng.hpp"

namespace provkit {

enum class Task { detect, pr_regress };
enum class LossKind { l1, smooth_l1, mse, bce };
enum class SmoothL1Mode { paper_literal, standard };
enum class SelectionMetric { val_accuracy, val_mae };

std::string_view to_string(Task t);
std::string_view to_string(LossKind k);
std::string_view to_string(SmoothL1Mode m);
std::string_view to_string(SelectionMetric m);
Task task_from_string(std::string_view s);
LossKind loss_from_string(std::string_view s);
SmoothL1Mode smooth_l1_mode_from_string(std::string_view s);
SelectionMetric selection_metric_from_string(std::string_view s);

// One-hidden-layer perceptron: sigmoid(w2 . tanh(W1 x + b1) + b2).
class MLPHead {
 public:
  MLPHead() = default;
  MLPHead(std::size_t input_dim, std::size_t hidden, Task task);

  // Xavier-uniform weights, zero biases.
  static MLPHead random(std::size_t input_dim, std::size_t hidden, Task task, Rng& rng);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden() const { return hidden_; }
  Task task() const { return task_; }

  // Pre-sigmoid output.
  double logit(std::span<const double> x) const;
  double forward(std::span<const double> x) const;
  double forward(const FeatureVector& x) const { return forward(std::span<const double>(x.values)); }

  // Row-major H x D, then b1 (H), w2 (H), b2 (1).
  std::size_t num_params() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  std::span<const double> w1() const { return {params_.data(), hidden_ * input_dim_}; }
  std::span<const double> b1() const { return {params_.data() + hidden_ * input_dim_, hidden_}; }
  std::span<const double> w2() const { return {params_.data() + hidden_ * (input_dim_ + 1), hidden_}; }
  double b2() const { return params_.back(); }
  double& b2() { return params_.back(); }

  bool operator==(const MLPHead&) const = default;

 private:
  std::size_t input_dim_ = 0;
  std::size_t hidden_ = 0;
  Task task_ = Task::detect;
  std::vector<double> params_;
};

struct LossSpec {
  LossKind kind = LossKind::mse;
  double beta = 0.1;
  SmoothL1Mode mode = SmoothL1Mode::standard;
};

/// Per-sample loss between target y and prediction y_hat (a probability).
/// smooth_l1 in paper_literal mode uses 0.5 e^2 below beta, standard mode
/// uses 0.5 e^2 / beta; both use |e| - 0.5 beta above it.
double loss(LossKind kind, double y, double y_hat, double beta = 0.1, SmoothL1Mode mode = SmoothL1Mode::standard);
inline double loss(const LossSpec& spec, double y, double y_hat) {
  return loss(spec.kind, y, y_hat, spec.beta, spec.mode);
}

struct Batch {
  std::vector<FeatureVector> x;
  std::vector<double> y;

  std::size_t size() const { return y.size(); }
  bool empty() const { return y.empty(); }
};

// Mean loss over the batch.
double batch_loss(const MLPHead& head, const Batch& batch, const LossSpec& spec);

// Gradient of batch_loss with respect to head.params().
std::vector<double> batch_gradient(const MLPHead& head, const Batch& batch, const LossSpec& spec);

/// Compares batch_gradient against central differences (step 1e-5) on every
/// parameter and returns the largest |a - n| / max(|a|, |n|). Pairs where
/// both are below 1e-10 count as agreeing.
double grad_check(const MLPHead& head, const Batch& batch, const LossSpec& spec);

struct TrainConfig {
  std::size_t batch_size = 16;
  double learning_rate = 0.05;
  std::size_t max_epochs = 10;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::bce;
  double beta = 0.1;
  SmoothL1Mode smooth_l1_mode = SmoothL1Mode::standard;
  SelectionMetric selection_metric = SelectionMetric::val_accuracy;
  std::size_t hidden = 256;

  static TrainConfig defaults(Task task);
  void validate() const;
  LossSpec loss_spec() const { return {loss, beta, smooth_l1_mode}; }
};

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j, Task task);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_metric = 0.0;
};

struct TrainHistory {
  SelectionMetric metric = SelectionMetric::val_accuracy;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_value = 0.0;
};

nlohmann::json to_json(const TrainHistory& h);

struct TrainResult {
  MLPHead best_head;
  TrainHistory history;
};

// Validation metric of a head on a labelled set.
double evaluate_metric(const MLPHead& head, const Batch& data, SelectionMetric metric);

/// Seeded mini-batch SGD. The head is (re)initialized from cfg.seed when it
/// has no parameters; after every epoch the validation metric is computed and
/// the best snapshot kept (ties keep the earlier epoch).
TrainResult train(MLPHead head, const Batch& train_set, const Batch& val_set, const TrainConfig& cfg);

// Convenience overload that initializes a fresh head from cfg.
TrainResult train(Task task, const Batch& train_set, const Batch& val_set, const TrainConfig& cfg);

inline constexpr int kModelFormatVersion = 1;

struct ModelArtifact {
  MLPHead head;
  // Absent when the head was trained on imported embeddings.
  std::optional<FeaturizerConfig> featurizer;
  std::string featurizer_hash;
  TrainConfig train_config;
  SelectionMetric selection_metric = SelectionMetric::val_accuracy;
  double selection_value = 0.0;
};

std::string external_featurizer_hash(std::size_t dim);

nlohmann::json to_json(const ModelArtifact& m);
ModelArtifact model_from_json(const nlohmann::json& j);

void save_model(const ModelArtifact& m, const std::filesystem::path& path);

/// Loads a model file. When expected_featurizer_hash is given, a model built
/// for a different featurizer is rejected.
ModelArtifact load_model(const std::filesystem::path& path,
                         std::optional<std::string_view> expected_featurizer_hash = std::nullopt);

}  // namespace provkit
