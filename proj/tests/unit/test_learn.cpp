#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "provkit/errors.hpp"
#include "provkit/json_io.hpp"
#include "provkit/learn.hpp"
#include "provkit/rng.hpp"

using namespace provkit;
namespace fs = std::filesystem;

namespace {

FeatureVector random_vec(Rng& rng, std::size_t dim, double scale = 1.0) {
  FeatureVector v;
  for (std::size_t d = 0; d < dim; ++d) v.values.push_back(scale * rng.normal());
  return v;
}

// Two Gaussian blobs at +-mu with small noise.
void blobs(Rng& rng, std::size_t n, std::size_t dim, Batch& out) {
  FeatureVector mu = random_vec(rng, dim);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    FeatureVector x = random_vec(rng, dim, 0.1);
    for (std::size_t d = 0; d < dim; ++d) x.values[d] += (y ? 1.0 : -1.0) * mu.values[d];
    out.x.push_back(std::move(x));
    out.y.push_back(y);
  }
}

}  // namespace

TEST(Head, ZeroParamsGiveHalf) {
  MLPHead head(4, 3, Task::detect);
  EXPECT_EQ(head.forward(std::vector<double>{1, 2, 3, 4}), 0.5);
  EXPECT_EQ(head.num_params(), 4u * 3 + 3 + 3 + 1);
}

TEST(Head, BiasIsMonotone) {
  Rng rng(1);
  MLPHead head = MLPHead::random(5, 4, Task::pr_regress, rng);
  const auto x = random_vec(rng, 5);
  const double before = head.forward(x);
  head.b2() += 0.3;
  EXPECT_GT(head.forward(x), before);
}

TEST(Head, OutputInOpenUnitInterval) {
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    MLPHead head = MLPHead::random(6, 5, Task::detect, rng);
    for (auto& p : head.params()) p = 3.0 * rng.normal();
    const double y = head.forward(random_vec(rng, 6));
    EXPECT_GT(y, 0.0);
    EXPECT_LT(y, 1.0);
  }
}

TEST(Head, DimensionMismatch) {
  MLPHead head(4, 3, Task::detect);
  EXPECT_ANY_THROW(head.forward(std::vector<double>{1, 2}));
}

TEST(Loss, Examples) {
  EXPECT_NEAR(loss(LossKind::mse, 0.5, 0.3), 0.04, 1e-15);
  EXPECT_NEAR(loss(LossKind::smooth_l1, 0.0, 0.3, 0.1, SmoothL1Mode::paper_literal), 0.25, 1e-15);
  EXPECT_NEAR(loss(LossKind::smooth_l1, 0.0, 0.05, 0.1, SmoothL1Mode::standard), 0.0125, 1e-15);
  EXPECT_NEAR(loss(LossKind::l1, 0.2, 0.7), 0.5, 1e-15);
  EXPECT_NEAR(loss(LossKind::bce, 1.0, 0.25), -std::log(0.25), 1e-12);
}

TEST(Loss, ZeroAtTargetNonNegativeSymmetric) {
  Rng rng(3);
  for (LossKind k : {LossKind::l1, LossKind::smooth_l1, LossKind::mse}) {
    for (SmoothL1Mode m : {SmoothL1Mode::standard, SmoothL1Mode::paper_literal}) {
      for (int t = 0; t < 200; ++t) {
        const double y = rng.uniform(), e = rng.uniform(0.0, 0.5);
        EXPECT_EQ(loss(k, y, y, 0.1, m), 0.0);
        EXPECT_GE(loss(k, y, y + e, 0.1, m), 0.0);
        EXPECT_NEAR(loss(k, 0.5, 0.5 + e, 0.1, m), loss(k, 0.5, 0.5 - e, 0.1, m), 1e-15);
      }
    }
  }
}

TEST(Loss, SmoothL1Seam) {
  for (double beta : {0.05, 0.1, 0.5, 0.9}) {
    const double below = std::nextafter(beta, 0.0), above = std::nextafter(beta, 1.0);
    // Standard mode meets at 0.5 beta from both sides.
    EXPECT_NEAR(loss(LossKind::smooth_l1, 0.0, below, beta, SmoothL1Mode::standard), 0.5 * beta, 1e-12);
    EXPECT_NEAR(loss(LossKind::smooth_l1, 0.0, above, beta, SmoothL1Mode::standard), 0.5 * beta, 1e-12);
    // The literal variant jumps by 0.5 beta - 0.5 beta^2.
    const double jump = loss(LossKind::smooth_l1, 0.0, above, beta, SmoothL1Mode::paper_literal) -
                        loss(LossKind::smooth_l1, 0.0, below, beta, SmoothL1Mode::paper_literal);
    EXPECT_NEAR(jump, 0.5 * beta - 0.5 * beta * beta, 1e-12);
  }
}

TEST(Gradient, MatchesFiniteDifferences) {
  Rng rng(4);
  const std::vector<std::pair<Task, LossSpec>> cases = {
      {Task::pr_regress, {LossKind::mse}},
      {Task::pr_regress, {LossKind::l1}},
      {Task::pr_regress, {LossKind::smooth_l1, 0.1, SmoothL1Mode::standard}},
      {Task::pr_regress, {LossKind::smooth_l1, 0.1, SmoothL1Mode::paper_literal}},
      {Task::detect, {LossKind::bce}},
  };
  for (const auto& [task, spec] : cases) {
    for (int t = 0; t < 10; ++t) {
      MLPHead head = MLPHead::random(5, 4, task, rng);
      for (auto& p : head.params()) p += 0.1 * rng.normal();
      Batch b;
      while (b.size() < 5) {
        const auto x = random_vec(rng, 5);
        const double y = task == Task::detect ? static_cast<double>(rng.below(2)) : rng.uniform();
        const double e = std::abs(y - head.forward(x));
        if (e < 1e-3 || std::abs(e - spec.beta) < 1e-3) continue;
        b.x.push_back(x);
        b.y.push_back(y);
      }
      EXPECT_LT(grad_check(head, b, spec), 1e-4) << to_string(spec.kind);
    }
  }
}

TEST(Train, SeparableBlobs) {
  Rng rng(5);
  Batch tr, va;
  blobs(rng, 200, 16, tr);
  Rng rng_val(5);
  blobs(rng_val, 100, 16, va);  // same centres, fresh noise stream would follow
  TrainConfig cfg = TrainConfig::defaults(Task::detect);
  cfg.hidden = 16;
  cfg.seed = 3;
  const auto res = train(Task::detect, tr, va, cfg);
  EXPECT_LE(res.history.epochs.size(), 10u);
  EXPECT_GE(res.history.best_value, 0.99);
  EXPECT_GE(evaluate_metric(res.best_head, va, SelectionMetric::val_accuracy), 0.99);
}

TEST(Train, DeterministicHistory) {
  Rng rng(6);
  Batch tr, va;
  blobs(rng, 60, 8, tr);
  blobs(rng, 20, 8, va);
  TrainConfig cfg = TrainConfig::defaults(Task::detect);
  cfg.hidden = 8;
  cfg.seed = 17;
  const auto a = train(Task::detect, tr, va, cfg), b = train(Task::detect, tr, va, cfg);
  EXPECT_EQ(to_json(a.history).dump(), to_json(b.history).dump());
  EXPECT_EQ(a.best_head, b.best_head);
  cfg.seed = 18;
  EXPECT_NE(train(Task::detect, tr, va, cfg).best_head, a.best_head);
}

TEST(Train, BestValueBoundsEveryEpoch) {
  Rng rng(7);
  Batch tr, va;
  blobs(rng, 40, 6, tr);
  blobs(rng, 40, 6, va);
  for (Task task : {Task::detect, Task::pr_regress}) {
    TrainConfig cfg = TrainConfig::defaults(task);
    cfg.hidden = 6;
    const auto res = train(task, tr, va, cfg);
    for (const auto& e : res.history.epochs) {
      if (res.history.metric == SelectionMetric::val_accuracy) EXPECT_GE(res.history.best_value, e.val_metric);
      else EXPECT_LE(res.history.best_value, e.val_metric);
    }
    // Ties keep the earliest epoch.
    for (const auto& e : res.history.epochs) {
      if (e.epoch < res.history.best_epoch) EXPECT_NE(e.val_metric, res.history.best_value);
    }
  }
}

TEST(Train, PlantedHeadRegression) {
  Rng rng(8);
  const std::size_t dim = 8;
  MLPHead planted(dim, 1, Task::pr_regress);
  // A single tanh unit with small weights is near-linear; the labels are an
  // exact (linear-sigmoid-like) function of the features.
  auto p = planted.params();
  for (std::size_t d = 0; d < dim; ++d) p[d] = 0.3 * rng.normal();
  p[dim + 1] = 2.0;  // w2
  Batch tr, va;
  for (int i = 0; i < 600; ++i) {
    const auto x = random_vec(rng, dim);
    (i < 480 ? tr : va).x.push_back(x);
    (i < 480 ? tr : va).y.push_back(planted.forward(x));
  }
  TrainConfig cfg = TrainConfig::defaults(Task::pr_regress);
  cfg.hidden = 16;
  cfg.max_epochs = 40;
  cfg.learning_rate = 0.1;
  const auto res = train(Task::pr_regress, tr, va, cfg);
  EXPECT_LT(res.history.best_value, 0.02);
}

TEST(Train, RejectsBadInput) {
  TrainConfig cfg = TrainConfig::defaults(Task::detect);
  Batch empty;
  Batch one;
  one.x.push_back(FeatureVector{{1.0}});
  one.y.push_back(1.0);
  EXPECT_ANY_THROW(train(Task::detect, empty, one, cfg));
  EXPECT_ANY_THROW(train(Task::detect, one, empty, cfg));
  cfg.learning_rate = -1.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(Train, DivergenceIsReported) {
  Rng rng(9);
  Batch tr;
  blobs(rng, 20, 4, tr);
  for (auto& x : tr.x) x.values[0] = std::numeric_limits<double>::quiet_NaN();
  TrainConfig cfg = TrainConfig::defaults(Task::detect);
  cfg.hidden = 4;
  EXPECT_THROW(train(Task::detect, tr, tr, cfg), std::runtime_error);
}

TEST(Config, JsonRoundTrip) {
  TrainConfig cfg = TrainConfig::defaults(Task::pr_regress);
  cfg.loss = LossKind::smooth_l1;
  cfg.smooth_l1_mode = SmoothL1Mode::paper_literal;
  cfg.beta = 0.2;
  const auto back = train_config_from_json(to_json(cfg), Task::pr_regress);
  EXPECT_EQ(to_json(back).dump(), to_json(cfg).dump());
  EXPECT_EQ(smooth_l1_mode_from_string("paper-literal"), SmoothL1Mode::paper_literal);
  EXPECT_EQ(task_from_string("pr"), Task::pr_regress);
}

TEST(Model, SaveLoadRoundTripAndHashCheck) {
  Rng rng(10);
  ModelArtifact m;
  FeaturizerConfig fc;
  fc.dim = 12;
  m.head = MLPHead::random(12, 5, Task::pr_regress, rng);
  m.featurizer = fc;
  m.featurizer_hash = fc.fingerprint();
  m.train_config = TrainConfig::defaults(Task::pr_regress);
  m.selection_metric = SelectionMetric::val_mae;
  m.selection_value = 0.0421;
  const fs::path path = fs::temp_directory_path() / "provkit-test-model.json";
  save_model(m, path);

  const auto back = load_model(path, fc.fingerprint());
  EXPECT_EQ(back.head, m.head);  // bit-exact parameters
  EXPECT_EQ(back.selection_value, m.selection_value);

  FeaturizerConfig other = fc;
  other.hash_seed = 1;
  EXPECT_THROW(load_model(path, other.fingerprint()), ValidationError);

  auto doc = read_json_file(path);
  doc["featurizer_hash"] = "tampered";
  write_file_atomic(path, doc.dump());
  EXPECT_THROW(load_model(path), ValidationError);
  fs::remove(path);
}
