#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace provkit {

double accuracy(std::span<const int> pred, std::span<const int> truth);

/// Probability that a random positive outscores a random negative, ties
/// counted as one half. O(n log n) via midranks.
double auroc(std::span<const double> scores, std::span<const int> truth);

double mae(std::span<const double> pred, std::span<const double> truth);

struct ClassStats {
  std::optional<double> precision;  // empty when the class is never predicted
  double recall = 0.0;              // 0 when the class never occurs
  std::size_t support = 0;
};

std::map<int, ClassStats> precision_recall(std::span<const int> pred, std::span<const int> truth);

struct Summary {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
  std::size_t count = 0;
};

// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);
Summary summarize(std::span<const double> values);
std::map<std::string, Summary> distribution_summary(const std::map<std::string, std::vector<double>>& groups);

enum class PrCategory { human_consistent, polished, mostly_generated };
std::string_view to_string(PrCategory c);

struct PrThresholds {
  double involvement = 0.2;  // above this: polished
  double majority = 0.6;     // above this: mostly generated
};

PrThresholds parse_thresholds(std::string_view text);  // "0.2,0.6"

/// Boundary values go to the lower category.
PrCategory interpret_pr(double score, const PrThresholds& t = {});

struct EvalReport {
  std::optional<double> accuracy;
  std::optional<double> auroc;
  std::optional<double> mae;
  std::map<int, ClassStats> per_class;
  std::map<std::string, Summary> distribution;
  std::size_t samples = 0;
};

nlohmann::json to_json(const Summary& s);
nlohmann::json to_json(const EvalReport& r);

// Rows of (group, stat, value) with a header line.
std::string distribution_csv(const std::map<std::string, Summary>& groups);

}  // namespace provkit
