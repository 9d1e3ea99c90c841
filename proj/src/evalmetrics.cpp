#include "provkit/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "provkit/errors.hpp"
#include "provkit/json_io.hpp"

namespace provkit {

using nlohmann::json;

namespace {

template <typename A, typename B>
void check_lengths(std::span<A> a, std::span<B> b, const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(fmt::format("{}: length mismatch ({} vs {})", what, a.size(), b.size()));
  }
  if (a.empty()) throw std::invalid_argument(fmt::format("{}: empty input", what));
}

}  // namespace

double accuracy(std::span<const int> pred, std::span<const int> truth) {
  check_lengths(pred, truth, "accuracy");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double auroc(std::span<const double> scores, std::span<const int> truth) {
  check_lengths(scores, truth, "auroc");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of midranks (1-based, doubled to stay integral) of the positives.
  std::uint64_t rank_sum_x2 = 0;
  std::uint64_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const std::uint64_t midrank_x2 = i + 1 + j;  // (i+1) + j = 2 * average rank
    for (std::size_t k = i; k < j; ++k) {
      if (truth[order[k]] == 1) {
        rank_sum_x2 += midrank_x2;
        ++positives;
      }
    }
    i = j;
  }
  const std::uint64_t negatives = n - positives;
  if (positives == 0 || negatives == 0) throw std::invalid_argument("auroc: both classes must be present");
  const double u = static_cast<double>(rank_sum_x2) / 2.0 -
                   static_cast<double>(positives) * static_cast<double>(positives + 1) / 2.0;
  return u / (static_cast<double>(positives) * static_cast<double>(negatives));
}

double mae(std::span<const double> pred, std::span<const double> truth) {
  check_lengths(pred, truth, "mae");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) total += std::fabs(pred[i] - truth[i]);
  return total / static_cast<double>(pred.size());
}

std::map<int, ClassStats> precision_recall(std::span<const int> pred, std::span<const int> truth) {
  check_lengths(pred, truth, "precision_recall");
  std::map<int, ClassStats> out{{0, {}}, {1, {}}};
  for (int c : truth) out[c];
  for (int c : pred) out[c];
  for (auto& [c, stats] : out) {
    std::size_t tp = 0, predicted = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      predicted += pred[i] == c;
      stats.support += truth[i] == c;
      tp += pred[i] == c && truth[i] == c;
    }
    if (predicted > 0) stats.precision = static_cast<double>(tp) / static_cast<double>(predicted);
    stats.recall = stats.support > 0 ? static_cast<double>(tp) / static_cast<double>(stats.support) : 0.0;
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sequence");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("summary of an empty group");
  std::vector<double> v(values.begin(), values.end());
  Summary s;
  s.count = v.size();
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  s.q1 = quantile(v, 0.25);
  s.median = quantile(v, 0.5);
  s.q3 = quantile(v, 0.75);
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  return s;
}

std::map<std::string, Summary> distribution_summary(const std::map<std::string, std::vector<double>>& groups) {
  std::map<std::string, Summary> out;
  for (const auto& [name, values] : groups) {
    if (values.empty()) throw std::invalid_argument("distribution group '" + name + "' is empty");
    out.emplace(name, summarize(values));
  }
  return out;
}

std::string_view to_string(PrCategory c) {
  switch (c) {
    case PrCategory::human_consistent: return "human_consistent";
    case PrCategory::polished: return "polished";
    case PrCategory::mostly_generated: return "mostly_generated";
  }
  return "?";
}

PrThresholds parse_thresholds(std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) throw ValidationError("thresholds must look like 0.2,0.6");
  PrThresholds t;
  try {
    std::size_t used = 0;
    const std::string a(text.substr(0, comma)), b(text.substr(comma + 1));
    t.involvement = std::stod(a, &used);
    if (used != a.size()) throw std::invalid_argument(a);
    t.majority = std::stod(b, &used);
    if (used != b.size()) throw std::invalid_argument(b);
  } catch (const std::logic_error&) {
    throw ValidationError("thresholds must be two numbers, got '" + std::string(text) + "'");
  }
  if (!(0.0 <= t.involvement && t.involvement <= t.majority && t.majority <= 1.0)) {
    throw ValidationError("thresholds must satisfy 0 <= low <= high <= 1");
  }
  return t;
}

PrCategory interpret_pr(double score, const PrThresholds& t) {
  if (!(score >= 0.0 && score <= 1.0)) throw std::invalid_argument("Polish Ratio must lie in [0,1]");
  if (score <= t.involvement) return PrCategory::human_consistent;
  if (score <= t.majority) return PrCategory::polished;
  return PrCategory::mostly_generated;
}

json to_json(const Summary& s) {
  return {{"count", s.count}, {"min", s.min}, {"q1", s.q1}, {"median", s.median},
          {"q3", s.q3},       {"max", s.max}, {"mean", s.mean}};
}

json to_json(const EvalReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json per_class = json::object();
  for (const auto& [c, s] : r.per_class) {
    per_class[std::to_string(c)] = {{"precision", opt(s.precision)}, {"recall", s.recall}, {"support", s.support}};
  }
  json dist = json::object();
  for (const auto& [name, s] : r.distribution) dist[name] = to_json(s);
  return {{"samples", r.samples}, {"accuracy", opt(r.accuracy)}, {"auroc", opt(r.auroc)},
          {"mae", opt(r.mae)},    {"per_class", per_class},      {"distribution", dist}};
}

std::string distribution_csv(const std::map<std::string, Summary>& groups) {
  std::string out = "group,stat,value\n";
  for (const auto& [name, s] : groups) {
    std::string g = name;
    if (name.find_first_of(",\"\n") != std::string::npos) {
      g = "\"";
      for (char ch : name) g += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      g += '"';
    }
    out += fmt::format("{},count,{}\n", g, s.count);
    for (auto [stat, value] : {std::pair{"min", s.min}, {"q1", s.q1}, {"median", s.median}, {"q3", s.q3},
                               {"max", s.max}, {"mean", s.mean}}) {
      out += fmt::format("{},{},{}\n", g, stat, format_real(value));
    }
  }
  return out;
}

}  // namespace provkit
