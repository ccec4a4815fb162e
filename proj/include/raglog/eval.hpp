#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "raglog/error.hpp"
#include "raglog/format.hpp"
#include "raglog/ingest.hpp"
#include "raglog/ragqa.hpp"

namespace raglog {

/// Positive class is the anomaly: tp counts Abnormal verdicts on Anomalous entries.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;
  std::uint64_t skipped = 0;  // entries whose classification failed

  [[nodiscard]] std::uint64_t total() const noexcept { return tp + fp + fn + tn + skipped; }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    skipped += o.skipped;
    return *this;
  }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// nullopt marks an entry whose verdict could not be obtained.
using Prediction = std::optional<VerdictValue>;

inline void tally(ConfusionMatrix& m, const Prediction& p, GroundTruth label) noexcept {
  if (!p) {
    ++m.skipped;
    return;
  }
  const bool said_abnormal = *p == VerdictValue::Abnormal;
  const bool is_anomalous = label == GroundTruth::Anomalous;
  if (said_abnormal && is_anomalous) ++m.tp;
  else if (said_abnormal) ++m.fp;
  else if (is_anomalous) ++m.fn;
  else ++m.tn;
}

inline ConfusionMatrix accumulate(std::span<const Prediction> predictions, std::span<const GroundTruth> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(predictions.size()) + " predictions for " +
                                          std::to_string(labels.size()) + " labels");
  }
  ConfusionMatrix m;
  for (std::size_t i = 0; i < predictions.size(); ++i) tally(m, predictions[i], labels[i]);
  return m;
}

/// Harmonic mean; 0 when precision + recall is 0.
inline double f1_score(double precision, double recall) noexcept {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ConfusionMatrix matrix;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
  std::string config_digest;

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json flags = nlohmann::json::array();
    if (precision_undefined) flags.push_back("precision_undefined");
    if (recall_undefined) flags.push_back("recall_undefined");
    if (f1_undefined) flags.push_back("f1_undefined");
    return {{"precision", precision},
            {"recall", recall},
            {"f1", f1},
            {"matrix",
             {{"tp", matrix.tp}, {"fp", matrix.fp}, {"fn", matrix.fn}, {"tn", matrix.tn}, {"skipped", matrix.skipped}}},
            {"degenerate_flags", flags},
            {"config_digest", config_digest}};
  }

  static MetricsReport from_json(const nlohmann::json& j) {
    MetricsReport r;
    r.precision = j.at("precision").get<double>();
    r.recall = j.at("recall").get<double>();
    r.f1 = j.at("f1").get<double>();
    const auto& m = j.at("matrix");
    r.matrix = {m.at("tp").get<std::uint64_t>(), m.at("fp").get<std::uint64_t>(), m.at("fn").get<std::uint64_t>(),
                m.at("tn").get<std::uint64_t>(), m.at("skipped").get<std::uint64_t>()};
    for (const auto& f : j.at("degenerate_flags")) {
      if (f == "precision_undefined") r.precision_undefined = true;
      if (f == "recall_undefined") r.recall_undefined = true;
      if (f == "f1_undefined") r.f1_undefined = true;
    }
    r.config_digest = j.value("config_digest", "");
    return r;
  }

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Zero denominators give 0 with the matching flag instead of NaN.
inline MetricsReport metrics(const ConfusionMatrix& m, std::string config_digest = {}) {
  MetricsReport r;
  r.matrix = m;
  r.config_digest = std::move(config_digest);
  if (m.tp + m.fp == 0) {
    r.precision_undefined = true;
  } else {
    r.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
  }
  if (m.tp + m.fn == 0) {
    r.recall_undefined = true;
  } else {
    r.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  }
  if (r.precision + r.recall == 0.0) {
    r.f1_undefined = true;
  } else {
    r.f1 = f1_score(r.precision, r.recall);
  }
  return r;
}

struct ComparisonRow {
  std::string dataset;
  std::string strategy;
  MetricsReport metrics;
  friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

struct StrategyComparison {
  std::vector<ComparisonRow> rows;

  [[nodiscard]] std::string to_csv() const {
    std::ostringstream out;
    out << "dataset,strategy,precision,recall,f1,tp,fp,fn,tn,skipped\n";
    for (const auto& r : rows) {
      const auto& m = r.metrics.matrix;
      out << r.dataset << ',' << r.strategy << ',' << format_double(r.metrics.precision) << ','
          << format_double(r.metrics.recall) << ',' << format_double(r.metrics.f1) << ',' << m.tp << ',' << m.fp
          << ',' << m.fn << ',' << m.tn << ',' << m.skipped << '\n';
    }
    return out.str();
  }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rows) rs.push_back({{"dataset", r.dataset}, {"strategy", r.strategy}, {"metrics", r.metrics.to_json()}});
    return {{"format", "raglog-comparison"}, {"version", 1}, {"rows", rs}};
  }

  static StrategyComparison from_json(const nlohmann::json& j) {
    StrategyComparison c;
    for (const auto& r : j.at("rows")) {
      c.rows.push_back({r.at("dataset").get<std::string>(), r.at("strategy").get<std::string>(),
                        MetricsReport::from_json(r.at("metrics"))});
    }
    return c;
  }

  /// Table for people: two decimals, ties to even.
  void print_table(std::ostream& out) const {
    out << "dataset\tstrategy\tprecision\trecall\tf1\tskipped\n";
    for (const auto& r : rows) {
      out << r.dataset << '\t' << r.strategy << '\t' << format_2dp_half_even(r.metrics.precision) << '\t'
          << format_2dp_half_even(r.metrics.recall) << '\t' << format_2dp_half_even(r.metrics.f1) << '\t'
          << r.metrics.matrix.skipped << '\n';
    }
  }
};

inline StrategyComparison compare_strategies(std::vector<ComparisonRow> rows) {
  if (rows.empty()) throw Error(Errc::InvalidArgument, "nothing to compare");
  return StrategyComparison{std::move(rows)};
}

}  // namespace raglog
