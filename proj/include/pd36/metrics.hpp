#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pd36 {

/// counts[t * classes + p] = images of true class t predicted as p.
struct ConfusionMatrix {
  std::size_t classes = 0;
  std::vector<std::uint64_t> counts;

  std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts[truth * classes + predicted]; }
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t col_sum(std::size_t predicted) const;
  std::uint64_t total() const;
  std::uint64_t trace() const;
};

ConfusionMatrix confusion(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                          std::size_t classes);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
  /// A 0/0 ratio was reported as 0.
  bool degenerate = false;
};

std::vector<ClassMetrics> per_class(const ConfusionMatrix &cm);

struct Averages {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct Aggregate {
  double accuracy = 0.0;
  Averages macro;
  Averages weighted;
  double balanced_accuracy = 0.0;
  /// Multiclass (Gorodkin) Matthews correlation.
  double mcc = 0.0;
  double kappa = 0.0;
  bool mcc_degenerate = false;
  bool kappa_degenerate = false;
};

/// Requires at least one sample.
Aggregate aggregate(const ConfusionMatrix &cm);

/// Row-major score matrix: one row per sample, one column per class.
struct ScoreMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }

  static ScoreMatrix from_rows(const std::vector<std::vector<double>> &rows);
};

struct AucResult {
  double macro_auc = 0.0;
  /// Empty for classes with no positives or no negatives.
  std::vector<std::optional<double>> per_class;
  std::vector<std::size_t> excluded;
};

/// One-vs-rest ROC AUC per class via average ranks (ties count 1/2),
/// averaged over classes that have both positives and negatives.
/// Fewer than two represented classes is an InputError.
AucResult macro_auc(const ScoreMatrix &scores, std::span<const std::size_t> y_true);

struct MarginRow {
  double c_true = 0.0;
  double c_best = 0.0;
  double c_second = 0.0;
  /// c_true - c_second.
  double margin = 0.0;
  bool correct = false;
};

/// Needs at least two classes.
std::vector<MarginRow> margins(const ScoreMatrix &scores, std::span<const std::size_t> y_true);

std::string margins_csv(std::span<const MarginRow> rows);

// ---------------------------------------------------------------------------

struct MetricsReport {
  std::vector<std::string> labels;
  ConfusionMatrix confusion;
  std::vector<ClassMetrics> classes;
  Aggregate summary;
  std::optional<AucResult> auc;
};

MetricsReport build_report(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                           const std::vector<std::string> &labels, const ScoreMatrix *scores = nullptr);

/// Per-class table (Nr, class, precision, recall, f1_score, support) to
/// five decimals followed by accuracy, macro avg and weighted avg rows.
std::string format_report_text(const MetricsReport &report);

std::string format_report_json(const MetricsReport &report);

std::string confusion_csv(const ConfusionMatrix &cm, const std::vector<std::string> &labels);

} // namespace pd36
