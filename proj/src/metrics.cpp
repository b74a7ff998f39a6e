#include "pd36/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "json.hpp"
#include "pd36/error.hpp"

namespace pd36 {

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < classes; ++p) {
    s += at(truth, p);
  }
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
  std::uint64_t s = 0;
  for (std::size_t t = 0; t < classes; ++t) {
    s += at(t, predicted);
  }
  return s;
}

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (std::size_t k = 0; k < classes; ++k) {
    s += at(k, k);
  }
  return s;
}

ConfusionMatrix confusion(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                          std::size_t classes) {
  if (y_true.size() != y_pred.size()) {
    throw InputError("confusion: " + std::to_string(y_true.size()) + " true labels vs " +
                     std::to_string(y_pred.size()) + " predictions");
  }
  ConfusionMatrix cm;
  cm.classes = classes;
  cm.counts.assign(classes * classes, 0);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] >= classes || y_pred[i] >= classes) {
      throw InputError("confusion: label outside [0, " + std::to_string(classes) + ") at index " +
                       std::to_string(i));
    }
    ++cm.counts[y_true[i] * classes + y_pred[i]];
  }
  return cm;
}

namespace {

double ratio(double num, double den, bool &degenerate) {
  if (den == 0.0) {
    degenerate = true;
    return 0.0;
  }
  return num / den;
}

} // namespace

std::vector<ClassMetrics> per_class(const ConfusionMatrix &cm) {
  std::vector<ClassMetrics> out(cm.classes);
  for (std::size_t k = 0; k < cm.classes; ++k) {
    ClassMetrics &m = out[k];
    const double tp = static_cast<double>(cm.at(k, k));
    const double predicted = static_cast<double>(cm.col_sum(k));
    m.support = cm.row_sum(k);
    m.precision = ratio(tp, predicted, m.degenerate);
    m.recall = ratio(tp, static_cast<double>(m.support), m.degenerate);
    m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall, m.degenerate);
  }
  return out;
}

Aggregate aggregate(const ConfusionMatrix &cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) {
    throw InputError("aggregate: confusion matrix is empty");
  }
  const std::vector<ClassMetrics> pc = per_class(cm);
  const double n = static_cast<double>(total);
  const double c = static_cast<double>(cm.classes);

  Aggregate a;
  a.accuracy = static_cast<double>(cm.trace()) / n;
  for (const ClassMetrics &m : pc) {
    a.macro.precision += m.precision;
    a.macro.recall += m.recall;
    a.macro.f1 += m.f1;
    const double w = static_cast<double>(m.support) / n;
    a.weighted.precision += w * m.precision;
    a.weighted.recall += w * m.recall;
    a.weighted.f1 += w * m.f1;
  }
  a.macro.precision /= c;
  a.macro.recall /= c;
  a.macro.f1 /= c;
  a.balanced_accuracy = a.macro.recall;

  // Gorodkin: (c*s - sum p_k t_k) / sqrt((s^2 - sum p_k^2)(s^2 - sum t_k^2))
  double sum_pt = 0.0;
  double sum_pp = 0.0;
  double sum_tt = 0.0;
  for (std::size_t k = 0; k < cm.classes; ++k) {
    const double t = static_cast<double>(cm.row_sum(k));
    const double p = static_cast<double>(cm.col_sum(k));
    sum_pt += p * t;
    sum_pp += p * p;
    sum_tt += t * t;
  }
  const double correct = static_cast<double>(cm.trace());
  const double den = std::sqrt((n * n - sum_pp) * (n * n - sum_tt));
  a.mcc = ratio(correct * n - sum_pt, den, a.mcc_degenerate);

  const double p_e = sum_pt / (n * n);
  a.kappa = ratio(a.accuracy - p_e, 1.0 - p_e, a.kappa_degenerate);
  return a;
}

ScoreMatrix ScoreMatrix::from_rows(const std::vector<std::vector<double>> &rows) {
  ScoreMatrix m;
  m.rows = rows.size();
  m.cols = rows.empty() ? 0 : rows.front().size();
  m.values.reserve(m.rows * m.cols);
  for (const auto &r : rows) {
    if (r.size() != m.cols) {
      throw ShapeError("score rows have differing lengths");
    }
    m.values.insert(m.values.end(), r.begin(), r.end());
  }
  return m;
}

namespace {

void check_scores(const ScoreMatrix &scores, std::span<const std::size_t> y_true) {
  if (scores.rows != y_true.size()) {
    throw InputError(std::to_string(scores.rows) + " score rows vs " + std::to_string(y_true.size()) + " labels");
  }
  if (scores.values.size() != scores.rows * scores.cols) {
    throw ShapeError("score matrix storage does not match its dimensions");
  }
  for (std::size_t y : y_true) {
    if (y >= scores.cols) {
      throw InputError("label " + std::to_string(y) + " outside [0, " + std::to_string(scores.cols) + ")");
    }
  }
}

} // namespace

AucResult macro_auc(const ScoreMatrix &scores, std::span<const std::size_t> y_true) {
  check_scores(scores, y_true);
  const std::size_t n = scores.rows;
  AucResult result;
  result.per_class.resize(scores.cols);

  std::vector<std::size_t> order(n);
  std::vector<double> rank(n);
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < scores.cols; ++k) {
    const std::size_t positives =
        static_cast<std::size_t>(std::count(y_true.begin(), y_true.end(), k));
    const std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0) {
      result.excluded.push_back(k);
      continue;
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores.at(a, k) < scores.at(b, k); });
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j < n && scores.at(order[j], k) == scores.at(order[i], k)) {
        ++j;
      }
      const double avg = 0.5 * static_cast<double>(i + 1 + j);
      for (std::size_t r = i; r < j; ++r) {
        rank[order[r]] = avg;
      }
      i = j;
    }
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (y_true[i] == k) {
        rank_sum += rank[i];
      }
    }
    const double np = static_cast<double>(positives);
    const double auc = (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(negatives));
    result.per_class[k] = auc;
    sum += auc;
    ++used;
  }
  if (used == 0) {
    throw InputError("macro_auc: fewer than two classes present; AUC is undefined");
  }
  result.macro_auc = sum / static_cast<double>(used);
  return result;
}

std::vector<MarginRow> margins(const ScoreMatrix &scores, std::span<const std::size_t> y_true) {
  if (scores.cols < 2) {
    throw InputError("margins need at least two classes");
  }
  check_scores(scores, y_true);
  std::vector<MarginRow> rows;
  rows.reserve(scores.rows);
  for (std::size_t r = 0; r < scores.rows; ++r) {
    const std::span<const double> row = scores.row(r);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c] > row[best]) {
        best = c;
      }
    }
    double second = -INFINITY;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c != best) {
        second = std::max(second, row[c]);
      }
    }
    MarginRow m;
    m.c_true = row[y_true[r]];
    m.c_best = row[best];
    m.c_second = second;
    m.margin = m.c_true - m.c_second;
    m.correct = best == y_true[r];
    rows.push_back(m);
  }
  return rows;
}

std::string margins_csv(std::span<const MarginRow> rows) {
  std::string out = "c_true,c_best,c_second,margin,correct\n";
  char buf[160];
  for (const MarginRow &m : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%d\n", m.c_true, m.c_best, m.c_second, m.margin,
                  m.correct ? 1 : 0);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------

MetricsReport build_report(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                           const std::vector<std::string> &labels, const ScoreMatrix *scores) {
  MetricsReport report;
  report.labels = labels;
  report.confusion = confusion(y_true, y_pred, labels.size());
  report.classes = per_class(report.confusion);
  report.summary = aggregate(report.confusion);
  if (scores != nullptr) {
    if (scores->cols != labels.size()) {
      throw InputError("score columns do not match the label count");
    }
    report.auc = macro_auc(*scores, y_true);
  }
  return report;
}

namespace {

std::string fixed5(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5f", v);
  return buf;
}

std::string pad(std::string s, std::size_t width, bool left) {
  if (s.size() >= width) {
    return s;
  }
  const std::string fill(width - s.size(), ' ');
  return left ? s + fill : fill + s;
}

} // namespace

std::string format_report_text(const MetricsReport &report) {
  std::size_t name_width = std::string("weighted avg").size();
  for (const std::string &l : report.labels) {
    name_width = std::max(name_width, l.size());
  }
  const std::size_t nr_width = std::max<std::size_t>(2, std::to_string(report.labels.size()).size());
  constexpr std::size_t col = 11;
  const auto line = [&](const std::string &nr, const std::string &name, const std::string &p, const std::string &r,
                        const std::string &f, const std::string &s) {
    return pad(nr, nr_width, true) + "  " + pad(name, name_width, true) + pad(p, col, false) + pad(r, col, false) +
           pad(f, col, false) + pad(s, col, false) + "\n";
  };

  std::string out = line("Nr", "class", "precision", "recall", "f1_score", "support");
  for (std::size_t k = 0; k < report.classes.size(); ++k) {
    const ClassMetrics &m = report.classes[k];
    out += line(std::to_string(k), report.labels[k], fixed5(m.precision), fixed5(m.recall), fixed5(m.f1),
                std::to_string(m.support));
  }
  const Aggregate &a = report.summary;
  const std::string total = std::to_string(report.confusion.total());
  out += "\n";
  out += line("", "accuracy", "", "", fixed5(a.accuracy), total);
  out += line("", "macro avg", fixed5(a.macro.precision), fixed5(a.macro.recall), fixed5(a.macro.f1), total);
  out += line("", "weighted avg", fixed5(a.weighted.precision), fixed5(a.weighted.recall), fixed5(a.weighted.f1),
              total);
  out += "\n";
  out += "balanced accuracy  " + fixed5(a.balanced_accuracy) + "\n";
  out += "mcc                " + fixed5(a.mcc) + (a.mcc_degenerate ? "  (degenerate)" : "") + "\n";
  out += "kappa              " + fixed5(a.kappa) + (a.kappa_degenerate ? "  (degenerate)" : "") + "\n";
  if (report.auc) {
    out += "macro auc          " + fixed5(report.auc->macro_auc) + "\n";
  }
  std::vector<std::string> flagged;
  for (std::size_t k = 0; k < report.classes.size(); ++k) {
    if (report.classes[k].degenerate) {
      flagged.push_back(std::to_string(k));
    }
  }
  if (!flagged.empty()) {
    std::string joined;
    for (const std::string &f : flagged) {
      joined += (joined.empty() ? "" : ", ") + f;
    }
    out += "zero-denominator classes: " + joined + "\n";
  }
  return out;
}

std::string format_report_json(const MetricsReport &report) {
  using nlohmann::json;
  json classes = json::array();
  for (std::size_t k = 0; k < report.classes.size(); ++k) {
    const ClassMetrics &m = report.classes[k];
    classes.push_back({{"index", k},
                       {"class", report.labels[k]},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1_score", m.f1},
                       {"support", m.support},
                       {"degenerate", m.degenerate}});
  }
  const Aggregate &a = report.summary;
  const auto avg = [](const Averages &v) {
    return json{{"precision", v.precision}, {"recall", v.recall}, {"f1_score", v.f1}};
  };
  json matrix = json::array();
  for (std::size_t t = 0; t < report.confusion.classes; ++t) {
    json row = json::array();
    for (std::size_t p = 0; p < report.confusion.classes; ++p) {
      row.push_back(report.confusion.at(t, p));
    }
    matrix.push_back(row);
  }
  json j{{"classes", classes},
         {"accuracy", a.accuracy},
         {"macro_avg", avg(a.macro)},
         {"weighted_avg", avg(a.weighted)},
         {"balanced_accuracy", a.balanced_accuracy},
         {"mcc", a.mcc},
         {"mcc_degenerate", a.mcc_degenerate},
         {"kappa", a.kappa},
         {"kappa_degenerate", a.kappa_degenerate},
         {"support", report.confusion.total()},
         {"confusion_matrix", matrix}};
  if (report.auc) {
    json per = json::array();
    for (const auto &v : report.auc->per_class) {
      per.push_back(v ? json(*v) : json(nullptr));
    }
    j["macro_auc"] = report.auc->macro_auc;
    j["auc_per_class"] = per;
    j["auc_excluded"] = report.auc->excluded;
  }
  return j.dump(2);
}

std::string confusion_csv(const ConfusionMatrix &cm, const std::vector<std::string> &labels) {
  if (labels.size() != cm.classes) {
    throw InputError("confusion_csv: label count does not match the matrix");
  }
  const auto quote = [](const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
      return s;
    }
    std::string q = "\"";
    for (char ch : s) {
      q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    }
    return q + "\"";
  };
  std::string out = "true\\predicted";
  for (const std::string &l : labels) {
    out += "," + quote(l);
  }
  out += "\n";
  for (std::size_t t = 0; t < cm.classes; ++t) {
    out += quote(labels[t]);
    for (std::size_t p = 0; p < cm.classes; ++p) {
      out += "," + std::to_string(cm.at(t, p));
    }
    out += "\n";
  }
  return out;
}

} // namespace pd36
