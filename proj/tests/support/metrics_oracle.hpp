#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "pd36/random.hpp"

namespace pd36::testing {

struct Instance {
  std::size_t classes = 0;
  std::vector<std::size_t> y_true, y_pred;
  std::vector<std::vector<double>> scores;
};

inline Instance random_instance(std::uint64_t seed) {
  Rng rng(seed);
  Instance in;
  in.classes = 2 + rng.below(4);
  const std::size_t n = 1 + rng.below(50);
  // Skewed predictions so some classes go unpredicted or unsupported.
  const double skill = rng.uniform();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t t = rng.below(in.classes);
    const std::size_t p = rng.bernoulli(skill) ? t : rng.below(in.classes);
    in.y_true.push_back(t);
    in.y_pred.push_back(p);
    std::vector<double> row(in.classes);
    for (double &s : row) s = std::round(rng.uniform() * 8) / 8; // coarse, so ties occur
    in.scores.push_back(row);
  }
  return in;
}

// Everything below recomputes from the raw label sequences, never from a
// confusion matrix.
struct Brute {
  std::vector<double> precision, recall, f1;
  std::vector<std::size_t> support;
  double accuracy = 0, macro_p = 0, macro_r = 0, macro_f1 = 0, weighted_p = 0, weighted_r = 0, weighted_f1 = 0;
  double mcc = 0, kappa = 0;
  std::optional<double> auc;
};

inline double ratio(double a, double b) { return b == 0 ? 0.0 : a / b; }

inline Brute brute(const Instance &in) {
  const std::size_t n = in.y_true.size(), C = in.classes;
  Brute b;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) hits += in.y_true[i] == in.y_pred[i];
  b.accuracy = static_cast<double>(hits) / n;
  for (std::size_t k = 0; k < C; ++k) {
    std::size_t tp = 0, pred_k = 0, true_k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      tp += in.y_true[i] == k && in.y_pred[i] == k;
      pred_k += in.y_pred[i] == k;
      true_k += in.y_true[i] == k;
    }
    const double p = ratio(tp, pred_k), r = ratio(tp, true_k);
    b.precision.push_back(p);
    b.recall.push_back(r);
    b.f1.push_back(ratio(2 * p * r, p + r));
    b.support.push_back(true_k);
  }
  for (std::size_t k = 0; k < C; ++k) {
    b.macro_p += b.precision[k] / C;
    b.macro_r += b.recall[k] / C;
    b.macro_f1 += b.f1[k] / C;
    b.weighted_p += b.precision[k] * b.support[k] / n;
    b.weighted_r += b.recall[k] * b.support[k] / n;
    b.weighted_f1 += b.f1[k] * b.support[k] / n;
  }
  // MCC as the correlation of the one-hot indicator matrices.
  std::vector<double> xm(C, 0), ym(C, 0);
  for (std::size_t i = 0; i < n; ++i) {
    xm[in.y_true[i]] += 1.0 / n;
    ym[in.y_pred[i]] += 1.0 / n;
  }
  double cxy = 0, cxx = 0, cyy = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < C; ++k) {
      const double x = (in.y_true[i] == k) - xm[k];
      const double y = (in.y_pred[i] == k) - ym[k];
      cxy += x * y;
      cxx += x * x;
      cyy += y * y;
    }
  b.mcc = cxx * cyy == 0 ? 0.0 : cxy / std::sqrt(cxx * cyy);
  double pe = 0;
  for (std::size_t k = 0; k < C; ++k) pe += xm[k] * ym[k];
  b.kappa = pe == 1 ? 0.0 : (b.accuracy - pe) / (1 - pe);
  // One-vs-rest AUC by counting every positive/negative pair.
  double sum = 0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < C; ++k) {
    double wins = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (in.y_true[i] != k) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (in.y_true[j] == k) continue;
        ++pairs;
        const double a = in.scores[i][k], c = in.scores[j][k];
        wins += a > c ? 1.0 : (a == c ? 0.5 : 0.0);
      }
    }
    if (pairs > 0) {
      sum += wins / pairs;
      ++used;
    }
  }
  if (used > 0) b.auc = sum / used;
  return b;
}

} // namespace pd36::testing
