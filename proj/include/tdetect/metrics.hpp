#pragma once

#include <span>

#include "tdetect/types.hpp"

namespace tdetect {

/// Mann-Whitney AUROC with machine as the positive class and ties counted one
/// half, by a sort-and-rank sweep (O(n log n)). Exactly equal to the
/// pairwise count in kernels::auroc_pairwise_serial. Throws
/// Error(DegenerateLabels) unless both labels occur.
double auroc(std::span<const ScoredLabel> scores);

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
};

/// Machine is predicted when score >= threshold.
Confusion confusion_at(std::span<const ScoredLabel> scores, double threshold);

double f1(const Confusion& c);
/// Harmonic mean of machine-class precision and recall; 0 when both are 0.
double f1(std::span<const Label> predictions, std::span<const Label> labels);

struct ThresholdFit {
  double threshold = 0.0;  // may be -inf (everything machine) or +inf (nothing)
  double f1 = 0.0;
  double tpr = 0.0;
};

/// Maximises F1 over -inf, +inf and the midpoints of adjacent distinct
/// scores. Ties prefer higher TPR, then the lower threshold.
ThresholdFit fit_threshold_f1(std::span<const ScoredLabel> scores);

/// Highest TPR among thresholds whose empirical FPR is at most fpr_cap,
/// without interpolation.
double tpr_at_fpr(std::span<const ScoredLabel> scores, double fpr_cap = 0.05);

}  // namespace tdetect
