#pragma once

#include <array>
#include <span>
#include <string>

#include "json.hpp"
#include "tdetect/types.hpp"

namespace tdetect {

/// Text-side and content-side scores of one document.
struct ScorePair {
  DetectionScore s_t;
  DetectionScore s_c;
  /// Content representation was empty; s_c is unused.
  bool content_fallback = false;
};

struct LabeledPair {
  double s_t;
  double s_c;
  Label label;
};

enum class CombinerKind { linear_svr, ridge };

std::string_view to_string(CombinerKind kind);

struct CombinerHyper {
  CombinerKind kind = CombinerKind::linear_svr;
  double epsilon = 0.1;
  double c = 1.0;
  int max_iterations = 20000;
  double tolerance = 1e-12;
};

struct TrainingMeta {
  double epsilon = 0.0;
  double c = 0.0;
  int iterations = 0;
  std::string dev_hash;
};

/// Linear decision function w_t * s_t + w_c * s_c + b over oriented scores.
struct CombinerModel {
  CombinerKind kind = CombinerKind::linear_svr;
  std::array<double, 2> weights{0.0, 0.0};
  double bias = 0.0;
  TrainingMeta training_meta;

  double predict(double s_t, double s_c) const { return weights[0] * s_t + weights[1] * s_c + bias; }
  double predict_text_only(double s_t) const { return weights[0] * s_t + bias; }
};

nlohmann::json to_json(const CombinerModel& model);
CombinerModel combiner_from_json(const nlohmann::json& doc);

/// Fits targets human -> 0, machine -> 1.
///
/// linear_svr minimises 0.5 * (|w|^2 + b^2) + C * mean(max(0, |y - f(x)| - eps))
/// by dual coordinate descent in a fixed cyclic order (the bias is an extra
/// constant feature, as in LIBLINEAR). ridge minimises
/// 0.5 * |w|^2 + C / 2 * mean((y - f(x))^2) in closed form with a free bias.
/// Both objectives use the sample mean, so duplicating every row leaves the
/// solution unchanged.
///
/// Throws Error(DegenerateTraining) for a single-class set and
/// Error(InsufficientData) for fewer than 10 rows.
CombinerModel fit_combiner(std::span<const LabeledPair> dev, const CombinerHyper& hyper = {});

}  // namespace tdetect
