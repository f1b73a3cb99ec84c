#include "tdetect/scoring.hpp"

#include <cmath>
#include <string>

#include "tdetect/error.hpp"

namespace tdetect {

Discrepancy discrepancy(const TokenScoreSeries& series) {
  if (series.positions.empty()) throw Error(ErrorCode::EmptyInput, "empty token series");
  Discrepancy out;
  for (const PositionStats& p : series.positions) {
    out.d += p.logp_observed - p.mu_ref;
    out.v += p.var_ref;
  }
  out.token_count = series.positions.size();
  return out;
}

DetectionScore gaussian_score(const Discrepancy& disc) {
  if (!(disc.v > 0.0)) {
    throw Error(ErrorCode::DegenerateVariance, "aggregated variance is zero");
  }
  return {disc.d / std::sqrt(disc.v), Method::gaussian, std::nullopt, 0.0};
}

double t_scale_factor(double nu) {
  if (!(nu > 2.0) || std::isnan(nu)) {
    throw Error(ErrorCode::InvalidNu, "nu must exceed 2 (got " + std::to_string(nu) + ")");
  }
  if (std::isinf(nu)) return 1.0;
  return std::sqrt((nu - 2.0) / nu);
}

DetectionScore t_detect_score(const Discrepancy& disc, double nu) {
  const double factor = t_scale_factor(nu);
  DetectionScore score = gaussian_score(disc);
  score.value *= factor;
  score.method = Method::t_detect;
  score.nu = nu;
  return score;
}

PerplexityPair perplexities(const TokenScoreSeries& performer, const TokenScoreSeries& cross) {
  if (performer.positions.empty()) throw Error(ErrorCode::EmptyInput, "empty token series");
  if (performer.positions.size() != cross.positions.size()) {
    throw Error(ErrorCode::SeriesMismatch,
                "series lengths differ: " + std::to_string(performer.positions.size()) +
                    " vs " + std::to_string(cross.positions.size()));
  }
  double logp = 0.0;
  double mu = 0.0;
  for (std::size_t i = 0; i < performer.positions.size(); ++i) {
    if (performer.positions[i].token_index != cross.positions[i].token_index) {
      throw Error(ErrorCode::SeriesMismatch, "token indices differ at " + std::to_string(i));
    }
    logp += performer.positions[i].logp_observed;
    mu += cross.positions[i].mu_ref;
  }
  const auto n = static_cast<double>(performer.positions.size());
  // 0.0 - x keeps a zero sum at +0.0.
  return {0.0 - logp / n, 0.0 - mu / n};
}

DetectionScore binoculars_score(const TokenScoreSeries& performer, const TokenScoreSeries& cross) {
  const PerplexityPair pp = perplexities(performer, cross);
  if (pp.x_log_ppl == 0.0) {
    throw Error(ErrorCode::DegenerateCrossEntropy, "cross-perplexity is zero");
  }
  return {pp.log_ppl / pp.x_log_ppl, Method::binoculars, std::nullopt, 0.0};
}

double decision_value(const DetectionScore& score) {
  return score.method == Method::binoculars ? -score.value : score.value;
}

DetectionScore score_series(const TokenScoreSeries& series, Method method, double nu) {
  switch (method) {
    case Method::gaussian: return gaussian_score(discrepancy(series));
    case Method::t_detect: return t_detect_score(discrepancy(series), nu);
    case Method::binoculars: return binoculars_score(series, series);
    case Method::ct: break;
  }
  throw Error(ErrorCode::InvalidArgument, "ct scores need a fitted combiner");
}

}  // namespace tdetect
