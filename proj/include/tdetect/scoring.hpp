#pragma once

#include <cstddef>

#include "tdetect/series.hpp"
#include "tdetect/types.hpp"

namespace tdetect {

/// Summed centred log-probability and summed reference variance of a text.
struct Discrepancy {
  double d = 0.0;
  double v = 0.0;
  std::size_t token_count = 0;
};

struct PerplexityPair {
  double log_ppl = 0.0;    // nats per token under the performer
  double x_log_ppl = 0.0;  // performer log-probability averaged under the observer
};

/// d = sum(logp_observed - mu_ref), v = sum(var_ref), left to right.
/// Throws Error(EmptyInput) for an empty series.
Discrepancy discrepancy(const TokenScoreSeries& series);

/// d / sqrt(v). Throws Error(DegenerateVariance) when v == 0.
DetectionScore gaussian_score(const Discrepancy& disc);

/// Heavy-tailed normalisation d / sqrt(nu / (nu - 2) * v).
///
/// Evaluated as gaussian_score * sqrt((nu - 2) / nu) so the two scores are a
/// fixed positive rescaling of each other for every input; the result is
/// within a couple of ulps of the direct quotient. Throws Error(InvalidNu)
/// unless nu > 2, and Error(DegenerateVariance) when v == 0.
DetectionScore t_detect_score(const Discrepancy& disc, double nu = kDefaultNu);

/// Factor applied to a Gaussian score to obtain the t-normalised score.
double t_scale_factor(double nu);

PerplexityPair perplexities(const TokenScoreSeries& performer, const TokenScoreSeries& cross);

/// Cross-perplexity ratio log_ppl / x_log_ppl. `performer` carries the
/// performer's observed-token log-probabilities; `cross` carries the
/// performer's expected log-probability under the observer in mu_ref. One
/// series from a (scoring = performer, reference = observer) pair serves as
/// both. Throws Error(SeriesMismatch) on differing token sequences and
/// Error(DegenerateCrossEntropy) when x_log_ppl == 0.
DetectionScore binoculars_score(const TokenScoreSeries& performer, const TokenScoreSeries& cross);

/// Score oriented so that larger always means "more likely machine".
/// Binoculars ratios are lower for machine text and are negated; every other
/// method passes through.
double decision_value(const DetectionScore& score);

/// Dispatches gaussian / t_detect / binoculars on a single series.
DetectionScore score_series(const TokenScoreSeries& series, Method method, double nu = kDefaultNu);

}  // namespace tdetect
