#pragma once

#include <string_view>

#include "tdetect/backend.hpp"
#include "tdetect/combiner.hpp"
#include "tdetect/content.hpp"

namespace tdetect {

/// Scores the text and its content representation with the same base method.
/// An empty content representation sets content_fallback instead of failing.
ScorePair score_pair(std::string_view text, const TokenStatsBackend& backend, Method base,
                     double nu, const ContentExtractionConfig& content);

/// Combined value from oriented scores; the content term is dropped on fallback.
double combine(const CombinerModel& combiner, const ScorePair& pair);

struct CtResult {
  DetectionScore score;  // method == ct; nu carried over from the base method
  ScorePair pair;
};

CtResult ct_score(std::string_view text, const TokenStatsBackend& backend, Method base,
                  double nu, const CombinerModel& combiner,
                  const ContentExtractionConfig& content);

}  // namespace tdetect
