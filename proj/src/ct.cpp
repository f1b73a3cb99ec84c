#include "tdetect/ct.hpp"

#include "tdetect/error.hpp"
#include "tdetect/scoring.hpp"

namespace tdetect {

ScorePair score_pair(std::string_view text, const TokenStatsBackend& backend, Method base,
                     double nu, const ContentExtractionConfig& content) {
  if (base == Method::ct) throw Error(ErrorCode::InvalidArgument, "ct cannot be its own base method");
  ScorePair pair;
  pair.s_t = score_series(backend.score_text(text), base, nu);
  try {
    pair.s_c = score_series(backend.score_text(extract_content(text, content)), base, nu);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyContent) throw;
    pair.s_c = pair.s_t;
    pair.content_fallback = true;
  }
  return pair;
}

double combine(const CombinerModel& combiner, const ScorePair& pair) {
  const double t = decision_value(pair.s_t);
  return pair.content_fallback ? combiner.predict_text_only(t)
                               : combiner.predict(t, decision_value(pair.s_c));
}

CtResult ct_score(std::string_view text, const TokenStatsBackend& backend, Method base,
                  double nu, const CombinerModel& combiner,
                  const ContentExtractionConfig& content) {
  CtResult out;
  out.pair = score_pair(text, backend, base, nu, content);
  out.score.value = combine(combiner, out.pair);
  out.score.method = Method::ct;
  out.score.nu = out.pair.s_t.nu;
  return out;
}

}  // namespace tdetect
