#include <cmath>
#include <string>

#include "tdetect/backend.hpp"
#include "tdetect/error.hpp"
#include "tdetect/hash.hpp"
#include "tdetect/series.hpp"
#include "tdetect/types.hpp"

namespace tdetect {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::EmptyContent: return "EmptyContent";
    case ErrorCode::BackendError: return "BackendError";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::DegenerateCrossEntropy: return "DegenerateCrossEntropy";
    case ErrorCode::InvalidNu: return "InvalidNu";
    case ErrorCode::SeriesMismatch: return "SeriesMismatch";
    case ErrorCode::DegenerateTraining: return "DegenerateTraining";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::FitDiverged: return "FitDiverged";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::IngestError: return "IngestError";
    case ErrorCode::InvalidUtf8: return "InvalidUtf8";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

std::string_view to_string(Label label) {
  return label == Label::machine ? "machine" : "human";
}

std::optional<Label> parse_label(std::string_view text) {
  if (text == "human") return Label::human;
  if (text == "machine") return Label::machine;
  return std::nullopt;
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::gaussian: return "gaussian";
    case Method::t_detect: return "t_detect";
    case Method::binoculars: return "binoculars";
    case Method::ct: return "ct";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view text) {
  if (text == "gaussian") return Method::gaussian;
  if (text == "t_detect") return Method::t_detect;
  if (text == "binoculars") return Method::binoculars;
  if (text == "ct") return Method::ct;
  return std::nullopt;
}

std::string_view to_string(BackendKind kind) {
  return kind == BackendKind::remote ? "remote" : "toy_ngram";
}

bool is_blank(std::string_view text) {
  for (unsigned char c : text) {
    if (c != ' ' && c != '\t' && c != '\n' && c != '\r' && c != '\v' && c != '\f') {
      return false;
    }
  }
  return true;
}

void validate_series(const TokenScoreSeries& series) {
  for (std::size_t i = 0; i < series.positions.size(); ++i) {
    const PositionStats& p = series.positions[i];
    const std::string at = " at index " + std::to_string(i);
    if (p.token_index != i) throw ProtocolError("i", "token index out of order" + at);
    if (!std::isfinite(p.logp_observed)) throw ProtocolError("logp_observed", "logp_observed not finite" + at);
    if (!std::isfinite(p.mu_ref)) throw ProtocolError("mu_ref", "mu_ref not finite" + at);
    if (!std::isfinite(p.var_ref)) throw ProtocolError("var_ref", "var_ref not finite" + at);
    if (p.var_ref < 0.0) throw ProtocolError("var_ref", "var_ref negative" + at);
    if (p.logp_observed > 0.0) throw ProtocolError("logp_observed", "logp_observed positive" + at);
    if (p.mu_ref > 0.0) throw ProtocolError("mu_ref", "mu_ref positive" + at);
  }
  if (series.positions.size() > kMaxTokens) {
    throw ProtocolError("tokens", "more than " + std::to_string(kMaxTokens) + " tokens");
  }
}

std::string series_digest(const TokenScoreSeries& series) {
  Sha256 h;
  h.field(series.backend_id);
  h.field(series.truncated ? "1" : "0");
  for (const PositionStats& p : series.positions) {
    h.field(static_cast<double>(p.token_index));
    h.field(p.logp_observed);
    h.field(p.mu_ref);
    h.field(p.var_ref);
  }
  return h.hex_digest();
}

}  // namespace tdetect
