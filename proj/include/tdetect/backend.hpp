#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tdetect/series.hpp"

namespace tdetect {

enum class BackendKind { toy_ngram, remote };

std::string_view to_string(BackendKind kind);

struct BackendDescriptor {
  BackendKind kind = BackendKind::toy_ngram;
  std::string model_name;
  std::size_t vocabulary_size = 0;
  bool deterministic = true;
};

/// A scoring/reference model pair that turns text into per-token statistics.
/// Implementations are immutable after construction and may be shared
/// between threads.
class TokenStatsBackend {
 public:
  virtual ~TokenStatsBackend() = default;

  /// Throws Error(EmptyInput) for empty or whitespace-only text.
  virtual TokenScoreSeries score_text(std::string_view text) const = 0;

  virtual BackendDescriptor descriptor() const = 0;

  /// Identifies backend and model pair; part of every cache key.
  virtual std::string backend_id() const = 0;
};

/// True when text has no non-whitespace byte.
bool is_blank(std::string_view text);

}  // namespace tdetect
