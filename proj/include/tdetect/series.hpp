#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tdetect {

/// Inputs are truncated to this many tokens before scoring.
inline constexpr std::size_t kMaxTokens = 512;

/// Per-position statistics of the scoring model, with moments taken under the
/// reference model's next-token distribution. All values are in nats.
struct PositionStats {
  std::size_t token_index = 0;
  double logp_observed = 0.0;
  double mu_ref = 0.0;
  double var_ref = 0.0;

  bool operator==(const PositionStats&) const = default;
};

struct TokenScoreSeries {
  std::vector<PositionStats> positions;
  std::string backend_id;
  bool truncated = false;

  std::size_t token_count() const { return positions.size(); }
  bool operator==(const TokenScoreSeries&) const = default;
};

/// Throws ProtocolError naming the first violated invariant.
void validate_series(const TokenScoreSeries& series);

/// Hex SHA-256 over the exact bit patterns of every position.
std::string series_digest(const TokenScoreSeries& series);

}  // namespace tdetect
