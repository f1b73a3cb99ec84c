#pragma once

#include <chrono>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "tdetect/backend.hpp"

namespace tdetect {

struct RemoteOptions {
  std::chrono::milliseconds timeout{30000};
  /// Attempts per request; only transport failures and 5xx are retried.
  int max_attempts = 3;
  std::chrono::milliseconds retry_backoff{200};
  /// Upper bound on concurrent requests issued by score_many.
  int max_in_flight = 8;
  std::size_t vocabulary_size = 2;
};

/// Client for POST /v1/token-stats. The server computes the per-position
/// moments; responses are validated and never repaired.
class RemoteBackend final : public TokenStatsBackend {
 public:
  /// endpoint is "http://host:port" with an optional path prefix.
  RemoteBackend(std::string endpoint, std::string model_scoring,
                std::string model_reference, RemoteOptions options = {});

  TokenScoreSeries score_text(std::string_view text) const override;
  BackendDescriptor descriptor() const override;
  std::string backend_id() const override;

  /// Results in input order; the first failure is rethrown after all
  /// in-flight requests finish.
  std::vector<TokenScoreSeries> score_many(std::span<const std::string> texts) const;

 private:
  std::string host_;
  std::string path_;
  std::string model_scoring_;
  std::string model_reference_;
  RemoteOptions options_;
};

nlohmann::json token_stats_request(std::string_view model_scoring,
                                   std::string_view model_reference, std::string_view text);

/// Parses and validates a response body. Throws ProtocolError naming the
/// offending field.
TokenScoreSeries parse_token_stats_response(std::string_view body, std::string backend_id);

}  // namespace tdetect
