#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "tdetect/backend.hpp"
#include "tdetect/types.hpp"

namespace tdetect {

/// A base-method score plus what is needed to audit it.
struct TextScore {
  DetectionScore score;
  std::size_t token_count = 0;
  bool truncated = false;
  std::string series_digest;
};

/// Content-addressed store of TextScores: <dir>/<2 hex>/<sha256>.json.
/// Writes go through a temporary file and a rename, so concurrent writers of
/// the same key are safe.
class ScoreCache {
 public:
  explicit ScoreCache(std::filesystem::path dir);

  static std::string key(std::string_view text, std::string_view backend_id, Method method,
                         std::optional<double> nu);

  std::optional<TextScore> get(const std::string& key) const;
  void put(const std::string& key, const TextScore& value) const;

  std::filesystem::path path_for(const std::string& key) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

/// Scores single texts with a base method (gaussian / t_detect / binoculars),
/// consulting the cache when one is configured.
class Scorer {
 public:
  Scorer(const TokenStatsBackend& backend, std::optional<ScoreCache> cache = std::nullopt)
      : backend_(backend), cache_(std::move(cache)) {}

  TextScore score(std::string_view text, Method method, double nu) const;
  const TokenStatsBackend& backend() const { return backend_; }

 private:
  const TokenStatsBackend& backend_;
  std::optional<ScoreCache> cache_;
};

}  // namespace tdetect
