#include "tdetect/cache.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "tdetect/error.hpp"
#include "tdetect/hash.hpp"
#include "tdetect/scoring.hpp"

namespace tdetect {

ScoreCache::ScoreCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create cache directory " + dir_.string());
}

std::string ScoreCache::key(std::string_view text, std::string_view backend_id, Method method,
                            std::optional<double> nu) {
  Sha256 h;
  h.field(text).field(backend_id).field(to_string(method));
  h.field(nu ? *nu : 0.0);
  return h.hex_digest();
}

std::filesystem::path ScoreCache::path_for(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<TextScore> ScoreCache::get(const std::string& key) const {
  std::ifstream in(path_for(key));
  if (!in) return std::nullopt;
  try {
    const auto doc = nlohmann::json::parse(in);
    if (doc.at("key").get<std::string>() != key) return std::nullopt;
    TextScore out;
    const auto method = parse_method(doc.at("method").get<std::string>());
    if (!method) return std::nullopt;
    out.score.method = *method;
    out.score.value = doc.at("value").get<double>();
    if (doc.contains("nu")) out.score.nu = doc.at("nu").get<double>();
    out.token_count = doc.at("token_count").get<std::size_t>();
    out.truncated = doc.at("truncated").get<bool>();
    out.series_digest = doc.at("series_digest").get<std::string>();
    return out;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;  // unreadable entries are recomputed and overwritten
  }
}

void ScoreCache::put(const std::string& key, const TextScore& value) const {
  nlohmann::json doc = {{"key", key},
                        {"method", to_string(value.score.method)},
                        {"value", value.score.value},
                        {"token_count", value.token_count},
                        {"truncated", value.truncated},
                        {"series_digest", value.series_digest}};
  if (value.score.nu) doc["nu"] = *value.score.nu;
  const auto target = path_for(key);
  std::filesystem::create_directories(target.parent_path());
  std::ostringstream suffix;
  suffix << ".tmp." << std::this_thread::get_id();
  auto tmp = target;
  tmp += suffix.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write cache entry " + tmp.string());
    out << doc.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, target);
}

TextScore Scorer::score(std::string_view text, Method method, double nu) const {
  const std::optional<double> nu_key =
      method == Method::t_detect ? std::optional<double>(nu) : std::nullopt;
  std::string key;
  if (cache_) {
    key = ScoreCache::key(text, backend_.backend_id(), method, nu_key);
    if (auto hit = cache_->get(key)) return *hit;
  }
  const TokenScoreSeries series = backend_.score_text(text);
  TextScore out;
  out.score = score_series(series, method, nu);
  out.token_count = series.token_count();
  out.truncated = series.truncated;
  out.series_digest = series_digest(series);
  if (cache_) cache_->put(key, out);
  return out;
}

}  // namespace tdetect
