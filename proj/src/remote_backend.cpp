#include "tdetect/remote_backend.hpp"

#include <thread>

#include "httplib.h"
#include "tdetect/error.hpp"
#include "tdetect/kernels.hpp"

namespace tdetect {

namespace {

constexpr std::string_view kRoute = "/v1/token-stats";

double number_field(const nlohmann::json& token, const char* name, std::size_t index) {
  auto it = token.find(name);
  if (it == token.end() || !it->is_number()) {
    throw ProtocolError(name, std::string(name) + " missing or not a number at index " +
                                  std::to_string(index));
  }
  return it->get<double>();
}

}  // namespace

RemoteBackend::RemoteBackend(std::string endpoint, std::string model_scoring,
                             std::string model_reference, RemoteOptions options)
    : model_scoring_(std::move(model_scoring)),
      model_reference_(std::move(model_reference)),
      options_(options) {
  const auto scheme = endpoint.find("://");
  if (scheme == std::string::npos || endpoint.substr(0, scheme) != "http") {
    throw Error(ErrorCode::InvalidArgument, "endpoint must start with http://");
  }
  const auto slash = endpoint.find('/', scheme + 3);
  host_ = endpoint.substr(0, slash);
  std::string prefix = slash == std::string::npos ? "" : endpoint.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + std::string(kRoute);
  if (options_.max_attempts < 1) options_.max_attempts = 1;
  if (options_.max_in_flight < 1) options_.max_in_flight = 1;
}

nlohmann::json token_stats_request(std::string_view model_scoring,
                                   std::string_view model_reference, std::string_view text) {
  return {{"model_scoring", model_scoring},
          {"model_reference", model_reference},
          {"text", text},
          {"max_tokens", kMaxTokens}};
}

TokenScoreSeries parse_token_stats_response(std::string_view body, std::string backend_id) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError("body", std::string("response is not JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ProtocolError("body", "response is not a JSON object");
  auto tokens = doc.find("tokens");
  if (tokens == doc.end() || !tokens->is_array()) {
    throw ProtocolError("tokens", "tokens missing or not an array");
  }
  auto truncated = doc.find("truncated");
  if (truncated == doc.end() || !truncated->is_boolean()) {
    throw ProtocolError("truncated", "truncated missing or not a boolean");
  }
  if (auto declared = doc.find("token_count"); declared != doc.end()) {
    if (!declared->is_number_unsigned() || declared->get<std::size_t>() != tokens->size()) {
      throw ProtocolError("token_count", "token_count " + declared->dump() +
                                             " does not match " +
                                             std::to_string(tokens->size()) + " tokens");
    }
  }
  if (tokens->empty()) throw ProtocolError("tokens", "response has no tokens");

  TokenScoreSeries series;
  series.backend_id = std::move(backend_id);
  series.truncated = truncated->get<bool>();
  series.positions.reserve(tokens->size());
  for (std::size_t k = 0; k < tokens->size(); ++k) {
    const auto& t = (*tokens)[k];
    if (!t.is_object()) throw ProtocolError("tokens", "token " + std::to_string(k) + " is not an object");
    auto i = t.find("i");
    if (i == t.end() || !i->is_number_integer()) {
      throw ProtocolError("i", "i missing or not an integer at index " + std::to_string(k));
    }
    if (i->get<long long>() != static_cast<long long>(k)) {
      throw ProtocolError("i", "i = " + i->dump() + " at index " + std::to_string(k));
    }
    series.positions.push_back({k, number_field(t, "logp_observed", k),
                                number_field(t, "mu_ref", k), number_field(t, "var_ref", k)});
  }
  validate_series(series);
  return series;
}

TokenScoreSeries RemoteBackend::score_text(std::string_view text) const {
  if (is_blank(text)) throw Error(ErrorCode::EmptyInput, "text is empty or whitespace-only");
  const std::string body = token_stats_request(model_scoring_, model_reference_, text).dump();
  const auto seconds = [](std::chrono::milliseconds ms) {
    return std::make_pair(ms.count() / 1000, (ms.count() % 1000) * 1000);
  };
  std::string last_error;
  std::optional<int> last_status;
  for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    if (attempt > 1) std::this_thread::sleep_for(options_.retry_backoff * (attempt - 1));
    httplib::Client client(host_);
    const auto [sec, usec] = seconds(options_.timeout);
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
    auto res = client.Post(path_, body, "application/json");
    if (!res) {
      last_error = "request failed: " + httplib::to_string(res.error());
      last_status.reset();
      continue;
    }
    if (res->status == 200) return parse_token_stats_response(res->body, backend_id());
    last_status = res->status;
    last_error = "HTTP " + std::to_string(res->status);
    if (res->status < 500) {
      throw BackendError(last_error + " from " + host_ + path_, attempt, false, last_status);
    }
  }
  throw BackendError(last_error + " from " + host_ + path_ + " after " +
                         std::to_string(options_.max_attempts) + " attempts",
                     options_.max_attempts, true, last_status);
}

std::vector<TokenScoreSeries> RemoteBackend::score_many(std::span<const std::string> texts) const {
  std::vector<TokenScoreSeries> out(texts.size());
  kernels::parallel_for(texts.size(), options_.max_in_flight,
                        [&](std::size_t i) { out[i] = score_text(texts[i]); });
  return out;
}

BackendDescriptor RemoteBackend::descriptor() const {
  return {BackendKind::remote, model_scoring_ + "/" + model_reference_,
          options_.vocabulary_size, false};
}

std::string RemoteBackend::backend_id() const {
  return "remote:" + host_ + ";score=" + model_scoring_ + ";ref=" + model_reference_;
}

}  // namespace tdetect
