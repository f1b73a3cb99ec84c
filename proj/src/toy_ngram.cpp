#include "tdetect/toy_ngram.hpp"

#include <cmath>
#include <sstream>

#include "tdetect/error.hpp"
#include "tdetect/random.hpp"
#include "tdetect/resources.hpp"
#include "tdetect/utf8.hpp"

namespace tdetect {

namespace {

constexpr int kMaxOrder = 4;
constexpr int kKeyBits = 21;

}  // namespace

Vocabulary::Vocabulary(std::vector<char32_t> symbols, bool with_oov)
    : symbols_(std::move(symbols)), with_oov_(with_oov) {
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (!index_.emplace(symbols_[i], static_cast<TokenId>(i)).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate vocabulary symbol");
    }
  }
  if (size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "vocabulary needs at least 2 tokens");
  }
  if (size() >= (1u << kKeyBits) - 1) {
    throw Error(ErrorCode::InvalidArgument, "vocabulary too large");
  }
}

Vocabulary Vocabulary::printable_ascii() {
  std::vector<char32_t> symbols;
  for (char32_t c = 0x20; c <= 0x7E; ++c) symbols.push_back(c);
  symbols.push_back(U'\n');
  return Vocabulary(std::move(symbols), true);
}

TokenId Vocabulary::id_of(char32_t cp) const {
  if (auto it = index_.find(cp); it != index_.end()) return it->second;
  if (with_oov_) return oov_id();
  throw Error(ErrorCode::InvalidArgument, "code point outside vocabulary");
}

std::vector<TokenId> Vocabulary::tokenize(std::string_view text) const {
  const std::u32string cps = utf8::decode(text);
  std::vector<TokenId> ids;
  ids.reserve(cps.size());
  for (char32_t cp : cps) ids.push_back(id_of(cp));
  return ids;
}

std::uint64_t NgramModel::context_key(std::span<const TokenId> history) const {
  const auto bos = static_cast<std::uint64_t>(vocabulary_.size());
  const std::size_t width = static_cast<std::size_t>(order_ - 1);
  std::uint64_t key = 0;
  for (std::size_t k = 0; k < width; ++k) {
    // Slot k holds the token k+1 positions back.
    const std::uint64_t id =
        k < history.size() ? history[history.size() - 1 - k] : bos;
    key |= id << (kKeyBits * k);
  }
  return key;
}

NgramModel NgramModel::train(std::span<const std::string> corpus, int order,
                             double smoothing, Vocabulary vocabulary) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "training corpus is empty");
  if (order < 1 || order > kMaxOrder) {
    throw Error(ErrorCode::InvalidArgument, "n-gram order must be in [1, 4]");
  }
  if (!(smoothing > 0.0) || !std::isfinite(smoothing)) {
    throw Error(ErrorCode::InvalidArgument, "smoothing must be positive");
  }
  NgramModel model(order, smoothing, std::move(vocabulary));
  const std::size_t v = model.vocabulary_.size();
  for (const std::string& line : corpus) {
    const std::vector<TokenId> tokens = model.vocabulary_.tokenize(line);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const auto key = model.context_key(std::span(tokens).first(i));
      auto& ctx = model.contexts_[key];
      if (ctx.counts.empty()) ctx.counts.assign(v, 0);
      ++ctx.counts[tokens[i]];
      ++ctx.total;
    }
  }
  return model;
}

void NgramModel::distribution(std::span<const TokenId> history,
                              std::span<double> out) const {
  const std::size_t v = vocabulary_.size();
  if (out.size() != v) throw Error(ErrorCode::InvalidArgument, "distribution size mismatch");
  const double kv = smoothing_ * static_cast<double>(v);
  auto it = contexts_.find(context_key(history));
  if (it == contexts_.end()) {
    const double p = smoothing_ / kv;
    for (double& x : out) x = p;
    return;
  }
  const double denom = static_cast<double>(it->second.total) + kv;
  for (std::size_t t = 0; t < v; ++t) {
    out[t] = (static_cast<double>(it->second.counts[t]) + smoothing_) / denom;
  }
}

double NgramModel::probability(std::span<const TokenId> history, TokenId token) const {
  std::vector<double> dist(vocabulary_.size());
  distribution(history, dist);
  return dist.at(token);
}

std::string NgramModel::name() const {
  std::ostringstream os;
  os << "ngram" << order_ << "-k" << smoothing_;
  return os.str();
}

Moments reference_moments(std::span<const double> p_reference,
                          std::span<const double> logp_scoring) {
  long double mean = 0.0L;
  for (std::size_t t = 0; t < p_reference.size(); ++t) {
    mean += static_cast<long double>(p_reference[t]) * logp_scoring[t];
  }
  // Centred second pass keeps the variance non-negative.
  long double var = 0.0L;
  for (std::size_t t = 0; t < p_reference.size(); ++t) {
    const long double dev = logp_scoring[t] - mean;
    var += static_cast<long double>(p_reference[t]) * dev * dev;
  }
  return {static_cast<double>(mean), static_cast<double>(var)};
}

ToyBackend::ToyBackend(NgramModel scoring, NgramModel reference)
    : scoring_(std::move(scoring)), reference_(std::move(reference)) {
  if (!(scoring_.vocabulary() == reference_.vocabulary())) {
    throw Error(ErrorCode::InvalidArgument,
                "scoring and reference models must share a tokenizer");
  }
}

const ToyBackend& ToyBackend::builtin() {
  static const ToyBackend backend = [] {
    const auto corpus = fixture_training_corpus();
    return ToyBackend(NgramModel::train(corpus, 2, 0.05, Vocabulary::printable_ascii()),
                      NgramModel::train(corpus, 2, 1.0, Vocabulary::printable_ascii()));
  }();
  return backend;
}

TokenScoreSeries ToyBackend::score_text(std::string_view text) const {
  if (is_blank(text)) throw Error(ErrorCode::EmptyInput, "text is empty or whitespace-only");
  std::vector<TokenId> tokens = scoring_.vocabulary().tokenize(text);
  TokenScoreSeries series;
  series.backend_id = backend_id();
  if (tokens.size() > kMaxTokens) {
    tokens.resize(kMaxTokens);
    series.truncated = true;
  }
  const std::size_t v = scoring_.vocabulary().size();
  std::vector<double> p_ref(v);
  std::vector<double> p_score(v);
  std::vector<double> logp_score(v);
  series.positions.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto history = std::span<const TokenId>(tokens).first(i);
    reference_.distribution(history, p_ref);
    scoring_.distribution(history, p_score);
    for (std::size_t t = 0; t < v; ++t) logp_score[t] = std::log(p_score[t]);
    const Moments m = reference_moments(p_ref, logp_score);
    series.positions.push_back({i, logp_score[tokens[i]], m.mean, m.variance});
  }
  return series;
}

BackendDescriptor ToyBackend::descriptor() const {
  return {BackendKind::toy_ngram, scoring_.name() + "/" + reference_.name(),
          scoring_.vocabulary().size(), true};
}

std::string ToyBackend::backend_id() const {
  return "toy_ngram:score=" + scoring_.name() + ";ref=" + reference_.name();
}

std::string sample_text(const NgramModel& model, std::string_view prompt,
                        std::size_t length, double temperature, std::uint64_t seed) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
  const Vocabulary& vocab = model.vocabulary();
  std::vector<TokenId> history = vocab.tokenize(prompt);
  std::string out(prompt);
  Rng rng(seed);
  std::vector<double> dist(vocab.size());
  const TokenId space = vocab.id_of(U' ');
  for (std::size_t n = 0; n < length; ++n) {
    model.distribution(history, dist);
    double total = 0.0;
    for (TokenId t = 0; t < dist.size(); ++t) {
      const bool banned = (vocab.has_oov() && t == vocab.oov_id()) ||
                          vocab.symbol(t) == U'\n' ||
                          (t == space && !history.empty() && history.back() == space);
      dist[t] = banned ? 0.0 : std::pow(dist[t], 1.0 / temperature);
      total += dist[t];
    }
    double u = rng.uniform() * total;
    TokenId pick = 0;
    for (TokenId t = 0; t < dist.size(); ++t) {
      if (dist[t] == 0.0) continue;
      pick = t;
      if (u < dist[t]) break;
      u -= dist[t];
    }
    history.push_back(pick);
    utf8::append(out, vocab.symbol(pick));
  }
  return out;
}

std::vector<std::string> fixture_training_corpus() {
  std::vector<std::string> lines;
  std::istringstream in{std::string(resources::fixture_train())};
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace tdetect
