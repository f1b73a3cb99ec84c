#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tdetect/backend.hpp"

namespace tdetect {

using TokenId = std::uint32_t;

/// Character vocabulary: one token per listed code point, plus an optional
/// out-of-vocabulary bucket that absorbs every other code point.
class Vocabulary {
 public:
  Vocabulary(std::vector<char32_t> symbols, bool with_oov);

  /// Printable ASCII (0x20-0x7E), newline, and the OOV bucket: 97 tokens.
  static Vocabulary printable_ascii();

  std::size_t size() const { return symbols_.size() + (with_oov_ ? 1 : 0); }
  bool has_oov() const { return with_oov_; }
  TokenId oov_id() const { return static_cast<TokenId>(symbols_.size()); }

  /// Throws Error(InvalidArgument) for an unknown code point without OOV.
  TokenId id_of(char32_t cp) const;
  std::vector<TokenId> tokenize(std::string_view utf8) const;
  /// Code point of a non-OOV token.
  char32_t symbol(TokenId id) const { return symbols_.at(id); }

  bool operator==(const Vocabulary& other) const {
    return symbols_ == other.symbols_ && with_oov_ == other.with_oov_;
  }

 private:
  std::vector<char32_t> symbols_;
  bool with_oov_;
  std::unordered_map<char32_t, TokenId> index_;
};

/// Laplace-smoothed character n-gram model. Each training string is padded
/// on the left with order-1 begin markers; there is no end marker.
class NgramModel {
 public:
  /// order in [1, 4]; smoothing > 0. Throws Error(EmptyCorpus) when corpus
  /// is empty.
  static NgramModel train(std::span<const std::string> corpus, int order,
                          double smoothing, Vocabulary vocabulary);

  int order() const { return order_; }
  double smoothing() const { return smoothing_; }
  const Vocabulary& vocabulary() const { return vocabulary_; }

  /// The next-token distribution after `history` (only the last order-1
  /// tokens are used; shorter histories are begin-padded). out.size() must
  /// equal vocabulary().size().
  void distribution(std::span<const TokenId> history, std::span<double> out) const;
  double probability(std::span<const TokenId> history, TokenId token) const;

  /// Short description, e.g. "ngram3-k0.5".
  std::string name() const;

 private:
  struct ContextCounts {
    std::uint64_t total = 0;
    std::vector<std::uint32_t> counts;
  };

  NgramModel(int order, double smoothing, Vocabulary vocabulary)
      : order_(order), smoothing_(smoothing), vocabulary_(std::move(vocabulary)) {}

  std::uint64_t context_key(std::span<const TokenId> history) const;

  int order_;
  double smoothing_;
  Vocabulary vocabulary_;
  std::unordered_map<std::uint64_t, ContextCounts> contexts_;
};

/// Expected scoring log-probability and its variance under a reference
/// distribution, accumulated left to right in long double.
struct Moments {
  double mean;
  double variance;
};
Moments reference_moments(std::span<const double> p_reference,
                          std::span<const double> logp_scoring);

/// Hermetic backend: a scoring and a reference n-gram model over one shared
/// character vocabulary. Moments are exact sums over the whole vocabulary.
class ToyBackend final : public TokenStatsBackend {
 public:
  /// Throws Error(InvalidArgument) unless both models share a vocabulary.
  ToyBackend(NgramModel scoring, NgramModel reference);

  /// scoring: order 2, k = 0.05; reference: order 2, k = 1; both trained on
  /// the embedded fixture text.
  static const ToyBackend& builtin();

  TokenScoreSeries score_text(std::string_view text) const override;
  BackendDescriptor descriptor() const override;
  std::string backend_id() const override;

  const NgramModel& scoring() const { return scoring_; }
  const NgramModel& reference() const { return reference_; }

 private:
  NgramModel scoring_;
  NgramModel reference_;
};

/// Temperature sampling from a model. OOV and newline tokens are never
/// emitted and a space never follows a space, so output is single-spaced
/// printable ASCII for printable-ASCII vocabularies.
std::string sample_text(const NgramModel& model, std::string_view prompt,
                        std::size_t length, double temperature, std::uint64_t seed);

/// Embedded training text, one paragraph per element.
std::vector<std::string> fixture_training_corpus();

}  // namespace tdetect
