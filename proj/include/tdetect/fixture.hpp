#pragma once

#include <cstdint>

#include "tdetect/corpus.hpp"
#include "tdetect/toy_ngram.hpp"

namespace tdetect {

struct FixtureOptions {
  std::size_t per_domain_per_label = 40;
  std::uint64_t seed = 7;
  double temperature = 0.8;
};

/// Labeled corpus over the news / fiction / science domains. Human texts join
/// two or three held-out sentences; machine texts are sampled from the
/// backend's scoring model after a short prompt taken from a held-out
/// sentence of the same domain, to a similar length. Every text is
/// printable ASCII. Ids are "<domain>-<label>-<nnn>".
LabeledCorpus synthetic_fixture_corpus(const ToyBackend& backend, const FixtureOptions& options = {});

}  // namespace tdetect
