#include "tdetect/fixture.hpp"

#include <cstdio>
#include <map>
#include <sstream>

#include "tdetect/random.hpp"
#include "tdetect/resources.hpp"

namespace tdetect {

namespace {

std::map<std::string, std::vector<std::string>> held_out_sentences() {
  std::map<std::string, std::vector<std::string>> out;
  std::istringstream in{std::string(resources::fixture_human())};
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    out[line.substr(0, tab)].push_back(line.substr(tab + 1));
  }
  return out;
}

std::string first_words(const std::string& sentence, int words) {
  std::size_t pos = 0;
  for (int w = 0; w < words; ++w) {
    pos = sentence.find(' ', pos);
    if (pos == std::string::npos) return sentence + " ";
    ++pos;
  }
  return sentence.substr(0, pos);
}

}  // namespace

LabeledCorpus synthetic_fixture_corpus(const ToyBackend& backend, const FixtureOptions& options) {
  LabeledCorpus corpus;
  for (const auto& [domain, sentences] : held_out_sentences()) {
    Rng rng(derive_seed(options.seed, domain));
    for (std::size_t k = 0; k < options.per_domain_per_label; ++k) {
      char suffix[16];
      std::snprintf(suffix, sizeof suffix, "%03zu", k);

      std::string human;
      const std::size_t count = 2 + rng.index(2);
      for (std::size_t s = 0; s < count; ++s) {
        if (!human.empty()) human += ' ';
        human += sentences[rng.index(sentences.size())];
      }
      corpus.push_back({domain + "-human-" + suffix, human, Label::human, domain, "none", "human"});

      const std::string prompt = first_words(sentences[rng.index(sentences.size())], 2);
      const std::size_t length = human.size() > prompt.size() ? human.size() - prompt.size() : 80;
      const std::uint64_t sample_seed = rng.next();
      std::string machine =
          sample_text(backend.scoring(), prompt, length, options.temperature, sample_seed);
      corpus.push_back({domain + "-machine-" + suffix, std::move(machine), Label::machine, domain, "none",
                        "toy-ngram"});
    }
  }
  return corpus;
}

}  // namespace tdetect
