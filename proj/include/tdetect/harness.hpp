#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tdetect/attacks.hpp"
#include "tdetect/backend.hpp"
#include "tdetect/combiner.hpp"
#include "tdetect/content.hpp"
#include "tdetect/corpus.hpp"
#include "tdetect/metrics.hpp"

namespace tdetect {

struct SplitSpec {
  double dev_fraction = 0.3;
  std::uint64_t seed = 0;
  /// Subset of {label, domain, attack, generator}.
  std::vector<std::string> stratify_by = {"label", "domain"};
};

struct Split {
  std::vector<std::size_t> dev;   // ascending record indices
  std::vector<std::size_t> eval;  // ascending record indices
  std::vector<std::string> warnings;
};

/// Per stratum (in sorted key order) a seeded shuffle sends
/// round(dev_fraction * n), clamped to [1, n - 1], records to dev. A
/// single-record stratum goes to eval with a warning.
Split split_corpus(const LabeledCorpus& corpus, const SplitSpec& spec);

struct DetectorConfig {
  Method method = Method::t_detect;
  double nu = kDefaultNu;
  /// Base method scored on both views when method == ct.
  Method ct_base = Method::t_detect;
  ContentExtractionConfig content = ContentExtractionConfig::defaults();
  CombinerHyper combiner;
  int jobs = 1;
  std::optional<std::filesystem::path> cache_dir;
  /// Corpus fields that define the per-group report rows.
  std::vector<std::string> group_by = {"domain"};
  /// Run normalize_defense on every text before scoring.
  bool defend = false;

  void validate() const;
};

/// Seconds from an arbitrary origin; injectable so timing can be tested.
using Clock = std::function<double()>;
Clock steady_clock();

struct TimingStats {
  double mean_seconds = 0.0;
  double std_seconds = 0.0;  // population
  double throughput = 0.0;   // texts per second of scoring time
};

/// Throws Error(InsufficientData) for fewer than 2 durations.
TimingStats timing_stats(std::span<const double> durations);

/// Everything the harness records for one text.
struct ScoredRecord {
  double s_t = 0.0;  // oriented
  double s_c = 0.0;  // oriented; only for ct
  bool content_fallback = false;
  std::size_t token_count = 0;
  bool truncated = false;
  double seconds = 0.0;
};

/// A detector fitted on clean dev data: combiner (ct only) and F1 threshold.
struct FittedDetector {
  DetectorConfig config;
  std::optional<CombinerModel> combiner;
  ThresholdFit threshold;

  double decision(const ScoredRecord& r) const;
};

/// Scores texts in parallel (config.jobs workers), timing each text around
/// its scoring calls only.
std::vector<ScoredRecord> score_texts(std::span<const std::string> texts,
                                      const TokenStatsBackend& backend,
                                      const DetectorConfig& config, const Clock& clock = steady_clock());

FittedDetector fit_detector(std::span<const ScoredRecord> dev, std::span<const Label> labels,
                            const DetectorConfig& config);

struct MetricsRow {
  std::string group;  // "field=value" or "ALL"
  std::size_t n = 0;
  double auroc = 0.0;
  double f1 = 0.0;
  double tpr_at_5fpr = 0.0;
  bool degenerate = false;
};

struct MetricsReport {
  std::string method;
  std::optional<double> nu;
  std::string ct_base;
  std::string backend_id;
  SplitSpec split;
  std::size_t n_dev = 0;
  std::size_t n_eval = 0;
  ThresholdFit threshold;
  std::optional<CombinerModel> combiner;
  std::vector<MetricsRow> rows;
  MetricsRow all;
  std::vector<std::string> warnings;
  TimingStats timing;

  nlohmann::json to_json() const;
  std::string to_csv() const;
  std::string to_markdown() const;
};

/// Split, score (cache-aware), fit threshold (and combiner) on dev, report
/// AUROC / F1 / TPR@5%FPR on eval per group and overall. Groups with a single
/// class are flagged degenerate; a record is left out of ALL when all of its
/// groups are degenerate.
MetricsReport run_benchmark(const LabeledCorpus& corpus, const TokenStatsBackend& backend,
                            const DetectorConfig& config, const SplitSpec& split,
                            const Clock& clock = steady_clock());

struct VulnerabilityRow {
  std::string attack;
  double failure_rate = 0.0;
  std::size_t n_texts = 0;
  double threshold = 0.0;
};

/// Fraction of texts whose decision value falls below the threshold, i.e.
/// machine texts classified human. Throws Error(EmptyCorpus) for no texts.
VulnerabilityRow failure_rate(const std::function<double(const std::string&)>& detector,
                              std::span<const std::string> machine_texts,
                              const std::optional<AttackSpec>& attack, double threshold);

struct VulnerabilityReport {
  double threshold = 0.0;
  VulnerabilityRow baseline;         // attack "none"
  std::vector<VulnerabilityRow> rows;  // failure rate descending, then name
  std::vector<std::string> not_implemented = {"paraphrase"};
  /// Attacked copies of every record, ids suffixed with "#<attack>".
  LabeledCorpus attacked;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// One entry of an attack sweep; nullopt is the identity attack "none".
using SweepEntry = std::optional<AttackKind>;

/// Fits the detector on the clean dev split, then measures failure rates of
/// each attack on the eval split's machine texts.
VulnerabilityReport run_vulnerability(const LabeledCorpus& corpus, const TokenStatsBackend& backend,
                                      const DetectorConfig& config, const SplitSpec& split,
                                      std::span<const SweepEntry> attacks, double intensity,
                                      std::uint64_t seed);

/// JSON number, or "inf" / "-inf" for the sentinel thresholds.
nlohmann::json threshold_to_json(double threshold);

}  // namespace tdetect
