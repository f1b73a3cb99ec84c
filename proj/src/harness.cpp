#include "tdetect/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "tdetect/cache.hpp"
#include "tdetect/error.hpp"
#include "tdetect/kernels.hpp"
#include "tdetect/random.hpp"
#include "tdetect/scoring.hpp"

namespace tdetect {

namespace {

const std::string& field_of(const CorpusRecord& r, const std::string& field) {
  if (field == "label") {
    static const std::string human = "human", machine = "machine";
    return r.label == Label::machine ? machine : human;
  }
  if (field == "domain") return r.domain;
  if (field == "attack") return r.attack;
  if (field == "generator") return r.generator;
  throw Error(ErrorCode::InvalidArgument, "unknown corpus field '" + field + "'");
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

}  // namespace

Split split_corpus(const LabeledCorpus& corpus, const SplitSpec& spec) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "corpus is empty");
  if (!(spec.dev_fraction > 0.0 && spec.dev_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "dev_fraction must lie in (0, 1)");
  }
  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::string key;
    for (const auto& f : spec.stratify_by) key += f + "=" + field_of(corpus[i], f) + ";";
    strata[key].push_back(i);
  }
  Split out;
  for (auto& [key, members] : strata) {
    if (members.size() < 2) {
      out.warnings.push_back("stratum '" + key + "' has one record; assigned to eval");
      out.eval.insert(out.eval.end(), members.begin(), members.end());
      continue;
    }
    Rng rng(derive_seed(spec.seed, key));
    for (std::size_t i = members.size() - 1; i > 0; --i) {
      std::swap(members[i], members[rng.index(i + 1)]);
    }
    const auto n = static_cast<long long>(members.size());
    const long long k = std::clamp(std::llround(spec.dev_fraction * static_cast<double>(n)), 1LL, n - 1);
    out.dev.insert(out.dev.end(), members.begin(), members.begin() + k);
    out.eval.insert(out.eval.end(), members.begin() + k, members.end());
  }
  std::sort(out.dev.begin(), out.dev.end());
  std::sort(out.eval.begin(), out.eval.end());
  return out;
}

void DetectorConfig::validate() const {
  const bool uses_nu = method == Method::t_detect || (method == Method::ct && ct_base == Method::t_detect);
  if (uses_nu && !(nu > 2.0)) throw Error(ErrorCode::InvalidNu, "nu must exceed 2");
  if (ct_base == Method::ct) throw Error(ErrorCode::InvalidArgument, "ct cannot be its own base method");
  if (jobs < 1) throw Error(ErrorCode::InvalidArgument, "jobs must be at least 1");
  if (method == Method::ct) content.validate();
}

Clock steady_clock() {
  return [] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
  };
}

TimingStats timing_stats(std::span<const double> durations) {
  if (durations.size() < 2) throw Error(ErrorCode::InsufficientData, "timing needs at least 2 samples");
  const auto n = static_cast<double>(durations.size());
  double total = 0.0;
  for (double d : durations) total += d;
  TimingStats t;
  t.mean_seconds = total / n;
  double m2 = 0.0;
  for (double d : durations) m2 += (d - t.mean_seconds) * (d - t.mean_seconds);
  t.std_seconds = std::sqrt(m2 / n);
  t.throughput = total > 0.0 ? n / total : 0.0;
  return t;
}

std::vector<ScoredRecord> score_texts(std::span<const std::string> texts, const TokenStatsBackend& backend,
                                      const DetectorConfig& config, const Clock& clock) {
  config.validate();
  std::optional<ScoreCache> cache;
  if (config.cache_dir) cache.emplace(*config.cache_dir);
  const Scorer scorer(backend, std::move(cache));
  const Method base = config.method == Method::ct ? config.ct_base : config.method;

  std::vector<ScoredRecord> out(texts.size());
  kernels::parallel_for(texts.size(), config.jobs, [&](std::size_t i) {
    ScoredRecord& r = out[i];
    const double start = clock();
    const std::string text = config.defend ? normalize_defense(texts[i]) : texts[i];
    const TextScore t = scorer.score(text, base, config.nu);
    r.s_t = decision_value(t.score);
    r.token_count = t.token_count;
    r.truncated = t.truncated;
    if (config.method == Method::ct) {
      std::string content;
      try {
        content = extract_content(text, config.content);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyContent) throw;
        r.content_fallback = true;
      }
      r.s_c = r.content_fallback ? r.s_t : decision_value(scorer.score(content, base, config.nu).score);
    }
    r.seconds = clock() - start;
  });
  return out;
}

double FittedDetector::decision(const ScoredRecord& r) const {
  if (config.method != Method::ct) return r.s_t;
  return r.content_fallback ? combiner->predict_text_only(r.s_t) : combiner->predict(r.s_t, r.s_c);
}

FittedDetector fit_detector(std::span<const ScoredRecord> dev, std::span<const Label> labels,
                            const DetectorConfig& config) {
  FittedDetector fitted;
  fitted.config = config;
  if (config.method == Method::ct) {
    std::vector<LabeledPair> rows;
    for (std::size_t i = 0; i < dev.size(); ++i) {
      if (!dev[i].content_fallback) rows.push_back({dev[i].s_t, dev[i].s_c, labels[i]});
    }
    fitted.combiner = fit_combiner(rows, config.combiner);
  }
  std::vector<ScoredLabel> scored(dev.size());
  for (std::size_t i = 0; i < dev.size(); ++i) scored[i] = {fitted.decision(dev[i]), labels[i]};
  fitted.threshold = fit_threshold_f1(scored);
  return fitted;
}

nlohmann::json threshold_to_json(double threshold) {
  if (std::isinf(threshold)) return threshold > 0 ? "inf" : "-inf";
  return threshold;
}

namespace {

MetricsRow metrics_row(std::string group, std::span<const ScoredLabel> scores, double threshold) {
  MetricsRow row;
  row.group = std::move(group);
  row.n = scores.size();
  const bool has_machine = std::any_of(scores.begin(), scores.end(),
                                       [](const ScoredLabel& s) { return s.label == Label::machine; });
  const bool has_human = std::any_of(scores.begin(), scores.end(),
                                     [](const ScoredLabel& s) { return s.label == Label::human; });
  if (!has_machine || !has_human) {
    row.degenerate = true;
    return row;
  }
  row.auroc = auroc(scores);
  row.f1 = f1(confusion_at(scores, threshold));
  row.tpr_at_5fpr = tpr_at_fpr(scores, 0.05);
  return row;
}

nlohmann::json row_json(const MetricsRow& r) {
  return {{"group", r.group},
          {"n", r.n},
          {"auroc", r.auroc},
          {"f1", r.f1},
          {"tpr_at_5fpr", r.tpr_at_5fpr},
          {"degenerate", r.degenerate}};
}

}  // namespace

MetricsReport run_benchmark(const LabeledCorpus& corpus, const TokenStatsBackend& backend,
                            const DetectorConfig& config, const SplitSpec& split, const Clock& clock) {
  config.validate();
  const Split parts = split_corpus(corpus, split);

  std::vector<std::string> texts(corpus.size());
  std::transform(corpus.begin(), corpus.end(), texts.begin(), [](const CorpusRecord& r) { return r.text; });
  const std::vector<ScoredRecord> scored = score_texts(texts, backend, config, clock);

  std::vector<ScoredRecord> dev;
  std::vector<Label> dev_labels;
  for (std::size_t i : parts.dev) {
    dev.push_back(scored[i]);
    dev_labels.push_back(corpus[i].label);
  }
  const FittedDetector fitted = fit_detector(dev, dev_labels, config);

  MetricsReport report;
  report.method = std::string(to_string(config.method));
  const Method base = config.method == Method::ct ? config.ct_base : config.method;
  if (base == Method::t_detect) report.nu = config.nu;
  if (config.method == Method::ct) report.ct_base = std::string(to_string(config.ct_base));
  report.backend_id = backend.backend_id();
  report.split = split;
  report.n_dev = parts.dev.size();
  report.n_eval = parts.eval.size();
  report.threshold = fitted.threshold;
  report.combiner = fitted.combiner;
  report.warnings = parts.warnings;

  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i : parts.eval) {
    for (const auto& f : config.group_by) groups[f + "=" + field_of(corpus[i], f)].push_back(i);
  }
  // A record leaves ALL only when every group it belongs to is degenerate;
  // with several group_by fields another field may still place it usefully.
  std::set<std::size_t> kept;
  for (const auto& [key, members] : groups) {
    std::vector<ScoredLabel> s;
    for (std::size_t i : members) s.push_back({fitted.decision(scored[i]), corpus[i].label});
    MetricsRow row = metrics_row(key, s, fitted.threshold.threshold);
    if (row.degenerate) {
      report.warnings.push_back("group '" + key + "' has a single class; excluded from ALL");
    } else {
      kept.insert(members.begin(), members.end());
    }
    report.rows.push_back(std::move(row));
  }
  std::vector<ScoredLabel> all;
  for (std::size_t i : parts.eval) {
    if (kept.count(i) || config.group_by.empty()) all.push_back({fitted.decision(scored[i]), corpus[i].label});
  }
  report.all = metrics_row("ALL", all, fitted.threshold.threshold);
  if (report.all.degenerate) report.warnings.push_back("ALL has a single class");

  std::vector<double> seconds(scored.size());
  std::transform(scored.begin(), scored.end(), seconds.begin(), [](const ScoredRecord& r) { return r.seconds; });
  if (seconds.size() >= 2) report.timing = timing_stats(seconds);
  return report;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json doc;
  doc["method"] = method;
  doc["nu"] = nu ? nlohmann::json(*nu) : nlohmann::json(nullptr);
  if (!ct_base.empty()) doc["ct_base"] = ct_base;
  doc["backend"] = backend_id;
  doc["split"] = {{"dev_fraction", split.dev_fraction},
                  {"seed", split.seed},
                  {"stratify_by", split.stratify_by},
                  {"n_dev", n_dev},
                  {"n_eval", n_eval}};
  doc["threshold"] = {{"value", threshold_to_json(threshold.threshold)},
                      {"dev_f1", threshold.f1},
                      {"dev_tpr", threshold.tpr}};
  if (combiner) doc["combiner"] = tdetect::to_json(*combiner);
  doc["rows"] = nlohmann::json::array();
  for (const auto& r : rows) doc["rows"].push_back(row_json(r));
  doc["all"] = row_json(all);
  doc["warnings"] = warnings;
  doc["timing"] = {{"mean_seconds", timing.mean_seconds},
                   {"std_seconds", timing.std_seconds},
                   {"throughput_texts_per_second", timing.throughput}};
  return doc;
}

std::string MetricsReport::to_csv() const {
  std::ostringstream os;
  os << "group,n,auroc,f1,tpr_at_5fpr,degenerate,mean_seconds,std_seconds,throughput\n";
  auto line = [&](const MetricsRow& r, bool with_timing) {
    os << r.group << ',' << r.n << ',' << fmt("%.17g", r.auroc) << ',' << fmt("%.17g", r.f1) << ','
       << fmt("%.17g", r.tpr_at_5fpr) << ',' << (r.degenerate ? "true" : "false") << ',';
    if (with_timing) {
      os << fmt("%.17g", timing.mean_seconds) << ',' << fmt("%.17g", timing.std_seconds) << ','
         << fmt("%.17g", timing.throughput);
    } else {
      os << ",,";
    }
    os << '\n';
  };
  for (const auto& r : rows) line(r, false);
  line(all, true);
  return os.str();
}

std::string MetricsReport::to_markdown() const {
  std::ostringstream os;
  os << "## " << method;
  if (!ct_base.empty()) os << " (base " << ct_base << ")";
  if (nu) os << ", nu = " << fmt("%g", *nu);
  os << "\n\nBackend: `" << backend_id << "`\n\n";
  os << "| Group | n | AUROC | F1 | TPR@5%FPR |\n|---|---:|---:|---:|---:|\n";
  auto line = [&](const MetricsRow& r, bool bold) {
    const char* b = bold ? "**" : "";
    os << "| " << b << r.group << b << " | " << r.n << " | ";
    if (r.degenerate) {
      os << "degenerate | | |\n";
      return;
    }
    os << fmt("%.4f", r.auroc) << " | " << fmt("%.4f", r.f1) << " | " << fmt("%.4f", r.tpr_at_5fpr) << " |\n";
  };
  for (const auto& r : rows) line(r, false);
  line(all, true);
  os << "\n| Avg Time (s) | Throughput (texts/s) | Timing Std Dev (s) |\n|---:|---:|---:|\n";
  os << "| " << fmt("%.6f", timing.mean_seconds) << " | " << fmt("%.2f", timing.throughput) << " | "
     << fmt("%.6f", timing.std_seconds) << " |\n";
  for (const auto& w : warnings) os << "\n> " << w << '\n';
  return os.str();
}

VulnerabilityRow failure_rate(const std::function<double(const std::string&)>& detector,
                              std::span<const std::string> machine_texts,
                              const std::optional<AttackSpec>& attack, double threshold) {
  if (machine_texts.empty()) throw Error(ErrorCode::EmptyCorpus, "no machine texts to attack");
  VulnerabilityRow row;
  row.attack = attack ? std::string(to_string(attack->kind)) : "none";
  row.n_texts = machine_texts.size();
  row.threshold = threshold;
  std::size_t failures = 0;
  for (const auto& text : machine_texts) {
    const std::string input = attack ? apply_attack(text, *attack).text : text;
    if (detector(input) < threshold) ++failures;
  }
  row.failure_rate = static_cast<double>(failures) / static_cast<double>(machine_texts.size());
  return row;
}

VulnerabilityReport run_vulnerability(const LabeledCorpus& corpus, const TokenStatsBackend& backend,
                                      const DetectorConfig& config, const SplitSpec& split,
                                      std::span<const SweepEntry> attacks, double intensity,
                                      std::uint64_t seed) {
  config.validate();
  const Split parts = split_corpus(corpus, split);

  std::vector<std::string> dev_texts;
  std::vector<Label> dev_labels;
  for (std::size_t i : parts.dev) {
    dev_texts.push_back(corpus[i].text);
    dev_labels.push_back(corpus[i].label);
  }
  const FittedDetector fitted = fit_detector(score_texts(dev_texts, backend, config), dev_labels, config);

  std::vector<std::size_t> targets;
  for (std::size_t i : parts.eval) {
    if (corpus[i].label == Label::machine) targets.push_back(i);
  }
  if (targets.empty()) throw Error(ErrorCode::EmptyCorpus, "eval split has no machine texts");

  VulnerabilityReport report;
  report.threshold = fitted.threshold.threshold;
  auto measure = [&](const std::vector<std::string>& texts, std::string name) {
    VulnerabilityRow row;
    row.attack = std::move(name);
    row.n_texts = texts.size();
    row.threshold = report.threshold;
    std::size_t failures = 0;
    for (const ScoredRecord& r : score_texts(texts, backend, config)) {
      if (fitted.decision(r) < report.threshold) ++failures;
    }
    row.failure_rate = static_cast<double>(failures) / static_cast<double>(texts.size());
    return row;
  };

  std::vector<std::string> clean;
  for (std::size_t i : targets) clean.push_back(corpus[i].text);
  report.baseline = measure(clean, "none");

  for (const SweepEntry& entry : attacks) {
    const std::string name = entry ? std::string(to_string(*entry)) : "none";
    std::vector<std::string> attacked_texts(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      attacked_texts[i] = entry ? apply_attack(corpus[i].text, {*entry, intensity, seed}).text : corpus[i].text;
      CorpusRecord rec = corpus[i];
      rec.id += "#" + name;
      rec.attack = name;
      rec.text = attacked_texts[i];
      report.attacked.push_back(std::move(rec));
    }
    std::vector<std::string> eval_machine;
    for (std::size_t i : targets) eval_machine.push_back(attacked_texts[i]);
    report.rows.push_back(entry ? measure(eval_machine, name) : report.baseline);
  }
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const VulnerabilityRow& a, const VulnerabilityRow& b) {
    if (a.failure_rate != b.failure_rate) return a.failure_rate > b.failure_rate;
    return a.attack < b.attack;
  });
  return report;
}

nlohmann::json VulnerabilityReport::to_json() const {
  auto row = [](const VulnerabilityRow& r) {
    return nlohmann::json{{"attack", r.attack}, {"failure_rate", r.failure_rate}, {"n_texts", r.n_texts}};
  };
  nlohmann::json doc;
  doc["threshold"] = threshold_to_json(threshold);
  doc["baseline"] = row(baseline);
  doc["rows"] = nlohmann::json::array();
  for (const auto& r : rows) doc["rows"].push_back(row(r));
  doc["not_implemented"] = not_implemented;
  return doc;
}

std::string VulnerabilityReport::to_csv() const {
  std::ostringstream os;
  os << "attack,failure_rate,n_texts\n";
  for (const auto& r : rows) os << r.attack << ',' << fmt("%.17g", r.failure_rate) << ',' << r.n_texts << '\n';
  return os.str();
}

}  // namespace tdetect
