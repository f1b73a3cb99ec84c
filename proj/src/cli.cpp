#include "tdetect/cli.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tdetect/attacks.hpp"
#include "tdetect/cache.hpp"
#include "tdetect/ct.hpp"
#include "tdetect/error.hpp"
#include "tdetect/fixture.hpp"
#include "tdetect/harness.hpp"
#include "tdetect/kernels.hpp"
#include "tdetect/remote_backend.hpp"
#include "tdetect/scoring.hpp"
#include "tdetect/stats.hpp"
#include "tdetect/toy_ngram.hpp"
#include "tdetect/utf8.hpp"

namespace tdetect::cli {

namespace fs = std::filesystem;
using nlohmann::json;

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

/// Usage and configuration problems: exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::BackendError:
    case ErrorCode::ProtocolError:
      return kBackend;
    case ErrorCode::InvalidNu:
    case ErrorCode::InvalidArgument:
      return kConfig;
    default:
      return kData;
  }
}

struct RunConfig {
  std::string method = "t_detect";
  double nu = kDefaultNu;
  std::string ct_base = "t_detect";
  std::string backend = "toy";
  std::string endpoint;
  std::string model_scoring = "scoring";
  std::string model_reference = "reference";
  std::string corpus;
  double dev_fraction = 0.3;
  std::uint64_t seed = 0;
  std::vector<std::string> stratify_by = {"label", "domain"};
  std::vector<std::string> group_by = {"domain"};
  std::vector<std::string> attacks;
  double intensity = 1.0;
  std::string cache_dir;
  std::string out_dir = ".";
  int jobs = 0;
  std::string combiner;
  double epsilon = 0.1;
  double c = 1.0;
  std::string combiner_kind = "linear_svr";
  bool defend = false;

  std::vector<std::string> texts;
  std::string input;
  std::string output;
  std::size_t per_domain = 40;
};

template <class T>
void take(const json& doc, const char* key, T& field) {
  if (doc.contains(key)) field = doc.at(key).get<T>();
}

RunConfig load_config_file(const fs::path& path) {
  RunConfig cfg;
  json doc;
  try {
    doc = json::parse(read_file(path));
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    take(doc, "method", cfg.method);
    take(doc, "nu", cfg.nu);
    take(doc, "ct_base", cfg.ct_base);
    take(doc, "backend", cfg.backend);
    take(doc, "endpoint", cfg.endpoint);
    take(doc, "model_scoring", cfg.model_scoring);
    take(doc, "model_reference", cfg.model_reference);
    take(doc, "corpus", cfg.corpus);
    take(doc, "dev_fraction", cfg.dev_fraction);
    take(doc, "seed", cfg.seed);
    take(doc, "stratify_by", cfg.stratify_by);
    take(doc, "group_by", cfg.group_by);
    take(doc, "attacks", cfg.attacks);
    take(doc, "intensity", cfg.intensity);
    take(doc, "cache_dir", cfg.cache_dir);
    take(doc, "out_dir", cfg.out_dir);
    take(doc, "jobs", cfg.jobs);
    take(doc, "combiner", cfg.combiner);
    take(doc, "epsilon", cfg.epsilon);
    take(doc, "C", cfg.c);
    take(doc, "combiner_kind", cfg.combiner_kind);
    take(doc, "defend", cfg.defend);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return cfg;
}

/// Flags are parsed into a staging config; after parsing, every flag that
/// was given overwrites the value loaded from --config.
class Options {
 public:
  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& name, T RunConfig::*field, const std::string& help) {
    CLI::Option* opt = app->add_option(name, staged_.*field, help);
    appliers_.push_back([this, opt, field] {
      if (opt->count() > 0) merged_.*field = staged_.*field;
    });
    return opt;
  }

  CLI::Option* add_flag(CLI::App* app, const std::string& name, bool RunConfig::*field, const std::string& help) {
    CLI::Option* opt = app->add_flag(name, staged_.*field, help);
    appliers_.push_back([this, opt, field] {
      if (opt->count() > 0) merged_.*field = staged_.*field;
    });
    return opt;
  }

  RunConfig resolve(const std::string& config_path) {
    merged_ = config_path.empty() ? RunConfig{} : load_config_file(config_path);
    for (auto& apply : appliers_) apply();
    if (merged_.cache_dir.empty()) {
      if (const char* env = std::getenv("TDETECT_CACHE_DIR")) merged_.cache_dir = env;
    }
    if (merged_.jobs <= 0) merged_.jobs = kernels::default_threads();
    return merged_;
  }

 private:
  RunConfig staged_;
  RunConfig merged_;
  std::vector<std::function<void()>> appliers_;
};

Method method_of(const std::string& name) {
  const auto m = parse_method(name);
  if (!m) throw ConfigError("unknown method '" + name + "'");
  return *m;
}

DetectorConfig detector_config(const RunConfig& cfg) {
  DetectorConfig d;
  d.method = method_of(cfg.method);
  d.ct_base = method_of(cfg.ct_base);
  d.nu = cfg.nu;
  d.jobs = cfg.jobs;
  d.defend = cfg.defend;
  d.group_by = cfg.group_by;
  d.combiner.epsilon = cfg.epsilon;
  d.combiner.c = cfg.c;
  if (cfg.combiner_kind == "ridge") {
    d.combiner.kind = CombinerKind::ridge;
  } else if (cfg.combiner_kind != "linear_svr") {
    throw ConfigError("unknown combiner kind '" + cfg.combiner_kind + "'");
  }
  if (!cfg.cache_dir.empty()) d.cache_dir = cfg.cache_dir;
  d.validate();
  return d;
}

SplitSpec split_spec(const RunConfig& cfg) {
  if (!(cfg.dev_fraction > 0.0 && cfg.dev_fraction < 1.0)) throw ConfigError("dev-fraction must lie in (0, 1)");
  SplitSpec s;
  s.dev_fraction = cfg.dev_fraction;
  s.seed = cfg.seed;
  s.stratify_by = cfg.stratify_by;
  return s;
}

std::unique_ptr<TokenStatsBackend> make_backend(const RunConfig& cfg) {
  if (cfg.backend == "toy") return nullptr;
  if (cfg.backend == "remote") {
    if (cfg.endpoint.empty()) throw ConfigError("--backend remote needs --endpoint");
    return std::make_unique<RemoteBackend>(cfg.endpoint, cfg.model_scoring, cfg.model_reference);
  }
  throw ConfigError("unknown backend '" + cfg.backend + "'");
}

const TokenStatsBackend& backend_ref(const std::unique_ptr<TokenStatsBackend>& owned) {
  if (owned) return *owned;
  return ToyBackend::builtin();
}

LabeledCorpus require_corpus(const RunConfig& cfg) {
  if (cfg.corpus.empty()) throw ConfigError("--corpus is required");
  if (!fs::exists(cfg.corpus)) throw ConfigError("corpus " + cfg.corpus + " does not exist");
  return load_corpus(cfg.corpus);
}

std::string row_summary(const MetricsRow& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s n=%zu auroc=%.6f f1=%.6f tpr_at_5fpr=%.6f%s", r.group.c_str(), r.n, r.auroc,
                r.f1, r.tpr_at_5fpr, r.degenerate ? " degenerate" : "");
  return buf;
}

int cmd_score(const RunConfig& cfg, std::ostream& out) {
  const DetectorConfig det = detector_config(cfg);
  std::vector<std::pair<std::string, std::string>> inputs;
  for (std::size_t i = 0; i < cfg.texts.size(); ++i) inputs.emplace_back("text-" + std::to_string(i + 1), cfg.texts[i]);
  if (!cfg.input.empty()) {
    if (fs::path(cfg.input).extension() == ".jsonl") {
      for (const auto& r : load_corpus(cfg.input)) inputs.emplace_back(r.id, r.text);
    } else {
      std::istringstream in(read_file(cfg.input));
      std::size_t line_no = 0;
      for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (!line.empty()) inputs.emplace_back("line-" + std::to_string(line_no), line);
      }
    }
  }
  if (inputs.empty()) throw ConfigError("nothing to score: give --text or --input");

  std::optional<CombinerModel> combiner;
  if (det.method == Method::ct) {
    if (cfg.combiner.empty()) throw ConfigError("method ct needs --combiner <model.json>");
    try {
      combiner = combiner_from_json(json::parse(read_file(cfg.combiner)));
    } catch (const json::exception& e) {
      throw ConfigError("combiner " + cfg.combiner + ": " + e.what());
    }
  }

  const auto owned = make_backend(cfg);
  const TokenStatsBackend& backend = backend_ref(owned);
  std::optional<ScoreCache> cache;
  if (det.cache_dir) cache.emplace(*det.cache_dir);
  const Scorer scorer(backend, std::move(cache));
  const Method base = det.method == Method::ct ? det.ct_base : det.method;

  std::vector<json> lines(inputs.size());
  kernels::parallel_for(inputs.size(), det.jobs, [&](std::size_t i) {
    const std::string text = det.defend ? normalize_defense(inputs[i].second) : inputs[i].second;
    const TextScore t = scorer.score(text, base, det.nu);
    json line = {{"id", inputs[i].first}, {"method", to_string(det.method)}};
    if (t.score.nu) line["nu"] = *t.score.nu;
    double value = t.score.value;
    if (combiner) {
      ScorePair pair;
      pair.s_t = t.score;
      try {
        pair.s_c = scorer.score(extract_content(text, det.content), base, det.nu).score;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyContent) throw;
        pair.content_fallback = true;
      }
      value = combine(*combiner, pair);
    }
    line["value"] = value;
    line["token_count"] = t.token_count;
    line["truncated"] = t.truncated;
    lines[i] = std::move(line);
  });
  for (const auto& l : lines) out << l.dump() << '\n';
  return kOk;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
  const DetectorConfig det = detector_config(cfg);
  const SplitSpec split = split_spec(cfg);
  const LabeledCorpus corpus = require_corpus(cfg);
  const auto owned = make_backend(cfg);
  const MetricsReport report = run_benchmark(corpus, backend_ref(owned), det, split);

  const fs::path dir = cfg.out_dir;
  write_file_atomic(dir / "report.json", report.to_json().dump(2) + "\n");
  write_file_atomic(dir / "report.csv", report.to_csv());
  write_file_atomic(dir / "report.md", report.to_markdown());
  if (report.combiner) write_file_atomic(dir / "combiner.json", to_json(*report.combiner).dump(2) + "\n");
  out << row_summary(report.all) << '\n';
  return kOk;
}

std::vector<SweepEntry> parse_sweep(const std::vector<std::string>& names) {
  std::vector<SweepEntry> sweep;
  for (const auto& name : names) {
    if (name == "all") {
      sweep.insert(sweep.end(), kAllAttacks.begin(), kAllAttacks.end());
    } else if (name == "none") {
      sweep.emplace_back(std::nullopt);
    } else if (const auto kind = parse_attack_kind(name)) {
      sweep.emplace_back(*kind);
    } else {
      throw ConfigError("unknown attack '" + name + "'");
    }
  }
  if (sweep.empty()) throw ConfigError("--attack is required (a kind, 'none' or 'all')");
  return sweep;
}

int cmd_attack(const RunConfig& cfg, std::ostream& out) {
  const std::vector<SweepEntry> sweep = parse_sweep(cfg.attacks);
  if (!(cfg.intensity >= 0.0 && cfg.intensity <= 1.0)) throw ConfigError("intensity must lie in [0, 1]");
  const DetectorConfig det = detector_config(cfg);
  const SplitSpec split = split_spec(cfg);
  const LabeledCorpus corpus = require_corpus(cfg);
  const auto owned = make_backend(cfg);
  const VulnerabilityReport report =
      run_vulnerability(corpus, backend_ref(owned), det, split, sweep, cfg.intensity, cfg.seed);

  const fs::path dir = cfg.out_dir;
  std::ostringstream attacked;
  write_corpus(attacked, report.attacked);
  write_file_atomic(dir / "attacked.jsonl", attacked.str());
  write_file_atomic(dir / "vulnerability.json", report.to_json().dump(2) + "\n");
  write_file_atomic(dir / "vulnerability.csv", report.to_csv());
  char buf[96];
  std::snprintf(buf, sizeof buf, "%-22s %.4f\n", "baseline", report.baseline.failure_rate);
  out << buf;
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%-22s %.4f\n", r.attack.c_str(), r.failure_rate);
    out << buf;
  }
  return kOk;
}

int cmd_normalize(const RunConfig& cfg, std::ostream& out) {
  if (cfg.input.empty()) throw ConfigError("--input is required");
  const std::string content = read_file(cfg.input);
  std::string result;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    const bool newline = end != std::string::npos;
    if (!newline) end = content.size();
    try {
      result += normalize_defense(std::string_view(content).substr(start, end - start));
    } catch (const utf8::DecodeError& e) {
      throw utf8::DecodeError(start + e.offset());
    }
    if (newline) result += '\n';
    start = end + 1;
  }
  if (cfg.output.empty()) {
    out << result;
  } else {
    write_file_atomic(cfg.output, result);
  }
  return kOk;
}

int cmd_diagnose(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.input.empty()) throw ConfigError("--input is required");
  std::istringstream in(read_file(cfg.input));
  std::vector<double> values;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    double v = 0.0;
    const char* b = line.data() + first;
    const char* e = line.data() + last + 1;
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e || !std::isfinite(v)) {
      err << "line " << line_no << ": not a finite number\n";
      return kData;
    }
    values.push_back(v);
  }
  if (values.size() < 10) throw ConfigError("diagnose needs at least 10 scores, got " + std::to_string(values.size()));
  const stats::FitReport report = stats::aic_compare(values);
  const std::string doc = stats::to_json(report).dump(2) + "\n";
  const fs::path dir = cfg.out_dir;
  write_file_atomic(dir / "fit_report.json", doc);
  write_file_atomic(dir / "histogram.csv", stats::histogram_csv(stats::histogram(values, report)));
  out << doc;
  return kOk;
}

int cmd_fixture(const RunConfig& cfg, std::ostream& out) {
  FixtureOptions opt;
  opt.seed = cfg.seed;
  opt.per_domain_per_label = cfg.per_domain;
  const LabeledCorpus corpus = synthetic_fixture_corpus(ToyBackend::builtin(), opt);
  std::ostringstream os;
  write_corpus(os, corpus);
  if (cfg.output.empty()) {
    out << os.str();
  } else {
    write_file_atomic(cfg.output, os.str());
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-shot machine-text detection with heavy-tailed score normalization"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "JSON run configuration; flags override its values")
      ->check(CLI::ExistingFile);
  Options opts;

  auto detector_flags = [&](CLI::App* sub) {
    opts.add(sub, "--method", &RunConfig::method, "gaussian | t_detect | binoculars | ct");
    opts.add(sub, "--nu", &RunConfig::nu, "Student-t degrees of freedom (> 2)");
    opts.add(sub, "--ct-base", &RunConfig::ct_base, "base method of the ct combiner");
    opts.add(sub, "--backend", &RunConfig::backend, "toy | remote");
    opts.add(sub, "--endpoint", &RunConfig::endpoint, "remote backend URL");
    opts.add(sub, "--model-scoring", &RunConfig::model_scoring, "remote scoring model");
    opts.add(sub, "--model-reference", &RunConfig::model_reference, "remote reference model");
    opts.add(sub, "--cache-dir", &RunConfig::cache_dir, "score cache directory (else $TDETECT_CACHE_DIR)");
    opts.add(sub, "--jobs", &RunConfig::jobs, "scoring workers (default: available cores)");
    opts.add_flag(sub, "--defend", &RunConfig::defend, "normalize texts before scoring");
  };
  auto corpus_flags = [&](CLI::App* sub) {
    opts.add(sub, "--corpus", &RunConfig::corpus, "labeled JSONL corpus");
    opts.add(sub, "--dev-fraction", &RunConfig::dev_fraction, "share of each stratum used for fitting");
    opts.add(sub, "--seed", &RunConfig::seed, "split and attack seed");
    opts.add(sub, "--stratify-by", &RunConfig::stratify_by, "split strata fields")->delimiter(',');
    opts.add(sub, "--group-by", &RunConfig::group_by, "report group fields")->delimiter(',');
    opts.add(sub, "--out-dir", &RunConfig::out_dir, "output directory");
    opts.add(sub, "--epsilon", &RunConfig::epsilon, "SVR insensitivity");
    opts.add(sub, "--C", &RunConfig::c, "combiner regularisation");
    opts.add(sub, "--combiner-kind", &RunConfig::combiner_kind, "linear_svr | ridge");
  };

  CLI::App* score = app.add_subcommand("score", "score texts");
  detector_flags(score);
  opts.add(score, "--text", &RunConfig::texts, "text to score (repeatable)");
  opts.add(score, "--input", &RunConfig::input, "one text per line, or a .jsonl corpus");
  opts.add(score, "--combiner", &RunConfig::combiner, "combiner model JSON (method ct)");

  CLI::App* eval = app.add_subcommand("eval", "benchmark a detector on a labeled corpus");
  detector_flags(eval);
  corpus_flags(eval);

  CLI::App* attack = app.add_subcommand("attack", "attack a corpus and report failure rates");
  detector_flags(attack);
  corpus_flags(attack);
  opts.add(attack, "--attack", &RunConfig::attacks, "attack kinds, 'none' or 'all'")->delimiter(',');
  opts.add(attack, "--intensity", &RunConfig::intensity, "fraction of eligible sites perturbed");

  CLI::App* normalize = app.add_subcommand("normalize", "apply the input sanitiser line by line");
  opts.add(normalize, "--input", &RunConfig::input, "UTF-8 text file");
  opts.add(normalize, "--output", &RunConfig::output, "output file (default stdout)");

  CLI::App* diagnose = app.add_subcommand("diagnose", "Gaussian vs Student-t fit of a score sample");
  opts.add(diagnose, "--input", &RunConfig::input, "one score per line");
  opts.add(diagnose, "--out-dir", &RunConfig::out_dir, "output directory");

  CLI::App* fixture = app.add_subcommand("fixture", "write the synthetic toy-backend corpus");
  opts.add(fixture, "--output", &RunConfig::output, "JSONL path (default stdout)");
  opts.add(fixture, "--seed", &RunConfig::seed, "generation seed");
  opts.add(fixture, "--per-domain", &RunConfig::per_domain, "texts per domain and label");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfig;
  }

  try {
    const RunConfig cfg = opts.resolve(config_path);
    if (score->parsed()) return cmd_score(cfg, out);
    if (eval->parsed()) return cmd_eval(cfg, out);
    if (attack->parsed()) return cmd_attack(cfg, out);
    if (normalize->parsed()) return cmd_normalize(cfg, out);
    if (diagnose->parsed()) return cmd_diagnose(cfg, out, err);
    if (fixture->parsed()) return cmd_fixture(cfg, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  return kConfig;
}

}  // namespace tdetect::cli
