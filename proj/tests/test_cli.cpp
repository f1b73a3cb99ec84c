#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "tdetect/attacks.hpp"
#include "tdetect/cli.hpp"
#include "tdetect/corpus.hpp"
#include "tdetect/scoring.hpp"
#include "tdetect/toy_ngram.hpp"

using namespace tdetect;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "tdetect");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

std::vector<nlohmann::json> json_lines(const std::string& s) {
  std::vector<nlohmann::json> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) {
    if (!l.empty()) out.push_back(nlohmann::json::parse(l));
  }
  return out;
}

/// Writes the small synthetic corpus once per test binary.
const fs::path& corpus_path() {
  static oracle::TempDir dir("cli-corpus");
  static const fs::path path = [] {
    const fs::path p = dir.path() / "fixture.jsonl";
    const auto r = run({"fixture", "--output", p.string(), "--per-domain", "12"});
    REQUIRE(r.code == 0);
    return p;
  }();
  return path;
}

std::string without_timing(const std::string& report) {
  auto doc = nlohmann::json::parse(report);
  doc.erase("timing");
  return doc.dump();
}

}  // namespace

TEST_SUITE("cli score") {
  TEST_CASE("single text matches the library") {
    const std::string text = "The river carried the small boat past the mill.";
    const auto r = run({"score", "--text", text, "--method", "t_detect", "--nu", "5", "--jobs", "1"});
    REQUIRE(r.code == 0);
    const auto lines = json_lines(r.out);
    REQUIRE(lines.size() == 1);
    const auto& j = lines[0];
    const auto series = ToyBackend::builtin().score_text(text);
    CHECK(j.at("value").get<double>() == t_detect_score(discrepancy(series), 5.0).value);
    CHECK(j.at("method") == "t_detect");
    CHECK(j.at("nu") == 5.0);
    CHECK(j.at("token_count") == series.positions.size());
    CHECK(j.at("truncated") == false);
    CHECK(j.at("id") == "text-1");
  }

  TEST_CASE("nu must exceed 2") {
    const auto r = run({"score", "--text", "hello there", "--nu", "2"});
    CHECK(r.code == 2);
    CHECK(r.err.find("nu must exceed 2") != std::string::npos);
  }

  TEST_CASE("file input keeps order and gaussian omits nu") {
    oracle::TempDir dir("cli-score");
    spit(dir.path() / "in.txt", "Zebra crossing ahead.\nA quiet morning.\n\nThe last line of three.\n");
    const auto r = run({"score", "--input", (dir.path() / "in.txt").string(), "--method", "gaussian", "--jobs", "3"});
    REQUIRE(r.code == 0);
    const auto lines = json_lines(r.out);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0].at("id") == "line-1");
    CHECK(lines[1].at("id") == "line-2");
    CHECK(lines[2].at("id") == "line-4");
    CHECK_FALSE(lines[0].contains("nu"));
    CHECK(lines[2].at("value").get<double>() ==
          gaussian_score(discrepancy(ToyBackend::builtin().score_text("The last line of three."))).value);
  }

  TEST_CASE("usage errors exit 2") {
    CHECK(run({"score"}).code == 2);
    CHECK(run({"score", "--text", "x", "--method", "bogus"}).code == 2);
    CHECK(run({"score", "--text", "x", "--method", "ct"}).code == 2);
    CHECK(run({"score", "--text", "x", "--backend", "remote"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({}).code == 2);
  }

  TEST_CASE("unreachable remote backend exits 3") {
    const auto r = run({"score", "--text", "hello", "--backend", "remote", "--endpoint", "http://127.0.0.1:1"});
    CHECK(r.code == 3);
    CHECK_FALSE(r.err.empty());
  }

  TEST_CASE("cache directory from the environment") {
    oracle::TempDir dir("cli-env");
    ::setenv("TDETECT_CACHE_DIR", dir.path().c_str(), 1);
    const auto a = run({"score", "--text", "Cached words are here."});
    ::unsetenv("TDETECT_CACHE_DIR");
    REQUIRE(a.code == 0);
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir.path())) files += e.is_regular_file();
    CHECK(files == 1);
    const auto b = run({"score", "--text", "Cached words are here.", "--cache-dir", dir.path().string()});
    CHECK(b.out == a.out);
  }
}

TEST_SUITE("cli eval") {
  TEST_CASE("writes reports, prints ALL, reruns identically") {
    oracle::TempDir dir("cli-eval");
    const auto r1 = run({"eval", "--corpus", corpus_path().string(), "--out-dir", dir.path().string()});
    REQUIRE(r1.code == 0);
    CHECK(r1.out.rfind("ALL n=", 0) == 0);
    for (const char* f : {"report.json", "report.csv", "report.md"}) CHECK(fs::exists(dir.path() / f));
    CHECK_FALSE(fs::exists(dir.path() / "combiner.json"));
    const auto first = slurp(dir.path() / "report.json");
    REQUIRE(run({"eval", "--corpus", corpus_path().string(), "--out-dir", dir.path().string()}).code == 0);
    CHECK(without_timing(slurp(dir.path() / "report.json")) == without_timing(first));
  }

  TEST_CASE("gaussian and t_detect agree on auroc") {
    oracle::TempDir a("cli-g"), b("cli-t");
    REQUIRE(run({"eval", "--corpus", corpus_path().string(), "--out-dir", a.path().string(), "--method", "gaussian"})
                .code == 0);
    REQUIRE(run({"eval", "--corpus", corpus_path().string(), "--out-dir", b.path().string(), "--method", "t_detect",
                 "--nu", "5"})
                .code == 0);
    const auto ja = nlohmann::json::parse(slurp(a.path() / "report.json"));
    const auto jb = nlohmann::json::parse(slurp(b.path() / "report.json"));
    CHECK(ja.at("all").at("auroc") == jb.at("all").at("auroc"));
    CHECK(ja.at("rows") == jb.at("rows"));
  }

  TEST_CASE("ct writes a combiner that score can use") {
    oracle::TempDir dir("cli-ct");
    REQUIRE(run({"eval", "--corpus", corpus_path().string(), "--out-dir", dir.path().string(), "--method", "ct"}).code ==
            0);
    const auto model = dir.path() / "combiner.json";
    REQUIRE(fs::exists(model));
    const auto r = run({"score", "--method", "ct", "--combiner", model.string(), "--text", "The ship sailed at dawn."});
    REQUIRE(r.code == 0);
    CHECK(json_lines(r.out).at(0).at("method") == "ct");
  }

  TEST_CASE("ingest errors exit 4 with the line number") {
    oracle::TempDir dir("cli-bad");
    const auto bad = dir.path() / "bad.jsonl";
    spit(bad, R"({"id":"a","text":"t","label":"robot","domain":"x"})" "\n");
    const auto r = run({"eval", "--corpus", bad.string(), "--out-dir", dir.path().string()});
    CHECK(r.code == 4);
    CHECK(r.err.find("line 1") != std::string::npos);
    CHECK_FALSE(fs::exists(dir.path() / "report.json"));
    CHECK(run({"eval", "--corpus", (dir.path() / "missing.jsonl").string()}).code == 2);
  }

  TEST_CASE("config file, with flags taking precedence") {
    oracle::TempDir dir("cli-config");
    const auto cfg = dir.path() / "run.json";
    spit(cfg, nlohmann::json{{"method", "gaussian"}, {"corpus", corpus_path().string()},
                             {"out_dir", dir.path().string()}, {"seed", 3}}
                  .dump());
    REQUIRE(run({"--config", cfg.string(), "eval"}).code == 0);
    CHECK(nlohmann::json::parse(slurp(dir.path() / "report.json")).at("method") == "gaussian");
    REQUIRE(run({"eval", "--config", cfg.string(), "--method", "binoculars"}).code == 0);
    const auto doc = nlohmann::json::parse(slurp(dir.path() / "report.json"));
    CHECK(doc.at("method") == "binoculars");
    CHECK(doc.at("split").at("seed") == 3);

    spit(cfg, R"({"nu": "five"})");
    CHECK(run({"--config", cfg.string(), "score", "--text", "x"}).code == 2);
    CHECK(run({"--config", (dir.path() / "nope.json").string(), "score", "--text", "x"}).code == 2);
  }
}

TEST_SUITE("cli attack") {
  TEST_CASE("zero-width attack marks every machine text") {
    oracle::TempDir dir("cli-attack");
    const auto r = run({"attack", "--corpus", corpus_path().string(), "--out-dir", dir.path().string(), "--attack",
                        "zero_width_space"});
    REQUIRE(r.code == 0);
    const auto attacked = load_corpus(dir.path() / "attacked.jsonl");
    std::size_t machine = 0;
    for (const auto& rec : attacked) {
      CHECK(rec.attack == "zero_width_space");
      if (rec.label == Label::machine) {
        ++machine;
        CHECK(rec.text.find("\u200B") != std::string::npos);
      }
    }
    CHECK(machine > 0);
    CHECK(fs::exists(dir.path() / "vulnerability.json"));
    CHECK(fs::exists(dir.path() / "vulnerability.csv"));
  }

  TEST_CASE("identity attack equals the baseline") {
    oracle::TempDir dir("cli-none");
    REQUIRE(run({"attack", "--corpus", corpus_path().string(), "--out-dir", dir.path().string(), "--attack", "none"})
                .code == 0);
    const auto doc = nlohmann::json::parse(slurp(dir.path() / "vulnerability.json"));
    REQUIRE(doc.at("rows").size() == 1);
    CHECK(doc.at("rows")[0].at("failure_rate") == doc.at("baseline").at("failure_rate"));
  }

  TEST_CASE("full sweep has ten sorted rows and is reproducible") {
    oracle::TempDir dir("cli-sweep");
    const std::vector<std::string> args = {"attack", "--corpus", corpus_path().string(), "--out-dir",
                                           dir.path().string(), "--attack", "all", "--seed", "4"};
    REQUIRE(run(args).code == 0);
    const auto doc = nlohmann::json::parse(slurp(dir.path() / "vulnerability.json"));
    const auto& rows = doc.at("rows");
    REQUIRE(rows.size() == 10);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(rows[i - 1].at("failure_rate").get<double>() >= rows[i].at("failure_rate").get<double>());
    }
    const auto first = slurp(dir.path() / "attacked.jsonl");
    const auto vuln = slurp(dir.path() / "vulnerability.json");
    REQUIRE(run(args).code == 0);
    CHECK(slurp(dir.path() / "attacked.jsonl") == first);
    CHECK(slurp(dir.path() / "vulnerability.json") == vuln);
  }

  TEST_CASE("bad attack arguments exit 2") {
    CHECK(run({"attack", "--corpus", corpus_path().string(), "--attack", "paraphrase"}).code == 2);
    CHECK(run({"attack", "--corpus", corpus_path().string()}).code == 2);
    CHECK(run({"attack", "--corpus", corpus_path().string(), "--attack", "homoglyph", "--intensity", "2"}).code == 2);
  }
}

TEST_SUITE("cli normalize") {
  TEST_CASE("line-wise, idempotent, and table-driven") {
    oracle::TempDir dir("cli-norm");
    std::string input = "a\u200Bb\nfine  \u0430pple\n";
    // Every confusable target from the table, one per line.
    std::string expected = "ab\nfine apple\n";
    std::ifstream tsv(std::string(TDETECT_SOURCE_DIR) + "/data/confusables.tsv");
    for (std::string line; std::getline(tsv, line);) {
      if (line.empty() || line[0] == '#') continue;
      const auto tab = line.find('\t');
      input += "x" + line.substr(tab + 1) + "y\n";
      expected += "x" + line.substr(0, tab) + "y\n";
    }
    spit(dir.path() / "in.txt", input);
    const auto once = dir.path() / "once.txt";
    const auto twice = dir.path() / "twice.txt";
    REQUIRE(run({"normalize", "--input", (dir.path() / "in.txt").string(), "--output", once.string()}).code == 0);
    CHECK(slurp(once) == expected);
    REQUIRE(run({"normalize", "--input", once.string(), "--output", twice.string()}).code == 0);
    CHECK(slurp(twice) == slurp(once));
    const auto stdout_run = run({"normalize", "--input", once.string()});
    CHECK(stdout_run.out == expected);
  }

  TEST_CASE("invalid UTF-8 exits 4 with the byte offset") {
    oracle::TempDir dir("cli-utf8");
    spit(dir.path() / "bad.txt", "fine\nok \xff there\n");
    const auto out = dir.path() / "out.txt";
    const auto r = run({"normalize", "--input", (dir.path() / "bad.txt").string(), "--output", out.string()});
    CHECK(r.code == 4);
    CHECK(r.err.find("8") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
  }
}

TEST_SUITE("cli diagnose") {
  std::string draws(bool heavy, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    std::student_t_distribution<double> t(4.0);
    std::ostringstream os;
    os.precision(17);
    for (int i = 0; i < 5000; ++i) os << (heavy ? t(rng) : n(rng)) << '\n';
    return os.str();
  }

  TEST_CASE("normal scores prefer the Gaussian, t(4) scores the t model") {
    oracle::TempDir dir("cli-diag");
    spit(dir.path() / "normal.txt", draws(false, 1));
    auto r = run({"diagnose", "--input", (dir.path() / "normal.txt").string(), "--out-dir", dir.path().string()});
    REQUIRE(r.code == 0);
    auto doc = nlohmann::json::parse(r.out);
    CHECK(doc.at("preferred") == "gaussian");
    CHECK(doc.at("delta_aic").get<double>() == doctest::Approx(2.0).epsilon(0.75));
    CHECK(fs::exists(dir.path() / "fit_report.json"));
    CHECK(slurp(dir.path() / "histogram.csv").rfind("bin_left,bin_right,count,gauss_pdf,t_pdf\n", 0) == 0);

    spit(dir.path() / "heavy.txt", draws(true, 2));
    r = run({"diagnose", "--input", (dir.path() / "heavy.txt").string(), "--out-dir", dir.path().string()});
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(r.out).at("preferred") == "t_distribution");
  }

  TEST_CASE("input errors") {
    oracle::TempDir dir("cli-diag-bad");
    spit(dir.path() / "few.txt", "1\n2\n3\n");
    CHECK(run({"diagnose", "--input", (dir.path() / "few.txt").string(), "--out-dir", dir.path().string()}).code == 2);
    spit(dir.path() / "word.txt", "1\n2\nbanana\n");
    const auto r = run({"diagnose", "--input", (dir.path() / "word.txt").string(), "--out-dir", dir.path().string()});
    CHECK(r.code == 4);
    CHECK(r.err.find("line 3") != std::string::npos);
  }
}

TEST_SUITE("cli fixture") {
  TEST_CASE("seeded and reproducible") {
    const auto a = run({"fixture", "--per-domain", "3", "--seed", "5"});
    const auto b = run({"fixture", "--per-domain", "3", "--seed", "5"});
    const auto c = run({"fixture", "--per-domain", "3", "--seed", "6"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out != c.out);
    CHECK(json_lines(a.out).size() == 18);
  }
}

TEST_CASE("atomic writes replace whole files") {
  oracle::TempDir dir("cli-atomic");
  const auto p = dir.path() / "f.txt";
  cli::write_file_atomic(p, "first");
  cli::write_file_atomic(p, "second");
  CHECK(slurp(p) == "second");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path())) ++entries;
  CHECK(entries == 1);
}
