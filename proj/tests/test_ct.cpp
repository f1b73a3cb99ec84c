#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "tdetect/ct.hpp"
#include "tdetect/error.hpp"
#include "tdetect/metrics.hpp"
#include "tdetect/scoring.hpp"
#include "tdetect/toy_ngram.hpp"

using namespace tdetect;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

std::size_t word_count(const std::string& s) {
  std::size_t n = 0;
  bool in = false;
  for (char c : s) {
    const bool space = c == ' ';
    if (!space && !in) ++n;
    in = !space;
  }
  return n;
}

std::vector<LabeledPair> noisy_dev(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<LabeledPair> dev;
  for (std::size_t i = 0; i < n; ++i) {
    const Label y = i % 2 == 0 ? Label::machine : Label::human;
    const double shift = y == Label::machine ? 1.0 : -1.0;
    dev.push_back({shift + 0.5 * z(rng), z(rng), y});
  }
  return dev;
}

// Least squares with free bias, by Cramer's rule on the 3x3 normal equations.
std::array<double, 3> ols(const std::vector<LabeledPair>& dev) {
  double a[3][3] = {}, b[3] = {};
  for (const auto& r : dev) {
    const double x[3] = {r.s_t, r.s_c, 1.0};
    const double y = r.label == Label::machine ? 1.0 : 0.0;
    for (int i = 0; i < 3; ++i) {
      b[i] += x[i] * y;
      for (int j = 0; j < 3; ++j) a[i][j] += x[i] * x[j];
    }
  }
  auto det3 = [](const double m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  const double d = det3(a);
  std::array<double, 3> w{};
  for (int k = 0; k < 3; ++k) {
    double m[3][3];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m[i][j] = j == k ? b[i] : a[i][j];
    }
    w[static_cast<std::size_t>(k)] = det3(m) / d;
  }
  return w;
}

double svr_objective(const std::vector<LabeledPair>& dev, const CombinerHyper& h, double wt, double wc, double b) {
  double loss = 0.0;
  for (const auto& r : dev) {
    const double y = r.label == Label::machine ? 1.0 : 0.0;
    loss += std::max(0.0, std::fabs(y - (wt * r.s_t + wc * r.s_c + b)) - h.epsilon);
  }
  return 0.5 * (wt * wt + wc * wc + b * b) + h.c * loss / static_cast<double>(dev.size());
}

double ridge_objective(const std::vector<LabeledPair>& dev, const CombinerHyper& h, double wt, double wc, double b) {
  double loss = 0.0;
  for (const auto& r : dev) {
    const double y = r.label == Label::machine ? 1.0 : 0.0;
    const double e = y - (wt * r.s_t + wc * r.s_c + b);
    loss += e * e;
  }
  return 0.5 * (wt * wt + wc * wc) + 0.5 * h.c * loss / static_cast<double>(dev.size());
}

}  // namespace

TEST_SUITE("content extraction") {
  TEST_CASE("examples") {
    const auto cfg = ContentExtractionConfig::defaults();
    CHECK(extract_content("The cat sat on the mat", cfg) == "cat sat mat");
    CHECK(extract_content("quantum chromodynamics lattice", cfg) == "quantum chromodynamics lattice");
    CHECK(extract_content("Well,   the Cat's  toy!", cfg) == "Well Cat's toy");
    CHECK(code_of([&] { extract_content("", cfg); }) == ErrorCode::EmptyContent);
    CHECK(code_of([&] { extract_content("of the and a", cfg); }) == ErrorCode::EmptyContent);
    CHECK(code_of([&] { extract_content("... !!", cfg); }) == ErrorCode::EmptyContent);
  }

  TEST_CASE("default list") {
    const auto cfg = ContentExtractionConfig::defaults();
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.function_words.size() >= 150);
    for (const char* w : {"the", "on", "a", "an", "of", "and"}) {
      CHECK(std::find(cfg.function_words.begin(), cfg.function_words.end(), w) != cfg.function_words.end());
    }
  }

  TEST_CASE("configuration flags and validation") {
    ContentExtractionConfig cfg;
    cfg.function_words = {"the"};
    cfg.strip_punctuation = false;
    CHECK(extract_content("the end.", cfg) == "end .");
    cfg.collapse_whitespace = false;
    CHECK(extract_content("big   the  dog", cfg) == "big  dog");

    cfg.function_words = {};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.function_words = {"the", "the"};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.function_words = {"The"};
    CHECK_THROWS_AS(cfg.validate(), Error);
    CHECK(parse_word_list("a\r\n\nthe\n") == std::vector<std::string>{"a", "the"});
  }

  TEST_CASE("idempotent and never grows") {
    const auto cfg = ContentExtractionConfig::defaults();
    for (const auto& text : fixture_training_corpus()) {
      const auto c = extract_content(text, cfg);
      CHECK(extract_content(c, cfg) == c);
      CHECK(word_count(c) <= word_count(text));
    }
  }
}

TEST_SUITE("combiner") {
  TEST_CASE("errors") {
    auto dev = noisy_dev(1, 9);
    CHECK(code_of([&] { fit_combiner(dev); }) == ErrorCode::InsufficientData);
    dev = noisy_dev(1, 20);
    for (auto& r : dev) r.label = Label::human;
    CHECK(code_of([&] { fit_combiner(dev); }) == ErrorCode::DegenerateTraining);
    dev = noisy_dev(1, 20);
    CombinerHyper h;
    h.c = 0.0;
    CHECK(code_of([&] { fit_combiner(dev, h); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("separable dev set keeps AUROC 1") {
    std::vector<LabeledPair> dev;
    for (int i = 0; i < 12; ++i) {
      const double u = i * 0.1;
      dev.push_back({2.0 + u, 1.5 + u, Label::machine});
      dev.push_back({-1.0 - u, -0.5 - u, Label::human});
    }
    for (auto kind : {CombinerKind::linear_svr, CombinerKind::ridge}) {
      CombinerHyper h;
      h.kind = kind;
      const auto m = fit_combiner(dev, h);
      std::vector<ScoredLabel> s;
      for (const auto& r : dev) s.push_back({m.predict(r.s_t, r.s_c), r.label});
      CHECK(auroc(s) == 1.0);
    }
  }

  TEST_CASE("noise feature gets the smaller weight, in agreement with least squares") {
    const auto dev = noisy_dev(7, 400);
    const auto w_ls = ols(dev);
    REQUIRE(std::fabs(w_ls[1]) < std::fabs(w_ls[0]));
    for (auto kind : {CombinerKind::linear_svr, CombinerKind::ridge}) {
      CombinerHyper h;
      h.kind = kind;
      const auto m = fit_combiner(dev, h);
      CHECK(std::fabs(m.weights[1]) < std::fabs(m.weights[0]));
      CHECK((m.weights[0] > 0) == (w_ls[0] > 0));
    }
  }

  TEST_CASE("ridge with large C approaches least squares") {
    const auto dev = noisy_dev(3, 200);
    const auto w_ls = ols(dev);
    CombinerHyper h;
    h.kind = CombinerKind::ridge;
    h.c = 1e9;
    const auto m = fit_combiner(dev, h);
    CHECK(m.weights[0] == doctest::Approx(w_ls[0]).epsilon(1e-6));
    CHECK(m.weights[1] == doctest::Approx(w_ls[1]).epsilon(1e-6));
    CHECK(m.bias == doctest::Approx(w_ls[2]).epsilon(1e-6));
  }

  TEST_CASE("fitted weights minimise their objectives") {
    const auto dev = noisy_dev(11, 60);
    for (auto kind : {CombinerKind::linear_svr, CombinerKind::ridge}) {
      CombinerHyper h;
      h.kind = kind;
      const auto m = fit_combiner(dev, h);
      auto objective = [&](double wt, double wc, double b) {
        return kind == CombinerKind::ridge ? ridge_objective(dev, h, wt, wc, b) : svr_objective(dev, h, wt, wc, b);
      };
      const double at = objective(m.weights[0], m.weights[1], m.bias);
      for (double step : {1e-2, 1e-4}) {
        for (int k = 0; k < 3; ++k) {
          for (double sign : {-1.0, 1.0}) {
            double p[3] = {m.weights[0], m.weights[1], m.bias};
            p[k] += sign * step;
            CHECK(objective(p[0], p[1], p[2]) >= at - 1e-10);
          }
        }
      }
      if (kind == CombinerKind::linear_svr) {
        CHECK(m.training_meta.iterations >= 1);
        CHECK(m.training_meta.iterations < h.max_iterations);
      }
    }
  }

  TEST_CASE("duplicating every row leaves the fit unchanged") {
    const auto dev = noisy_dev(5, 50);
    auto twice = dev;
    twice.insert(twice.end(), dev.begin(), dev.end());
    for (auto kind : {CombinerKind::linear_svr, CombinerKind::ridge}) {
      CombinerHyper h;
      h.kind = kind;
      const auto a = fit_combiner(dev, h);
      const auto b = fit_combiner(twice, h);
      CHECK(b.weights[0] == doctest::Approx(a.weights[0]).epsilon(1e-8));
      CHECK(b.weights[1] == doctest::Approx(a.weights[1]).epsilon(1e-8));
      CHECK(b.bias == doctest::Approx(a.bias).epsilon(1e-8));
    }
  }

  TEST_CASE("deterministic, with JSON round trip") {
    const auto dev = noisy_dev(9, 40);
    const auto a = fit_combiner(dev);
    const auto b = fit_combiner(dev);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
    CHECK(a.training_meta.dev_hash == b.training_meta.dev_hash);
    CHECK(a.training_meta.dev_hash.size() == 16);

    const auto doc = to_json(a);
    CHECK(doc.at("kind") == "linear_svr");
    CHECK(doc.at("weights").size() == 2);
    CHECK(doc.at("training_meta").at("C") == 1.0);
    CHECK(doc.at("training_meta").at("epsilon") == 0.1);
    const auto back = combiner_from_json(nlohmann::json::parse(doc.dump()));
    CHECK(back.weights == a.weights);
    CHECK(back.bias == a.bias);
    CHECK(back.training_meta.dev_hash == a.training_meta.dev_hash);

    CHECK_THROWS_AS(combiner_from_json(nlohmann::json{{"kind", "rbf"}}), Error);
    CHECK_THROWS_AS(combiner_from_json(nlohmann::json{{"kind", "ridge"}, {"weights", {1.0}}, {"bias", 0.0}}), Error);
  }
}

TEST_SUITE("ct score") {
  TEST_CASE("projection and equal inputs") {
    ScorePair pair;
    pair.s_t = {1.2, Method::t_detect, 5.0, 0.0};
    pair.s_c = {-0.7, Method::t_detect, 5.0, 0.0};
    CombinerModel m;
    m.weights = {1.0, 0.0};
    CHECK(combine(m, pair) == 1.2);
    pair.s_c.value = 1.2;
    m.weights = {0.5, 0.5};
    CHECK(combine(m, pair) == 1.2);
  }

  TEST_CASE("binoculars features are oriented before combining") {
    ScorePair pair;
    pair.s_t = {0.9, Method::binoculars, std::nullopt, 0.0};
    pair.s_c = {0.8, Method::binoculars, std::nullopt, 0.0};
    CombinerModel m;
    m.weights = {1.0, 2.0};
    m.bias = 0.25;
    CHECK(combine(m, pair) == doctest::Approx(-0.9 - 1.6 + 0.25));
  }

  TEST_CASE("hand-chained pipeline on the toy backend") {
    const auto& b = ToyBackend::builtin();
    const auto cfg = ContentExtractionConfig::defaults();
    CombinerModel m;
    m.weights = {0.3, -0.2};
    m.bias = 0.1;
    const std::string text = "The harbour lights flickered while the ferry waited for the tide.";
    const auto r = ct_score(text, b, Method::t_detect, 5.0, m, cfg);
    const double st = t_detect_score(discrepancy(b.score_text(text)), 5.0).value;
    const double sc = t_detect_score(discrepancy(b.score_text(extract_content(text, cfg))), 5.0).value;
    CHECK(r.score.value == 0.3 * st + -0.2 * sc + 0.1);
    CHECK(r.score.method == Method::ct);
    CHECK(r.score.nu == 5.0);
    CHECK_FALSE(r.pair.content_fallback);
    CHECK(r.pair.s_t.value == st);
    CHECK(r.pair.s_c.value == sc);
  }

  TEST_CASE("empty content falls back to the text term") {
    const auto& b = ToyBackend::builtin();
    CombinerModel m;
    m.weights = {0.3, 5.0};
    m.bias = 0.1;
    const auto r = ct_score("of the and a", b, Method::gaussian, 5.0, m, ContentExtractionConfig::defaults());
    CHECK(r.pair.content_fallback);
    const double st = gaussian_score(discrepancy(b.score_text("of the and a"))).value;
    CHECK(r.score.value == 0.3 * st + 0.1);
  }

  TEST_CASE("monotone in each feature for non-negative weights") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3.0, 3.0), w(0.0, 2.0);
    for (int i = 0; i < 200; ++i) {
      CombinerModel m;
      m.weights = {w(rng), w(rng)};
      m.bias = u(rng);
      ScorePair p;
      p.s_t = {u(rng), Method::gaussian, std::nullopt, 0.0};
      p.s_c = {u(rng), Method::gaussian, std::nullopt, 0.0};
      const double base = combine(m, p);
      auto q = p;
      q.s_t.value += 0.5;
      CHECK(combine(m, q) >= base);
      q = p;
      q.s_c.value += 0.5;
      CHECK(combine(m, q) >= base);
    }
  }

  TEST_CASE("ct cannot be its own base") {
    CHECK(code_of([] {
            score_pair("text", ToyBackend::builtin(), Method::ct, 5.0, ContentExtractionConfig::defaults());
          }) == ErrorCode::InvalidArgument);
  }
}
