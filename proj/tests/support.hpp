#pragma once

// Independent reference implementations used as test oracles. Nothing here
// calls into the code under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "tdetect/types.hpp"

namespace oracle {

using tdetect::Label;
using tdetect::ScoredLabel;

/// Fraction of (machine, human) pairs won by the machine text, ties 1/2.
inline double auroc(const std::vector<ScoredLabel>& s) {
  double wins = 0.0;
  double pairs = 0.0;
  for (const auto& m : s) {
    if (m.label != Label::machine) continue;
    for (const auto& h : s) {
      if (h.label != Label::human) continue;
      pairs += 1.0;
      wins += m.score > h.score ? 1.0 : (m.score == h.score ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline Counts counts_at(const std::vector<ScoredLabel>& s, double threshold) {
  Counts c;
  for (const auto& x : s) {
    const bool pos = x.score >= threshold;
    if (x.label == Label::machine) {
      (pos ? c.tp : c.fn)++;
    } else {
      (pos ? c.fp : c.tn)++;
    }
  }
  return c;
}

inline double f1_of(const Counts& c) {
  const double p = c.tp + c.fp == 0 ? 0.0 : double(c.tp) / double(c.tp + c.fp);
  const double r = c.tp + c.fn == 0 ? 0.0 : double(c.tp) / double(c.tp + c.fn);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

/// Every threshold that yields a distinct classification: each distinct
/// score (as ">= score") and +inf.
inline std::vector<double> cut_points(const std::vector<ScoredLabel>& s) {
  std::vector<double> cuts;
  for (const auto& x : s) cuts.push_back(x.score);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.push_back(std::numeric_limits<double>::infinity());
  return cuts;
}

struct BestCut {
  double f1 = -1.0;
  double tpr = -1.0;
  double threshold = 0.0;  // emitted form: midpoint below the cut, or -inf
  // F1 as the exact fraction num / den, for tie detection.
  std::uint64_t num = 0;
  std::uint64_t den = 1;
};

/// Exhaustive F1 maximisation; ties prefer higher TPR, then lower threshold.
inline BestCut best_f1(const std::vector<ScoredLabel>& s) {
  const auto cuts = cut_points(s);
  BestCut best;
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    const Counts c = counts_at(s, cuts[k]);
    const double f = f1_of(c);
    const double tpr = double(c.tp) / double(c.tp + c.fn);
    double emitted;
    if (k == 0) {
      emitted = -std::numeric_limits<double>::infinity();
    } else if (k + 1 == cuts.size()) {
      emitted = std::numeric_limits<double>::infinity();
    } else {
      emitted = 0.5 * (cuts[k - 1] + cuts[k]);
    }
    // F1 = 2tp / (2tp + fp + fn), compared by cross-multiplication so
    // mathematically equal values tie exactly.
    const std::uint64_t num = 2 * c.tp;
    const std::uint64_t den = c.tp == 0 ? 1 : 2 * c.tp + c.fp + c.fn;
    const bool first = best.f1 < 0.0;
    const std::uint64_t lhs = num * best.den, rhs = best.num * den;
    // Cuts are visited from low to high threshold, so a strict improvement
    // is required to replace an equally good lower threshold.
    if (first || lhs > rhs || (lhs == rhs && tpr > best.tpr)) best = {f, tpr, emitted, num, den};
  }
  return best;
}

/// Maximum TPR over all thresholds whose FPR is within the cap.
inline double tpr_at_fpr(const std::vector<ScoredLabel>& s, double cap) {
  double best = 0.0;
  for (double t : cut_points(s)) {
    const Counts c = counts_at(s, t);
    const double fpr = double(c.fp) / double(c.fp + c.tn);
    if (fpr <= cap) best = std::max(best, double(c.tp) / double(c.tp + c.fn));
  }
  return best;
}

/// Scores drawn from a small grid so ties are frequent.
inline std::vector<ScoredLabel> random_corpus(std::mt19937_64& rng, std::size_t max_n) {
  std::uniform_int_distribution<std::size_t> size(2, max_n);
  std::uniform_int_distribution<int> grid(0, 12);
  std::bernoulli_distribution coin(0.5);
  std::vector<ScoredLabel> s(size(rng));
  for (auto& x : s) x = {0.25 * grid(rng) - 1.0, coin(rng) ? Label::machine : Label::human};
  s[0].label = Label::machine;
  s[1].label = Label::human;
  return s;
}

/// Unique scratch directory under the system temp dir, removed on exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("tdetect-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace oracle
