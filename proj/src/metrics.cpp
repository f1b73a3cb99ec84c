#include "tdetect/metrics.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#include "tdetect/error.hpp"

namespace tdetect {

namespace {

struct ClassCounts {
  std::size_t machine = 0;
  std::size_t human = 0;
};

ClassCounts require_both(std::span<const ScoredLabel> scores) {
  ClassCounts c;
  for (const auto& s : scores) (s.label == Label::machine ? c.machine : c.human)++;
  if (c.machine == 0 || c.human == 0) {
    throw Error(ErrorCode::DegenerateLabels, "metric needs both human and machine examples");
  }
  return c;
}

std::vector<ScoredLabel> sorted_desc(std::span<const ScoredLabel> scores) {
  std::vector<ScoredLabel> v(scores.begin(), scores.end());
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  return v;
}

}  // namespace

double auroc(std::span<const ScoredLabel> scores) {
  const ClassCounts counts = require_both(scores);
  std::vector<ScoredLabel> v(scores.begin(), scores.end());
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.score < b.score; });
  // Half-unit wins: each machine beats the humans below its tie group and
  // half-beats the humans inside it.
  long long half_wins = 0;
  std::size_t humans_below = 0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    std::size_t m = 0, h = 0;
    while (j < v.size() && v[j].score == v[i].score) {
      (v[j].label == Label::machine ? m : h)++;
      ++j;
    }
    half_wins += static_cast<long long>(m) * static_cast<long long>(2 * humans_below + h);
    humans_below += h;
    i = j;
  }
  return static_cast<double>(half_wins) /
         (2.0 * static_cast<double>(counts.machine) * static_cast<double>(counts.human));
}

Confusion confusion_at(std::span<const ScoredLabel> scores, double threshold) {
  Confusion c;
  for (const auto& s : scores) {
    const bool predicted_machine = s.score >= threshold;
    if (s.label == Label::machine) {
      (predicted_machine ? c.tp : c.fn)++;
    } else {
      (predicted_machine ? c.fp : c.tn)++;
    }
  }
  return c;
}

double f1(const Confusion& c) {
  if (c.tp == 0) return 0.0;
  const double tp = static_cast<double>(c.tp);
  return 2.0 * tp / (2.0 * tp + static_cast<double>(c.fp) + static_cast<double>(c.fn));
}

double f1(std::span<const Label> predictions, std::span<const Label> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::InvalidArgument, "predictions and labels differ in length");
  }
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pm = predictions[i] == Label::machine;
    if (labels[i] == Label::machine) {
      (pm ? c.tp : c.fn)++;
    } else {
      (pm ? c.fp : c.tn)++;
    }
  }
  return f1(c);
}

ThresholdFit fit_threshold_f1(std::span<const ScoredLabel> scores) {
  const ClassCounts counts = require_both(scores);
  const auto v = sorted_desc(scores);
  constexpr double inf = std::numeric_limits<double>::infinity();

  // Sweep from +inf downwards; after each tie group the threshold may sit
  // anywhere between this group and the next lower score.
  ThresholdFit best{inf, 0.0, 0.0};
  auto consider = [&](double threshold, std::size_t tp, std::size_t fp) {
    const Confusion c{tp, fp, counts.human - fp, counts.machine - tp};
    const ThresholdFit cand{threshold, f1(c),
                            static_cast<double>(tp) / static_cast<double>(counts.machine)};
    if (cand.f1 > best.f1 || (cand.f1 == best.f1 && cand.tpr > best.tpr) ||
        (cand.f1 == best.f1 && cand.tpr == best.tpr && cand.threshold < best.threshold)) {
      best = cand;
    }
  };
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j].score == v[i].score) {
      (v[j].label == Label::machine ? tp : fp)++;
      ++j;
    }
    const double threshold = j < v.size() ? 0.5 * (v[i].score + v[j].score) : -inf;
    consider(threshold, tp, fp);
    i = j;
  }
  return best;
}

double tpr_at_fpr(std::span<const ScoredLabel> scores, double fpr_cap) {
  const ClassCounts counts = require_both(scores);
  const auto v = sorted_desc(scores);
  double best = 0.0;  // the +inf threshold predicts nothing
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j].score == v[i].score) {
      (v[j].label == Label::machine ? tp : fp)++;
      ++j;
    }
    if (static_cast<double>(fp) / static_cast<double>(counts.human) > fpr_cap) break;
    best = static_cast<double>(tp) / static_cast<double>(counts.machine);
    i = j;
  }
  return best;
}

}  // namespace tdetect
