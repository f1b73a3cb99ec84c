#include "tdetect/kernels.hpp"

#include "tdetect/error.hpp"

namespace tdetect::kernels {

namespace {

void split(std::span<const ScoredLabel> scores, std::vector<double>& machine,
           std::vector<double>& human) {
  for (const auto& s : scores) {
    (s.label == Label::machine ? machine : human).push_back(s.score);
  }
  if (machine.empty() || human.empty()) {
    throw Error(ErrorCode::DegenerateLabels, "AUROC needs both labels");
  }
}

// Wins are counted in half-units so the tally stays an exact integer.
long long half_wins(double m, const std::vector<double>& human) {
  long long w = 0;
  for (double h : human) w += m > h ? 2 : (m == h ? 1 : 0);
  return w;
}

}  // namespace

double auroc_pairwise_serial(std::span<const ScoredLabel> scores) {
  std::vector<double> machine, human;
  split(scores, machine, human);
  long long wins = 0;
  for (double m : machine) wins += half_wins(m, human);
  return static_cast<double>(wins) /
         (2.0 * static_cast<double>(machine.size()) * static_cast<double>(human.size()));
}

double auroc_pairwise_parallel(std::span<const ScoredLabel> scores) {
  std::vector<double> machine, human;
  split(scores, machine, human);
  long long wins = 0;
  const auto count = static_cast<long long>(machine.size());
#pragma omp parallel for reduction(+ : wins) schedule(static)
  for (long long i = 0; i < count; ++i) wins += half_wins(machine[static_cast<std::size_t>(i)], human);
  return static_cast<double>(wins) /
         (2.0 * static_cast<double>(machine.size()) * static_cast<double>(human.size()));
}

}  // namespace tdetect::kernels
