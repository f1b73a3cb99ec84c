#pragma once

#include <omp.h>

#include <algorithm>
#include <cstddef>
#include <exception>
#include <span>
#include <vector>

#include "tdetect/types.hpp"

// Data-parallel kernels. Every OpenMP kernel has a serial twin with the same
// arithmetic order; tests assert they agree bit for bit.
namespace tdetect::kernels {

/// Reductions are split into this many contiguous blocks regardless of the
/// thread count, and the block partials are added in block order.
inline constexpr std::size_t kSumBlocks = 64;

inline int default_threads() { return std::max(1, omp_get_max_threads()); }

/// Runs body(i) for i in [0, n) on up to `threads` threads. Exceptions are
/// captured per index; the lowest-index one is rethrown after the loop.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, threads))
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <class Body>
void serial_for(std::size_t n, Body&& body) {
  for (std::size_t i = 0; i < n; ++i) body(i);
}

namespace detail {
inline std::size_t block_begin(std::size_t b, std::size_t n) { return b * n / kSumBlocks; }
}  // namespace detail

/// Sum of term(i) over [0, n), deterministic for any thread count.
template <class Term>
double blocked_sum_parallel(std::size_t n, Term&& term) {
  double partial[kSumBlocks] = {};
#pragma omp parallel for schedule(static)
  for (long long b = 0; b < static_cast<long long>(kSumBlocks); ++b) {
    const auto ub = static_cast<std::size_t>(b);
    double acc = 0.0;
    for (std::size_t i = detail::block_begin(ub, n); i < detail::block_begin(ub + 1, n); ++i) {
      acc += term(i);
    }
    partial[ub] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

template <class Term>
double blocked_sum_serial(std::size_t n, Term&& term) {
  double total = 0.0;
  for (std::size_t b = 0; b < kSumBlocks; ++b) {
    double acc = 0.0;
    for (std::size_t i = detail::block_begin(b, n); i < detail::block_begin(b + 1, n); ++i) {
      acc += term(i);
    }
    total += acc;
  }
  return total;
}

/// Mann-Whitney AUROC by enumerating every (machine, human) pair; ties count
/// one half. O(n_machine * n_human). Throws Error(DegenerateLabels) when a
/// class is missing.
double auroc_pairwise_serial(std::span<const ScoredLabel> scores);
double auroc_pairwise_parallel(std::span<const ScoredLabel> scores);

}  // namespace tdetect::kernels
