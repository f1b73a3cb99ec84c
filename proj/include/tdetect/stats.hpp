#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tdetect/error.hpp"

namespace tdetect::stats {

/// Samples whose variance is at most this times max(1, mean^2) are degenerate.
inline constexpr double kVarianceFloor = 1e-12;

/// Bias-uncorrected g2 = m4 / m2^2 - 3 with central moments m_k = mean((x - mean)^k).
/// Throws Error(InsufficientData) for n < 4 and Error(DegenerateSample) for
/// zero dispersion.
double excess_kurtosis(std::span<const double> samples);

struct GaussianFit {
  double mean = 0.0;
  double std = 0.0;  // population (MLE) standard deviation
  double loglik = 0.0;
  double aic = 0.0;  // 2 * 2 - 2 * loglik
};

GaussianFit fit_gaussian(std::span<const double> samples);

struct StudentTOptions {
  double nu_min = 2.01;
  double nu_max = 1000.0;
  /// Stop when every parameter moves less than this (location and scale
  /// relative to the scale, nu relative to itself).
  double tolerance = 1e-8;
  int max_iterations = 500;
  /// Use the OpenMP reductions; the serial path is bit-identical.
  bool parallel = true;
};

struct StudentTFit {
  double location = 0.0;
  double scale = 1.0;
  double nu = 0.0;
  double loglik = 0.0;
  double aic = 0.0;  // 2 * 3 - 2 * loglik
  int iterations = 0;
  bool converged = false;
  /// nu sits on the upper search bound; the fit is indistinguishable from a
  /// Gaussian there.
  bool gaussian_equivalent = false;
  /// Log-likelihood at the start and after every iteration.
  std::vector<double> loglik_trace;
};

class FitDiverged : public Error {
 public:
  explicit FitDiverged(StudentTFit last)
      : Error(ErrorCode::FitDiverged, "Student-t fit did not converge"), last_(std::move(last)) {}
  const StudentTFit& last_iterate() const noexcept { return last_; }

 private:
  StudentTFit last_;
};

/// Location-scale Student-t log density.
double student_t_logpdf(double x, double location, double scale, double nu);

/// Sum of student_t_logpdf over the sample.
double student_t_loglik(std::span<const double> samples, double location, double scale, double nu,
                        bool parallel = true);

/// Maximum-likelihood location-scale Student-t fit by ECME.
///
/// Each iteration re-weights the sample with w = (nu + 1) / (nu + z^2),
/// updates location and scale as weighted moments, then maximises the
/// observed likelihood over nu in [nu_min, nu_max] by root-finding its
/// derivative. The likelihood never decreases across iterations.
///
/// Throws Error(InsufficientData) for n < 10, Error(DegenerateSample) for
/// zero dispersion, and FitDiverged after max_iterations.
StudentTFit fit_student_t(std::span<const double> samples, const StudentTOptions& options = {});

enum class PreferredModel { t_distribution, gaussian };
std::string_view to_string(PreferredModel model);

struct FitReport {
  std::size_t n = 0;
  double excess_kurtosis = 0.0;
  GaussianFit gauss;
  StudentTFit student_t;
  double delta_aic = 0.0;  // aic_t - aic_gauss
  PreferredModel preferred = PreferredModel::gaussian;
};

FitReport aic_compare(std::span<const double> samples, const StudentTOptions& options = {});

nlohmann::json to_json(const FitReport& report);

struct HistogramBin {
  double left;
  double right;
  std::size_t count;
  double gauss_pdf;  // densities at the bin centre
  double t_pdf;
};

/// Equal-width bins over [min, max]; bins == 0 picks the Rice rule
/// ceil(2 * n^(1/3)) clamped to [10, 100].
std::vector<HistogramBin> histogram(std::span<const double> samples, const FitReport& report,
                                    std::size_t bins = 0);

/// CSV with header bin_left,bin_right,count,gauss_pdf,t_pdf.
std::string histogram_csv(const std::vector<HistogramBin>& bins);

}  // namespace tdetect::stats
