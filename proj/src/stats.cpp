#include "tdetect/stats.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "tdetect/kernels.hpp"

namespace tdetect::stats {

namespace {

struct Moments2 {
  double mean;
  double var;
};

Moments2 mean_var(std::span<const double> x) {
  const auto n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0.0;
  for (double v : x) m2 += (v - mean) * (v - mean);
  return {mean, m2 / n};
}

bool degenerate(const Moments2& m) {
  return !(m.var > kVarianceFloor * std::max(1.0, m.mean * m.mean));
}

template <class Term>
double reduce(std::size_t n, bool parallel, Term&& term) {
  return parallel ? kernels::blocked_sum_parallel(n, term) : kernels::blocked_sum_serial(n, term);
}

// log Gamma((nu+1)/2) - log Gamma(nu/2) - log(nu * pi) / 2
double t_log_normaliser(double nu) {
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * std::numbers::pi);
}

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

}  // namespace

double excess_kurtosis(std::span<const double> samples) {
  if (samples.size() < 4) throw Error(ErrorCode::InsufficientData, "kurtosis needs n >= 4");
  const Moments2 m = mean_var(samples);
  if (degenerate(m)) throw Error(ErrorCode::DegenerateSample, "sample has no dispersion");
  double m4 = 0.0;
  for (double v : samples) {
    const double d2 = (v - m.mean) * (v - m.mean);
    m4 += d2 * d2;
  }
  m4 /= static_cast<double>(samples.size());
  return m4 / (m.var * m.var) - 3.0;
}

GaussianFit fit_gaussian(std::span<const double> samples) {
  if (samples.size() < 2) throw Error(ErrorCode::InsufficientData, "Gaussian fit needs n >= 2");
  const Moments2 m = mean_var(samples);
  if (degenerate(m)) throw Error(ErrorCode::DegenerateSample, "sample has no dispersion");
  const auto n = static_cast<double>(samples.size());
  GaussianFit fit;
  fit.mean = m.mean;
  fit.std = std::sqrt(m.var);
  fit.loglik = -0.5 * n * (std::log(2.0 * std::numbers::pi) + std::log(m.var) + 1.0);
  fit.aic = 2.0 * 2.0 - 2.0 * fit.loglik;
  return fit;
}

double student_t_logpdf(double x, double location, double scale, double nu) {
  const double z = (x - location) / scale;
  return t_log_normaliser(nu) - std::log(scale) - 0.5 * (nu + 1.0) * std::log1p(z * z / nu);
}

double student_t_loglik(std::span<const double> samples, double location, double scale, double nu,
                        bool parallel) {
  const double inv_scale = 1.0 / scale;
  const double tail = reduce(samples.size(), parallel, [&](std::size_t i) {
    const double z = (samples[i] - location) * inv_scale;
    return std::log1p(z * z / nu);
  });
  const auto n = static_cast<double>(samples.size());
  return n * (t_log_normaliser(nu) - std::log(scale)) - 0.5 * (nu + 1.0) * tail;
}

namespace {

// d/dnu of the log-likelihood at fixed location and scale.
double nu_score(std::span<const double> x, double location, double scale, double nu, bool parallel) {
  const double inv_scale = 1.0 / scale;
  const double sum = reduce(x.size(), parallel, [&](std::size_t i) {
    const double z = (x[i] - location) * inv_scale;
    const double z2 = z * z;
    return -0.5 * std::log1p(z2 / nu) + (nu + 1.0) * z2 / (2.0 * nu * (nu + z2));
  });
  const auto n = static_cast<double>(x.size());
  using boost::math::digamma;
  return n * (0.5 * digamma(0.5 * (nu + 1.0)) - 0.5 * digamma(0.5 * nu) - 0.5 / nu) + sum;
}

double maximise_nu(std::span<const double> x, double location, double scale, double current,
                   const StudentTOptions& opt) {
  auto score = [&](double log_nu) {
    return nu_score(x, location, scale, std::exp(log_nu), opt.parallel);
  };
  const double lo = std::log(opt.nu_min);
  const double hi = std::log(opt.nu_max);
  const double f_lo = score(lo);
  const double f_hi = score(hi);
  double candidate;
  if (f_lo <= 0.0) {
    candidate = opt.nu_min;
  } else if (f_hi >= 0.0) {
    candidate = opt.nu_max;
  } else {
    boost::uintmax_t max_iter = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        score, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(50), max_iter);
    candidate = std::clamp(std::exp(0.5 * (a + b)), opt.nu_min, opt.nu_max);
  }
  // The profile in nu is unimodal in practice; keep the old value otherwise.
  const double ll_new = student_t_loglik(x, location, scale, candidate, opt.parallel);
  const double ll_old = student_t_loglik(x, location, scale, current, opt.parallel);
  return ll_new >= ll_old ? candidate : current;
}

}  // namespace

StudentTFit fit_student_t(std::span<const double> x, const StudentTOptions& opt) {
  if (x.size() < 10) throw Error(ErrorCode::InsufficientData, "Student-t fit needs n >= 10");
  const Moments2 m = mean_var(x);
  if (degenerate(m)) throw Error(ErrorCode::DegenerateSample, "sample has no dispersion");
  const auto n = static_cast<double>(x.size());

  // Robust start: median and normal-consistent MAD.
  StudentTFit fit;
  fit.location = median(std::vector<double>(x.begin(), x.end()));
  std::vector<double> dev(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) dev[i] = std::fabs(x[i] - fit.location);
  fit.scale = 1.482602218505602 * median(std::move(dev));
  if (!(fit.scale > 0.0)) fit.scale = std::sqrt(m.var);
  fit.nu = maximise_nu(x, fit.location, fit.scale, std::clamp(10.0, opt.nu_min, opt.nu_max), opt);
  fit.loglik = student_t_loglik(x, fit.location, fit.scale, fit.nu, opt.parallel);
  fit.loglik_trace.push_back(fit.loglik);

  for (int it = 1; it <= opt.max_iterations; ++it) {
    const double nu = fit.nu;
    const double loc = fit.location;
    const double inv_scale = 1.0 / fit.scale;
    auto weight = [&](std::size_t i) {
      const double z = (x[i] - loc) * inv_scale;
      return (nu + 1.0) / (nu + z * z);
    };
    const double sw = reduce(x.size(), opt.parallel, weight);
    const double swx = reduce(x.size(), opt.parallel, [&](std::size_t i) { return weight(i) * x[i]; });
    const double new_loc = swx / sw;
    const double sws = reduce(x.size(), opt.parallel, [&](std::size_t i) {
      const double d = x[i] - new_loc;
      return weight(i) * d * d;
    });
    const double new_scale = std::sqrt(sws / n);
    const double new_nu = maximise_nu(x, new_loc, new_scale, nu, opt);

    const double change = std::max({std::fabs(new_loc - loc) / new_scale,
                                    std::fabs(new_scale - fit.scale) / new_scale,
                                    std::fabs(new_nu - nu) / new_nu});
    fit.location = new_loc;
    fit.scale = new_scale;
    fit.nu = new_nu;
    fit.loglik = student_t_loglik(x, new_loc, new_scale, new_nu, opt.parallel);
    fit.loglik_trace.push_back(fit.loglik);
    fit.iterations = it;
    if (change < opt.tolerance) {
      fit.converged = true;
      break;
    }
  }
  fit.aic = 2.0 * 3.0 - 2.0 * fit.loglik;
  fit.gaussian_equivalent = fit.nu >= opt.nu_max;
  if (!fit.converged) throw FitDiverged(std::move(fit));
  return fit;
}

std::string_view to_string(PreferredModel model) {
  return model == PreferredModel::t_distribution ? "t_distribution" : "gaussian";
}

FitReport aic_compare(std::span<const double> samples, const StudentTOptions& options) {
  FitReport report;
  report.n = samples.size();
  report.gauss = fit_gaussian(samples);
  report.student_t = fit_student_t(samples, options);
  report.excess_kurtosis = excess_kurtosis(samples);
  report.delta_aic = report.student_t.aic - report.gauss.aic;
  report.preferred = report.delta_aic < 0.0 ? PreferredModel::t_distribution : PreferredModel::gaussian;
  return report;
}

nlohmann::json to_json(const FitReport& r) {
  return {
      {"n", r.n},
      {"excess_kurtosis", r.excess_kurtosis},
      {"gauss", {{"mean", r.gauss.mean}, {"std", r.gauss.std}, {"loglik", r.gauss.loglik}, {"aic", r.gauss.aic}}},
      {"student_t",
       {{"location", r.student_t.location},
        {"scale", r.student_t.scale},
        {"nu_hat", r.student_t.nu},
        {"loglik", r.student_t.loglik},
        {"aic", r.student_t.aic},
        {"iterations", r.student_t.iterations},
        {"gaussian_equivalent", r.student_t.gaussian_equivalent}}},
      {"delta_aic", r.delta_aic},
      {"preferred", to_string(r.preferred)},
  };
}

std::vector<HistogramBin> histogram(std::span<const double> samples, const FitReport& report,
                                    std::size_t bins) {
  if (samples.empty()) throw Error(ErrorCode::InsufficientData, "histogram of an empty sample");
  if (bins == 0) {
    const auto rice = static_cast<std::size_t>(
        std::ceil(2.0 * std::cbrt(static_cast<double>(samples.size()))));
    bins = std::clamp<std::size_t>(rice, 10, 100);
  }
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it;
  const double hi = *hi_it > lo ? *hi_it : lo + 1.0;
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].left = lo + width * static_cast<double>(b);
    out[b].right = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
    out[b].count = 0;
    const double centre = 0.5 * (out[b].left + out[b].right);
    const double z = (centre - report.gauss.mean) / report.gauss.std;
    out[b].gauss_pdf = std::exp(-0.5 * z * z) / (report.gauss.std * std::sqrt(2.0 * std::numbers::pi));
    out[b].t_pdf = std::exp(student_t_logpdf(centre, report.student_t.location,
                                             report.student_t.scale, report.student_t.nu));
  }
  for (double v : samples) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    ++out[std::min(b, bins - 1)].count;
  }
  return out;
}

std::string histogram_csv(const std::vector<HistogramBin>& bins) {
  std::ostringstream os;
  os.precision(17);
  os << "bin_left,bin_right,count,gauss_pdf,t_pdf\n";
  for (const auto& b : bins) {
    os << b.left << ',' << b.right << ',' << b.count << ',' << b.gauss_pdf << ',' << b.t_pdf << '\n';
  }
  return os.str();
}

}  // namespace tdetect::stats
