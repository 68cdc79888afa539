#include "harqrate/channel_stats.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "harqrate/rng.hpp"
#include "harqrate/special_math.hpp"

namespace harqrate {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

void check(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

// Single-block density of Y = log2(1 + snr X), X ~ Exp(1):
//   f(y) = ln2 2^y / snr * exp(-(2^y - 1)/snr),  y >= 0.
double mi_density(double snr, double y) {
  const double g = std::exp2(y);
  return kLn2 * g / snr * std::exp(-(g - 1.0) / snr);
}

// Closed-form single-block CDF, P[Y <= y] = 1 - exp(-(2^y - 1)/snr).
double mi_single_cdf(double snr, double y) {
  if (y <= 0.0) return 0.0;
  return -std::expm1(-(std::exp2(y) - 1.0) / snr);
}

double mi_single_quantile(double snr, double p) {
  return std::log2(1.0 - snr * std::log1p(-p));
}

// Density of W = log2 |h|^2 = log2 X, X ~ Exp(1):
//   f(w) = ln2 2^w exp(-2^w),  w in R.
double log_fading_density(double w) {
  const double g = std::exp2(w);
  return kLn2 * g * std::exp(-g);
}

// P[W <= w] = 1 - exp(-2^w).
double log_fading_cdf(double w) { return -std::expm1(-std::exp2(w)); }

double log_fading_single_quantile(double p) {
  return std::log2(-std::log1p(-p));
}

int next_pow2(std::int64_t n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

}  // namespace

ChannelParams::ChannelParams(double snr_linear, int diversity)
    : snr(snr_linear), intra_round_diversity(diversity) {
  check(std::isfinite(snr) && snr > 0.0, "ChannelParams: snr must be > 0");
  check(diversity >= 1, "ChannelParams: intra-round diversity must be >= 1");
}

ChannelParams ChannelParams::from_db(double snr_db, int diversity) {
  return ChannelParams(std::pow(10.0, snr_db / 10.0), diversity);
}

double ChannelParams::snr_db() const { return 10.0 * std::log10(snr); }

double mean_mutual_info(const ChannelParams& params) {
  return kLog2E * exp_scaled_e1(1.0 / params.snr);
}

double std_mutual_info(const ChannelParams& params) {
  const double snr = params.snr;
  const double mu = mean_mutual_info(params);
  // Centered second moment by adaptive quadrature; the integrand is
  // nonnegative, so no cancellation can produce a negative variance.
  const auto integrand = [snr, mu](double x) {
    const double d = std::log2(1.0 + snr * x) - mu;
    return d * d * std::exp(-x);
  };
  const double variance = detail::adaptive_simpson(integrand, 0.0, 60.0, 1e-13);
  if (!(variance > 0.0)) {
    throw std::logic_error("std_mutual_info: non-positive variance");
  }
  return std::sqrt(variance) /
         std::sqrt(static_cast<double>(params.intra_round_diversity));
}

DistributionEstimate sample_block_mi(const ChannelParams& params,
                                     std::int64_t count, std::uint64_t seed) {
  check(count >= 1, "sample_block_mi: count must be >= 1");
  const int f = params.intra_round_diversity;
  DistributionEstimate est;
  est.kind = DistributionKind::empirical;
  est.sample_count = count;
  est.seed = seed;
  est.draws.resize(count);
  for (std::int64_t i = 0; i < count; ++i) {
    double mi = 0.0;
    for (int l = 0; l < f; ++l) {
      const double e = rng::exponential(
          seed, static_cast<std::uint64_t>(i) * f + static_cast<std::uint64_t>(l));
      mi += std::log2(1.0 + params.snr * e);
    }
    est.draws[i] = mi / f;
  }
  return est;
}

double DistributionEstimate::cdf_at(double x) const {
  if (kind == DistributionKind::empirical) {
    std::int64_t below = 0;
    for (Eigen::Index i = 0; i < draws.size(); ++i) {
      if (draws[i] <= x) ++below;
    }
    return static_cast<double>(below) / static_cast<double>(draws.size());
  }
  if (grid.size() == 0) return 0.0;
  if (x <= grid[0]) return x < grid[0] ? 0.0 : cdf[0];
  if (x >= grid[grid.size() - 1]) return 1.0;
  const double* begin = grid.data();
  const double* end = begin + grid.size();
  const auto it = std::upper_bound(begin, end, x);
  const Eigen::Index j = it - begin;  // grid[j-1] <= x < grid[j]
  const double t = (x - grid[j - 1]) / (grid[j] - grid[j - 1]);
  return cdf[j - 1] + t * (cdf[j] - cdf[j - 1]);
}

double DistributionEstimate::quantile(double p) const {
  check(p > 0.0 && p < 1.0, "quantile: p must be in (0,1)");
  if (kind == DistributionKind::empirical) {
    std::vector<double> sorted(draws.data(), draws.data() + draws.size());
    std::sort(sorted.begin(), sorted.end());
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double t = pos - static_cast<double>(lo);
    return sorted[lo] + t * (sorted[lo + 1] - sorted[lo]);
  }
  const double* begin = cdf.data();
  const double* end = begin + cdf.size();
  const auto it = std::lower_bound(begin, end, p);
  if (it == begin || it == end) {
    std::ostringstream msg;
    msg << "quantile: p = " << p << " outside tabulated CDF range ["
        << (cdf.size() ? cdf[0] : 0.0) << ", "
        << (cdf.size() ? cdf[cdf.size() - 1] : 0.0) << "]";
    throw std::runtime_error(msg.str());
  }
  const Eigen::Index j = it - begin;
  const double dv = cdf[j] - cdf[j - 1];
  if (dv <= 0.0) return grid[j];
  const double t = (p - cdf[j - 1]) / dv;
  return grid[j - 1] + t * (grid[j] - grid[j - 1]);
}

namespace detail {

SumConvolver::SumConvolver(Law law) : law_(std::move(law)) {}

double SumConvolver::Cdf::at(double x) const {
  const Eigen::Index n = values.size();
  if (x < x0) return 0.0;
  if (x >= x0 + step * static_cast<double>(n - 1)) return 1.0;
  const double pos = (x - x0) / step;
  const auto j = static_cast<Eigen::Index>(pos);
  const double t = pos - static_cast<double>(j);
  return values[j] + t * (values[j + 1] - values[j]);
}

double SumConvolver::Cdf::quantile(double p) const {
  const double* begin = values.data();
  const double* end = begin + values.size();
  const auto it = std::lower_bound(begin, end, p);
  if (it == begin || it == end) {
    std::ostringstream msg;
    msg << "sum quantile: p = " << p << " not bracketed by window CDF ["
        << values[0] << ", " << values[values.size() - 1] << "] starting at "
        << x0;
    throw std::runtime_error(msg.str());
  }
  const Eigen::Index j = it - begin;
  const double dv = values[j] - values[j - 1];
  const double x_hi = x0 + step * static_cast<double>(j);
  if (dv <= 0.0) return x_hi;
  return x_hi - step * (values[j] - p) / dv;
}

SumConvolver::Window SumConvolver::window_for(int k) const {
  const double h = law_.step;
  const std::int64_t n1 = law_.samples.size();
  const std::int64_t support_lo = static_cast<std::int64_t>(k) * law_.first_index;
  const std::int64_t support_hi =
      static_cast<std::int64_t>(k) * (law_.first_index + n1 - 1);
  const double center = k * law_.mean;
  const double half = 16.0 * std::sqrt(static_cast<double>(k)) * law_.stddev + 2.0;
  Window w;
  w.lo_index = std::max(
      support_lo, static_cast<std::int64_t>(std::floor((center - half) / h)));
  w.hi_index = std::min(
      support_hi, static_cast<std::int64_t>(std::ceil((center + half) / h)));
  w.fft_size = next_pow2(w.hi_index - w.lo_index + 1 + n1 + 64);
  return w;
}

const std::vector<std::complex<double>>& SumConvolver::forward(
    int fft_size) const {
  auto it = forward_cache_.find(fft_size);
  if (it != forward_cache_.end()) return it->second;
  std::vector<std::complex<double>> time(fft_size, {0.0, 0.0});
  for (Eigen::Index i = 0; i < law_.samples.size(); ++i) {
    time[i] = {law_.samples[i] * law_.step, 0.0};  // mass per cell
  }
  std::vector<std::complex<double>> freq(fft_size);
  Eigen::FFT<double> fft;
  fft.fwd(freq, time);
  return forward_cache_.emplace(fft_size, std::move(freq)).first->second;
}

Eigen::ArrayXd SumConvolver::windowed_density(int k, const Window& w) const {
  const int n = w.fft_size;
  const auto& base = forward(n);

  // Pointwise base^k by binary exponentiation.
  std::vector<std::complex<double>> acc(n, {1.0, 0.0});
  std::vector<std::complex<double>> pw = base;
  int e = k;
  while (e > 0) {
    if (e & 1) {
      for (int i = 0; i < n; ++i) acc[i] *= pw[i];
    }
    e >>= 1;
    if (e > 0) {
      for (int i = 0; i < n; ++i) pw[i] *= pw[i];
    }
  }

  std::vector<std::complex<double>> time(n);
  Eigen::FFT<double> fft;
  fft.inv(time, acc);

  // Result bin j holds the k-fold mass at absolute grid index
  // j + k*first_index (mod fft_size); unwrap the window.
  const std::int64_t shift = static_cast<std::int64_t>(k) * law_.first_index;
  const std::int64_t count = w.hi_index - w.lo_index + 1;
  Eigen::ArrayXd dens(count);
  for (std::int64_t m = w.lo_index; m <= w.hi_index; ++m) {
    std::int64_t j = (m - shift) % n;
    if (j < 0) j += n;
    dens[m - w.lo_index] = std::max(0.0, time[j].real());
  }
  return dens;
}

const SumConvolver::Cdf& SumConvolver::sum_cdf(int k) const {
  auto it = cdf_cache_.find(k);
  if (it != cdf_cache_.end()) return it->second;

  const Window w = window_for(k);
  const Eigen::ArrayXd dens = windowed_density(k, w);

  Cdf out;
  out.x0 = static_cast<double>(w.lo_index) * law_.step;
  out.step = law_.step;
  out.values.resize(dens.size());
  double sum = 0.0, comp = 0.0;
  for (Eigen::Index i = 0; i < dens.size(); ++i) {
    const double y = dens[i] - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    out.values[i] = sum - 0.5 * (dens[i] + dens[0]);  // trapezoid ends
  }
  // Guard the 1e-13-level convolution noise.
  double running = 0.0;
  for (Eigen::Index i = 0; i < out.values.size(); ++i) {
    running = std::max(running, std::min(1.0, out.values[i]));
    out.values[i] = running;
  }
  return cdf_cache_.emplace(k, std::move(out)).first->second;
}

std::vector<double> SumConvolver::cdf_prefix(
    double threshold, int kmax,
    const std::function<double(double)>& single_cdf) const {
  std::vector<double> out;
  out.reserve(kmax);
  out.push_back(single_cdf(threshold));
  if (kmax == 1) return out;

  const int n = window_for(kmax).fft_size;
  const auto& base = forward(n);
  std::vector<std::complex<double>> acc = base;
  std::vector<std::complex<double>> time(n);
  Eigen::FFT<double> fft;

  for (int k = 2; k <= kmax; ++k) {
    for (int i = 0; i < n; ++i) acc[i] *= base[i];
    const Window w = window_for(k);
    const double wlo = static_cast<double>(w.lo_index) * law_.step;
    const double whi = static_cast<double>(w.hi_index) * law_.step;
    if (threshold <= wlo) {
      out.push_back(0.0);
      continue;
    }
    if (threshold >= whi) {
      out.push_back(1.0);
      continue;
    }
    fft.inv(time, acc);
    // Trapezoid cumulative mass over [wlo, threshold].
    const std::int64_t shift = static_cast<std::int64_t>(k) * law_.first_index;
    const auto last_full =
        static_cast<std::int64_t>(std::floor(threshold / law_.step));
    double sum = 0.0, comp = 0.0, prev = 0.0, first = 0.0;
    for (std::int64_t m = w.lo_index; m <= last_full; ++m) {
      std::int64_t j = (m - shift) % n;
      if (j < 0) j += n;
      const double d = std::max(0.0, time[j].real());
      if (m == w.lo_index) first = d;
      const double y = d - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
      prev = d;
    }
    double c = sum - 0.5 * (prev + first);
    // Fractional last cell: linear interpolation between the trapezoid
    // cumulatives, matching Cdf::at.
    std::int64_t j = (last_full + 1 - shift) % n;
    if (j < 0) j += n;
    const double next = std::max(0.0, time[j].real());
    const double frac = threshold / law_.step - static_cast<double>(last_full);
    c += frac * 0.5 * (prev + next);
    out.push_back(std::clamp(c, 0.0, 1.0));
  }
  return out;
}

namespace {

// Samples a single-block law on a uniform grid, halving the trapezoid
// endpoints, and verifies against the closed-form CDF; the step is halved
// until the grid CDF matches within 1e-7 at nodes and midpoints.
SumConvolver::Law build_law(const std::function<double(double)>& density,
                            const std::function<double(double)>& cdf,
                            double lo, double hi, double mean, double stddev,
                            double h0) {
  for (int attempt = 0; attempt < 7; ++attempt) {
    const double h = h0 / static_cast<double>(1 << attempt);
    const auto i0 = static_cast<std::int64_t>(std::llround(lo / h));
    const auto n1 =
        static_cast<std::int64_t>(std::ceil((hi - lo) / h)) + 1;
    SumConvolver::Law law;
    law.step = h;
    law.first_index = i0;
    law.mean = mean;
    law.stddev = stddev;
    law.samples.resize(n1);
    for (std::int64_t i = 0; i < n1; ++i) {
      law.samples[i] = density(static_cast<double>(i0 + i) * h);
    }
    law.samples[0] *= 0.5;
    law.samples[n1 - 1] *= 0.5;

    // Trapezoid grid CDF vs closed form.
    double max_err = 0.0;
    double run = cdf(static_cast<double>(i0) * h);
    double prev = density(static_cast<double>(i0) * h);
    for (std::int64_t i = 1; i < n1 && max_err <= 1e-7; ++i) {
      const double x = static_cast<double>(i0 + i) * h;
      const double d = density(x);
      const double prev_run = run;
      run += 0.5 * h * (prev + d);
      prev = d;
      max_err = std::max(max_err, std::abs(run - cdf(x)));
      max_err = std::max(
          max_err, std::abs(0.5 * (run + prev_run) - cdf(x - 0.5 * h)));
    }
    if (max_err <= 1e-7) return law;
  }
  throw std::logic_error("build_law: grid refinement did not converge");
}

SumConvolver::Law make_mi_law(double snr) {
  ChannelParams params(snr);
  const double mu = mean_mutual_info(params);
  const double sigma = std_mutual_info(params);
  const double hi = mu + 12.0 * sigma;
  const double h0 = std::min(1e-3, std::min(mu, sigma) / 500.0);
  return build_law([snr](double y) { return mi_density(snr, y); },
                   [snr](double y) { return mi_single_cdf(snr, y); }, 0.0, hi,
                   mu, sigma, h0);
}

// Mean and standard deviation of log2 |h|^2: -gamma log2(e) and
// pi log2(e) / sqrt(6).
constexpr double kLogFadingMean = -kEulerGamma * kLog2E;
const double kLogFadingStd = 3.14159265358979323846 * kLog2E / std::sqrt(6.0);

SumConvolver::Law make_log_fading_law() {
  // Support truncated to [-40, 8]: P[W < -40] = 9.1e-13, P[W > 8] = 2e-112.
  return build_law(log_fading_density, log_fading_cdf, -40.0, 8.0,
                   kLogFadingMean, kLogFadingStd, 1e-3);
}

void check_exact_law_supported(const ChannelParams& params,
                               const char* op_name) {
  if (params.intra_round_diversity != 1) {
    throw std::invalid_argument(
        std::string(op_name) +
        ": exact sum laws support intra_round_diversity == 1 only");
  }
}

}  // namespace

}  // namespace detail

double mi_sum_cdf(const ChannelParams& params, int k, double threshold) {
  check(k >= 1, "mi_sum_cdf: k must be >= 1");
  detail::check_exact_law_supported(params, "mi_sum_cdf");
  if (threshold <= 0.0) return 0.0;
  if (k == 1) return mi_single_cdf(params.snr, threshold);
  detail::SumConvolver conv(detail::make_mi_law(params.snr));
  return conv.sum_cdf(k).at(threshold);
}

double mi_sum_quantile(const ChannelParams& params, int k, double p) {
  check(k >= 1, "mi_sum_quantile: k must be >= 1");
  check(p > 0.0 && p < 1.0, "mi_sum_quantile: p must be in (0,1)");
  detail::check_exact_law_supported(params, "mi_sum_quantile");
  if (k == 1) return mi_single_quantile(params.snr, p);
  detail::SumConvolver conv(detail::make_mi_law(params.snr));
  return conv.sum_cdf(k).quantile(p);
}

double log_fading_quantile(int k, double p) {
  check(k >= 1, "log_fading_quantile: k must be >= 1");
  check(p > 0.0 && p < 1.0, "log_fading_quantile: p must be in (0,1)");
  if (k == 1) return log_fading_single_quantile(p);
  detail::SumConvolver conv(detail::make_log_fading_law());
  return conv.sum_cdf(k).quantile(p) / static_cast<double>(k);
}

MutualInfoDist make_mi_distribution(const ChannelParams& params, int k,
                                    MiMode mode) {
  check(k >= 1, "make_mi_distribution: k must be >= 1");
  detail::check_exact_law_supported(params, "make_mi_distribution");
  MutualInfoDist dist;
  dist.snr = params.snr;
  dist.blocks = k;
  dist.mode = mode;
  dist.representation.kind = DistributionKind::grid_cdf;

  if (k == 1) {
    const detail::SumConvolver::Law law = detail::make_mi_law(params.snr);
    const Eigen::Index n = law.samples.size();
    dist.representation.grid =
        Eigen::ArrayXd::LinSpaced(n, 0.0, static_cast<double>(n - 1) * law.step);
    dist.representation.cdf.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      dist.representation.cdf[i] =
          mi_single_cdf(params.snr, dist.representation.grid[i]);
    }
  } else {
    detail::SumConvolver conv(detail::make_mi_law(params.snr));
    const auto& c = conv.sum_cdf(k);
    const Eigen::Index n = c.values.size();
    dist.representation.grid = Eigen::ArrayXd::LinSpaced(
        n, c.x0, c.x0 + static_cast<double>(n - 1) * c.step);
    dist.representation.cdf = c.values;
  }
  if (mode == MiMode::average) {
    dist.representation.grid /= static_cast<double>(k);
  }
  return dist;
}

MiSumEngine::MiSumEngine(const ChannelParams& params, int max_k)
    : snr_(params.snr), max_k_(max_k) {
  check(max_k >= 1, "MiSumEngine: max_k must be >= 1");
  detail::check_exact_law_supported(params, "MiSumEngine");
  conv_ = std::make_unique<detail::SumConvolver>(detail::make_mi_law(snr_));
}

MiSumEngine::~MiSumEngine() = default;

double MiSumEngine::cdf(int k, double threshold) const {
  check(k >= 1 && k <= max_k_, "MiSumEngine::cdf: k out of range");
  if (threshold <= 0.0) return 0.0;
  if (k == 1) return mi_single_cdf(snr_, threshold);
  return conv_->sum_cdf(k).at(threshold);
}

double MiSumEngine::quantile(int k, double p) const {
  check(k >= 1 && k <= max_k_, "MiSumEngine::quantile: k out of range");
  check(p > 0.0 && p < 1.0, "MiSumEngine::quantile: p must be in (0,1)");
  if (k == 1) return mi_single_quantile(snr_, p);
  return conv_->sum_cdf(k).quantile(p);
}

std::vector<double> MiSumEngine::cdf_prefix(double threshold, int kmax) const {
  check(kmax >= 1 && kmax <= max_k_, "MiSumEngine::cdf_prefix: k out of range");
  const double snr = snr_;
  return conv_->cdf_prefix(threshold, kmax, [snr](double t) {
    return mi_single_cdf(snr, t);
  });
}

double MiSumEngine::single_block_mean() const { return conv_->law().mean; }
double MiSumEngine::single_block_std() const { return conv_->law().stddev; }

}  // namespace harqrate
