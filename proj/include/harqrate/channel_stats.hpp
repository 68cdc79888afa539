// Statistics of the per-block mutual information log2(1 + SNR |h|^2) under
// unit-variance Rayleigh fading: mean and standard deviation, CDFs and
// quantiles of k-block sums (by FFT convolution of the single-block density
// on a uniform grid), the SNR-free law of averaged log2|h|^2, and seeded
// Monte Carlo sampling.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <vector>

namespace harqrate {

struct ChannelParams {
  double snr = 1.0;               // average received SNR, linear, > 0
  int intra_round_diversity = 1;  // independent sub-channels per block (F)

  ChannelParams() = default;
  explicit ChannelParams(double snr_linear, int diversity = 1);
  static ChannelParams from_db(double snr_db, int diversity = 1);
  double snr_db() const;
};

enum class DistributionKind { grid_cdf, empirical };

// Numerical representation of a scalar random variable: either a CDF
// tabulated on a uniform grid or a bag of seeded i.i.d. draws.
struct DistributionEstimate {
  DistributionKind kind = DistributionKind::grid_cdf;

  Eigen::ArrayXd grid;  // grid_cdf: strictly increasing abscissae
  Eigen::ArrayXd cdf;   // grid_cdf: values in [0,1], nondecreasing

  Eigen::ArrayXd draws;           // empirical: draws in generation order
  std::int64_t sample_count = 0;  // empirical
  std::uint64_t seed = 0;         // empirical

  // P[X <= x]; 0 / 1 outside the tabulated or sampled range.
  double cdf_at(double x) const;
  // Smallest y with P[X <= y] = p (linear interpolation on the grid, or the
  // interpolated order statistic for empirical estimates).
  double quantile(double p) const;
};

enum class MiMode { sum, average };

// The law of  sum_{i<=k} log2(1 + SNR |h_i|^2)  (or its k-average).
struct MutualInfoDist {
  double snr = 1.0;
  int blocks = 1;
  MiMode mode = MiMode::sum;
  DistributionEstimate representation;
};

// Ergodic per-block mutual information, log2(e) e^{1/snr} E1(1/snr).
double mean_mutual_info(const ChannelParams& params);

// Standard deviation of the per-block mutual information, computed by
// adaptive quadrature of the centered second moment; divided by sqrt(F)
// when intra_round_diversity > 1.
double std_mutual_info(const ChannelParams& params);

// `count` i.i.d. draws of (1/F) sum_{l<=F} log2(1 + snr e_l), e_l ~ Exp(1).
// Identical (params, count, seed) give bit-identical output; draw l of
// sample i uses rng::exponential(seed, i*F + l).
DistributionEstimate sample_block_mi(const ChannelParams& params,
                                     std::int64_t count, std::uint64_t seed);

// P[sum_{i<=k} log2(1 + snr |h_i|^2) <= threshold].
double mi_sum_cdf(const ChannelParams& params, int k, double threshold);

// Inverse of mi_sum_cdf in the threshold.
double mi_sum_quantile(const ChannelParams& params, int k, double p);

// p-quantile of (1/k) sum_{i<=k} log2(|h_i|^2); SNR-independent.
double log_fading_quantile(int k, double p);

// Grid-CDF distribution object for the k-block sum or average.
MutualInfoDist make_mi_distribution(const ChannelParams& params, int k,
                                    MiMode mode = MiMode::sum);

namespace detail {

// Shared machinery for k-fold sums of a fixed single-block law sampled on a
// uniform grid.  The k-fold density is obtained by raising the DFT of the
// single-block samples (trapezoid endpoint weights) to the k-th power; the
// result is read off a window of +-16 sqrt(k) sigma around the mean, outside
// of which the CDF is indistinguishable from 0 or 1 at double precision.
class SumConvolver {
 public:
  struct Law {
    double step;               // grid step h
    std::int64_t first_index;  // support starts at first_index * h
    Eigen::ArrayXd samples;    // density at grid points, endpoints halved
    double mean;               // single-block mean
    double stddev;             // single-block standard deviation
  };

  explicit SumConvolver(Law law);

  struct Cdf {
    double x0 = 0.0;  // abscissa of cdf[0]
    double step = 0.0;
    Eigen::ArrayXd values;

    double at(double x) const;
    double quantile(double p) const;  // throws on bracketing failure
  };

  // Materialized CDF of the k-fold sum over its mass window (cached).
  const Cdf& sum_cdf(int k) const;

  // P[S_k <= t] for k = 1..kmax in a single streaming pass; `single_cdf`
  // must supply the exact k = 1 law.
  std::vector<double> cdf_prefix(
      double threshold, int kmax,
      const std::function<double(double)>& single_cdf) const;

  double step() const { return law_.step; }
  const Law& law() const { return law_; }

 private:
  struct Window {
    std::int64_t lo_index;  // absolute grid indices of the mass window
    std::int64_t hi_index;
    int fft_size;
  };
  Window window_for(int k) const;
  const std::vector<std::complex<double>>& forward(int fft_size) const;
  Eigen::ArrayXd windowed_density(int k, const Window& w) const;

  Law law_;
  mutable std::map<int, std::vector<std::complex<double>>> forward_cache_;
  mutable std::map<int, Cdf> cdf_cache_;
};

}  // namespace detail

// Reuses the sampled single-block density and its transform across many
// CDF/quantile evaluations for block counts up to max_k.  Instances are not
// thread-safe; create one per thread.  Results are identical to the
// free-function forms.
class MiSumEngine {
 public:
  MiSumEngine(const ChannelParams& params, int max_k);
  ~MiSumEngine();

  double cdf(int k, double threshold) const;
  double quantile(int k, double p) const;
  // A_1..A_kmax at a common threshold (one pass over k).
  std::vector<double> cdf_prefix(double threshold, int kmax) const;

  double single_block_mean() const;
  double single_block_std() const;

 private:
  double snr_;
  int max_k_;
  std::unique_ptr<detail::SumConvolver> conv_;
};

}  // namespace harqrate
