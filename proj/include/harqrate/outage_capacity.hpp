// Fixed-length (non-H-ARQ) coding over L fading blocks: outage probability,
// epsilon-outage capacity, its high-SNR affine and Gaussian approximations,
// Chebyshev bounds, and the gap to ergodic capacity.

#pragma once

#include "harqrate/channel_stats.hpp"

namespace harqrate {

struct OutageSpec {
  double epsilon = 0.01;  // target outage probability, in (0,1)
  int diversity = 1;      // fading blocks per codeword (L)

  OutageSpec() = default;
  OutageSpec(double epsilon_, int diversity_);
};

enum class CapacityMethod {
  exact,
  gaussian_approx,
  affine_approx,
  chebyshev_lower,
  chebyshev_upper,
};

struct CapacityResult {
  double rate = 0.0;  // bits/symbol
  CapacityMethod method = CapacityMethod::exact;
  ChannelParams params;
  OutageSpec spec;
  // Set when an approximation produced a negative rate (reported as-is).
  bool flagged = false;
};

// P[(1/L) sum_i log2(1 + snr |h_i|^2) <= rate].
double outage_probability(const ChannelParams& params, int diversity,
                          double rate);

// Largest rate with outage probability <= epsilon (quantile inversion).
CapacityResult eps_outage_capacity(const ChannelParams& params,
                                   const OutageSpec& spec);

// log2(snr) + p-quantile of (1/L) sum_i log2 |h_i|^2; tight as snr -> inf.
CapacityResult affine_approx_capacity(const ChannelParams& params,
                                      const OutageSpec& spec);

// mu - (sigma/sqrt(L)) Q^{-1}(epsilon); can go negative at low SNR, in
// which case the result is flagged rather than clamped.
CapacityResult gaussian_approx_capacity(const ChannelParams& params,
                                        const OutageSpec& spec);

struct CapacityBounds {
  double lower = 0.0;  // mu - sigma/sqrt(L epsilon)
  double upper = 0.0;  // mu + sigma/sqrt(L epsilon)
};

// Two-sided Chebyshev bounds around the ergodic capacity.
CapacityBounds chebyshev_bounds(const ChannelParams& params,
                                const OutageSpec& spec);

struct ErgodicGap {
  double exact = 0.0;   // mu - exact epsilon-outage capacity
  double approx = 0.0;  // (sigma/sqrt(L)) Q^{-1}(epsilon)
};

// Gap between ergodic capacity and the fixed-diversity rate.
ErgodicGap gap_ec_fd(const ChannelParams& params, const OutageSpec& spec);

}  // namespace harqrate
