#include "harqrate/outage_capacity.hpp"

#include <cmath>
#include <stdexcept>

#include "harqrate/special_math.hpp"

namespace harqrate {

OutageSpec::OutageSpec(double epsilon_, int diversity_)
    : epsilon(epsilon_), diversity(diversity_) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("OutageSpec: epsilon must be in (0,1)");
  }
  if (diversity < 1) {
    throw std::invalid_argument("OutageSpec: diversity must be >= 1");
  }
}

double outage_probability(const ChannelParams& params, int diversity,
                          double rate) {
  if (rate < 0.0) {
    throw std::invalid_argument("outage_probability: rate must be >= 0");
  }
  if (rate == 0.0) return 0.0;
  return mi_sum_cdf(params, diversity, diversity * rate);
}

CapacityResult eps_outage_capacity(const ChannelParams& params,
                                   const OutageSpec& spec) {
  CapacityResult out;
  out.method = CapacityMethod::exact;
  out.params = params;
  out.spec = spec;
  out.rate =
      mi_sum_quantile(params, spec.diversity, spec.epsilon) / spec.diversity;
  return out;
}

CapacityResult affine_approx_capacity(const ChannelParams& params,
                                      const OutageSpec& spec) {
  CapacityResult out;
  out.method = CapacityMethod::affine_approx;
  out.params = params;
  out.spec = spec;
  out.rate = std::log2(params.snr) +
             log_fading_quantile(spec.diversity, spec.epsilon);
  out.flagged = out.rate < 0.0;
  return out;
}

CapacityResult gaussian_approx_capacity(const ChannelParams& params,
                                        const OutageSpec& spec) {
  CapacityResult out;
  out.method = CapacityMethod::gaussian_approx;
  out.params = params;
  out.spec = spec;
  const double mu = mean_mutual_info(params);
  const double sigma = std_mutual_info(params);
  out.rate = mu - sigma / std::sqrt(static_cast<double>(spec.diversity)) *
                      q_inverse(spec.epsilon);
  out.flagged = out.rate < 0.0;
  return out;
}

CapacityBounds chebyshev_bounds(const ChannelParams& params,
                                const OutageSpec& spec) {
  const double mu = mean_mutual_info(params);
  const double sigma = std_mutual_info(params);
  const double half = sigma / std::sqrt(spec.diversity * spec.epsilon);
  return {mu - half, mu + half};
}

ErgodicGap gap_ec_fd(const ChannelParams& params, const OutageSpec& spec) {
  const double mu = mean_mutual_info(params);
  ErgodicGap gap;
  gap.exact = mu - eps_outage_capacity(params, spec).rate;
  gap.approx = std_mutual_info(params) /
               std::sqrt(static_cast<double>(spec.diversity)) *
               q_inverse(spec.epsilon);
  return gap;
}

}  // namespace harqrate
