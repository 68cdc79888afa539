#include "harqrate/harq.hpp"

#include <cmath>
#include <stdexcept>

#include "harqrate/special_math.hpp"

namespace harqrate {

namespace {

void check(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

// E[X] for Chase combining with accumulated-SNR quantile t:
//   M - e^{-t} sum_{k=1}^{M-1} (M-k) t^{k-1}/(k-1)!
double cc_expected_rounds(double t, int max_rounds) {
  double sum = 0.0;
  double power = 1.0;  // t^{k-1}/(k-1)!
  for (int k = 1; k < max_rounds; ++k) {
    sum += (max_rounds - k) * power;
    power *= t / k;
  }
  return max_rounds - std::exp(-t) * sum;
}

// Golden-section maximization on [a, b] to the given argument tolerance.
template <typename F>
std::pair<double, double> golden_max(const F& f, double a, double b,
                                     double tol) {
  constexpr double kInvPhi = 0.61803398874989484820;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

// Shared grid + bracket + golden-section scheme for the rate optimizers.
template <typename F>
RateOptimum maximize_on_grid(const F& objective, double upper) {
  constexpr int kGridPoints = 2000;
  constexpr double kArgTol = 1e-6;

  Eigen::ArrayXd r(kGridPoints), obj(kGridPoints);
  for (int j = 0; j < kGridPoints; ++j) {
    r[j] = upper * static_cast<double>(j + 1) / kGridPoints;
    obj[j] = objective(r[j]);
  }

  RateOptimum best{upper, obj[kGridPoints - 1]};
  for (int j = 1; j + 1 < kGridPoints; ++j) {
    if (obj[j] >= obj[j - 1] && obj[j] >= obj[j + 1]) {
      const auto [x, fx] = golden_max(objective, r[j - 1], r[j + 1], kArgTol);
      if (fx > best.rate) best = {x, fx};
    }
  }
  // The endpoint may sit on a rising stretch; refine its final cell too.
  const auto [x, fx] =
      golden_max(objective, r[kGridPoints - 2], upper, kArgTol);
  if (fx > best.rate) best = {x, fx};

  // Prefer the exact endpoint when it is not strictly beaten.
  const double at_upper = objective(upper);
  if (at_upper >= best.rate * (1.0 - 1e-10)) best = {upper, at_upper};
  return best;
}

}  // namespace

void HarqConfig::validate() const {
  check(max_rounds >= 1, "HarqConfig: max_rounds must be >= 1");
  check(epsilon > 0.0 && epsilon < 1.0, "HarqConfig: epsilon must be in (0,1)");
  check(!initial_rate || *initial_rate > 0.0,
        "HarqConfig: initial_rate must be > 0 when present");
  check(symbols_per_round >= 1, "HarqConfig: symbols_per_round must be >= 1");
}

double ak_probability(const ChannelParams& params, int k, double r_init) {
  check(r_init >= 0.0, "ak_probability: r_init must be >= 0");
  return mi_sum_cdf(params, k, r_init);
}

double expected_rounds_ir(const ChannelParams& params, int max_rounds,
                          double r_init) {
  check(max_rounds >= 1, "expected_rounds_ir: max_rounds must be >= 1");
  if (max_rounds == 1) return 1.0;
  MiSumEngine engine(params, max_rounds);
  const auto ak = engine.cdf_prefix(r_init, max_rounds - 1);
  double ex = 1.0;
  for (double a : ak) ex += a;
  return ex;
}

namespace {

HarqAnalysis ir_analysis(const MiSumEngine& engine, int max_rounds,
                         double r_init) {
  HarqAnalysis out;
  out.initial_rate = r_init;
  out.per_round_stop_cdf.resize(max_rounds);
  out.per_round_stop_cdf[max_rounds - 1] = 1.0;
  double ex = 1.0;
  if (max_rounds > 1) {
    const auto ak = engine.cdf_prefix(r_init, max_rounds - 1);
    for (int k = 1; k < max_rounds; ++k) {
      ex += ak[k - 1];
      out.per_round_stop_cdf[k - 1] = 1.0 - ak[k - 1];
    }
  }
  out.expected_rounds = ex;
  out.longterm_rate = r_init / ex;
  out.outage_at_termination = engine.cdf(max_rounds, r_init);
  return out;
}

}  // namespace

HarqAnalysis ir_analysis_at_rate(const ChannelParams& params, int max_rounds,
                                 double r_init) {
  check(max_rounds >= 1, "ir_analysis_at_rate: max_rounds must be >= 1");
  check(r_init > 0.0, "ir_analysis_at_rate: r_init must be > 0");
  MiSumEngine engine(params, max_rounds);
  return ir_analysis(engine, max_rounds, r_init);
}

HarqAnalysis ir_rate(const ChannelParams& params, int max_rounds,
                     double epsilon) {
  check(max_rounds >= 1, "ir_rate: max_rounds must be >= 1");
  MiSumEngine engine(params, max_rounds);
  const double r_init = engine.quantile(max_rounds, epsilon);
  return ir_analysis(engine, max_rounds, r_init);
}

double ir_rate_gaussian(const ChannelParams& params, int max_rounds,
                        double epsilon) {
  check(max_rounds >= 1, "ir_rate_gaussian: max_rounds must be >= 1");
  const double mu = mean_mutual_info(params);
  const double sigma = std_mutual_info(params);
  const double q = q_inverse(epsilon);
  const double m = max_rounds;
  const double numerator = m * (mu - sigma / std::sqrt(m) * q);
  double stop_sum = 0.0;
  for (int k = 1; k < max_rounds; ++k) {
    stop_sum += q_function((m - k) / std::sqrt(static_cast<double>(k)) *
                               (mu / sigma) -
                           std::sqrt(m / k) * q);
  }
  return numerator / (m - stop_sum);
}

double expected_rounds_approx(const ChannelParams& params, int max_rounds,
                              double epsilon) {
  check(max_rounds >= 1, "expected_rounds_approx: max_rounds must be >= 1");
  const double mu = mean_mutual_info(params);
  const double sigma = std_mutual_info(params);
  const double q = q_inverse(epsilon);
  const double sqrt_m = std::sqrt(static_cast<double>(max_rounds));
  return max_rounds - (sigma / mu) * q * sqrt_m + 0.5 * (1.0 - epsilon) -
         (sigma / mu) * sqrt_m * q_tail_integral(q);
}

GapEcIr gap_ec_ir(const ChannelParams& params, int max_rounds,
                  double epsilon) {
  const double mu = mean_mutual_info(params);
  const double sigma = std_mutual_info(params);
  const double q = q_inverse(epsilon);
  const double sqrt_m = std::sqrt(static_cast<double>(max_rounds));
  const double tail = q_tail_integral(q);

  GapEcIr gap;
  gap.exact = mu - ir_rate(params, max_rounds, epsilon).longterm_rate;
  const double numerator =
      mu * (0.5 * (1.0 - epsilon) - (sigma / mu) * sqrt_m * tail);
  const double denominator = max_rounds - (sigma / mu) * q * sqrt_m -
                             (sigma / mu) * sqrt_m * tail +
                             0.5 * (1.0 - epsilon);
  gap.approx_full = numerator / denominator;
  gap.approx_leading = 0.5 * (1.0 - epsilon) * mu / max_rounds;
  return gap;
}

double early_termination_probability(const ChannelParams& params,
                                     int max_rounds, double epsilon) {
  check(max_rounds >= 2, "early_termination_probability: requires M >= 2");
  const double mu = mean_mutual_info(params);
  const double sigma = std_mutual_info(params);
  const double q = q_inverse(epsilon);
  const double m = max_rounds;
  return q_function((mu - std::sqrt(m) * sigma * q) /
                    (sigma * std::sqrt(m - 1.0)));
}

double min_rounds_heuristic(const ChannelParams& params, double epsilon) {
  const double ratio = mean_mutual_info(params) /
                       (std_mutual_info(params) * q_inverse(epsilon));
  return ratio * ratio;
}

RateOptimum optimize_initial_rate(const ChannelParams& params, int max_rounds,
                                  double epsilon) {
  check(max_rounds >= 1, "optimize_initial_rate: max_rounds must be >= 1");
  MiSumEngine engine(params, max_rounds);
  const double upper = engine.quantile(max_rounds, epsilon);
  if (max_rounds == 1) return {upper, upper};

  const auto objective = [&engine, max_rounds](double r) {
    double ex = 1.0;
    for (int k = 1; k < max_rounds; ++k) ex += engine.cdf(k, r);
    return r / ex;
  };
  return maximize_on_grid(objective, upper);
}

namespace {

// Analysis from the accumulated-SNR threshold t = (2^r - 1)/snr; matching
// r_init supplied to avoid a lossy exp2/log2 round trip.
HarqAnalysis cc_analysis_from_t(double t, int max_rounds, double r_init) {
  HarqAnalysis out;
  out.initial_rate = r_init;
  out.expected_rounds = cc_expected_rounds(t, max_rounds);
  out.longterm_rate = r_init / out.expected_rounds;
  out.outage_at_termination = erlang_cdf(t, max_rounds);
  out.per_round_stop_cdf.resize(max_rounds);
  for (int k = 1; k < max_rounds; ++k) {
    out.per_round_stop_cdf[k - 1] = 1.0 - erlang_cdf(t, k);
  }
  out.per_round_stop_cdf[max_rounds - 1] = 1.0;
  return out;
}

}  // namespace

HarqAnalysis cc_analysis_at_rate(const ChannelParams& params, int max_rounds,
                                 double r_init) {
  check(max_rounds >= 1, "cc_analysis_at_rate: max_rounds must be >= 1");
  check(r_init > 0.0, "cc_analysis_at_rate: r_init must be > 0");
  const double t = (std::exp2(r_init) - 1.0) / params.snr;
  return cc_analysis_from_t(t, max_rounds, r_init);
}

HarqAnalysis cc_rate(const ChannelParams& params, int max_rounds,
                     double epsilon) {
  check(max_rounds >= 1, "cc_rate: max_rounds must be >= 1");
  const double t = erlang_quantile(epsilon, max_rounds);
  return cc_analysis_from_t(t, max_rounds, std::log2(1.0 + t * params.snr));
}

AffineExpansion cc_affine(const ChannelParams& params, int max_rounds,
                          double epsilon) {
  check(max_rounds >= 1, "cc_affine: max_rounds must be >= 1");
  const double t = erlang_quantile(epsilon, max_rounds);
  const double ex = cc_expected_rounds(t, max_rounds);
  (void)params;
  return {1.0 / ex, std::log2(t) / ex};
}

RateOptimum optimize_cc_rate(const ChannelParams& params, int max_rounds,
                             double epsilon) {
  check(max_rounds >= 1, "optimize_cc_rate: max_rounds must be >= 1");
  const double t_max = erlang_quantile(epsilon, max_rounds);
  const double snr = params.snr;
  const auto rate_of = [snr](double t) { return std::log2(1.0 + t * snr); };
  const auto objective = [&](double t) {
    return rate_of(t) / cc_expected_rounds(t, max_rounds);
  };
  const RateOptimum in_t = maximize_on_grid(objective, t_max);
  return {rate_of(in_t.r_init), in_t.rate};
}

}  // namespace harqrate
