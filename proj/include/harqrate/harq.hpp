// Long-term H-ARQ transmitted rates under a fixed post-termination outage
// target: incremental redundancy (mutual information accumulates) and Chase
// combining (SNR accumulates), their Gaussian approximations, gap-to-ergodic
// expansions, early-termination heuristics, and initial-rate optimization.

#pragma once

#include <Eigen/Dense>

#include <optional>

#include "harqrate/channel_stats.hpp"

namespace harqrate {

enum class HarqProtocol { incremental_redundancy, chase_combining };

struct HarqConfig {
  HarqProtocol protocol = HarqProtocol::incremental_redundancy;
  int max_rounds = 1;     // M
  double epsilon = 0.01;  // outage target at termination
  // Per-round transmission rate in bits/symbol; when absent the rate is set
  // so that outage at round M equals epsilon.
  std::optional<double> initial_rate;
  int symbols_per_round = 1;  // T; metadata only, rates are per symbol

  void validate() const;
};

struct HarqAnalysis {
  double initial_rate = 0.0;
  double expected_rounds = 1.0;  // E[X], in [1, M]
  double longterm_rate = 0.0;    // initial_rate / expected_rounds, exactly
  double outage_at_termination = 0.0;
  // P[X <= k] for k = 1..M.  Round M always ends the process, so the last
  // entry is 1; outage is tracked separately.
  Eigen::ArrayXd per_round_stop_cdf;
};

// A_k(r): probability the mutual information accumulated over k rounds
// stays below r.
double ak_probability(const ChannelParams& params, int k, double r_init);

// E[X] = 1 + sum_{k=1}^{M-1} A_k(r_init).
double expected_rounds_ir(const ChannelParams& params, int max_rounds,
                          double r_init);

// IR analysis at an explicit initial rate.
HarqAnalysis ir_analysis_at_rate(const ChannelParams& params, int max_rounds,
                                 double r_init);

// IR analysis at the outage-matched initial rate (the epsilon-quantile of
// the M-round accumulated mutual information).
HarqAnalysis ir_rate(const ChannelParams& params, int max_rounds,
                     double epsilon);

// Gaussian approximation of the IR long-term rate,
//   M [mu - (sigma/sqrt(M)) Q^{-1}(eps)]
//   / (M - sum_{k<M} Q((M-k) mu / (sigma sqrt(k)) - sqrt(M/k) Q^{-1}(eps))).
double ir_rate_gaussian(const ChannelParams& params, int max_rounds,
                        double epsilon);

// Large-M expansion of E[X]:
//   M - (sigma/mu) Q^{-1}(eps) sqrt(M) + 0.5 (1-eps)
//     - (sigma/mu) sqrt(M) int_{Q^{-1}(eps)}^inf Q(x) dx,
// with the tail integral in closed form, phi(q) - eps q.
double expected_rounds_approx(const ChannelParams& params, int max_rounds,
                              double epsilon);

struct GapEcIr {
  double exact = 0.0;           // mu - IR long-term rate
  double approx_full = 0.0;     // Gaussian-approximation ratio
  double approx_leading = 0.0;  // 0.5 (1 - eps) mu / M
};

GapEcIr gap_ec_ir(const ChannelParams& params, int max_rounds, double epsilon);

// Gaussian approximation of P[X <= M-1] at the outage-matched rate.
double early_termination_probability(const ChannelParams& params,
                                     int max_rounds, double epsilon);

// (mu / (sigma Q^{-1}(eps)))^2: roughly the smallest M for which early
// termination stays likely.
double min_rounds_heuristic(const ChannelParams& params, double epsilon);

struct RateOptimum {
  double r_init = 0.0;  // optimizing initial rate
  double rate = 0.0;    // achieved long-term rate
};

// max_{r <= A_M^{-1}(eps)} r / E[X](r); dense grid plus golden-section
// refinement of every bracketed local maximum.  Caches the per-round sum
// CDFs, so memory grows roughly as max_rounds^{3/2}; meant for the moderate
// round limits where optimization matters.
RateOptimum optimize_initial_rate(const ChannelParams& params, int max_rounds,
                                  double epsilon);

// Chase combining at an explicit initial rate.
HarqAnalysis cc_analysis_at_rate(const ChannelParams& params, int max_rounds,
                                 double r_init);

// Chase combining at the outage-matched rate log2(1 + t snr) with
// t = erlang_quantile(eps, M); E[X] is SNR-independent,
//   M - e^{-t} sum_{k<M} (M-k) t^{k-1}/(k-1)!.
HarqAnalysis cc_rate(const ChannelParams& params, int max_rounds,
                     double epsilon);

struct AffineExpansion {
  double prelog = 1.0;  // 1/E[X]
  double offset = 0.0;  // log2(t)/E[X]
};

// High-SNR affine expansion of the CC rate.
AffineExpansion cc_affine(const ChannelParams& params, int max_rounds,
                          double epsilon);

// CC initial-rate optimization, parameterized by the accumulated-SNR
// quantile argument t' <= erlang_quantile(eps, M) for conditioning.
RateOptimum optimize_cc_rate(const ChannelParams& params, int max_rounds,
                             double epsilon);

}  // namespace harqrate
