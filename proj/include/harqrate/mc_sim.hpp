// Protocol-level Monte Carlo simulation of the H-ARQ state machine:
// transmit, attempt decode, terminate early on success, truncate at M
// rounds, record outage.  The independent cross-check for every analytic
// rate in the library.
//
// Determinism contract: the fading draw for message i, round r (1-based),
// sub-channel l is rng::exponential(seed, draw_counter(i, M, F, r, l)), so
// reports are bit-identical for any worker-thread count and draws can be
// re-derived externally.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "harqrate/harq.hpp"

namespace harqrate {

struct SimConfig {
  ChannelParams channel;
  HarqConfig harq;
  std::int64_t messages = 1;
  std::uint64_t seed = 0;
  std::int64_t batch_size = 1 << 16;  // statistics merge in batch order

  void validate() const;
};

struct SimReport {
  double initial_rate = 0.0;  // resolved per-round rate used by the run
  double empirical_rate = 0.0;
  double empirical_expected_rounds = 0.0;
  double empirical_outage = 0.0;
  Eigen::Array<std::int64_t, Eigen::Dynamic, 1> rounds_histogram;  // size M
  double ci95_rate = 0.0;    // half-width, delta method on 1/mean(X)
  double ci95_outage = 0.0;  // half-width, Wilson interval
  std::uint64_t seed = 0;
};

inline std::uint64_t draw_counter(std::int64_t message, int max_rounds,
                                  int diversity, int round, int branch) {
  return (static_cast<std::uint64_t>(message) * max_rounds + (round - 1)) *
             diversity +
         branch;
}

struct MessageOutcome {
  int rounds = 0;
  bool outage = false;
};

// Protocol outcome for one message at the given per-round rate.
MessageOutcome simulate_message(const SimConfig& config, double r_init,
                                std::int64_t message_index);

// Runs the protocol for config.messages messages.  threads == 0 picks the
// worker count from HARQRATE_THREADS or the hardware concurrency; the
// result does not depend on the choice.
SimReport simulate(const SimConfig& config, int threads = 0);

// One report per grid point, with per-point seeds derived from the base
// seed and the grid value so that permuting the grid permutes the reports.
std::vector<SimReport> simulate_sweep(const SimConfig& base,
                                      const std::vector<double>& snr_grid_db,
                                      int threads = 0);

}  // namespace harqrate
