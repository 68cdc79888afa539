#include "harqrate/mc_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "harqrate/rng.hpp"
#include "harqrate/special_math.hpp"

namespace harqrate {

namespace {

struct BatchStats {
  std::int64_t sum_rounds = 0;
  std::int64_t sum_rounds_sq = 0;
  std::int64_t outages = 0;
  std::vector<std::int64_t> histogram;
};

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  if (const char* env = std::getenv("HARQRATE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hw, 1u, 8u));
}

double resolve_initial_rate(const SimConfig& config) {
  if (config.harq.initial_rate) return *config.harq.initial_rate;
  if (config.harq.protocol == HarqProtocol::incremental_redundancy) {
    return mi_sum_quantile(config.channel, config.harq.max_rounds,
                           config.harq.epsilon);
  }
  const double t = erlang_quantile(config.harq.epsilon, config.harq.max_rounds);
  return std::log2(1.0 + t * config.channel.snr);
}

// Runs messages [first, last) and accumulates integer statistics.
BatchStats run_batch(const SimConfig& config, double r_init,
                     std::int64_t first, std::int64_t last) {
  BatchStats stats;
  stats.histogram.assign(config.harq.max_rounds, 0);
  for (std::int64_t i = first; i < last; ++i) {
    const MessageOutcome outcome = simulate_message(config, r_init, i);
    stats.sum_rounds += outcome.rounds;
    stats.sum_rounds_sq +=
        static_cast<std::int64_t>(outcome.rounds) * outcome.rounds;
    stats.histogram[outcome.rounds - 1] += 1;
    if (outcome.outage) stats.outages += 1;
  }
  return stats;
}

// Wilson 95% interval half-width for a binomial proportion.
double wilson_half_width(double p_hat, double n) {
  const double z = 1.959963984540054;
  const double z2 = z * z;
  return z * std::sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)) /
         (1.0 + z2 / n);
}

}  // namespace

MessageOutcome simulate_message(const SimConfig& config, double r_init,
                                std::int64_t message_index) {
  const int m = config.harq.max_rounds;
  const int f = config.channel.intra_round_diversity;
  const double snr = config.channel.snr;
  const bool ir =
      config.harq.protocol == HarqProtocol::incremental_redundancy;

  double metric = 0.0;  // accumulated mutual information (IR) or SNR (CC)
  for (int r = 1; r <= m; ++r) {
    if (ir) {
      double mi = 0.0;
      for (int l = 0; l < f; ++l) {
        mi += std::log2(1.0 + snr * rng::exponential(
                                  config.seed,
                                  draw_counter(message_index, m, f, r, l)));
      }
      metric += mi / f;
      if (metric > r_init) return {r, false};  // ties count as failure
    } else {
      metric += snr * rng::exponential(config.seed,
                                       draw_counter(message_index, m, f, r, 0));
      if (std::log2(1.0 + metric) > r_init) return {r, false};
    }
  }
  return {m, true};
}

void SimConfig::validate() const {
  harq.validate();
  if (messages < 1) throw std::invalid_argument("SimConfig: messages >= 1");
  if (batch_size < 1 || batch_size > messages) {
    throw std::invalid_argument(
        "SimConfig: batch_size must be in [1, messages]");
  }
  if (harq.protocol == HarqProtocol::chase_combining &&
      channel.intra_round_diversity != 1) {
    throw std::invalid_argument(
        "SimConfig: Chase combining supports intra_round_diversity == 1 only");
  }
}

SimReport simulate(const SimConfig& config, int threads) {
  config.validate();
  const double r_init = resolve_initial_rate(config);
  const std::int64_t n = config.messages;
  const std::int64_t batch = config.batch_size;
  const auto num_batches = static_cast<std::int64_t>((n + batch - 1) / batch);
  const int workers =
      static_cast<int>(std::min<std::int64_t>(resolve_threads(threads),
                                              num_batches));

  // Per-batch partials, merged in batch order below; the accumulators are
  // integers, so the merged totals cannot depend on scheduling anyway.
  std::vector<BatchStats> partials(num_batches);
  const auto worker = [&](int w) {
    for (std::int64_t b = w; b < num_batches; b += workers) {
      const std::int64_t first = b * batch;
      const std::int64_t last = std::min(n, first + batch);
      partials[b] = run_batch(config, r_init, first, last);
    }
  };
  if (workers <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }

  BatchStats total;
  total.histogram.assign(config.harq.max_rounds, 0);
  for (const auto& p : partials) {
    total.sum_rounds += p.sum_rounds;
    total.sum_rounds_sq += p.sum_rounds_sq;
    total.outages += p.outages;
    for (std::size_t r = 0; r < p.histogram.size(); ++r) {
      total.histogram[r] += p.histogram[r];
    }
  }

  SimReport report;
  report.initial_rate = r_init;
  report.seed = config.seed;
  report.rounds_histogram.resize(config.harq.max_rounds);
  for (int r = 0; r < config.harq.max_rounds; ++r) {
    report.rounds_histogram[r] = total.histogram[r];
  }
  const double nn = static_cast<double>(n);
  const double mean_rounds = static_cast<double>(total.sum_rounds) / nn;
  report.empirical_expected_rounds = mean_rounds;
  report.empirical_rate = r_init / mean_rounds;
  report.empirical_outage = static_cast<double>(total.outages) / nn;

  // Delta method on rate = r_init / mean(X).
  double var_rounds = 0.0;
  if (n > 1) {
    var_rounds = (static_cast<double>(total.sum_rounds_sq) -
                  nn * mean_rounds * mean_rounds) /
                 (nn - 1.0);
  }
  report.ci95_rate = 1.959963984540054 * r_init /
                     (mean_rounds * mean_rounds) *
                     std::sqrt(var_rounds / nn);
  report.ci95_outage = wilson_half_width(report.empirical_outage, nn);
  return report;
}

std::vector<SimReport> simulate_sweep(const SimConfig& base,
                                      const std::vector<double>& snr_grid_db,
                                      int threads) {
  if (snr_grid_db.empty()) {
    throw std::invalid_argument("simulate_sweep: grid must be nonempty");
  }
  std::vector<SimReport> reports;
  reports.reserve(snr_grid_db.size());
  for (const double db : snr_grid_db) {
    SimConfig point = base;
    point.channel =
        ChannelParams::from_db(db, base.channel.intra_round_diversity);
    // Value-derived seeds keep report <-> grid-point pairing stable under
    // reordering of the grid.
    point.seed =
        rng::derive_seed(base.seed, std::bit_cast<std::uint64_t>(db));
    point.batch_size = std::min(point.batch_size, point.messages);
    reports.push_back(simulate(point, threads));
  }
  return reports;
}

}  // namespace harqrate
