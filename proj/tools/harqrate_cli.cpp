// Command-line front end: parameter sweeps over SNR/M/epsilon, preset
// figure recipes, analytic-vs-simulation comparison tables, CSV output.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage/validation error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "harqrate/harq.hpp"
#include "harqrate/mc_sim.hpp"
#include "harqrate/outage_capacity.hpp"
#include "harqrate/rng.hpp"
#include "harqrate/special_math.hpp"

namespace {

using namespace harqrate;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Range parsing: "a,b,c" lists or "start:stop:step" (inclusive) ranges.

std::vector<double> parse_double_range(const std::string& text,
                                       const char* flag) {
  std::vector<double> out;
  const auto fail = [&](const std::string& why) {
    throw UsageError(std::string(flag) + ": " + why + " ('" + text + "')");
  };
  if (text.find(':') != std::string::npos) {
    double start = 0.0, stop = 0.0, step = 0.0;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &start, &stop, &step,
                    &extra) != 3) {
      fail("expected start:stop:step");
    }
    if (step <= 0.0) fail("step must be > 0");
    if (stop < start) fail("empty range");
    for (int i = 0;; ++i) {
      const double v = start + i * step;
      if (v > stop + 1e-9 * std::max(1.0, std::abs(stop))) break;
      out.push_back(v);
    }
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      try {
        std::size_t used = 0;
        out.push_back(std::stod(item, &used));
        if (used != item.size()) fail("bad number '" + item + "'");
      } catch (const std::logic_error&) {
        fail("bad number '" + item + "'");
      }
    }
  }
  if (out.empty()) fail("empty list");
  return out;
}

std::vector<int> parse_int_range(const std::string& text, const char* flag) {
  std::vector<int> out;
  for (double v : parse_double_range(text, flag)) {
    const int i = static_cast<int>(std::llround(v));
    if (std::abs(v - i) > 1e-9 || i < 1) {
      throw UsageError(std::string(flag) + ": expects positive integers");
    }
    out.push_back(i);
  }
  return out;
}

void check_epsilons(const std::vector<double>& eps) {
  for (double e : eps) {
    if (!(e > 0.0 && e < 1.0)) {
      throw UsageError("--eps: values must be in (0,1)");
    }
  }
}

// ---------------------------------------------------------------------------
// CSV sink: rows are buffered and written at the end so that no file is
// created when a run fails validation or numerics.

class Csv {
 public:
  explicit Csv(std::vector<std::string> header)
      : columns_(std::move(header)) {}

  class Row {
   public:
    explicit Row(std::size_t expect) { cells_.reserve(expect); }
    Row& num(double v) {
      if (!std::isfinite(v)) {
        throw std::runtime_error("CSV cell would be non-finite");
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.9g", v);
      cells_.emplace_back(buf);
      return *this;
    }
    Row& integer(std::int64_t v) {
      cells_.push_back(std::to_string(v));
      return *this;
    }
    Row& text(std::string v) {
      cells_.push_back(std::move(v));
      return *this;
    }
    std::vector<std::string> cells_;
  };

  Row make_row() const { return Row(columns_.size()); }

  void push(Row row) {
    if (row.cells_.size() != columns_.size()) {
      throw std::logic_error("CSV row width mismatch");
    }
    rows_.push_back(std::move(row.cells_));
  }

  void write(const std::string& path) const {
    std::ostringstream body;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      body << (i ? "," : "") << columns_[i];
    }
    body << '\n';
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        body << (i ? "," : "") << row[i];
      }
      body << '\n';
    }
    if (path.empty()) {
      std::cout << body.str();
      return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open output file: " + path);
    file << body.str();
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

std::string tag(double v) {
  std::ostringstream s;
  s << v;
  std::string t = s.str();
  for (char& c : t) {
    if (c == '.') c = 'p';
    if (c == '-') c = 'm';
  }
  return t;
}

// ---------------------------------------------------------------------------
// Shared options.

struct SweepOptions {
  std::string snr = "10";
  std::string rounds = "1";
  std::string eps = "0.01";
  std::string out;
  std::uint64_t seed = 1;
  std::int64_t messages = 1000000;
  std::int64_t samples = 0;
  std::string protocol = "ir";
  bool optimize = false;
};

void add_common_flags(CLI::App* cmd, SweepOptions* opt, bool with_protocol,
                      bool with_messages) {
  cmd->add_option("--snr", opt->snr, "SNR grid in dB: list or start:stop:step");
  cmd->add_option("--M", opt->rounds, "rounds/diversity grid: list or range");
  cmd->add_option("--eps", opt->eps, "outage targets in (0,1)");
  cmd->add_option("--out", opt->out, "output CSV path (default: stdout)");
  cmd->add_option("--seed", opt->seed, "base RNG seed");
  cmd->add_option("--samples", opt->samples,
                  "Monte Carlo draws for quantile cross-check columns");
  if (with_protocol) {
    cmd->add_option("--protocol", opt->protocol, "H-ARQ protocol")
        ->check(CLI::IsMember({"ir", "cc"}));
  }
  if (with_messages) {
    cmd->add_option("--messages", opt->messages, "simulated messages");
  }
}

HarqProtocol parse_protocol(const std::string& name) {
  return name == "cc" ? HarqProtocol::chase_combining
                      : HarqProtocol::incremental_redundancy;
}

// Empirical capacity estimate from sampled k-block averages.
std::pair<double, double> mc_capacity_estimate(const ChannelParams& params,
                                               int diversity, double eps,
                                               std::int64_t samples,
                                               std::uint64_t seed) {
  std::vector<double> sums(samples);
  for (std::int64_t i = 0; i < samples; ++i) {
    double s = 0.0;
    for (int j = 0; j < diversity; ++j) {
      s += std::log2(1.0 +
                     params.snr * rng::exponential(seed, i * diversity + j));
    }
    sums[i] = s / diversity;
  }
  std::sort(sums.begin(), sums.end());
  const double pos = eps * (samples - 1);
  const auto lo = static_cast<std::int64_t>(pos);
  const double frac = pos - lo;
  const double value =
      sums[lo] + frac * (sums[std::min(lo + 1, samples - 1)] - sums[lo]);
  // Asymptotic SE from a central difference of the empirical CDF.
  const double delta = std::max(1e-3, 0.05 * std::abs(value));
  const auto rank = [&](double x) {
    return static_cast<double>(std::upper_bound(sums.begin(), sums.end(), x) -
                               sums.begin()) /
           samples;
  };
  const double density =
      std::max((rank(value + delta) - rank(value - delta)) / (2.0 * delta),
               1e-12);
  const double se = std::sqrt(eps * (1.0 - eps) / samples) / density;
  return {value, se};
}

// ---------------------------------------------------------------------------
// Subcommand bodies.

int run_capacity(const SweepOptions& opt) {
  const auto snrs = parse_double_range(opt.snr, "--snr");
  const auto rounds = parse_int_range(opt.rounds, "--M");
  const auto epsilons = parse_double_range(opt.eps, "--eps");
  check_epsilons(epsilons);

  std::vector<std::string> header = {
      "snr_db", "L",          "eps",        "capacity_exact",
      "gaussian", "gaussian_flagged", "affine", "cheb_lower",
      "cheb_upper", "ergodic", "gap_exact", "gap_gaussian"};
  if (opt.samples > 0) {
    header.push_back("mc_capacity");
    header.push_back("mc_se");
  }
  Csv csv(header);

  for (double db : snrs) {
    const auto params = ChannelParams::from_db(db);
    for (int diversity : rounds) {
      for (double eps : epsilons) {
        const OutageSpec spec(eps, diversity);
        const auto exact = eps_outage_capacity(params, spec);
        const auto gauss = gaussian_approx_capacity(params, spec);
        const auto affine = affine_approx_capacity(params, spec);
        const auto bounds = chebyshev_bounds(params, spec);
        const auto gap = gap_ec_fd(params, spec);
        auto row = csv.make_row();
        row.num(db)
            .integer(diversity)
            .num(eps)
            .num(exact.rate)
            .num(gauss.rate)
            .integer(gauss.flagged ? 1 : 0)
            .num(affine.rate)
            .num(bounds.lower)
            .num(bounds.upper)
            .num(mean_mutual_info(params))
            .num(gap.exact)
            .num(gap.approx);
        if (opt.samples > 0) {
          const auto [mc, se] = mc_capacity_estimate(params, diversity, eps,
                                                     opt.samples, opt.seed);
          row.num(mc).num(se);
        }
        csv.push(std::move(row));
      }
    }
  }
  csv.write(opt.out);
  return 0;
}

int run_harq_ir(const SweepOptions& opt) {
  const auto snrs = parse_double_range(opt.snr, "--snr");
  const auto rounds = parse_int_range(opt.rounds, "--M");
  const auto epsilons = parse_double_range(opt.eps, "--eps");
  check_epsilons(epsilons);

  std::vector<std::string> header = {"snr_db",
                                     "M",
                                     "eps",
                                     "initial_rate",
                                     "expected_rounds",
                                     "longterm_rate",
                                     "rate_gaussian",
                                     "expected_rounds_approx",
                                     "outage",
                                     "gap_exact",
                                     "gap_approx_full",
                                     "gap_approx_leading",
                                     "early_term_prob"};
  if (opt.optimize) {
    header.push_back("r_init_opt");
    header.push_back("rate_opt");
  }
  Csv csv(header);

  for (double db : snrs) {
    const auto params = ChannelParams::from_db(db);
    for (int m : rounds) {
      for (double eps : epsilons) {
        const auto a = ir_rate(params, m, eps);
        const auto gap = gap_ec_ir(params, m, eps);
        auto row = csv.make_row();
        row.num(db)
            .integer(m)
            .num(eps)
            .num(a.initial_rate)
            .num(a.expected_rounds)
            .num(a.longterm_rate)
            .num(ir_rate_gaussian(params, m, eps))
            .num(expected_rounds_approx(params, m, eps))
            .num(a.outage_at_termination)
            .num(gap.exact)
            .num(gap.approx_full)
            .num(gap.approx_leading)
            .num(m >= 2 ? early_termination_probability(params, m, eps) : 0.0);
        if (opt.optimize) {
          const auto best = optimize_initial_rate(params, m, eps);
          row.num(best.r_init).num(best.rate);
        }
        csv.push(std::move(row));
      }
    }
  }
  csv.write(opt.out);
  return 0;
}

int run_harq_cc(const SweepOptions& opt) {
  const auto snrs = parse_double_range(opt.snr, "--snr");
  const auto rounds = parse_int_range(opt.rounds, "--M");
  const auto epsilons = parse_double_range(opt.eps, "--eps");
  check_epsilons(epsilons);

  std::vector<std::string> header = {
      "snr_db", "M",      "eps",   "initial_rate", "expected_rounds",
      "longterm_rate", "prelog", "offset"};
  if (opt.optimize) {
    header.push_back("r_init_opt");
    header.push_back("rate_opt");
  }
  Csv csv(header);

  for (double db : snrs) {
    const auto params = ChannelParams::from_db(db);
    for (int m : rounds) {
      for (double eps : epsilons) {
        const auto a = cc_rate(params, m, eps);
        const auto affine = cc_affine(params, m, eps);
        auto row = csv.make_row();
        row.num(db)
            .integer(m)
            .num(eps)
            .num(a.initial_rate)
            .num(a.expected_rounds)
            .num(a.longterm_rate)
            .num(affine.prelog)
            .num(affine.offset);
        if (opt.optimize) {
          const auto best = optimize_cc_rate(params, m, eps);
          row.num(best.r_init).num(best.rate);
        }
        csv.push(std::move(row));
      }
    }
  }
  csv.write(opt.out);
  return 0;
}

int run_optimize(const SweepOptions& opt) {
  const auto snrs = parse_double_range(opt.snr, "--snr");
  const auto rounds = parse_int_range(opt.rounds, "--M");
  const auto epsilons = parse_double_range(opt.eps, "--eps");
  check_epsilons(epsilons);
  const bool cc = parse_protocol(opt.protocol) == HarqProtocol::chase_combining;

  Csv csv({"snr_db", "M", "eps", "protocol", "r_init_matched", "rate_matched",
           "r_init_opt", "rate_opt", "gain"});
  for (double db : snrs) {
    const auto params = ChannelParams::from_db(db);
    for (int m : rounds) {
      for (double eps : epsilons) {
        const auto matched =
            cc ? cc_rate(params, m, eps) : ir_rate(params, m, eps);
        const auto best = cc ? optimize_cc_rate(params, m, eps)
                             : optimize_initial_rate(params, m, eps);
        auto row = csv.make_row();
        row.num(db)
            .integer(m)
            .num(eps)
            .text(cc ? "cc" : "ir")
            .num(matched.initial_rate)
            .num(matched.longterm_rate)
            .num(best.r_init)
            .num(best.rate)
            .num(best.rate - matched.longterm_rate);
        csv.push(std::move(row));
      }
    }
  }
  csv.write(opt.out);
  return 0;
}

int run_simulate(const SweepOptions& opt) {
  const auto snrs = parse_double_range(opt.snr, "--snr");
  const auto rounds = parse_int_range(opt.rounds, "--M");
  const auto epsilons = parse_double_range(opt.eps, "--eps");
  check_epsilons(epsilons);

  Csv csv({"snr_db", "M", "eps", "protocol", "messages", "seed",
           "initial_rate", "empirical_rate", "empirical_expected_rounds",
           "empirical_outage", "ci95_rate", "ci95_outage"});
  for (int m : rounds) {
    for (double eps : epsilons) {
      SimConfig base;
      base.harq.protocol = parse_protocol(opt.protocol);
      base.harq.max_rounds = m;
      base.harq.epsilon = eps;
      base.messages = opt.messages;
      base.seed = opt.seed;
      base.batch_size = std::min<std::int64_t>(opt.messages, 1 << 16);
      const auto reports = simulate_sweep(base, snrs);
      for (std::size_t i = 0; i < snrs.size(); ++i) {
        const auto& report = reports[i];
        auto row = csv.make_row();
        row.num(snrs[i])
            .integer(m)
            .num(eps)
            .text(opt.protocol)
            .integer(opt.messages)
            .integer(static_cast<std::int64_t>(report.seed))
            .num(report.initial_rate)
            .num(report.empirical_rate)
            .num(report.empirical_expected_rounds)
            .num(report.empirical_outage)
            .num(report.ci95_rate)
            .num(report.ci95_outage);
        csv.push(std::move(row));
      }
    }
  }
  csv.write(opt.out);
  return 0;
}

int run_compare(const SweepOptions& opt) {
  const auto snrs = parse_double_range(opt.snr, "--snr");
  const auto rounds = parse_int_range(opt.rounds, "--M");
  const auto epsilons = parse_double_range(opt.eps, "--eps");
  check_epsilons(epsilons);
  const bool cc = parse_protocol(opt.protocol) == HarqProtocol::chase_combining;

  Csv csv({"snr_db", "M", "eps", "protocol", "messages", "seed",
           "analytic_rate", "simulated_rate", "ci95_rate", "z_rate",
           "empirical_outage", "ci95_outage", "z_outage"});
  for (double db : snrs) {
    const auto params = ChannelParams::from_db(db);
    for (int m : rounds) {
      for (double eps : epsilons) {
        const auto analytic =
            cc ? cc_rate(params, m, eps) : ir_rate(params, m, eps);
        SimConfig config;
        config.channel = params;
        config.harq.protocol = parse_protocol(opt.protocol);
        config.harq.max_rounds = m;
        config.harq.epsilon = eps;
        config.messages = opt.messages;
        config.seed = opt.seed;
        config.batch_size = std::min<std::int64_t>(opt.messages, 1 << 16);
        const auto report = simulate(config);

        const double se_rate = report.ci95_rate / 1.959963984540054;
        const double se_outage =
            std::sqrt(eps * (1.0 - eps) / static_cast<double>(opt.messages));
        auto row = csv.make_row();
        row.num(db)
            .integer(m)
            .num(eps)
            .text(cc ? "cc" : "ir")
            .integer(opt.messages)
            .integer(static_cast<std::int64_t>(opt.seed))
            .num(analytic.longterm_rate)
            .num(report.empirical_rate)
            .num(report.ci95_rate)
            .num((report.empirical_rate - analytic.longterm_rate) /
                 std::max(se_rate, 1e-300))
            .num(report.empirical_outage)
            .num(report.ci95_outage)
            .num((report.empirical_outage - eps) / se_outage);
        csv.push(std::move(row));
      }
    }
  }
  csv.write(opt.out);
  return 0;
}

// ---------------------------------------------------------------------------
// Figure presets: canned sweeps producing the standard curves for this
// analysis; every default can be overridden on the command line.

struct FigureOptions {
  int index = 0;
  SweepOptions sweep;
  bool snr_set = false;
  bool rounds_set = false;
  bool eps_set = false;
};

int run_figure(const FigureOptions& fig) {
  SweepOptions opt = fig.sweep;
  const double eps0 = parse_double_range(opt.eps, "--eps")[0];
  check_epsilons({eps0});

  switch (fig.index) {
    case 1: {
      // High-SNR rate offset versus diversity order.
      if (!fig.rounds_set) opt.rounds = "1:30:1";
      const auto ls = parse_int_range(opt.rounds, "--M");
      Csv csv({"L", "rate_offset"});
      for (int l : ls) {
        auto row = csv.make_row();
        row.integer(l).num(-log_fading_quantile(l, eps0));
        csv.push(std::move(row));
      }
      csv.write(opt.out);
      return 0;
    }
    case 2: {
      // Exact vs Gaussian CDFs of the per-block-average mutual information.
      if (!fig.snr_set) opt.snr = "0,10,20";
      if (!fig.rounds_set) opt.rounds = "2,10";
      const auto snrs = parse_double_range(opt.snr, "--snr");
      const auto ls = parse_int_range(opt.rounds, "--M");
      std::vector<std::string> header = {"rate"};
      for (double db : snrs) {
        for (int l : ls) {
          header.push_back("cdf_L" + std::to_string(l) + "_snr" + tag(db));
          header.push_back("gauss_L" + std::to_string(l) + "_snr" + tag(db));
        }
      }
      Csv csv(header);
      for (double r = 0.025; r <= 8.0; r += 0.025) {
        auto row = csv.make_row();
        row.num(r);
        for (double db : snrs) {
          const auto params = ChannelParams::from_db(db);
          const double mu = mean_mutual_info(params);
          const double sigma = std_mutual_info(params);
          for (int l : ls) {
            row.num(outage_probability(params, l, r));
            row.num(q_function(std::sqrt(static_cast<double>(l)) / sigma *
                               (mu - r)));
          }
        }
        csv.push(std::move(row));
      }
      csv.write(opt.out);
      return 0;
    }
    case 3: {
      // Exact, Gaussian, and affine capacity versus SNR.
      if (!fig.snr_set) opt.snr = "0:40:1";
      if (!fig.rounds_set) opt.rounds = "3,10";
      const auto snrs = parse_double_range(opt.snr, "--snr");
      const auto ls = parse_int_range(opt.rounds, "--M");
      std::vector<std::string> header = {"snr_db"};
      for (int l : ls) {
        header.push_back("exact_L" + std::to_string(l));
        header.push_back("gauss_L" + std::to_string(l));
        header.push_back("affine_L" + std::to_string(l));
      }
      Csv csv(header);
      std::vector<double> offsets;
      for (int l : ls) offsets.push_back(log_fading_quantile(l, eps0));
      for (double db : snrs) {
        const auto params = ChannelParams::from_db(db);
        auto row = csv.make_row();
        row.num(db);
        for (std::size_t i = 0; i < ls.size(); ++i) {
          const OutageSpec spec(eps0, ls[i]);
          row.num(eps_outage_capacity(params, spec).rate);
          row.num(gaussian_approx_capacity(params, spec).rate);
          row.num(std::log2(params.snr) + offsets[i]);
        }
        csv.push(std::move(row));
      }
      csv.write(opt.out);
      return 0;
    }
    case 4: {
      // Ergodic-capacity gap versus diversity order at fixed SNR.
      if (!fig.snr_set) opt.snr = "20";
      if (!fig.rounds_set) opt.rounds = "1:64:1";
      if (!fig.eps_set) opt.eps = "0.01,0.05";
      const double db = parse_double_range(opt.snr, "--snr")[0];
      const auto ls = parse_int_range(opt.rounds, "--M");
      const auto epsilons = parse_double_range(opt.eps, "--eps");
      check_epsilons(epsilons);
      const auto params = ChannelParams::from_db(db);
      std::vector<std::string> header = {"L"};
      for (double e : epsilons) {
        header.push_back("gap_exact_eps" + tag(e));
        header.push_back("gap_gauss_eps" + tag(e));
      }
      Csv csv(header);
      for (int l : ls) {
        auto row = csv.make_row();
        row.integer(l);
        for (double e : epsilons) {
          const auto gap = gap_ec_fd(params, OutageSpec(e, l));
          row.num(gap.exact).num(gap.approx);
        }
        csv.push(std::move(row));
      }
      csv.write(opt.out);
      return 0;
    }
    case 5: {
      // Ergodic capacity, H-ARQ rates, and fixed-length rates versus SNR.
      if (!fig.snr_set) opt.snr = "0:40:1";
      if (!fig.rounds_set) opt.rounds = "1,2,6";
      const auto snrs = parse_double_range(opt.snr, "--snr");
      const auto ms = parse_int_range(opt.rounds, "--M");
      std::vector<std::string> header = {"snr_db", "ergodic"};
      for (int m : ms) {
        if (m >= 2) header.push_back("c_ir_" + std::to_string(m));
      }
      for (int m : ms) header.push_back("c_eps_" + std::to_string(m));
      Csv csv(header);
      for (double db : snrs) {
        const auto params = ChannelParams::from_db(db);
        auto row = csv.make_row();
        row.num(db).num(mean_mutual_info(params));
        for (int m : ms) {
          if (m >= 2) row.num(ir_rate(params, m, eps0).longterm_rate);
        }
        for (int m : ms) {
          row.num(eps_outage_capacity(params, OutageSpec(eps0, m)).rate);
        }
        csv.push(std::move(row));
      }
      csv.write(opt.out);
      return 0;
    }
    case 6: {
      // Gap to ergodic capacity versus the round limit.
      if (!fig.snr_set) opt.snr = "10";
      if (!fig.rounds_set) {
        opt.rounds = "1,2,3,4,5,6,8,10,13,16,20,25,32,40,50,63,79,100";
      }
      const double db = parse_double_range(opt.snr, "--snr")[0];
      const auto ms = parse_int_range(opt.rounds, "--M");
      const auto params = ChannelParams::from_db(db);
      Csv csv({"M", "gap_ir_exact", "gap_ir_approx_full",
               "gap_ir_approx_leading", "gap_fd_exact"});
      for (int m : ms) {
        const auto gap = gap_ec_ir(params, m, eps0);
        const auto fd = gap_ec_fd(params, OutageSpec(eps0, m));
        auto row = csv.make_row();
        row.integer(m)
            .num(gap.exact)
            .num(gap.approx_full)
            .num(gap.approx_leading)
            .num(fd.exact);
        csv.push(std::move(row));
      }
      csv.write(opt.out);
      return 0;
    }
    case 7: {
      // CDFs of accumulated mutual information over 2 and 3 rounds.
      if (!fig.snr_set) opt.snr = "10,40";
      if (!fig.rounds_set) opt.rounds = "2,3";
      const auto snrs = parse_double_range(opt.snr, "--snr");
      const auto ks = parse_int_range(opt.rounds, "--M");
      std::vector<std::string> header = {"total_bits"};
      for (double db : snrs) {
        for (int k : ks) {
          header.push_back("cdf_k" + std::to_string(k) + "_snr" + tag(db));
        }
      }
      Csv csv(header);
      for (double t = 0.25; t <= 45.0; t += 0.25) {
        auto row = csv.make_row();
        row.num(t);
        for (double db : snrs) {
          const auto params = ChannelParams::from_db(db);
          for (int k : ks) row.num(mi_sum_cdf(params, k, t));
        }
        csv.push(std::move(row));
      }
      csv.write(opt.out);
      return 0;
    }
    case 8: {
      // Long-term rate versus the initial rate.
      if (!fig.snr_set) opt.snr = "10";
      if (!fig.rounds_set) opt.rounds = "2,3,4";
      const double db = parse_double_range(opt.snr, "--snr")[0];
      const auto ms = parse_int_range(opt.rounds, "--M");
      const auto params = ChannelParams::from_db(db);
      const int max_m = *std::max_element(ms.begin(), ms.end());
      MiSumEngine engine(params, max_m);
      std::vector<std::string> header = {"r_init"};
      for (int m : ms) header.push_back("rate_M" + std::to_string(m));
      Csv csv(header);
      const double r_hi = engine.quantile(max_m, eps0);
      for (int i = 1; i <= 400; ++i) {
        const double r = r_hi * i / 400.0;
        auto row = csv.make_row();
        row.num(r);
        for (int m : ms) {
          double ex = 1.0;
          for (int k = 1; k < m; ++k) ex += engine.cdf(k, r);
          row.num(r / ex);
        }
        csv.push(std::move(row));
      }
      csv.write(opt.out);
      return 0;
    }
    case 9: {
      // Optimized and unoptimized H-ARQ rate versus SNR.
      if (!fig.snr_set) opt.snr = "0:2:60";
      if (!fig.rounds_set) opt.rounds = "2,6";
      const auto snrs = parse_double_range(opt.snr, "--snr");
      const auto ms = parse_int_range(opt.rounds, "--M");
      std::vector<std::string> header = {"snr_db"};
      for (int m : ms) {
        header.push_back("c_ir_" + std::to_string(m));
        header.push_back("c_ir_opt_" + std::to_string(m));
        header.push_back("c_eps_" + std::to_string(m));
      }
      Csv csv(header);
      for (double db : snrs) {
        const auto params = ChannelParams::from_db(db);
        auto row = csv.make_row();
        row.num(db);
        for (int m : ms) {
          row.num(ir_rate(params, m, eps0).longterm_rate);
          row.num(optimize_initial_rate(params, m, eps0).rate);
          row.num(eps_outage_capacity(params, OutageSpec(eps0, m)).rate);
        }
        csv.push(std::move(row));
      }
      csv.write(opt.out);
      return 0;
    }
    case 10: {
      // Rate sensitivity to the outage target.
      if (!fig.snr_set) opt.snr = "0,10,20";
      if (!fig.rounds_set) opt.rounds = "5";
      if (!fig.eps_set) {
        opt.eps = "0.01,0.014,0.02,0.03,0.05,0.07,0.1,0.14,0.2,0.3,0.4,0.5";
      }
      const auto snrs = parse_double_range(opt.snr, "--snr");
      const int m = parse_int_range(opt.rounds, "--M")[0];
      const auto epsilons = parse_double_range(opt.eps, "--eps");
      check_epsilons(epsilons);
      std::vector<std::string> header = {"eps"};
      for (double db : snrs) {
        header.push_back("c_ir_snr" + tag(db));
        header.push_back("c_eps_snr" + tag(db));
      }
      Csv csv(header);
      for (double e : epsilons) {
        auto row = csv.make_row();
        row.num(e);
        for (double db : snrs) {
          const auto params = ChannelParams::from_db(db);
          row.num(ir_rate(params, m, e).longterm_rate);
          row.num(eps_outage_capacity(params, OutageSpec(e, m)).rate);
        }
        csv.push(std::move(row));
      }
      csv.write(opt.out);
      return 0;
    }
    case 11: {
      // Rate-optimized incremental redundancy versus Chase combining.
      if (!fig.snr_set) opt.snr = "0:2:40";
      if (!fig.rounds_set) opt.rounds = "2,4";
      const auto snrs = parse_double_range(opt.snr, "--snr");
      const auto ms = parse_int_range(opt.rounds, "--M");
      std::vector<std::string> header = {"snr_db"};
      for (int m : ms) {
        header.push_back("ir_opt_" + std::to_string(m));
        header.push_back("cc_opt_" + std::to_string(m));
      }
      Csv csv(header);
      for (double db : snrs) {
        const auto params = ChannelParams::from_db(db);
        auto row = csv.make_row();
        row.num(db);
        for (int m : ms) {
          row.num(optimize_initial_rate(params, m, eps0).rate);
          row.num(optimize_cc_rate(params, m, eps0).rate);
        }
        csv.push(std::move(row));
      }
      csv.write(opt.out);
      return 0;
    }
    default:
      throw UsageError("figure: index must be 1..11");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "harqrate: fixed-outage rate analysis for H-ARQ over Rayleigh "
      "block-fading channels"};
  app.require_subcommand(1);

  SweepOptions capacity_opt, ir_opt, cc_opt, optimize_opt, simulate_opt,
      compare_opt;
  FigureOptions figure_opt;

  auto* capacity = app.add_subcommand(
      "capacity", "epsilon-outage capacity, approximations, and bounds");
  add_common_flags(capacity, &capacity_opt, false, false);

  auto* harq_ir = app.add_subcommand(
      "harq-ir", "incremental-redundancy H-ARQ long-term rate analysis");
  add_common_flags(harq_ir, &ir_opt, false, false);
  harq_ir->add_flag("--optimize", ir_opt.optimize,
                    "add initial-rate optimization columns");

  auto* harq_cc =
      app.add_subcommand("harq-cc", "Chase-combining H-ARQ rate analysis");
  add_common_flags(harq_cc, &cc_opt, false, false);
  harq_cc->add_flag("--optimize", cc_opt.optimize,
                    "add initial-rate optimization columns");

  auto* optimize = app.add_subcommand(
      "optimize", "initial-rate optimization for either protocol");
  add_common_flags(optimize, &optimize_opt, true, false);

  auto* simulate = app.add_subcommand(
      "simulate", "Monte Carlo protocol simulation of the H-ARQ state machine");
  add_common_flags(simulate, &simulate_opt, true, true);

  auto* compare = app.add_subcommand(
      "compare", "analytic vs simulated rates with confidence intervals");
  add_common_flags(compare, &compare_opt, true, true);

  auto* figure = app.add_subcommand(
      "figure", "preset sweeps producing standard curves (1..11)");
  figure->add_option("index", figure_opt.index, "figure number, 1..11")
      ->required();
  add_common_flags(figure, &figure_opt.sweep, false, false);

  try {
    app.parse(argc, argv);
    figure_opt.snr_set = figure->count("--snr") > 0;
    figure_opt.rounds_set = figure->count("--M") > 0;
    figure_opt.eps_set = figure->count("--eps") > 0;

    if (capacity->parsed()) return run_capacity(capacity_opt);
    if (harq_ir->parsed()) return run_harq_ir(ir_opt);
    if (harq_cc->parsed()) return run_harq_cc(cc_opt);
    if (optimize->parsed()) return run_optimize(optimize_opt);
    if (simulate->parsed()) return run_simulate(simulate_opt);
    if (compare->parsed()) return run_compare(compare_opt);
    if (figure->parsed()) return run_figure(figure_opt);
    return 2;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 1;
  }
}
