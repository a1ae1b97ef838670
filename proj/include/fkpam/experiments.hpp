#pragma once

// Validation campaigns: rate sweeps of the difference variance, u_eps -> u
// convergence, rough-period tails, FK-vs-PDE cross-checks, annealed moment
// stability and kernel bound sweeps. Each produces a CSV table and a verdict.

#include <cstdint>
#include <string>
#include <vector>

#include "fkpam/fk.hpp"
#include "fkpam/stats.hpp"
#include "fkpam/walk.hpp"

namespace fkpam {

std::string version_string();

struct SweepSpec {
  std::string name = "experiment";
  std::string kind = "rate_sweep";
  std::vector<double> hursts{0.25, 0.5, 0.75};
  std::vector<double> epsilons;  // strictly decreasing
  double kappa = 1.0;
  int dim = 1;
  double horizon = 1.0;
  std::size_t n_samples = 1000;
  std::uint64_t master_seed = 1;
  unsigned workers = 1;
  bool noise = true;

  std::vector<std::size_t> jumps{0, 3, 10};     // rate_sweep: fixed paths with these jump counts
  std::vector<double> deltas{0.1, 0.05, 0.025};  // rough_tail
  std::size_t realizations = 20;                 // fk_pde_crosscheck: noise draws; ueps/moments: outer draws
  std::size_t inner = 1000;                      // walks per noise draw
  double step = 0.0;                             // noise grid step, 0 = automatic
  std::vector<double> lengths{0.25, 1.0};        // kernel_bounds: t2 - t1

  void validate() const;
};

struct ExperimentOutput {
  std::string csv;      // table body with its column header, no provenance line
  bool pass = false;
  std::string verdict;  // one line per checked condition, ending with PASS or FAIL
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  // (log eps, log value)
};

RateFit fit_rate(std::span<const double> epsilons, std::span<const double> values);

/// Fixed test path with n jumps at t_i = i t/(n+1) and a seeded neighbour sequence.
WalkPath rate_test_path(const WalkConfig& cfg, std::size_t jumps, std::uint64_t seed);

struct RateSweepResult : ExperimentOutput {
  struct Entry {
    double hurst;
    std::size_t jumps;
    RateFit fit;
    bool pass;
  };
  std::vector<Entry> entries;
};
RateSweepResult run_rate_sweep(const SweepSpec& spec);

struct UepsResult : ExperimentOutput {
  struct Entry {
    double hurst;
    double epsilon;
    double mean;       // estimate of E|u_eps - u|^2
    double std_error;
    double exponent_oracle;  // mean difference variance over sampled walks
  };
  std::vector<Entry> entries;
};
UepsResult run_ueps_convergence(const SweepSpec& spec, const InitialCondition& ic);

struct RoughTailResult : ExperimentOutput {
  struct Row {
    double delta;
    std::size_t n;
    double p_r;      // P(R >= n)
    double ratio;    // P(R >= n+1) / P(R >= n)
    double p_l;      // P(L >= n delta)
    double p_k;      // P(K >= n)
  };
  std::vector<Row> rows;
  std::vector<double> c_hat;  // fitted P(R >= 1)/delta per delta
  std::size_t invariant_violations = 0;
};
RoughTailResult run_rough_tail(const SweepSpec& spec);

struct CrosscheckResult : ExperimentOutput {
  struct Row {
    double hurst;
    std::size_t realization;
    Site site;
    double pde;
    double fk;
    double std_error;
    double richardson;
    bool pass;
  };
  std::vector<Row> rows;
};
CrosscheckResult run_fk_pde_crosscheck(const SweepSpec& spec, const InitialCondition& ic);

struct MomentResult : ExperimentOutput {
  std::vector<EstimateResult> estimates;
};
MomentResult run_moment_stability(const SweepSpec& spec, const InitialCondition& ic, double p);

ExperimentOutput run_kernel_bounds(const SweepSpec& spec);

/// Dispatches on spec.kind. Throws ConfigError for unknown kinds.
ExperimentOutput run_experiment(const SweepSpec& spec, const InitialCondition& ic);

/// "# fkpam <version> config_hash=<hash> master_seed=<seed>".
std::string provenance_line(const std::string& config_hash, std::uint64_t master_seed);

/// Writes <dir>/<name>.csv and <dir>/<name>.verdict.txt, both starting with the provenance line.
void write_experiment(const std::string& dir, const std::string& name, const ExperimentOutput& out,
                      const std::string& provenance);

}  // namespace fkpam
