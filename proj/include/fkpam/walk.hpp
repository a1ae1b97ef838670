#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "fkpam/rng.hpp"
#include "fkpam/site.hpp"

namespace fkpam {

struct WalkConfig {
  int dim = 1;
  double kappa = 1.0;    // jump rate
  double horizon = 1.0;  // the t in u(t, x)
  Site start = Site{0};

  void validate() const;
};

/// Piecewise-constant lattice path on [0, horizon]. sites[i] is occupied on
/// [jump_times[i-1], jump_times[i]) with the conventions t_0 = 0 and
/// t_{N+1} = horizon.
struct WalkPath {
  std::vector<double> jump_times;
  std::vector<Site> sites;
  double horizon = 0.0;

  std::size_t jump_count() const noexcept { return jump_times.size(); }
  const Site& terminal() const { return sites.back(); }
  /// Segment i spans [segment_begin(i), segment_end(i)] at sites[i].
  double segment_begin(std::size_t i) const { return i == 0 ? 0.0 : jump_times[i - 1]; }
  double segment_end(std::size_t i) const { return i == jump_times.size() ? horizon : jump_times[i]; }
  std::size_t segment_count() const noexcept { return sites.size(); }

  /// Throws std::invalid_argument when the structural invariants fail.
  void validate() const;

  bool operator==(const WalkPath&) const = default;
};

/// Arrival times of a rate-`rate` Poisson process on (0, horizon).
std::vector<double> sample_jump_times(double rate, double horizon, Engine& rng);

/// Continuous-time simple random walk: Poisson(kappa) jump times, each jump
/// to one of the 2d neighbours uniformly. Jump times are rounded to the
/// double lattice of `horizon` (multiples of its ulp) so that horizon - t is
/// exact and reverse_view is a bitwise involution.
WalkPath sample_walk(const WalkConfig& cfg, std::uint64_t seed);

/// Walk conditioned on exactly `jumps` jumps (uniform order statistics on
/// (0, horizon)), used for fixed test paths.
WalkPath sample_walk_with_jumps(const WalkConfig& cfg, std::size_t jumps, std::uint64_t seed);

/// The path s -> X(horizon - s).
WalkPath reverse_view(const WalkPath& p);

struct RoughStats {
  double delta = 0.0;
  std::size_t r_count = 0;       // R: jumps within delta of the previous jump (t_0 = 0 included)
  double rough_length = 0.0;     // L: total length of rough periods
  std::size_t rough_periods = 0; // K: number of rough periods
};

/// R counts gaps t_i - t_{i-1} < delta over i >= 1 with t_0 = 0. Rough
/// periods are maximal runs of jumps t_1..t_N whose consecutive gaps are
/// <= delta; each begins and ends with a jump, so runs of a single jump do
/// not count.
RoughStats rough_stats(std::span<const double> jump_times, double delta);
inline RoughStats rough_stats(const WalkPath& p, double delta) { return rough_stats(p.jump_times, delta); }

/// CSV rows (jump_index, time, site coordinates...); row 0 is the start at time 0.
void write_walk_csv(std::ostream& os, const WalkPath& p, bool header = true);

}  // namespace fkpam
