#pragma once

// Feynman-Kac functionals along time-reversed walks and the quenched and
// annealed Monte Carlo estimators of u(t, x) and u_eps(t, x).

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>

#include "fkpam/field.hpp"
#include "fkpam/walk.hpp"

namespace fkpam {

class InitialCondition {
 public:
  enum class Kind { constant, indicator, table };

  static InitialCondition constant(double c);
  static InitialCondition indicator(Site site);
  static InitialCondition table(std::map<Site, double> values);

  double operator()(const Site& y) const;
  /// sup |u_o|.
  double bound() const noexcept { return bound_; }
  Kind kind() const noexcept { return kind_; }
  std::string describe() const;

 private:
  InitialCondition() = default;
  Kind kind_ = Kind::constant;
  double constant_ = 1.0;
  Site site_;
  std::map<Site, double> table_;
  double bound_ = 1.0;
};

/// sum_i (W(t_{i+1}, x_i) - W(t_i, x_i)) over the segments of reverse_view(path),
/// reading W at the nearest grid point of each time.
double rough_functional(const WalkPath& path, const HurstField& field);

struct ExactRough {
  double value = 0.0;
  bool fell_back_to_grid = false;
};

/// Rough functional with W drawn exactly (joint Cholesky per site) at the
/// reversed path's jump times; site streams are mix64(noise_seed, site_hash).
/// When a site needs more than `cap` times, the grid field is used if one is
/// given (and the result is flagged), otherwise ExactModeCapExceeded propagates.
ExactRough rough_functional_exact(const WalkPath& path, HurstParameter h, std::uint64_t noise_seed,
                                  const HurstField* fallback = nullptr, std::size_t cap = kExactModeCap);

/// Var of the rough functional for a fixed path (exact covariance sum).
double rough_variance(const WalkPath& path, HurstParameter h);

/// int_0^t W'_eps(s, X(t - s)) ds, integrating the piecewise-linear
/// interpolant of the grid values of W'_eps. Requires eps >= 4 grid steps.
double smooth_functional(const WalkPath& path, const EpsilonDerivative& ed);

/// Path with every jump time moved to its nearest grid time; nullopt when two
/// jumps collide or a jump lands on 0 or on the horizon.
std::optional<WalkPath> snap_to_grid(const WalkPath& path, const TimeGrid& grid);

/// The walk for sample index `index`: seed + index, redrawn from derived
/// seeds while snapping collides when `snap` is set.
WalkPath walk_for_index(const WalkConfig& cfg, std::uint64_t seed, std::size_t index, const TimeGrid* snap);

struct FkMode {
  enum class Kind { rough, smooth };
  Kind kind = Kind::rough;
  double epsilon = 0.0;  // smooth only

  static FkMode rough() { return {Kind::rough, 0.0}; }
  static FkMode smooth(double eps) { return {Kind::smooth, eps}; }
  std::string name() const { return kind == Kind::rough ? "rough" : "smooth"; }
};

struct FkSample {
  std::uint64_t walk_seed = 0;
  double rough_exponent = 0.0;
  std::optional<double> smooth_exponent;
  Site terminal_site;
  double weight = 0.0;                  // u_o(X(t)) exp(rough_exponent)
  std::optional<double> smooth_weight;  // u_o(X(t)) exp(smooth_exponent)
  bool clamped = false;
};

inline constexpr double kExponentClamp = 700.0;

/// u_o(X(t)) exp(exponent) with the exponent clamped to +-700.
double fk_weight(double u0, double exponent, bool& clamped);

struct RunSnapshot {
  std::string mode;
  double hurst = 0.5;
  double kappa = 1.0;
  int dim = 1;
  double t = 1.0;
  Site x;
  std::optional<double> epsilon;
  std::uint64_t seed = 0;
};

struct EstimateResult {
  enum class Kind { quenched, annealed };
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
  Kind kind = Kind::quenched;
  std::size_t clamps = 0;
  RunSnapshot snapshot;
};

/// Average of u_o(X(t)) exp(int V) over n_walks walks from cfg.start against
/// one fixed noise realization. Walk i uses seed + i; the reduction order is
/// fixed by index, so the result does not depend on `workers`.
EstimateResult estimate_quenched(const WalkConfig& cfg, const InitialCondition& ic, const HurstField& field,
                                 FkMode mode, std::size_t n_walks, std::uint64_t seed, unsigned workers = 1);

/// One FK sample with both exponents on a grid-snapped walk (smooth needs eps).
FkSample paired_sample(const WalkConfig& cfg, const InitialCondition& ic, const HurstField& field,
                       const EpsilonDerivative* ed, std::uint64_t seed, std::size_t index);

struct AnnealedConfig {
  std::size_t outer = 1000;  // noise realizations
  std::size_t inner = 1000;  // walks per realization
  double step = 0.0;         // grid step; 0 picks eps/8 (smooth) or horizon/256 (rough)
};

/// Nested Monte Carlo estimate of E|u(t, x)|^p (rough) or E|u_eps(t, x)|^p (smooth).
/// Outer sample o uses the field seed mix64(seed, o).
EstimateResult estimate_annealed_moment(const WalkConfig& cfg, const InitialCondition& ic, HurstParameter h,
                                        double p, FkMode mode, const AnnealedConfig& ac, std::uint64_t seed,
                                        unsigned workers = 1);

/// Grid on [-pad, horizon + pad] with pad = eps rounded up to a step multiple (at least one step).
TimeGrid grid_for(double horizon, double step, double epsilon);

void write_estimate_csv(std::ostream& os, const EstimateResult& r, bool header = true);

}  // namespace fkpam
