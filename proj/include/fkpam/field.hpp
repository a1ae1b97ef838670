#pragma once

// Fractional Brownian field {W(t,x)} on Z^d: covariance kernels, exact and
// grid samplers, a lazily populated per-site field, and the symmetric
// epsilon-derivative (W(t+eps,x) - W(t-eps,x)) / (2 eps).

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <shared_mutex>
#include <span>
#include <vector>

#include "fkpam/site.hpp"

namespace fkpam {

class HurstParameter {
 public:
  /// Throws std::invalid_argument("H must be in (0,1)") outside the open unit interval.
  explicit HurstParameter(double h);

  double value() const noexcept { return h_; }
  double two_h() const noexcept { return 2.0 * h_; }

  bool operator==(const HurstParameter&) const = default;

 private:
  double h_;
};

/// |x|^{2H}, with 0 at x = 0.
double abs_pow(double x, double exponent) noexcept;

/// R_H(t,s) = (|t|^{2H} + |s|^{2H} - |t-s|^{2H}) / 2.
double covariance(HurstParameter h, double t, double s) noexcept;

/// Cov(W(a) - W(b), W(c) - W(d)).
double increment_covariance(HurstParameter h, double a, double b, double c, double d) noexcept;

/// Uniform grid covering [-pad, horizon + pad]; time 0 sits at index pad_steps().
class TimeGrid {
 public:
  TimeGrid(double step, double horizon, double pad = 0.0);

  double step() const noexcept { return step_; }
  double horizon() const noexcept { return horizon_; }
  double pad() const noexcept { return pad_; }

  std::size_t horizon_steps() const noexcept { return horizon_steps_; }
  std::size_t pad_steps() const noexcept { return pad_steps_; }
  /// Number of points in [0, horizon], both endpoints included.
  std::size_t horizon_count() const noexcept { return horizon_steps_ + 1; }
  /// Number of stored points, padding included.
  std::size_t count() const noexcept { return horizon_steps_ + 2 * pad_steps_ + 1; }
  std::size_t origin_index() const noexcept { return pad_steps_; }

  double time_at(std::size_t index) const noexcept;
  /// Stored index of the grid point nearest to t. Throws std::out_of_range outside the padded range.
  std::size_t nearest_index(double t) const;
  /// True when t lies on a grid point (relative tolerance 1e-9 of a step).
  bool on_grid(double t) const noexcept;
  /// Continuous index coordinate (t + pad) / step.
  double index_coordinate(double t) const noexcept { return (t + pad_) / step_; }

  bool operator==(const TimeGrid&) const = default;

 private:
  double step_;
  double horizon_;
  double pad_;
  std::size_t horizon_steps_;
  std::size_t pad_steps_;
};

enum class SamplerMethod { automatic, circulant, cholesky };

/// Samples fractional Gaussian noise of length n with a fixed step, then
/// cumulates it into fBm paths. Circulant embedding (Davies-Harte) when the
/// embedding is nonnegative definite, Cholesky of the increment covariance
/// otherwise. Construct once per (H, n, step) and reuse; sample() is
/// thread-safe.
class GridPathSampler {
 public:
  GridPathSampler(HurstParameter h, std::size_t increments, double step,
                  SamplerMethod method = SamplerMethod::automatic);
  ~GridPathSampler();
  GridPathSampler(const GridPathSampler&) = delete;
  GridPathSampler& operator=(const GridPathSampler&) = delete;

  /// Fills `path` (size increments + 1) with an fBm path, path[0] = 0.
  void sample_path(std::uint64_t seed, std::span<double> path) const;

  SamplerMethod method_used() const noexcept { return used_; }
  std::size_t increments() const noexcept { return n_; }
  /// Smallest eigenvalue of the circulant embedding, relative to the largest.
  double min_relative_eigenvalue() const noexcept { return min_rel_eig_; }

 private:
  struct FftPlan;

  HurstParameter h_;
  std::size_t n_;
  double step_;
  SamplerMethod used_;
  double min_rel_eig_ = 0.0;
  std::vector<double> sqrt_eigen_;   // circulant: sqrt(lambda_k / m)
  std::vector<double> chol_;         // cholesky: lower-triangular, row-major n x n
  std::unique_ptr<FftPlan> plan_;
};

/// One fBm path at the points of `grid`, re-indexed so that W(0) = 0 at
/// grid.origin_index(). Deterministic in seed.
std::vector<double> sample_grid_path(HurstParameter h, const TimeGrid& grid, std::uint64_t seed,
                                     SamplerMethod method = SamplerMethod::automatic);

inline constexpr std::size_t kExactModeCap = 512;

/// Exact joint draw of (W(t_1), ..., W(t_k)) by Cholesky of [R_H(t_i, t_j)].
/// Times must be strictly increasing and positive.
std::vector<double> sample_at_times(HurstParameter h, std::span<const double> times, std::uint64_t seed,
                                    std::size_t cap = kExactModeCap);

/// Lower Cholesky factor of a symmetric matrix (row-major n x n) with one
/// jitter retry of 1e-12 * max diagonal. Throws NumericsError on failure.
std::vector<double> cholesky_with_jitter(std::vector<double> matrix, std::size_t n);

/// Family of independent fBm paths indexed by lattice sites, stored on a
/// common padded grid. Paths are created on first access from the seed
/// stream mix64(master_seed, site_hash(site)), so their values do not depend
/// on visiting order. After freeze() the cache is read-only; sites not yet
/// cached are still generated deterministically but not stored.
class HurstField {
 public:
  using Path = std::vector<double>;
  using PathGenerator = std::function<Path(const Site&)>;

  HurstField(HurstParameter h, TimeGrid grid, std::uint64_t master_seed);

  /// Field with W == 0 at every site ("noise disabled").
  static HurstField zero(TimeGrid grid);
  /// Field whose paths come from a caller-supplied generator (test stubs).
  static HurstField with_generator(HurstParameter h, TimeGrid grid, PathGenerator generator);

  HurstField(HurstField&&) noexcept;
  HurstField& operator=(HurstField&&) noexcept;
  ~HurstField();

  HurstParameter hurst() const noexcept { return hurst_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  std::uint64_t master_seed() const noexcept { return master_seed_; }
  bool is_zero() const noexcept { return zero_; }

  std::uint64_t site_seed(const Site& x) const noexcept;

  std::shared_ptr<const Path> path(const Site& x) const;
  double value(const Site& x, std::size_t index) const { return (*path(x))[index]; }

  /// Creates paths for all given sites now (before freeze()).
  void ensure(std::span<const Site> sites);
  void freeze() noexcept;
  bool frozen() const noexcept;
  std::vector<Site> cached_sites() const;

 private:
  HurstField(HurstParameter h, TimeGrid grid, std::uint64_t seed, PathGenerator gen, bool zero);
  Path generate(const Site& x) const;

  struct Cache;

  HurstParameter hurst_;
  TimeGrid grid_;
  std::uint64_t master_seed_;
  PathGenerator generator_;
  bool zero_ = false;
  std::shared_ptr<const GridPathSampler> sampler_;
  std::unique_ptr<Cache> cache_;
};

/// Symmetric epsilon-derivative view of a field. epsilon must be an integer
/// multiple of the grid step, at least one step, and at most the grid pad.
class EpsilonDerivative {
 public:
  EpsilonDerivative(const HurstField& field, double epsilon);
  ~EpsilonDerivative();
  EpsilonDerivative(EpsilonDerivative&&) noexcept;

  const HurstField& field() const noexcept { return *field_; }
  double epsilon() const noexcept { return epsilon_; }
  std::size_t offset_steps() const noexcept { return offset_; }

  /// Derivative at stored grid index k; requires offset <= k < count - offset.
  double at_index(const Site& x, std::size_t k) const;
  /// Derivative at grid time t; throws std::out_of_range if t +- epsilon leaves the padded grid.
  double at(double t, const Site& x) const;

  /// Integral over [a, b] of the piecewise-linear interpolant of the grid
  /// values of the derivative (the trapezoid rule split at a and b).
  double integral(const Site& x, double a, double b) const;

 private:
  double primitive(const std::vector<double>& pre, const std::vector<double>& vals, double t) const;

  struct Cache;

  const HurstField* field_;
  double epsilon_;
  std::size_t offset_;
  std::unique_ptr<Cache> cache_;
};

/// CSV rows (site coordinates..., t, w) for grid points in [0, horizon].
void write_paths_csv(std::ostream& os, const HurstField& field, std::span<const Site> sites);

}  // namespace fkpam
