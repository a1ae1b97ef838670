#pragma once

// Direct integration of du/dt = kappa Lap u + u W'_eps(t, x) on a box of Z^d
// with zero Dirichlet data outside.

#include <ostream>
#include <vector>

#include "fkpam/field.hpp"
#include "fkpam/fk.hpp"
#include "fkpam/walk.hpp"

namespace fkpam {

/// Sup-norm ball of the given radius around `center`.
class BoxDomain {
 public:
  BoxDomain(Site center, int radius);

  /// Radius ceil(kappa t + 8 sqrt(kappa t + 1)) around the walk's start.
  static BoxDomain for_walk(const WalkConfig& cfg);

  int dim() const noexcept { return center_.dim(); }
  int radius() const noexcept { return radius_; }
  const Site& center() const noexcept { return center_; }
  std::size_t size() const noexcept { return size_; }

  bool contains(const Site& x) const;
  /// Flat index of a site inside the box; throws std::out_of_range outside.
  std::size_t index(const Site& x) const;
  Site site(std::size_t index) const;
  std::vector<Site> sites() const;

 private:
  Site center_;
  int radius_;
  std::size_t side_;
  std::size_t size_;
};

/// Real function on a box; reads outside the box are 0.
struct LatticeFunction {
  explicit LatticeFunction(BoxDomain d) : domain(std::move(d)), values(domain.size(), 0.0) {}
  LatticeFunction(BoxDomain d, const InitialCondition& ic);

  double at(const Site& x) const { return domain.contains(x) ? values[domain.index(x)] : 0.0; }
  double sum() const;

  BoxDomain domain;
  std::vector<double> values;
};

/// (Lap u)(x) = (1/2d) sum_{|y-x|=1} (u(y) - u(x)).
LatticeFunction discrete_laplacian(const LatticeFunction& u);

struct SolverConfig {
  double dt = 0.01;
  double kappa = 1.0;
  double epsilon = 0.1;

  /// Refuses dt > 0.25/kappa and dt above the noise grid step.
  void validate(const TimeGrid& grid) const;
};

/// Strang splitting: half-step exact reaction, one Heun (RK2) diffusion step,
/// half-step exact reaction. The reaction multiplies by
/// exp(int W'_eps(r, x) dr) over the half step, integrating the same
/// piecewise-linear interpolant as the Feynman-Kac smooth functional.
LatticeFunction solve_mollified(const InitialCondition& ic, const HurstField& field, const SolverConfig& cfg,
                                const BoxDomain& domain, double horizon);

/// Max-norm difference between the solutions at dt and dt/2 over the inner half of the box.
double richardson_check(const InitialCondition& ic, const HurstField& field, const SolverConfig& cfg,
                        const BoxDomain& domain, double horizon);

void write_solution_csv(std::ostream& os, const LatticeFunction& u, double t, bool header = true);

}  // namespace fkpam
