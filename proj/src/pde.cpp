#include "fkpam/pde.hpp"

#include <cmath>
#include <iomanip>
#include <stdexcept>

#include "fkpam/stats.hpp"

namespace fkpam {

BoxDomain::BoxDomain(Site center, int radius) : center_(std::move(center)), radius_(radius) {
  if (radius < 1) throw std::invalid_argument("BoxDomain: radius must be >= 1");
  if (center_.dim() < 1) throw std::invalid_argument("BoxDomain: dimension must be >= 1");
  side_ = static_cast<std::size_t>(2 * radius + 1);
  size_ = 1;
  for (int i = 0; i < center_.dim(); ++i) size_ *= side_;
}

BoxDomain BoxDomain::for_walk(const WalkConfig& cfg) {
  const double kt = cfg.kappa * cfg.horizon;
  return BoxDomain(cfg.start, static_cast<int>(std::ceil(kt + 8.0 * std::sqrt(kt + 1.0))));
}

bool BoxDomain::contains(const Site& x) const {
  if (x.dim() != dim()) return false;
  for (std::size_t i = 0; i < x.coords.size(); ++i) {
    if (std::abs(x.coords[i] - center_.coords[i]) > radius_) return false;
  }
  return true;
}

std::size_t BoxDomain::index(const Site& x) const {
  if (!contains(x)) throw std::out_of_range("BoxDomain: site " + x.to_string() + " outside the box");
  std::size_t k = 0;
  for (std::size_t i = 0; i < x.coords.size(); ++i) {
    k = k * side_ + static_cast<std::size_t>(x.coords[i] - center_.coords[i] + radius_);
  }
  return k;
}

Site BoxDomain::site(std::size_t index) const {
  std::vector<std::int32_t> c(static_cast<std::size_t>(dim()));
  for (std::size_t i = c.size(); i-- > 0;) {
    c[i] = static_cast<std::int32_t>(index % side_) - radius_ + center_.coords[i];
    index /= side_;
  }
  return Site(std::move(c));
}

std::vector<Site> BoxDomain::sites() const {
  std::vector<Site> out;
  out.reserve(size_);
  for (std::size_t k = 0; k < size_; ++k) out.push_back(site(k));
  return out;
}

LatticeFunction::LatticeFunction(BoxDomain d, const InitialCondition& ic) : LatticeFunction(std::move(d)) {
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = ic(domain.site(k));
}

double LatticeFunction::sum() const { return pairwise_sum(values); }

namespace {

// Neighbour table: for each site, the flat indices of its 2d neighbours, or npos outside the box.
constexpr std::size_t npos = static_cast<std::size_t>(-1);

std::vector<std::size_t> neighbour_table(const BoxDomain& d) {
  const std::size_t nn = 2 * static_cast<std::size_t>(d.dim());
  std::vector<std::size_t> table(d.size() * nn);
  for (std::size_t k = 0; k < d.size(); ++k) {
    const Site x = d.site(k);
    for (int axis = 0; axis < d.dim(); ++axis) {
      for (int s = 0; s < 2; ++s) {
        const Site y = x.shifted(axis, s ? 1 : -1);
        table[k * nn + 2 * static_cast<std::size_t>(axis) + static_cast<std::size_t>(s)] =
            d.contains(y) ? d.index(y) : npos;
      }
    }
  }
  return table;
}

void apply_laplacian(const std::vector<double>& u, std::vector<double>& out, const std::vector<std::size_t>& nb,
                     std::size_t nn) {
  const double w = 1.0 / static_cast<double>(nn);
  for (std::size_t k = 0; k < u.size(); ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < nn; ++j) {
      const std::size_t m = nb[k * nn + j];
      acc += (m == npos ? 0.0 : u[m]) - u[k];
    }
    out[k] = w * acc;
  }
}

}  // namespace

LatticeFunction discrete_laplacian(const LatticeFunction& u) {
  const auto nb = neighbour_table(u.domain);
  LatticeFunction out(u.domain);
  apply_laplacian(u.values, out.values, nb, 2 * static_cast<std::size_t>(u.domain.dim()));
  return out;
}

void SolverConfig::validate(const TimeGrid& grid) const {
  if (!(dt > 0.0)) throw std::invalid_argument("SolverConfig: dt must be > 0");
  if (!(kappa > 0.0)) throw std::invalid_argument("SolverConfig: kappa must be > 0");
  if (dt > 0.25 / kappa * (1.0 + 1e-12)) {
    throw std::invalid_argument("SolverConfig: dt exceeds the diffusion stability bound 0.25/kappa");
  }
  if (dt > grid.step() * (1.0 + 1e-12)) throw std::invalid_argument("SolverConfig: dt exceeds the noise grid step");
}

LatticeFunction solve_mollified(const InitialCondition& ic, const HurstField& field, const SolverConfig& cfg,
                                const BoxDomain& domain, double horizon) {
  cfg.validate(field.grid());
  if (horizon > field.grid().horizon() * (1.0 + 1e-12)) {
    throw std::invalid_argument("solve_mollified: horizon exceeds the field grid");
  }
  const double steps_real = horizon / cfg.dt;
  const auto steps = static_cast<std::size_t>(std::llround(steps_real));
  if (steps < 1 || std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * steps_real) {
    throw std::invalid_argument("solve_mollified: dt must divide the horizon");
  }
  const double dt = horizon / static_cast<double>(steps);

  LatticeFunction u(domain, ic);
  const std::size_t n = domain.size();
  const std::size_t nn = 2 * static_cast<std::size_t>(domain.dim());
  const auto nb = neighbour_table(domain);
  const auto sites = domain.sites();

  std::optional<EpsilonDerivative> ed;
  if (!field.is_zero()) ed.emplace(field, cfg.epsilon);
  const auto react = [&](double a, double b) {
    if (!ed) return;
    for (std::size_t k = 0; k < n; ++k) {
      if (u.values[k] != 0.0) u.values[k] *= std::exp(ed->integral(sites[k], a, b));
    }
  };

  std::vector<double> k1(n), k2(n), u1(n);
  const double kd = cfg.kappa * dt;
  for (std::size_t s = 0; s < steps; ++s) {
    const double t0 = static_cast<double>(s) * dt;
    const double tm = t0 + 0.5 * dt;
    const double t1 = static_cast<double>(s + 1) * dt;
    react(t0, tm);
    apply_laplacian(u.values, k1, nb, nn);
    for (std::size_t k = 0; k < n; ++k) u1[k] = u.values[k] + kd * k1[k];
    apply_laplacian(u1, k2, nb, nn);
    for (std::size_t k = 0; k < n; ++k) u.values[k] += 0.5 * kd * (k1[k] + k2[k]);
    react(tm, t1);
  }
  return u;
}

double richardson_check(const InitialCondition& ic, const HurstField& field, const SolverConfig& cfg,
                        const BoxDomain& domain, double horizon) {
  const auto coarse = solve_mollified(ic, field, cfg, domain, horizon);
  SolverConfig half = cfg;
  half.dt = 0.5 * cfg.dt;
  const auto fine = solve_mollified(ic, field, half, domain, horizon);
  const BoxDomain inner(domain.center(), std::max(1, domain.radius() / 2));
  double worst = 0.0;
  for (std::size_t k = 0; k < inner.size(); ++k) {
    const Site x = inner.site(k);
    worst = std::max(worst, std::abs(coarse.at(x) - fine.at(x)));
  }
  return worst;
}

void write_solution_csv(std::ostream& os, const LatticeFunction& u, double t, bool header) {
  if (header) {
    os << 't';
    for (int i = 0; i < u.domain.dim(); ++i) os << ",x" << i;
    os << ",u\n";
  }
  os << std::setprecision(17);
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    os << t;
    for (auto c : u.domain.site(k).coords) os << ',' << c;
    os << ',' << u.values[k] << '\n';
  }
}

}  // namespace fkpam
