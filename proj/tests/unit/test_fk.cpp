#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fkpam/errors.hpp"
#include "fkpam/fk.hpp"
#include "fkpam/kernels.hpp"
#include "fkpam/rng.hpp"
#include "fkpam/stats.hpp"

using namespace fkpam;

namespace {

double oracle_incr(double h, double a, double b, double c, double d) {
  const auto p = [h](double x) { return std::pow(std::abs(x), 2 * h); };
  return 0.5 * (p(a - d) + p(b - c) - p(a - c) - p(b - d));
}

// Var of sum_i (W(b_i, x_i) - W(a_i, x_i)) written out pair by pair.
double oracle_rough_variance(const WalkPath& p, double h) {
  double v = 0.0;
  for (std::size_t i = 0; i < p.segment_count(); ++i) {
    for (std::size_t j = 0; j < p.segment_count(); ++j) {
      if (p.sites[i] != p.sites[j]) continue;
      v += oracle_incr(h, p.segment_end(i), p.segment_begin(i), p.segment_end(j), p.segment_begin(j));
    }
  }
  return v;
}

WalkPath fixed_path(std::vector<double> times, std::vector<std::int32_t> xs, double horizon = 1.0) {
  WalkPath p;
  p.jump_times = std::move(times);
  for (auto x : xs) p.sites.push_back(Site{x});
  p.horizon = horizon;
  return p;
}

WalkConfig cfg1(double kappa = 1.0, double horizon = 1.0) {
  WalkConfig c;
  c.kappa = kappa;
  c.horizon = horizon;
  return c;
}

// e^{-1} I_0(1): probability that the rate-1 walk on Z sits at its start at time 1.
const double kReturnProbability = std::exp(-1.0) * std::cyl_bessel_i(0.0, 1.0);

}  // namespace

TEST_CASE("initial conditions") {
  const auto c = InitialCondition::constant(-2.5);
  CHECK(c(Site{7}) == -2.5);
  CHECK(c.bound() == 2.5);
  const auto ind = InitialCondition::indicator(Site{1, 2});
  CHECK(ind(Site{1, 2}) == 1.0);
  CHECK(ind(Site{2, 1}) == 0.0);
  const auto tab = InitialCondition::table({{Site{0}, 0.5}, {Site{3}, -4.0}});
  CHECK(tab(Site{3}) == -4.0);
  CHECK(tab(Site{1}) == 0.0);
  CHECK(tab.bound() == 4.0);
  CHECK_THROWS(InitialCondition::constant(INFINITY));
  CHECK(kReturnProbability == doctest::Approx(0.4657596).epsilon(1e-6));
}

TEST_CASE("rough_functional examples") {
  const TimeGrid grid(1.0 / 64, 1.0);
  const HurstField f(HurstParameter(0.4), grid, 12);
  const auto still = fixed_path({}, {3});
  CHECK(rough_functional(still, f) == f.value(Site{3}, grid.nearest_index(1.0)));
  CHECK(rough_functional(fixed_path({0.25}, {0, 1}), HurstField::zero(grid)) == 0.0);
}

TEST_CASE("rough_functional equals the forward occupation sum") {
  const TimeGrid grid(1.0 / 128, 1.0);
  const HurstField f(HurstParameter(0.3), grid, 5);
  WalkConfig c = cfg1(4.0);
  for (std::uint64_t s = 0; s < 300; ++s) {
    const auto p = walk_for_index(c, 77, s, &grid);
    // Forward segment i occupies reversed times [t - t_{i+1}, t - t_i]; sum from the last one.
    double direct = 0.0;
    for (std::size_t i = p.segment_count(); i-- > 0;) {
      const auto& w = *f.path(p.sites[i]);
      direct += w[grid.nearest_index(p.horizon - p.segment_begin(i))] -
                w[grid.nearest_index(p.horizon - p.segment_end(i))];
    }
    CHECK(rough_functional(p, f) == direct);
  }
}

TEST_CASE("rough_variance: Brownian case and the general oracle") {
  WalkConfig c = cfg1(3.0, 1.7);
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto p = sample_walk(c, s);
    CHECK(rough_variance(p, HurstParameter(0.5)) == doctest::Approx(1.7).epsilon(1e-12));
    const double n1 = static_cast<double>(p.jump_count() + 1);
    for (double hv : {0.15, 0.35, 0.65, 0.85}) {
      const double v = rough_variance(p, HurstParameter(hv));
      CHECK(v == doctest::Approx(oracle_rough_variance(p, hv)).epsilon(1e-12));
      const double bound = hv <= 0.5 ? std::pow(n1, 1 - 2 * hv) * std::pow(1.7, 2 * hv) : n1 * std::pow(1.7, 2 * hv);
      CHECK(v <= bound * (1 + 1e-12));
    }
  }
}

TEST_CASE("rough functional variance over noise seeds") {
  const auto p = fixed_path({0.2, 0.5, 0.8}, {0, 1, 0, 1});
  for (double hv : {0.5, 0.3}) {
    const HurstParameter h(hv);
    std::vector<double> sq(10000);
    for (std::size_t k = 0; k < sq.size(); ++k) {
      const double r = rough_functional_exact(p, h, mix64(3, k)).value;
      sq[k] = r * r;
    }
    const auto m = mean_stderr(sq);
    const double target = oracle_rough_variance(p, hv);
    if (hv == 0.5) CHECK(target == doctest::Approx(1.0));
    CHECK(std::abs(m.mean - target) <= 3 * m.std_error);
  }
}

TEST_CASE("exact rough functional and the grid fallback") {
  const auto p = fixed_path({0.1, 0.2, 0.3, 0.4, 0.5}, {0, 1, 0, 1, 0, 1});
  const HurstParameter h(0.4);
  CHECK_FALSE(rough_functional_exact(p, h, 9).fell_back_to_grid);
  CHECK(rough_functional_exact(p, h, 9).value == rough_functional_exact(p, h, 9).value);
  CHECK_THROWS_AS(rough_functional_exact(p, h, 9, nullptr, 2), ExactModeCapExceeded);
  const TimeGrid grid(0.1, 1.0);
  const HurstField f(h, grid, 9);
  const auto r = rough_functional_exact(p, h, 9, &f, 2);
  CHECK(r.fell_back_to_grid);
  CHECK(r.value == rough_functional(p, f));
}

TEST_CASE("smooth_functional examples") {
  const TimeGrid grid(0.01, 1.0, 0.1);
  const auto p = fixed_path({0.25, 0.6}, {0, 1, 2});
  const HurstField z = HurstField::zero(grid);
  CHECK(smooth_functional(p, EpsilonDerivative(z, 0.05)) == 0.0);

  const HurstField lin = HurstField::with_generator(HurstParameter(0.5), grid, [&](const Site& x) {
    std::vector<double> w(grid.count());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = (0.5 + x.coords[0]) * grid.time_at(k);
    return w;
  });
  const double expected = 0.5 * 0.25 + 1.5 * 0.35 + 2.5 * 0.4;
  CHECK(smooth_functional(p, EpsilonDerivative(lin, 0.05)) == doctest::Approx(expected).epsilon(1e-12));
  // Off-grid jump times are handled by splitting the interpolant.
  const auto q = fixed_path({0.2537}, {0, 1});
  CHECK(smooth_functional(q, EpsilonDerivative(lin, 0.05)) ==
        doctest::Approx(0.5 * 0.2537 + 1.5 * (1 - 0.2537)).epsilon(1e-12));

  CHECK_THROWS_AS(smooth_functional(p, EpsilonDerivative(lin, 0.03)), std::invalid_argument);
}

TEST_CASE("mean square of smooth minus rough tracks the closed-form variance") {
  const double eps = 0.125, step = eps / 32;
  const TimeGrid grid = grid_for(1.0, step, eps);
  const auto p = snap_to_grid(fixed_path({0.2, 0.5, 0.8}, {0, 1, 0, 1}), grid);
  REQUIRE(p.has_value());
  for (double hv : {0.25, 0.75}) {
    const HurstParameter h(hv);
    std::vector<double> sq(10000);
    for (std::size_t k = 0; k < sq.size(); ++k) {
      const HurstField f(h, grid, mix64(40, k));
      const double d = smooth_functional(*p, EpsilonDerivative(f, eps)) - rough_functional(*p, f);
      sq[k] = d * d;
    }
    const auto m = mean_stderr(sq);
    CHECK(std::abs(m.mean - difference_variance(*p, h, eps)) <= 3 * m.std_error);
  }
}

TEST_CASE("snapping and walk_for_index") {
  const TimeGrid grid(0.1, 1.0);
  CHECK_FALSE(snap_to_grid(fixed_path({0.31, 0.33}, {0, 1, 0}), grid).has_value());
  CHECK_FALSE(snap_to_grid(fixed_path({0.02}, {0, 1}), grid).has_value());
  CHECK_FALSE(snap_to_grid(fixed_path({0.97}, {0, 1}), grid).has_value());
  const auto s = snap_to_grid(fixed_path({0.31, 0.48}, {0, 1, 0}), grid);
  REQUIRE(s.has_value());
  CHECK(s->jump_times[0] == grid.time_at(grid.nearest_index(0.3)));
  CHECK(s->jump_times[1] == grid.time_at(grid.nearest_index(0.5)));

  const WalkConfig c = cfg1(5.0);
  const TimeGrid fine(1.0 / 64, 1.0);
  for (std::size_t i = 0; i < 200; ++i) {
    const auto w = walk_for_index(c, 3, i, &fine);
    CHECK_NOTHROW(w.validate());
    for (double t : w.jump_times) CHECK(fine.on_grid(t));
    CHECK(w == walk_for_index(c, 3, i, &fine));
  }
  CHECK(walk_for_index(c, 3, 5, nullptr) == sample_walk(c, 8));
}

TEST_CASE("fk_weight clamps large exponents") {
  bool clamped = false;
  CHECK(fk_weight(2.0, 1.0, clamped) == doctest::Approx(2 * std::exp(1.0)));
  CHECK_FALSE(clamped);
  CHECK(fk_weight(1.0, 800.0, clamped) == std::exp(700.0));
  CHECK(clamped);
  clamped = false;
  CHECK(fk_weight(1.0, -800.0, clamped) == std::exp(-700.0));
  CHECK(clamped);
  CHECK(fk_weight(0.0, 5000.0, clamped) == 0.0);
  CHECK_THROWS_AS(fk_weight(1.0, NAN, clamped), NumericsError);
}

TEST_CASE("quenched estimator with the noise disabled") {
  const WalkConfig c = cfg1();
  const TimeGrid grid(1.0 / 64, 1.0, 0.125);
  const HurstField z = HurstField::zero(grid);
  for (auto mode : {FkMode::rough(), FkMode::smooth(0.125)}) {
    const auto r = estimate_quenched(c, InitialCondition::constant(1.0), z, mode, 1000, 1);
    CHECK(r.mean == 1.0);
    CHECK(r.std_error == 0.0);
    CHECK(r.count == 1000);
  }
  const auto r = estimate_quenched(c, InitialCondition::indicator(Site{0}), z, FkMode::rough(), 100000, 2, 4);
  CHECK(std::abs(r.mean - kReturnProbability) <= 3 * r.std_error);
}

TEST_CASE("quenched estimator is independent of the worker count") {
  WalkConfig c = cfg1(2.0);
  const TimeGrid grid(1.0 / 128, 1.0, 0.125);
  HurstField f(HurstParameter(0.3), grid, 8);
  f.freeze();
  for (auto mode : {FkMode::rough(), FkMode::smooth(0.0625)}) {
    const auto a = estimate_quenched(c, InitialCondition::constant(1.0), f, mode, 4000, 17, 1);
    const auto b = estimate_quenched(c, InitialCondition::constant(1.0), f, mode, 4000, 17, 3);
    const auto d = estimate_quenched(c, InitialCondition::constant(1.0), f, mode, 4000, 17, 8);
    CHECK(a.mean == b.mean);
    CHECK(a.mean == d.mean);
    CHECK(a.std_error == d.std_error);
    CHECK(a.clamps == 0);
  }
  CHECK_THROWS(estimate_quenched(cfg1(1.0, 2.0), InitialCondition::constant(1.0), f, FkMode::rough(), 10, 1));
}

TEST_CASE("annealed first moment matches the Gaussian moment formula") {
  const WalkConfig c = cfg1();
  SUBCASE("Brownian noise: exp(t/2) for every path") {
    const AnnealedConfig ac{2000, 50, 0.0};
    const auto r = estimate_annealed_moment(c, InitialCondition::constant(1.0), HurstParameter(0.5), 1.0,
                                            FkMode::rough(), ac, 5, 4);
    CHECK(std::abs(r.mean - std::exp(0.5)) <= 3 * r.std_error);
    CHECK(r.clamps == 0);
  }
  SUBCASE("H = 0.3: walk average of exp(Var / 2)") {
    const AnnealedConfig ac{2000, 50, 1.0 / 256};
    const auto r = estimate_annealed_moment(c, InitialCondition::constant(1.0), HurstParameter(0.3), 1.0,
                                            FkMode::rough(), ac, 6, 4);
    const TimeGrid grid(1.0 / 256, 1.0);
    std::vector<double> e(100000);
    for (std::size_t k = 0; k < e.size(); ++k) {
      e[k] = std::exp(0.5 * oracle_rough_variance(walk_for_index(c, 99, k, &grid), 0.3));
    }
    const auto o = mean_stderr(e);
    CHECK(std::abs(r.mean - o.mean) <= 3 * std::hypot(r.std_error, o.std_error));
  }
}

TEST_CASE("annealed second moment is finite across eps") {
  const WalkConfig c = cfg1();
  std::vector<EstimateResult> rs;
  for (double eps : {0.1, 0.05, 0.025}) {
    rs.push_back(estimate_annealed_moment(c, InitialCondition::constant(1.0), HurstParameter(0.5), 2.0,
                                          FkMode::smooth(eps), AnnealedConfig{300, 100, 0.0}, mix64(7, rs.size()), 4));
    CHECK(std::isfinite(rs.back().mean));
    CHECK(rs.back().clamps == 0);
  }
  for (std::size_t i = 0; i + 1 < rs.size(); ++i) {
    const double z = (rs[i + 1].mean - rs[i].mean) / std::hypot(rs[i].std_error, rs[i + 1].std_error);
    CHECK(z < 4.0);
  }
  CHECK_THROWS(estimate_annealed_moment(c, InitialCondition::constant(1.0), HurstParameter(0.5), 0.5, FkMode::rough(),
                                        AnnealedConfig{}, 1));
}

TEST_CASE("estimate CSV") {
  const TimeGrid grid(1.0 / 64, 1.0, 0.125);
  const auto r = estimate_quenched(cfg1(), InitialCondition::constant(1.0), HurstField::zero(grid),
                                   FkMode::smooth(0.125), 10, 4);
  std::ostringstream os;
  write_estimate_csv(os, r);
  CHECK(os.str() == "mode,H,kappa,d,t,x0,eps,n,mean,stderr,seed,clamps\nquenched_smooth,0.5,1,1,1,0,0.125,10,1,0,4,0\n");
}
