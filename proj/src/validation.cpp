#include "fkpam/validation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "fkpam/errors.hpp"
#include "fkpam/experiments.hpp"
#include "fkpam/kernels.hpp"
#include "fkpam/parallel.hpp"
#include "fkpam/rng.hpp"
#include "fkpam/stats.hpp"

namespace fkpam {

namespace {

bool quick(const ValidationOptions& o) { return o.scale == ValidationScale::quick; }

std::uint64_t seed_for(const ValidationOptions& o, int id) { return mix64(o.master_seed, static_cast<std::uint64_t>(id)); }

std::string word(bool pass) { return pass ? "PASS" : "FAIL"; }

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  v.front() = lo;
  v.back() = hi;
  return v;
}

std::vector<double> dyadic(int from, int to) {
  std::vector<double> v;
  for (int k = from; k <= to; ++k) v.push_back(std::ldexp(1.0, -k));
  return v;
}

SweepSpec base_spec(const ValidationOptions& o, int id, const std::string& kind) {
  SweepSpec s;
  s.name = "criterion_" + std::to_string(id);
  s.kind = kind;
  s.master_seed = seed_for(o, id);
  s.workers = o.workers;
  return s;
}

CriterionResult from_output(int id, const std::string& name, const ExperimentOutput& out) {
  return {id, name, out.pass, out.verdict, out.csv};
}

// 1. Empirical covariance of exact draws against R_H.
CriterionResult fbm_moments(const ValidationOptions& o) {
  const std::array<double, 5> times{0.1, 0.3, 0.5, 0.75, 1.0};
  const std::size_t n = quick(o) ? 2000 : 10000;
  std::ostringstream csv, detail;
  csv << std::setprecision(17) << "H,t_i,t_j,empirical,stderr,exact,pass\n";
  bool pass = true;
  const std::array<double, 3> hursts{0.25, 0.5, 0.75};
  for (std::size_t hi = 0; hi < hursts.size(); ++hi) {
    const HurstParameter h(hursts[hi]);
    const std::uint64_t seed = mix64(seed_for(o, 1), hi);
    std::vector<double> draws(n * times.size());
    parallel_for(n, o.workers, [&](std::size_t d) {
      const auto w = sample_at_times(h, times, mix64(seed, d));
      std::copy(w.begin(), w.end(), draws.begin() + static_cast<std::ptrdiff_t>(d * times.size()));
    });
    std::size_t failures = 0, checks = 0;
    double worst = 0.0;
    std::vector<double> prod(n);
    for (std::size_t i = 0; i < times.size(); ++i) {
      for (std::size_t j = i; j < times.size(); ++j) {
        for (std::size_t d = 0; d < n; ++d) prod[d] = draws[d * times.size() + i] * draws[d * times.size() + j];
        const auto ms = mean_stderr(prod);
        const double exact = covariance(h, times[i], times[j]);
        const double z = std::abs(ms.mean - exact) / ms.std_error;
        const bool ok = z <= 3.0;
        worst = std::max(worst, z);
        failures += ok ? 0 : 1;
        ++checks;
        csv << h.value() << ',' << times[i] << ',' << times[j] << ',' << ms.mean << ',' << ms.std_error << ','
            << exact << ',' << (ok ? 1 : 0) << '\n';
      }
    }
    pass = pass && failures == 0;
    detail << "H=" << h.value() << " entries within 3 stderr " << (checks - failures) << '/' << checks
           << " worst |z|=" << std::setprecision(4) << worst << ' ' << word(failures == 0) << '\n';
  }
  return {1, "fbm covariance", pass, detail.str(), csv.str()};
}

// 2. Sign of the eps-derivative autocovariance beyond 2 eps and its size inside.
CriterionResult eps_correlation(const ValidationOptions&) {
  const std::array<double, 5> hursts{0.1, 0.2, 0.3, 0.4, 0.45};
  const std::array<double, 4> epsilons{1e-1, 1e-2, 1e-3, 1e-4};
  constexpr std::size_t kPer = 500;
  std::ostringstream csv, detail;
  csv << std::setprecision(17) << "sweep,H,eps,lag,value,bound,pass\n";
  std::size_t far_fail = 0, near_fail = 0, far_n = 0, near_n = 0;
  for (double hv : hursts) {
    const HurstParameter h(hv);
    for (double e : epsilons) {
      for (double lag : log_spaced(2.0 * e, 10.0, kPer)) {
        const double v = eps_autocov(h, lag, 0.0, e);
        const bool ok = v <= 0.0;
        far_fail += ok ? 0 : 1;
        ++far_n;
        csv << "far," << hv << ',' << e << ',' << lag << ',' << v << ",0," << (ok ? 1 : 0) << '\n';
      }
      const double bound = 4.0 * std::pow(4.0 * e, 2.0 * hv) / (4.0 * e * e);
      for (std::size_t k = 0; k < kPer; ++k) {
        const double lag = 2.0 * e * static_cast<double>(k) / static_cast<double>(kPer);
        const double v = eps_autocov(h, lag, 0.0, e);
        const bool ok = std::abs(v) <= bound;
        near_fail += ok ? 0 : 1;
        ++near_n;
        csv << "near," << hv << ',' << e << ',' << lag << ',' << v << ',' << bound << ',' << (ok ? 1 : 0) << '\n';
      }
    }
  }
  const bool pass = far_fail == 0 && near_fail == 0;
  detail << "lag >= 2 eps: positive values " << far_fail << " of " << far_n << ' ' << word(far_fail == 0) << '\n'
         << "lag < 2 eps: bound violations " << near_fail << " of " << near_n << ' ' << word(near_fail == 0) << '\n';
  return {2, "eps-derivative correlation", pass, detail.str(), csv.str()};
}

std::vector<KernelRow> bound_sweep() {
  std::vector<double> hursts;
  for (int k = 2; k <= 18; ++k) hursts.push_back(0.05 * k);
  const std::array<double, 3> lengths{0.25, 1.0, 1.0 / 32.0};
  return kernel_sweep(hursts, dyadic(3, 9), lengths);
}

// 3. S2 bounds, both forms.
CriterionResult s2_bounds(const ValidationOptions&) {
  std::vector<KernelRow> rows;
  for (const auto& r : bound_sweep()) {
    const bool main_len = r.t2 - r.t1 == 0.25 || r.t2 - r.t1 == 1.0;
    if ((r.kernel == "s2" || r.kernel == "s2_alt") && main_len) rows.push_back(r);
  }
  std::size_t fail = 0, alt_fail = 0, n = 0, alt_n = 0;
  for (const auto& r : rows) {
    if (r.kernel == "s2") {
      ++n;
      fail += r.eval.within_bound() ? 0 : 1;
    } else {
      ++alt_n;
      alt_fail += r.eval.within_bound() ? 0 : 1;
    }
  }
  std::ostringstream csv, detail;
  write_kernel_csv(csv, rows);
  detail << "s2 bound failures " << fail << " of " << n << ' ' << word(fail == 0) << '\n'
         << "s2 alternative bound failures (H>1/2) " << alt_fail << " of " << alt_n << ' ' << word(alt_fail == 0)
         << '\n';
  return {3, "s2 bounds", fail == 0 && alt_fail == 0, detail.str(), csv.str()};
}

// 4. S3 bound for H <= 1/2, including lengths below eps.
CriterionResult s3_bounds(const ValidationOptions&) {
  std::vector<KernelRow> rows;
  for (const auto& r : bound_sweep()) {
    if (r.kernel == "s3" && r.hurst <= 0.5 + 1e-12) rows.push_back(r);
  }
  std::size_t fail = 0, short_n = 0;
  for (const auto& r : rows) {
    fail += r.eval.within_bound() ? 0 : 1;
    short_n += r.epsilon > r.t2 - r.t1 ? 1 : 0;
  }
  std::ostringstream csv, detail;
  write_kernel_csv(csv, rows);
  detail << "s3 bound failures " << fail << " of " << rows.size() << " (" << short_n << " points with eps > t) "
         << word(fail == 0) << '\n';
  return {4, "s3 bounds", fail == 0, detail.str(), csv.str()};
}

// 5. Rate of the smoothed-minus-rough variance, plus a Monte Carlo cross-check at the coarsest eps.
CriterionResult difference_rate(const ValidationOptions& o) {
  SweepSpec spec = base_spec(o, 5, "rate_sweep");
  spec.epsilons = dyadic(3, 9);
  const auto rates = run_rate_sweep(spec);

  const double eps = 0.125;
  const std::size_t n = quick(o) ? 5000 : 100000;
  const TimeGrid grid = grid_for(spec.horizon, eps / 32.0, eps);
  WalkConfig cfg;
  std::ostringstream csv, detail;
  csv << rates.csv << std::setprecision(17) << "# mc_check\nH,jumps,eps,exact,mc_mean,mc_stderr,pass\n";
  bool mc_pass = true;
  for (std::size_t hi = 0; hi < spec.hursts.size(); ++hi) {
    const HurstParameter h(spec.hursts[hi]);
    const auto snapped = snap_to_grid(rate_test_path(cfg, 3, mix64(spec.master_seed, 3)), grid);
    if (!snapped) throw NumericsError("criterion 5: test path does not snap to the grid");
    const double exact = difference_variance(*snapped, h, eps);
    const std::uint64_t seed = mix64(seed_for(o, 5), 100 + hi);
    std::vector<double> sq(n);
    parallel_for(n, o.workers, [&](std::size_t k) {
      const HurstField field(h, grid, mix64(seed, k));
      const EpsilonDerivative ed(field, eps);
      const double d = smooth_functional(*snapped, ed) - rough_functional(*snapped, field);
      sq[k] = d * d;
    });
    const auto ms = mean_stderr(sq);
    const bool ok = std::abs(ms.mean - exact) <= 3.0 * ms.std_error;
    mc_pass = mc_pass && ok;
    csv << h.value() << ",3," << eps << ',' << exact << ',' << ms.mean << ',' << ms.std_error << ',' << (ok ? 1 : 0)
        << '\n';
    detail << "mc H=" << h.value() << " exact=" << std::setprecision(6) << exact << " mc=" << ms.mean << " +- "
           << ms.std_error << ' ' << word(ok) << '\n';
  }
  return {5, "smoothed-minus-rough variance rate", rates.pass && mc_pass, rates.verdict + detail.str(), csv.str()};
}

// 6. Feynman-Kac against the lattice PDE on fixed noise.
CriterionResult fk_pde(const ValidationOptions& o) {
  SweepSpec spec = base_spec(o, 6, "fk_pde_crosscheck");
  spec.epsilons = {0.1};
  spec.realizations = quick(o) ? 3 : 20;
  spec.n_samples = quick(o) ? 2000 : 20000;
  return from_output(6, "fk-pde duality", run_fk_pde_crosscheck(spec, InitialCondition::indicator(Site{0})));
}

// 7. Paired estimate of E|u_eps - u|^2.
CriterionResult ueps(const ValidationOptions& o) {
  SweepSpec spec = base_spec(o, 7, "ueps_convergence");
  spec.epsilons = {0.1, 0.05, 0.025, 0.0125};
  spec.realizations = quick(o) ? 10 : 200;
  spec.inner = quick(o) ? 100 : 1000;
  return from_output(7, "u_eps convergence", run_ueps_convergence(spec, InitialCondition::constant(1.0)));
}

// 8. Rough-period tails of Poisson paths.
CriterionResult rough_tail(const ValidationOptions& o) {
  SweepSpec spec = base_spec(o, 8, "rough_tail");
  spec.n_samples = quick(o) ? 100000 : 1000000;
  spec.deltas = {0.1, 0.05, 0.025};
  return from_output(8, "rough-period tails", run_rough_tail(spec));
}

// 9. Second moment of u_eps(1, 0) across eps.
CriterionResult moments(const ValidationOptions& o) {
  SweepSpec spec = base_spec(o, 9, "moment_stability");
  spec.hursts = {0.25, 0.75};
  spec.epsilons = {0.1, 0.05, 0.025};
  spec.realizations = quick(o) ? 40 : 1000;
  spec.inner = quick(o) ? 40 : 1000;
  return from_output(9, "moment stability", run_moment_stability(spec, InitialCondition::constant(1.0), 2.0));
}

WalkPath fixed_path(std::vector<double> times, std::vector<int> xs) {
  WalkPath p;
  p.horizon = 1.0;
  p.jump_times = std::move(times);
  for (int x : xs) p.sites.push_back(Site{x});
  p.validate();
  return p;
}

// 10. Pointwise kernel bounds and the two inner products at small eps.
CriterionResult kernel_pointwise(const ValidationOptions&) {
  constexpr std::size_t kGrid = 10000;
  const std::array<double, 6> hursts{0.1, 0.25, 0.4, 0.6, 0.75, 0.9};
  const std::array<double, 4> epsilons{1e-1, 1e-2, 1e-3, 1e-4};
  std::ostringstream csv, detail;
  csv << std::setprecision(17) << "check,H,eps,worst_ratio,points,failures\n";
  std::size_t f_fail = 0, h_fail = 0, r_fail = 0;
  for (double hv : hursts) {
    const HurstParameter h(hv);
    const double q = 2.0 * hv - 2.0;
    for (double e : epsilons) {
      std::size_t ff = 0, hf = 0, rf = 0;
      double fw = 0.0, hw = 0.0, rw = 0.0;
      for (double g : log_spaced(1e-6, 10.0, kGrid)) {
        const double ratio = std::abs(f_eps(g, h, e)) / (18.0 * std::pow(g, q));
        fw = std::max(fw, ratio);
        ff += ratio <= 1.0 ? 0 : 1;
      }
      for (double r : log_spaced(2.0 * e, 10.0, kGrid)) {
        const double ratio = std::abs(h_eps(r, h, e)) / (8.0 * std::pow(r, q));
        hw = std::max(hw, ratio);
        hf += ratio <= 1.0 ? 0 : 1;
      }
      csv << "f_eps," << hv << ',' << e << ',' << fw << ',' << kGrid << ',' << ff << '\n';
      csv << "h_eps," << hv << ',' << e << ',' << hw << ',' << kGrid << ',' << hf << '\n';
      if (hv < 0.5) {
        for (double r : log_spaced(1e-6, 10.0, kGrid)) {
          const double ratio = rho(r, h, e) / (2.0 * std::pow(r, 2.0 * hv - 1.0));
          rw = std::max(rw, ratio);
          rf += ratio <= 1.0 ? 0 : 1;
        }
        csv << "rho," << hv << ',' << e << ',' << rw << ',' << kGrid << ',' << rf << '\n';
      }
      f_fail += ff;
      h_fail += hf;
      r_fail += rf;
    }
  }
  detail << "|f_eps| <= 18 g^(2H-2) failures " << f_fail << ' ' << word(f_fail == 0) << '\n'
         << "|h_eps| <= 8 r^(2H-2), r >= 2 eps failures " << h_fail << ' ' << word(h_fail == 0) << '\n'
         << "rho <= 2 r^(2H-1), H < 1/2 failures " << r_fail << ' ' << word(r_fail == 0) << '\n';

  const std::array<WalkPath, 3> paths{fixed_path({0.3}, {0, 1}), fixed_path({0.2, 0.5, 0.8}, {0, 1, 0, 1}),
                                      fixed_path({0.1, 0.4, 0.45}, {0, -1, 0, 1})};
  csv << "# inner_products\npath,H,eps,inner_gX_ge,inner_geX_ge,difference\n";
  bool inner_ok = true;
  double worst = 0.0;
  for (std::size_t k = 0; k < paths.size(); ++k) {
    for (double hv : {0.25, 0.5, 0.75}) {
      for (double e : epsilons) {
        const auto in = InnerProductInput::from_path(paths[k], Site{0}, HurstParameter(hv), e);
        const double a = inner_gX_ge(in), b = inner_geX_ge(in);
        csv << k << ',' << hv << ',' << e << ',' << a << ',' << b << ',' << a - b << '\n';
        if (e == 1e-4) {
          worst = std::max(worst, std::abs(a - b));
          inner_ok = inner_ok && std::abs(a - b) < 1e-3;
        }
      }
    }
  }
  detail << "max |<g^X,g^eps> - <g^{eps,X},g^eps>| at eps=1e-4 over 3 paths = " << std::setprecision(4) << worst
         << " (need < 1e-3) " << word(inner_ok) << '\n';
  const bool pass = f_fail == 0 && h_fail == 0 && r_fail == 0 && inner_ok;
  return {10, "kernel pointwise bounds", pass, detail.str(), csv.str()};
}

// 11. Same results at two worker counts.
CriterionResult determinism(const ValidationOptions& o) {
  ValidationOptions a = o;
  a.scale = ValidationScale::quick;
  a.only = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  ValidationOptions b = a;
  a.workers = 1;
  b.workers = 4;
  const auto ra = run_validation(a);
  const auto rb = run_validation(b);
  std::ostringstream csv, detail;
  csv << "criterion,bytes,identical\n";
  bool pass = ra.size() == rb.size();
  for (std::size_t i = 0; i < ra.size() && i < rb.size(); ++i) {
    const bool same = ra[i].csv == rb[i].csv && ra[i].detail == rb[i].detail;
    pass = pass && same;
    csv << ra[i].id << ',' << ra[i].csv.size() << ',' << (same ? 1 : 0) << '\n';
  }
  detail << "quick-scale criteria 1-10 with 1 and 4 workers byte-identical " << word(pass) << '\n';
  return {11, "determinism", pass, detail.str(), csv.str()};
}

}  // namespace

ValidationScale parse_scale(const std::string& s) {
  if (s == "full") return ValidationScale::full;
  if (s == "quick") return ValidationScale::quick;
  throw ConfigError("validate.scale must be 'full' or 'quick', got '" + s + "'");
}

CriterionResult run_criterion(int id, const ValidationOptions& opts) {
  switch (id) {
    case 1: return fbm_moments(opts);
    case 2: return eps_correlation(opts);
    case 3: return s2_bounds(opts);
    case 4: return s3_bounds(opts);
    case 5: return difference_rate(opts);
    case 6: return fk_pde(opts);
    case 7: return ueps(opts);
    case 8: return rough_tail(opts);
    case 9: return moments(opts);
    case 10: return kernel_pointwise(opts);
    case 11: return determinism(opts);
    default: throw ConfigError("unknown criterion " + std::to_string(id));
  }
}

std::vector<CriterionResult> run_validation(const ValidationOptions& opts,
                                            const std::function<void(const CriterionResult&)>& on_done) {
  std::vector<int> ids = opts.only;
  if (ids.empty()) {
    for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
  }
  std::vector<CriterionResult> out;
  for (int id : ids) {
    out.push_back(run_criterion(id, opts));
    if (on_done) on_done(out.back());
  }
  return out;
}

}  // namespace fkpam
