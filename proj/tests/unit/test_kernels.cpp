#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fkpam/kernels.hpp"
#include "fkpam/rng.hpp"
#include "fkpam/stats.hpp"

using namespace fkpam;

namespace {

double oracle_incr(double h, double a, double b, double c, double d) {
  const auto p = [h](double x) { return std::pow(std::abs(x), 2 * h); };
  return 0.5 * (p(a - d) + p(b - c) - p(a - c) - p(b - d));
}

// Composite Simpson with an explicit split point; the kernels are smooth away from it.
template <class F>
double simpson(F f, double a, double b, int panels = 20000) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

template <class F>
double simpson_split(F f, double a, double b, double kink) {
  if (kink <= a || kink >= b) return simpson(f, a, b);
  return simpson(f, a, kink) + simpson(f, kink, b);
}

WalkPath fixed_path(std::vector<double> times, std::vector<std::int32_t> xs, double horizon = 1.0) {
  WalkPath p;
  p.jump_times = std::move(times);
  for (auto x : xs) p.sites.push_back(Site{x});
  p.horizon = horizon;
  return p;
}

const std::vector<double> kDyadic{0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625, 0.001953125};

}  // namespace

TEST_CASE("eps_autocov examples") {
  const HurstParameter half(0.5), quarter(0.25);
  const double eps = 0.05;
  CHECK(eps_autocov(half, 0.7, 0.5, eps) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(eps_autocov(half, 0.3, 0.3, eps) == doctest::Approx(1.0 / (2 * eps)));
  const double v = eps_autocov(quarter, 0.4, 0.4 + 2 * eps, eps);
  CHECK(v <= 0.0);
  CHECK(std::abs(v) <= 4 * std::pow(4 * eps, 0.5) / (4 * eps * eps));
  // Against the increment covariance of the two centred differences.
  for (double g : {0.0, 0.03, 0.1, 0.17, 1.3}) {
    CHECK(eps_autocov(quarter, 0.5, 0.5 + g, eps) ==
          doctest::Approx(oracle_incr(0.25, 0.5 + eps, 0.5 - eps, 0.5 + g + eps, 0.5 + g - eps) / (4 * eps * eps)));
  }
}

TEST_CASE("eps_autocov is nonpositive beyond 2 eps for H < 1/2") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> hu(0.02, 0.49), lu(0.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 10000; ++i) {
    const double eps = std::pow(10.0, -4.0 * lu(rng));
    const double gap = 2 * eps * (1.0 + 100.0 * lu(rng));
    CHECK(eps_autocov(HurstParameter(hu(rng)), 0.0, gap, eps) <= 0.0);
    ++checked;
  }
  CHECK(checked == 10000);
}

TEST_CASE("s2 and s3 at H = 1/2 have simple closed forms") {
  for (double eps : {0.1, 0.05, 0.01}) {
    for (double t : {0.25, 1.0}) {
      const SegmentKernelInput in{HurstParameter(0.5), 0.0, t, eps, 1.0};
      CHECK(s2(in).value == doctest::Approx(t - 2 * eps / 3).epsilon(1e-12));
      CHECK(s3(in).value == doctest::Approx(t - eps / 2).epsilon(1e-12));
      CHECK(std::abs(s3(in).value - t) <= eps);
      CHECK(s2(in).target == t);
    }
  }
  const SegmentKernelInput one{HurstParameter(0.5), 0.0, 1.0, 0.1, 1.0};
  CHECK(s2(one).value == doctest::Approx(0.933333333333).epsilon(1e-10));
}

TEST_CASE("closed forms agree with quadrature") {
  for (double hv : {0.15, 0.3, 0.5, 0.7, 0.85}) {
    const HurstParameter h(hv);
    for (double eps : {0.125, 0.01}) {
      for (double t : {0.05, 0.25, 1.0}) {
        const SegmentKernelInput in{h, 0.2, 0.2 + t, eps, 1.5};
        CHECK(s2(in).value == doctest::Approx(s2(in, KernelMethod::quadrature).value).epsilon(1e-7));
        CHECK(s3(in).value == doctest::Approx(s3(in, KernelMethod::quadrature).value).epsilon(1e-7));
      }
      CHECK(smooth_segment_covariance(h, eps, 0.1, 0.4, 0.45, 0.9) ==
            doctest::Approx(smooth_segment_covariance(h, eps, 0.1, 0.4, 0.45, 0.9, KernelMethod::quadrature))
                .epsilon(1e-7));
      CHECK(mixed_segment_covariance(h, eps, 0.1, 0.4, 0.45, 0.9) ==
            doctest::Approx(mixed_segment_covariance(h, eps, 0.1, 0.4, 0.45, 0.9, KernelMethod::quadrature))
                .epsilon(1e-7));
    }
  }
}

TEST_CASE("s2 against an independent double integral of the autocovariance") {
  // S2 = int int eps_autocov over the square, written through increment covariances.
  const double hv = 0.3, eps = 0.05, t = 0.25;
  const auto acov = [&](double g) {
    return oracle_incr(hv, g + eps, g - eps, eps, -eps) / (4 * eps * eps);
  };
  // Double integral over [0,t]^2 of a function of |a - b| is 2 int_0^t (t - g) k(g) dg.
  const double oracle = 2.0 * simpson_split([&](double g) { return (t - g) * acov(g); }, 0.0, t, 2 * eps);
  const SegmentKernelInput in{HurstParameter(hv), 0.0, t, eps, 1.0};
  CHECK(s2(in).value == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("s2 and s3 stay within their bounds over the sweep") {
  std::vector<double> hursts;
  for (int i = 1; i <= 9; ++i) hursts.push_back(0.1 * i);
  const std::vector<double> lengths{0.25, 1.0};
  const auto rows = kernel_sweep(hursts, kDyadic, lengths);
  CHECK(rows.size() == 9 * kDyadic.size() * 2 * 2 + 4 * kDyadic.size() * 2);
  for (const auto& r : rows) {
    if (r.kernel == "s3" && r.hurst > 0.5) continue;
    INFO(r.kernel << " H=" << r.hurst << " eps=" << r.epsilon << " t=" << r.t2 << " value=" << r.eval.value);
    CHECK(r.eval.within_bound());
  }
}

TEST_CASE("s2 alternative bound for H >= 1/2") {
  for (double hv : {0.5, 0.75, 0.9}) {
    for (double eps : kDyadic) {
      const SegmentKernelInput in{HurstParameter(hv), 0.0, 1.0, eps, 1.0};
      CHECK(std::abs(s2(in).value - 1.0) <= s2_alternative_bound(in));
      CHECK(s2_alternative_bound(in) == doctest::Approx(2 * (2 * hv + 1) * std::pow(eps, 2 * hv - 1)));
    }
  }
}

TEST_CASE("s3 when eps exceeds the segment length") {
  for (double hv : {0.1, 0.25, 0.4, 0.5}) {
    const SegmentKernelInput in{HurstParameter(hv), 0.0, 0.03125, 0.125, 1.0};
    const auto e = s3(in);
    CHECK(std::isfinite(e.value));
    CHECK(e.within_bound());
    CHECK(e.value == doctest::Approx(s3(in, KernelMethod::quadrature).value).epsilon(1e-7));
  }
  double prev = 1.0;
  for (double t : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double v = std::abs(s3({HurstParameter(0.3), 0.0, t, 0.1, 1.0}).value);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("difference_variance for a single segment") {
  const HurstParameter h(0.5);
  const double eps = 0.1;
  const auto p = fixed_path({}, {0});
  const double v = difference_variance(p, h, eps);
  CHECK(v == doctest::Approx(eps / 3).epsilon(1e-8));
  for (double hv : {0.2, 0.7}) {
    const SegmentKernelInput in{HurstParameter(hv), 0.0, 1.0, eps, 1.0};
    const double s1 = oracle_incr(hv, 1, 0, 1, 0);
    CHECK(difference_variance(p, HurstParameter(hv), eps) ==
          doctest::Approx(s1 - 2 * s3(in).value + s2(in).value).epsilon(1e-8));
  }
  CHECK_THROWS(difference_variance(p, h, 0.0));
}

TEST_CASE("difference_variance closed form and quadrature agree on multi-jump paths") {
  const auto p = fixed_path({0.2, 0.5, 0.8}, {0, 1, 0, 1});
  for (double hv : {0.25, 0.5, 0.75}) {
    for (double eps : {0.125, 0.03125}) {
      const double q = difference_variance(p, HurstParameter(hv), eps, KernelMethod::quadrature);
      const double c = difference_variance(p, HurstParameter(hv), eps, KernelMethod::closed_form);
      CHECK(q == doctest::Approx(c).epsilon(1e-7));
      CHECK(q > 0.0);
    }
  }
}

TEST_CASE("difference_variance decays at rate eps^{min(2H,1)}") {
  const auto p = fixed_path({0.2, 0.5, 0.8}, {0, 1, 0, 1});
  for (double hv : {0.25, 0.5, 0.75}) {
    std::vector<double> x, y;
    for (double eps : kDyadic) {
      x.push_back(std::log(eps));
      y.push_back(std::log(difference_variance(p, HurstParameter(hv), eps, KernelMethod::closed_form)));
    }
    const auto fit = fit_line(x, y);
    CHECK(fit.slope >= std::min(2 * hv, 1.0) - 0.1);
  }
}

TEST_CASE("f_eps, h_eps and rho examples") {
  const HurstParameter half(0.5);
  CHECK(f_eps(0.5, half, 0.1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(std::abs(h_eps(0.5, half, 0.1)) < 1e-14);
  CHECK(rho(0.5, half, 0.1) == doctest::Approx(0.5));
  for (double hv : {0.1, 0.25, 0.4, 0.6, 0.75, 0.9}) {
    const HurstParameter h(hv);
    for (double g : {0.5, 1.0, 2.0}) {
      const double lim = 2 * hv * (2 * hv - 1) * std::pow(g, 2 * hv - 2);
      CHECK(kernel_limit(g, h) == doctest::Approx(lim));
      CHECK(std::abs(f_eps(g, h, 1e-5) - lim) < 1e-6);
      CHECK(std::abs(h_eps(g, h, 1e-5) - lim) < 1e-6);
    }
  }
  const HurstParameter q(0.25);
  const double r = 1e3, eps = 1e-2;
  CHECK(rho(r, q, eps) / (0.25 * std::pow(r, -0.5)) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("pointwise kernel bounds on log grids") {
  for (double hv : {0.1, 0.25, 0.4, 0.6, 0.75, 0.9}) {
    const HurstParameter h(hv);
    for (double eps : {1e-1, 1e-2, 1e-3}) {
      for (int i = 0; i < 2000; ++i) {
        const double g = std::pow(10.0, -5.0 + 5.3 * i / 1999.0);
        CHECK(std::abs(f_eps(g, h, eps)) <= 18 * std::pow(g, 2 * hv - 2));
        if (g >= 2 * eps) CHECK(std::abs(h_eps(g, h, eps)) <= 8 * std::pow(g, 2 * hv - 2));
        if (hv < 0.5) CHECK(rho(g, h, eps) <= 2 * std::pow(g, 2 * hv - 1));
      }
    }
  }
}

TEST_CASE("inner products: empty J and a single interval at H = 1/2") {
  InnerProductInput in{HurstParameter(0.5), 0.05, 1.0, {}};
  CHECK(inner_geX_ge(in) == 0.0);
  CHECK(inner_gX_ge(in) == 0.0);
  in.intervals = {{0.0, 1.0}};
  CHECK(inner_geX_ge(in) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(inner_geX_ge(in, KernelMethod::quadrature) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(inner_gX_ge(in) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("inner products against independent oracles") {
  const auto path = fixed_path({0.2, 0.5, 0.8}, {0, 1, 0, 1});
  for (double hv : {0.25, 0.5, 0.75}) {
    for (double eps : {0.1, 0.01}) {
      const auto in = InnerProductInput::from_path(path, Site{0}, HurstParameter(hv), eps);
      REQUIRE(in.intervals.size() == 2);
      const double s = in.s;
      // Lag-space integral of the same-site autocovariance over the intervals in J.
      double ge = 0.0, gx = 0.0;
      for (const auto& iv : in.intervals) {
        ge += simpson_split(
            [&](double g) { return oracle_incr(hv, s + eps, s - eps, s - g + eps, s - g - eps) / (4 * eps * eps); },
            iv.begin, iv.end, 2 * eps);
        gx += oracle_incr(hv, s + eps, s - eps, s - iv.begin, s - iv.end) / (2 * eps);
      }
      // The Simpson oracle loses accuracy at the |g|^{2H} cusp at lag 0.
      CHECK(inner_geX_ge(in) == doctest::Approx(ge).epsilon(2e-5));
      CHECK(inner_geX_ge(in, KernelMethod::quadrature) == doctest::Approx(inner_geX_ge(in)).epsilon(1e-8));
      CHECK(inner_gX_ge(in) == doctest::Approx(gx).epsilon(1e-12));
    }
  }
}

TEST_CASE("inner products match Monte Carlo on a fixed 2-jump path") {
  const auto path = fixed_path({0.3, 0.6}, {0, 1, 0});
  const double eps = 0.1, step = 0.0125, s = 1.0;
  const TimeGrid grid(step, s, 2 * eps);
  for (double hv : {0.3, 0.75}) {
    const HurstParameter h(hv);
    const auto in = InnerProductInput::from_path(path, Site{0}, h, eps);
    std::vector<double> ge(20000), gx(ge.size());
    for (std::size_t k = 0; k < ge.size(); ++k) {
      const HurstField f(h, grid, mix64(31, k));
      const EpsilonDerivative ed(f, eps);
      const double w = ed.at(s, Site{0});
      double a = 0.0, b = 0.0;
      for (const auto& iv : in.intervals) {
        a += ed.integral(Site{0}, s - iv.end, s - iv.begin);
        b += f.value(Site{0}, grid.nearest_index(s - iv.begin)) - f.value(Site{0}, grid.nearest_index(s - iv.end));
      }
      ge[k] = w * a;
      gx[k] = w * b;
    }
    const auto mge = mean_stderr(ge), mgx = mean_stderr(gx);
    CHECK(std::abs(mge.mean - inner_geX_ge(in)) <= 3 * mge.std_error + 1e-3);
    CHECK(std::abs(mgx.mean - inner_gX_ge(in)) <= 3 * mgx.std_error);
  }
}

TEST_CASE("inner product difference vanishes as eps decreases") {
  const auto path = fixed_path({0.1, 0.4, 0.45}, {0, -1, 0, 1});
  for (double hv : {0.25, 0.5, 0.75}) {
    double prev = INFINITY;
    bool monotone = true;
    double last = 0.0;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
      const auto in = InnerProductInput::from_path(path, Site{0}, HurstParameter(hv), eps);
      last = std::abs(inner_gX_ge(in) - inner_geX_ge(in));
      monotone = monotone && last <= prev;
      prev = last;
    }
    CHECK((monotone || last < 1e-3));
    CHECK(last < 1e-3);
  }
}

TEST_CASE("kernel evaluations are bitwise deterministic") {
  const SegmentKernelInput in{HurstParameter(0.37), 0.1, 0.9, 0.01, 1.0};
  CHECK(s2(in).value == s2(in).value);
  CHECK(s3(in, KernelMethod::quadrature).value == s3(in, KernelMethod::quadrature).value);
  const auto p = fixed_path({0.2, 0.5, 0.8}, {0, 1, 0, 1});
  CHECK(difference_variance(p, HurstParameter(0.37), 0.01) == difference_variance(p, HurstParameter(0.37), 0.01));
}

TEST_CASE("kernel CSV") {
  const std::vector<double> h{0.5}, e{0.125}, l{1.0};
  const auto rows = kernel_sweep(h, e, l);
  REQUIRE(rows.size() == 2);
  std::ostringstream os;
  write_kernel_csv(os, rows);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "kernel,H,eps,t1,t2,value,target,bound,within_bound");
  std::getline(is, line);
  CHECK(line.rfind("s2,0.5,0.125,0,1,", 0) == 0);
  CHECK(line.back() == '1');
}
