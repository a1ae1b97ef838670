#include "fkpam/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <stdexcept>

#include "fkpam/quadrature.hpp"

namespace fkpam {

namespace {

constexpr double kKernelTol = 1e-9;

// g(x) = int_0^x |r|^p dr and its antiderivative P(x).
double g1(double x, double p) { return std::copysign(abs_pow(x, p + 1.0), x) / (p + 1.0); }
double g2(double x, double p) { return abs_pow(x, p + 2.0) / ((p + 1.0) * (p + 2.0)); }

// (1 + x)^q - 1 without cancellation for small x.
double pow1pm1(double x, double q) { return std::expm1(q * std::log1p(x)); }

// Even in gamma. Beyond the kink the factored form keeps the sign of the second difference.
double bracket(double gamma, double p, double eps) {
  const double a = std::abs(gamma);
  if (a > 2.0 * eps) {
    const double x = 2.0 * eps / a;
    return std::pow(a, p) * (pow1pm1(x, p) + pow1pm1(-x, p));
  }
  return abs_pow(gamma + 2.0 * eps, p) + abs_pow(gamma - 2.0 * eps, p) - 2.0 * abs_pow(gamma, p);
}

// Integral over [0, t] of the bracket's s-antiderivative, i.e. the double integral defining S2 times 4 eps^2.
double s2_numerator(double t, double p, double eps) {
  const double shift = 2.0 * eps;
  return g2(t + shift, p) + g2(t - shift, p) - 2.0 * g2(t, p) - 2.0 * g2(shift, p);
}

double s2_bound(double p, double eps, double T) {
  const double h = 0.5 * p;
  const double small = 4.0 * std::pow(2.0 * eps, p);
  const double large = std::pow(2.0, p) * (2.0 + p * std::pow(T, p - 1.0)) * eps;
  if (h < 0.5) return small;
  if (h > 0.5) return large;
  return std::min(small, large);
}

double s3_bound(double p, double eps, double t) {
  const double h = 0.5 * p;
  if (h <= 0.5) return 2.0 * std::pow(eps, p) / (p + 1.0);
  return (h * std::pow(t, p - 1.0) + 1.0 / (p + 1.0)) * eps;
}

double overlap(double a1, double b1, double a2, double b2, double gamma) {
  return std::max(0.0, std::min(b1, b2 + gamma) - std::max(a1, a2 + gamma));
}

}  // namespace

void SegmentKernelInput::validate() const {
  if (!(t1 >= 0.0)) throw std::invalid_argument("SegmentKernelInput: t1 must be >= 0");
  if (!(t2 > t1)) throw std::invalid_argument("SegmentKernelInput: t2 must exceed t1");
  if (!(epsilon > 0.0) || epsilon > 1.0) throw std::invalid_argument("SegmentKernelInput: epsilon must be in (0, 1]");
  if (t2 > T * (1.0 + 1e-12)) throw std::invalid_argument("SegmentKernelInput: t2 must not exceed T");
}

bool KernelEval::within_bound() const noexcept {
  if (!std::isfinite(value) || !std::isfinite(bound) || !std::isfinite(target)) return true;
  return std::abs(value - target) <= bound;
}

double eps_autocov(HurstParameter h, double alpha, double beta, double epsilon) noexcept {
  return bracket(alpha - beta, h.two_h(), epsilon) / (8.0 * epsilon * epsilon);
}

KernelEval s2(const SegmentKernelInput& in, KernelMethod method) {
  in.validate();
  const double p = in.hurst.two_h();
  const double eps = in.epsilon;
  const double t = in.length();
  KernelEval out;
  out.target = std::pow(t, p);
  out.bound = s2_bound(p, eps, in.T);
  if (method == KernelMethod::closed_form) {
    out.value = s2_numerator(t, p, eps) / (4.0 * eps * eps);
  } else {
    const auto inner = [&](double s) {
      return (g1(s + 2.0 * eps, p) + g1(s - 2.0 * eps, p) - 2.0 * g1(s, p)) / (4.0 * eps * eps);
    };
    const std::array<double, 1> kinks{2.0 * eps};
    out.value = integrate(inner, 0.0, t, kKernelTol, kinks).value;
  }
  return out;
}

double s2_alternative_bound(const SegmentKernelInput& in) {
  in.validate();
  const double p = in.hurst.two_h();
  return 2.0 * in.length() * (p + 1.0) * std::pow(in.epsilon, p - 1.0);
}

KernelEval s3(const SegmentKernelInput& in, KernelMethod method) {
  in.validate();
  const double p = in.hurst.two_h();
  const double eps = in.epsilon;
  const double t = in.length();
  KernelEval out;
  out.target = std::pow(t, p);
  out.bound = s3_bound(p, eps, t);
  if (method == KernelMethod::closed_form) {
    out.value = (g1(t + eps, p) - g1(t - eps, p) - 2.0 * g1(eps, p)) / (2.0 * eps);
  } else {
    const double a = in.t1, b = in.t2;
    const auto integrand = [&](double th) {
      return (abs_pow(b - th + eps, p) + abs_pow(th - a + eps, p) - abs_pow(b - th - eps, p) -
              abs_pow(th - a - eps, p)) /
             (4.0 * eps);
    };
    const std::array<double, 2> kinks{a + eps, b - eps};
    out.value = integrate(integrand, a, b, kKernelTol, kinks).value;
  }
  return out;
}

double smooth_segment_covariance(HurstParameter h, double epsilon, double a1, double b1, double a2, double b2,
                                 KernelMethod method) {
  const double p = h.two_h();
  if (method == KernelMethod::closed_form) {
    const auto q = [&](double shift) {
      return g2(b1 - a2 + shift, p) - g2(a1 - a2 + shift, p) - g2(b1 - b2 + shift, p) + g2(a1 - b2 + shift, p);
    };
    const double shift = 2.0 * epsilon;
    return (q(shift) + q(-shift) - 2.0 * q(0.0)) / (8.0 * epsilon * epsilon);
  }
  const auto integrand = [&](double gamma) {
    const double w = overlap(a1, b1, a2, b2, gamma);
    return w == 0.0 ? 0.0 : eps_autocov(h, gamma, 0.0, epsilon) * w;
  };
  const std::array<double, 7> kinks{a1 - b2, a1 - a2, b1 - b2, b1 - a2, 0.0, 2.0 * epsilon, -2.0 * epsilon};
  return integrate(integrand, a1 - b2, b1 - a2, kKernelTol, kinks).value;
}

double mixed_segment_covariance(HurstParameter h, double epsilon, double a1, double b1, double a2, double b2,
                                KernelMethod method) {
  const double p = h.two_h();
  if (method == KernelMethod::closed_form) {
    const auto seg = [&](double c) { return g1(b1 + c, p) - g1(a1 + c, p); };
    return (seg(epsilon - a2) + seg(-epsilon - b2) - seg(epsilon - b2) - seg(-epsilon - a2)) / (4.0 * epsilon);
  }
  const auto integrand = [&](double s) {
    return increment_covariance(h, s + epsilon, s - epsilon, b2, a2) / (2.0 * epsilon);
  };
  const std::array<double, 4> kinks{a2 - epsilon, a2 + epsilon, b2 - epsilon, b2 + epsilon};
  return integrate(integrand, a1, b1, kKernelTol, kinks).value;
}

double difference_variance(const WalkPath& path, HurstParameter h, double epsilon, KernelMethod method) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("difference_variance: epsilon must be > 0");
  path.validate();
  const std::size_t n = path.segment_count();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a1 = path.segment_begin(i), b1 = path.segment_end(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (!(path.sites[i] == path.sites[j])) continue;
      const double a2 = path.segment_begin(j), b2 = path.segment_end(j);
      const double aa = smooth_segment_covariance(h, epsilon, a1, b1, a2, b2, method);
      const double ab = mixed_segment_covariance(h, epsilon, a1, b1, a2, b2, method);
      const double ba = mixed_segment_covariance(h, epsilon, a2, b2, a1, b1, method);
      const double bb = increment_covariance(h, b1, a1, b2, a2);
      total += aa - ab - ba + bb;
    }
  }
  return total;
}

double f_eps(double gamma, HurstParameter h, double epsilon) noexcept {
  return bracket(gamma, h.two_h(), epsilon) / (4.0 * epsilon * epsilon);
}

double h_eps(double r, HurstParameter h, double epsilon) noexcept {
  const double p = h.two_h();
  const double q = p - 1.0;
  const double scale = p / (2.0 * epsilon);
  if (r > epsilon) {
    const double y = epsilon / r;
    return scale * std::pow(r, q) * (pow1pm1(y, q) - pow1pm1(-y, q));
  }
  const double d = r - epsilon;
  const double second = d == 0.0 ? 0.0 : -std::copysign(std::pow(std::abs(d), q), d);
  return scale * (std::pow(std::abs(r + epsilon), q) + second);
}

double rho(double r, HurstParameter h, double epsilon) noexcept {
  const double p = h.two_h();
  if (r > epsilon) {
    const double y = epsilon / r;
    return std::pow(r, p) * (pow1pm1(y, p) - pow1pm1(-y, p)) / (4.0 * epsilon);
  }
  return (abs_pow(r + epsilon, p) - abs_pow(r - epsilon, p)) / (4.0 * epsilon);
}

double kernel_limit(double r, HurstParameter h) noexcept {
  const double p = h.two_h();
  return p * (p - 1.0) * std::pow(r, p - 2.0);
}

InnerProductInput InnerProductInput::from_path(const WalkPath& path, const Site& x, HurstParameter h,
                                               double epsilon) {
  InnerProductInput in{h, epsilon, path.horizon, {}};
  for (std::size_t i = 0; i < path.segment_count(); ++i) {
    if (path.sites[i] == x) in.intervals.push_back({path.segment_begin(i), path.segment_end(i)});
  }
  return in;
}

double inner_geX_ge(const InnerProductInput& in, KernelMethod method) {
  const double p = in.hurst.two_h();
  const double eps = in.epsilon;
  double total = 0.0;
  for (const auto& iv : in.intervals) {
    if (method == KernelMethod::closed_form) {
      const auto prim = [&](double gm) { return g1(gm + 2.0 * eps, p) + g1(gm - 2.0 * eps, p) - 2.0 * g1(gm, p); };
      total += (prim(iv.end) - prim(iv.begin)) / (8.0 * eps * eps);
    } else {
      const std::array<double, 1> kinks{2.0 * eps};
      total += 0.5 * integrate([&](double gm) { return f_eps(gm, in.hurst, eps); }, iv.begin, iv.end, kKernelTol,
                               kinks)
                         .value;
    }
  }
  return total;
}

double inner_gX_ge(const InnerProductInput& in) {
  const double p = in.hurst.two_h();
  const double eps = in.epsilon;
  double total = 0.0;
  for (const auto& iv : in.intervals) {
    total += (abs_pow(iv.end + eps, p) - abs_pow(iv.begin + eps, p) + abs_pow(iv.begin - eps, p) -
              abs_pow(iv.end - eps, p)) /
             (4.0 * eps);
  }
  return total;
}

void write_kernel_csv(std::ostream& os, std::span<const KernelRow> rows, bool header) {
  if (header) os << "kernel,H,eps,t1,t2,value,target,bound,within_bound\n";
  os << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.kernel << ',' << r.hurst << ',' << r.epsilon << ',' << r.t1 << ',' << r.t2 << ',' << r.eval.value << ','
       << r.eval.target << ',' << r.eval.bound << ',' << (r.eval.within_bound() ? 1 : 0) << '\n';
  }
}

std::vector<KernelRow> kernel_sweep(std::span<const double> hursts, std::span<const double> epsilons,
                                    std::span<const double> lengths) {
  double T = 0.0;
  for (double l : lengths) T = std::max(T, l);
  std::vector<KernelRow> rows;
  for (double hv : hursts) {
    const HurstParameter h(hv);
    for (double eps : epsilons) {
      for (double len : lengths) {
        const SegmentKernelInput in{h, 0.0, len, eps, T};
        rows.push_back({"s2", hv, eps, 0.0, len, s2(in)});
        if (hv > 0.5) {
          KernelEval alt = rows.back().eval;
          alt.bound = s2_alternative_bound(in);
          rows.push_back({"s2_alt", hv, eps, 0.0, len, alt});
        }
        rows.push_back({"s3", hv, eps, 0.0, len, s3(in)});
      }
    }
  }
  return rows;
}

}  // namespace fkpam
