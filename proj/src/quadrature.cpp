#include "fkpam/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fkpam/errors.hpp"

namespace fkpam {

namespace {

struct Simpson {
  const std::function<double(double)>* g;
  std::size_t evals = 0;
  double err = 0.0;
  bool failed = false;
  int force_until = 0;  // depths above this always split, to avoid early false convergence

  double eval(double u) {
    ++evals;
    return (*g)(u);
  }

  double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || !std::isfinite(diff)) {
      failed = failed || std::abs(diff) > 15.0 * tol || !std::isfinite(diff);
      err += std::abs(diff) / 15.0;
      return left + right + diff / 15.0;
    }
    const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(left + right);
    if (depth <= force_until && std::abs(diff) <= std::max(15.0 * tol, roundoff)) {
      err += std::abs(diff) / 15.0;
      return left + right + diff / 15.0;
    }
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
  }
};

// Quintic smoothstep and its derivative; both derivatives vanish at 0 and 1.
double smooth(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }
double smooth_prime(double u) { return 30.0 * u * u * (1.0 - u) * (1.0 - u); }

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, double tol,
                           std::span<const double> breakpoints, int max_depth) {
  if (!(tol > 0.0)) throw std::invalid_argument("integrate: tolerance must be > 0");
  if (a == b) return {};
  if (b < a) {
    auto r = integrate(f, b, a, tol, breakpoints, max_depth);
    r.value = -r.value;
    return r;
  }
  std::vector<double> nodes{a, b};
  for (double c : breakpoints) {
    if (c > a && c < b) nodes.push_back(c);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  QuadratureResult out;
  const double piece_tol = tol / static_cast<double>(nodes.size() - 1);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double lo = nodes[i];
    const double len = nodes[i + 1] - lo;
    const std::function<double(double)> g = [&](double u) {
      const double w = smooth_prime(u);
      return w == 0.0 ? 0.0 : f(lo + len * smooth(u)) * len * w;
    };
    Simpson s{&g};
    s.force_until = max_depth - 4;
    const double f0 = s.eval(0.0), fm = s.eval(0.5), f1 = s.eval(1.0);
    const double whole = (f0 + 4.0 * fm + f1) / 6.0;
    out.value += s.recurse(0.0, 1.0, f0, fm, f1, whole, piece_tol, max_depth);
    out.error_estimate += s.err;
    out.evaluations += s.evals;
    if (s.failed) {
      throw NumericsError("adaptive quadrature did not converge to tolerance " + std::to_string(tol) + " on [" +
                          std::to_string(lo) + ", " + std::to_string(nodes[i + 1]) + "]");
    }
  }
  return out;
}

}  // namespace fkpam
