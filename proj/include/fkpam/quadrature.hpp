#pragma once

#include <functional>
#include <span>

namespace fkpam {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

/// Adaptive Simpson on [a, b] with absolute tolerance `tol`. Each
/// sub-interval between consecutive breakpoints is integrated after the
/// substitution x = a + (b - a) s(u) with the quintic smoothstep s, which
/// flattens |x - c|^p cusps at the breakpoints. Breakpoints outside (a, b)
/// are ignored. Throws NumericsError when the recursion bottoms out without
/// meeting the tolerance.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, double tol,
                           std::span<const double> breakpoints = {}, int max_depth = 48);

}  // namespace fkpam
