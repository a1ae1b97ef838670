#pragma once

// Deterministic covariance quantities of the epsilon-derivative and their
// bounds: the segment terms S2 and S3, the variance of the smoothed minus
// rough path integral, the pointwise kernels f_eps, h_eps, rho, and the two
// inner products against g^eps.

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fkpam/field.hpp"
#include "fkpam/walk.hpp"

namespace fkpam {

enum class KernelMethod { closed_form, quadrature };

struct SegmentKernelInput {
  HurstParameter hurst{0.5};
  double t1 = 0.0;
  double t2 = 1.0;
  double epsilon = 0.1;
  double T = 1.0;  // time horizon entering the H > 1/2 constants

  void validate() const;
  double length() const noexcept { return t2 - t1; }
};

struct KernelEval {
  double value = 0.0;
  double bound = 0.0;
  double target = 0.0;

  bool within_bound() const noexcept;
};

/// E[W'_eps(alpha) W'_eps(beta)] for the same site.
double eps_autocov(HurstParameter h, double alpha, double beta, double epsilon) noexcept;

/// Variance of the integral of W'_eps over [t1, t2]; target (t2 - t1)^{2H}.
KernelEval s2(const SegmentKernelInput& in, KernelMethod method = KernelMethod::closed_form);
/// 2 (t2 - t1)(2H + 1) eps^{2H - 1}, the second S2 bound for H >= 1/2.
double s2_alternative_bound(const SegmentKernelInput& in);

/// Covariance of the integral of W'_eps over [t1, t2] with W(t2) - W(t1); target (t2 - t1)^{2H}.
KernelEval s3(const SegmentKernelInput& in, KernelMethod method = KernelMethod::closed_form);

/// E| int_0^t W'_eps(s, X(s)) ds - sum_i (W(t_{i+1}, x_i) - W(t_i, x_i)) |^2 along
/// the given path, as an exact Gaussian quadratic form over same-site segment pairs.
double difference_variance(const WalkPath& path, HurstParameter h, double epsilon,
                       KernelMethod method = KernelMethod::quadrature);

/// Covariance of the smoothed integrals over segments [a1, b1] and [a2, b2] at one site.
double smooth_segment_covariance(HurstParameter h, double epsilon, double a1, double b1, double a2, double b2,
                                 KernelMethod method = KernelMethod::closed_form);
/// Covariance of the smoothed integral over [a1, b1] with W(b2) - W(a2) at one site.
double mixed_segment_covariance(HurstParameter h, double epsilon, double a1, double b1, double a2, double b2,
                                KernelMethod method = KernelMethod::closed_form);

/// (1/(4 eps^2)) [(g + 2eps)^{2H} + |g - 2eps|^{2H} - 2 g^{2H}], gamma >= 0.
double f_eps(double gamma, HurstParameter h, double epsilon) noexcept;
/// (2H/(2 eps)) [|r + eps|^{2H-1} - sgn(r - eps)|r - eps|^{2H-1}], r > 0.
double h_eps(double r, HurstParameter h, double epsilon) noexcept;
/// (1/(4 eps)) (|r + eps|^{2H} - |r - eps|^{2H}).
double rho(double r, HurstParameter h, double epsilon) noexcept;

/// 2H(2H - 1) r^{2H - 2}, the common eps -> 0 limit of f_eps and h_eps.
double kernel_limit(double r, HurstParameter h) noexcept;

struct Interval {
  double begin;
  double end;
};

struct InnerProductInput {
  HurstParameter hurst{0.5};
  double epsilon = 0.1;
  double s = 1.0;
  std::vector<Interval> intervals;  // the segments indexed by J, disjoint, inside [0, s]

  /// J for the path on [0, path.horizon] and the site x.
  static InnerProductInput from_path(const WalkPath& path, const Site& x, HurstParameter h, double epsilon);
};

/// <g^{eps,X}, g^eps> = 1/2 sum_J int f_eps.
double inner_geX_ge(const InnerProductInput& in, KernelMethod method = KernelMethod::closed_form);
/// <g^X, g^eps> by the four-term telescoping sum.
double inner_gX_ge(const InnerProductInput& in);

struct KernelRow {
  std::string kernel;
  double hurst;
  double epsilon;
  double t1;
  double t2;
  KernelEval eval;
};

void write_kernel_csv(std::ostream& os, std::span<const KernelRow> rows, bool header = true);

/// S2 and S3 rows over the H x eps x length grid (t1 = 0, T = max length).
std::vector<KernelRow> kernel_sweep(std::span<const double> hursts, std::span<const double> epsilons,
                                    std::span<const double> lengths);

}  // namespace fkpam
