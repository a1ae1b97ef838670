#include "fkpam/field.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <stdexcept>

#include "fkpam/errors.hpp"
#include "fkpam/rng.hpp"

namespace fkpam {

namespace {

// FFTW's planner is not thread-safe; execution of an existing plan on new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t checked_ratio(double numerator, double step, const char* what) {
  const double r = numerator / step;
  const double k = std::round(r);
  if (std::abs(r - k) > 1e-9 * std::max(1.0, k)) {
    throw std::invalid_argument(std::string("TimeGrid: step must divide ") + what + " exactly");
  }
  return static_cast<std::size_t>(k);
}

// Autocovariance of fractional Gaussian noise with the given step at lag k.
double fgn_autocov(double two_h, double step, std::size_t k) {
  const double kd = static_cast<double>(k);
  const double base = 0.5 * (std::pow(kd + 1.0, two_h) - 2.0 * std::pow(kd, two_h) +
                             std::pow(std::abs(kd - 1.0), two_h));
  return std::pow(step, two_h) * base;
}

}  // namespace

HurstParameter::HurstParameter(double h) : h_(h) {
  if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("H must be in (0,1)");
}

double abs_pow(double x, double exponent) noexcept {
  const double a = std::abs(x);
  return a == 0.0 ? 0.0 : std::pow(a, exponent);
}

double covariance(HurstParameter h, double t, double s) noexcept {
  const double e = h.two_h();
  return 0.5 * (abs_pow(t, e) + abs_pow(s, e) - abs_pow(t - s, e));
}

double increment_covariance(HurstParameter h, double a, double b, double c, double d) noexcept {
  const double e = h.two_h();
  return 0.5 * (abs_pow(a - d, e) + abs_pow(b - c, e) - abs_pow(a - c, e) - abs_pow(b - d, e));
}

// ---------------------------------------------------------------------------
// TimeGrid

TimeGrid::TimeGrid(double step, double horizon, double pad) : step_(step), horizon_(horizon), pad_(pad) {
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("TimeGrid: step must be > 0");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("TimeGrid: horizon must be > 0");
  if (!(pad >= 0.0) || !std::isfinite(pad)) throw std::invalid_argument("TimeGrid: pad must be >= 0");
  horizon_steps_ = checked_ratio(horizon, step, "horizon");
  pad_steps_ = checked_ratio(pad, step, "pad");
  if (horizon_steps_ < 1) throw std::invalid_argument("TimeGrid: need at least two grid points");
}

double TimeGrid::time_at(std::size_t index) const noexcept {
  return (static_cast<double>(index) - static_cast<double>(pad_steps_)) * step_;
}

std::size_t TimeGrid::nearest_index(double t) const {
  const double k = std::round(index_coordinate(t));
  if (!(k >= 0.0) || k > static_cast<double>(count() - 1)) {
    throw std::out_of_range("time " + std::to_string(t) + " outside the padded grid");
  }
  return static_cast<std::size_t>(k);
}

bool TimeGrid::on_grid(double t) const noexcept {
  const double u = index_coordinate(t);
  const double k = std::round(u);
  return std::abs(u - k) <= 1e-9 && k >= 0.0 && k <= static_cast<double>(count() - 1);
}

// ---------------------------------------------------------------------------
// GridPathSampler

struct GridPathSampler::FftPlan {
  fftw_plan plan = nullptr;
  std::size_t size = 0;

  explicit FftPlan(std::size_t m) : size(m) {
    std::vector<std::complex<double>> in(m), out(m);
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(m), reinterpret_cast<fftw_complex*>(in.data()),
                            reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
                            FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan) throw NumericsError("FFTW failed to create a plan");
  }
  ~FftPlan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  void execute(std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out) const {
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
  }
};

GridPathSampler::GridPathSampler(HurstParameter h, std::size_t increments, double step, SamplerMethod method)
    : h_(h), n_(increments), step_(step), used_(SamplerMethod::cholesky) {
  if (n_ < 1) throw std::invalid_argument("GridPathSampler: need at least one increment");
  const double two_h = h.two_h();

  if (method != SamplerMethod::cholesky && n_ >= 2) {
    const std::size_t m = 2 * n_;
    std::vector<std::complex<double>> c(m), lambda(m);
    for (std::size_t k = 0; k <= n_; ++k) c[k] = fgn_autocov(two_h, step_, k);
    for (std::size_t k = 1; k < n_; ++k) c[m - k] = c[k];
    plan_ = std::make_unique<FftPlan>(m);
    plan_->execute(c, lambda);
    double max_eig = 0.0, min_eig = 0.0;
    for (const auto& l : lambda) {
      max_eig = std::max(max_eig, l.real());
      min_eig = std::min(min_eig, l.real());
    }
    min_rel_eig_ = max_eig > 0.0 ? min_eig / max_eig : -1.0;
    const bool nonneg = min_rel_eig_ >= -1e-10;
    if (nonneg) {
      used_ = SamplerMethod::circulant;
      sqrt_eigen_.resize(m);
      for (std::size_t k = 0; k < m; ++k) {
        sqrt_eigen_[k] = std::sqrt(std::max(0.0, lambda[k].real()) / static_cast<double>(m));
      }
      return;
    }
    if (method == SamplerMethod::circulant) {
      throw NumericsError("circulant embedding is not nonnegative definite for this H and grid");
    }
    plan_.reset();
  }

  std::vector<double> cov(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      cov[i * n_ + j] = fgn_autocov(two_h, step_, i > j ? i - j : j - i);
    }
  }
  chol_ = cholesky_with_jitter(std::move(cov), n_);
  used_ = SamplerMethod::cholesky;
}

GridPathSampler::~GridPathSampler() = default;

void GridPathSampler::sample_path(std::uint64_t seed, std::span<double> path) const {
  if (path.size() != n_ + 1) throw std::invalid_argument("GridPathSampler: path size must be increments + 1");
  Engine rng = make_engine(seed);
  std::normal_distribution<double> normal;
  path[0] = 0.0;

  if (used_ == SamplerMethod::circulant) {
    const std::size_t m = sqrt_eigen_.size();
    std::vector<std::complex<double>> a(m), y(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double re = normal(rng);
      const double im = normal(rng);
      a[k] = sqrt_eigen_[k] * std::complex<double>(re, im);
    }
    plan_->execute(a, y);
    double acc = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      acc += y[j].real();
      path[j + 1] = acc;
    }
    return;
  }

  std::vector<double> z(n_);
  for (auto& v : z) v = normal(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double incr = 0.0;
    const double* row = chol_.data() + i * n_;
    for (std::size_t j = 0; j <= i; ++j) incr += row[j] * z[j];
    acc += incr;
    path[i + 1] = acc;
  }
}

std::vector<double> cholesky_with_jitter(std::vector<double> matrix, std::size_t n) {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<RowMat> a(matrix.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::LLT<RowMat> llt(a);
  if (llt.info() != Eigen::Success) {
    const double jitter = 1e-12 * a.diagonal().cwiseAbs().maxCoeff();
    RowMat b = a;
    b.diagonal().array() += jitter;
    llt.compute(b);
    if (llt.info() != Eigen::Success) {
      throw NumericsError("Cholesky failed: covariance matrix is not positive definite even after jitter");
    }
  }
  RowMat l = llt.matrixL();
  return std::vector<double>(l.data(), l.data() + l.size());
}

std::vector<double> sample_grid_path(HurstParameter h, const TimeGrid& grid, std::uint64_t seed,
                                     SamplerMethod method) {
  GridPathSampler sampler(h, grid.count() - 1, grid.step(), method);
  std::vector<double> path(grid.count());
  sampler.sample_path(seed, path);
  const double w0 = path[grid.origin_index()];
  for (auto& v : path) v -= w0;
  return path;
}

std::vector<double> sample_at_times(HurstParameter h, std::span<const double> times, std::uint64_t seed,
                                    std::size_t cap) {
  const std::size_t k = times.size();
  if (k > cap) throw ExactModeCapExceeded(k, cap);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(times[i] > 0.0)) throw std::invalid_argument("sample_at_times: times must be > 0");
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw std::invalid_argument("sample_at_times: times must be strictly increasing");
    }
  }
  if (k == 0) return {};
  std::vector<double> cov(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double c = covariance(h, times[i], times[j]);
      cov[i * k + j] = c;
      cov[j * k + i] = c;
    }
  }
  const auto l = cholesky_with_jitter(std::move(cov), k);
  Engine rng = make_engine(seed);
  std::normal_distribution<double> normal;
  std::vector<double> z(k);
  for (auto& v : z) v = normal(rng);
  std::vector<double> out(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j <= i; ++j) s += l[i * k + j] * z[j];
    out[i] = s;
  }
  return out;
}

// ---------------------------------------------------------------------------
// HurstField

struct HurstField::Cache {
  mutable std::shared_mutex mutex;
  std::map<Site, std::shared_ptr<const Path>> paths;
  bool frozen = false;
};

HurstField::HurstField(HurstParameter h, TimeGrid grid, std::uint64_t master_seed)
    : HurstField(h, grid, master_seed, nullptr, false) {
  sampler_ = std::make_shared<const GridPathSampler>(h, grid_.count() - 1, grid_.step());
}

HurstField::HurstField(HurstParameter h, TimeGrid grid, std::uint64_t seed, PathGenerator gen, bool zero)
    : hurst_(h),
      grid_(grid),
      master_seed_(seed),
      generator_(std::move(gen)),
      zero_(zero),
      cache_(std::make_unique<Cache>()) {}

HurstField HurstField::zero(TimeGrid grid) {
  return HurstField(HurstParameter(0.5), grid, 0, nullptr, true);
}

HurstField HurstField::with_generator(HurstParameter h, TimeGrid grid, PathGenerator generator) {
  if (!generator) throw std::invalid_argument("HurstField: empty path generator");
  return HurstField(h, grid, 0, std::move(generator), false);
}

HurstField::HurstField(HurstField&&) noexcept = default;
HurstField& HurstField::operator=(HurstField&&) noexcept = default;
HurstField::~HurstField() = default;

std::uint64_t HurstField::site_seed(const Site& x) const noexcept { return mix64(master_seed_, site_hash(x)); }

HurstField::Path HurstField::generate(const Site& x) const {
  if (zero_) return Path(grid_.count(), 0.0);
  if (generator_) {
    Path p = generator_(x);
    if (p.size() != grid_.count()) throw std::invalid_argument("HurstField: generator returned a path of wrong length");
    return p;
  }
  Path p(grid_.count());
  sampler_->sample_path(site_seed(x), p);
  const double w0 = p[grid_.origin_index()];
  for (auto& v : p) v -= w0;
  return p;
}

std::shared_ptr<const HurstField::Path> HurstField::path(const Site& x) const {
  {
    std::shared_lock lock(cache_->mutex);
    auto it = cache_->paths.find(x);
    if (it != cache_->paths.end()) return it->second;
    if (cache_->frozen) return std::make_shared<const Path>(generate(x));
  }
  auto fresh = std::make_shared<const Path>(generate(x));
  std::unique_lock lock(cache_->mutex);
  if (cache_->frozen) return fresh;
  auto [it, inserted] = cache_->paths.emplace(x, std::move(fresh));
  return it->second;
}

void HurstField::ensure(std::span<const Site> sites) {
  for (const auto& s : sites) (void)path(s);
}

void HurstField::freeze() noexcept {
  std::unique_lock lock(cache_->mutex);
  cache_->frozen = true;
}

bool HurstField::frozen() const noexcept {
  std::shared_lock lock(cache_->mutex);
  return cache_->frozen;
}

std::vector<Site> HurstField::cached_sites() const {
  std::shared_lock lock(cache_->mutex);
  std::vector<Site> out;
  out.reserve(cache_->paths.size());
  for (const auto& [s, p] : cache_->paths) out.push_back(s);
  return out;
}

// ---------------------------------------------------------------------------
// EpsilonDerivative

namespace {
struct DerivativeTable {
  std::vector<double> values;  // derivative at stored indices offset .. count-1-offset
  std::vector<double> prefix;  // integral of the interpolant from the first node
};
}  // namespace

struct EpsilonDerivative::Cache {
  mutable std::shared_mutex mutex;
  std::map<Site, std::shared_ptr<const DerivativeTable>> tables;
};

EpsilonDerivative::EpsilonDerivative(const HurstField& field, double epsilon)
    : field_(&field), epsilon_(epsilon), cache_(std::make_unique<Cache>()) {
  const auto& g = field.grid();
  if (!(epsilon > 0.0)) throw std::invalid_argument("EpsilonDerivative: epsilon must be > 0");
  const double r = epsilon / g.step();
  const double k = std::round(r);
  if (std::abs(r - k) > 1e-9 * std::max(1.0, k) || k < 1.0) {
    throw std::invalid_argument("EpsilonDerivative: epsilon must be a positive integer multiple of the grid step");
  }
  offset_ = static_cast<std::size_t>(k);
  if (offset_ > g.pad_steps()) throw std::invalid_argument("EpsilonDerivative: epsilon exceeds the grid pad");
}

EpsilonDerivative::~EpsilonDerivative() = default;
EpsilonDerivative::EpsilonDerivative(EpsilonDerivative&&) noexcept = default;

double EpsilonDerivative::at_index(const Site& x, std::size_t k) const {
  const auto& g = field_->grid();
  if (k < offset_ || k + offset_ >= g.count()) throw std::out_of_range("epsilon-derivative index outside padded grid");
  const auto p = field_->path(x);
  return ((*p)[k + offset_] - (*p)[k - offset_]) / (2.0 * epsilon_);
}

double EpsilonDerivative::at(double t, const Site& x) const {
  const auto& g = field_->grid();
  if (!g.on_grid(t)) throw std::out_of_range("epsilon-derivative time is not a grid point");
  return at_index(x, g.nearest_index(t));
}

double EpsilonDerivative::integral(const Site& x, double a, double b) const {
  if (b < a) return -integral(x, b, a);
  const auto& g = field_->grid();
  std::shared_ptr<const DerivativeTable> table;
  {
    std::shared_lock lock(cache_->mutex);
    auto it = cache_->tables.find(x);
    if (it != cache_->tables.end()) table = it->second;
  }
  if (!table) {
    auto t = std::make_shared<DerivativeTable>();
    const auto p = field_->path(x);
    const std::size_t first = offset_;
    const std::size_t last = g.count() - 1 - offset_;
    t->values.resize(last - first + 1);
    for (std::size_t k = first; k <= last; ++k) {
      t->values[k - first] = ((*p)[k + offset_] - (*p)[k - offset_]) / (2.0 * epsilon_);
    }
    t->prefix.resize(t->values.size());
    t->prefix[0] = 0.0;
    for (std::size_t j = 1; j < t->values.size(); ++j) {
      t->prefix[j] = t->prefix[j - 1] + 0.5 * g.step() * (t->values[j - 1] + t->values[j]);
    }
    std::unique_lock lock(cache_->mutex);
    auto [it, inserted] = cache_->tables.emplace(x, std::move(t));
    table = it->second;
  }
  return primitive(table->prefix, table->values, b) - primitive(table->prefix, table->values, a);
}

double EpsilonDerivative::primitive(const std::vector<double>& pre, const std::vector<double>& vals, double t) const {
  const auto& g = field_->grid();
  const double u = g.index_coordinate(t) - static_cast<double>(offset_);
  const double last = static_cast<double>(vals.size() - 1);
  if (u < -1e-9 || u > last + 1e-9) throw std::out_of_range("epsilon-derivative integral leaves the padded grid");
  const double uc = std::clamp(u, 0.0, last);
  std::size_t j = static_cast<std::size_t>(std::floor(uc));
  if (j >= vals.size() - 1) j = vals.size() - 2;
  const double f = uc - static_cast<double>(j);
  const double v0 = vals[j];
  const double v1 = vals[j + 1];
  return pre[j] + g.step() * (v0 * f + 0.5 * (v1 - v0) * f * f);
}

void write_paths_csv(std::ostream& os, const HurstField& field, std::span<const Site> sites) {
  const auto& g = field.grid();
  const int dim = sites.empty() ? 0 : sites.front().dim();
  for (int i = 0; i < dim; ++i) os << 'x' << i << ',';
  os << "t,w\n";
  os << std::setprecision(17);
  for (const auto& s : sites) {
    const auto p = field.path(s);
    for (std::size_t k = g.origin_index(); k < g.origin_index() + g.horizon_count(); ++k) {
      for (auto c : s.coords) os << c << ',';
      os << g.time_at(k) << ',' << (*p)[k] << '\n';
    }
  }
}

}  // namespace fkpam
