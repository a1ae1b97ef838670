#include "fkpam/walk.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <stdexcept>

namespace fkpam {

namespace {

// Rounds t to a multiple of the spacing of doubles at `horizon`. Every such
// multiple in [0, horizon] is representable and horizon - t is exact.
double quantize(double t, double horizon) {
  const double q = std::nextafter(horizon, std::numeric_limits<double>::infinity()) - horizon;
  return std::round(t / q) * q;
}

Site random_neighbour(const Site& x, Engine& rng) {
  std::uniform_int_distribution<int> pick(0, 2 * x.dim() - 1);
  const int k = pick(rng);
  return x.shifted(k / 2, (k % 2) ? 1 : -1);
}

bool strictly_inside(const std::vector<double>& times, double horizon) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0) || !(times[i] < horizon)) return false;
    if (i > 0 && !(times[i] > times[i - 1])) return false;
  }
  return true;
}

WalkPath build_path(const WalkConfig& cfg, std::vector<double> times, Engine& rng) {
  WalkPath p;
  p.horizon = cfg.horizon;
  p.sites.reserve(times.size() + 1);
  p.sites.push_back(cfg.start);
  for (std::size_t i = 0; i < times.size(); ++i) p.sites.push_back(random_neighbour(p.sites.back(), rng));
  p.jump_times = std::move(times);
  return p;
}

}  // namespace

void WalkConfig::validate() const {
  if (dim < 1) throw std::invalid_argument("WalkConfig: dim must be >= 1");
  if (!(kappa > 0.0)) throw std::invalid_argument("WalkConfig: kappa must be > 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("WalkConfig: horizon must be > 0");
  if (start.dim() != dim) throw std::invalid_argument("WalkConfig: start site has wrong dimension");
}

void WalkPath::validate() const {
  if (sites.size() != jump_times.size() + 1) throw std::invalid_argument("WalkPath: need jump_count + 1 sites");
  if (!strictly_inside(jump_times, horizon)) {
    throw std::invalid_argument("WalkPath: jump times must be strictly increasing in (0, horizon)");
  }
  for (std::size_t i = 1; i < sites.size(); ++i) {
    const auto& a = sites[i - 1].coords;
    const auto& b = sites[i].coords;
    if (a.size() != b.size()) throw std::invalid_argument("WalkPath: mixed dimensions");
    int moved = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const auto d = std::abs(a[k] - b[k]);
      if (d > 1) moved += 2;
      moved += d;
    }
    if (moved != 1) throw std::invalid_argument("WalkPath: consecutive sites must be lattice neighbours");
  }
}

std::vector<double> sample_jump_times(double rate, double horizon, Engine& rng) {
  std::exponential_distribution<double> gap(rate);
  std::vector<double> times;
  double t = gap(rng);
  while (t < horizon) {
    times.push_back(t);
    t += gap(rng);
  }
  return times;
}

WalkPath sample_walk(const WalkConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Engine rng = make_engine(seed);
  for (;;) {
    auto times = sample_jump_times(cfg.kappa, cfg.horizon, rng);
    for (auto& t : times) t = quantize(t, cfg.horizon);
    // Quantization can only collide on a probability-zero set; redraw from the same stream if it does.
    if (strictly_inside(times, cfg.horizon)) return build_path(cfg, std::move(times), rng);
  }
}

WalkPath sample_walk_with_jumps(const WalkConfig& cfg, std::size_t jumps, std::uint64_t seed) {
  cfg.validate();
  Engine rng = make_engine(seed);
  std::uniform_real_distribution<double> unif(0.0, cfg.horizon);
  for (;;) {
    std::vector<double> times(jumps);
    for (auto& t : times) t = quantize(unif(rng), cfg.horizon);
    std::sort(times.begin(), times.end());
    if (strictly_inside(times, cfg.horizon)) return build_path(cfg, std::move(times), rng);
  }
}

WalkPath reverse_view(const WalkPath& p) {
  WalkPath r;
  r.horizon = p.horizon;
  r.jump_times.reserve(p.jump_times.size());
  for (auto it = p.jump_times.rbegin(); it != p.jump_times.rend(); ++it) r.jump_times.push_back(p.horizon - *it);
  r.sites.assign(p.sites.rbegin(), p.sites.rend());
  return r;
}

RoughStats rough_stats(std::span<const double> jump_times, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("rough_stats: delta must be > 0");
  RoughStats s;
  s.delta = delta;
  double prev = 0.0;
  for (double t : jump_times) {
    if (t - prev < delta) ++s.r_count;
    prev = t;
  }
  std::size_t i = 0;
  const std::size_t n = jump_times.size();
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && jump_times[j + 1] - jump_times[j] <= delta) ++j;
    if (j > i) {
      ++s.rough_periods;
      s.rough_length += jump_times[j] - jump_times[i];
    }
    i = j + 1;
  }
  return s;
}

void write_walk_csv(std::ostream& os, const WalkPath& p, bool header) {
  const int dim = p.sites.empty() ? 0 : p.sites.front().dim();
  if (header) {
    os << "jump_index,time";
    for (int i = 0; i < dim; ++i) os << ",x" << i;
    os << '\n';
  }
  os << std::setprecision(17);
  for (std::size_t i = 0; i < p.sites.size(); ++i) {
    os << i << ',' << (i == 0 ? 0.0 : p.jump_times[i - 1]);
    for (auto c : p.sites[i].coords) os << ',' << c;
    os << '\n';
  }
}

}  // namespace fkpam
