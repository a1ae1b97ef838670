#include "fkpam/fk.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "fkpam/errors.hpp"
#include "fkpam/parallel.hpp"
#include "fkpam/rng.hpp"
#include "fkpam/stats.hpp"

namespace fkpam {

InitialCondition InitialCondition::constant(double c) {
  if (!std::isfinite(c)) throw std::invalid_argument("InitialCondition: constant must be finite");
  InitialCondition ic;
  ic.kind_ = Kind::constant;
  ic.constant_ = c;
  ic.bound_ = std::abs(c);
  return ic;
}

InitialCondition InitialCondition::indicator(Site site) {
  InitialCondition ic;
  ic.kind_ = Kind::indicator;
  ic.site_ = std::move(site);
  ic.bound_ = 1.0;
  return ic;
}

InitialCondition InitialCondition::table(std::map<Site, double> values) {
  InitialCondition ic;
  ic.kind_ = Kind::table;
  ic.bound_ = 0.0;
  for (const auto& [s, v] : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("InitialCondition: table values must be finite");
    ic.bound_ = std::max(ic.bound_, std::abs(v));
  }
  ic.table_ = std::move(values);
  return ic;
}

double InitialCondition::operator()(const Site& y) const {
  switch (kind_) {
    case Kind::constant:
      return constant_;
    case Kind::indicator:
      return y == site_ ? 1.0 : 0.0;
    case Kind::table: {
      auto it = table_.find(y);
      return it == table_.end() ? 0.0 : it->second;
    }
  }
  return 0.0;
}

std::string InitialCondition::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::constant:
      os << "constant(" << constant_ << ')';
      break;
    case Kind::indicator:
      os << "indicator" << site_;
      break;
    case Kind::table:
      os << "table[" << table_.size() << ']';
      break;
  }
  return os.str();
}

double rough_functional(const WalkPath& path, const HurstField& field) {
  if (field.is_zero()) return 0.0;
  const auto& g = field.grid();
  const WalkPath rev = reverse_view(path);
  double total = 0.0;
  for (std::size_t i = 0; i < rev.segment_count(); ++i) {
    const auto w = field.path(rev.sites[i]);
    total += (*w)[g.nearest_index(rev.segment_end(i))] - (*w)[g.nearest_index(rev.segment_begin(i))];
  }
  return total;
}

ExactRough rough_functional_exact(const WalkPath& path, HurstParameter h, std::uint64_t noise_seed,
                                  const HurstField* fallback, std::size_t cap) {
  const WalkPath rev = reverse_view(path);
  std::map<Site, std::vector<double>> times;
  for (std::size_t i = 0; i < rev.segment_count(); ++i) {
    auto& v = times[rev.sites[i]];
    if (rev.segment_begin(i) > 0.0) v.push_back(rev.segment_begin(i));
    v.push_back(rev.segment_end(i));
  }
  std::map<Site, std::vector<double>> values;
  for (auto& [site, v] : times) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (v.size() > cap) {
      if (!fallback) throw ExactModeCapExceeded(v.size(), cap);
      return {rough_functional(path, *fallback), true};
    }
  }
  for (const auto& [site, v] : times) values[site] = sample_at_times(h, v, mix64(noise_seed, site_hash(site)), cap);

  const auto lookup = [&](const Site& x, double t) {
    if (t == 0.0) return 0.0;
    const auto& tv = times.at(x);
    const auto pos = static_cast<std::size_t>(std::lower_bound(tv.begin(), tv.end(), t) - tv.begin());
    return values.at(x)[pos];
  };
  ExactRough out;
  for (std::size_t i = 0; i < rev.segment_count(); ++i) {
    out.value += lookup(rev.sites[i], rev.segment_end(i)) - lookup(rev.sites[i], rev.segment_begin(i));
  }
  return out;
}

double rough_variance(const WalkPath& path, HurstParameter h) {
  double total = 0.0;
  for (std::size_t i = 0; i < path.segment_count(); ++i) {
    for (std::size_t j = 0; j < path.segment_count(); ++j) {
      if (!(path.sites[i] == path.sites[j])) continue;
      total += increment_covariance(h, path.segment_end(i), path.segment_begin(i), path.segment_end(j),
                                    path.segment_begin(j));
    }
  }
  return total;
}

double smooth_functional(const WalkPath& path, const EpsilonDerivative& ed) {
  const auto& g = ed.field().grid();
  if (ed.offset_steps() < 4) {
    throw std::invalid_argument("smooth_functional: grid too coarse, need epsilon >= 4 grid steps (refine the step)");
  }
  if (ed.field().is_zero()) return 0.0;
  if (path.horizon > g.horizon() * (1.0 + 1e-12)) {
    throw std::out_of_range("smooth_functional: path horizon exceeds the field grid");
  }
  const WalkPath rev = reverse_view(path);
  double total = 0.0;
  for (std::size_t i = 0; i < rev.segment_count(); ++i) {
    total += ed.integral(rev.sites[i], rev.segment_begin(i), rev.segment_end(i));
  }
  return total;
}

std::optional<WalkPath> snap_to_grid(const WalkPath& path, const TimeGrid& grid) {
  WalkPath out = path;
  const std::size_t origin = grid.origin_index();
  const std::size_t end = origin + grid.horizon_steps();
  std::size_t prev = origin;
  for (auto& t : out.jump_times) {
    const std::size_t k = grid.nearest_index(t);
    if (k <= prev || k >= end) return std::nullopt;
    t = grid.time_at(k);
    prev = k;
  }
  return out;
}

WalkPath walk_for_index(const WalkConfig& cfg, std::uint64_t seed, std::size_t index, const TimeGrid* snap) {
  const std::uint64_t base = seed + index;
  WalkPath w = sample_walk(cfg, base);
  if (!snap) return w;
  for (std::uint64_t attempt = 1;; ++attempt) {
    if (auto s = snap_to_grid(w, *snap)) return *s;
    if (attempt > 1000) throw NumericsError("walk_for_index: grid too coarse to snap jump times without collisions");
    w = sample_walk(cfg, mix64(base, attempt));
  }
}

double fk_weight(double u0, double exponent, bool& clamped) {
  if (!std::isfinite(exponent)) throw NumericsError("Feynman-Kac exponent is not finite");
  double e = exponent;
  if (std::abs(e) > kExponentClamp) {
    clamped = true;
    e = std::copysign(kExponentClamp, e);
  }
  return u0 == 0.0 ? 0.0 : u0 * std::exp(e);
}

namespace {

RunSnapshot snapshot_of(const WalkConfig& cfg, HurstParameter h, FkMode mode, std::uint64_t seed) {
  RunSnapshot s;
  s.mode = mode.name();
  s.hurst = h.value();
  s.kappa = cfg.kappa;
  s.dim = cfg.dim;
  s.t = cfg.horizon;
  s.x = cfg.start;
  if (mode.kind == FkMode::Kind::smooth) s.epsilon = mode.epsilon;
  s.seed = seed;
  return s;
}

// Quenched mean over walks [0, n) against one field; per-index slots, fixed-order reduction.
struct QuenchedSums {
  std::vector<double> weights;
  std::size_t clamps = 0;
};

QuenchedSums quenched_weights(const WalkConfig& cfg, const InitialCondition& ic, const HurstField& field,
                              const EpsilonDerivative* ed, std::size_t n, std::uint64_t seed, unsigned workers) {
  QuenchedSums out;
  out.weights.assign(n, 0.0);
  std::vector<char> clamped(n, 0);
  parallel_for(n, workers, [&](std::size_t i) {
    const WalkPath w = walk_for_index(cfg, seed, i, nullptr);
    const double u0 = ic(w.terminal());
    if (u0 == 0.0) return;
    const double e = ed ? smooth_functional(w, *ed) : rough_functional(w, field);
    bool c = false;
    out.weights[i] = fk_weight(u0, e, c);
    clamped[i] = c;
  });
  for (char c : clamped) out.clamps += c ? 1 : 0;
  return out;
}

}  // namespace

EstimateResult estimate_quenched(const WalkConfig& cfg, const InitialCondition& ic, const HurstField& field,
                                 FkMode mode, std::size_t n_walks, std::uint64_t seed, unsigned workers) {
  cfg.validate();
  if (n_walks < 1) throw std::invalid_argument("estimate_quenched: n_walks must be >= 1");
  if (cfg.horizon > field.grid().horizon() * (1.0 + 1e-12)) {
    throw std::invalid_argument("estimate_quenched: walk horizon exceeds the field grid horizon");
  }
  std::optional<EpsilonDerivative> ed;
  if (mode.kind == FkMode::Kind::smooth) ed.emplace(field, mode.epsilon);
  const auto sums = quenched_weights(cfg, ic, field, ed ? &*ed : nullptr, n_walks, seed, workers);
  const auto ms = mean_stderr(sums.weights);
  EstimateResult r;
  r.mean = ms.mean;
  r.std_error = ms.std_error;
  r.count = ms.count;
  r.kind = EstimateResult::Kind::quenched;
  r.clamps = sums.clamps;
  r.snapshot = snapshot_of(cfg, field.hurst(), mode, seed);
  return r;
}

FkSample paired_sample(const WalkConfig& cfg, const InitialCondition& ic, const HurstField& field,
                       const EpsilonDerivative* ed, std::uint64_t seed, std::size_t index) {
  FkSample s;
  s.walk_seed = seed + index;
  const WalkPath w = walk_for_index(cfg, seed, index, &field.grid());
  s.terminal_site = w.terminal();
  const double u0 = ic(s.terminal_site);
  s.rough_exponent = rough_functional(w, field);
  s.weight = fk_weight(u0, s.rough_exponent, s.clamped);
  if (ed) {
    s.smooth_exponent = smooth_functional(w, *ed);
    s.smooth_weight = fk_weight(u0, *s.smooth_exponent, s.clamped);
  }
  return s;
}

TimeGrid grid_for(double horizon, double step, double epsilon) {
  const double pad_steps = std::max(1.0, std::ceil(epsilon / step - 1e-9));
  return TimeGrid(step, horizon, pad_steps * step);
}

EstimateResult estimate_annealed_moment(const WalkConfig& cfg, const InitialCondition& ic, HurstParameter h,
                                        double p, FkMode mode, const AnnealedConfig& ac, std::uint64_t seed,
                                        unsigned workers) {
  cfg.validate();
  if (!(p >= 1.0)) throw std::invalid_argument("estimate_annealed_moment: p must be >= 1");
  if (ac.outer < 1 || ac.inner < 1) throw std::invalid_argument("estimate_annealed_moment: sizes must be >= 1");
  const bool smooth = mode.kind == FkMode::Kind::smooth;
  double step = ac.step;
  if (step <= 0.0) step = smooth ? mode.epsilon / 8.0 : cfg.horizon / 256.0;
  const TimeGrid grid = grid_for(cfg.horizon, step, smooth ? mode.epsilon : step);

  std::vector<double> moments(ac.outer, 0.0);
  std::vector<std::size_t> clamps(ac.outer, 0);
  parallel_for(ac.outer, workers, [&](std::size_t o) {
    HurstField field(h, grid, mix64(seed, o));
    std::optional<EpsilonDerivative> ed;
    if (smooth) ed.emplace(field, mode.epsilon);
    const auto sums = quenched_weights(cfg, ic, field, ed ? &*ed : nullptr, ac.inner, mix64(~seed, o), 1);
    const double u = pairwise_sum(sums.weights) / static_cast<double>(ac.inner);
    moments[o] = std::pow(std::abs(u), p);
    clamps[o] = sums.clamps;
  });
  const auto ms = mean_stderr(moments);
  EstimateResult r;
  r.mean = ms.mean;
  r.std_error = ms.std_error;
  r.count = ms.count;
  r.kind = EstimateResult::Kind::annealed;
  for (auto c : clamps) r.clamps += c;
  r.snapshot = snapshot_of(cfg, h, mode, seed);
  return r;
}

void write_estimate_csv(std::ostream& os, const EstimateResult& r, bool header) {
  const auto& s = r.snapshot;
  if (header) {
    os << "mode,H,kappa,d,t";
    for (int i = 0; i < s.dim; ++i) os << ",x" << i;
    os << ",eps,n,mean,stderr,seed,clamps\n";
  }
  os << std::setprecision(17);
  os << (r.kind == EstimateResult::Kind::quenched ? "quenched_" : "annealed_") << s.mode << ',' << s.hurst << ','
     << s.kappa << ',' << s.dim << ',' << s.t;
  for (auto c : s.x.coords) os << ',' << c;
  os << ',';
  if (s.epsilon) {
    os << *s.epsilon;
  } else {
    os << "NA";
  }
  os << ',' << r.count << ',' << r.mean << ',' << r.std_error << ',' << s.seed << ',' << r.clamps << '\n';
}

}  // namespace fkpam
