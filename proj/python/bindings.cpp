#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fkpam/errors.hpp"
#include "fkpam/experiments.hpp"
#include "fkpam/field.hpp"
#include "fkpam/fk.hpp"
#include "fkpam/kernels.hpp"
#include "fkpam/pde.hpp"
#include "fkpam/rng.hpp"
#include "fkpam/validation.hpp"
#include "fkpam/walk.hpp"

namespace py = pybind11;
using namespace fkpam;

namespace {

Site as_site(const std::vector<std::int32_t>& c) { return c.empty() ? Site{0} : Site(c); }

WalkConfig walk_cfg(double kappa, double horizon, const std::vector<std::int32_t>& start) {
  WalkConfig c;
  c.start = as_site(start);
  c.dim = c.start.dim();
  c.kappa = kappa;
  c.horizon = horizon;
  c.validate();
  return c;
}

InitialCondition initial(const std::string& kind, const Site& at) {
  if (kind == "constant") return InitialCondition::constant(1.0);
  if (kind == "indicator") return InitialCondition::indicator(at);
  throw std::invalid_argument("initial must be 'constant' or 'indicator'");
}

py::dict walk_dict(const WalkPath& p) {
  py::list sites;
  for (const auto& s : p.sites) sites.append(py::cast(s.coords));
  py::dict d;
  d["jump_times"] = p.jump_times;
  d["sites"] = sites;
  d["horizon"] = p.horizon;
  return d;
}

WalkPath walk_from(const std::vector<double>& times, const std::vector<std::vector<std::int32_t>>& sites,
                   double horizon) {
  WalkPath p;
  p.jump_times = times;
  for (const auto& s : sites) p.sites.emplace_back(s);
  p.horizon = horizon;
  p.validate();
  return p;
}

py::dict eval_dict(const KernelEval& e) {
  py::dict d;
  d["value"] = e.value;
  d["target"] = e.target;
  d["bound"] = e.bound;
  d["within_bound"] = e.within_bound();
  return d;
}

py::dict estimate_dict(const EstimateResult& r) {
  py::dict d;
  d["mean"] = r.mean;
  d["stderr"] = r.std_error;
  d["count"] = r.count;
  d["clamps"] = r.clamps;
  return d;
}

}  // namespace

PYBIND11_MODULE(_fkpam, m) {
  m.doc() = "Fractional noise, random walks and Feynman-Kac estimators for the parabolic Anderson model";
  m.attr("__version__") = version_string();

  py::register_exception<ExactModeCapExceeded>(m, "ExactModeCapExceeded", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("covariance", [](double h, double t, double s) { return covariance(HurstParameter(h), t, s); },
        py::arg("h"), py::arg("t"), py::arg("s"));
  m.def("increment_covariance",
        [](double h, double a, double b, double c, double d) {
          return increment_covariance(HurstParameter(h), a, b, c, d);
        },
        py::arg("h"), py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"));
  m.def("sample_at_times",
        [](double h, const std::vector<double>& times, std::uint64_t seed) {
          return sample_at_times(HurstParameter(h), times, seed);
        },
        py::arg("h"), py::arg("times"), py::arg("seed"));
  m.def("sample_grid_path",
        [](double h, double step, double horizon, double pad, std::uint64_t seed) {
          const TimeGrid g(step, horizon, pad);
          std::vector<double> t(g.count());
          for (std::size_t k = 0; k < t.size(); ++k) t[k] = g.time_at(k);
          return std::make_pair(t, sample_grid_path(HurstParameter(h), g, seed));
        },
        py::arg("h"), py::arg("step"), py::arg("horizon"), py::arg("pad") = 0.0, py::arg("seed") = 0,
        "Returns (times, values) with W(0) = 0.");

  m.def("sample_walk",
        [](double kappa, double horizon, const std::vector<std::int32_t>& start, std::uint64_t seed) {
          return walk_dict(sample_walk(walk_cfg(kappa, horizon, start), seed));
        },
        py::arg("kappa") = 1.0, py::arg("horizon") = 1.0, py::arg("start") = std::vector<std::int32_t>{},
        py::arg("seed") = 0);
  m.def("rough_stats",
        [](const std::vector<double>& jump_times, double delta) {
          const auto s = rough_stats(jump_times, delta);
          py::dict d;
          d["R"] = s.r_count;
          d["L"] = s.rough_length;
          d["K"] = s.rough_periods;
          return d;
        },
        py::arg("jump_times"), py::arg("delta"));

  m.def("eps_autocov",
        [](double h, double a, double b, double eps) { return eps_autocov(HurstParameter(h), a, b, eps); });
  m.def("s2",
        [](double h, double length, double eps, double T) {
          return eval_dict(s2({HurstParameter(h), 0.0, length, eps, T}));
        },
        py::arg("h"), py::arg("length"), py::arg("eps"), py::arg("T") = 1.0);
  m.def("s3",
        [](double h, double length, double eps, double T) {
          return eval_dict(s3({HurstParameter(h), 0.0, length, eps, T}));
        },
        py::arg("h"), py::arg("length"), py::arg("eps"), py::arg("T") = 1.0);
  m.def("difference_variance",
        [](const std::vector<double>& times, const std::vector<std::vector<std::int32_t>>& sites, double horizon,
           double h, double eps) {
          return difference_variance(walk_from(times, sites, horizon), HurstParameter(h), eps);
        },
        py::arg("jump_times"), py::arg("sites"), py::arg("horizon"), py::arg("h"), py::arg("eps"));
  m.def("f_eps", [](double g, double h, double eps) { return f_eps(g, HurstParameter(h), eps); });
  m.def("h_eps", [](double r, double h, double eps) { return h_eps(r, HurstParameter(h), eps); });
  m.def("rho", [](double r, double h, double eps) { return rho(r, HurstParameter(h), eps); });

  m.def("estimate_quenched",
        [](double h, double step, double eps, std::size_t samples, std::uint64_t seed, const std::string& mode,
           const std::string& init, double kappa, double horizon, bool noise, unsigned workers) {
          const WalkConfig c = walk_cfg(kappa, horizon, {});
          const TimeGrid g = grid_for(horizon, step, eps);
          HurstField f = noise ? HurstField(HurstParameter(h), g, seed) : HurstField::zero(g);
          f.freeze();
          const FkMode fm = mode == "rough" ? FkMode::rough() : FkMode::smooth(eps);
          py::gil_scoped_release release;
          return estimate_quenched(c, initial(init, c.start), f, fm, samples, mix64(seed, 1), workers);
        },
        py::arg("h"), py::arg("step"), py::arg("eps"), py::arg("samples"), py::arg("seed"),
        py::arg("mode") = "smooth", py::arg("initial") = "constant", py::arg("kappa") = 1.0,
        py::arg("horizon") = 1.0, py::arg("noise") = true, py::arg("workers") = 1);

  py::class_<EstimateResult>(m, "EstimateResult")
      .def_readonly("mean", &EstimateResult::mean)
      .def_readonly("stderr", &EstimateResult::std_error)
      .def_readonly("count", &EstimateResult::count)
      .def_readonly("clamps", &EstimateResult::clamps)
      .def("as_dict", [](const EstimateResult& r) { return estimate_dict(r); });

  m.def("solve_mollified",
        [](double h, double step, double eps, std::uint64_t seed, const std::string& init, double kappa,
           double horizon, bool noise) {
          const WalkConfig c = walk_cfg(kappa, horizon, {});
          const TimeGrid g = grid_for(horizon, step, eps);
          HurstField f = noise ? HurstField(HurstParameter(h), g, seed) : HurstField::zero(g);
          const BoxDomain box = BoxDomain::for_walk(c);
          f.ensure(box.sites());
          f.freeze();
          const SolverConfig sc{std::min(step, 0.25 / kappa), kappa, eps};
          const auto u = solve_mollified(initial(init, c.start), f, sc, box, horizon);
          std::vector<int> xs;
          for (const auto& s : box.sites()) xs.push_back(s.coords[0]);
          return std::make_pair(xs, u.values);
        },
        py::arg("h"), py::arg("step"), py::arg("eps"), py::arg("seed"), py::arg("initial") = "constant",
        py::arg("kappa") = 1.0, py::arg("horizon") = 1.0, py::arg("noise") = true,
        "Solves on d = 1 with the same field seed as estimate_quenched; returns (sites, values).");

  m.def("rate_sweep",
        [](std::vector<double> hursts, std::uint64_t seed) {
          SweepSpec s;
          s.name = "rate_sweep";
          s.hursts = std::move(hursts);
          s.master_seed = seed;
          const auto r = run_rate_sweep(s);
          py::list out;
          for (const auto& e : r.entries) {
            py::dict d;
            d["H"] = e.hurst;
            d["jumps"] = e.jumps;
            d["slope"] = e.fit.slope;
            d["r_squared"] = e.fit.r_squared;
            d["pass"] = e.pass;
            out.append(d);
          }
          return py::make_tuple(r.pass, out);
        },
        py::arg("hursts") = std::vector<double>{0.25, 0.5, 0.75}, py::arg("seed") = 20240601);

  m.def("run_criterion",
        [](int id, const std::string& scale, std::uint64_t seed, unsigned workers) {
          ValidationOptions o;
          o.scale = parse_scale(scale);
          o.master_seed = seed;
          o.workers = workers;
          CriterionResult r;
          {
            py::gil_scoped_release release;
            r = run_criterion(id, o);
          }
          py::dict d;
          d["id"] = r.id;
          d["name"] = r.name;
          d["pass"] = r.pass;
          d["detail"] = r.detail;
          d["csv"] = r.csv;
          return d;
        },
        py::arg("id"), py::arg("scale") = "quick", py::arg("seed") = 20240601, py::arg("workers") = 1);
}
