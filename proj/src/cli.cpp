#include "fkpam/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <thread>

#include "CLI11.hpp"
#include "fkpam/errors.hpp"
#include "fkpam/experiments.hpp"
#include "fkpam/field.hpp"
#include "fkpam/fk.hpp"
#include "fkpam/kernels.hpp"
#include "fkpam/parallel.hpp"
#include "fkpam/pde.hpp"
#include "fkpam/rng.hpp"
#include "fkpam/validation.hpp"
#include "fkpam/walk.hpp"

namespace fkpam {

namespace {

constexpr std::uint64_t kDefaultValidateSeed = 20240601;

std::uint64_t master_seed(const RunConfig& c) { return c.unsigned_integer("master_seed"); }

std::string provenance(const CommandContext& ctx, std::uint64_t seed) {
  return provenance_line(ctx.config.hash(), seed);
}

std::ofstream open_output(const CommandContext& ctx, const std::string& file, const std::string& header) {
  std::filesystem::create_directories(ctx.out_dir);
  const auto path = std::filesystem::path(ctx.out_dir) / file;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << header << '\n';
  return os;
}

std::ostream& log(const CommandContext& ctx) { return *ctx.log; }

std::size_t positive_count(const RunConfig& c, const std::string& key) {
  const auto v = c.integer(key);
  if (v < 1) throw ConfigError("config key '" + key + "' must be >= 1");
  return static_cast<std::size_t>(v);
}

WalkConfig walk_config(const RunConfig& c) {
  WalkConfig w;
  const auto dim = c.integer("walk.dim");
  if (dim < 1 || dim > 16) throw ConfigError("walk.dim must be in [1, 16]");
  w.dim = static_cast<int>(dim);
  w.kappa = c.number("walk.kappa");
  w.horizon = c.number("walk.horizon");
  w.start = c.site("walk.start", w.dim);
  w.validate();
  return w;
}

InitialCondition initial_condition(const RunConfig& c, int dim) {
  const auto kind = c.string("fk.initial");
  if (kind == "constant") return InitialCondition::constant(c.number("fk.initial_value"));
  if (kind == "indicator") return InitialCondition::indicator(c.site("fk.initial_site", dim));
  throw ConfigError("fk.initial must be 'constant' or 'indicator', got '" + kind + "'");
}

FkMode fk_mode(const RunConfig& c) {
  const auto mode = c.string("fk.mode");
  if (mode == "smooth") return FkMode::smooth(c.number("fk.epsilon"));
  if (mode == "rough") return FkMode::rough();
  throw ConfigError("fk.mode must be 'smooth' or 'rough', got '" + mode + "'");
}

}  // namespace

CommandContext make_context(const RunConfig& cfg, std::ostream& log_stream) {
  CommandContext ctx{cfg, cfg.string("out"), 1, &log_stream};
  const auto w = cfg.integer("workers");
  if (w < 0) throw ConfigError("workers must be >= 0");
  ctx.workers = w == 0 ? default_workers() : static_cast<unsigned>(w);
  return ctx;
}

int cmd_generate(const CommandContext& ctx) {
  const auto& c = ctx.config;
  const HurstParameter h(c.number("field.hurst"));
  const TimeGrid grid(c.number("field.step"), c.number("field.horizon"), c.number("field.pad"));
  const auto seed = master_seed(c);
  const HurstField field = c.boolean("field.noise") ? HurstField(h, grid, seed) : HurstField::zero(grid);
  const auto sites = c.sites("field.sites");
  if (sites.empty()) throw ConfigError("field.sites must not be empty");
  auto os = open_output(ctx, "paths.csv", provenance(ctx, seed));
  write_paths_csv(os, field, sites);
  log(ctx) << "wrote " << sites.size() << " path(s) with " << grid.horizon_count() << " points to "
           << (std::filesystem::path(ctx.out_dir) / "paths.csv").string() << '\n';
  return kExitOk;
}

int cmd_walk(const CommandContext& ctx) {
  const auto& c = ctx.config;
  const WalkConfig cfg = walk_config(c);
  const auto seed = master_seed(c);
  const auto count = positive_count(c, "walk.count");
  const double delta = c.number("walk.delta");
  if (!(delta > 0.0)) throw ConfigError("walk.delta must be > 0");
  auto walks = open_output(ctx, "walks.csv", provenance(ctx, seed));
  auto stats = open_output(ctx, "walk_stats.csv", provenance(ctx, seed));
  walks << std::setprecision(17) << "walk,jump_index,time";
  for (int i = 0; i < cfg.dim; ++i) walks << ",x" << i;
  walks << '\n';
  stats << std::setprecision(17) << "walk,jumps,delta,R,L,K\n";
  for (std::size_t k = 0; k < count; ++k) {
    const WalkPath p = walk_for_index(cfg, seed, k, nullptr);
    for (std::size_t i = 0; i < p.sites.size(); ++i) {
      walks << k << ',' << i << ',' << (i == 0 ? 0.0 : p.jump_times[i - 1]);
      for (auto x : p.sites[i].coords) walks << ',' << x;
      walks << '\n';
    }
    const auto st = rough_stats(p, delta);
    stats << k << ',' << p.jump_count() << ',' << delta << ',' << st.r_count << ',' << st.rough_length << ','
          << st.rough_periods << '\n';
  }
  log(ctx) << "wrote " << count << " walk(s) to " << ctx.out_dir << '\n';
  return kExitOk;
}

int cmd_kernels(const CommandContext& ctx) {
  const auto& c = ctx.config;
  const auto hursts = c.numbers("kernels.hursts");
  for (double h : hursts) (void)HurstParameter(h);
  const auto rows = kernel_sweep(hursts, c.numbers("kernels.epsilons"), c.numbers("kernels.lengths"));
  auto os = open_output(ctx, "kernels.csv", provenance(ctx, c.has("master_seed") ? master_seed(c) : 0));
  write_kernel_csv(os, rows);
  std::size_t outside = 0;
  for (const auto& r : rows) outside += r.eval.within_bound() ? 0 : 1;
  log(ctx) << "wrote " << rows.size() << " kernel rows, " << outside << " outside their bound\n";
  return kExitOk;
}

int cmd_solve(const CommandContext& ctx) {
  const auto& c = ctx.config;
  const HurstParameter h(c.number("field.hurst"));
  const WalkConfig cfg = walk_config(c);
  const auto seed = master_seed(c);
  const bool run_fk = c.boolean("fk.enabled");
  const bool run_pde = c.boolean("pde.enabled");
  if (!run_fk && !run_pde) throw ConfigError("solve needs fk.enabled or pde.enabled");
  const InitialCondition ic = initial_condition(c, cfg.dim);
  const FkMode mode = fk_mode(c);
  const double eps = mode.kind == FkMode::Kind::smooth || run_pde ? c.number("fk.epsilon") : 0.0;
  const double step = c.number("field.step");
  const TimeGrid grid = grid_for(cfg.horizon, step, eps > 0.0 ? eps : step);
  const bool noise = c.boolean("field.noise");
  HurstField field = noise ? HurstField(h, grid, seed) : HurstField::zero(grid);
  const std::string header = provenance(ctx, seed);
  int code = kExitOk;

  if (run_pde) {
    const BoxDomain box = BoxDomain::for_walk(cfg);
    field.ensure(box.sites());
  }
  field.freeze();

  if (run_fk) {
    EstimateResult est;
    const auto estimator = c.string("fk.estimator");
    if (estimator == "quenched") {
      est = estimate_quenched(cfg, ic, field, mode, positive_count(c, "fk.samples"), mix64(seed, 1), ctx.workers);
    } else if (estimator == "annealed") {
      if (!noise) throw ConfigError("the annealed estimator needs field.noise = true");
      AnnealedConfig ac;
      ac.outer = positive_count(c, "fk.outer");
      ac.inner = positive_count(c, "fk.inner");
      ac.step = step;
      est = estimate_annealed_moment(cfg, ic, h, c.number("fk.moment"), mode, ac, seed, ctx.workers);
    } else {
      throw ConfigError("fk.estimator must be 'quenched' or 'annealed', got '" + estimator + "'");
    }
    auto os = open_output(ctx, "estimate.csv", header);
    write_estimate_csv(os, est);
    log(ctx) << estimator << ' ' << mode.name() << " estimate " << std::setprecision(10) << est.mean << " +- "
             << est.std_error << " (" << est.count << " samples)\n";
    if (est.clamps > 0) {
      log(ctx) << "warning: " << est.clamps << " exponent(s) clamped to +-" << kExponentClamp << '\n';
      code = kExitFail;
    }
  }

  if (run_pde) {
    const BoxDomain box = BoxDomain::for_walk(cfg);
    const double dt_cfg = c.number("pde.dt");
    const SolverConfig sc{dt_cfg > 0.0 ? dt_cfg : std::min(step, 0.25 / cfg.kappa), cfg.kappa, eps};
    const auto u = solve_mollified(ic, field, sc, box, cfg.horizon);
    auto os = open_output(ctx, "solution.csv", header);
    write_solution_csv(os, u, cfg.horizon);
    log(ctx) << "pde u(" << cfg.horizon << ", " << cfg.start << ") = " << std::setprecision(10) << u.at(cfg.start)
             << " on a box of radius " << box.radius() << '\n';
  }
  return code;
}

int cmd_experiment(const CommandContext& ctx) {
  const auto& c = ctx.config;
  SweepSpec spec;
  spec.name = c.string("experiment.name");
  spec.kind = c.string("experiment.kind");
  spec.hursts = c.numbers("experiment.hursts");
  spec.epsilons = c.numbers("experiment.epsilons");
  spec.kappa = c.number("experiment.kappa");
  const auto dim = c.integer("experiment.dim");
  if (dim < 1 || dim > 16) throw ConfigError("experiment.dim must be in [1, 16]");
  spec.dim = static_cast<int>(dim);
  spec.horizon = c.number("experiment.horizon");
  spec.n_samples = positive_count(c, "experiment.samples");
  spec.master_seed = master_seed(c);
  spec.workers = ctx.workers;
  spec.noise = c.boolean("experiment.noise");
  spec.jumps.clear();
  for (auto j : c.integers("experiment.jumps")) {
    if (j < 0) throw ConfigError("experiment.jumps must be >= 0");
    spec.jumps.push_back(static_cast<std::size_t>(j));
  }
  spec.deltas = c.numbers("experiment.deltas");
  spec.realizations = positive_count(c, "experiment.realizations");
  spec.inner = positive_count(c, "experiment.inner");
  spec.step = c.number("experiment.step");
  spec.lengths = c.numbers("experiment.lengths");

  auto initial = c.string("experiment.initial");
  if (initial.empty()) initial = spec.kind == "fk_pde_crosscheck" ? "indicator" : "constant";
  if (initial != "constant" && initial != "indicator") {
    throw ConfigError("experiment.initial must be 'constant' or 'indicator', got '" + initial + "'");
  }
  const InitialCondition ic = initial == "constant" ? InitialCondition::constant(1.0)
                                                    : InitialCondition::indicator(Site::origin(spec.dim));

  const auto out = run_experiment(spec, ic);
  write_experiment(ctx.out_dir, spec.name, out, provenance(ctx, spec.master_seed));
  log(ctx) << out.verdict;
  return out.pass ? kExitOk : kExitFail;
}

int cmd_validate(const CommandContext& ctx) {
  const auto& c = ctx.config;
  ValidationOptions opts;
  opts.scale = parse_scale(c.string("validate.scale"));
  opts.master_seed = c.has("master_seed") ? master_seed(c) : kDefaultValidateSeed;
  opts.workers = ctx.workers;
  for (auto id : c.integers("validate.criteria")) {
    if (id < 1 || id > kCriterionCount) throw ConfigError("validate.criteria entries must be in [1, 11]");
    opts.only.push_back(static_cast<int>(id));
  }
  const std::string header = provenance(ctx, opts.master_seed);
  std::ostringstream summary;
  bool all = true;
  run_validation(opts, [&](const CriterionResult& r) {
    std::ostringstream name;
    name << "criterion_" << std::setw(2) << std::setfill('0') << r.id << ".csv";
    auto os = open_output(ctx, name.str(), header);
    os << r.csv;
    const std::string line =
        "criterion " + std::to_string(r.id) + " (" + r.name + "): " + (r.pass ? "PASS" : "FAIL") + '\n';
    log(ctx) << line << std::flush;
    summary << line << r.detail;
    all = all && r.pass;
  });
  auto os = open_output(ctx, "validation.txt", header);
  os << summary.str();
  return all ? kExitOk : kExitFail;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Feynman-Kac and lattice PDE tools for the parabolic Anderson model with fractional noise", "fkpam"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> workers;
  } flags;

  using Command = int (*)(const CommandContext&);
  struct Entry {
    const char* name;
    const char* help;
    Command fn;
    bool needs_config;
  };
  const Entry entries[] = {
      {"generate", "Write fBm paths on a grid for the configured sites", cmd_generate, true},
      {"walk", "Write sampled walks and their rough-period statistics", cmd_walk, true},
      {"kernels", "Sweep the S2/S3 kernels against their bounds", cmd_kernels, false},
      {"solve", "Feynman-Kac estimate and/or lattice PDE solution", cmd_solve, true},
      {"experiment", "Run one validation campaign and write its CSV and verdict", cmd_experiment, true},
      {"validate", "Run the numbered acceptance checks", cmd_validate, false},
  };
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    auto* opt = sub->add_option("--config", flags.config, "Flat JSON config file");
    if (e.needs_config) opt->required();
    sub->add_option("--seed", flags.seed, "Override master_seed");
    sub->add_option("--out", flags.out, "Override the output directory");
    sub->add_option("--workers", flags.workers, "Override the worker count (0 = available parallelism)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const Entry* chosen = nullptr;
  for (const auto& e : entries) {
    if (app.got_subcommand(e.name)) chosen = &e;
  }
  try {
    RunConfig cfg = flags.config.empty() ? RunConfig() : RunConfig::load(flags.config);
    if (flags.seed) cfg.set_unsigned("master_seed", *flags.seed);
    if (flags.out) cfg.set_string("out", *flags.out);
    if (flags.workers) cfg.set_unsigned("workers", *flags.workers);
    const CommandContext ctx = make_context(cfg, out);
    out << "fkpam " << version_string() << ' ' << chosen->name << " config_hash=" << cfg.hash()
        << " workers=" << ctx.workers << '\n';
    return chosen->fn(ctx);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace fkpam
