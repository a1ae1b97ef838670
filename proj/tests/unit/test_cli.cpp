#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fkpam/cli.hpp"
#include "fkpam/config.hpp"
#include "fkpam/errors.hpp"

using namespace fkpam;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

// In-process run of the command line.
Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fkpam");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Same through the built executable.
int cli_exe(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(FKPAM_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Scratch {
 public:
  explicit Scratch(const std::string& name) : dir_(fs::temp_directory_path() / ("fkpam_cli_" + name)) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }
  fs::path config(const std::string& json, const std::string& file = "config.json") const {
    std::ofstream(dir_ / file) << json;
    return dir_ / file;
  }
  fs::path operator/(const std::string& s) const { return dir_ / s; }
  std::string str() const { return dir_.string(); }

 private:
  fs::path dir_;
};

std::size_t data_rows(const std::string& csv) {
  std::istringstream is(csv);
  std::size_t n = 0;
  for (std::string l; std::getline(is, l);) {
    if (!l.empty() && l[0] != '#') ++n;
  }
  return n - 1;  // column header
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = RunConfig::parse(R"({"master_seed": 3, "field.hurst": 0.3, "walk.start": [1, 2], "walk.dim": 2})");
  CHECK(c.integer("master_seed") == 3);
  CHECK(c.number("field.hurst") == 0.3);
  CHECK(c.number("walk.kappa") == 1.0);
  CHECK(c.site("walk.start", 2) == Site{1, 2});
  CHECK(c.site("fk.initial_site", 2) == Site{0, 0});
  CHECK_THROWS_WITH_AS(c.number("field.step"), "missing config key 'field.step'", ConfigError);
  CHECK_THROWS_WITH_AS(RunConfig::parse(R"({"field.hurts": 0.3})"), "unknown config key 'field.hurts'", ConfigError);
  CHECK_THROWS_AS(RunConfig::parse(R"({"field.hurst": "x"})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("[1]"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("{"), ConfigError);
  // The hash ignores where the output goes and how many threads produce it.
  auto d = c;
  d.set_string("out", "elsewhere");
  d.set_unsigned("workers", 7);
  CHECK(d.hash() == c.hash());
  d.set_unsigned("master_seed", 4);
  CHECK(d.hash() != c.hash());
  CHECK(c.hash().size() == 16);
}

TEST_CASE("every config key is documented in the README") {
  const std::string readme = slurp(fs::path(FKPAM_SOURCE_DIR) / "README.md");
  REQUIRE_FALSE(readme.empty());
  for (const auto& e : config_schema()) {
    INFO(e.key);
    CHECK(readme.find("`" + e.key + "`") != std::string::npos);
  }
}

TEST_CASE("generate writes one row per grid point and is seed-deterministic") {
  Scratch s("generate");
  const auto cfg = s.config(R"({"master_seed": 5, "field.hurst": 0.5, "field.step": 0.0625})");
  const auto a = cli({"generate", "--config", cfg.string(), "--out", (s / "a").string()});
  REQUIRE(a.code == 0);
  CHECK(a.out.rfind("fkpam ", 0) == 0);
  const std::string csv = slurp(s / "a" / "paths.csv");
  CHECK(csv.rfind("# fkpam ", 0) == 0);
  CHECK(data_rows(csv) == 17);
  REQUIRE(cli({"generate", "--config", cfg.string(), "--out", (s / "b").string()}).code == 0);
  CHECK(slurp(s / "b" / "paths.csv") == csv);
  REQUIRE(cli({"generate", "--config", cfg.string(), "--seed", "6", "--out", (s / "c").string()}).code == 0);
  CHECK(slurp(s / "c" / "paths.csv") != csv);
}

TEST_CASE("invalid Hurst parameter is a configuration error") {
  Scratch s("badh");
  const auto cfg = s.config(R"({"master_seed": 5, "field.hurst": 1.2, "field.step": 0.0625})");
  const auto r = cli({"generate", "--config", cfg.string(), "--out", s.str()});
  CHECK(r.code == 2);
  CHECK(r.err.find("H must be in (0,1)") != std::string::npos);
  CHECK(cli_exe("generate --config " + cfg.string() + " --out " + s.str(), s / "log.txt") == 2);
  CHECK(slurp(s / "log.txt").find("H must be in (0,1)") != std::string::npos);
}

TEST_CASE("missing and unknown keys") {
  Scratch s("keys");
  const auto missing = s.config(R"({"master_seed": 1, "field.hurst": 0.5})");
  const auto r = cli({"generate", "--config", missing.string(), "--out", s.str()});
  CHECK(r.code == 2);
  CHECK(r.err.find("field.step") != std::string::npos);
  const auto unknown = s.config(R"({"master_seed": 1, "field.hurst": 0.5, "field.stepp": 0.1})", "u.json");
  CHECK(cli({"generate", "--config", unknown.string(), "--out", s.str()}).code == 2);
  CHECK(cli({"generate", "--config", (s / "absent.json").string()}).code == 2);
  CHECK(cli({"generate"}).code == 2);
  CHECK(cli({"nonsense"}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("solve with the noise disabled returns the initial constant") {
  Scratch s("solve0");
  const auto cfg = s.config(R"({"master_seed": 1, "field.hurst": 0.5, "field.step": 0.0125, "field.noise": false,
    "fk.epsilon": 0.1, "fk.samples": 500, "pde.enabled": false, "out": ")" + s.str() + R"("})");
  REQUIRE(cli({"solve", "--config", cfg.string()}).code == 0);
  const std::string est = slurp(s / "estimate.csv");
  CHECK(est.find("quenched_smooth,0.5,1,1,1,0,0.10000000000000001,500,1,0,") != std::string::npos);
  CHECK_FALSE(fs::exists(s / "solution.csv"));
}

TEST_CASE("solve runs both methods against one noise realization") {
  Scratch s("solve");
  const auto cfg = s.config(R"({"master_seed": 9, "field.hurst": 0.5, "field.step": 0.0125,
    "fk.epsilon": 0.1, "fk.samples": 4000, "fk.initial": "indicator"})");
  const auto r = cli({"solve", "--config", cfg.string(), "--out", s.str(), "--workers", "2"});
  REQUIRE(r.code == 0);
  const std::string est = slurp(s / "estimate.csv"), sol = slurp(s / "solution.csv");
  CHECK(est.rfind("# fkpam", 0) == 0);
  // Both files carry the same provenance line.
  CHECK(est.substr(0, est.find('\n')) == sol.substr(0, sol.find('\n')));
  CHECK(r.out.find("pde u(1, (0)) = ") != std::string::npos);

  const auto ann = s.config(R"({"master_seed": 9, "field.hurst": 0.5, "field.step": 0.0125, "field.noise": false,
    "fk.epsilon": 0.1, "fk.samples": 10, "fk.estimator": "annealed", "pde.enabled": false})", "a.json");
  CHECK(cli({"solve", "--config", ann.string(), "--out", s.str()}).code == 2);
}

TEST_CASE("walk and kernels commands") {
  Scratch s("walk");
  const auto cfg = s.config(R"({"master_seed": 2, "walk.count": 5, "walk.kappa": 3.0})");
  REQUIRE(cli({"walk", "--config", cfg.string(), "--out", s.str()}).code == 0);
  CHECK(data_rows(slurp(s / "walk_stats.csv")) == 5);
  CHECK(slurp(s / "walks.csv").find("walk,jump_index,time,x0") != std::string::npos);
  REQUIRE(cli({"kernels", "--out", s.str()}).code == 0);
  CHECK(slurp(s / "kernels.csv").find("kernel,H,eps,t1,t2,value,target,bound,within_bound") != std::string::npos);
}

TEST_CASE("experiment commands") {
  Scratch s("experiment");
  SUBCASE("rate sweep passes") {
    const auto cfg = s.config(R"({"master_seed": 1, "experiment.name": "rate", "experiment.kind": "rate_sweep",
      "experiment.hursts": [0.5]})");
    const auto r = cli({"experiment", "--config", cfg.string(), "--out", s.str()});
    CHECK(r.code == 0);
    const std::string verdict = slurp(s / "rate.verdict.txt");
    CHECK(verdict.rfind("# fkpam", 0) == 0);
    CHECK(verdict.find("PASS") != std::string::npos);
  }
  SUBCASE("rough tail table is monotone and worker-invariant") {
    const auto cfg = s.config(R"({"master_seed": 1, "experiment.name": "tail", "experiment.kind": "rough_tail",
      "experiment.samples": 20000})");
    cli({"experiment", "--config", cfg.string(), "--out", (s / "w1").string(), "--workers", "1"});
    cli({"experiment", "--config", cfg.string(), "--out", (s / "w4").string(), "--workers", "4"});
    const std::string a = slurp(s / "w1" / "tail.csv");
    CHECK(a == slurp(s / "w4" / "tail.csv"));
    std::istringstream is(a);
    std::string line;
    std::getline(is, line);  // provenance
    std::getline(is, line);
    CHECK(line == "delta,n,p_R_ge_n,ratio,p_L_ge_n_delta,p_K_ge_n");
    double prev_delta = -1, prev_p = 2;
    while (std::getline(is, line)) {
      double delta = 0, n = 0, p = 0;
      char c = 0;
      std::istringstream ls(line);
      ls >> delta >> c >> n >> c >> p;
      if (delta != prev_delta) prev_p = 2;
      CHECK(p <= prev_p);
      prev_p = p;
      prev_delta = delta;
    }
  }
  SUBCASE("unknown kind") {
    const auto cfg = s.config(R"({"master_seed": 1, "experiment.name": "x", "experiment.kind": "nope"})");
    CHECK(cli({"experiment", "--config", cfg.string(), "--out", s.str()}).code == 2);
  }
  SUBCASE("exit code through the executable") {
    const auto cfg = s.config(R"({"master_seed": 1, "experiment.name": "kb", "experiment.kind": "kernel_bounds"})");
    CHECK(cli_exe("experiment --config " + cfg.string() + " --out " + s.str(), s / "log.txt") == 0);
    CHECK(fs::exists(s / "kb.csv"));
  }
}

TEST_CASE("validate writes one file per criterion") {
  Scratch s("validate");
  const auto cfg = s.config(R"({"master_seed": 1, "validate.scale": "quick", "validate.criteria": [2, 10]})");
  const auto r = cli({"validate", "--config", cfg.string(), "--out", s.str()});
  CHECK(r.code == 0);
  CHECK(fs::exists(s / "criterion_02.csv"));
  CHECK(fs::exists(s / "criterion_10.csv"));
  CHECK_FALSE(fs::exists(s / "criterion_01.csv"));
  const std::string summary = slurp(s / "validation.txt");
  CHECK(summary.find("criterion 2 (") != std::string::npos);
  CHECK(summary.find(": PASS") != std::string::npos);
  const auto bad = s.config(R"({"validate.scale": "huge"})", "b.json");
  CHECK(cli({"validate", "--config", bad.string(), "--out", s.str()}).code == 2);
}
