#include "fkpam/config.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "fkpam/errors.hpp"
#include "json.hpp"

namespace fkpam {

using nlohmann::json;

const std::vector<SchemaEntry>& config_schema() {
  static const std::vector<SchemaEntry> schema{
      {"master_seed", ValueType::integer, "", "seed every random stream is derived from"},
      {"out", ValueType::string, "\"out\"", "output directory"},
      {"workers", ValueType::integer, "0", "worker threads, 0 = available parallelism"},

      {"field.hurst", ValueType::number, "", "Hurst parameter H in (0,1)"},
      {"field.step", ValueType::number, "", "noise grid step"},
      {"field.horizon", ValueType::number, "1.0", "generate: last grid time"},
      {"field.pad", ValueType::number, "0.0", "generate: grid extension below 0 and above the horizon"},
      {"field.sites", ValueType::sites, "[[0]]", "generate: sites to export"},
      {"field.noise", ValueType::boolean, "true", "false replaces the noise by zero"},

      {"walk.dim", ValueType::integer, "1", "lattice dimension d"},
      {"walk.kappa", ValueType::number, "1.0", "jump rate"},
      {"walk.horizon", ValueType::number, "1.0", "time t"},
      {"walk.start", ValueType::integers, "[]", "start site x, [] = origin"},
      {"walk.count", ValueType::integer, "10", "walk: number of paths to write"},
      {"walk.delta", ValueType::number, "0.1", "walk: rough-period threshold"},

      {"kernels.hursts", ValueType::numbers, "[0.25, 0.5, 0.75]", "kernels: H values"},
      {"kernels.epsilons", ValueType::numbers,
       "[0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625, 0.001953125]", "kernels: eps values"},
      {"kernels.lengths", ValueType::numbers, "[0.25, 1.0]", "kernels: segment lengths t2 - t1"},

      {"fk.enabled", ValueType::boolean, "true", "solve: run the Monte Carlo estimator"},
      {"fk.estimator", ValueType::string, "\"quenched\"", "quenched or annealed"},
      {"fk.mode", ValueType::string, "\"smooth\"", "smooth (u_eps) or rough (u)"},
      {"fk.epsilon", ValueType::number, "", "mollification eps"},
      {"fk.samples", ValueType::integer, "", "quenched: number of walks"},
      {"fk.moment", ValueType::number, "2.0", "annealed: moment order p"},
      {"fk.outer", ValueType::integer, "1000", "annealed: noise draws"},
      {"fk.inner", ValueType::integer, "1000", "annealed: walks per noise draw"},
      {"fk.initial", ValueType::string, "\"constant\"", "initial condition: constant or indicator"},
      {"fk.initial_value", ValueType::number, "1.0", "constant initial value"},
      {"fk.initial_site", ValueType::integers, "[]", "indicator site, [] = origin"},

      {"pde.enabled", ValueType::boolean, "true", "solve: run the lattice solver"},
      {"pde.dt", ValueType::number, "0.0", "solver time step, 0 = noise grid step"},

      {"experiment.name", ValueType::string, "", "output file stem"},
      {"experiment.kind", ValueType::string, "",
       "rate_sweep, ueps_convergence, rough_tail, fk_pde_crosscheck, moment_stability or kernel_bounds"},
      {"experiment.hursts", ValueType::numbers, "[0.25, 0.5, 0.75]", "H values"},
      {"experiment.epsilons", ValueType::numbers, "[]", "strictly decreasing eps values, [] = kind default"},
      {"experiment.kappa", ValueType::number, "1.0", "jump rate"},
      {"experiment.dim", ValueType::integer, "1", "lattice dimension"},
      {"experiment.horizon", ValueType::number, "1.0", "time t"},
      {"experiment.samples", ValueType::integer, "1000", "paths (rough_tail) or walks per site (fk_pde_crosscheck)"},
      {"experiment.noise", ValueType::boolean, "true", "false replaces the noise by zero"},
      {"experiment.jumps", ValueType::integers, "[0, 3, 10]", "rate_sweep: jump counts of the test paths"},
      {"experiment.deltas", ValueType::numbers, "[0.1, 0.05, 0.025]", "rough_tail: delta values"},
      {"experiment.realizations", ValueType::integer, "20", "noise draws"},
      {"experiment.inner", ValueType::integer, "1000", "walks per noise draw"},
      {"experiment.step", ValueType::number, "0.0", "noise grid step, 0 = kind default"},
      {"experiment.lengths", ValueType::numbers, "[0.25, 1.0]", "kernel_bounds: segment lengths"},
      {"experiment.initial", ValueType::string, "\"\"",
       "constant or indicator, empty = indicator for fk_pde_crosscheck, constant otherwise"},

      {"validate.scale", ValueType::string, "\"full\"", "full or quick"},
      {"validate.criteria", ValueType::integers, "[]", "criterion numbers to run, [] = all"},
  };
  return schema;
}

namespace {

const SchemaEntry* find_entry(const std::string& key) {
  for (const auto& e : config_schema()) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

const char* type_name(ValueType t) {
  switch (t) {
    case ValueType::number: return "a number";
    case ValueType::integer: return "an integer";
    case ValueType::boolean: return "a boolean";
    case ValueType::string: return "a string";
    case ValueType::numbers: return "an array of numbers";
    case ValueType::integers: return "an array of integers";
    case ValueType::sites: return "an array of integer arrays";
  }
  return "?";
}

bool matches(const json& v, ValueType t) {
  switch (t) {
    case ValueType::number: return v.is_number();
    case ValueType::integer: return v.is_number_integer();
    case ValueType::boolean: return v.is_boolean();
    case ValueType::string: return v.is_string();
    case ValueType::numbers:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); });
    case ValueType::integers:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number_integer(); });
    case ValueType::sites:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) {
               return x.is_array() && !x.empty() &&
                      std::all_of(x.begin(), x.end(), [](const json& c) { return c.is_number_integer(); });
             });
  }
  return false;
}

}  // namespace

struct RunConfig::Impl {
  json doc = json::object();

  json get(const std::string& key) const {
    const SchemaEntry* e = find_entry(key);
    if (!e) throw ConfigError("config key '" + key + "' is not in the schema");
    auto it = doc.find(key);
    if (it != doc.end()) return *it;
    if (e->default_json.empty()) throw ConfigError("missing config key '" + key + "'");
    return json::parse(e->default_json);
  }
};

RunConfig::RunConfig() : impl_(std::make_shared<Impl>()) {}

RunConfig RunConfig::parse(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const SchemaEntry* e = find_entry(it.key());
    if (!e) throw ConfigError("unknown config key '" + it.key() + "'");
    if (!matches(it.value(), e->type)) {
      throw ConfigError("config key '" + it.key() + "' must be " + type_name(e->type));
    }
  }
  RunConfig c;
  c.impl_->doc = std::move(doc);
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool RunConfig::has(const std::string& key) const { return impl_->doc.contains(key); }

double RunConfig::number(const std::string& key) const { return impl_->get(key).get<double>(); }

std::int64_t RunConfig::integer(const std::string& key) const { return impl_->get(key).get<std::int64_t>(); }

std::uint64_t RunConfig::unsigned_integer(const std::string& key) const {
  const json v = impl_->get(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  const auto i = v.get<std::int64_t>();
  if (i < 0) throw ConfigError("config key '" + key + "' must be >= 0");
  return static_cast<std::uint64_t>(i);
}

bool RunConfig::boolean(const std::string& key) const { return impl_->get(key).get<bool>(); }

std::string RunConfig::string(const std::string& key) const { return impl_->get(key).get<std::string>(); }

std::vector<double> RunConfig::numbers(const std::string& key) const {
  return impl_->get(key).get<std::vector<double>>();
}

std::vector<std::int64_t> RunConfig::integers(const std::string& key) const {
  return impl_->get(key).get<std::vector<std::int64_t>>();
}

namespace {

Site to_site(const std::vector<std::int64_t>& c, const std::string& key) {
  std::vector<std::int32_t> coords;
  for (auto v : c) {
    if (v < std::numeric_limits<std::int32_t>::min() || v > std::numeric_limits<std::int32_t>::max()) {
      throw ConfigError("config key '" + key + "' has a coordinate out of range");
    }
    coords.push_back(static_cast<std::int32_t>(v));
  }
  return Site(std::move(coords));
}

}  // namespace

std::vector<Site> RunConfig::sites(const std::string& key) const {
  std::vector<Site> out;
  for (const auto& s : impl_->get(key)) out.push_back(to_site(s.get<std::vector<std::int64_t>>(), key));
  if (!out.empty()) {
    for (const auto& s : out) {
      if (s.dim() != out.front().dim()) throw ConfigError("config key '" + key + "' mixes site dimensions");
    }
  }
  return out;
}

Site RunConfig::site(const std::string& key, int dim) const {
  const auto c = integers(key);
  if (c.empty()) return Site::origin(dim);
  if (static_cast<int>(c.size()) != dim) {
    throw ConfigError("config key '" + key + "' must have " + std::to_string(dim) + " coordinates");
  }
  return to_site(c, key);
}

void RunConfig::set_unsigned(const std::string& key, std::uint64_t v) {
  auto next = std::make_shared<Impl>(*impl_);
  next->doc[key] = v;
  impl_ = std::move(next);
}

void RunConfig::set_string(const std::string& key, const std::string& v) {
  auto next = std::make_shared<Impl>(*impl_);
  next->doc[key] = v;
  impl_ = std::move(next);
}

std::string RunConfig::canonical() const { return impl_->doc.dump(); }

std::string RunConfig::hash() const {
  json d = impl_->doc;
  d.erase("workers");
  d.erase("out");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : d.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace fkpam
