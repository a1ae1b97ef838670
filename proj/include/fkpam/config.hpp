#pragma once

// Flat JSON run configuration: one object whose keys are dotted paths such as
// "field.hurst". Every key is declared in a schema with its type and default;
// unknown keys are rejected when the document is loaded, and reading a key that
// is absent and has no default raises ConfigError naming the key.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fkpam/site.hpp"

namespace fkpam {

enum class ValueType { number, integer, boolean, string, numbers, integers, sites };

struct SchemaEntry {
  std::string key;
  ValueType type;
  std::string default_json;  // empty = required
  std::string description;
};

const std::vector<SchemaEntry>& config_schema();

class RunConfig {
 public:
  RunConfig();
  static RunConfig parse(const std::string& json_text);
  static RunConfig load(const std::string& path);

  bool has(const std::string& key) const;

  double number(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::uint64_t unsigned_integer(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::string string(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<std::int64_t> integers(const std::string& key) const;
  std::vector<Site> sites(const std::string& key) const;
  /// A single site given as an integer array; an empty array means the origin of `dim`.
  Site site(const std::string& key, int dim) const;

  void set_unsigned(const std::string& key, std::uint64_t v);
  void set_string(const std::string& key, const std::string& v);

  /// FNV-1a of the canonical (sorted-key) document without "workers" and "out", as 16 hex digits.
  std::string hash() const;
  /// Canonical JSON of the document as given (no defaults filled in).
  std::string canonical() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace fkpam
