#pragma once

// The numbered acceptance checks, runnable at full or quick scale. Used by
// `fkpam validate` and by the acceptance test binary.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fkpam {

enum class ValidationScale { full, quick };

struct ValidationOptions {
  ValidationScale scale = ValidationScale::full;
  std::uint64_t master_seed = 20240601;
  unsigned workers = 1;
  std::vector<int> only;  // empty = all criteria
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // verdict lines
  std::string csv;     // supporting table
};

inline constexpr int kCriterionCount = 11;

CriterionResult run_criterion(int id, const ValidationOptions& opts);

/// Runs the selected criteria in order; `on_done` sees each result as it finishes.
std::vector<CriterionResult> run_validation(const ValidationOptions& opts,
                                            const std::function<void(const CriterionResult&)>& on_done = {});

ValidationScale parse_scale(const std::string& s);

}  // namespace fkpam
