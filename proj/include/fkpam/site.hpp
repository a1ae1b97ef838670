#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace fkpam {

/// A point of the integer lattice Z^d.
struct Site {
  std::vector<std::int32_t> coords;

  Site() = default;
  explicit Site(std::vector<std::int32_t> c) : coords(std::move(c)) {}
  Site(std::initializer_list<std::int32_t> c) : coords(c) {}

  static Site origin(int dim) { return Site(std::vector<std::int32_t>(static_cast<std::size_t>(dim), 0)); }

  int dim() const noexcept { return static_cast<int>(coords.size()); }

  /// Sup-norm distance to another site of the same dimension.
  std::int32_t sup_distance(const Site& other) const;

  /// Neighbour reached by stepping `sign` (+1 or -1) along `axis`.
  Site shifted(int axis, int sign) const;

  std::string to_string() const;

  auto operator<=>(const Site&) const = default;
  bool operator==(const Site&) const = default;
};

std::ostream& operator<<(std::ostream& os, const Site& s);

/// Stable 64-bit hash of the coordinates; independent of process, platform word order and visit order.
std::uint64_t site_hash(const Site& s) noexcept;

}  // namespace fkpam
