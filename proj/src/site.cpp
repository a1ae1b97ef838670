#include "fkpam/site.hpp"

#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "fkpam/rng.hpp"

namespace fkpam {

std::int32_t Site::sup_distance(const Site& other) const {
  if (other.dim() != dim()) throw std::invalid_argument("sup_distance: dimension mismatch");
  std::int32_t best = 0;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    best = std::max(best, std::abs(coords[i] - other.coords[i]));
  }
  return best;
}

Site Site::shifted(int axis, int sign) const {
  Site out = *this;
  out.coords.at(static_cast<std::size_t>(axis)) += sign;
  return out;
}

std::string Site::to_string() const {
  std::ostringstream os;
  os << *this;
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Site& s) {
  os << '(';
  for (std::size_t i = 0; i < s.coords.size(); ++i) {
    if (i) os << ',';
    os << s.coords[i];
  }
  return os << ')';
}

std::uint64_t site_hash(const Site& s) noexcept {
  std::uint64_t h = splitmix64(0x5171e5a17e5ULL + s.coords.size());
  for (std::int32_t c : s.coords) {
    h = mix64(h, static_cast<std::uint64_t>(static_cast<std::uint32_t>(c)));
  }
  return h;
}

}  // namespace fkpam
