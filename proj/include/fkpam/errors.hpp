#pragma once

#include <stdexcept>
#include <string>

namespace fkpam {

/// A numerical routine failed in a way that indicates a bug or an ill-posed
/// request (non-positive-definite covariance, quadrature that does not converge,
/// an exponent that had to be clamped).
class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact joint sampling was asked for more time points than the configured cap.
class ExactModeCapExceeded : public std::length_error {
 public:
  ExactModeCapExceeded(std::size_t requested, std::size_t cap)
      : std::length_error("exact-mode sampling requested " + std::to_string(requested) +
                          " times but the cap is " + std::to_string(cap) + "; use grid mode"),
        requested_(requested),
        cap_(cap) {}

  std::size_t requested() const noexcept { return requested_; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t requested_;
  std::size_t cap_;
};

/// Invalid or incomplete run configuration. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace fkpam
