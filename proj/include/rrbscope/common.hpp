#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rrb {

/// Raised when a configuration (cell, simulation, pipeline, ensemble) is
/// invalid before any work starts.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when input data violates a contract at runtime (missing victim,
/// malformed log, degenerate trace, ...).
class data_error : public std::runtime_error {
 public:
  explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

using bytes_t = std::uint64_t;

inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace rrb
