#pragma once

#include <stdexcept>
#include <string>

namespace aoimec {

/// Thrown when a balance or correlation system is rank-deficient
/// (non-ergodic chain, unstable age process).
struct SingularSystem : std::runtime_error {
  explicit SingularSystem(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown on out-of-domain model parameters (negative rates, bad probabilities).
struct InvalidParams : std::invalid_argument {
  explicit InvalidParams(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown on malformed configuration input (files, overrides, simulator setup).
struct InvalidConfig : std::invalid_argument {
  explicit InvalidConfig(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace aoimec
