#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace tabembed {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Single RNG type used everywhere; determinism contracts depend on it.
using Rng = std::mt19937_64;

struct DegenerateFeature : std::runtime_error {
  explicit DegenerateFeature(const std::string& msg) : std::runtime_error(msg) {}
};

struct InconsistentSpec : std::runtime_error {
  explicit InconsistentSpec(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonFiniteActivation : std::runtime_error {
  explicit NonFiniteActivation(const std::string& msg) : std::runtime_error(msg) {}
};

struct MissingForwardState : std::runtime_error {
  explicit MissingForwardState(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : std::runtime_error {
  Index row = -1;
  Index col = -1;
  ParseError(const std::string& msg, Index r, Index c)
      : std::runtime_error(msg + " (row " + std::to_string(r) + ", col " + std::to_string(c) + ")"),
        row(r), col(c) {}
};

struct SchemaMismatch : std::runtime_error {
  explicit SchemaMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

struct EmptySplit : std::runtime_error {
  explicit EmptySplit(const std::string& msg) : std::runtime_error(msg) {}
};

struct IndivisibleSeeds : std::runtime_error {
  explicit IndivisibleSeeds(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tabembed
