#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gtopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied value is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConnectivityError : public Error {
 public:
  using Error::Error;
};

class PartitionError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Raised when an iterate norm exceeds the divergence guard.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t round)
      : Error(what + " (round " + std::to_string(round) + ")"), round_(round) {}

  std::size_t round() const { return round_; }

 private:
  std::size_t round_;
};

inline constexpr double kDivergenceThreshold = 1e12;

/// Seeded random stream. Streams are identified by (master seed, stream id),
/// so node i of a network always draws from the same sequence no matter the
/// order in which nodes are updated. Centralized runs use stream 0.
class Rng {
 public:
  Rng() : Rng(0, 0) {}
  Rng(std::uint64_t master_seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                      static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32), 0x9e3779b9u};
    engine_.seed(seq);
  }

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gtopt
