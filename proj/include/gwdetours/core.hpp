#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace gwd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Failure categories shared by every module. The C API maps these 1:1 onto
/// `gwd_status` values, so the numbering is part of the ABI.
enum class ErrorCode : int {
  InvalidArgument = 1,
  DimensionMismatch = 2,
  NegativeWeight = 3,
  EmptySupport = 4,
  NonFiniteValue = 5,
  WeightSumOutOfTolerance = 6,
  InfeasibleMarginals = 7,
  NumericalFailure = 8,
  NonFiniteEnergy = 9,
  SingularBlock = 10,
  DegenerateCovariance = 11,
  NotCentered = 12,
  EmptyConditional = 13,
  SolverFailure = 14,
  ParseError = 15,
  DisconnectedGraph = 16,
  IndexOutOfRange = 17,
  ConvergenceFailure = 18,
  SizeMismatch = 19,
  IOError = 20,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Portable random stream: raw 64-bit words from std::mt19937_64 (whose output
/// sequence is fixed by the standard) turned into doubles by explicit formulas.
/// std::uniform_real_distribution and std::normal_distribution are avoided
/// because their algorithms differ between standard libraries.
///
///   uniform()  = (word >> 11) * 2^-53                      in [0, 1)
///   normal()   = Box-Muller on two uniforms u1, u2:
///                sqrt(-2 ln(1 - u1)) * cos(2 pi u2), one word pair per draw
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_word() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform integer in [0, bound) by rejection on the top bits.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t w;
    do {
      w = engine_();
    } while (w >= limit);
    return w % bound;
  }

 private:
  std::mt19937_64 engine_;
};

/// Worker count for data-parallel sections; reads GWDETOURS_THREADS (>= 1),
/// defaults to 1 so results are reproducible unless the caller opts in.
int configured_threads() noexcept;

}  // namespace gwd
