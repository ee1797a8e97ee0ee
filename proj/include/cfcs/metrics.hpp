#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "cfcs/model.hpp"

namespace cfcs {

/// sqrt(‖x − x̂‖² / d(x)) with d(x) = Σ min(x_i², σ²) for sparse truth and
/// ‖x‖² for compressible truth.
double recovery_error(const Signald& truth, const VectorXd& estimate, double sigma);

struct ErrorSummary {
  double rms = 0.0;     // sqrt(N⁻¹ Σ e²)
  double stddev = 0.0;  // sample standard deviation, 0 for a single value
  std::size_t count = 0;
};

ErrorSummary aggregate_error(std::span<const double> errors);

/// (s/m) ln n
double recovery_index(Index s, Index m, Index n);

struct RunResult {
  double error = 0.0;
  double wall_time = 0.0;
  std::size_t iterations = 0;
  std::string method;
  std::uint64_t scenario_digest = 0;
};

/// FNV-1a over the problem's dimensions and the bit patterns of its entries.
std::uint64_t scenario_digest(const Problemd& problem);

}  // namespace cfcs
