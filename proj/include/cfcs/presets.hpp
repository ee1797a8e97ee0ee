#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "cfcs/solvers.hpp"

namespace cfcs {

/// Relaxation and stopping parameters tuned for the Gaussian benchmarks:
/// α = 1.8, ε = 1e-4, K = 5000 sweeps and
///   λ^k / n = 70⁻²                 for k <= 2000
///           = 100⁻² (1 + k/10⁴)⁻¹  otherwise.
/// λ^k is capped at 2 − 1e-6 for very wide problems (n > 9800).
struct PaperSchedule {
  double alpha = 1.8;
  double l1_budget = 1e-4;
  std::size_t max_sweeps = 5000;
  double step_tolerance = 0.01;

  static double lambda_over_n(std::size_t k) {
    if (k <= 2000) return 1.0 / (70.0 * 70.0);
    return 1.0 / (100.0 * 100.0) / (1.0 + static_cast<double>(k) / 1e4);
  }

  SolverConfig<double> config(Index n) const {
    SolverConfig<double> cfg;
    cfg.alpha = constant_schedule(alpha);
    const double width = static_cast<double>(n);
    cfg.lambda = [width](std::size_t k) {
      return std::min(width * lambda_over_n(k), 2.0 - kRelaxationMargin);
    };
    cfg.l1_budget = l1_budget;
    cfg.max_iterations = max_sweeps;
    cfg.step_tolerance = step_tolerance;
    return cfg;
  }
};

/// γ = 0.01, used for the 512×1024 problems.
inline PaperSchedule paper_small() { return PaperSchedule{}; }

/// γ = 0.5, used for everything larger.
inline PaperSchedule paper_large() {
  PaperSchedule p;
  p.step_tolerance = 0.5;
  return p;
}

/// paper_small() for problems up to 512×1024, paper_large() otherwise.
inline PaperSchedule paper_for(Index m, Index n) {
  return (m <= 512 && n <= 1024) ? paper_small() : paper_large();
}

}  // namespace cfcs
