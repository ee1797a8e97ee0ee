#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "cfcs/constraints.hpp"
#include "cfcs/error.hpp"
#include "cfcs/model.hpp"
#include "cfcs/types.hpp"

namespace cfcs {

/// Relaxation parameters must stay inside [margin, 2 − margin].
inline constexpr double kRelaxationMargin = 1e-6;

/// Relaxation parameter as a function of the sweep counter k (0-based).
template <typename Scalar>
using Schedule = std::function<Scalar(std::size_t)>;

template <typename Scalar>
Schedule<Scalar> constant_schedule(Scalar value) {
  return [value](std::size_t) { return value; };
}

enum class Termination { kMaxIterations, kStepTolerance, kFeasible };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::kMaxIterations: return "max-iterations";
    case Termination::kStepTolerance: return "step-tolerance";
    case Termination::kFeasible: return "feasible";
  }
  return "?";
}

enum class Stage { kCyclic, kSimultaneous, kLeastSquares };

inline const char* to_string(Stage s) {
  switch (s) {
    case Stage::kCyclic: return "csp";
    case Stage::kSimultaneous: return "ssp";
    case Stage::kLeastSquares: return "ls";
  }
  return "?";
}

template <typename Scalar>
struct TraceRecord {
  std::size_t sweep;  // 1-based count of sweeps completed when recorded
  Stage stage;
  Scalar residual_l2;  // ‖y − Hx̂‖₂, or ‖max(f_i, 0)‖₂ for generic constraints
  Scalar l1_norm;
  Scalar step_l2;  // ‖x̂ after − x̂ before‖₂ for this record
};

template <typename Scalar>
struct SolveReport {
  Vector<Scalar> estimate;
  std::size_t iterations_run = 0;  // constraint visits
  std::size_t sweeps_run = 0;      // full passes over the constraint list
  Termination termination = Termination::kMaxIterations;
  double wall_time = 0.0;  // seconds
  std::vector<TraceRecord<Scalar>> trace;
};

template <typename Scalar>
struct SolverConfig {
  Schedule<Scalar> alpha = constant_schedule(Scalar(1));   // hyperplane relaxation α^k
  Schedule<Scalar> lambda = constant_schedule(Scalar(1));  // l1 relaxation λ^k
  Scalar l1_budget = Scalar(1e-4);                        // ε
  std::size_t max_iterations = 5000;                      // K, counted in sweeps
  Scalar step_tolerance = Scalar(1e-2);                   // γ
  std::size_t block_size = 1;                             // l
  Vector<Scalar> ssp_weights;  // simultaneous variants; empty means uniform
  bool record_trace = true;
  // Called with (sweeps completed, current iterate) after each sweep.
  std::function<void(std::size_t, const Vector<Scalar>&)> on_sweep;

  Scalar alpha_at(std::size_t k) const { return checked(alpha, k, "alpha"); }
  Scalar lambda_at(std::size_t k) const { return checked(lambda, k, "lambda"); }

  void validate() const {
    if (!alpha || !lambda) throw UsageError("relaxation schedules must be set");
    if (!(l1_budget > Scalar(0))) throw UsageError("l1 budget must be > 0");
    if (max_iterations < 1) throw UsageError("max_iterations must be >= 1");
    if (!(step_tolerance > Scalar(0))) throw UsageError("step tolerance must be > 0");
    if (block_size < 1) throw UsageError("block size must be >= 1");
  }

  /// Weights for p simultaneous constraints, uniform if none were given.
  Vector<Scalar> weights_for(Index p) const {
    if (ssp_weights.size() == 0) return Vector<Scalar>::Constant(p, Scalar(1) / Scalar(p));
    if (ssp_weights.size() != p) {
      throw UsageError("expected " + std::to_string(p) + " SSP weights, got " +
                       std::to_string(ssp_weights.size()));
    }
    if ((ssp_weights.array() <= Scalar(0)).any()) throw UsageError("SSP weights must be > 0");
    if (std::abs(ssp_weights.sum() - Scalar(1)) > Scalar(1e-12)) {
      throw UsageError("SSP weights must sum to 1");
    }
    return ssp_weights;
  }

 private:
  static Scalar checked(const Schedule<Scalar>& s, std::size_t k, const char* name) {
    const Scalar v = s(k);
    if (!(v >= Scalar(kRelaxationMargin) && v <= Scalar(2 - kRelaxationMargin))) {
      throw UsageError(std::string(name) + " schedule value " + std::to_string(v) +
                       " at sweep " + std::to_string(k) + " is outside [1e-6, 2-1e-6]");
    }
    return v;
  }
};

struct StopDecision {
  bool stop = false;
  Termination reason = Termination::kMaxIterations;
};

/// Stopping rule on a precomputed step length. Step tolerance wins when both
/// conditions hold.
template <typename Scalar>
StopDecision should_stop(Scalar step, std::size_t sweep, const SolverConfig<Scalar>& cfg) {
  if (step <= cfg.step_tolerance) return {true, Termination::kStepTolerance};
  if (sweep >= cfg.max_iterations) return {true, Termination::kMaxIterations};
  return {false, Termination::kMaxIterations};
}

/// Stop when `sweep` reached K or ‖next − prev‖₂ <= γ.
template <typename Scalar, typename A, typename B>
StopDecision should_stop(const Eigen::MatrixBase<A>& prev, const Eigen::MatrixBase<B>& next,
                         std::size_t sweep, const SolverConfig<Scalar>& cfg) {
  if (prev.size() != next.size()) throw UsageError("should_stop: vector lengths differ");
  return should_stop<Scalar>((next - prev).norm(), sweep, cfg);
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename Scalar>
void require_finite(const Vector<Scalar>& z, std::size_t iteration) {
  if (!z.allFinite()) {
    throw DivergenceError("iterate became non-finite at iteration " + std::to_string(iteration),
                          iteration);
  }
}

template <typename Scalar>
void require_nonzero_rows(const Problem<Scalar>& p) {
  if (auto i = p.matrix().first_zero_row()) {
    throw DegenerateConstraintError("measurement row " + std::to_string(*i) + " is zero", *i);
  }
}

template <typename Scalar, typename Derived>
Vector<Scalar> initial_iterate(Index n, const Eigen::MatrixBase<Derived>& z0) {
  if (z0.size() != n) {
    throw UsageError("initial iterate length " + std::to_string(z0.size()) +
                     " does not match column count " + std::to_string(n));
  }
  return z0;
}

template <typename Scalar>
TraceRecord<Scalar> measure(const Problem<Scalar>& p, const Vector<Scalar>& z,
                            std::size_t sweep, Stage stage, Scalar step) {
  return {sweep, stage, (p.observations() - p.matrix().entries() * z).norm(),
          z.template lpNorm<1>(), step};
}

// Hook run after every sweep of the row-action solvers; may replace the
// iterate (alternating least-squares refinement uses it).
template <typename Scalar>
using SweepHook = std::function<void(std::size_t sweeps_done, Vector<Scalar>& z,
                                     SolveReport<Scalar>& report)>;

// Cyclic row-action sweeps: m hyperplane projections in row order, followed
// by the l1 step when `with_l1` is set. Rows are visited in blocks of
// cfg.block_size; the arithmetic does not depend on the block size.
template <typename Scalar>
SolveReport<Scalar> cyclic_sweeps(const Problem<Scalar>& p, const SolverConfig<Scalar>& cfg,
                                  Vector<Scalar> z, bool with_l1,
                                  const SweepHook<Scalar>& hook = {}) {
  cfg.validate();
  require_nonzero_rows(p);
  const auto start = Clock::now();

  const auto& h = p.matrix().entries();
  const auto& norms = p.matrix().row_squared_norms();
  const auto& y = p.observations();
  const Index m = p.rows();
  const Index block = static_cast<Index>(cfg.block_size);
  const std::size_t visits_per_sweep = static_cast<std::size_t>(m) + (with_l1 ? 1 : 0);

  SolveReport<Scalar> report;
  Vector<Scalar> prev(z.size());
  for (std::size_t k = 0;; ++k) {
    prev = z;
    const Scalar alpha = cfg.alpha_at(k);
    for (Index b = 0; b < m; b += block) {
      const Index e = std::min(m, b + block);
      Scalar coef_sum = 0;
      for (Index i = b; i < e; ++i) {
        coef_sum += relax_onto_hyperplane(h.row(i), y(i), norms(i), alpha, z);
      }
      if (!std::isfinite(coef_sum)) {
        throw DivergenceError("iterate became non-finite at iteration " +
                                  std::to_string(report.iterations_run + e),
                              report.iterations_run + static_cast<std::size_t>(e));
      }
    }
    if (with_l1) relax_into_l1_ball(cfg.l1_budget, cfg.lambda_at(k), z);
    report.iterations_run += visits_per_sweep;
    require_finite(z, report.iterations_run);
    report.sweeps_run = k + 1;

    const Scalar step = (z - prev).norm();
    if (cfg.record_trace) {
      report.trace.push_back(measure(p, z, report.sweeps_run, Stage::kCyclic, step));
    }
    Scalar total_step = step;
    if (hook) {
      hook(report.sweeps_run, z, report);
      total_step = (z - prev).norm();
    }
    if (cfg.on_sweep) cfg.on_sweep(report.sweeps_run, z);

    const StopDecision d = should_stop(total_step, report.sweeps_run, cfg);
    if (d.stop) {
      report.termination = d.reason;
      break;
    }
  }
  report.estimate = std::move(z);
  report.wall_time = seconds_since(start);
  return report;
}

template <typename Scalar>
Scalar positive_violation_norm(const std::vector<ConstraintPtr<Scalar>>& cs,
                               const Vector<Scalar>& z) {
  Scalar acc = 0;
  for (const auto& c : cs) {
    const Scalar f = c->value(z);
    if (f > Scalar(0)) acc += f * f;
  }
  return std::sqrt(acc);
}

template <typename Scalar>
void require_dimensions(const std::vector<ConstraintPtr<Scalar>>& cs, Index n) {
  if (cs.empty()) throw UsageError("at least one constraint is required");
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (!cs[i]) throw UsageError("constraint " + std::to_string(i) + " is null");
    if (cs[i]->dimension() != n) {
      throw UsageError("constraint " + std::to_string(i) + " has dimension " +
                       std::to_string(cs[i]->dimension()) + ", expected " + std::to_string(n));
    }
  }
}

}  // namespace detail

/// Cyclic subgradient projections over an arbitrary ordered constraint list.
///
/// Constraint i(k) = k mod p is visited at step k; the update is skipped when
/// f_i(z) <= 0. A sweep with no active constraint terminates with
/// Termination::kFeasible. Otherwise the step statistic compared with γ is the
/// largest single-visit displacement in the sweep, which keeps a cycling
/// (inconsistent) system from looking converged at the sweep boundary.
template <typename Scalar, typename Derived>
SolveReport<Scalar> csp_generic(const std::vector<ConstraintPtr<Scalar>>& constraints,
                                const Eigen::MatrixBase<Derived>& z0,
                                const SolverConfig<Scalar>& cfg) {
  cfg.validate();
  detail::require_dimensions(constraints, z0.size());
  const auto start = detail::Clock::now();

  Vector<Scalar> z = z0;
  Vector<Scalar> prev(z.size());
  SolveReport<Scalar> report;
  for (std::size_t k = 0;; ++k) {
    prev = z;
    const Scalar alpha = cfg.alpha_at(k);
    std::size_t active = 0;
    Scalar largest_move = 0;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      const Scalar f = constraints[i]->value(z);
      ++report.iterations_run;
      if (!(f > Scalar(0))) continue;
      const Subgradient<Scalar> t = constraints[i]->subgradient(z);
      if (!(t.squared_norm > Scalar(0))) {
        throw DegenerateConstraintError(
            "constraint " + std::to_string(i) + " has a zero subgradient while violated", i);
      }
      const Scalar coef = alpha * f / t.squared_norm;
      z.noalias() -= coef * t.direction;
      detail::require_finite(z, report.iterations_run);
      largest_move = std::max(largest_move, coef * std::sqrt(t.squared_norm));
      ++active;
    }
    report.sweeps_run = k + 1;
    if (cfg.record_trace) {
      report.trace.push_back({report.sweeps_run, Stage::kCyclic,
                              detail::positive_violation_norm(constraints, z),
                              z.template lpNorm<1>(), (z - prev).norm()});
    }
    if (cfg.on_sweep) cfg.on_sweep(report.sweeps_run, z);
    if (active == 0) {
      report.termination = Termination::kFeasible;
      break;
    }
    const StopDecision d = should_stop(largest_move, report.sweeps_run, cfg);
    if (d.stop) {
      report.termination = d.reason;
      break;
    }
  }
  report.estimate = std::move(z);
  report.wall_time = detail::seconds_since(start);
  return report;
}

/// Simultaneous subgradient projections over an arbitrary constraint list:
/// every intermediate step is computed from the same iterate and the next
/// iterate is their weighted average. One iteration counts as one sweep.
template <typename Scalar, typename Derived>
SolveReport<Scalar> ssp_generic(const std::vector<ConstraintPtr<Scalar>>& constraints,
                                const Eigen::MatrixBase<Derived>& z0,
                                const SolverConfig<Scalar>& cfg) {
  cfg.validate();
  detail::require_dimensions(constraints, z0.size());
  const Vector<Scalar> w = cfg.weights_for(static_cast<Index>(constraints.size()));
  const auto start = detail::Clock::now();

  Vector<Scalar> z = z0;
  Vector<Scalar> delta(z.size());
  SolveReport<Scalar> report;
  for (std::size_t k = 0;; ++k) {
    const Scalar alpha = cfg.alpha_at(k);
    delta.setZero();
    std::size_t active = 0;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      const Scalar f = constraints[i]->value(z);
      ++report.iterations_run;
      if (!(f > Scalar(0))) continue;
      const Subgradient<Scalar> t = constraints[i]->subgradient(z);
      if (!(t.squared_norm > Scalar(0))) {
        throw DegenerateConstraintError(
            "constraint " + std::to_string(i) + " has a zero subgradient while violated", i);
      }
      delta.noalias() -= (w(static_cast<Index>(i)) * alpha * f / t.squared_norm) * t.direction;
      ++active;
    }
    z += delta;
    detail::require_finite(z, report.iterations_run);
    report.sweeps_run = k + 1;
    const Scalar step = delta.norm();
    if (cfg.record_trace) {
      report.trace.push_back({report.sweeps_run, Stage::kSimultaneous,
                              detail::positive_violation_norm(constraints, z),
                              z.template lpNorm<1>(), step});
    }
    if (cfg.on_sweep) cfg.on_sweep(report.sweeps_run, z);
    if (active == 0) {
      report.termination = Termination::kFeasible;
      break;
    }
    const StopDecision d = should_stop(step, report.sweeps_run, cfg);
    if (d.stop) {
      report.termination = d.reason;
      break;
    }
  }
  report.estimate = std::move(z);
  report.wall_time = detail::seconds_since(start);
  return report;
}

/// CSP for compressed sensing: each sweep projects onto the m measurement
/// hyperplanes in row order (unconditionally, they are equalities) and then
/// takes the l1-ball subgradient step. k in the schedules counts sweeps.
template <typename Scalar, typename Derived>
SolveReport<Scalar> csp_cs(const Problem<Scalar>& p, const SolverConfig<Scalar>& cfg,
                           const Eigen::MatrixBase<Derived>& z0) {
  return detail::cyclic_sweeps(p, cfg, detail::initial_iterate<Scalar>(p.cols(), z0), true);
}

template <typename Scalar>
SolveReport<Scalar> csp_cs(const Problem<Scalar>& p, const SolverConfig<Scalar>& cfg) {
  return csp_cs(p, cfg, Vector<Scalar>::Zero(p.cols()));
}

/// Kaczmarz: the cyclic row projections without the l1 constraint. From the
/// origin it converges to the minimum-norm solution of a consistent system.
template <typename Scalar, typename Derived>
SolveReport<Scalar> kaczmarz(const Problem<Scalar>& p, const SolverConfig<Scalar>& cfg,
                             const Eigen::MatrixBase<Derived>& z0) {
  return detail::cyclic_sweeps(p, cfg, detail::initial_iterate<Scalar>(p.cols(), z0), false);
}

template <typename Scalar>
SolveReport<Scalar> kaczmarz(const Problem<Scalar>& p, const SolverConfig<Scalar>& cfg) {
  return kaczmarz(p, cfg, Vector<Scalar>::Zero(p.cols()));
}

/// SSP for compressed sensing. All m + 1 intermediate iterates are taken
/// from the same z^k (hyperplanes unconditionally, the l1 step only when
/// ‖z‖₁ > ε) and combined with weights w (default uniform 1/(m+1)).
template <typename Scalar, typename Derived>
SolveReport<Scalar> ssp_cs(const Problem<Scalar>& p, const SolverConfig<Scalar>& cfg,
                           const Eigen::MatrixBase<Derived>& z0) {
  cfg.validate();
  detail::require_nonzero_rows(p);
  const Index m = p.rows();
  const Vector<Scalar> w = cfg.weights_for(m + 1);
  const auto start = detail::Clock::now();

  const auto& h = p.matrix().entries();
  const Vector<Scalar> row_weights = w.head(m).cwiseQuotient(p.matrix().row_squared_norms());
  const Scalar l1_weight = w(m);

  Vector<Scalar> z = detail::initial_iterate<Scalar>(p.cols(), z0);
  Vector<Scalar> coef(m);
  Vector<Scalar> delta(z.size());
  SolveReport<Scalar> report;
  for (std::size_t k = 0;; ++k) {
    const Scalar alpha = cfg.alpha_at(k);
    // Σ_i w_i (ζ_i − z) for the hyperplane intermediates.
    coef.noalias() = h * z;
    coef -= p.observations();
    coef = (alpha * coef.array() * row_weights.array()).matrix();
    delta.noalias() = -(h.transpose() * coef);

    const Scalar excess = z.template lpNorm<1>() - cfg.l1_budget;
    if (excess > Scalar(0)) {
      const Scalar shift =
          l1_weight * cfg.lambda_at(k) * excess / static_cast<Scalar>(z.size());
      delta -= shift * z.unaryExpr([](Scalar v) { return sign_convention(v); });
    }
    z += delta;
    report.iterations_run += static_cast<std::size_t>(m) + 1;
    detail::require_finite(z, report.iterations_run);
    report.sweeps_run = k + 1;

    const Scalar step = delta.norm();
    if (cfg.record_trace) {
      report.trace.push_back(detail::measure(p, z, report.sweeps_run, Stage::kSimultaneous, step));
    }
    if (cfg.on_sweep) cfg.on_sweep(report.sweeps_run, z);
    const StopDecision d = should_stop(step, report.sweeps_run, cfg);
    if (d.stop) {
      report.termination = d.reason;
      break;
    }
  }
  report.estimate = std::move(z);
  report.wall_time = detail::seconds_since(start);
  return report;
}

template <typename Scalar>
SolveReport<Scalar> ssp_cs(const Problem<Scalar>& p, const SolverConfig<Scalar>& cfg) {
  return ssp_cs(p, cfg, Vector<Scalar>::Zero(p.cols()));
}

}  // namespace cfcs
