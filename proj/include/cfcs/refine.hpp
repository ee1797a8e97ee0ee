#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <type_traits>
#include <vector>

#include "cfcs/error.hpp"
#include "cfcs/model.hpp"
#include "cfcs/solvers.hpp"
#include "cfcs/types.hpp"

namespace cfcs {

enum class RefineMode { kNone, kGaussFinal, kGaussAlternating, kCspThenSsp };

inline const char* to_string(RefineMode mode) {
  switch (mode) {
    case RefineMode::kNone: return "none";
    case RefineMode::kGaussFinal: return "gauss-final";
    case RefineMode::kGaussAlternating: return "gauss-alternating";
    case RefineMode::kCspThenSsp: return "csp-then-ssp";
  }
  return "?";
}

struct RefinePolicy {
  RefineMode mode = RefineMode::kNone;
  Index max_support = 0;                // N, must be < m
  std::size_t alternation_period = 50;  // sweeps between least-squares stages
  std::size_t ssp_tail_iterations = 0;
};

/// Indices of the N largest |x_j|, ties broken toward the lower index.
/// Returned in that selection order.
template <typename Derived>
std::vector<Index> largest_magnitude_support(const Eigen::MatrixBase<Derived>& x, Index count) {
  if (count < 0 || count > x.size()) throw UsageError("support size out of range");
  std::vector<Index> idx(static_cast<std::size_t>(x.size()));
  std::iota(idx.begin(), idx.end(), Index(0));
  auto by_magnitude = [&x](Index a, Index b) {
    const auto ma = std::abs(x(a));
    const auto mb = std::abs(x(b));
    return ma > mb || (ma == mb && a < b);
  };
  std::partial_sort(idx.begin(), idx.begin() + count, idx.end(), by_magnitude);
  idx.resize(static_cast<std::size_t>(count));
  return idx;
}

/// Columns of H indexed by `support`, in the given order.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gather_columns(
    const DenseMatrix<Scalar>& h, const std::vector<Index>& support) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(h.rows(),
                                                            static_cast<Index>(support.size()));
  for (std::size_t c = 0; c < support.size(); ++c) out.col(static_cast<Index>(c)) = h.entries().col(support[c]);
  return out;
}

/// Least-squares refit of x̂ on its N most significant coordinates.
///
/// β minimizes ‖y − Ĥβ‖₂ where Ĥ holds the selected columns; it is computed
/// with a complete orthogonal decomposition, which yields the minimum-norm
/// solution when Ĥ is rank deficient. Coordinates outside the support are
/// exactly zero.
template <typename Scalar, typename Derived>
Vector<Scalar> ls_refine(const Problem<Scalar>& p, const Eigen::MatrixBase<Derived>& xhat,
                         Index max_support) {
  if (xhat.size() != p.cols()) {
    throw UsageError("estimate length " + std::to_string(xhat.size()) +
                     " does not match column count " + std::to_string(p.cols()));
  }
  if (max_support < 0) throw UsageError("support size must be >= 0");
  if (max_support >= p.rows()) {
    throw UsageError("support size N = " + std::to_string(max_support) +
                     " must be smaller than m = " + std::to_string(p.rows()));
  }
  Vector<Scalar> out = Vector<Scalar>::Zero(p.cols());
  if (max_support == 0) return out;

  const std::vector<Index> support = largest_magnitude_support(xhat, max_support);
  const auto sub = gather_columns(p.matrix(), support);
  const Vector<Scalar> beta =
      Eigen::CompleteOrthogonalDecomposition<std::remove_const_t<decltype(sub)>>(sub).solve(p.observations());
  for (std::size_t c = 0; c < support.size(); ++c) out(support[c]) = beta(static_cast<Index>(c));
  return out;
}

/// The same least-squares stage, applied to the output of any method.
template <typename Scalar, typename Derived>
Vector<Scalar> ls_augment(const Problem<Scalar>& p, const Eigen::MatrixBase<Derived>& xhat,
                          Index max_support) {
  return ls_refine(p, xhat, max_support);
}

namespace detail {

inline void require_mode(const RefinePolicy& policy, RefineMode expected) {
  if (policy.mode != expected) {
    throw UsageError(std::string("refine policy mode is ") + to_string(policy.mode) +
                     ", expected " + to_string(expected));
  }
}

template <typename Scalar>
void require_support_size(const Problem<Scalar>& p, const RefinePolicy& policy) {
  if (policy.max_support >= p.rows()) {
    throw UsageError("support size N = " + std::to_string(policy.max_support) +
                     " must be smaller than m = " + std::to_string(p.rows()));
  }
}

template <typename Scalar>
void append_ls_stage(const Problem<Scalar>& p, SolveReport<Scalar>& report,
                     Vector<Scalar> refined, bool record) {
  const Scalar step = (refined - report.estimate).norm();
  report.estimate = std::move(refined);
  if (record) {
    report.trace.push_back(
        detail::measure(p, report.estimate, report.sweeps_run, Stage::kLeastSquares, step));
  }
}

}  // namespace detail

/// CSP-CS to its stopping rule, then one least-squares stage.
template <typename Scalar>
SolveReport<Scalar> gauss_csp(const Problem<Scalar>& p, const SolverConfig<Scalar>& cfg,
                              const RefinePolicy& policy) {
  detail::require_mode(policy, RefineMode::kGaussFinal);
  detail::require_support_size(p, policy);
  const auto start = detail::Clock::now();
  SolveReport<Scalar> report = csp_cs(p, cfg);
  detail::append_ls_stage(p, report, ls_refine(p, report.estimate, policy.max_support),
                          cfg.record_trace);
  report.wall_time = detail::seconds_since(start);
  return report;
}

/// CSP-CS with a least-squares stage every `alternation_period` sweeps and a
/// terminal one after the stopping rule fires.
template <typename Scalar>
SolveReport<Scalar> gauss_csp_alternating(const Problem<Scalar>& p,
                                          const SolverConfig<Scalar>& cfg,
                                          const RefinePolicy& policy) {
  detail::require_mode(policy, RefineMode::kGaussAlternating);
  detail::require_support_size(p, policy);
  if (policy.alternation_period < 1) throw UsageError("alternation period must be >= 1");
  const auto start = detail::Clock::now();

  const detail::SweepHook<Scalar> hook = [&](std::size_t sweeps, Vector<Scalar>& z,
                                             SolveReport<Scalar>& report) {
    if (sweeps % policy.alternation_period != 0) return;
    Vector<Scalar> refined = ls_refine(p, z, policy.max_support);
    if (cfg.record_trace) {
      report.trace.push_back(detail::measure(p, refined, sweeps, Stage::kLeastSquares,
                                             Scalar((refined - z).norm())));
    }
    z = std::move(refined);
  };
  SolveReport<Scalar> report =
      detail::cyclic_sweeps(p, cfg, Vector<Scalar>(Vector<Scalar>::Zero(p.cols())), true, hook);
  detail::append_ls_stage(p, report, ls_refine(p, report.estimate, policy.max_support),
                          cfg.record_trace);
  report.wall_time = detail::seconds_since(start);
  return report;
}

/// CSP-CS to termination followed by a fixed number of SSP-CS iterations
/// started from the CSP estimate.
template <typename Scalar>
SolveReport<Scalar> csp_then_ssp(const Problem<Scalar>& p, const SolverConfig<Scalar>& cfg,
                                 const RefinePolicy& policy) {
  detail::require_mode(policy, RefineMode::kCspThenSsp);
  if (policy.ssp_tail_iterations < 1) throw UsageError("SSP tail needs at least one iteration");
  const auto start = detail::Clock::now();

  SolveReport<Scalar> report = csp_cs(p, cfg);
  SolverConfig<Scalar> tail_cfg = cfg;
  tail_cfg.max_iterations = policy.ssp_tail_iterations;
  const std::size_t offset = report.sweeps_run;
  if (cfg.on_sweep) {
    tail_cfg.on_sweep = [&cfg, offset](std::size_t s, const Vector<Scalar>& z) {
      cfg.on_sweep(offset + s, z);
    };
  }
  SolveReport<Scalar> tail = ssp_cs(p, tail_cfg, report.estimate);

  for (auto rec : tail.trace) {
    rec.sweep += offset;
    report.trace.push_back(rec);
  }
  report.estimate = std::move(tail.estimate);
  report.iterations_run += tail.iterations_run;
  report.sweeps_run += tail.sweeps_run;
  report.termination = tail.termination;
  report.wall_time = detail::seconds_since(start);
  return report;
}

}  // namespace cfcs
