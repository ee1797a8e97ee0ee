#pragma once

#include <cmath>
#include <string>
#include <type_traits>
#include <vector>

#include "cfcs/error.hpp"
#include "cfcs/model.hpp"
#include "cfcs/refine.hpp"
#include "cfcs/types.hpp"

namespace cfcs {

struct OmpConfig {
  Index max_support = 0;  // N <= m
  double residual_tolerance = 0.0;
};

template <typename Scalar>
struct OmpResult {
  Vector<Scalar> estimate;
  std::vector<Index> support;          // in selection order
  std::vector<Scalar> residual_norms;  // ‖r‖₂ after each selection
};

/// Orthogonal matching pursuit.
///
/// Each iteration selects the unselected column with the largest |⟨h_j, r⟩|
/// (lowest index on ties; columns are not normalized), orthogonalizes it
/// against the selected ones with two passes of classical Gram-Schmidt and
/// removes its component from the residual. The coefficients are the
/// least-squares fit of y on the final support.
template <typename Scalar>
OmpResult<Scalar> omp_detailed(const Problem<Scalar>& p, const OmpConfig& cfg) {
  const Index m = p.rows();
  const Index n = p.cols();
  if (cfg.max_support < 0 || cfg.max_support > m) {
    throw UsageError("OMP support size N = " + std::to_string(cfg.max_support) +
                     " must lie in [0, m = " + std::to_string(m) + "]");
  }
  if (!(cfg.residual_tolerance >= 0)) throw UsageError("residual tolerance must be >= 0");

  const auto& h = p.matrix().entries();
  const Vector<Scalar> col_norms = h.colwise().norm().transpose();

  OmpResult<Scalar> out;
  out.estimate = Vector<Scalar>::Zero(n);
  Vector<Scalar> r = p.observations();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> q(m, cfg.max_support);
  std::vector<bool> selected(static_cast<std::size_t>(n), false);
  Vector<Scalar> corr(n);
  Vector<Scalar> v(m);

  for (Index k = 0; k < cfg.max_support; ++k) {
    if (r.norm() <= Scalar(cfg.residual_tolerance)) break;
    corr.noalias() = h.transpose() * r;

    Index best = -1;
    Scalar best_abs = -1;
    for (Index j = 0; j < n; ++j) {
      if (selected[static_cast<std::size_t>(j)]) continue;
      const Scalar a = std::abs(corr(j));
      if (a > best_abs) {
        best_abs = a;
        best = j;
      }
    }
    if (best < 0) break;
    if (col_norms(best) == Scalar(0)) {
      throw DegenerateConstraintError("OMP selected zero column " + std::to_string(best), best);
    }

    v = h.col(best);
    for (int pass = 0; pass < 2; ++pass) {
      const auto basis = q.leftCols(k);
      v -= basis * (basis.transpose() * v);
    }
    const Scalar vn = v.norm();
    // Column lies in the span of the current support.
    if (vn <= Scalar(1e-12) * col_norms(best)) break;
    q.col(k) = v / vn;
    r -= q.col(k) * q.col(k).dot(r);

    selected[static_cast<std::size_t>(best)] = true;
    out.support.push_back(best);
    out.residual_norms.push_back(r.norm());
  }

  if (!out.support.empty()) {
    const auto sub = gather_columns(p.matrix(), out.support);
    const Vector<Scalar> beta =
        Eigen::CompleteOrthogonalDecomposition<std::remove_const_t<decltype(sub)>>(sub).solve(p.observations());
    for (std::size_t c = 0; c < out.support.size(); ++c) {
      out.estimate(out.support[c]) = beta(static_cast<Index>(c));
    }
  }
  return out;
}

template <typename Scalar>
Vector<Scalar> omp(const Problem<Scalar>& p, const OmpConfig& cfg) {
  return omp_detailed(p, cfg).estimate;
}

}  // namespace cfcs
