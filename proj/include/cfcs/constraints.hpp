#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>

#include "cfcs/error.hpp"
#include "cfcs/types.hpp"

namespace cfcs {

/// Sign with sign(0) = +1. Never returns zero.
template <typename Scalar>
constexpr Scalar sign_convention(Scalar v) noexcept {
  return v >= Scalar(0) ? Scalar(1) : Scalar(-1);
}

template <typename Scalar>
struct Subgradient {
  Vector<Scalar> direction;
  Scalar squared_norm;
};

/// Componentwise sign_convention(z). Every entry is ±1, so the squared
/// norm is exactly n.
template <typename Derived>
Subgradient<typename Derived::Scalar> l1_subgradient(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> t = z.unaryExpr([](Scalar v) { return sign_convention(v); });
  return {std::move(t), static_cast<Scalar>(z.size())};
}

/// A closed convex set {z : f(z) <= 0} described by f and a subgradient
/// selection.
template <typename Scalar>
class ConvexConstraint {
 public:
  virtual ~ConvexConstraint() = default;
  virtual Index dimension() const = 0;
  virtual Scalar value(const Vector<Scalar>& z) const = 0;
  virtual Subgradient<Scalar> subgradient(const Vector<Scalar>& z) const = 0;
};

template <typename Scalar>
using ConstraintPtr = std::shared_ptr<const ConvexConstraint<Scalar>>;

/// {z : ⟨h, z⟩ = target}, written as f(z) = |⟨h, z⟩ − target| <= 0.
template <typename Scalar>
class HyperplaneConstraint final : public ConvexConstraint<Scalar> {
 public:
  template <typename Derived>
  HyperplaneConstraint(const Eigen::MatrixBase<Derived>& normal, Scalar target)
      : normal_(normal), target_(target), squared_norm_(normal_.squaredNorm()) {
    if (!(squared_norm_ > Scalar(0))) {
      throw DegenerateConstraintError("hyperplane normal has zero norm", 0);
    }
  }

  Index dimension() const override { return normal_.size(); }

  /// ⟨h, z⟩ − target (signed).
  Scalar signed_residual(const Vector<Scalar>& z) const { return normal_.dot(z) - target_; }

  Scalar value(const Vector<Scalar>& z) const override { return std::abs(signed_residual(z)); }

  Subgradient<Scalar> subgradient(const Vector<Scalar>& z) const override {
    return {sign_convention(signed_residual(z)) * normal_, squared_norm_};
  }

  const Vector<Scalar>& normal() const noexcept { return normal_; }
  Scalar target() const noexcept { return target_; }
  Scalar squared_norm() const noexcept { return squared_norm_; }

 private:
  Vector<Scalar> normal_;
  Scalar target_;
  Scalar squared_norm_;
};

/// {z : ⟨h, z⟩ <= bound}.
template <typename Scalar>
class HalfspaceConstraint final : public ConvexConstraint<Scalar> {
 public:
  template <typename Derived>
  HalfspaceConstraint(const Eigen::MatrixBase<Derived>& normal, Scalar bound)
      : normal_(normal), bound_(bound) {}

  Index dimension() const override { return normal_.size(); }
  Scalar value(const Vector<Scalar>& z) const override { return normal_.dot(z) - bound_; }
  Subgradient<Scalar> subgradient(const Vector<Scalar>&) const override {
    return {normal_, normal_.squaredNorm()};
  }

 private:
  Vector<Scalar> normal_;
  Scalar bound_;
};

/// {z : ‖z‖₁ − budget <= 0}.
template <typename Scalar>
class L1BallConstraint final : public ConvexConstraint<Scalar> {
 public:
  L1BallConstraint(Scalar budget, Index dimension) : budget_(budget), dimension_(dimension) {
    if (!(budget_ > Scalar(0))) throw UsageError("l1 budget must be > 0");
    if (dimension_ < 1) throw UsageError("l1 ball dimension must be >= 1");
  }

  Index dimension() const override { return dimension_; }
  Scalar budget() const noexcept { return budget_; }

  Scalar value(const Vector<Scalar>& z) const override {
    return z.template lpNorm<1>() - budget_;
  }
  Subgradient<Scalar> subgradient(const Vector<Scalar>& z) const override {
    return l1_subgradient(z);
  }

 private:
  Scalar budget_;
  Index dimension_;
};

namespace detail {

template <typename Scalar>
void check_relaxation(Scalar r, const char* name) {
  if (!(r > Scalar(0) && r < Scalar(2))) {
    throw UsageError(std::string(name) + " must lie in (0, 2), got " + std::to_string(r));
  }
}

}  // namespace detail

// In-place kernels shared by the solvers. No argument checking.

/// z ← z − α (⟨h, z⟩ − target) / ‖h‖² · h. Returns the step coefficient.
template <typename RowDerived, typename Scalar>
inline Scalar relax_onto_hyperplane(const Eigen::MatrixBase<RowDerived>& h, Scalar target,
                                    Scalar squared_norm, Scalar alpha, Vector<Scalar>& z) {
  const Scalar coef = alpha * (h.dot(z.transpose()) - target) / squared_norm;
  z.noalias() -= coef * h.transpose();
  return coef;
}

/// z ← z − λ (‖z‖₁ − ε)/n · sign(z) when ‖z‖₁ > ε; unchanged otherwise.
template <typename Scalar>
inline void relax_into_l1_ball(Scalar budget, Scalar lambda, Vector<Scalar>& z) {
  const Scalar excess = z.template lpNorm<1>() - budget;
  if (!(excess > Scalar(0))) return;
  const Scalar shift = lambda * excess / static_cast<Scalar>(z.size());
  z = z.unaryExpr([shift](Scalar v) { return v - shift * sign_convention(v); });
}

/// Relaxed projection onto a hyperplane. With α = 1 the result lies on it.
template <typename Scalar, typename Derived>
Vector<Scalar> hyperplane_step(const HyperplaneConstraint<Scalar>& c,
                               const Eigen::MatrixBase<Derived>& z, Scalar alpha) {
  if (z.size() != c.dimension()) throw UsageError("vector length does not match constraint");
  detail::check_relaxation(alpha, "alpha");
  Vector<Scalar> out = z;
  relax_onto_hyperplane(c.normal().transpose(), c.target(), c.squared_norm(), alpha, out);
  return out;
}

/// Subgradient step toward the l1 ball, active only when ‖z‖₁ > ε.
template <typename Scalar, typename Derived>
Vector<Scalar> l1_step(const L1BallConstraint<Scalar>& c, const Eigen::MatrixBase<Derived>& z,
                       Scalar lambda) {
  if (z.size() != c.dimension()) throw UsageError("vector length does not match constraint");
  detail::check_relaxation(lambda, "lambda");
  Vector<Scalar> out = z;
  relax_into_l1_ball(c.budget(), lambda, out);
  return out;
}

}  // namespace cfcs
