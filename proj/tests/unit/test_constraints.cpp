#include <doctest.h>

#include "cfcs/constraints.hpp"
#include "../helpers.hpp"

using namespace cfcs;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_SUITE("constraints") {
  TEST_CASE("sign convention") {
    CHECK(sign_convention(0.0) == 1.0);
    CHECK(sign_convention(-0.0) == 1.0);
    CHECK(sign_convention(-3.2) == -1.0);
    CHECK(sign_convention(1e-300) == 1.0);
  }

  TEST_CASE("l1_subgradient examples") {
    auto t = l1_subgradient(VectorXd::Zero(3));
    CHECK(t.direction == VectorXd::Ones(3));
    CHECK(t.squared_norm == 3.0);
    t = l1_subgradient(vec({2, -1}));
    CHECK(t.direction == vec({1, -1}));
    CHECK(t.squared_norm == 2.0);
    // Tight inequality at z0 = (2, -1), z = 0.
    const VectorXd z0 = vec({2, -1});
    const VectorXd z = VectorXd::Zero(2);
    CHECK(z.lpNorm<1>() - z0.lpNorm<1>() == -3.0);
    CHECK(t.direction.dot(z - z0) == -3.0);
  }

  TEST_CASE("l1_subgradient satisfies the subgradient inequality") {
    Rng rng(31);
    for (Index n : {2, 10, 100}) {
      for (int k = 0; k < 1000; ++k) {
        const VectorXd z = testing::gaussian_vector(rng, n);
        VectorXd z0 = testing::gaussian_vector(rng, n);
        if (k % 4 == 0) z0(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)))) = 0.0;
        const auto t = l1_subgradient(z0);
        CHECK(t.squared_norm == doctest::Approx(t.direction.squaredNorm()));
        const double lhs = z.lpNorm<1>() - z0.lpNorm<1>();
        CHECK(lhs >= t.direction.dot(z - z0) - 1e-9);
      }
    }
  }

  TEST_CASE("hyperplane constraint value and subgradient") {
    const HyperplaneConstraint<double> c(vec({3, 4}), 5.0);
    CHECK(c.value(vec({0, 0})) == 5.0);
    CHECK(c.value(vec({3, 4})) == 20.0);
    CHECK(c.subgradient(vec({0, 0})).direction == vec({-3, -4}));
    CHECK(c.subgradient(vec({0, 0})).squared_norm == 25.0);
    CHECK_THROWS_AS(HyperplaneConstraint<double>(VectorXd::Zero(2), 1.0), DegenerateConstraintError);
  }

  TEST_CASE("halfspace and l1 ball values") {
    const HalfspaceConstraint<double> h(vec({1, 0}), 0.0);
    CHECK(h.value(vec({2, 5})) == 2.0);
    CHECK(h.value(vec({-1, 5})) == -1.0);
    const L1BallConstraint<double> b(1.0, 2);
    CHECK(b.value(vec({2, -1})) == 2.0);
    CHECK_THROWS_AS(L1BallConstraint<double>(0.0, 2), UsageError);
  }

  TEST_CASE("hyperplane_step examples") {
    const HyperplaneConstraint<double> e1(vec({1, 0}), 1.0);
    CHECK(hyperplane_step(e1, vec({0, 0}), 1.0) == vec({1, 0}));
    CHECK(hyperplane_step(e1, vec({0, 0}), 1.8).isApprox(vec({1.8, 0})));
    const HyperplaneConstraint<double> c(vec({3, 4}), 0.0);
    CHECK(hyperplane_step(c, vec({3, 4}), 1.0).norm() <= 1e-15);
    CHECK_THROWS_AS(hyperplane_step(c, vec({3, 4}), 2.0), UsageError);
    CHECK_THROWS_AS(hyperplane_step(c, vec({3, 4}), 0.0), UsageError);
    CHECK_THROWS_AS(hyperplane_step(c, vec({3, 4, 5}), 1.0), UsageError);
  }

  TEST_CASE("hyperplane_step with alpha 1 is idempotent") {
    Rng rng(32);
    for (int k = 0; k < 200; ++k) {
      const HyperplaneConstraint<double> c(testing::gaussian_vector(rng, 12), rng.normal());
      const VectorXd once = hyperplane_step(c, testing::gaussian_vector(rng, 12), 1.0);
      const VectorXd twice = hyperplane_step(c, once, 1.0);
      CHECK((twice - once).norm() <= 1e-12 * std::max(1.0, once.norm()));
    }
  }

  TEST_CASE("hyperplane_step is Fejer monotone toward the hyperplane") {
    Rng rng(33);
    for (int k = 0; k < 300; ++k) {
      const Index n = 2 + static_cast<Index>(rng.below(30));
      const VectorXd h = testing::gaussian_vector(rng, n);
      const VectorXd q = testing::gaussian_vector(rng, n);
      const HyperplaneConstraint<double> c(h, h.dot(q));
      const VectorXd z = 3.0 * testing::gaussian_vector(rng, n);
      const double alpha = rng.uniform(1e-3, 2.0 - 1e-3);
      const VectorXd next = hyperplane_step(c, z, alpha);
      CHECK((next - q).norm() <= (z - q).norm() + 1e-10);
    }
  }

  TEST_CASE("l1_step examples") {
    const L1BallConstraint<double> unit(1.0, 2);
    CHECK(l1_step(unit, vec({0.2, 0.1}), 1.0) == vec({0.2, 0.1}));
    CHECK(l1_step(unit, vec({0.2, 0.1}), 0.3) == vec({0.2, 0.1}));
    CHECK(l1_step(unit, vec({2, 0}), 1.0).isApprox(vec({1.5, -0.5})));
    const L1BallConstraint<double> two(2.0, 2);
    CHECK(l1_step(two, vec({1, 1}), 1.0) == vec({1, 1}));
  }

  TEST_CASE("l1_step descent and leakage") {
    Rng rng(34);
    for (int k = 0; k < 500; ++k) {
      const Index n = 2 + static_cast<Index>(rng.below(40));
      VectorXd z = testing::gaussian_vector(rng, n);
      if (k % 3 == 0) {
        for (Index i = 0; i < n; i += 2) z(i) = 0.0;
      }
      const double eps = rng.uniform(0.0, 0.5) * z.lpNorm<1>() + 1e-6;
      const double lambda = rng.uniform(1e-3, 2.0 - 1e-3);
      const L1BallConstraint<double> c(eps, n);
      const VectorXd next = l1_step(c, z, lambda);
      const double excess = z.lpNorm<1>() - eps;
      const double shift = lambda * excess / static_cast<double>(n);
      // Each coordinate moves by exactly `shift`, so ‖z'‖₁ <= ‖z‖₁ + λ(‖z‖₁ − ε).
      CHECK(next.lpNorm<1>() <= z.lpNorm<1>() + lambda * excess + 1e-12);
      if ((z.array().abs() >= shift).all()) CHECK(next.lpNorm<1>() < z.lpNorm<1>());
    }
  }

  TEST_CASE("l1_step leakage can exceed the per-coordinate shift") {
    // sign(0) = +1 moves every zero coordinate by the full shift.
    const L1BallConstraint<double> c(1e-12, 4);
    const VectorXd z = vec({1, 0, 0, 0});
    const VectorXd next = l1_step(c, z, 1.9);
    const double shift = 1.9 * (1.0 - 1e-12) / 4.0;
    CHECK(next.lpNorm<1>() > z.lpNorm<1>() + shift);
    CHECK(next.lpNorm<1>() == doctest::Approx(1.0 + 2.0 * shift));
  }
}
