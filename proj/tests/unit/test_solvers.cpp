#include <doctest.h>

#include <memory>

#include "cfcs/presets.hpp"
#include "cfcs/scenarios.hpp"
#include "cfcs/solvers.hpp"
#include "../helpers.hpp"
#include "../oracles.hpp"

using namespace cfcs;

namespace {

SolverConfig<double> plain(double alpha, double lambda, double eps, std::size_t k, double gamma) {
  SolverConfig<double> cfg;
  cfg.alpha = constant_schedule(alpha);
  cfg.lambda = constant_schedule(lambda);
  cfg.l1_budget = eps;
  cfg.max_iterations = k;
  cfg.step_tolerance = gamma;
  return cfg;
}

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

ConstraintPtr<double> halfspace(VectorXd h, double b) {
  return std::make_shared<HalfspaceConstraint<double>>(std::move(h), b);
}
ConstraintPtr<double> hyperplane(VectorXd h, double b) {
  return std::make_shared<HyperplaneConstraint<double>>(std::move(h), b);
}

}  // namespace

TEST_SUITE("solvers") {
  TEST_CASE("config validation and schedule bounds") {
    auto cfg = plain(1.0, 1.0, 1.0, 10, 0.1);
    CHECK_NOTHROW(cfg.validate());
    cfg.alpha = constant_schedule(2.0);
    CHECK_THROWS_AS(cfg.alpha_at(0), UsageError);
    cfg.alpha = constant_schedule(1e-7);
    CHECK_THROWS_AS(cfg.alpha_at(0), UsageError);
    cfg = plain(1.0, 1.0, 0.0, 10, 0.1);
    CHECK_THROWS_AS(cfg.validate(), UsageError);
    cfg = plain(1.0, 1.0, 1.0, 10, 0.1);
    cfg.block_size = 0;
    CHECK_THROWS_AS(cfg.validate(), UsageError);
  }

  TEST_CASE("paper schedule stays inside the relaxation interval") {
    for (Index n : {1024, 2048, 6144, 20000}) {
      const auto cfg = paper_small().config(n);
      for (std::size_t k : {0u, 1u, 2000u, 2001u, 4999u, 100000u}) {
        const double l = cfg.lambda_at(k);
        CHECK(l >= kRelaxationMargin);
        CHECK(l <= 2.0 - kRelaxationMargin);
      }
    }
    CHECK(PaperSchedule::lambda_over_n(2000) == doctest::Approx(1.0 / 4900));
    CHECK(PaperSchedule::lambda_over_n(2001) == doctest::Approx(1e-4 / 1.2001));
    CHECK(paper_for(512, 1024).step_tolerance == 0.01);
    CHECK(paper_for(1024, 2048).step_tolerance == 0.5);
  }

  TEST_CASE("ssp weights") {
    auto cfg = plain(1.0, 1.0, 1.0, 10, 0.1);
    CHECK(cfg.weights_for(4).sum() == doctest::Approx(1.0).epsilon(1e-12));
    cfg.ssp_weights = vec({0.5, 0.5});
    CHECK_THROWS_AS(cfg.weights_for(3), UsageError);
    cfg.ssp_weights = vec({0.5, 0.6});
    CHECK_THROWS_AS(cfg.weights_for(2), UsageError);
    cfg.ssp_weights = vec({1.5, -0.5});
    CHECK_THROWS_AS(cfg.weights_for(2), UsageError);
  }

  TEST_CASE("should_stop") {
    const auto cfg = plain(1.0, 1.0, 1.0, 10, 0.01);
    const VectorXd a = vec({1, 2});
    auto d = should_stop(a, a, 1, cfg);
    CHECK(d.stop);
    CHECK(d.reason == Termination::kStepTolerance);
    d = should_stop(a, vec({5, 5}), 10, cfg);
    CHECK(d.stop);
    CHECK(d.reason == Termination::kMaxIterations);
    d = should_stop(vec({0, 0}), vec({0.3, 0.4}), 3, cfg);
    CHECK_FALSE(d.stop);
    // Both conditions: the step tolerance is reported.
    CHECK(should_stop(a, a, 10, cfg).reason == Termination::kStepTolerance);
    CHECK_THROWS_AS(should_stop(a, vec({1, 2, 3}), 1, cfg), UsageError);
  }

  TEST_CASE("csp_generic on two half-planes reaches feasibility") {
    const std::vector<ConstraintPtr<double>> cs{halfspace(vec({1, 0}), 0.0),
                                                halfspace(vec({0, 1}), 0.0)};
    const auto r = csp_generic(cs, vec({1, 1}), plain(1.0, 1.0, 1.0, 100, 1e-9));
    CHECK(std::max(r.estimate(0), r.estimate(1)) <= 1e-6);
    CHECK(r.termination == Termination::kFeasible);
  }

  TEST_CASE("csp_generic leaves a feasible start unchanged") {
    const std::vector<ConstraintPtr<double>> cs{halfspace(vec({1, 1}), 5.0)};
    const VectorXd z0 = vec({1, 2});
    const auto r = csp_generic(cs, z0, plain(1.0, 1.0, 1.0, 100, 1e-9));
    CHECK(r.estimate == z0);
    CHECK(r.sweeps_run == 1);
    CHECK(r.termination == Termination::kFeasible);
  }

  TEST_CASE("csp_generic cycles on inconsistent parallel hyperplanes") {
    const std::vector<ConstraintPtr<double>> cs{hyperplane(vec({1, 0}), 0.0),
                                                hyperplane(vec({1, 0}), 1.0)};
    std::vector<double> after;
    auto cfg = plain(1.0, 1.0, 1.0, 100, 1e-6);
    cfg.on_sweep = [&](std::size_t, const VectorXd& z) { after.push_back(z(0)); };
    const auto r = csp_generic(cs, vec({0.5, 3}), cfg);
    CHECK(r.termination == Termination::kMaxIterations);
    CHECK(r.sweeps_run == 100);
    // Each sweep moves 0 → 1 by a full unit; the amplitude stays at 1.
    for (std::size_t k = 1; k < after.size(); ++k) CHECK(after[k] == doctest::Approx(1.0));
    CHECK(r.estimate(1) == 3.0);
  }

  TEST_CASE("ssp_generic settles between inconsistent parallel hyperplanes") {
    const std::vector<ConstraintPtr<double>> cs{hyperplane(vec({1, 0}), 0.0),
                                                hyperplane(vec({1, 0}), 1.0)};
    const auto r = ssp_generic(cs, vec({0.9, 0}), plain(1.0, 1.0, 1.0, 1000, 1e-10));
    CHECK(r.termination == Termination::kStepTolerance);
    CHECK(r.estimate(0) == doctest::Approx(0.5));
  }

  TEST_CASE("ssp_generic with one constraint follows csp_generic") {
    const std::vector<ConstraintPtr<double>> cs{halfspace(vec({1, 2, -1}), -1.0)};
    auto cfg = plain(0.7, 1.0, 1.0, 1, 1e-12);
    VectorXd a = vec({3, 1, 2});
    VectorXd b = a;
    for (int k = 0; k < 6; ++k) {
      a = csp_generic(cs, a, cfg).estimate;
      b = ssp_generic(cs, b, cfg).estimate;
      CHECK((a - b).norm() <= 1e-14);
    }
  }

  TEST_CASE("csp_cs on an identity system") {
    const auto p = testing::small_problem(RowMajorMatrixXd::Identity(4, 4), vec({1, 0, 0, 2}));
    const auto r = csp_cs(p, plain(1.0, 1.0, 10.0, 5, 1e-9));
    CHECK((r.estimate - vec({1, 0, 0, 2})).norm() <= 1e-6);
    CHECK(r.sweeps_run <= 5);
    CHECK(r.trace.size() == r.sweeps_run);
    CHECK(r.iterations_run == 5 * r.sweeps_run);
  }

  TEST_CASE("csp_cs on an inconsistent 2x3 system keeps fluctuating") {
    RowMajorMatrixXd h(2, 3);
    h << 1, 0, 0, 0, 1, 0;
    const auto p = testing::small_problem(h, vec({1, 1}));
    const auto r = csp_cs(p, plain(1.0, 1.0, 0.5, 300, 1e-9));
    CHECK(r.termination == Termination::kMaxIterations);
    for (std::size_t k = 100; k < r.trace.size(); ++k) {
      CHECK(r.trace[k].l1_norm > 0.5);
      CHECK(r.trace[k].residual_l2 < 1.5);
      CHECK(r.trace[k].step_l2 > 1e-3);
    }
  }

  TEST_CASE("zero rows and overflow are reported") {
    RowMajorMatrixXd h = RowMajorMatrixXd::Identity(3, 3);
    h.row(1).setZero();
    const auto p = testing::small_problem(h, vec({1, 0, 1}));
    CHECK_THROWS_AS(csp_cs(p, plain(1.0, 1.0, 1.0, 5, 1e-9)), DegenerateConstraintError);
    CHECK_THROWS_AS(ssp_cs(p, plain(1.0, 1.0, 1.0, 5, 1e-9)), DegenerateConstraintError);

    RowMajorMatrixXd tiny(1, 2);
    tiny << 1e-160, 1e-160;
    const auto q = testing::small_problem(tiny, VectorXd::Constant(1, 1e300));
    try {
      csp_cs(q, plain(1.8, 1.0, 1.0, 5, 1e-9));
      FAIL("expected divergence");
    } catch (const DivergenceError& e) {
      CHECK(e.iteration() >= 1);
    }
    CHECK_THROWS_AS(csp_cs(p, plain(1.0, 1.0, 1.0, 5, 1e-9), VectorXd::Zero(4)), UsageError);
  }

  TEST_CASE("ssp_cs on an identity system with uniform weights") {
    const auto p = testing::small_problem(RowMajorMatrixXd::Identity(2, 2), vec({1, 1}));
    const auto r = ssp_cs(p, plain(1.0, 1.0, 10.0, 20000, 1e-13));
    CHECK(r.termination == Termination::kStepTolerance);
    CHECK((r.estimate - vec({1, 1})).norm() <= 1e-6);
  }

  TEST_CASE("kaczmarz examples") {
    RowMajorMatrixXd h(1, 2);
    h << 1, 1;
    auto r = kaczmarz(testing::small_problem(h, vec({2})), plain(1.0, 1.0, 1.0, 10, 1e-12));
    CHECK((r.estimate - vec({1, 1})).norm() <= 1e-15);
    CHECK(r.sweeps_run == 2);
    r = kaczmarz(testing::small_problem(RowMajorMatrixXd::Identity(3, 3), vec({1, 2, 3})),
                 plain(1.0, 1.0, 1.0, 10, 1e-12));
    CHECK((r.estimate - vec({1, 2, 3})).norm() <= 1e-10);
  }

  TEST_CASE("kaczmarz converges to the minimum-norm solution") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto c = testing::consistent_problem(100 + seed, 10, 20);
      const auto& p = c.problem;
      const auto ref = oracle::min_norm_solution(oracle::to_mat(p.matrix().entries()),
                                                 oracle::to_vec(p.observations()));
      const auto r = kaczmarz(p, plain(1.0, 1.0, 1.0, 200000, 1e-14));
      double err = 0.0, nrm = 0.0;
      for (Index j = 0; j < p.cols(); ++j) {
        err += std::pow(r.estimate(j) - ref[static_cast<std::size_t>(j)], 2);
        nrm += std::pow(ref[static_cast<std::size_t>(j)], 2);
      }
      CHECK(std::sqrt(err / nrm) <= 1e-6);
    }
  }

  TEST_CASE("kaczmarz iterates stay in the row space") {
    const auto c = testing::consistent_problem(7, 6, 15);
    const auto& p = c.problem;
    const Eigen::MatrixXd h = p.matrix().entries();
    // Orthonormal basis of the row space.
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(h.transpose());
    const Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(15, 6);
    auto cfg = plain(1.3, 1.0, 1.0, 50, 1e-14);
    cfg.on_sweep = [&](std::size_t, const VectorXd& z) {
      const VectorXd off = z - basis * (basis.transpose() * z);
      CHECK(off.norm() <= 1e-12 * std::max(1.0, z.norm()));
    };
    kaczmarz(p, cfg);
  }

  TEST_CASE("csp_cs is Fejer monotone on consistent problems") {
    Rng sizes(41);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Index m = 2 + static_cast<Index>(sizes.below(48));
      const Index n = m + 1 + static_cast<Index>(sizes.below(static_cast<std::uint64_t>(100 - m)));
      const auto c = testing::consistent_problem(200 + seed, m, n);
      for (double alpha : {0.5, 1.0, 1.8}) {
        auto cfg = plain(alpha, alpha, 1.2 * c.feasible.lpNorm<1>(), 200, 1e-12);
        double last = c.feasible.norm();
        cfg.on_sweep = [&](std::size_t, const VectorXd& z) {
          const double d = (z - c.feasible).norm();
          CHECK(d <= last + 1e-10);
          last = d;
        };
        csp_cs(c.problem, cfg);
      }
    }
  }

  TEST_CASE("block size does not change the result") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      ScenarioSpec spec;
      spec.m = 60;
      spec.n = 120;
      spec.sparsity = 5;
      spec.noise_sigma = 0.01;
      spec.seed = seed;
      const Problemd p = gen_gaussian_sparse(spec);
      auto cfg = paper_small().config(p.cols());
      cfg.max_iterations = 50;
      const auto ref = csp_cs(p, cfg);
      for (std::size_t l : {4u, 32u, 1000u}) {
        cfg.block_size = l;
        const auto r = csp_cs(p, cfg);
        CHECK(r.estimate == ref.estimate);
        CHECK(r.sweeps_run == ref.sweeps_run);
        CHECK(r.iterations_run == ref.iterations_run);
      }
    }
  }

  TEST_CASE("solvers are deterministic") {
    const auto c = testing::consistent_problem(5, 20, 40);
    const auto cfg = plain(1.8, 0.5, 1.0, 30, 1e-9);
    for (int variant = 0; variant < 3; ++variant) {
      auto run = [&] {
        if (variant == 0) return csp_cs(c.problem, cfg);
        if (variant == 1) return ssp_cs(c.problem, cfg);
        return kaczmarz(c.problem, cfg);
      };
      const auto a = run();
      const auto b = run();
      CHECK(a.estimate == b.estimate);
      CHECK(a.sweeps_run == b.sweeps_run);
      REQUIRE(a.trace.size() == b.trace.size());
      for (std::size_t k = 0; k < a.trace.size(); ++k) {
        CHECK(a.trace[k].residual_l2 == b.trace[k].residual_l2);
        CHECK(a.trace[k].step_l2 == b.trace[k].step_l2);
      }
    }
  }

  TEST_CASE("step-tolerance termination implies the last step is small") {
    const auto c = testing::consistent_problem(6, 10, 20);
    const auto cfg = plain(1.0, 1.0, 100.0, 10000, 1e-6);
    for (const auto& r : {csp_cs(c.problem, cfg), ssp_cs(c.problem, cfg), kaczmarz(c.problem, cfg)}) {
      CHECK(r.termination == Termination::kStepTolerance);
      CHECK(r.trace.size() == r.sweeps_run);
      CHECK(r.trace.back().step_l2 <= cfg.step_tolerance);
    }
  }
}
