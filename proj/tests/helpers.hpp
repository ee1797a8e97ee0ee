#pragma once

#include <cstdint>

#include "cfcs/model.hpp"
#include "cfcs/random.hpp"

namespace testing {

inline cfcs::RowMajorMatrixXd gaussian_matrix(cfcs::Rng& rng, cfcs::Index m, cfcs::Index n) {
  cfcs::RowMajorMatrixXd h(m, n);
  for (cfcs::Index i = 0; i < m; ++i) {
    for (cfcs::Index j = 0; j < n; ++j) h(i, j) = rng.normal();
  }
  return h;
}

inline cfcs::VectorXd gaussian_vector(cfcs::Rng& rng, cfcs::Index n) {
  cfcs::VectorXd v(n);
  for (cfcs::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

/// y = H q for a random q, so q is a known feasible point.
struct Consistent {
  cfcs::Problemd problem;
  cfcs::VectorXd feasible;
};

inline Consistent consistent_problem(std::uint64_t seed, cfcs::Index m, cfcs::Index n) {
  cfcs::Rng rng(seed);
  cfcs::RowMajorMatrixXd h = gaussian_matrix(rng, m, n);
  cfcs::VectorXd q = gaussian_vector(rng, n);
  cfcs::VectorXd y = h * q;
  return {cfcs::Problemd(cfcs::Matrixd(std::move(h)), std::move(y)), std::move(q)};
}

inline cfcs::Problemd small_problem(cfcs::RowMajorMatrixXd h, cfcs::VectorXd y) {
  return cfcs::Problemd(cfcs::Matrixd(std::move(h)), std::move(y));
}

}  // namespace testing
