#pragma once

#include "dstoch/netgraph.hpp"
#include "dstoch/objectives.hpp"
#include "dstoch/rng.hpp"

#include <Eigen/Eigenvalues>

namespace dstoch::testutil {

inline Matrix random_symmetric(int n, std::uint64_t seed) {
  CounterRng rng({seed, 0, 0}, 0);
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.gaussian();
  return 0.5 * (a + a.transpose());
}

inline Vector random_vector(int n, std::uint64_t seed) {
  CounterRng rng({seed, 0, 0}, 1);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.gaussian();
  return v;
}

// The shared noisy-quadratic instance used by regression values and the
// robustness-ordering checks: a 3-ring with lambda_N > 0 after shifting.
struct ReferenceQuadratic {
  ObjectiveSuite suite;
  MixingMatrix w;
};

inline ReferenceQuadratic make_reference_quadratic() {
  return {make_random_quadratic_suite(3, 2, 1.0, 10.0, 42),
          shift_mixing(build_mixing(Topology::ring(3)), 1.0)};
}

// Sorted-descending eigenvalues via Eigen, the independent cross-check for
// the hand-rolled Jacobi.
inline Vector eigen_oracle_eigenvalues(const Ref<const Matrix>& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  return es.eigenvalues().reverse();
}

}  // namespace dstoch::testutil
