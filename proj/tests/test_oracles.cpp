#include "dstoch/oracles.hpp"

#include "doctest.h"
#include "testutil.hpp"

#include <cmath>

using namespace dstoch;
namespace tu = testutil;

TEST_SUITE_BEGIN("oracles");

TEST_CASE("jacobi diagonalizes trivial and random symmetric matrices") {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << -1.0, 2.0, 0.5;
  const auto eig = oracles::jacobi_eigenvalues(d);
  CHECK(eig.eigenvalues(0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(eig.eigenvalues(1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(eig.eigenvalues(2) == doctest::Approx(-1.0).epsilon(1e-14));

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int n = 2 + static_cast<int>(seed % 7);
    const Matrix a = tu::random_symmetric(n, seed);
    const auto ours = oracles::jacobi_eigenvalues(a);
    const Vector reference = tu::eigen_oracle_eigenvalues(a);
    for (int i = 0; i < n; ++i) {
      CHECK(ours.eigenvalues(i) == doctest::Approx(reference(i)).epsilon(1e-10));
      // eigenpair residual
      const Vector v = ours.eigenvectors.col(i);
      CHECK((a * v - ours.eigenvalues(i) * v).norm() <= 1e-9 * (1.0 + a.norm()));
    }
  }
}

TEST_CASE("jacobi rejects nonsymmetric and nonsquare input") {
  Matrix a(2, 3);
  a.setZero();
  CHECK_THROWS_AS(oracles::jacobi_eigenvalues(a), DimensionMismatch);
  Matrix b(2, 2);
  b << 0.0, 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(oracles::jacobi_eigenvalues(b), InvalidMixingMatrix);
}

TEST_CASE("power iteration radius on reference matrices") {
  CHECK(oracles::power_spectral_radius(Matrix::Identity(4, 4)) ==
        doctest::Approx(1.0).epsilon(1e-8));

  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 0.3, -0.9;
  CHECK(oracles::power_spectral_radius(d) == doctest::Approx(0.9).epsilon(1e-8));

  // complex-pair dominance: rotation scaled by r has radius r
  const double r = 0.85, th = 0.7;
  Matrix rot(2, 2);
  rot << r * std::cos(th), -r * std::sin(th), r * std::sin(th), r * std::cos(th);
  CHECK(oracles::power_spectral_radius(rot) == doctest::Approx(r).epsilon(1e-7));

  Matrix nil(2, 2);
  nil << 0.0, 1.0, 0.0, 0.0;
  CHECK(oracles::power_spectral_radius(nil) == doctest::Approx(0.0));
}

TEST_CASE("power iteration agrees with jacobi on symmetric matrices") {
  for (std::uint64_t seed = 30; seed < 35; ++seed) {
    const Matrix a = 0.3 * tu::random_symmetric(5, seed);
    const double via_jacobi =
        oracles::jacobi_eigenvalues(a).eigenvalues.cwiseAbs().maxCoeff();
    CHECK(oracles::power_spectral_radius(a) ==
          doctest::Approx(via_jacobi).epsilon(1e-8));
  }
}

TEST_CASE("lyapunov iteration fixed points") {
  SUBCASE("a = 0 converges to sigma_w immediately") {
    const Matrix q = tu::random_symmetric(3, 3).cwiseAbs() + Matrix::Identity(3, 3);
    const auto res = oracles::lyapunov_iterate(Matrix::Zero(3, 3), q);
    CHECK((res.sigma - q).norm() <= 1e-12);
  }
  SUBCASE("scalar geometric series") {
    Matrix a(1, 1), q(1, 1);
    a << 0.5;
    q << 1.0;
    const auto res = oracles::lyapunov_iterate(a, q);
    CHECK(res.trace == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(res.residual <= 1e-11);
  }
  SUBCASE("residual contract on random stable systems") {
    for (std::uint64_t seed = 50; seed < 55; ++seed) {
      Matrix a = tu::random_symmetric(4, seed);
      a *= 0.6 / oracles::jacobi_eigenvalues(a).eigenvalues.cwiseAbs().maxCoeff();
      const Matrix q = Matrix::Identity(4, 4);
      const auto res = oracles::lyapunov_iterate(a, q, 1e-12);
      CHECK(res.residual <= 1e-11);  // 10x the tolerance
      CHECK((res.sigma - res.sigma.transpose()).norm() <= 1e-12);
    }
  }
  SUBCASE("unstable A is rejected") {
    Matrix a(1, 1), q(1, 1);
    a << 1.01;
    q << 1.0;
    CHECK_THROWS_AS(oracles::lyapunov_iterate(a, q), UnstableA);
  }
}

TEST_CASE("finite differences match closed-form gradients") {
  const Matrix q = tu::random_symmetric(4, 9) + 5.0 * Matrix::Identity(4, 4);
  const Vector p = tu::random_vector(4, 9);
  const auto f = [&](const Vector& x) { return 0.5 * x.dot(q * x) - p.dot(x); };
  const Vector x = tu::random_vector(4, 10);
  const Vector fd = oracles::fd_gradient(f, x, 1e-6 * (1.0 + x.norm()));
  CHECK((fd - (q * x - p)).norm() <= 1e-5 * (1.0 + (q * x - p).norm()));

  const auto constant = [](const Vector&) { return 3.14; };
  CHECK(oracles::fd_gradient(constant, x, 1e-6).norm() == doctest::Approx(0.0));
}

TEST_CASE("monte-carlo stationary statistics") {
  SUBCASE("zero-noise chain gives 0 +- 0") {
    const auto make_chain = [](int) {
      double x = 1.0;
      return [x]() mutable {
        x *= 0.5;
        return x * x;
      };
    };
    const auto est = oracles::mc_stationary_variance(make_chain, 200, 50, 4);
    CHECK(est.mean == doctest::Approx(0.0));
    CHECK(est.stderr_of_mean == doctest::Approx(0.0));
  }
  SUBCASE("AR(1) second moment matches 1/(1-a^2)") {
    const auto make_chain = [](int r) {
      CounterRng rng({123, static_cast<std::uint64_t>(r), 0}, 0);
      double x = 0.0;
      return [rng, x]() mutable {
        x = 0.5 * x + rng.gaussian();
        return x * x;
      };
    };
    const auto est = oracles::mc_stationary_variance(make_chain, 500, 2000, 64);
    CHECK(std::abs(est.mean - 4.0 / 3.0) <= 3.0 * est.stderr_of_mean);
  }
}

TEST_SUITE_END();
