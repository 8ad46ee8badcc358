#include "dstoch/quadratic_exact.hpp"

#include "dstoch/algorithms.hpp"
#include "dstoch/linalg.hpp"
#include "dstoch/oracles.hpp"
#include "doctest.h"
#include "testutil.hpp"

#include <Eigen/SVD>

#include <cmath>

using namespace dstoch;
namespace tu = testutil;

namespace {

double spectral_norm(const Matrix& a) {
  return Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
}

Matrix dasg_noise_input(double alpha, double sigma, int d, long nd) {
  Matrix q = Matrix::Zero(2 * nd, 2 * nd);
  q.topLeftCorner(nd, nd) =
      alpha * alpha * sigma * sigma / static_cast<double>(d) * Matrix::Identity(nd, nd);
  return q;
}

}  // namespace

TEST_SUITE_BEGIN("quadratic_exact");

TEST_CASE("iteration-matrix spectrum") {
  SUBCASE("a single scalar node") {
    QuadraticLocal l;
    l.q = Matrix::Identity(1, 1) * 2.0;
    l.p = Vector::Zero(1);
    const auto suite = ObjectiveSuite::quadratic({l});
    const auto w = build_mixing(Topology::disconnected(1));
    const auto s = aq_spectrum(w, 0.1, suite);
    REQUIRE(s.mu_list.size() == 1);
    CHECK(s.mu_list(0) == doctest::Approx(0.8).epsilon(1e-12));
  }
  SUBCASE("identical isotropic curvature commutes with the mixing matrix") {
    QuadraticLocal l;
    l.q = 3.0 * Matrix::Identity(2, 2);
    l.p = Vector::Zero(2);
    const auto suite = ObjectiveSuite::quadratic({l, l, l});
    const auto w = shift_mixing(build_mixing(Topology::ring(3)), 1.0);
    const double alpha = 0.05;
    const auto s = aq_spectrum(w, alpha, suite);
    // every lambda_j of W appears with multiplicity d, shifted by alpha c
    std::size_t at = 0;
    for (int j = 0; j < 3; ++j)
      for (int rep = 0; rep < 2; ++rep, ++at)
        CHECK(s.mu_list(static_cast<long>(at)) ==
              doctest::Approx(w.spectrum(j) - alpha * 3.0).epsilon(1e-10));
  }
  SUBCASE("sandwich bounds hold on random instances") {
    for (std::uint64_t seed = 110; seed < 115; ++seed) {
      const auto suite = make_random_quadratic_suite(4, 2, 1.0, 8.0, seed);
      const auto w = build_mixing(Topology::star(4));
      const auto s = aq_spectrum(w, 0.04, suite);
      CHECK(s.mu_list.maxCoeff() <= 1.0 - 0.04 * suite.mu() + 1e-10);
      CHECK(s.mu_list.minCoeff() >= w.lambda_min - 0.04 * suite.lipschitz() - 1e-10);
    }
  }
  SUBCASE("non-quadratic suites are rejected") {
    const auto logi = make_synthetic_logistic_suite(3, 2, 12, 1.0, 0.05, 1);
    const auto w = build_mixing(Topology::ring(3));
    CHECK_THROWS_AS(aq_spectrum(w, 0.1, logi), NonQuadraticSuite);
  }
}

TEST_CASE("momentum spectral radius from the block eigenvalues") {
  const auto suite = make_random_quadratic_suite(2, 2, 1.0, 10.0, 120);
  const auto w = shift_mixing(build_mixing(Topology::complete(2)), 1.0);

  SUBCASE("momentum zero reduces to the plain radius") {
    const auto s = aq_spectrum(w, 0.03, suite);
    CHECK(rho_dasg_quadratic(s, 0.0) ==
          doctest::Approx(s.mu_list.cwiseAbs().maxCoeff()).epsilon(1e-14));
  }
  SUBCASE("standard momentum in the certified regime gives 1 - sqrt(alpha mu)") {
    // equality needs the spectrum to attain its upper edge 1 - alpha mu,
    // which shared-curvature suites guarantee
    const auto shared = make_shared_quadratic_suite(2, 2, 1.0, 10.0, 121);
    for (double alpha : {0.01, 0.03, w.lambda_min / shared.lipschitz()}) {
      const auto s = aq_spectrum(w, alpha, shared);
      const double beta = nesterov_momentum(alpha, shared.mu());
      CHECK(rho_dasg_quadratic(s, beta) ==
            doctest::Approx(1.0 - std::sqrt(alpha * shared.mu())).epsilon(1e-9));
    }
  }
  SUBCASE("agrees with power iteration on the assembled block matrix") {
    for (std::uint64_t seed = 130; seed < 134; ++seed) {
      const auto rnd = make_random_quadratic_suite(2, 2, 1.0, 6.0, seed);
      CounterRng rng({seed, 1, 0}, 0);
      const double alpha = 0.02 + 0.1 * rng.uniform();
      const double beta = 0.7 * rng.uniform();
      const auto s = aq_spectrum(w, alpha, rnd);
      const Matrix a = assemble_a_dasg(w, alpha, rnd, beta);
      CHECK(rho_dasg_quadratic(s, beta) ==
            doctest::Approx(oracles::power_spectral_radius(a, 1e-10)).epsilon(1e-8));
    }
  }
}

TEST_CASE("exact asymptotic variance of the plain method") {
  SUBCASE("frozen scalar value") {
    QuadSpectrum s;
    s.alpha = 0.1;
    s.mu_list = Vector::Constant(1, 0.9);
    const auto v = var_dsg_exact(s, 1.0, 1);
    CHECK(v.limit_variance == doctest::Approx(0.01 / 0.19).epsilon(1e-12));
    CHECK(v.j_inf == doctest::Approx(0.01 / 0.19).epsilon(1e-12));
  }
  SUBCASE("no noise, no variance") {
    QuadSpectrum s;
    s.alpha = 0.1;
    s.mu_list = Vector::Constant(2, 0.5);
    CHECK(var_dsg_exact(s, 0.0, 2).limit_variance == doctest::Approx(0.0));
  }
  SUBCASE("matches the discrete Lyapunov oracle on random instances") {
    for (std::uint64_t seed = 140; seed < 160; ++seed) {
      const int n = 2 + static_cast<int>(seed % 4);  // up to 5 nodes
      const int d = 1 + static_cast<int>(seed % 3);
      const auto suite = make_random_quadratic_suite(n, d, 1.0, 7.0, seed);
      const auto w = shift_mixing(build_mixing(Topology::ring(n)), 1.0);
      const double alpha = 0.3 * (1.0 + w.lambda_min) / (suite.lipschitz() + suite.mu());
      const auto s = aq_spectrum(w, alpha, suite);
      const double sigma = 1.3;

      Matrix a_q = kron_with_identity(w.w, d);
      for (int i = 0; i < n; ++i)
        a_q.block(static_cast<long>(i) * d, static_cast<long>(i) * d, d, d) -=
            alpha * suite.quad(i).q;
      const Matrix q_in = alpha * alpha * sigma * sigma / static_cast<double>(d) *
                          Matrix::Identity(static_cast<long>(n) * d, static_cast<long>(n) * d);
      const auto lyap = oracles::lyapunov_iterate(a_q, q_in, 1e-13);
      const auto v = var_dsg_exact(s, sigma, d);
      CHECK(v.limit_variance == doctest::Approx(lyap.trace).epsilon(1e-8));
    }
  }
  SUBCASE("unstable spectra are rejected") {
    QuadSpectrum s;
    s.alpha = 0.1;
    s.mu_list = Vector::Constant(1, 1.0);
    CHECK_THROWS_AS(var_dsg_exact(s, 1.0, 1), UnstableSpectrum);
  }
  SUBCASE("variance grows with the stepsize for small stepsizes") {
    const auto suite = make_random_quadratic_suite(3, 2, 1.0, 10.0, 161);
    const auto w = shift_mixing(build_mixing(Topology::ring(3)), 1.0);
    double prev = 0.0;
    for (double alpha : {0.001, 0.002, 0.004, 0.008, 0.016}) {
      const double v = var_dsg_exact(aq_spectrum(w, alpha, suite), 1.0, 2).limit_variance;
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("exact asymptotic variance of the momentum method") {
  SUBCASE("momentum zero reduces termwise to the plain formula") {
    QuadSpectrum s;
    s.alpha = 0.07;
    s.mu_list.resize(3);
    s.mu_list << 0.9, 0.4, -0.2;
    const auto dasg = var_dasg_exact(s, 0.0, 1.2, 3);
    const auto dsg = var_dsg_exact(s, 1.2, 3);
    CHECK(dasg.limit_variance == doctest::Approx(dsg.limit_variance).epsilon(1e-13));
    CHECK(dasg.j_inf == doctest::Approx(dsg.j_inf).epsilon(1e-13));
  }
  SUBCASE("matches the block-system Lyapunov oracle") {
    for (std::uint64_t seed = 170; seed < 175; ++seed) {
      const auto suite = make_random_quadratic_suite(2, 1, 1.0, 5.0, seed);
      const auto w = shift_mixing(build_mixing(Topology::complete(2)), 1.0);
      const double alpha = 0.04;
      const double beta = nesterov_momentum(alpha, suite.mu());
      const double sigma = 0.8;
      const auto s = aq_spectrum(w, alpha, suite);

      const Matrix a = assemble_a_dasg(w, alpha, suite, beta);
      const auto lyap =
          oracles::lyapunov_iterate(a, dasg_noise_input(alpha, sigma, 1, 2), 1e-13);
      // the state stacks two lagged copies; each carries the same variance
      const auto v = var_dasg_exact(s, beta, sigma, 1);
      CHECK(v.limit_variance == doctest::Approx(lyap.trace / 2.0).epsilon(1e-8));
    }
  }
  SUBCASE("degenerate eigenvalues are reported, not silently divided") {
    QuadSpectrum s;
    s.alpha = 0.1;
    s.mu_list = Vector::Constant(1, 1.0 - 1e-16);
    CHECK_THROWS_AS(var_dasg_exact(s, 0.5, 1.0, 1), DegenerateEigenvalue);
  }
}

TEST_CASE("node-average per-coordinate variance bound") {
  SUBCASE("single node equals the worst single term") {
    QuadSpectrum s;
    s.alpha = 0.1;
    s.mu_list.resize(2);
    s.mu_list << 0.9, 0.2;
    const double bound = node_avg_var_bound(s, 0.0, 1.0, 1, 2);
    CHECK(bound == doctest::Approx(0.01 / 0.19 / 2.0).epsilon(1e-12));
  }
  SUBCASE("doubling the node count halves the bound") {
    QuadraticLocal l;
    l.q = 2.0 * Matrix::Identity(1, 1);
    l.p = Vector::Zero(1);
    const double alpha = 0.02;
    double bounds[2];
    int idx = 0;
    for (int n : {4, 8}) {
      const auto suite =
          ObjectiveSuite::quadratic(std::vector<QuadraticLocal>(static_cast<std::size_t>(n), l));
      const auto w = shift_mixing(build_mixing(Topology::ring(n)), 1.0);
      bounds[idx++] =
          node_avg_var_bound(aq_spectrum(w, alpha, suite), 0.0, 1.0, n, 1);
    }
    CHECK(bounds[1] == doctest::Approx(bounds[0] / 2.0).epsilon(1e-10));
  }
}

TEST_CASE("transient norm constant") {
  const auto suite = make_random_quadratic_suite(3, 2, 1.0, 10.0, 180);
  const auto w = shift_mixing(build_mixing(Topology::ring(3)), 1.0);
  const double alpha = 0.8 * w.lambda_min / suite.lipschitz();
  const double beta = nesterov_momentum(alpha, suite.mu());
  const auto s = aq_spectrum(w, alpha, suite);

  SUBCASE("no interior eigenvalues leaves the linear branch") {
    QuadSpectrum boundary;
    boundary.alpha = 0.1;
    boundary.mu_list = Vector::Constant(2, 0.9);  // exactly 1 - alpha mu for mu = 1
    CHECK(c_k_constant(boundary, 1.0, 5) == doctest::Approx(9.0));
    CHECK(c_k_constant(boundary, 1.0, 1) >= 1.0);
  }
  SUBCASE("certified-regime value bounds the dense matrix powers") {
    const Matrix a = assemble_a_dasg(w, alpha, suite, beta);
    const double rho = 1.0 - std::sqrt(alpha * suite.mu());
    Matrix power = Matrix::Identity(a.rows(), a.cols());
    long covered = 0;
    for (long k : {1L, 5L, 20L}) {
      for (; covered < k; ++covered) power = a * power;
      CHECK(spectral_norm(power) <=
            c_k_constant(s, suite.mu(), k) * std::pow(rho, static_cast<double>(k)) +
                1e-12);
    }
  }
  SUBCASE("general form agrees with the certified-regime form") {
    for (long k : {1L, 3L, 10L})
      CHECK(c_k_general(s, beta, k) ==
            doctest::Approx(c_k_constant(s, suite.mu(), k)).epsilon(1e-9));
  }
  SUBCASE("outside the regime the certified form refuses") {
    QuadSpectrum negative;
    negative.alpha = 0.1;
    negative.mu_list = Vector::Constant(1, -0.5);
    CHECK_THROWS_AS(c_k_constant(negative, 1.0, 3), RegimeViolation);
  }
}

TEST_CASE("finite-horizon mean-square bounds") {
  const auto ref = tu::make_reference_quadratic();
  const double alpha = 0.25 * std::min(ref.w.lambda_min / ref.suite.lipschitz(),
                                       1.0 / (ref.suite.lipschitz() + ref.suite.mu()));
  const auto s = aq_spectrum(ref.w, alpha, ref.suite);
  const Vector x0 = Vector::Ones(6);
  const auto in = make_bound_inputs(ref.w, ref.suite, 1.0, x0, alpha);

  SUBCASE("no noise at horizon zero returns the initial distance") {
    auto quiet = in;
    quiet.sigma = 0.0;
    const auto rep =
        finite_k_bounds_quadratic({0}, s, RunConfig::Method::Dsg, 0.0, quiet, 2);
    CHECK(rep.to_fixed_point.total[0] == doctest::Approx(in.dist0_fixed_sq));
  }
  SUBCASE("long-horizon limit is the exact asymptotic variance") {
    const auto rep =
        finite_k_bounds_quadratic({2000000}, s, RunConfig::Method::Dsg, 0.0, in, 2);
    const double exact = var_dsg_exact(s, 1.0, 2).limit_variance;
    CHECK(rep.to_fixed_point.total[0] == doctest::Approx(exact).epsilon(1e-10));
  }
  SUBCASE("momentum variant uses the transient constant") {
    const double beta = nesterov_momentum(alpha, ref.suite.mu());
    const auto rep =
        finite_k_bounds_quadratic({0, 5, 50}, s, RunConfig::Method::Dasg, beta, in, 2);
    // bias decays, variance floor stays
    CHECK(rep.to_fixed_point.bias[2] < rep.to_fixed_point.bias[0]);
    const double exact = var_dasg_exact(s, beta, 1.0, 2).limit_variance;
    for (double v : rep.to_fixed_point.variance) CHECK(v == doctest::Approx(exact));
  }
}

TEST_CASE("finite-horizon bounds dominate the exact propagated moments") {
  // the second moment of a linear recursion with additive noise is computed
  // exactly by propagating the covariance, so no Monte-Carlo slack is needed
  const auto ref = tu::make_reference_quadratic();
  const double alpha = 0.3 * std::min(ref.w.lambda_min / ref.suite.lipschitz(),
                                      1.0 / (ref.suite.lipschitz() + ref.suite.mu()));
  const double sigma = 0.7;
  const auto s = aq_spectrum(ref.w, alpha, ref.suite);
  const Vector x0 = 2.0 * Vector::Ones(6);
  auto in = make_bound_inputs(ref.w, ref.suite, sigma, x0, alpha);

  const Vector x_inf = fixed_point(ref.w, alpha, ref.suite);
  Matrix a_q = kron_with_identity(ref.w.w, 2);
  for (int i = 0; i < 3; ++i)
    a_q.block(2 * i, 2 * i, 2, 2) -= alpha * ref.suite.quad(i).q;

  std::vector<long> ks;
  for (long k = 0; k <= 60; ++k) ks.push_back(k);

  SUBCASE("plain method") {
    const auto rep =
        finite_k_bounds_quadratic(ks, s, RunConfig::Method::Dsg, 0.0, in, 2);
    Matrix cov = (x0 - x_inf) * (x0 - x_inf).transpose();
    const Matrix q_in = alpha * alpha * sigma * sigma / 2.0 * Matrix::Identity(6, 6);
    for (std::size_t slot = 0; slot < ks.size(); ++slot) {
      CHECK(cov.trace() <= rep.to_fixed_point.total[slot] * (1.0 + 1e-12));
      cov = a_q * cov * a_q.transpose() + q_in;
    }
  }
  SUBCASE("momentum method") {
    const double beta = nesterov_momentum(alpha, ref.suite.mu());
    const auto rep =
        finite_k_bounds_quadratic(ks, s, RunConfig::Method::Dasg, beta, in, 2);
    const Matrix a = assemble_a_dasg(ref.w, alpha, ref.suite, beta);
    Vector xi0(12);
    xi0 << x0 - x_inf, x0 - x_inf;
    Matrix cov = xi0 * xi0.transpose();
    Matrix q_in = Matrix::Zero(12, 12);
    q_in.topLeftCorner(6, 6) =
        alpha * alpha * sigma * sigma / 2.0 * Matrix::Identity(6, 6);
    for (std::size_t slot = 0; slot < ks.size(); ++slot) {
      const double exact = cov.topLeftCorner(6, 6).trace();
      CHECK(exact <= rep.to_fixed_point.total[slot] * (1.0 + 1e-12));
      cov = a * cov * a.transpose() + q_in;
    }
  }
}

TEST_CASE("momentum is faster but less robust at a fixed small stepsize") {
  // reference instance, alpha = 1% of the certified momentum cap
  const auto ref = tu::make_reference_quadratic();
  const double cap = std::min(ref.w.lambda_min / ref.suite.lipschitz(),
                              1.0 / (ref.suite.lipschitz() + ref.suite.mu()));
  const double alpha = 0.01 * cap;
  const auto s = aq_spectrum(ref.w, alpha, ref.suite);
  const double beta = nesterov_momentum(alpha, ref.suite.mu());

  const double j_dsg = var_dsg_exact(s, 1.0, 2).j_inf;
  const double j_dasg = var_dasg_exact(s, beta, 1.0, 2).j_inf;
  CHECK(j_dasg > j_dsg);
  // frozen regression values from the first computation
  CHECK(j_dsg == doctest::Approx(1.5778566291937941e-05).epsilon(1e-12));
  CHECK(j_dasg == doctest::Approx(0.00033619549989586701).epsilon(1e-12));

  const double rho_dasg = rho_dasg_quadratic(s, beta);
  const double rho_plain = s.mu_list.cwiseAbs().maxCoeff();
  CHECK(rho_dasg < rho_plain);  // faster
}

TEST_SUITE_END();
