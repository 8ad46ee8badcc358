#include "dstoch/quadratic_exact.hpp"

#include "dstoch/linalg.hpp"
#include "dstoch/oracles.hpp"

#include <cmath>

namespace dstoch {

namespace {

constexpr double kDenomGuard = 1e-14;
constexpr double kBoundaryTol = 1e-12;

Matrix assemble_a_q(const MixingMatrix& w, double alpha, const ObjectiveSuite& suite) {
  if (!suite.is_quadratic())
    throw NonQuadraticSuite("quadratic iteration matrix needs a quadratic suite");
  const int d = suite.dim();
  Matrix a = kron_with_identity(w.w, d);
  for (int i = 0; i < suite.nodes(); ++i)
    a.block(static_cast<long>(i) * d, static_cast<long>(i) * d, d, d) -=
        alpha * suite.quad(i).q;
  return a;
}

double dasg_variance_term(double mu_i, double beta, double alpha) {
  const double one_minus = 1.0 - mu_i;
  const double d2 = 1.0 - beta * mu_i;
  const double d3 = 2.0 + 2.0 * beta - one_minus * (1.0 + 2.0 * beta);
  if (std::abs(one_minus) < kDenomGuard || std::abs(d2) < kDenomGuard ||
      std::abs(d3) < kDenomGuard)
    throw DegenerateEigenvalue("variance formula denominator vanishes at mu_i=" +
                               std::to_string(mu_i));
  return alpha * alpha * (1.0 + beta * mu_i) / (one_minus * d2 * d3);
}

}  // namespace

QuadSpectrum aq_spectrum(const MixingMatrix& w, double alpha,
                         const ObjectiveSuite& suite) {
  if (alpha <= 0.0) throw AlphaOutOfRange("aq_spectrum needs alpha > 0");
  const Matrix a = assemble_a_q(w, alpha, suite);
  QuadSpectrum s;
  s.alpha = alpha;
  s.mu_list = oracles::jacobi_eigenvalues(a).eigenvalues;

  const double lo = w.lambda_min - alpha * suite.lipschitz() - 1e-10;
  const double hi = 1.0 - alpha * suite.mu() + 1e-10;
  if (s.mu_list.minCoeff() < lo || s.mu_list.maxCoeff() > hi)
    throw UnstableSpectrum("aq_spectrum: eigenvalue outside the sandwich bounds");
  return s;
}

double rho_dasg_quadratic(const QuadSpectrum& spectrum, double beta) {
  if (beta < 0.0) throw ParameterOutOfRange("rho_dasg_quadratic needs beta >= 0");
  double radius = 0.0;
  for (int i = 0; i < spectrum.mu_list.size(); ++i) {
    const double mu_i = spectrum.mu_list(i);
    const double disc = (1.0 + beta) * (1.0 + beta) * mu_i * mu_i - 4.0 * beta * mu_i;
    // near-zero discriminants snap to the double root; sqrt would otherwise
    // blow eigenvalue rounding up by eight orders of magnitude
    const double snap =
        1e-13 * ((1.0 + beta) * (1.0 + beta) * mu_i * mu_i + 4.0 * beta * std::abs(mu_i));
    double mag;
    if (disc >= snap) {
      const double root = std::sqrt(disc);
      mag = std::max(std::abs((1.0 + beta) * mu_i + root),
                     std::abs((1.0 + beta) * mu_i - root)) / 2.0;
    } else if (disc <= -snap) {
      mag = std::sqrt(beta * mu_i);  // complex pair
    } else {
      mag = (1.0 + beta) * std::abs(mu_i) / 2.0;
    }
    radius = std::max(radius, mag);
  }
  return radius;
}

Matrix assemble_a_dasg(const MixingMatrix& w, double alpha,
                       const ObjectiveSuite& suite, double beta) {
  const Matrix a_q = assemble_a_q(w, alpha, suite);
  const long nd = a_q.rows();
  Matrix a = Matrix::Zero(2 * nd, 2 * nd);
  a.topLeftCorner(nd, nd) = (1.0 + beta) * a_q;
  a.topRightCorner(nd, nd) = -beta * a_q;
  a.bottomLeftCorner(nd, nd) = Matrix::Identity(nd, nd);
  return a;
}

ExactVariance var_dsg_exact(const QuadSpectrum& spectrum, double sigma, int d) {
  if (spectrum.mu_list.cwiseAbs().maxCoeff() >= 1.0)
    throw UnstableSpectrum("var_dsg_exact needs max |mu_i| < 1");
  const long nd = spectrum.mu_list.size();
  double sum = 0.0;
  for (long i = 0; i < nd; ++i) {
    const double m = spectrum.mu_list(i);
    sum += 1.0 / (1.0 - m * m);
  }
  ExactVariance v;
  v.j_inf = spectrum.alpha * spectrum.alpha * sum / static_cast<double>(nd);
  v.limit_variance = sigma * sigma * spectrum.alpha * spectrum.alpha * sum /
                     static_cast<double>(d);
  return v;
}

ExactVariance var_dasg_exact(const QuadSpectrum& spectrum, double beta, double sigma,
                             int d) {
  if (rho_dasg_quadratic(spectrum, beta) >= 1.0)
    throw UnstableSpectrum("var_dasg_exact needs rho_dasg < 1");
  const long nd = spectrum.mu_list.size();
  double sum = 0.0;
  for (long i = 0; i < nd; ++i)
    sum += dasg_variance_term(spectrum.mu_list(i), beta, spectrum.alpha);
  ExactVariance v;
  v.j_inf = sum / static_cast<double>(nd);
  v.limit_variance = sigma * sigma * sum / static_cast<double>(d);
  return v;
}

double node_avg_var_bound(const QuadSpectrum& spectrum, double beta, double sigma,
                          int nodes, int d) {
  if (rho_dasg_quadratic(spectrum, beta) >= 1.0)
    throw UnstableSpectrum("node_avg_var_bound needs rho_dasg < 1");
  double worst = 0.0;
  for (int i = 0; i < spectrum.mu_list.size(); ++i)
    worst = std::max(worst, dasg_variance_term(spectrum.mu_list(i), beta, spectrum.alpha));
  return sigma * sigma * worst / (static_cast<double>(nodes) * static_cast<double>(d));
}

double c_k_constant(const QuadSpectrum& spectrum, double mu, long k) {
  const double alpha = spectrum.alpha;
  const double edge = 1.0 - alpha * mu;
  if (spectrum.mu_list.minCoeff() < -kBoundaryTol ||
      spectrum.mu_list.maxCoeff() > edge + kBoundaryTol)
    throw RegimeViolation(
        "c_k_constant needs all mu_i in [0, 1 - alpha mu] (standard momentum regime)");

  const double s = std::sqrt(alpha * mu);
  double best = std::max(1.0, 2.0 * static_cast<double>(k) - 1.0);
  for (int i = 0; i < spectrum.mu_list.size(); ++i) {
    const double m = spectrum.mu_list(i);
    // boundary eigenvalues have equal block roots and belong to the 2k-1 branch
    if (m <= kBoundaryTol || m >= edge - kBoundaryTol) continue;
    best = std::max(best, (1.0 + s + (1.0 - s) * m) /
                              (2.0 * std::sqrt(m * (edge - m))));
  }
  return best;
}

double c_k_general(const QuadSpectrum& spectrum, double beta, long k) {
  double best = std::max(1.0, 2.0 * static_cast<double>(k) - 1.0);
  for (int i = 0; i < spectrum.mu_list.size(); ++i) {
    const double m = spectrum.mu_list(i);
    const double disc = (1.0 + beta) * (1.0 + beta) * m * m - 4.0 * beta * m;
    if (std::abs(disc) < kBoundaryTol) continue;  // equal roots
    double gap, mag_sq;
    if (disc > 0.0) {
      const double root = std::sqrt(disc);
      gap = root;
      const double gp = std::abs((1.0 + beta) * m + root) / 2.0;
      const double gm = std::abs((1.0 + beta) * m - root) / 2.0;
      mag_sq = std::max(gp, gm);
      mag_sq *= mag_sq;
    } else {
      gap = std::sqrt(-disc);
      mag_sq = beta * m;
    }
    best = std::max(best, (1.0 + mag_sq) / gap);
  }
  return best;
}

BoundReport finite_k_bounds_quadratic(const std::vector<long>& ks,
                                      const QuadSpectrum& spectrum,
                                      RunConfig::Method method, double beta,
                                      const BoundInputs& in, int d) {
  const double alpha = spectrum.alpha;
  const double nn = static_cast<double>(in.nodes);
  const double sig2 = in.sigma * in.sigma;
  const bool dsg = method == RunConfig::Method::Dsg;
  const double rho = dsg ? spectrum.mu_list.cwiseAbs().maxCoeff()
                         : rho_dasg_quadratic(spectrum, beta);
  if (rho >= 1.0) throw UnstableSpectrum("finite_k_bounds_quadratic needs rho < 1");

  const double asymptotic =
      dsg ? var_dsg_exact(spectrum, in.sigma, d).limit_variance
          : var_dasg_exact(spectrum, beta, in.sigma, d).limit_variance;
  const double transient_floor = alpha * alpha * sig2 * nn / (1.0 - rho * rho);
  const double network =
      2.0 * alpha * alpha * in.c1 * in.c1 * nn / ((1.0 - in.gamma) * (1.0 - in.gamma));
  const bool optimum_ok = alpha <= 1.0 / (in.lipschitz + in.mu) &&
                          alpha <= (1.0 + in.lambda_min) / (in.lipschitz + in.mu);

  BoundReport rep;
  rep.method = dsg ? "dsg" : "dasg";
  rep.alpha = alpha;
  rep.beta = dsg ? 0.0 : beta;
  rep.inputs = in;
  rep.j_inf_rate = dsg ? var_dsg_exact(spectrum, in.sigma, d).j_inf
                       : var_dasg_exact(spectrum, beta, in.sigma, d).j_inf;

  rep.to_fixed_point.ks = ks;
  if (optimum_ok) rep.to_optimum.ks = ks;
  for (long k : ks) {
    const double ck = dsg ? 1.0 : c_k_general(spectrum, beta, k);
    const double decay =
        ck * ck * std::pow(rho, 2.0 * static_cast<double>(k));
    const double bias = decay * (in.dist0_fixed_sq + transient_floor);
    rep.to_fixed_point.bias.push_back(bias);
    rep.to_fixed_point.variance.push_back(asymptotic);
    rep.to_fixed_point.network.push_back(0.0);
    rep.to_fixed_point.total.push_back(bias + asymptotic);
    if (optimum_ok) {
      const double bias_opt = decay * (2.0 * in.dist0_fixed_sq + 2.0 * transient_floor);
      // the D-SG x* bound doubles the asymptotic floor; the D-ASG one does not
      const double var_opt = dsg ? 2.0 * asymptotic : asymptotic;
      rep.to_optimum.bias.push_back(bias_opt);
      rep.to_optimum.variance.push_back(var_opt);
      rep.to_optimum.network.push_back(network);
      rep.to_optimum.total.push_back(bias_opt + var_opt + network);
    }
  }
  return rep;
}

}  // namespace dstoch
