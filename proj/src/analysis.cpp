#include "dstoch/analysis.hpp"

#include "dstoch/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace dstoch {

namespace {

double quad_form_i_minus_w(const MixingMatrix& w, int d, const Ref<const Vector>& x) {
  return x.squaredNorm() - x.dot(apply_mixing(w.w, d, x));
}

void require_network_term_stepsize(double alpha, const BoundInputs& in) {
  const double cap = std::min((1.0 + in.lambda_min) / in.lipschitz,
                              1.0 / (in.lipschitz + in.mu));
  if (alpha > cap + 1e-15)
    throw AlphaOutOfRange("network term requires alpha <= min((1+lambda_N)/L, 1/(L+mu))");
}

}  // namespace

double PenalizedObjective::value(const Ref<const Vector>& x) const {
  return quad_form_i_minus_w(w, suite.dim(), x) / (2.0 * alpha) + suite.stacked_value(x);
}

Vector PenalizedObjective::gradient(const Ref<const Vector>& x) const {
  Vector g = suite.stacked_grad(x);
  g += (x - apply_mixing(w.w, suite.dim(), x)) / alpha;
  return g;
}

Vector fixed_point(const MixingMatrix& w, double alpha, const ObjectiveSuite& suite) {
  if (alpha <= 0.0) throw AlphaOutOfRange("fixed_point needs alpha > 0");
  const int n = w.size();
  const int d = suite.dim();
  if (n != suite.nodes())
    throw DimensionMismatch("mixing matrix and suite disagree on node count");
  const long nd = static_cast<long>(n) * d;

  if (suite.is_quadratic()) {
    // (I - W(x)I + alpha Q) x = alpha p
    Matrix m = -kron_with_identity(w.w, d);
    Vector rhs(nd);
    for (int i = 0; i < n; ++i) {
      const auto& l = suite.quad(i);
      m.block(static_cast<long>(i) * d, static_cast<long>(i) * d, d, d) += alpha * l.q;
      rhs.segment(static_cast<long>(i) * d, d) = alpha * l.p;
    }
    m += Matrix::Identity(nd, nd);
    Eigen::LDLT<Matrix> solver(m);
    if (solver.info() != Eigen::Success)
      throw SingularSystem("fixed-point system is singular");
    Vector x = solver.solve(rhs);
    x += solver.solve(rhs - m * x);  // one step of iterative refinement
    return x;
  }

  // gradient descent on the penalized objective; the tolerance covers both
  // the fixed-point residual ||(I-W)x + alpha grad F|| and the penalized
  // gradient norm at 1e-10
  const PenalizedObjective pen{w, suite, alpha};
  const double step = 1.0 / pen.l_alpha();
  const double tol = 1e-10 / std::max(1.0, alpha);
  Vector x = Vector::Zero(nd);
  for (long it = 0; it < 10000000; ++it) {
    Vector g = pen.gradient(x);
    if (g.norm() <= tol) return x;
    x -= step * g;
  }
  throw NoConvergence(
      "fixed_point: gradient descent on the penalized objective did not converge "
      "(alpha too large or suite pathological)");
}

double rho_dsg(double alpha, double mu, double lipschitz, double lambda_min) {
  if (alpha <= 0.0 || alpha >= (1.0 + lambda_min) / lipschitz)
    throw AlphaOutOfRange("rho_dsg needs alpha in (0, (1+lambda_N)/L)");
  return std::max(std::abs(1.0 - alpha * mu), std::abs(lambda_min - alpha * lipschitz));
}

BoundInputs make_bound_inputs(const MixingMatrix& w, const ObjectiveSuite& suite,
                              double sigma, const Ref<const Vector>& x0, double alpha) {
  BoundInputs in;
  in.mu = suite.mu();
  in.lipschitz = suite.lipschitz();
  in.lambda_min = w.lambda_min;
  in.gamma = w.gamma;
  in.sigma = sigma;
  in.c1 = suite.c1_constant();
  in.nodes = w.size();

  const Vector x_inf = fixed_point(w, alpha, suite);
  in.dist0_fixed_sq = (x0 - x_inf).squaredNorm();
  double opt = 0.0;
  for (int i = 0; i < w.size(); ++i)
    opt += (x0.segment(static_cast<long>(i) * suite.dim(), suite.dim()) - suite.x_star())
               .squaredNorm();
  in.dist0_opt_sq = opt;

  Vector xi0(2 * x0.size());
  xi0 << x0 - x_inf, x0 - x_inf;
  in.v_s_alpha0 = lyapunov_value(s_alpha(alpha, in.mu), 1.0, alpha, xi0, w, suite, x_inf);
  return in;
}

BoundReport dsg_bound(const std::vector<long>& ks, double alpha, const BoundInputs& in) {
  BoundReport rep;
  rep.method = "dsg";
  rep.alpha = alpha;
  rep.beta = 0.0;
  rep.inputs = in;

  const double rho = rho_dsg(alpha, in.mu, in.lipschitz, in.lambda_min);
  const double nn = static_cast<double>(in.nodes);
  const double sig2 = in.sigma * in.sigma;

  rep.to_fixed_point.ks = ks;
  for (long k : ks) {
    const double r2k = std::pow(rho, 2.0 * static_cast<double>(k));
    const double bias = r2k * in.dist0_fixed_sq;
    const double var = (1.0 - r2k) / (1.0 - rho * rho) * sig2 * alpha * alpha * nn;
    rep.to_fixed_point.bias.push_back(bias);
    rep.to_fixed_point.variance.push_back(var);
    rep.to_fixed_point.network.push_back(0.0);
    rep.to_fixed_point.total.push_back(bias + var);
  }
  rep.j_inf_rate = alpha * alpha / (1.0 - rho * rho);

  const bool optimum_ok = alpha < (1.0 + in.lambda_min) / (in.lipschitz + in.mu) &&
                          alpha <= 1.0 / (in.lipschitz + in.mu);
  if (optimum_ok) {
    require_network_term_stepsize(alpha, in);
    const double factor = 1.0 - alpha * in.mu;
    const double network =
        2.0 * alpha * alpha * in.c1 * in.c1 * nn / ((1.0 - in.gamma) * (1.0 - in.gamma));
    rep.to_optimum.ks = ks;
    for (long k : ks) {
      const double f2k = std::pow(factor, 2.0 * static_cast<double>(k));
      const double bias = 2.0 * f2k * in.dist0_fixed_sq;
      const double var =
          2.0 * alpha * sig2 * nn * (1.0 - f2k) / (in.mu * (2.0 - alpha * in.mu));
      rep.to_optimum.bias.push_back(bias);
      rep.to_optimum.variance.push_back(var);
      rep.to_optimum.network.push_back(network);
      rep.to_optimum.total.push_back(bias + var + network);
    }
    rep.j_inf_small_alpha = alpha / (in.mu * (2.0 - alpha * in.mu));
  }
  return rep;
}

BoundReport dasg_bound(const std::vector<long>& ks, double alpha, const BoundInputs& in) {
  if (in.lambda_min <= 0.0)
    throw Assumption3Violated("dasg_bound needs lambda_N > 0; apply shift_mixing first");
  if (alpha <= 0.0 || alpha > in.lambda_min / in.lipschitz)
    throw AlphaOutOfRange("dasg_bound needs alpha in (0, lambda_N/L]");

  BoundReport rep;
  rep.method = "dasg";
  rep.alpha = alpha;
  rep.beta = nesterov_momentum(alpha, in.mu);
  rep.inputs = in;

  const double nn = static_cast<double>(in.nodes);
  const double sig2 = in.sigma * in.sigma;
  const double rate = 1.0 - std::sqrt(alpha * in.mu);
  const double var_fixed = sig2 * nn * std::sqrt(alpha) / (in.mu * std::sqrt(in.mu)) *
                           (2.0 - in.lambda_min + alpha * in.lipschitz);

  rep.to_fixed_point.ks = ks;
  for (long k : ks) {
    const double bias =
        2.0 * std::pow(rate, static_cast<double>(k)) * in.v_s_alpha0 / in.mu;
    rep.to_fixed_point.bias.push_back(bias);
    rep.to_fixed_point.variance.push_back(var_fixed);
    rep.to_fixed_point.network.push_back(0.0);
    rep.to_fixed_point.total.push_back(bias + var_fixed);
  }
  rep.j_inf_rate = std::sqrt(alpha) / (in.mu * std::sqrt(in.mu)) *
                   (2.0 - in.lambda_min + alpha * in.lipschitz);

  if (alpha <= 1.0 / (in.lipschitz + in.mu)) {
    require_network_term_stepsize(alpha, in);
    const double network =
        2.0 * in.c1 * in.c1 * nn * alpha * alpha / ((1.0 - in.gamma) * (1.0 - in.gamma));
    rep.to_optimum.ks = ks;
    for (long k : ks) {
      const double bias =
          4.0 * std::pow(rate, static_cast<double>(k)) * in.v_s_alpha0 / in.mu;
      rep.to_optimum.bias.push_back(bias);
      rep.to_optimum.variance.push_back(2.0 * var_fixed);
      rep.to_optimum.network.push_back(network);
      rep.to_optimum.total.push_back(bias + 2.0 * var_fixed + network);
    }
  }
  return rep;
}

Matrix2 s_alpha(double alpha, double mu) {
  if (alpha <= 0.0) throw AlphaOutOfRange("s_alpha needs alpha > 0");
  Vector2 v(1.0 / std::sqrt(2.0 * alpha),
            std::sqrt(mu / 2.0) - std::sqrt(1.0 / (2.0 * alpha)));
  return v * v.transpose();
}

// rho is the certified per-step contraction factor of the squared distance
// (equivalently of the Lyapunov value), so it substitutes for every rho^2 in
// the certified inequality. With the standard momentum, rho = 1 - sqrt(alpha mu)
// and p_tilde = s_alpha(alpha, mu) sit exactly on the feasibility boundary.
MICertificate mi_check(double alpha, double beta, double rho,
                       const Ref<const Matrix>& p_tilde, double mu, double lipschitz,
                       double lambda_min) {
  if (alpha <= 0.0) throw AlphaOutOfRange("mi_check needs alpha > 0");
  if (rho <= 0.0 || rho >= 1.0) throw InvalidRho("mi_check needs rho in (0,1)");
  if (p_tilde.rows() != 2 || p_tilde.cols() != 2)
    throw DimensionMismatch("p_tilde must be 2x2");
  if (std::abs(p_tilde(0, 1) - p_tilde(1, 0)) > 1e-12)
    throw NonPSDInput("p_tilde must be symmetric");
  {
    Eigen::SelfAdjointEigenSolver<Matrix2> es(p_tilde);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw NonPSDInput("p_tilde must be positive semi-definite");
  }

  Matrix2 a;
  a << 1.0 + beta, -beta, 1.0, 0.0;
  Vector2 b(-alpha, 0.0);

  const double sector = alpha * (1.0 + lambda_min - lipschitz * alpha) / 2.0;
  Matrix3 x1, x2;
  x1 << beta * beta * mu / 2.0, -beta * beta * mu / 2.0, -beta / 2.0,
      -beta * beta * mu / 2.0, beta * beta * mu / 2.0, beta / 2.0,
      -beta / 2.0, beta / 2.0, sector;
  x2 << (1.0 + beta) * (1.0 + beta) * mu / 2.0, -beta * (1.0 + beta) * mu / 2.0,
      -(1.0 + beta) / 2.0,
      -beta * (1.0 + beta) * mu / 2.0, beta * beta * mu / 2.0, beta / 2.0,
      -(1.0 + beta) / 2.0, beta / 2.0, sector;

  Matrix3 rhs = Matrix3::Zero();
  rhs.topLeftCorner<2, 2>() = a.transpose() * p_tilde * a - rho * p_tilde;
  rhs.topRightCorner<2, 1>() = a.transpose() * p_tilde * b;
  rhs.bottomLeftCorner<1, 2>() = b.transpose() * p_tilde * a;
  rhs(2, 2) = b.dot(p_tilde * b);

  const Matrix3 residual = rho * x1 + (1.0 - rho) * x2 - rhs;
  Eigen::SelfAdjointEigenSolver<Matrix3> es(residual);

  MICertificate cert;
  cert.alpha = alpha;
  cert.beta = beta;
  cert.rho = rho;
  cert.p_tilde = p_tilde;
  cert.residual = residual;
  cert.min_eig_slack = es.eigenvalues().minCoeff();
  return cert;
}

double lyapunov_value(const Ref<const Matrix>& p_tilde, double c, double alpha,
                      const Ref<const Vector>& xi, const MixingMatrix& w,
                      const ObjectiveSuite& suite, const Ref<const Vector>& x_inf) {
  if (c < 0.0) throw ParameterOutOfRange("lyapunov_value needs c >= 0");
  if (p_tilde.rows() != 2 || p_tilde.cols() != 2)
    throw DimensionMismatch("p_tilde must be 2x2");
  {
    const Matrix2 pt = p_tilde;
    Eigen::SelfAdjointEigenSolver<Matrix2> es(pt);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw NonPSDInput("p_tilde must be positive semi-definite");
  }
  const long nd = x_inf.size();
  if (xi.size() != 2 * nd) throw DimensionMismatch("xi must stack two Nd blocks");

  const auto xi1 = xi.head(nd);
  const auto xi2 = xi.tail(nd);
  double v = p_tilde(0, 0) * xi1.squaredNorm() + 2.0 * p_tilde(0, 1) * xi1.dot(xi2) +
             p_tilde(1, 1) * xi2.squaredNorm();
  if (c > 0.0) {
    const PenalizedObjective pen{w, suite, alpha};
    v += c * (pen.value(xi1 + x_inf) - pen.value(x_inf));
  }
  return v;
}

double tradeoff_j_tot(double alpha, const TradeoffParams& p) {
  const double nn = static_cast<double>(p.nodes);
  return 2.0 * p.sigma * p.sigma * nn * alpha / (p.mu * std::sqrt(alpha * p.mu)) *
             (2.0 - p.lambda_min + alpha * p.lipschitz) +
         2.0 * p.c1 * p.c1 * nn * alpha * alpha /
             ((1.0 - p.gamma) * (1.0 - p.gamma));
}

double tradeoff_g(double z, const TradeoffParams& p) {
  const double nn = static_cast<double>(p.nodes);
  return 2.0 * p.sigma * p.sigma * nn / (p.mu * std::sqrt(p.mu)) * z *
             (2.0 - p.lambda_min + z * z * p.lipschitz) +
         2.0 * p.c1 * p.c1 * nn * std::pow(z, 4.0) /
             ((1.0 - p.gamma) * (1.0 - p.gamma));
}

double tradeoff_g_prime(double z, const TradeoffParams& p) {
  const double nn = static_cast<double>(p.nodes);
  return 2.0 * p.sigma * p.sigma * nn * (2.0 - p.lambda_min) / (p.mu * std::sqrt(p.mu)) +
         6.0 * p.sigma * p.sigma * nn * p.lipschitz * z * z / (p.mu * std::sqrt(p.mu)) +
         8.0 * p.c1 * p.c1 * nn * z * z * z / ((1.0 - p.gamma) * (1.0 - p.gamma));
}

TradeoffResult tradeoff_alpha(double delta, const TradeoffParams& p) {
  if (p.lambda_min <= 0.0)
    throw Assumption3Violated("tradeoff needs lambda_N > 0; apply shift_mixing first");
  if (p.gamma >= 1.0)
    throw ParameterOutOfRange("tradeoff needs a connected network (gamma < 1)");

  TradeoffResult res;
  res.alpha_bar = std::min(p.lambda_min / p.lipschitz, 1.0 / (p.lipschitz + p.mu));
  res.rho_star = 1.0 - std::sqrt(res.alpha_bar * p.mu);
  if (delta < 0.0 || delta > 1.0 / res.rho_star - 1.0)
    throw DeltaOutOfRange("delta must lie in [0, 1/rho_star - 1]");

  const double num = 1.0 - res.rho_star * (1.0 + delta);
  res.alpha_star = num * num / p.mu;
  res.j_tot = tradeoff_j_tot(res.alpha_star, p);
  return res;
}

MasgBoundReport masg_bound(const MasgSchedule& schedule, double p,
                           const BoundInputs& in, const std::vector<long>& per_ks) {
  if (schedule.stages.empty()) throw ParameterOutOfRange("schedule has no stages");
  if (in.lambda_min <= 0.0)
    throw Assumption3Violated("masg_bound needs lambda_N > 0");
  if (p < 7.0) throw ParameterOutOfRange("masg_bound needs p >= 7");

  const double kt = (in.lipschitz / in.mu + 1.0) / in.lambda_min;
  const double sqkt = std::sqrt(kt);
  const long k1 = schedule.stages.front().length;
  const double nn = static_cast<double>(in.nodes);
  const double net_base = in.c1 * in.lambda_min / (in.lipschitz * (1.0 - in.gamma));

  MasgBoundReport rep;
  long boundary = 0;
  for (std::size_t s = 0; s < schedule.stages.size(); ++s) {
    boundary += schedule.stages[s].length;
    const int t = static_cast<int>(s);  // bound at the end of stage t+1
    const double bias = 4.0 * std::pow(2.0, -(p - 2.0) * t) *
                        std::exp(-static_cast<double>(k1) / sqkt) * in.dist0_opt_sq;
    const double variance =
        12.0 * nn * in.sigma * in.sigma / (std::pow(2.0, t) * in.mu * in.mu * sqkt);
    const double network = 12.0 * nn * std::pow(2.0, -4.0 * t) * net_base * net_base;
    rep.stage_t.push_back(t);
    rep.boundary_k.push_back(boundary);
    rep.bias.push_back(bias);
    rep.variance.push_back(variance);
    rep.network.push_back(network);
    rep.total.push_back(bias + variance + network);
  }

  for (long k : per_ks) {
    if (k <= k1) continue;  // the per-iteration form only covers k > k1
    const double span = static_cast<double>(k - k1);
    const double bias = std::pow(6.0 * p * sqkt / span, p - 2.0) *
                        std::exp(-static_cast<double>(k1) / sqkt) * in.dist0_opt_sq;
    const double variance = nn * p * in.sigma * in.sigma / (in.mu * in.mu * span);
    const double network = nn * std::pow(p, 4.0) * in.c1 * in.c1 /
                           ((1.0 - in.gamma) * (1.0 - in.gamma) * in.mu * in.mu *
                            std::pow(span, 4.0));
    rep.per_k.ks.push_back(k);
    rep.per_k.bias.push_back(bias);
    rep.per_k.variance.push_back(variance);
    rep.per_k.network.push_back(network);
    rep.per_k.total.push_back(bias + variance + network);
  }
  return rep;
}

double masg_epsilon_complexity(double epsilon, double delta0, const BoundInputs& in) {
  if (epsilon <= 0.0 || delta0 <= 0.0)
    throw ParameterOutOfRange("epsilon and delta0 must be positive");
  const double kt = (in.lipschitz / in.mu + 1.0) / in.lambda_min;
  const double nn = static_cast<double>(in.nodes);
  return std::sqrt(kt) * std::log(delta0 / epsilon) +
         nn * in.sigma * in.sigma / (in.mu * in.mu * epsilon) +
         std::pow(nn, 0.25) * std::sqrt(in.c1 / (1.0 - in.gamma)) /
             (std::sqrt(in.mu) * std::pow(epsilon, 0.25));
}

double hat_alpha_relative(double mu, double lipschitz, double lambda_min, double eta) {
  if (eta < 0.0) throw ParameterOutOfRange("eta must be nonnegative");
  const double base = lambda_min / lipschitz;
  if (eta == 0.0) return base;
  const double cap = mu * mu * mu / std::pow(60.0 * eta * eta, 2.0);
  return std::min(base, cap);
}

}  // namespace dstoch
