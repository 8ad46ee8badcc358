#pragma once

#include "dstoch/algorithms.hpp"
#include "dstoch/netgraph.hpp"
#include "dstoch/objectives.hpp"
#include "dstoch/types.hpp"

#include <string>
#include <vector>

namespace dstoch {

// F_{W,alpha}(x) = (1/2alpha) x^T (I - W (x) I_d) x + F(x). Running D-SG on F
// is centralized SGD on this objective; its minimizer is the fixed point.
struct PenalizedObjective {
  const MixingMatrix& w;
  const ObjectiveSuite& suite;
  double alpha;

  double l_alpha() const { return (1.0 - w.lambda_min) / alpha + suite.lipschitz(); }
  double value(const Ref<const Vector>& x) const;
  Vector gradient(const Ref<const Vector>& x) const;
};

// Unique solution of (I - W (x) I_d) x + alpha grad F(x) = 0. Quadratic
// suites solve the linear system directly; otherwise gradient descent on the
// penalized objective with stepsize 1/L_alpha.
Vector fixed_point(const MixingMatrix& w, double alpha, const ObjectiveSuite& suite);

// rho(alpha) = max(|1 - alpha mu|, |lambda_N - alpha L|) for
// alpha in (0, (1 + lambda_N)/L).
double rho_dsg(double alpha, double mu, double lipschitz, double lambda_min);

// Everything the closed-form bound evaluators need, echoed into reports.
struct BoundInputs {
  double mu = 0.0;
  double lipschitz = 0.0;
  double lambda_min = 0.0;  // lambda_N of W
  double gamma = 0.0;
  double sigma = 0.0;
  double c1 = 0.0;
  int nodes = 0;
  double dist0_fixed_sq = 0.0;  // ||x0 - x_inf||^2
  double dist0_opt_sq = 0.0;    // ||x0 - x*||^2 (stacked)
  double v_s_alpha0 = 0.0;      // V_{S,alpha}(xi_0) with x0 = x_{-1}
};

// Derives all inputs for a concrete (W, suite, sigma, x0, alpha) instance;
// solves for the fixed point internally.
BoundInputs make_bound_inputs(const MixingMatrix& w, const ObjectiveSuite& suite,
                              double sigma, const Ref<const Vector>& x0, double alpha);

struct BoundSeries {
  std::vector<long> ks;
  std::vector<double> bias, variance, network, total;
  bool empty() const { return ks.empty(); }
};

struct BoundReport {
  std::string method;
  double alpha = 0.0;
  double beta = 0.0;
  BoundInputs inputs;
  BoundSeries to_fixed_point;
  BoundSeries to_optimum;  // filled only when alpha admits the distance-to-optimum bound
  double j_inf_rate = 0.0;
  double j_inf_small_alpha = 0.0;  // dsg only: alpha/(mu(2 - alpha mu))
};

BoundReport dsg_bound(const std::vector<long>& ks, double alpha, const BoundInputs& in);
// Assumes the standard momentum; needs lambda_N > 0 and alpha <= lambda_N / L.
BoundReport dasg_bound(const std::vector<long>& ks, double alpha, const BoundInputs& in);

// S_alpha = v v^T, v = (1/sqrt(2 alpha), sqrt(mu/2) - sqrt(1/(2 alpha))); the
// explicit solution of the matrix inequality at rho = 1 - sqrt(alpha mu).
Matrix2 s_alpha(double alpha, double mu);

struct MICertificate {
  double alpha = 0.0, beta = 0.0, rho = 0.0;
  Matrix2 p_tilde;
  Matrix3 residual;  // the assembled 3x3 inequality residual
  double min_eig_slack = 0.0;
  bool feasible() const { return min_eig_slack >= -1e-10; }
};

// Assembles the 3x3 residual of the matrix inequality
//   rho^2 X1 + (1 - rho^2) X2 >= [A'PA - rho^2 P, A'PB; B'PA, B'PB]
// and reports its smallest eigenvalue.
MICertificate mi_check(double alpha, double beta, double rho,
                       const Ref<const Matrix>& p_tilde, double mu, double lipschitz,
                       double lambda_min);

// V_{P,alpha,c}(xi) = xi^T (P (x) I_Nd) xi + c [F_{W,a}(T xi + x_inf) - F_{W,a}(x_inf)]
// with T = [1 0] (x) I_Nd; xi stacks (x - x_inf, x_prev - x_inf).
double lyapunov_value(const Ref<const Matrix>& p_tilde, double c, double alpha,
                      const Ref<const Vector>& xi, const MixingMatrix& w,
                      const ObjectiveSuite& suite, const Ref<const Vector>& x_inf);

struct TradeoffParams {
  double mu = 0.0, lipschitz = 0.0, lambda_min = 0.0;
  double sigma = 0.0, c1 = 0.0, gamma = 0.0;
  int nodes = 0;
};

struct TradeoffResult {
  double alpha_star = 0.0;
  double j_tot = 0.0;
  double alpha_bar = 0.0;
  double rho_star = 0.0;
};

// J_tot(alpha): the variance plus network part of the D-ASG performance bound.
double tradeoff_j_tot(double alpha, const TradeoffParams& p);
// G(z) = J_tot(z^2) and its derivative; G is strictly increasing on z > 0.
double tradeoff_g(double z, const TradeoffParams& p);
double tradeoff_g_prime(double z, const TradeoffParams& p);

// Minimizes J_tot subject to the rate constraint 1 - sqrt(alpha mu) <=
// rho_*(1 + delta); closed form alpha* = (1 - rho_*(1 + delta))^2 / mu.
TradeoffResult tradeoff_alpha(double delta, const TradeoffParams& p);

struct MasgBoundReport {
  // stage-boundary bounds: entry t applies to the iterate after stage t+1
  std::vector<int> stage_t;
  std::vector<long> boundary_k;  // L_{t+1}
  std::vector<double> bias, variance, network, total;
  // per-iteration bound for k > k1, valid up to the unprinted O(1) constant
  BoundSeries per_k;
  bool per_k_up_to_constant = true;
};

MasgBoundReport masg_bound(const MasgSchedule& schedule, double p,
                           const BoundInputs& in, const std::vector<long>& per_ks = {});

// Iteration count that guarantees an epsilon-close solution (up to the
// leading constant, reported as 1): sqrt(kt) log(delta0/eps) +
// N sigma^2/(mu^2 eps) + N^(1/4) sqrt(c1/(1-gamma)) / (sqrt(mu) eps^(1/4)).
double masg_epsilon_complexity(double epsilon, double delta0, const BoundInputs& in);

// Stepsize cap under relative gradient noise:
// min(lambda_N/L, mu^3/(60 eta^2)^2) for eta > 0, else lambda_N/L.
double hat_alpha_relative(double mu, double lipschitz, double lambda_min, double eta);

}  // namespace dstoch
