#pragma once

#include "dstoch/analysis.hpp"
#include "dstoch/netgraph.hpp"
#include "dstoch/objectives.hpp"
#include "dstoch/types.hpp"

#include <vector>

namespace dstoch {

// Eigenvalues of the quadratic iteration matrix W (x) I_d - alpha Q,
// non-increasing; they sit in [lambda_N - alpha L, 1 - alpha mu].
struct QuadSpectrum {
  Vector mu_list;
  double alpha = 0.0;
};

QuadSpectrum aq_spectrum(const MixingMatrix& w, double alpha,
                         const ObjectiveSuite& suite);

// Spectral radius of the 2Nd x 2Nd momentum iteration matrix, from the 2x2
// block eigenvalues ((1+b) mu_i +- sqrt((1+b)^2 mu_i^2 - 4 b mu_i))/2.
double rho_dasg_quadratic(const QuadSpectrum& spectrum, double beta);

// Dense assembly of the momentum iteration matrix, used by oracle tests.
Matrix assemble_a_dasg(const MixingMatrix& w, double alpha,
                       const ObjectiveSuite& suite, double beta);

struct ExactVariance {
  double limit_variance = 0.0;  // lim E||x - x_inf||^2 under isotropic noise
  double j_inf = 0.0;           // limit_variance / (sigma^2 N)
};

// lim Var = alpha^2 (sigma^2/d) sum_i 1/(1 - mu_i^2).
ExactVariance var_dsg_exact(const QuadSpectrum& spectrum, double sigma, int d);

// lim Var = (sigma^2/d) sum_i alpha^2 (1 + b mu_i) /
//           ((1-mu_i)(1-b mu_i)(2+2b-(1-mu_i)(1+2b))).
ExactVariance var_dasg_exact(const QuadSpectrum& spectrum, double beta, double sigma,
                             int d);

// Per-coordinate cap on the stationary variance of the node average; D-SG is
// the beta = 0 case.
double node_avg_var_bound(const QuadSpectrum& spectrum, double beta, double sigma,
                          int nodes, int d);

// Transient constant with the standard momentum: ||A^k|| <= C_k (1-sqrt(alpha mu))^k.
// Requires the certified regime (all mu_i in [0, 1 - alpha mu]).
double c_k_constant(const QuadSpectrum& spectrum, double mu, long k);

// The same constant for arbitrary beta via the 2x2 block eigenvalues.
double c_k_general(const QuadSpectrum& spectrum, double beta, long k);

// Finite-k mean-square bounds: the transient decays at the exact spectral
// rate while the floor is the exact asymptotic variance; the x* variant adds
// the usual network term.
BoundReport finite_k_bounds_quadratic(const std::vector<long>& ks,
                                      const QuadSpectrum& spectrum,
                                      RunConfig::Method method, double beta,
                                      const BoundInputs& in, int d);

}  // namespace dstoch
