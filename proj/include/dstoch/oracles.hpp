#pragma once

// Brute-force numerical verifiers. These are deliberately independent of the
// closed-form evaluators they are used to check: the eigensolver is a
// hand-rolled cyclic Jacobi, the Lyapunov solver is plain fixed-point
// iteration, and stationary statistics come from Monte-Carlo tails.

#include "dstoch/rng.hpp"
#include "dstoch/types.hpp"

#include <cmath>
#include <functional>

namespace dstoch::oracles {

struct JacobiResult {
  Vector eigenvalues;   // sorted descending
  Matrix eigenvectors;  // column j pairs with eigenvalues[j]
  int sweeps = 0;
  double offdiag_norm = 0.0;
};

// Cyclic Jacobi for symmetric dense matrices. Stops when the off-diagonal
// Frobenius norm drops below tol or after max_sweeps full sweeps.
JacobiResult jacobi_eigenvalues(const Ref<const Matrix>& a, double tol = 1e-12,
                                int max_sweeps = 100);

// Spectral radius of a general square matrix by power iteration. A two-step
// companion fit handles complex-conjugate dominant pairs; stagnation triggers
// a deterministic randomized restart.
double power_spectral_radius(const Ref<const Matrix>& a, double tol = 1e-8,
                             int max_iter = 200000);

struct LyapunovResult {
  Matrix sigma;
  double trace = 0.0;
  long iterations = 0;
  double residual = 0.0;
};

// Fixed point of Sigma = A Sigma A^T + Sigma_w by forward iteration.
// Requires rho(A) < 1 (checked up front).
LyapunovResult lyapunov_iterate(const Ref<const Matrix>& a,
                                const Ref<const Matrix>& sigma_w,
                                double tol = 1e-12, long max_iter = 1000000);

// Central finite differences, componentwise.
Vector fd_gradient(const std::function<double(const Vector&)>& f,
                   const Ref<const Vector>& x, double h);

struct McEstimate {
  double mean = 0.0;
  double stderr_of_mean = 0.0;
  int replicates = 0;
};

// Tail-averaged stationary statistic of a stochastic chain. make_chain(r)
// returns a sampler for replicate r that yields one scalar per step; the
// first burn_in values are discarded, the next `samples` averaged. Mean and
// standard error are taken across replicates in index order.
McEstimate mc_stationary_variance(
    const std::function<std::function<double()>(int)>& make_chain,
    long burn_in, long samples, int replicates, int jobs = 1);

}  // namespace dstoch::oracles
