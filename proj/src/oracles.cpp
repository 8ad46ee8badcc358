#include "dstoch/oracles.hpp"

#include "dstoch/parallel.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace dstoch::oracles {

namespace {

double offdiag_frobenius(const Matrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

JacobiResult jacobi_eigenvalues(const Ref<const Matrix>& a_in, double tol,
                                int max_sweeps) {
  const int n = static_cast<int>(a_in.rows());
  if (n == 0 || a_in.cols() != n)
    throw DimensionMismatch("jacobi_eigenvalues: matrix must be square and nonempty");
  if ((a_in - a_in.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + a_in.cwiseAbs().maxCoeff()))
    throw InvalidMixingMatrix("jacobi_eigenvalues: matrix is not symmetric");

  Matrix a = a_in;
  Matrix v = Matrix::Identity(n, n);
  JacobiResult res;

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (offdiag_frobenius(a) <= tol) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        // smaller-magnitude root of t^2 + 2*theta*t - 1 = 0
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  res.sweeps = sweep;
  res.offdiag_norm = offdiag_frobenius(a);

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a(i, i) > a(j, j); });
  res.eigenvalues.resize(n);
  res.eigenvectors.resize(n, n);
  for (int j = 0; j < n; ++j) {
    res.eigenvalues(j) = a(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(j)]);
    res.eigenvectors.col(j) = v.col(order[static_cast<std::size_t>(j)]);
  }
  return res;
}

double power_spectral_radius(const Ref<const Matrix>& a, double tol,
                             int max_iter) {
  const int n = static_cast<int>(a.rows());
  if (n == 0 || a.cols() != n)
    throw DimensionMismatch("power_spectral_radius: matrix must be square");
  if (!a.allFinite())
    throw ParameterOutOfRange("power_spectral_radius: matrix has non-finite entries");
  if (n == 1) return std::abs(a(0, 0));

  const auto random_unit = [n](std::uint64_t seed) {
    CounterRng rng({seed, 0, 0}, 0);
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.gaussian();
    v.normalize();
    return v;
  };

  const int restarts = 4;
  const int per_start = std::max(16, max_iter / restarts);
  double best = 0.0;
  for (int attempt = 0; attempt < restarts; ++attempt) {
    Vector x = random_unit(0x0ddba11ULL + static_cast<std::uint64_t>(attempt));
    double estimate = -1.0;
    int stable = 0;
    for (int it = 0; it < per_start; ++it) {
      Vector y = a * x;
      const double ny = y.norm();
      if (ny < 1e-300) break;  // x fell into the kernel; try another start
      Vector z = a * y;

      // Fit z ~ p*y + q*x; the companion matrix [[p, q], [1, 0]] captures a
      // dominant real eigenvalue or a dominant complex-conjugate pair.
      Eigen::Matrix2d g;
      g << y.squaredNorm(), y.dot(x), y.dot(x), x.squaredNorm();
      Eigen::Vector2d rhs(z.dot(y), z.dot(x));
      double candidate;
      if (std::abs(g.determinant()) < 1e-14 * g(0, 0) * g(1, 1) + 1e-300) {
        candidate = ny / x.norm();  // x and y numerically colinear
      } else {
        const Eigen::Vector2d pq = g.ldlt().solve(rhs);
        const double p = pq(0), q = pq(1);
        const double disc = p * p / 4.0 + q;
        if (disc >= 0.0) {
          candidate = std::max(std::abs(p / 2.0 + std::sqrt(disc)),
                               std::abs(p / 2.0 - std::sqrt(disc)));
        } else {
          candidate = std::sqrt(-q);  // conjugate pair, |lambda|^2 = -q
        }
      }

      if (std::abs(candidate - estimate) <= tol * std::max(1.0, std::abs(candidate))) {
        if (++stable >= 3) return candidate;
      } else {
        stable = 0;
      }
      estimate = candidate;
      best = std::max(best, candidate);
      x = y / ny;
    }
    if (best == 0.0 && attempt == restarts - 1) return 0.0;  // nilpotent
  }
  throw NoConvergence("power_spectral_radius: no convergence within iteration cap");
}

LyapunovResult lyapunov_iterate(const Ref<const Matrix>& a,
                                const Ref<const Matrix>& sigma_w, double tol,
                                long max_iter) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || sigma_w.rows() != n || sigma_w.cols() != n)
    throw DimensionMismatch("lyapunov_iterate: dimension mismatch");
  const double radius = power_spectral_radius(a, 1e-6);
  if (radius >= 1.0)
    throw UnstableA("lyapunov_iterate: spectral radius " + std::to_string(radius) + " >= 1");

  LyapunovResult res;
  Matrix sigma = Matrix::Zero(n, n);
  for (long it = 0; it < max_iter; ++it) {
    Matrix next = a * sigma * a.transpose() + sigma_w;
    const double diff = (next - sigma).norm();
    sigma.swap(next);
    ++res.iterations;
    if (diff <= tol) {
      res.sigma = sigma;
      res.trace = sigma.trace();
      res.residual = (a * sigma * a.transpose() + sigma_w - sigma).norm();
      return res;
    }
  }
  throw NoConvergence("lyapunov_iterate: no convergence within iteration cap");
}

Vector fd_gradient(const std::function<double(const Vector&)>& f,
                   const Ref<const Vector>& x, double h) {
  Vector g(x.size());
  Vector xp = x, xm = x;
  for (int i = 0; i < x.size(); ++i) {
    xp(i) = x(i) + h;
    xm(i) = x(i) - h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
    xp(i) = x(i);
    xm(i) = x(i);
  }
  return g;
}

McEstimate mc_stationary_variance(
    const std::function<std::function<double()>(int)>& make_chain,
    long burn_in, long samples, int replicates, int jobs) {
  if (replicates < 1 || samples < 1)
    throw ParameterOutOfRange("mc_stationary_variance: need >= 1 replicate and sample");
  std::vector<double> tail_means(static_cast<std::size_t>(replicates), 0.0);
  parallel_for(replicates, jobs, [&](int r) {
    auto chain = make_chain(r);
    for (long i = 0; i < burn_in; ++i) chain();
    double acc = 0.0;
    for (long i = 0; i < samples; ++i) acc += chain();
    tail_means[static_cast<std::size_t>(r)] = acc / static_cast<double>(samples);
  });

  McEstimate est;
  est.replicates = replicates;
  double sum = 0.0;
  for (double m : tail_means) sum += m;
  est.mean = sum / static_cast<double>(replicates);
  if (replicates > 1) {
    double ss = 0.0;
    for (double m : tail_means) ss += (m - est.mean) * (m - est.mean);
    est.stderr_of_mean =
        std::sqrt(ss / static_cast<double>(replicates - 1) / static_cast<double>(replicates));
  }
  return est;
}

}  // namespace dstoch::oracles
