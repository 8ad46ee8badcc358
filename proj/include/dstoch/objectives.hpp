#pragma once

#include "dstoch/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace dstoch {

// f_i(x) = 0.5 x^T Q x - p^T x + r with Q symmetric positive definite.
struct QuadraticLocal {
  Matrix q;
  Vector p;
  double r = 0.0;
};

// f_i(x) = (1/n_i) sum_j log(1 + exp(-y_j <X_j, x>)) + lambda ||x||^2.
struct LogisticLocal {
  Matrix x;  // n_i rows, d columns
  Vector y;  // labels in {-1, +1}
  double lambda = 0.0;
};

// N homogeneous local objectives plus everything derived from them: strong
// convexity / smoothness constants, the global minimizer, per-node minima and
// the constant that controls the fixed-point-to-optimum offset. Immutable
// after construction; gradient evaluation is pure and reentrant.
class ObjectiveSuite {
 public:
  static ObjectiveSuite quadratic(std::vector<QuadraticLocal> locals);
  static ObjectiveSuite logistic(std::vector<LogisticLocal> locals,
                                 std::optional<double> mu_override = std::nullopt);

  bool is_quadratic() const { return !quads_.empty(); }
  int nodes() const { return static_cast<int>(is_quadratic() ? quads_.size() : logis_.size()); }
  int dim() const { return dim_; }

  double mu() const { return mu_; }
  double lipschitz() const { return lipschitz_; }
  double kappa() const { return lipschitz_ / mu_; }

  const Vector& x_star() const { return x_star_; }
  double f_local_star(int i) const { return f_star_[static_cast<std::size_t>(i)]; }
  double c1_constant() const { return c1_; }
  double grad_at_xstar_norm() const { return grad_at_xstar_norm_; }

  double local_value(int i, const Ref<const Vector>& x) const;
  Vector grad_local(int i, const Ref<const Vector>& x) const;
  void grad_local_into(int i, const Ref<const Vector>& x, Ref<Vector> out) const;

  // F(x) = sum_i f_i(x_i) on the stacked Nd vector and its gradient.
  double stacked_value(const Ref<const Vector>& x_stacked) const;
  Vector stacked_grad(const Ref<const Vector>& x_stacked) const;

  const QuadraticLocal& quad(int i) const;
  const LogisticLocal& logi(int i) const;

 private:
  ObjectiveSuite() = default;
  void derive_constants(std::optional<double> mu_override);

  std::vector<QuadraticLocal> quads_;
  std::vector<LogisticLocal> logis_;
  int dim_ = 0;
  double mu_ = 0.0;
  double lipschitz_ = 0.0;
  Vector x_star_;
  std::vector<double> f_star_;
  double c1_ = 0.0;
  double grad_at_xstar_norm_ = 0.0;
};

// Generators used by the harness and tests. Quadratics draw random symmetric
// Q_i with eigenvalues in [mu, L] (both endpoints attained across the suite)
// and random linear terms. The logistic generator follows the synthetic
// recipe: x0 ~ N(0, I), rows ~ N(0, sigma_x2 I), labels = sign(<row, x0>),
// data split evenly over nodes.
ObjectiveSuite make_random_quadratic_suite(int nodes, int dim, double mu, double lipschitz,
                                           std::uint64_t seed);

// All nodes share one random Q whose spectrum attains both mu and L (linear
// terms still differ per node). On such suites the closed-form spectral
// radius max(|1 - alpha mu|, |lambda_N - alpha L|) is attained exactly.
ObjectiveSuite make_shared_quadratic_suite(int nodes, int dim, double mu, double lipschitz,
                                           std::uint64_t seed);
ObjectiveSuite make_synthetic_logistic_suite(int nodes, int dim, int n_total,
                                             double sigma_x2, double lambda,
                                             std::uint64_t seed,
                                             std::optional<double> mu_override = std::nullopt);

}  // namespace dstoch
