#include "dstoch/objectives.hpp"

#include "dstoch/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace dstoch {

namespace {

// log(1 + exp(-t)) without overflow for large |t|
double softplus_neg(double t) {
  if (t >= 0.0) return std::log1p(std::exp(-t));
  return -t + std::log1p(std::exp(t));
}

double logistic_sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

ObjectiveSuite ObjectiveSuite::quadratic(std::vector<QuadraticLocal> locals) {
  if (locals.empty()) throw ParameterOutOfRange("suite needs at least one node");
  ObjectiveSuite s;
  s.dim_ = static_cast<int>(locals.front().q.rows());
  for (const auto& l : locals) {
    if (l.q.rows() != s.dim_ || l.q.cols() != s.dim_ || l.p.size() != s.dim_)
      throw DimensionMismatch("quadratic local has inconsistent dimensions");
    if ((l.q - l.q.transpose()).cwiseAbs().maxCoeff() > 1e-10)
      throw ParameterOutOfRange("quadratic local Q must be symmetric");
  }
  s.quads_ = std::move(locals);
  s.derive_constants(std::nullopt);
  return s;
}

ObjectiveSuite ObjectiveSuite::logistic(std::vector<LogisticLocal> locals,
                                        std::optional<double> mu_override) {
  if (locals.empty()) throw ParameterOutOfRange("suite needs at least one node");
  ObjectiveSuite s;
  s.dim_ = static_cast<int>(locals.front().x.cols());
  for (const auto& l : locals) {
    if (l.x.cols() != s.dim_ || l.y.size() != l.x.rows() || l.x.rows() < 1)
      throw DimensionMismatch("logistic local has inconsistent dimensions");
    if (l.lambda <= 0.0)
      throw ParameterOutOfRange("logistic local needs lambda > 0 for strong convexity");
  }
  s.logis_ = std::move(locals);
  s.derive_constants(mu_override);
  return s;
}

double ObjectiveSuite::local_value(int i, const Ref<const Vector>& x) const {
  if (x.size() != dim_) throw DimensionMismatch("local_value: wrong dimension");
  if (is_quadratic()) {
    const auto& l = quads_[static_cast<std::size_t>(i)];
    return 0.5 * x.dot(l.q * x) - l.p.dot(x) + l.r;
  }
  const auto& l = logis_[static_cast<std::size_t>(i)];
  const Vector margins = l.y.asDiagonal() * (l.x * x);
  double loss = 0.0;
  for (int j = 0; j < margins.size(); ++j) loss += softplus_neg(margins(j));
  return loss / static_cast<double>(l.x.rows()) + l.lambda * x.squaredNorm();
}

void ObjectiveSuite::grad_local_into(int i, const Ref<const Vector>& x,
                                     Ref<Vector> out) const {
  if (x.size() != dim_ || out.size() != dim_)
    throw DimensionMismatch("grad_local: wrong dimension");
  if (is_quadratic()) {
    const auto& l = quads_[static_cast<std::size_t>(i)];
    out.noalias() = l.q * x;
    out -= l.p;
    return;
  }
  const auto& l = logis_[static_cast<std::size_t>(i)];
  const int n = static_cast<int>(l.x.rows());
  Vector coeff(n);
  const Vector margins = l.y.asDiagonal() * (l.x * x);
  for (int j = 0; j < n; ++j)
    coeff(j) = -l.y(j) * logistic_sigmoid(-margins(j)) / static_cast<double>(n);
  out.noalias() = l.x.transpose() * coeff;
  out += 2.0 * l.lambda * x;
}

Vector ObjectiveSuite::grad_local(int i, const Ref<const Vector>& x) const {
  Vector g(dim_);
  grad_local_into(i, x, g);
  return g;
}

double ObjectiveSuite::stacked_value(const Ref<const Vector>& x_stacked) const {
  const int n = nodes();
  if (x_stacked.size() != static_cast<long>(n) * dim_)
    throw DimensionMismatch("stacked_value: expected Nd vector");
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    total += local_value(i, x_stacked.segment(static_cast<long>(i) * dim_, dim_));
  return total;
}

Vector ObjectiveSuite::stacked_grad(const Ref<const Vector>& x_stacked) const {
  const int n = nodes();
  if (x_stacked.size() != static_cast<long>(n) * dim_)
    throw DimensionMismatch("stacked_grad: expected Nd vector");
  Vector g(x_stacked.size());
  for (int i = 0; i < n; ++i)
    grad_local_into(i, x_stacked.segment(static_cast<long>(i) * dim_, dim_),
                    g.segment(static_cast<long>(i) * dim_, dim_));
  return g;
}

const QuadraticLocal& ObjectiveSuite::quad(int i) const {
  if (!is_quadratic()) throw NonQuadraticSuite("suite is not quadratic");
  return quads_[static_cast<std::size_t>(i)];
}

const LogisticLocal& ObjectiveSuite::logi(int i) const {
  if (is_quadratic()) throw NonQuadraticSuite("suite is not logistic");
  return logis_[static_cast<std::size_t>(i)];
}

void ObjectiveSuite::derive_constants(std::optional<double> mu_override) {
  const int n = nodes();
  f_star_.resize(static_cast<std::size_t>(n));

  if (is_quadratic()) {
    mu_ = std::numeric_limits<double>::infinity();
    lipschitz_ = 0.0;
    Matrix q_sum = Matrix::Zero(dim_, dim_);
    Vector p_sum = Vector::Zero(dim_);
    for (const auto& l : quads_) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(l.q);
      mu_ = std::min(mu_, es.eigenvalues().minCoeff());
      lipschitz_ = std::max(lipschitz_, es.eigenvalues().maxCoeff());
      q_sum += l.q;
      p_sum += l.p;
    }
    if (mu_ <= 0.0) throw ParameterOutOfRange("quadratic suite is not strongly convex");

    Eigen::LDLT<Matrix> solver(q_sum);
    if (solver.info() != Eigen::Success || !solver.isPositive())
      throw SingularSystem("sum of Q_i is not positive definite");
    x_star_ = solver.solve(p_sum);

    for (int i = 0; i < n; ++i) {
      const auto& l = quads_[static_cast<std::size_t>(i)];
      const Vector xi = Eigen::LDLT<Matrix>(l.q).solve(l.p);
      f_star_[static_cast<std::size_t>(i)] = l.r - 0.5 * l.p.dot(xi);
    }
  } else {
    mu_ = 2.0 * logis_.front().lambda;
    lipschitz_ = 0.0;
    for (const auto& l : logis_) {
      mu_ = std::min(mu_, 2.0 * l.lambda);
      Eigen::SelfAdjointEigenSolver<Matrix> es(l.x.transpose() * l.x);
      lipschitz_ = std::max(
          lipschitz_, 2.0 * l.lambda + es.eigenvalues().maxCoeff() /
                                           (4.0 * static_cast<double>(l.x.rows())));
    }
    if (mu_override) mu_ = *mu_override;

    // global minimizer of f = (1/N) sum f_i by plain gradient descent
    Vector x = Vector::Zero(dim_);
    Vector g(dim_), gi(dim_);
    const double step = 1.0 / lipschitz_;
    for (long it = 0;; ++it) {
      g.setZero();
      for (int i = 0; i < n; ++i) {
        grad_local_into(i, x, gi);
        g += gi;
      }
      g /= static_cast<double>(n);
      if (g.norm() <= 1e-10) break;
      if (it >= 10000000)
        throw NoConvergence("logistic global minimizer did not converge");
      x -= step * g;
    }
    x_star_ = x;

    for (int i = 0; i < n; ++i) {
      Vector xi = Vector::Zero(dim_);
      const auto& l = logis_[static_cast<std::size_t>(i)];
      Eigen::SelfAdjointEigenSolver<Matrix> es(l.x.transpose() * l.x);
      const double li = 2.0 * l.lambda + es.eigenvalues().maxCoeff() /
                                             (4.0 * static_cast<double>(l.x.rows()));
      for (long it = 0;; ++it) {
        grad_local_into(i, xi, gi);
        if (gi.norm() <= 1e-10) break;
        if (it >= 10000000)
          throw NoConvergence("logistic per-node minimizer did not converge");
        xi -= gi / li;
      }
      f_star_[static_cast<std::size_t>(i)] = local_value(i, xi);
    }
  }

  if (mu_ > lipschitz_)
    throw ParameterOutOfRange("declared mu exceeds Lipschitz constant");

  // C1 = sqrt(2 L sum_i (f_i(0) - f_i^*)) * (1 + 2(L + mu)/mu)
  const Vector zero = Vector::Zero(dim_);
  double gap = 0.0;
  for (int i = 0; i < n; ++i)
    gap += local_value(i, zero) - f_star_[static_cast<std::size_t>(i)];
  gap = std::max(gap, 0.0);  // clamp the tiny negative left by the solves
  c1_ = std::sqrt(2.0 * lipschitz_ * gap) * (1.0 + 2.0 * (lipschitz_ + mu_) / mu_);

  Vector g_star(dim_);
  double norm_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    grad_local_into(i, x_star_, g_star);
    norm_sq += g_star.squaredNorm();
  }
  grad_at_xstar_norm_ = std::sqrt(norm_sq);
}

ObjectiveSuite make_random_quadratic_suite(int nodes, int dim, double mu,
                                           double lipschitz, std::uint64_t seed) {
  if (nodes < 1 || dim < 1 || mu <= 0.0 || lipschitz < mu)
    throw ParameterOutOfRange("make_random_quadratic_suite: bad parameters");
  CounterRng rng({seed, 0, 0}, 0);
  std::vector<QuadraticLocal> locals;
  locals.reserve(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) {
    // random orthogonal basis from the QR of a Gaussian matrix
    Matrix g(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) g(r, c) = rng.gaussian();
    Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix basis = qr.householderQ();

    Vector eigs(dim);
    for (int k = 0; k < dim; ++k) eigs(k) = mu + (lipschitz - mu) * rng.uniform();
    // pin the extremes so the declared (mu, L) are attained by the suite
    if (i == 0) eigs(0) = mu;
    if (i == nodes - 1 || nodes == 1) eigs(dim - 1) = lipschitz;

    QuadraticLocal l;
    l.q = basis * eigs.asDiagonal() * basis.transpose();
    l.q = 0.5 * (l.q + l.q.transpose());  // enforce exact symmetry
    l.p.resize(dim);
    for (int k = 0; k < dim; ++k) l.p(k) = rng.gaussian();
    l.r = rng.uniform();
    locals.push_back(std::move(l));
  }
  return ObjectiveSuite::quadratic(std::move(locals));
}

ObjectiveSuite make_shared_quadratic_suite(int nodes, int dim, double mu,
                                           double lipschitz, std::uint64_t seed) {
  if (nodes < 1 || dim < 2 || mu <= 0.0 || lipschitz < mu)
    throw ParameterOutOfRange("make_shared_quadratic_suite: bad parameters (dim >= 2)");
  CounterRng rng({seed, 0, 0}, 2);
  Matrix g(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) g(r, c) = rng.gaussian();
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix basis = qr.householderQ();
  Vector eigs(dim);
  eigs(0) = mu;
  eigs(dim - 1) = lipschitz;
  for (int k = 1; k < dim - 1; ++k) eigs(k) = mu + (lipschitz - mu) * rng.uniform();
  Matrix q = basis * eigs.asDiagonal() * basis.transpose();
  q = 0.5 * (q + q.transpose());

  std::vector<QuadraticLocal> locals(static_cast<std::size_t>(nodes));
  for (auto& l : locals) {
    l.q = q;
    l.p.resize(dim);
    for (int k = 0; k < dim; ++k) l.p(k) = rng.gaussian();
    l.r = rng.uniform();
  }
  return ObjectiveSuite::quadratic(std::move(locals));
}

ObjectiveSuite make_synthetic_logistic_suite(int nodes, int dim, int n_total,
                                             double sigma_x2, double lambda,
                                             std::uint64_t seed,
                                             std::optional<double> mu_override) {
  if (nodes < 1 || dim < 1 || n_total < nodes)
    throw ParameterOutOfRange("make_synthetic_logistic_suite: bad parameters");
  CounterRng rng({seed, 0, 0}, 1);
  Vector x0(dim);
  for (int k = 0; k < dim; ++k) x0(k) = rng.gaussian();

  const double sx = std::sqrt(sigma_x2);
  const int per_node = n_total / nodes;
  std::vector<LogisticLocal> locals;
  locals.reserve(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) {
    const int rows = (i == nodes - 1) ? n_total - per_node * (nodes - 1) : per_node;
    LogisticLocal l;
    l.x.resize(rows, dim);
    l.y.resize(rows);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < dim; ++c) l.x(r, c) = sx * rng.gaussian();
      const double m = l.x.row(r).dot(x0);
      l.y(r) = m >= 0.0 ? 1.0 : -1.0;
    }
    l.lambda = lambda;
    locals.push_back(std::move(l));
  }
  return ObjectiveSuite::logistic(std::move(locals), mu_override);
}

}  // namespace dstoch
