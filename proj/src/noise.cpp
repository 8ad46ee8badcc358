#include "dstoch/noise.hpp"

#include <cmath>
#include <vector>

namespace dstoch {

namespace {

double logistic_sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

void sample_gradient_into(const NoiseSpec& spec, const ObjectiveSuite& suite, int node,
                          const Ref<const Vector>& x, const StreamCoords& coords,
                          Ref<Vector> out) {
  const int d = suite.dim();
  if (x.size() != d || out.size() != d)
    throw DimensionMismatch("sample_gradient: wrong dimension");

  switch (spec.kind) {
    case NoiseKind::Exact:
      suite.grad_local_into(node, x, out);
      return;

    case NoiseKind::GaussianIso: {
      suite.grad_local_into(node, x, out);
      CounterRng rng(coords, static_cast<std::uint64_t>(node));
      const double scale = spec.sigma / std::sqrt(static_cast<double>(d));
      for (int k = 0; k < d; ++k) out(k) += scale * rng.gaussian();
      return;
    }

    case NoiseKind::Relative: {
      suite.grad_local_into(node, x, out);
      CounterRng rng(coords, static_cast<std::uint64_t>(node));
      const double total =
          spec.sigma * spec.sigma +
          0.5 * spec.eta * spec.eta * (x - suite.x_star()).squaredNorm();
      const double scale = std::sqrt(total / static_cast<double>(d));
      for (int k = 0; k < d; ++k) out(k) += scale * rng.gaussian();
      return;
    }

    case NoiseKind::Minibatch: {
      if (suite.is_quadratic())
        throw MinibatchOnQuadratic("minibatch noise requires a logistic suite");
      const auto& l = suite.logi(node);
      const int n = static_cast<int>(l.x.rows());
      const int m = static_cast<int>(std::ceil(spec.batch * n));
      if (m >= n) {  // full batch degenerates to the exact gradient
        suite.grad_local_into(node, x, out);
        return;
      }
      CounterRng rng(coords, static_cast<std::uint64_t>(node));
      std::vector<int> rows;
      rng.sample_without_replacement(n, m, rows);
      out.setZero();
      for (int j : rows) {
        const double margin = l.y(j) * l.x.row(j).dot(x);
        out += (-l.y(j) * logistic_sigmoid(-margin)) * l.x.row(j).transpose();
      }
      out /= static_cast<double>(m);
      out += 2.0 * l.lambda * x;
      return;
    }
  }
  throw ParameterOutOfRange("sample_gradient: unknown noise kind");
}

Vector sample_gradient(const NoiseSpec& spec, const ObjectiveSuite& suite, int node,
                       const Ref<const Vector>& x, const StreamCoords& coords) {
  Vector g(suite.dim());
  sample_gradient_into(spec, suite, node, x, coords, g);
  return g;
}

double estimate_noise_sigma_sq(const NoiseSpec& spec, const ObjectiveSuite& suite,
                               const Ref<const Vector>& x, int samples,
                               std::uint64_t seed) {
  if (spec.kind == NoiseKind::Exact) return 0.0;
  if (spec.kind == NoiseKind::GaussianIso) return spec.sigma * spec.sigma;

  const int n = suite.nodes();
  Vector g(suite.dim()), exact(suite.dim());
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    suite.grad_local_into(i, x, exact);
    double acc = 0.0;
    for (int s = 0; s < samples; ++s) {
      sample_gradient_into(spec, suite, i, x, {seed, 0xe571ULL, static_cast<std::uint64_t>(s)}, g);
      acc += (g - exact).squaredNorm();
    }
    worst = std::max(worst, acc / static_cast<double>(samples));
  }
  return worst;
}

}  // namespace dstoch
