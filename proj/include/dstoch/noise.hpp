#pragma once

#include "dstoch/objectives.hpp"
#include "dstoch/rng.hpp"
#include "dstoch/types.hpp"

namespace dstoch {

enum class NoiseKind { Exact, GaussianIso, Relative, Minibatch };

// Gradient noise model. gaussian_iso adds isotropic noise with per-coordinate
// variance sigma^2/d, so total per-node variance is sigma^2. relative scales
// the total variance as sigma^2 + (eta^2/2) ||x - x*||^2. minibatch draws a
// uniform subsample without replacement (logistic suites only).
struct NoiseSpec {
  NoiseKind kind = NoiseKind::Exact;
  double sigma = 0.0;
  double eta = 0.0;
  double batch = 1.0;  // proportion in (0, 1]

  static NoiseSpec exact() { return {}; }
  static NoiseSpec gaussian_iso(double sigma) {
    if (sigma < 0.0) throw ParameterOutOfRange("sigma must be nonnegative");
    return {NoiseKind::GaussianIso, sigma, 0.0, 1.0};
  }
  static NoiseSpec relative(double sigma, double eta) {
    if (sigma < 0.0 || eta < 0.0)
      throw ParameterOutOfRange("sigma and eta must be nonnegative");
    return {NoiseKind::Relative, sigma, eta, 1.0};
  }
  static NoiseSpec minibatch(double b) {
    if (b <= 0.0 || b > 1.0) throw ParameterOutOfRange("batch proportion must be in (0,1]");
    return {NoiseKind::Minibatch, 0.0, 0.0, b};
  }
};

// Unbiased stochastic gradient of f_i at x; deterministic given the stream
// coordinates, so concurrent replicates reproduce exactly.
void sample_gradient_into(const NoiseSpec& spec, const ObjectiveSuite& suite, int node,
                          const Ref<const Vector>& x, const StreamCoords& coords,
                          Ref<Vector> out);
Vector sample_gradient(const NoiseSpec& spec, const ObjectiveSuite& suite, int node,
                       const Ref<const Vector>& x, const StreamCoords& coords);

// Plug-in estimate of the per-node noise level sigma^2 (mean squared gradient
// deviation over nodes), used when bound evaluation needs a sigma for noise
// models that do not declare one (minibatch).
double estimate_noise_sigma_sq(const NoiseSpec& spec, const ObjectiveSuite& suite,
                               const Ref<const Vector>& x, int samples,
                               std::uint64_t seed);

}  // namespace dstoch
