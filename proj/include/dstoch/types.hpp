#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace dstoch {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Matrix2 = Eigen::Matrix2d;
using Vector2 = Eigen::Vector2d;
using Matrix3 = Eigen::Matrix3d;
using Eigen::Ref;

// Base class for all library errors; subcategories below so callers and
// tests can catch specific failure modes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyGraph : Error { using Error::Error; };
struct NonRegularGraph : Error { using Error::Error; };
struct InvalidTopology : Error { using Error::Error; };
struct NonpositiveTau : Error { using Error::Error; };
struct InvalidMixingMatrix : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct MinibatchOnQuadratic : Error { using Error::Error; };
struct Assumption3Violated : Error { using Error::Error; };
struct AlphaOutOfRange : Error { using Error::Error; };
struct DeltaOutOfRange : Error { using Error::Error; };
struct ParameterOutOfRange : Error { using Error::Error; };
struct InvalidRho : Error { using Error::Error; };
struct NonPSDInput : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct UnstableA : Error { using Error::Error; };
struct UnstableSpectrum : Error { using Error::Error; };
struct DegenerateEigenvalue : Error { using Error::Error; };
struct RegimeViolation : Error { using Error::Error; };
struct NonQuadraticSuite : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace dstoch
