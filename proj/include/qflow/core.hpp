// Common types, physical constants and error classes.
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <stdexcept>
#include <string>

namespace qflow {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Atomic units: hbar = m = 1.
inline constexpr double kHbar = 1.0;
inline constexpr double kMass = 1.0;
inline constexpr double kZeta0 = kHbar / 2.0;      // zeta_0 = hbar/2
inline constexpr double kZeta = kZeta0 / kMass;    // zeta = zeta_0/m
inline constexpr double kPi = 3.14159265358979323846;

struct QflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Density too small to divide by: a wavefunction node.
struct NodeError : QflowError {
  using QflowError::QflowError;
};
// More than the allowed fraction of grid nodes had to be skipped.
struct DegenerateGrid : QflowError {
  using QflowError::QflowError;
};
// A finite-difference stencil touched a node.
struct StencilError : QflowError {
  using QflowError::QflowError;
};
struct NoBracket : QflowError {
  using QflowError::QflowError;
};
// Cross direction vanishes (reference gradient parallel to u, or zero).
struct DirectionUndefined : QflowError {
  using QflowError::QflowError;
};
struct Escaped : QflowError {
  using QflowError::QflowError;
};
struct UnsupportedGeometry : QflowError {
  using QflowError::QflowError;
};
// Coulomb singularity hit by a derivative request.
struct DomainError : QflowError {
  using QflowError::QflowError;
};
// Bad input from a user: state document, grid spec, CLI flags.
struct ConfigError : QflowError {
  using QflowError::QflowError;
};

}  // namespace qflow
