// Cross velocities mu (mu.u = 0, |mu| = |u|), Holland's spin velocity and the
// normal force that keeps a cross flow on its circular streamlines.
#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "qflow/fields.hpp"
#include "qflow/numerics.hpp"
#include "qflow/states.hpp"
#include "qflow/verifier.hpp"

namespace qflow {

struct CrossPolicy {
  enum class Kind { gradS_cross, auxiliary, holland };
  Kind kind = Kind::auxiliary;
  // auxiliary: grad phi for phi = axis . x; holland: spin axis
  Vec3 axis = Vec3::UnitZ();
  bool rescale = true;
  // holland: s = spin (hbar/2) axis
  int spin = +1;

  // "gradS", "gradS:raw", "aux:z", "aux:x", "aux:y", "aux:z:raw", "holland", "holland:-"
  static CrossPolicy parse(const std::string& text);
  std::string describe() const;
};

// Sine of the angle between the construction direction and u below this is
// treated as parallel.
inline constexpr double kParallelSine = 1e-12;

Vec3 cross_velocity(const QuantumState& s, const Vec3& x, double t, const CrossPolicy& policy,
                    const NodeGuard& guard = {});

// (grad rho / m rho) x s with s = spin (hbar/2) axis; equals u sin(theta) phi_hat
// for a radial u and axis z.
Vec3 holland_velocity(const QuantumState& s, const Vec3& x, double t = 0.0, int spin = +1,
                      const Vec3& axis = Vec3::UnitZ(), const NodeGuard& guard = {});

struct CrossDiagnostics {
  double max_mu_dot_u = 0.0;
  double max_speed_mismatch = 0.0;  // ||mu| - |u||, rescaled policies
  double max_div_mu = 0.0;          // FD
  double max_div_rho_mu = 0.0;      // FD
  double max_mu_dot_grad_rho = 0.0;
  double max_omega_dot_grad_rho = 0.0;
  double max_div_omega = 0.0;  // FD, omega = mu + v
  double max_energy_shift = 0.0;  // |residual(u -> mu) - residual| / natural scale
  bool solenoidal_asserted = false;
  std::size_t nodes = 0, skipped = 0, ill_conditioned = 0;
  nlohmann::json to_json() const;
};

// Nodes where the cross construction is ill-conditioned (sine < min_sine)
// are counted and left out of the FD divergences.
CrossDiagnostics cross_diagnostics(const QuantumState& s, const Grid& g, double t, const CrossPolicy& policy,
                                   int threads = 1, double min_sine = 0.05);

// Spherical shell away from the nucleus and the polar axis region where FD
// divergences of normalized directions lose accuracy.
Grid crossflow_grid(const QuantumState& s);

// Pass/fail view of the diagnostics: orthogonality to u, speed match (rescaled),
// stratification along constant rho, and solenoidality where it is guaranteed.
std::vector<ResidualReport> cross_reports(const CrossDiagnostics& d, const CrossPolicy& policy,
                                          const Tolerances& tol = default_tolerances());

// Radial force pieces per unit mass along the ray through x; s states only.
struct RadialForces {
  double coulomb = 0.0;      // -grad U . r_hat
  double pressure = 0.0;     // -grad P . r_hat / rho
  double centrifugal = 0.0;  // mu^2 / r_c, r_c the distance to the axis
};
RadialForces radial_forces(const QuantumState& s, const Vec3& x, double t = 0.0, const NodeGuard& guard = {});

// Force that must be added so the cross flow circles the axis:
// F = -(mu^2/r_c) r_c_hat + grad U + grad P / rho. Only for azimuthal policies
// on spherically symmetric densities.
Vec3 required_nowork_force(const QuantumState& s, const Vec3& x, const CrossPolicy& policy, double t = 0.0,
                           const NodeGuard& guard = {});

}  // namespace qflow
