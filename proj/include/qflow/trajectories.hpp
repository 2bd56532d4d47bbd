// Point-mass paths along the flow fields, Hamiltonian sampling, closed-orbit
// detection and the radial force roots of hydrogenic s states.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qflow/crossflow.hpp"
#include "qflow/verifier.hpp"

namespace qflow {

enum class TrajectoryMode { madelung_v, bernoulli_w, cross_omega };
std::string to_string(TrajectoryMode m);
TrajectoryMode parse_mode(const std::string& text);  // v | w | cross (or the enum names)

struct TrajectorySample {
  double t = 0.0;
  Vec3 x = Vec3::Zero();
  Vec3 vel = Vec3::Zero();
  double H = 0.0;  // 1/2 |vel|^2 + P/rho + U
};

struct ClosedOrbit {
  double period = 0.0;
  double return_error = 0.0;  // distance from x0 of the first return to the initial plane
};

struct Trajectory {
  TrajectoryMode mode = TrajectoryMode::bernoulli_w;
  CrossPolicy policy;  // cross_omega only
  std::vector<TrajectorySample> samples;
  std::optional<ClosedOrbit> closed;

  nlohmann::json summary() const;
  void write_csv(std::ostream& os) const;
};

struct TraceOptions {
  CrossPolicy policy;
  NodeGuard guard;
  // Escaped once |x| exceeds this; <= 0 uses the state's reference grid radius.
  double escape_radius = -1.0;
  // Stop at the first return to the initial plane.
  bool stop_when_closed = false;
};

// Velocity of the chosen mode at (x, t).
Vec3 mode_velocity(const QuantumState& s, const Vec3& x, double t, TrajectoryMode mode, const TraceOptions& opt = {});
double path_hamiltonian(const QuantumState& s, const Vec3& x, double t, const Vec3& vel, const NodeGuard& guard = {});

// Fixed-step RK4 from t_span.first to t_span.second. Throws NodeError,
// Escaped, DirectionUndefined.
Trajectory integrate(const QuantumState& s, const Vec3& x0, TrajectoryMode mode, std::pair<double, double> t_span,
                     double dt, const TraceOptions& opt = {});

// First crossing of the plane through samples[0].x with normal samples[0].vel,
// from behind to in front, located on the cubic Hermite interpolant.
std::optional<ClosedOrbit> detect_closed_orbit(const std::vector<TrajectorySample>& samples);

// rel = (max H - min H) / |mean H|; extra carries mean/min/max.
ResidualReport hamiltonian_constancy(const Trajectory& traj, double tolerance = default_tolerances().hamiltonian);

// max |rho(x(t)) - rho(x(0))| / rho(x(0)) along the path.
double density_variation(const QuantumState& s, const Trajectory& traj);

// Root of (-grad U . r_hat - grad P . r_hat / rho) + |u|^2 / r along +x.
double modified_bohr_radius(const QuantumState& s);
// Same root for an arbitrary radial force profile scanned on [a, b].
double modified_bohr_radius(const std::function<double(double)>& radial_force, double a, double b);

// First zero of the pressure force -grad P . r_hat / rho (repulsive inside).
double pressure_force_crossover(const QuantumState& s);

}  // namespace qflow
