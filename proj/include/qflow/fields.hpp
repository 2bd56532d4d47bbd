// Correspondence variables (velocities, pressures, energies, quantum
// potential) computed from the derivative jet of Psi.
#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qflow/config.hpp"
#include "qflow/core.hpp"
#include "qflow/jet.hpp"
#include "qflow/numerics.hpp"
#include "qflow/states.hpp"

namespace qflow {

struct NodeGuard {
  double abs = 1e-300;
  // rho below rel * |grad Psi|^2 (one bohr^2) marks a node: the density has
  // collapsed while the amplitude slope has not, unlike a decaying tail.
  double rel = 1e-14;
  static NodeGuard from(const Tolerances& t) { return {t.node_abs, t.node_rel}; }
};

// Where derivatives of Psi come from. Finite differences use 4th-order central
// stencils; the step for a derivative of total order k along the differenced
// variables is h0[k] (1 + |x|) in space and dt0[k] in time.
struct DerivativePolicy {
  bool space_fd = false;
  bool time_fd = false;
  std::array<double, 5> h0{0.0, 1e-4, 1e-4, 1e-3, 5e-3};
  std::array<double, 5> dt0{0.0, 1e-4, 1e-4, 1e-3, 5e-3};

  bool analytic() const { return !space_fd && !time_fd; }
  static DerivativePolicy fd_space() { DerivativePolicy p; p.space_fd = true; return p; }
  static DerivativePolicy fd_time() { DerivativePolicy p; p.time_fd = true; return p; }
  static DerivativePolicy fd_all() { DerivativePolicy p; p.space_fd = p.time_fd = true; return p; }
};

template <int D>
CJet<D> psi_jet(const QuantumState& s, const Vec3& x, double t, const DerivativePolicy& pol = {});

// Every field as a jet. Psi has degree D; first-layer fields have degree D-1,
// pressures and other second-derivative fields degree D-2.
template <int D>
struct FlowJets {
  static_assert(D >= 2);
  Jet<D> rho;
  std::array<Jet<D - 1>, 3> grad_rho, j, v, u;
  Jet<D - 1> inv_rho, dt_rho, rho_dtS, E, F, U;
  Jet<D - 2> lap_rho, div_j, P, p;

  std::array<Jet<D - 1>, 3> w() const { return {u[0] + v[0], u[1] + v[1], u[2] + v[2]}; }
};

template <int D>
FlowJets<D> flow_jets(const CJet<D>& psi, const Jet<D>& U, const NodeGuard& guard = {});

template <int D>
FlowJets<D> flow_at(const QuantumState& s, const Vec3& x, double t, const DerivativePolicy& pol = {},
                    const NodeGuard& guard = {});

// Pointwise bundle of density and phase derivatives.
struct PolarJet {
  double rho = 0.0;
  Vec3 grad_rho = Vec3::Zero();
  double lap_rho = 0.0;
  double dt_rho = 0.0;
  Vec3 grad_S = Vec3::Zero();
  double dt_S = 0.0;
  double div_rho_gradS = 0.0;
  bool hess_S_available = false;
  Mat3 hess_S = Mat3::Zero();
};

PolarJet polar_jet(const QuantumState& s, const Vec3& x, double t, const DerivativePolicy& pol = {},
                   const NodeGuard& guard = {});

// Raises NodeError when jet.rho is not positive.
std::pair<Vec3, Vec3> momentae(const PolarJet& jet);          // (v, u)
std::pair<double, double> pressures(const PolarJet& jet);      // (P, p)
std::pair<double, double> energies(const PolarJet& jet);       // (E, F)
double quantum_potential(const PolarJet& jet);

struct FieldPoint {
  double rho = 0.0;
  Vec3 v = Vec3::Zero(), u = Vec3::Zero(), w = Vec3::Zero(), j = Vec3::Zero();
  double P = 0.0, p = 0.0, E = 0.0, F = 0.0, Ebar = 0.0, Q = 0.0, theta = 0.0, eta = 0.0;
  double ke_u = 0.0, ke_v = 0.0, U = 0.0;
};

FieldPoint field_point(const PolarJet& jet, double U);
FieldPoint field_point(const QuantumState& s, const Vec3& x, double t, const DerivativePolicy& pol = {},
                       const NodeGuard& guard = {});

struct FieldBundle {
  StateSpec state;
  double t = 0.0;
  std::string grid;
  std::vector<Vec3> nodes;
  std::vector<FieldPoint> points;
  std::vector<char> valid;
  std::size_t skipped = 0;

  nlohmann::json summary() const;
  void write_csv(std::ostream& os) const;
};

FieldBundle field_bundle(const QuantumState& s, const Grid& g, double t, int threads = 1,
                         const NodeGuard& guard = {}, double max_skip_fraction = -1.0);

// Values of Psi and its derivatives read off a degree-2 jet.
struct WaveSample {
  std::complex<double> psi, dt;
  std::array<std::complex<double>, 3> grad;
  std::complex<double> lap;
};
WaveSample wave_sample(const CJet<2>& psi);

// Density-form integrands that stay finite in decaying tails; no node guard
// beyond rho > 0 is needed because no field is divided by rho except the
// kinetic densities, whose ratios are bounded.
struct DensityTerms {
  double rho, P, p, E_rho, F_rho, ke_u, ke_v, U_rho;
};
DensityTerms density_terms(const QuantumState& s, const Vec3& x, double t);

}  // namespace qflow
