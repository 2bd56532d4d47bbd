// Analytic quantum states with exact derivative jets.
#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qflow/numerics.hpp"

#include "qflow/core.hpp"
#include "qflow/jet.hpp"

namespace qflow {

enum class StateKind { hydrogenic, oscillator1d, oscillator3d, coherent1d, superposition, determinant, perturbed };

struct StateSpec;

struct SuperpositionTerm {
  std::complex<double> coeff;
  std::shared_ptr<StateSpec> state;
};

struct StateSpec {
  StateKind kind = StateKind::hydrogenic;
  // hydrogenic
  int n = 1, l = 0, m = 0;
  double Z = 1.0;
  // oscillators
  int nx = 0, ny = 0, nz = 0;
  double omega = 1.0;
  std::complex<double> alpha{0.0, 0.0};
  // superposition
  std::vector<SuperpositionTerm> terms;
  // determinant (closed shell)
  std::vector<StateSpec> orbitals;
  std::vector<int> occupancy;
  double nuclear_charge = 0.0;  // external potential -Z/r for the many-body state
  bool interacting = true;      // false drops the pair Coulomb interaction
  // perturbed fixtures: rho -> rho * rho_growth^t, S -> S - energy_shift * t
  std::shared_ptr<StateSpec> base;
  double rho_growth = 1.0;
  double energy_shift = 0.0;

  static StateSpec hydrogen(int n, int l, int m, double Z = 1.0);
  static StateSpec oscillator(int n, double omega = 1.0);
  static StateSpec oscillator3(int nx, int ny, int nz, double omega = 1.0);
  static StateSpec coherent(std::complex<double> alpha, double omega = 1.0);
  static StateSpec superpose(const std::vector<std::pair<std::complex<double>, StateSpec>>& terms);
  static StateSpec closed_shell(const std::vector<StateSpec>& orbitals, double nuclear_charge,
                                bool interacting = true);
  static StateSpec perturb(const StateSpec& base, double rho_growth, double energy_shift = 0.0);

  std::string label() const;
  bool one_body() const { return kind != StateKind::determinant; }
};

void to_json(nlohmann::json& j, const StateSpec& s);
void from_json(const nlohmann::json& j, StateSpec& s);

// Parse a JSON document or a shorthand such as "hydrogen:2p1", "hydrogen:1s:Z=2",
// "oscillator:1", "coherent:1.0,0.5", "superposition:1s+2s", "he-like",
// "corrupted:hydrogen:1s". Throws ConfigError.
StateSpec parse_state(const std::string& text);

// Throws ConfigError when invariants fail (quantum numbers, normalization of
// superposition coefficients, shared Hamiltonian).
void validate(const StateSpec& s);

class QuantumState {
 public:
  explicit QuantumState(StateSpec spec);

  const StateSpec& spec() const { return spec_; }

  // Psi(x, t) as a jet of degree D in (x, y, z, t).
  template <int D>
  CJet<D> psi(const Vec3& x, double t) const;

  std::complex<double> eval(const Vec3& x, double t) const { return psi<0>(x, t).value(); }

  // External potential U(x) as a jet (time independent).
  template <int D>
  Jet<D> potential(const Vec3& x) const;

  double potential_value(const Vec3& x) const { return potential<0>(x).value(); }

  std::optional<double> eigen_energy() const;

  // Natural length of the state, used to size default grids.
  double length_scale() const;
  // Default grid radii: exponential tails reach 1e-12 relative density at
  // about 10 n^2/Z; Gaussian tails are cut a fixed number of widths past the
  // classical turning point so the density never underflows.
  GridExtent grid_extent() const;
  bool gaussian_tail() const;
  // Dimension of the coordinate space the state lives in (1 or 3).
  int dimension() const;
  // Spherical symmetry of |Psi|^2 (s states).
  bool spherically_symmetric() const;

 private:
  StateSpec spec_;
  std::vector<QuantumState> children_;
  std::vector<std::complex<double>> coeffs_;
  // hydrogenic: prefactor, Laguerre coefficients, solid-harmonic terms z^a (r^2)^b
  double prefactor_ = 0.0;
  std::vector<double> laguerre_;
  std::vector<std::pair<int, double>> harmonic_;  // (a, coeff) with b = (l - |m| - a)/2
  std::vector<double> hermite_[3];
};

std::optional<double> eigen_energy(const StateSpec& s);

}  // namespace qflow
