// Closed-shell determinants reduced to one-body flows: reduced density and
// velocities, pair density, quantum charge, the quantum Coulomb field and
// potential, orbital residuals and the pair-density energy functional.
#pragma once

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "qflow/verifier.hpp"

namespace qflow {

// rho_hat normalized to 1 or to the number of bodies.
enum class DensityMode { unity, n };
DensityMode parse_density_mode(const std::string& text);
std::string to_string(DensityMode m);

struct ReducedPoint {
  double rho_hat = 0.0;
  Vec3 u_hat = Vec3::Zero();
  Vec3 v_hat = Vec3::Zero();
  double P_hat = 0.0;
};

class ReducedState {
 public:
  explicit ReducedState(const StateSpec& spec, DensityMode mode = DensityMode::n);
  ~ReducedState();
  ReducedState(const ReducedState&) = delete;
  ReducedState& operator=(const ReducedState&) = delete;

  const StateSpec& spec() const { return spec_; }
  DensityMode mode() const { return mode_; }
  int bodies() const { return n_; }
  const std::vector<QuantumState>& orbitals() const { return orbitals_; }
  const std::vector<int>& occupancy() const { return spec_.occupancy; }
  bool interacting() const { return spec_.interacting && n_ > 1; }
  // Every orbital spherically symmetric: pair quantities depend on radii only.
  bool radial() const { return radial_; }
  double radius() const { return radius_; }
  const Grid& quadrature() const { return quad_; }

  double external_potential(const Vec3& x) const;
  Vec3 external_gradient(const Vec3& x) const;
  // rho_hat = mode_scale * sum occ |phi|^2
  double mode_scale() const { return mode_ == DensityMode::n ? 1.0 : 1.0 / n_; }
  double rho_hat(const Vec3& x) const;
  // Spin-summed 1-dentrix sum occ phi(a) phi*(b).
  std::complex<double> one_dentrix(const Vec3& a, const Vec3& b) const;

  // c (rho(r1) rho(r2) - 1/2 |gamma(r1, r2)|^2) with c fixing the double
  // integral to n - 1; zero for a single body.
  double pair_density(const Vec3& r1, const Vec3& r2) const;
  double pair_constant() const { return pair_constant_; }
  // rho2 / rho_hat(r1)
  double charge(const Vec3& r1, const Vec3& r2) const;
  // f in int 2Q(r1, .) = f (n - 1)
  double field_factor() const { return n_ > 1 ? 2.0 * pair_constant_ / mode_scale() : 0.0; }
  // int rho2(r1, .) from quadrature overlaps
  double pair_marginal(const Vec3& r1) const;

  // Field of the charge 2Q(r1, .) at r1; zero without interaction.
  Vec3 coulomb_field(const Vec3& r1) const;
  // Bound on the charge left out by the excluded ball around r1 (general path).
  double excluded_charge(const Vec3& r1) const;
  // Line integral of the field from radius() inward plus the f (n-1)/R tail.
  double coulomb_potential(const Vec3& r1) const;
  // int 2Q(r1, r2)/|r1 - r2| dr2, the leading term of the alternative form.
  double direct_potential(const Vec3& r1) const;

  // Slater determinant / sqrt(n!) for spin orbitals (orbital i, spin 0/1).
  std::complex<double> amplitude(const std::vector<Vec3>& x, const std::vector<int>& spin) const;

  // Radial table (r, V_e, E_r) used by coulomb_potential on the radial path.
  void write_potential_csv(std::ostream& os) const;

  double general_excluded_radius = 1e-4;

 private:
  struct Table;
  double radial_field(double r) const;
  double radial_direct(double r) const;
  Vec3 general_field(const Vec3& r1) const;
  double general_direct(const Vec3& r1) const;
  double general_potential(const Vec3& r1) const;
  std::vector<std::complex<double>> orbital_values(const Vec3& x) const;

  StateSpec spec_;
  DensityMode mode_;
  int n_ = 0;
  std::vector<QuantumState> orbitals_;
  bool radial_ = false;
  double radius_ = 30.0;
  Grid quad_;
  Grid far_;  // origin-centred grid for the smooth part of general pair integrals
  double norm_ = 0.0;                          // int sum occ |phi|^2
  std::vector<std::complex<double>> overlap_;  // S_ij = <phi_i|phi_j>, row-major
  double pair_constant_ = 0.0;
  std::unique_ptr<Table> table_;
};

ReducedPoint reduced_fields(const ReducedState& s, const Vec3& x, const NodeGuard& guard = {});

// Pair and field diagnostics: normalization constant, Gauss-law tail, closed
// loop circulations, conservative-field residual, flow-mixture density
// relation and the exchange-hole sum.
struct CoulombRecord {
  double pair_constant = 0.0;
  double field_factor = 0.0;
  double tail_radius = 20.0;
  double tail_r2_field = 0.0;  // r^2 |E| at tail_radius
  double tail_expected = 0.0;  // f (n - 1)
  double max_circulation = 0.0;  // three unit circles
  double triangle_circulation = 0.0;
  bool nonconservative_warning = false;
  double conservative_residual = 0.0;  // max |E + grad V_e| over probes
  double direct_vs_line = 0.0;          // max |V_direct - V_e| over probes
  double mixture_density_mismatch = 0.0;  // max |(2/(n-1)) int rho2 - rho_hat| / max rho_hat
  double hole_sum = 0.0;                  // int rho_xc(r1, .) at r1 = (1, 0, 0)
  double excluded_charge = 0.0;
  nlohmann::json to_json() const;
};
CoulombRecord coulomb_diagnostics(const ReducedState& s, const Tolerances& tol = default_tolerances());

// Rayleigh quotient of orbital i with V + V_e.
double orbital_energy(const ReducedState& s, std::size_t i);

// Per orbital: the stationary Schrodinger equation with V + V_e, its energy
// (Bernoulli) form and its force form with the quantum Coulomb field.
// Asserted only where V_e vanishes (one body or no interaction).
std::vector<ResidualReport> orbital_residual(const ReducedState& s, const Grid& probes,
                                             const VerifyOptions& opt = {});

nlohmann::json energy_functional(const ReducedState& s, int threads = 1);

// Stationary reduced force balance
// 1/2 rho_m grad(u^2 + v^2) + div(rho_m u) u + grad P + rho grad V - rho E = 0,
// plus the per-orbital spoiler term as an unasserted companion report.
std::vector<ResidualReport> reduced_euler_residual(const ReducedState& s, const Grid& g,
                                                   const VerifyOptions& opt = {});

// Probe grid for pointwise many-body checks.
Grid manybody_probes(const ReducedState& s, std::size_t count, unsigned seed = 7);

}  // namespace qflow
