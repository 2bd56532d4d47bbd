// Named residual suites: every relation between the flow variables is
// evaluated pointwise on a grid (or integrated) and normalized by its terms.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qflow/config.hpp"
#include "qflow/fields.hpp"
#include "qflow/numerics.hpp"
#include "qflow/states.hpp"

namespace qflow {

struct ResidualReport {
  std::string name;
  std::string anchor;  // the relation being checked, in words
  double l_inf = 0.0;
  double l2 = 0.0;     // weighted RMS of the residual
  double rel = 0.0;    // l_inf / largest term (floored)
  double tolerance = 0.0;
  bool pass = false;
  // Diagnostics are reported but never fail a run.
  bool asserted = true;
  std::size_t nodes = 0;
  std::size_t skipped = 0;
  nlohmann::json extra = nlohmann::json::object();

  void decide() { pass = rel <= tolerance; }
};

void to_json(nlohmann::json& j, const ResidualReport& r);

struct VerifyOptions {
  Tolerances tol = default_tolerances();
  DerivativePolicy deriv;
  NodeGuard guard;
  int threads = 1;
  // Test hooks that break a relation on purpose.
  double dt_rho_scale = 1.0;         // multiplies time derivatives of rho-built fields in the momentum laws
  bool drop_pressure_in_Q = false;  // Q <- 1/2 u^2 in the Bohmian energy equation
};

// One equation at one node: residual magnitude, largest term magnitude, and
// the equation's natural scale (used only as a floor when all terms vanish).
struct EqSample {
  double res = 0.0;
  double term = 0.0;
  double natural = 0.0;
};

struct EqInfo {
  std::string name;
  std::string anchor;
  double tolerance;
};

// Evaluate several equations at every node and reduce to reports.
std::vector<ResidualReport> run_pointwise(const std::vector<EqInfo>& eqs, const Grid& g,
                                          const std::function<void(const Vec3&, EqSample*)>& eval,
                                          const VerifyOptions& opt);

std::vector<ResidualReport> continuity_six(const QuantumState& s, const Grid& g, double t,
                                           const VerifyOptions& opt = {});

enum class EnergyForm { two_velocity, single_velocity };
ResidualReport energy_equation_residual(const QuantumState& s, const Grid& g, double t, EnergyForm form,
                                        const VerifyOptions& opt = {});

// Mean and standard deviation of E over the evaluated nodes.
struct Uniformity {
  double mean = 0.0, stddev = 0.0, max_dev = 0.0;
  std::size_t count = 0;
};
Uniformity energy_uniformity(const QuantumState& s, const Grid& g, double t, const VerifyOptions& opt = {});

enum class EulerVariant { euler0, euler1, euler3, full0000 };
std::string to_string(EulerVariant v);
ResidualReport euler_residual(const QuantumState& s, const Grid& g, double t, EulerVariant variant,
                              const VerifyOptions& opt = {});

std::vector<ResidualReport> momentum_balance_residuals(const QuantumState& s, const Grid& g, double t,
                                                       const VerifyOptions& opt = {});

struct ConservationRecord {
  double norm = 0.0, P = 0.0, p = 0.0, E_rho = 0.0, F_rho = 0.0, kinetic = 0.0, kinetic_u = 0.0, kinetic_v = 0.0;
  std::optional<double> centrifugal;  // <m^2 / (2 rho_c^2)> for hydrogenic states
  std::optional<double> target_E;     // sum |C_i|^2 eps_i when known
  std::optional<double> target_kinetic;
  std::size_t nodes = 0, skipped = 0;
  nlohmann::json to_json() const;
};
ConservationRecord conservation_integrals(const QuantumState& s, const Grid& g, double t, int threads = 1);
std::vector<ResidualReport> conservation_reports(const ConservationRecord& rec, const Tolerances& tol);

std::vector<ResidualReport> bohmian_equivalence(const QuantumState& s, const Grid& g, double t,
                                                const VerifyOptions& opt = {});

// Pointwise identities among the fields (momentum modulus, kinetic split,
// Bohm potential, strong-variable energy, pressure expansions).
std::vector<ResidualReport> field_identities(const QuantumState& s, const Grid& g, double t,
                                             const VerifyOptions& opt = {});

struct OrthogonalityRecord {
  double max_u_dot_v = 0.0;
  double max_kinetic = 0.0;  // max (u^2 + v^2)/2, the scale for u.v
  double max_div_v = 0.0;
  double max_div_v_fd = 0.0;
  bool smooth = false;
  std::size_t nodes = 0, skipped = 0;
  nlohmann::json to_json() const;
};
OrthogonalityRecord orthogonality_diagnostics(const QuantumState& s, const Grid& g, double t,
                                              const VerifyOptions& opt = {});

// Suite names accepted by the CLI.
const std::vector<std::string>& suite_names();
std::vector<ResidualReport> run_suite(const std::string& suite, const QuantumState& s, const Grid& g, double t,
                                      const VerifyOptions& opt, nlohmann::json* records = nullptr);

}  // namespace qflow
