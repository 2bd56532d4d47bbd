// Central tolerance record. Every suite and every acceptance check reads from
// here; QFLOW_TOL_SCALE multiplies all entries.
#pragma once

#include <map>
#include <string>

namespace qflow {

struct Tolerances {
  // node guard
  double node_abs = 1e-300;
  double node_rel = 1e-14;
  double max_skip_fraction = 0.01;
  // residual suites (relative)
  double continuity = 1e-8;
  double energy = 1e-10;
  double energy_fd = 1e-6;
  double euler = 1e-6;
  double momentum = 1e-8;
  double momentum_fd = 1e-5;
  double bohmian = 1e-10;
  double bohmian_fd = 1e-5;
  double orbital = 1e-8;
  double reduced_euler = 1e-8;
  // absolute checks
  double integral = 1e-6;
  double speed = 1e-10;
  double energy_uniform = 1e-10;
  double energy_uniform_fd = 1e-4;
  double root = 1e-6;
  double gamma_coupling = 1e-12;
  double closed_orbit = 1e-4;
  double hamiltonian = 1e-6;
  double holland = 1e-10;
  double cross_divergence = 1e-6;
  double pointwise_closed_form = 1e-8;
  double fd_gradient = 1e-6;
  double pair_norm = 1e-5;
  double gauss_tail = 1e-4;
  double hartree = 1e-4;
  double he_energy = 1e-3;
  double circulation = 1e-5;
  double mutual_failure = 1e-4;
  double refinement_ratio = 8.0;
  // smooth-flow classification: max|u.v| <= orthogonality * max (u^2+v^2)/2
  double orthogonality = 1e-8;
  // residual floor: when every additive term is below this fraction of the
  // equation's natural magnitude the terms are compared against that magnitude
  double term_floor = 1e-4;

  std::map<std::string, double*> table();
  // Apply "name=value" overrides; throws ConfigError on unknown names.
  void override_from(const std::string& spec);
  void scale(double s);
};

// Defaults scaled by QFLOW_TOL_SCALE (read once).
const Tolerances& default_tolerances();

}  // namespace qflow
