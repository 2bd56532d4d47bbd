#include "qflow/crossflow.hpp"

#include <algorithm>
#include <cmath>

namespace qflow {

CrossPolicy CrossPolicy::parse(const std::string& text) {
  CrossPolicy p;
  std::string rest = text;
  auto take = [&](const std::string& suffix) {
    if (rest.size() >= suffix.size() && rest.compare(rest.size() - suffix.size(), suffix.size(), suffix) == 0) {
      rest.resize(rest.size() - suffix.size());
      return true;
    }
    return false;
  };
  if (take(":raw")) p.rescale = false;
  if (rest == "gradS") {
    p.kind = Kind::gradS_cross;
  } else if (rest.rfind("aux:", 0) == 0 && rest.size() == 5) {
    p.kind = Kind::auxiliary;
    const char c = rest[4];
    if (c == 'x') p.axis = Vec3::UnitX();
    else if (c == 'y') p.axis = Vec3::UnitY();
    else if (c == 'z') p.axis = Vec3::UnitZ();
    else throw ConfigError("unknown auxiliary potential: " + text);
  } else if (rest == "holland" || rest == "holland:+" || rest == "holland:-") {
    p.kind = Kind::holland;
    p.spin = rest == "holland:-" ? -1 : +1;
    p.rescale = false;
  } else {
    throw ConfigError("unknown cross policy: " + text);
  }
  return p;
}

std::string CrossPolicy::describe() const {
  std::string s;
  switch (kind) {
    case Kind::gradS_cross: s = "gradS"; break;
    case Kind::auxiliary:
      s = std::string("aux:") + (axis == Vec3::UnitX() ? "x" : axis == Vec3::UnitY() ? "y" : "z");
      break;
    case Kind::holland: return spin > 0 ? "holland" : "holland:-";
  }
  return rescale ? s : s + ":raw";
}

Vec3 holland_velocity(const QuantumState& s, const Vec3& x, double t, int spin, const Vec3& axis,
                      const NodeGuard& guard) {
  const PolarJet j = polar_jet(s, x, t, {}, guard);
  const Vec3 spin_vec = spin * (kHbar / 2.0) * axis;
  return (j.grad_rho / (kMass * j.rho)).cross(spin_vec);
}

namespace {

struct CrossPiece {
  Vec3 mu;
  double sine;
};

CrossPiece cross_piece(const PolarJet& j, const Vec3& x, const QuantumState& s, double t, const CrossPolicy& pol,
                       const NodeGuard& guard) {
  const auto [v, u] = momentae(j);
  (void)v;
  Vec3 c;
  double sine = 1.0;
  if (pol.kind == CrossPolicy::Kind::holland) {
    c = holland_velocity(s, x, t, pol.spin, pol.axis, guard);
    if (c.norm() == 0.0) throw DirectionUndefined("Holland velocity vanishes on the spin axis");
    sine = c.norm() / u.norm();
  } else {
    const Vec3 a = pol.kind == CrossPolicy::Kind::gradS_cross ? Vec3(j.grad_S) : pol.axis;
    const double an = a.norm(), un = u.norm();
    // round-off grad S of a real state carries no direction
    if (an <= kParallelSine * un || un == 0.0) throw DirectionUndefined("cross construction has a zero factor");
    c = a.cross(u);
    sine = c.norm() / (an * un);
    if (!(sine > kParallelSine)) throw DirectionUndefined("construction direction parallel to u");
  }
  if (pol.rescale) c *= u.norm() / c.norm();
  return {c, sine};
}

}  // namespace

Vec3 cross_velocity(const QuantumState& s, const Vec3& x, double t, const CrossPolicy& policy,
                    const NodeGuard& guard) {
  return cross_piece(polar_jet(s, x, t, {}, guard), x, s, t, policy, guard).mu;
}

nlohmann::json CrossDiagnostics::to_json() const {
  return {{"max_mu_dot_u", max_mu_dot_u},
          {"max_speed_mismatch", max_speed_mismatch},
          {"max_div_mu_fd", max_div_mu},
          {"max_div_rho_mu_fd", max_div_rho_mu},
          {"max_mu_dot_grad_rho", max_mu_dot_grad_rho},
          {"max_omega_dot_grad_rho", max_omega_dot_grad_rho},
          {"max_div_omega_fd", max_div_omega},
          {"max_energy_shift", max_energy_shift},
          {"solenoidal_asserted", solenoidal_asserted},
          {"nodes", nodes},
          {"skipped", skipped},
          {"ill_conditioned", ill_conditioned}};
}

CrossDiagnostics cross_diagnostics(const QuantumState& s, const Grid& g, double t, const CrossPolicy& policy,
                                   int threads, double min_sine) {
  if (g.size() == 0) throw DegenerateGrid("empty grid");
  const std::size_t nchunks = (g.size() + kChunk - 1) / kChunk;
  std::vector<CrossDiagnostics> part(nchunks);
  auto mu_at = [&](const Vec3& y) { return cross_velocity(s, y, t, policy); };
  auto rho_mu_at = [&](const Vec3& y) {
    const PolarJet j = polar_jet(s, y, t);
    return Vec3(j.rho * cross_piece(j, y, s, t, policy, {}).mu);
  };
  auto omega_at = [&](const Vec3& y) {
    const PolarJet j = polar_jet(s, y, t);
    return Vec3(cross_piece(j, y, s, t, policy, {}).mu + momentae(j).first);
  };
  parallel_chunks(g.size(), threads, [&](std::size_t c, std::size_t b, std::size_t e) {
    CrossDiagnostics& d = part[c];
    for (std::size_t i = b; i < e; ++i) {
      const Vec3& x = g.nodes[i];
      try {
        const PolarJet j = polar_jet(s, x, t);
        const CrossPiece cp = cross_piece(j, x, s, t, policy, {});
        const auto [v, u] = momentae(j);
        if (cp.sine < min_sine) {
          ++d.ill_conditioned;
          continue;
        }
        const Vec3& mu = cp.mu;
        d.max_mu_dot_u = std::max(d.max_mu_dot_u, std::abs(mu.dot(u)));
        if (policy.rescale) d.max_speed_mismatch = std::max(d.max_speed_mismatch, std::abs(mu.norm() - u.norm()));
        d.max_mu_dot_grad_rho = std::max(d.max_mu_dot_grad_rho, std::abs(mu.dot(j.grad_rho)));
        d.max_omega_dot_grad_rho = std::max(d.max_omega_dot_grad_rho, std::abs((mu + v).dot(j.grad_rho)));
        // energy equation with u replaced by mu differs by 1/2 rho (u^2 - mu^2)
        const FieldPoint fp = field_point(j, s.potential_value(x));
        const double natural = fp.ke_u + fp.ke_v + std::abs(fp.P) + std::abs(fp.U) * fp.rho + std::abs(fp.E) * fp.rho;
        d.max_energy_shift =
            std::max(d.max_energy_shift, 0.5 * kMass * j.rho * std::abs(u.squaredNorm() - mu.squaredNorm()) / natural);
        d.max_div_mu = std::max(d.max_div_mu, std::abs(fd_divergence(mu_at, x)));
        d.max_div_rho_mu = std::max(d.max_div_rho_mu, std::abs(fd_divergence(rho_mu_at, x)));
        d.max_div_omega = std::max(d.max_div_omega, std::abs(fd_divergence(omega_at, x)));
      } catch (const NodeError&) {
        ++d.skipped;
      } catch (const DirectionUndefined&) {
        ++d.skipped;
      } catch (const StencilError&) {
        ++d.skipped;
      } catch (const DomainError&) {
        ++d.skipped;
      }
    }
  });
  CrossDiagnostics out;
  for (const auto& d : part) {
    out.max_mu_dot_u = std::max(out.max_mu_dot_u, d.max_mu_dot_u);
    out.max_speed_mismatch = std::max(out.max_speed_mismatch, d.max_speed_mismatch);
    out.max_div_mu = std::max(out.max_div_mu, d.max_div_mu);
    out.max_div_rho_mu = std::max(out.max_div_rho_mu, d.max_div_rho_mu);
    out.max_mu_dot_grad_rho = std::max(out.max_mu_dot_grad_rho, d.max_mu_dot_grad_rho);
    out.max_omega_dot_grad_rho = std::max(out.max_omega_dot_grad_rho, d.max_omega_dot_grad_rho);
    out.max_div_omega = std::max(out.max_div_omega, d.max_div_omega);
    out.max_energy_shift = std::max(out.max_energy_shift, d.max_energy_shift);
    out.skipped += d.skipped;
    out.ill_conditioned += d.ill_conditioned;
  }
  out.nodes = g.size();
  if (double(out.skipped + out.ill_conditioned) > 0.01 * double(g.size()))
    throw DegenerateGrid("cross policy undefined on " + std::to_string(out.skipped + out.ill_conditioned) + " of " +
                         std::to_string(g.size()) + " nodes");
  // rescaling a cross product of gradients voids its solenoidality
  out.solenoidal_asserted = !policy.rescale && policy.kind != CrossPolicy::Kind::holland;
  return out;
}

Grid crossflow_grid(const QuantumState& s) {
  const double L = s.length_scale();
  return spherical_grid(24, 16, 16, 8.0 * L, 0.3 * L);
}

RadialForces radial_forces(const QuantumState& s, const Vec3& x, double t, const NodeGuard& guard) {
  if (!s.spherically_symmetric()) throw UnsupportedGeometry("radial forces need a spherically symmetric density");
  const auto f = flow_at<3>(s, x, t, {}, guard);
  const double r = x.norm();
  const Vec3 rhat = x / r;
  const double rho = f.rho.value();
  Vec3 gU, gP, u;
  for (int k = 0; k < 3; ++k) {
    gU[k] = deriv(f.U, k).value();
    gP[k] = deriv(f.P, k).value();
    u[k] = f.u[k].value();
  }
  RadialForces out;
  out.coulomb = -gU.dot(rhat);
  out.pressure = -gP.dot(rhat) / rho;
  out.centrifugal = u.squaredNorm() / r;
  return out;
}

Vec3 required_nowork_force(const QuantumState& s, const Vec3& x, const CrossPolicy& policy, double t,
                           const NodeGuard& guard) {
  if (policy.kind == CrossPolicy::Kind::gradS_cross)
    throw UnsupportedGeometry("nowork force needs an azimuthal cross policy");
  if (!s.spherically_symmetric()) throw UnsupportedGeometry("nowork force needs a spherically symmetric density");
  const Vec3 mu = cross_velocity(s, x, t, policy, guard);
  const Vec3 radial = x - x.dot(policy.axis) * policy.axis;
  const double rc = radial.norm();
  if (rc == 0.0) throw DirectionUndefined("point on the circulation axis");
  const auto f = flow_at<3>(s, x, t, {}, guard);
  Vec3 gU, gP;
  for (int k = 0; k < 3; ++k) {
    gU[k] = deriv(f.U, k).value();
    gP[k] = deriv(f.P, k).value();
  }
  return -(mu.squaredNorm() / rc) * (radial / rc) + gU + gP / f.rho.value();
}

std::vector<ResidualReport> cross_reports(const CrossDiagnostics& d, const CrossPolicy& policy, const Tolerances& tol) {
  std::vector<ResidualReport> out;
  auto add = [&](const std::string& name, const std::string& anchor, double value, double tolerance, bool asserted) {
    ResidualReport r;
    r.name = name;
    r.anchor = anchor;
    r.l_inf = r.l2 = r.rel = value;
    r.tolerance = tolerance;
    r.asserted = asserted;
    r.nodes = d.nodes;
    r.skipped = d.skipped + d.ill_conditioned;
    r.extra = {{"policy", policy.describe()}};
    r.decide();
    out.push_back(r);
  };
  add("crossflow.mu_dot_u", "mu perpendicular to u", d.max_mu_dot_u, tol.speed, true);
  if (policy.rescale) add("crossflow.speed", "|mu| = |u|", d.max_speed_mismatch, tol.speed, true);
  add("crossflow.mu_dot_grad_rho", "mu tangent to constant-rho surfaces", d.max_mu_dot_grad_rho, tol.holland, true);
  add("crossflow.div_mu", "div mu = 0 (FD)", d.max_div_mu, tol.cross_divergence, d.solenoidal_asserted);
  add("crossflow.div_rho_mu", "div (rho mu) = 0 (FD)", d.max_div_rho_mu, tol.cross_divergence, false);
  return out;
}

}  // namespace qflow
