#include "qflow/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qflow {

void to_json(nlohmann::json& j, const ResidualReport& r) {
  j = {{"name", r.name},   {"anchor", r.anchor},       {"l_inf", r.l_inf},   {"l2", r.l2},
       {"rel", r.rel},     {"tolerance", r.tolerance}, {"pass", r.pass},     {"asserted", r.asserted},
       {"nodes", r.nodes}, {"skipped", r.skipped}};
  if (!r.extra.empty()) j["extra"] = r.extra;
}

namespace {

template <int D>
using V3 = std::array<Jet<D>, 3>;

template <int D>
V3<D - 1> grad(const Jet<D>& a) {
  return {deriv(a, 0), deriv(a, 1), deriv(a, 2)};
}
template <int D>
Jet<D - 1> div(const V3<D>& a) {
  return deriv(a[0], 0) + deriv(a[1], 1) + deriv(a[2], 2);
}
template <int D>
Jet<D> dot(const V3<D>& a, const V3<D>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
template <int D>
V3<D - 1> dt(const V3<D>& a) {
  return {deriv(a[0], kT), deriv(a[1], kT), deriv(a[2], kT)};
}
template <int D2, int D>
V3<D2> trunc(const V3<D>& a) {
  return {truncate<D2>(a[0]), truncate<D2>(a[1]), truncate<D2>(a[2])};
}
template <int D>
V3<D> mul(const Jet<D>& s, const V3<D>& a) {
  return {s * a[0], s * a[1], s * a[2]};
}
template <int D>
Vec3 val(const V3<D>& a) {
  return {a[0].value(), a[1].value(), a[2].value()};
}

// Sum of signed terms; residual magnitude and largest term magnitude.
EqSample scalar_eq(std::initializer_list<double> terms, double natural) {
  EqSample e;
  double r = 0.0;
  for (double t : terms) {
    r += t;
    e.term = std::max(e.term, std::abs(t));
  }
  e.res = std::abs(r);
  e.natural = natural;
  return e;
}

EqSample vector_eq(std::initializer_list<Vec3> terms, double natural) {
  EqSample e;
  Vec3 r = Vec3::Zero();
  for (const Vec3& t : terms) {
    r += t;
    e.term = std::max(e.term, t.norm());
  }
  e.res = r.norm();
  e.natural = natural;
  return e;
}

// Energy per particle of every additive piece of the energy equation.
template <int D>
double local_energy(const FlowJets<D>& f) {
  const double rho = f.rho.value();
  const Vec3 u = val(f.u), v = val(f.v);
  return 0.5 * kMass * (u.squaredNorm() + v.squaredNorm()) + std::abs(f.P.value()) / rho + std::abs(f.U.value()) +
         std::abs(f.E.value());
}

// Force per mass scale: |grad U| + |grad(P/rho)| + |grad u^2|/2 + |grad v^2|/2.
template <int D>
double local_force(const FlowJets<D>& f) {
  const auto P_rho = f.P * truncate<D - 2>(f.inv_rho);
  return val(grad(f.U)).norm() + val(grad(P_rho)).norm() + 0.5 * val(grad(dot(f.u, f.u))).norm() +
         0.5 * val(grad(dot(f.v, f.v))).norm();
}

double suite_tol(const VerifyOptions& o, double analytic, double fd) { return o.deriv.analytic() ? analytic : fd; }

}  // namespace

std::vector<ResidualReport> run_pointwise(const std::vector<EqInfo>& eqs, const Grid& g,
                                          const std::function<void(const Vec3&, EqSample*)>& eval,
                                          const VerifyOptions& opt) {
  if (g.size() == 0) throw DegenerateGrid("empty grid");
  const std::size_t k = eqs.size();
  const std::size_t nchunks = (g.size() + kChunk - 1) / kChunk;
  struct Acc {
    std::vector<double> res, term, natural, sq;
    double w = 0.0;
    std::size_t skipped = 0;
  };
  std::vector<Acc> acc(nchunks);
  parallel_chunks(g.size(), opt.threads, [&](std::size_t c, std::size_t b, std::size_t e) {
    Acc& a = acc[c];
    a.res.assign(k, 0.0);
    a.term.assign(k, 0.0);
    a.natural.assign(k, 0.0);
    a.sq.assign(k, 0.0);
    std::vector<EqSample> s(k);
    for (std::size_t i = b; i < e; ++i) {
      try {
        eval(g.nodes[i], s.data());
      } catch (const NodeError&) {
        ++a.skipped;
        continue;
      } catch (const StencilError&) {
        ++a.skipped;
        continue;
      } catch (const DomainError&) {
        ++a.skipped;
        continue;
      }
      const double w = g.weights[i];
      a.w += w;
      for (std::size_t q = 0; q < k; ++q) {
        a.res[q] = std::max(a.res[q], s[q].res);
        a.term[q] = std::max(a.term[q], s[q].term);
        a.natural[q] = std::max(a.natural[q], s[q].natural);
        a.sq[q] += w * s[q].res * s[q].res;
      }
    }
  });
  std::size_t skipped = 0;
  double wsum = 0.0;
  std::vector<double> res(k, 0.0), term(k, 0.0), natural(k, 0.0);
  std::vector<std::vector<double>> sq(k);
  for (const auto& a : acc) {
    skipped += a.skipped;
    wsum += a.w;
    for (std::size_t q = 0; q < k; ++q) {
      res[q] = std::max(res[q], a.res[q]);
      term[q] = std::max(term[q], a.term[q]);
      natural[q] = std::max(natural[q], a.natural[q]);
      sq[q].push_back(a.sq[q]);
    }
  }
  if (double(skipped) > opt.tol.max_skip_fraction * double(g.size()))
    throw DegenerateGrid("residual suite skipped " + std::to_string(skipped) + " of " + std::to_string(g.size()) +
                         " nodes");
  std::vector<ResidualReport> out(k);
  for (std::size_t q = 0; q < k; ++q) {
    ResidualReport& r = out[q];
    r.name = eqs[q].name;
    r.anchor = eqs[q].anchor;
    r.tolerance = eqs[q].tolerance;
    r.l_inf = res[q];
    r.l2 = wsum > 0 ? std::sqrt(ordered_sum(sq[q]) / wsum) : 0.0;
    const double denom = std::max(term[q], opt.tol.term_floor * natural[q]);
    r.rel = denom > 0 ? res[q] / denom : (res[q] > 0 ? std::numeric_limits<double>::infinity() : 0.0);
    r.nodes = g.size();
    r.skipped = skipped;
    r.extra["max_term"] = term[q];
    r.decide();
  }
  return out;
}

std::vector<ResidualReport> continuity_six(const QuantumState& s, const Grid& g, double t,
                                           const VerifyOptions& opt) {
  const double tol = suite_tol(opt, opt.tol.continuity, opt.tol.energy_fd);
  const std::vector<EqInfo> eqs = {
      {"continuity.1", "second pressure equals zeta0 times the density rate: p = zeta0 d(rho)", tol},
      {"continuity.2", "continuity with the Madelung velocity: d(rho) + grad(rho).v + rho div v = 0", tol},
      {"continuity.3", "second energy density equals the second pressure: F rho = p", tol},
      {"continuity.4", "imaginary part of the Schroedinger equation: Im(i Psi* dPsi - Psi* H Psi) = 0", tol},
      {"continuity.5", "continuity with the probability current: d(rho) + div j = 0", tol},
      {"continuity.6", "real part of Psi* dPsi plus half the divergence of Re(Psi* P Psi) vanishes", tol},
  };
  auto eval = [&](const Vec3& x, EqSample* out) {
    const CJet<2> psi = psi_jet<2>(s, x, t, opt.deriv);
    const auto f = flow_jets<2>(psi, s.potential<2>(x), opt.guard);
    const WaveSample w = wave_sample(psi);
    const double rho = f.rho.value(), drho = f.dt_rho.value(), p = f.p.value(), U = f.U.value();
    const Vec3 v = val(f.v), grad_rho = val(f.grad_rho);
    const double natural = rho * local_energy(f);
    const std::complex<double> cj = std::conj(w.psi), I(0.0, 1.0);
    out[0] = scalar_eq({p, -kZeta0 * drho}, natural);
    out[1] = scalar_eq({drho, grad_rho.dot(v), rho * div(f.v).value()}, natural);
    out[2] = scalar_eq({f.F.value() * rho, -p}, natural);
    const std::complex<double> HPsi = -kHbar * kHbar / (2.0 * kMass) * w.lap + U * w.psi;
    out[3] = scalar_eq({std::imag(I * kHbar * cj * w.dt), -std::imag(cj * HPsi)}, natural);
    out[4] = scalar_eq({drho, f.div_j.value()}, natural);
    std::complex<double> grad2 = 0.0;
    for (int k = 0; k < 3; ++k) grad2 += std::conj(w.grad[k]) * w.grad[k];
    // div(Psi* (-i hbar grad Psi)) = -i hbar (|grad Psi|^2 + Psi* lap Psi)
    const std::complex<double> div_flux = -I * kHbar * (grad2 + cj * w.lap);
    out[5] = scalar_eq({kHbar * std::real(cj * w.dt), kHbar / (2.0 * kMass) * std::real(div_flux)}, natural);
  };
  return run_pointwise(eqs, g, eval, opt);
}

ResidualReport energy_equation_residual(const QuantumState& s, const Grid& g, double t, EnergyForm form,
                                        const VerifyOptions& opt) {
  const double tol = suite_tol(opt, opt.tol.energy, opt.tol.energy_fd);
  EqInfo info = form == EnergyForm::two_velocity
                    ? EqInfo{"energy.two_velocity",
                             "first energy equation: E rho = 1/2 rho u^2 + 1/2 rho v^2 + P + U rho", tol}
                    : EqInfo{"energy.single_velocity",
                             "single-velocity total energy: Ebar rho = 1/2 rho w^2 + P - eta div v + U rho", tol};
  auto eval = [&](const Vec3& x, EqSample* out) {
    const auto f = flow_at<2>(s, x, t, opt.deriv, opt.guard);
    const double rho = f.rho.value(), P = f.P.value(), U = f.U.value();
    const Vec3 u = val(f.u), v = val(f.v);
    const double natural = rho * local_energy(f);
    if (form == EnergyForm::two_velocity) {
      out[0] = scalar_eq({f.E.value() * rho, -0.5 * kMass * rho * u.squaredNorm(),
                          -0.5 * kMass * rho * v.squaredNorm(), -P, -U * rho},
                         natural);
    } else {
      const Vec3 w = u + v;
      const double eta = kZeta0 * rho;
      out[0] = scalar_eq({(f.E.value() + f.F.value()) * rho, -0.5 * kMass * rho * w.squaredNorm(), -P,
                          eta * div(f.v).value(), -U * rho},
                         natural);
    }
  };
  return run_pointwise({info}, g, eval, opt)[0];
}

Uniformity energy_uniformity(const QuantumState& s, const Grid& g, double t, const VerifyOptions& opt) {
  std::vector<double> E(g.size(), std::numeric_limits<double>::quiet_NaN());
  parallel_chunks(g.size(), opt.threads, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      try {
        E[i] = field_point(s, g.nodes[i], t, opt.deriv, opt.guard).E;
      } catch (const NodeError&) {
      } catch (const StencilError&) {
      } catch (const DomainError&) {
      }
    }
  });
  Uniformity u;
  std::vector<double> vals;
  for (double e : E)
    if (!std::isnan(e)) vals.push_back(e);
  u.count = vals.size();
  if (vals.empty()) throw DegenerateGrid("no node evaluable for the energy field");
  u.mean = ordered_sum(vals) / double(vals.size());
  std::vector<double> dev2;
  for (double e : vals) {
    dev2.push_back((e - u.mean) * (e - u.mean));
    u.max_dev = std::max(u.max_dev, std::abs(e - u.mean));
  }
  u.stddev = std::sqrt(ordered_sum(dev2) / double(vals.size()));
  return u;
}

std::string to_string(EulerVariant v) {
  switch (v) {
    case EulerVariant::euler0: return "euler0";
    case EulerVariant::euler1: return "euler1";
    case EulerVariant::euler3: return "euler3";
    case EulerVariant::full0000: return "full0000";
  }
  return "?";
}

ResidualReport euler_residual(const QuantumState& s, const Grid& g, double t, EulerVariant variant,
                              const VerifyOptions& opt) {
  const double tol = opt.tol.euler;
  static const char* anchors[] = {
      "Euler equation with two velocities: rho dv + 1/2 rho grad(u^2+v^2) + grad P + div(rho u) u + rho grad U = 0",
      "Euler equation in w with bulk-viscosity term: rho dw + 1/2 rho grad w^2 + grad P + rho grad U + div(rho u) u "
      "= eta grad(div v)",
      "Euler equation with both pressures: d(rho u) + rho dv + 1/2 rho grad(u^2+v^2) + grad(P+p) + div(rho u) u + "
      "rho grad U = 0",
      "full momentum balance of rho w with the coupling force Gamma = (1/zeta)((u.v) rho u + P v - p u)",
  };
  const int vi = int(variant);
  EqInfo info{"euler." + to_string(variant), anchors[vi], tol};
  auto eval = [&](const Vec3& x, EqSample* out) {
    const auto f = flow_at<3>(s, x, t, opt.deriv, opt.guard);
    const Jet<2> rho2 = truncate<2>(f.rho);
    const double rho = f.rho.value();
    const auto w = f.w();
    const Vec3 u = val(f.u), v = val(f.v);
    const double natural = rho * local_force(f);
    const Vec3 rho_dv = rho * val(dt(f.v));
    const Vec3 rho_dw = rho * val(dt(w));
    const Vec3 half_grad_uv = 0.5 * kMass * rho * val(grad(dot(f.u, f.u) + dot(f.v, f.v)));
    const Vec3 half_grad_w2 = 0.5 * kMass * rho * val(grad(dot(w, w)));
    const Vec3 grad_P = val(grad(f.P));
    const Vec3 grad_p = val(grad(f.p));
    const double div_rho_u = kMass * div(mul(rho2, f.u)).value();
    const Vec3 rho_grad_U = rho * val(grad(f.U));
    const Jet<1> div_v = div(f.v);
    const Vec3 eta_grad_div_v = kZeta0 * rho * val(grad(div_v));
    switch (variant) {
      case EulerVariant::euler0:
        out[0] = vector_eq({kMass * rho_dv, half_grad_uv, grad_P, div_rho_u * u, rho_grad_U}, natural);
        break;
      case EulerVariant::euler1:
        out[0] = vector_eq({kMass * rho_dw, half_grad_w2, grad_P, rho_grad_U, div_rho_u * u, -eta_grad_div_v},
                           natural);
        break;
      case EulerVariant::euler3: {
        const Vec3 d_rho_u = kMass * val(dt(mul(rho2, f.u)));
        out[0] = vector_eq({d_rho_u, kMass * rho_dv, half_grad_uv, grad_P + grad_p, div_rho_u * u, rho_grad_U},
                           natural);
        break;
      }
      case EulerVariant::full0000: {
        // grad(eta div v) with eta = zeta0 rho
        const Vec3 grad_eta_div_v = val(grad(truncate<1>(rho2) * div_v * kZeta0));
        const Vec3 gamma =
            (1.0 / kZeta) * (u.dot(v) * kMass * rho * u + f.P.value() * v - f.p.value() * u);
        const Vec3 wv = u + v;
        out[0] = vector_eq({kMass * rho_dw, half_grad_w2, div_rho_u * wv, grad_P, rho_grad_U, -grad_eta_div_v, -gamma},
                           natural);
        // |Gamma| rides along as a second pseudo-equation
        out[1] = EqSample{gamma.norm(), 0.0, 0.0};
        break;
      }
    }
  };
  if (variant != EulerVariant::full0000) return run_pointwise({info}, g, eval, opt)[0];
  auto reps = run_pointwise({info, {"gamma", "", 0.0}}, g, eval, opt);
  ResidualReport r = reps[0];
  r.extra["gamma_max"] = reps[1].l_inf;
  return r;
}

std::vector<ResidualReport> momentum_balance_residuals(const QuantumState& s, const Grid& g, double t,
                                                       const VerifyOptions& opt) {
  const double tol = suite_tol(opt, opt.tol.momentum, opt.tol.momentum_fd);
  const std::vector<EqInfo> eqs = {
      {"momentum.particle_v", "balance of particle momentae: -grad E = m dv", tol},
      {"momentum.particle_u", "balance of particle momentae: -grad F = m du", tol},
      {"momentum.fluid", "local balance of fluid momentum: -grad p = d(rho_m u)", tol},
      {"momentum.pressures", "law of the pressures: dP = -zeta lap p", tol},
      {"momentum.potentials", "law of the momentae potentials: rho d(theta) = zeta div(rho grad S)", tol},
      {"momentum.fluid_momentae", "law of the fluid momentae: d(rho_m u) = zeta0 grad(div(rho v))", tol},
  };
  const double sc = opt.dt_rho_scale;
  auto eval = [&](const Vec3& x, EqSample* out) {
    const auto f = flow_at<4>(s, x, t, opt.deriv, opt.guard);
    const double rho = f.rho.value();
    const Jet<3> rho3 = truncate<3>(f.rho);
    const double force = local_force(f), energy = local_energy(f);
    const double natural_mass = force, natural_density = rho * force;
    out[0] = vector_eq({val(grad(f.E)), kMass * val(dt(f.v))}, natural_mass);
    out[1] = vector_eq({val(grad(f.F)), kMass * val(dt(f.u))}, natural_mass);
    const Vec3 d_rho_u = sc * kMass * val(dt(mul(rho3, f.u)));
    out[2] = vector_eq({val(grad(f.p)), d_rho_u}, natural_density);
    const Jet<0> lap_p = div(grad(f.p));
    out[3] = scalar_eq({sc * deriv(f.P, kT).value(), kZeta * lap_p.value()}, rho * energy * energy);
    const Jet<4> theta = log(f.rho) * (-kZeta0);
    out[4] = scalar_eq({sc * rho * deriv(theta, kT).value(), -kZeta * f.div_j.value()}, rho * energy);
    // rho v = j / m
    out[5] = vector_eq({d_rho_u, -(kZeta0 / kMass) * val(grad(f.div_j))}, natural_density);
  };
  return run_pointwise(eqs, g, eval, opt);
}

nlohmann::json ConservationRecord::to_json() const {
  nlohmann::json j = {{"norm", norm},       {"int_P", P},          {"int_p", p},
                      {"int_E_rho", E_rho}, {"int_F_rho", F_rho},  {"kinetic", kinetic},
                      {"kinetic_u", kinetic_u}, {"kinetic_v", kinetic_v}, {"nodes", nodes},
                      {"skipped", skipped}};
  if (centrifugal) j["centrifugal"] = *centrifugal;
  if (target_E) j["target_E_rho"] = *target_E;
  if (target_kinetic) j["target_kinetic"] = *target_kinetic;
  j["target_F_rho"] = 0.0;
  return j;
}

ConservationRecord conservation_integrals(const QuantumState& s, const Grid& g, double t, int threads) {
  if (g.kind == Grid::Kind::points) throw ConfigError("integrals need a quadrature grid, not a point set");
  const StateSpec& sp = s.spec();
  const bool centrifugal = sp.kind == StateKind::hydrogenic && sp.m != 0;
  const double m2 = double(sp.m) * double(sp.m);
  auto r = integrate_many(
      [&](const Vec3& x, double* o) {
        const DensityTerms d = density_terms(s, x, t);
        o[0] = d.rho;
        o[1] = d.P;
        o[2] = d.p;
        o[3] = d.E_rho;
        o[4] = d.F_rho;
        o[5] = d.ke_u;
        o[6] = d.ke_v;
        o[7] = centrifugal ? d.rho * m2 / (2.0 * kMass * (x[0] * x[0] + x[1] * x[1])) : 0.0;
      },
      8, g, threads);
  ConservationRecord c;
  c.norm = r[0].value;
  c.P = r[1].value;
  c.p = r[2].value;
  c.E_rho = r[3].value;
  c.F_rho = r[4].value;
  c.kinetic_u = r[5].value;
  c.kinetic_v = r[6].value;
  c.kinetic = c.kinetic_u + c.kinetic_v;
  if (centrifugal) c.centrifugal = r[7].value;
  c.nodes = g.size();
  c.skipped = r[0].skipped;
  switch (sp.kind) {
    case StateKind::hydrogenic:
      c.target_E = eigen_energy(sp);
      c.target_kinetic = -*c.target_E;  // virial theorem, Coulomb
      break;
    case StateKind::oscillator1d:
    case StateKind::oscillator3d:
      c.target_E = eigen_energy(sp);
      c.target_kinetic = 0.5 * *c.target_E;  // virial theorem, harmonic
      break;
    case StateKind::coherent1d:
      c.target_E = sp.omega * (std::norm(sp.alpha) + 0.5);
      break;
    case StateKind::superposition: {
      double e = 0.0;
      bool ok = true;
      for (const auto& term : sp.terms) {
        auto ei = eigen_energy(*term.state);
        if (!ei) ok = false;
        else e += std::norm(term.coeff) * *ei;
      }
      if (ok) c.target_E = e;
      break;
    }
    default:
      break;
  }
  return c;
}

std::vector<ResidualReport> conservation_reports(const ConservationRecord& rec, const Tolerances& tol) {
  std::vector<ResidualReport> out;
  auto add = [&](const std::string& name, const std::string& anchor, double value, double target) {
    ResidualReport r;
    r.name = name;
    r.anchor = anchor;
    r.l_inf = r.l2 = r.rel = std::abs(value - target);
    r.tolerance = tol.integral;
    r.nodes = rec.nodes;
    r.skipped = rec.skipped;
    r.extra = {{"value", value}, {"target", target}};
    r.decide();
    out.push_back(r);
  };
  add("integral.P", "the first pressure is a free variable: int P = 0", rec.P, 0.0);
  add("integral.p", "the second pressure is a free variable: int p = 0", rec.p, 0.0);
  add("integral.F_rho", "second energy density integrates to zero: int F rho = 0", rec.F_rho, 0.0);
  add("integral.norm", "normalization int rho = 1", rec.norm, 1.0);
  if (rec.target_E)
    add("integral.E_rho", "int E rho equals the energy expectation sum |C_i|^2 eps_i", rec.E_rho, *rec.target_E);
  if (rec.target_kinetic)
    add("integral.kinetic", "kinetic functional int(1/2 rho u^2 + 1/2 rho v^2) equals <T>", rec.kinetic,
        *rec.target_kinetic);
  if (rec.centrifugal)
    add("integral.kinetic_v", "v part of the kinetic energy equals the centrifugal term <m^2/(2 r^2 sin^2 theta)>",
        rec.kinetic_v, *rec.centrifugal);
  return out;
}

std::vector<ResidualReport> bohmian_equivalence(const QuantumState& s, const Grid& g, double t,
                                                const VerifyOptions& opt) {
  const double tol = suite_tol(opt, opt.tol.bohmian, opt.tol.bohmian_fd);
  const std::vector<EqInfo> eqs = {
      {"bohmian.hamilton_jacobi", "quantum Hamilton-Jacobi equation: -dS = 1/2 m v^2 + Q + U", tol},
      {"bohmian.continuity", "continuity in Bohmian form: d(rho) + (1/m) div(rho grad S) = 0", tol},
  };
  auto eval = [&](const Vec3& x, EqSample* out) {
    const PolarJet j = polar_jet(s, x, t, opt.deriv, opt.guard);
    const FieldPoint fp = field_point(j, s.potential_value(x));
    const double Q = opt.drop_pressure_in_Q ? 0.5 * kMass * fp.u.squaredNorm() : fp.Q;
    const double eps = 0.5 * kMass * (fp.u.squaredNorm() + fp.v.squaredNorm()) + std::abs(fp.P) / fp.rho +
                       std::abs(fp.U) + std::abs(fp.E);
    out[0] = scalar_eq({-j.dt_S, -0.5 * kMass * fp.v.squaredNorm(), -Q, -fp.U}, eps);
    out[1] = scalar_eq({j.dt_rho, j.div_rho_gradS / kMass}, fp.rho * eps);
  };
  return run_pointwise(eqs, g, eval, opt);
}

std::vector<ResidualReport> field_identities(const QuantumState& s, const Grid& g, double t,
                                             const VerifyOptions& opt) {
  const double tol = suite_tol(opt, opt.tol.energy, opt.tol.energy_fd);
  const double tol8 = suite_tol(opt, opt.tol.continuity, opt.tol.energy_fd);
  const std::vector<EqInfo> eqs = {
      {"identity.momentum_modulus", "|P Psi|^2 rho = |Psi* P Psi|^2", tol},
      {"identity.kinetic_split", "(1/2m)|Psi* P Psi / rho|^2 = 1/2 m u^2 + 1/2 m v^2", tol},
      {"identity.bohm_potential", "quantum potential Q = 1/2 m u^2 + P/rho", tol},
      {"identity.strong_real", "Re(Psi* H Psi) = 1/2 rho u^2 + P + 1/2 rho v^2 + U rho", tol8},
      {"identity.strong_imag", "Im(Psi* H Psi) = p", tol8},
      {"identity.first_pressure", "P = -rho_m u.u + eta div u", tol8},
      {"identity.second_pressure", "p = rho_m u.v - eta div v", tol8},
  };
  auto eval = [&](const Vec3& x, EqSample* out) {
    const CJet<2> psi = psi_jet<2>(s, x, t, opt.deriv);
    const auto f = flow_jets<2>(psi, s.potential<2>(x), opt.guard);
    const WaveSample w = wave_sample(psi);
    const double rho = f.rho.value(), P = f.P.value(), p = f.p.value(), U = f.U.value();
    const Vec3 u = val(f.u), v = val(f.v);
    const double natural = rho * local_energy(f);
    const std::complex<double> cj = std::conj(w.psi), I(0.0, 1.0);
    double pp = 0.0, flux2 = 0.0;
    for (int k = 0; k < 3; ++k) {
      const std::complex<double> Pk = -I * kHbar * w.grad[k];  // momentum operator on Psi
      pp += std::norm(Pk);
      flux2 += std::norm(cj * Pk);
    }
    out[0] = scalar_eq({pp * rho, -flux2}, std::max(pp * rho, flux2));
    const double ke = 0.5 * kMass * (u.squaredNorm() + v.squaredNorm());
    out[1] = scalar_eq({flux2 / (2.0 * kMass * rho * rho), -ke}, ke);
    const double c = kHbar * kHbar / kMass;
    const double Q = c / 8.0 * val(f.grad_rho).squaredNorm() / (rho * rho) - c / 4.0 * f.lap_rho.value() / rho;
    out[2] = scalar_eq({Q, -0.5 * kMass * u.squaredNorm(), -P / rho}, local_energy(f));
    const std::complex<double> H = cj * (-kHbar * kHbar / (2.0 * kMass) * w.lap + U * w.psi);
    out[3] = scalar_eq({std::real(H), -0.5 * kMass * rho * u.squaredNorm(), -P, -0.5 * kMass * rho * v.squaredNorm(),
                        -U * rho},
                       natural);
    out[4] = scalar_eq({std::imag(H), -p}, natural);
    const double eta = kZeta0 * rho;
    out[5] = scalar_eq({P, kMass * rho * u.squaredNorm(), -eta * div(f.u).value()}, natural);
    out[6] = scalar_eq({p, -kMass * rho * u.dot(v), eta * div(f.v).value()}, natural);
  };
  return run_pointwise(eqs, g, eval, opt);
}

nlohmann::json OrthogonalityRecord::to_json() const {
  return {{"max_u_dot_v", max_u_dot_v}, {"max_half_u2_plus_v2", max_kinetic}, {"max_div_v", max_div_v},
          {"max_div_v_fd", max_div_v_fd}, {"smooth", smooth}, {"nodes", nodes}, {"skipped", skipped}};
}

OrthogonalityRecord orthogonality_diagnostics(const QuantumState& s, const Grid& g, double t,
                                              const VerifyOptions& opt) {
  const std::vector<EqInfo> eqs = {{"u.v", "", 0}, {"kinetic", "", 0}, {"div v", "", 0}, {"div v fd", "", 0}};
  auto vfield = [&](const Vec3& y) { return momentae(polar_jet(s, y, t, opt.deriv, opt.guard)).first; };
  auto eval = [&](const Vec3& x, EqSample* out) {
    const auto f = flow_at<2>(s, x, t, opt.deriv, opt.guard);
    const Vec3 u = val(f.u), v = val(f.v);
    out[0] = {std::abs(u.dot(v)), 0, 0};
    out[1] = {0.5 * (u.squaredNorm() + v.squaredNorm()), 0, 0};
    out[2] = {std::abs(div(f.v).value()), 0, 0};
    double dfd = 0.0;
    try {
      dfd = std::abs(fd_divergence(vfield, x));
    } catch (const StencilError&) {
    }
    out[3] = {dfd, 0, 0};
  };
  auto r = run_pointwise(eqs, g, eval, opt);
  OrthogonalityRecord o;
  o.max_u_dot_v = r[0].l_inf;
  o.max_kinetic = r[1].l_inf;
  o.max_div_v = r[2].l_inf;
  o.max_div_v_fd = r[3].l_inf;
  o.smooth = o.max_u_dot_v <= opt.tol.orthogonality * o.max_kinetic;
  o.nodes = r[0].nodes;
  o.skipped = r[0].skipped;
  return o;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"continuity", "energy",     "euler",      "momentum",
                                                 "conservation", "bohmian", "identities", "orthogonality",
                                                 "all"};
  return names;
}

std::vector<ResidualReport> run_suite(const std::string& suite, const QuantumState& s, const Grid& g, double t,
                                      const VerifyOptions& opt, nlohmann::json* records) {
  if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end())
    throw ConfigError("unknown suite: " + suite);
  std::vector<ResidualReport> out;
  auto append = [&](std::vector<ResidualReport> r) { out.insert(out.end(), r.begin(), r.end()); };
  const bool all = suite == "all";
  if (all || suite == "continuity") append(continuity_six(s, g, t, opt));
  if (all || suite == "energy") {
    out.push_back(energy_equation_residual(s, g, t, EnergyForm::two_velocity, opt));
    out.push_back(energy_equation_residual(s, g, t, EnergyForm::single_velocity, opt));
  }
  if (all || suite == "euler")
    for (auto v : {EulerVariant::euler0, EulerVariant::euler1, EulerVariant::euler3, EulerVariant::full0000})
      out.push_back(euler_residual(s, g, t, v, opt));
  if (all || suite == "momentum") append(momentum_balance_residuals(s, g, t, opt));
  if (all || suite == "bohmian") append(bohmian_equivalence(s, g, t, opt));
  if (all || suite == "identities") append(field_identities(s, g, t, opt));
  if (all || suite == "conservation") {
    const ConservationRecord rec = conservation_integrals(s, g, t, opt.threads);
    append(conservation_reports(rec, opt.tol));
    if (records) (*records)["conservation"] = rec.to_json();
  }
  if (all || suite == "orthogonality") {
    const OrthogonalityRecord o = orthogonality_diagnostics(s, g, t, opt);
    if (records) (*records)["orthogonality"] = o.to_json();
  }
  return out;
}

}  // namespace qflow
