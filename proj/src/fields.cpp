#include "qflow/fields.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <tuple>

namespace qflow {

namespace {

// 4th-order central stencils for derivative orders 0..4 (offset, weight),
// to be divided by h^order.
struct Stencil {
  std::vector<std::pair<int, double>> taps;
};

const Stencil& stencil(int order) {
  static const std::array<Stencil, 5> s = {{
      {{{0, 1.0}}},
      {{{-2, 1.0 / 12}, {-1, -8.0 / 12}, {1, 8.0 / 12}, {2, -1.0 / 12}}},
      {{{-2, -1.0 / 12}, {-1, 16.0 / 12}, {0, -30.0 / 12}, {1, 16.0 / 12}, {2, -1.0 / 12}}},
      {{{-3, 1.0 / 8}, {-2, -8.0 / 8}, {-1, 13.0 / 8}, {1, -13.0 / 8}, {2, 8.0 / 8}, {3, -1.0 / 8}}},
      {{{-3, -1.0 / 6}, {-2, 12.0 / 6}, {-1, -39.0 / 6}, {0, 56.0 / 6}, {1, -39.0 / 6}, {2, 12.0 / 6}, {3, -1.0 / 6}}},
  }};
  return s.at(order);
}

}  // namespace

template <int D>
CJet<D> psi_jet(const QuantumState& s, const Vec3& x, double t, const DerivativePolicy& pol) {
  if (pol.analytic()) return s.psi<D>(x, t);
  const bool fd[kVars] = {pol.space_fd, pol.space_fd, pol.space_fd, pol.time_fd};
  using Key = std::tuple<int, int, int, int, int>;
  std::map<Key, CJet<D>> cache;
  auto eval = [&](int k, const std::array<int, 4>& off) -> const CJet<D>& {
    const bool center = off[0] == 0 && off[1] == 0 && off[2] == 0 && off[3] == 0;
    Key key = center ? Key{0, 0, 0, 0, 0} : Key{k, off[0], off[1], off[2], off[3]};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const double h = pol.h0[k] * (1.0 + x.norm()), ht = pol.dt0[k];
    Vec3 y = x + h * Vec3(off[0], off[1], off[2]);
    try {
      return cache.emplace(key, s.psi<D>(y, t + ht * off[3])).first->second;
    } catch (const DomainError& e) {
      throw StencilError(std::string("finite-difference stencil hit a singular point: ") + e.what());
    }
  };
  CJet<D> out;
  for (int idx = 0; idx < Jet<D>::N; ++idx) {
    const auto& e = detail::kMonomials[idx].e;
    int kfd = 0;
    std::array<int, 4> ea{};
    for (int v = 0; v < kVars; ++v) {
      if (fd[v]) kfd += e[v];
      ea[v] = fd[v] ? 0 : e[v];
    }
    const int aidx = monomial_index(ea[0], ea[1], ea[2], ea[3]);
    if (kfd == 0) {
      const auto& c = eval(0, {0, 0, 0, 0});
      out.re.c[idx] = c.re.c[aidx];
      out.im.c[idx] = c.im.c[aidx];
      continue;
    }
    const double h = pol.h0[kfd] * (1.0 + x.norm()), ht = pol.dt0[kfd];
    // Product stencil over the differenced variables.
    std::array<const Stencil*, 4> st{};
    double scale = 1.0;
    for (int v = 0; v < kVars; ++v) {
      st[v] = &stencil(fd[v] ? e[v] : 0);
      if (fd[v] && e[v] > 0) {
        const double hv = v < 3 ? h : ht;
        for (int q = 0; q < e[v]; ++q) scale *= hv * (q + 1);  // h^k k!
      }
    }
    double re = 0.0, im = 0.0;
    for (const auto& [o0, w0] : st[0]->taps)
      for (const auto& [o1, w1] : st[1]->taps)
        for (const auto& [o2, w2] : st[2]->taps)
          for (const auto& [o3, w3] : st[3]->taps) {
            const auto& c = eval(kfd, {o0, o1, o2, o3});
            const double w = w0 * w1 * w2 * w3;
            re += w * c.re.c[aidx];
            im += w * c.im.c[aidx];
          }
    out.re.c[idx] = re / scale;
    out.im.c[idx] = im / scale;
  }
  return out;
}

template <int D>
FlowJets<D> flow_jets(const CJet<D>& psi, const Jet<D>& U, const NodeGuard& guard) {
  FlowJets<D> f;
  f.rho = re_conj_mul(psi, psi);
  const double rho0 = f.rho.value();
  double slope2 = 0.0;
  for (int k = 0; k < 3; ++k) slope2 += std::norm(psi.coef(unit_index(k)));
  if (!(rho0 >= guard.abs) || rho0 < guard.rel * slope2)
    throw NodeError("density " + std::to_string(rho0) + " at a wavefunction node");
  const CJet<D - 1> psi1 = truncate<D - 1>(psi);
  const Jet<D - 1> rho1 = truncate<D - 1>(f.rho);
  f.inv_rho = recip(rho1);
  for (int k = 0; k < 3; ++k) {
    f.grad_rho[k] = deriv(f.rho, k);
    f.j[k] = im_conj_mul(psi1, deriv(psi, k));
    f.v[k] = f.j[k] * f.inv_rho * (1.0 / kMass);
    f.u[k] = f.grad_rho[k] * f.inv_rho * (-kZeta);
  }
  f.dt_rho = deriv(f.rho, kT);
  f.rho_dtS = im_conj_mul(psi1, deriv(psi, kT));
  f.E = -(f.rho_dtS * f.inv_rho);
  f.F = f.dt_rho * f.inv_rho * kZeta0;
  f.U = truncate<D - 1>(U);
  f.lap_rho = deriv(f.grad_rho[0], 0) + deriv(f.grad_rho[1], 1) + deriv(f.grad_rho[2], 2);
  f.div_j = deriv(f.j[0], 0) + deriv(f.j[1], 1) + deriv(f.j[2], 2);
  f.P = f.lap_rho * (-kZeta * kZeta0);
  f.p = f.div_j * (-kZeta0 / kMass);
  return f;
}

template <int D>
FlowJets<D> flow_at(const QuantumState& s, const Vec3& x, double t, const DerivativePolicy& pol,
                    const NodeGuard& guard) {
  return flow_jets<D>(psi_jet<D>(s, x, t, pol), s.potential<D>(x), guard);
}

PolarJet polar_jet(const QuantumState& s, const Vec3& x, double t, const DerivativePolicy& pol,
                   const NodeGuard& guard) {
  const auto f = flow_at<2>(s, x, t, pol, guard);
  PolarJet j;
  j.rho = f.rho.value();
  for (int k = 0; k < 3; ++k) {
    j.grad_rho[k] = f.grad_rho[k].value();
    j.grad_S[k] = f.v[k].value() * kMass;
  }
  j.lap_rho = f.lap_rho.value();
  j.dt_rho = f.dt_rho.value();
  j.dt_S = -f.E.value();
  j.div_rho_gradS = f.div_j.value();
  j.hess_S_available = true;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) j.hess_S(a, b) = deriv(f.v[a], b).value() * kMass;
  return j;
}

namespace {
void require_support(const PolarJet& jet) {
  if (!(jet.rho > 0)) throw NodeError("field requested where rho = 0");
}
}  // namespace

std::pair<Vec3, Vec3> momentae(const PolarJet& jet) {
  require_support(jet);
  return {jet.grad_S / kMass, -kZeta * jet.grad_rho / jet.rho};
}

std::pair<double, double> pressures(const PolarJet& jet) {
  return {-kZeta * kZeta0 * jet.lap_rho, -(kZeta0 / kMass) * jet.div_rho_gradS};
}

std::pair<double, double> energies(const PolarJet& jet) {
  require_support(jet);
  return {-jet.dt_S, kZeta0 * jet.dt_rho / jet.rho};
}

double quantum_potential(const PolarJet& jet) {
  require_support(jet);
  const double c = kHbar * kHbar / kMass;
  return c / 8.0 * jet.grad_rho.squaredNorm() / (jet.rho * jet.rho) - c / 4.0 * jet.lap_rho / jet.rho;
}

FieldPoint field_point(const PolarJet& jet, double U) {
  FieldPoint f;
  f.rho = jet.rho;
  std::tie(f.v, f.u) = momentae(jet);
  f.w = f.u + f.v;
  f.j = jet.rho * f.v;
  std::tie(f.P, f.p) = pressures(jet);
  std::tie(f.E, f.F) = energies(jet);
  f.Ebar = f.E + f.F;
  f.Q = quantum_potential(jet);
  f.theta = -kZeta0 * std::log(jet.rho);
  f.eta = kZeta0 * jet.rho;
  f.ke_u = 0.5 * kMass * jet.rho * f.u.squaredNorm();
  f.ke_v = 0.5 * kMass * jet.rho * f.v.squaredNorm();
  f.U = U;
  return f;
}

FieldPoint field_point(const QuantumState& s, const Vec3& x, double t, const DerivativePolicy& pol,
                       const NodeGuard& guard) {
  return field_point(polar_jet(s, x, t, pol, guard), s.potential_value(x));
}

nlohmann::json FieldBundle::summary() const {
  double max_speed_u = 0, min_speed_u = 1e300, maxP = -1e300, minP = 1e300, maxE = -1e300, minE = 1e300;
  std::size_t n = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!valid[i]) continue;
    const auto& f = points[i];
    ++n;
    max_speed_u = std::max(max_speed_u, f.u.norm());
    min_speed_u = std::min(min_speed_u, f.u.norm());
    maxP = std::max(maxP, f.P);
    minP = std::min(minP, f.P);
    maxE = std::max(maxE, f.E);
    minE = std::min(minE, f.E);
  }
  return {{"schema", 1},
          {"state", state},
          {"t", t},
          {"grid", grid},
          {"nodes", nodes.size()},
          {"evaluated", n},
          {"skipped", skipped},
          {"speed_u", {{"min", min_speed_u}, {"max", max_speed_u}}},
          {"P", {{"min", minP}, {"max", maxP}}},
          {"E", {{"min", minE}, {"max", maxE}}}};
}

void FieldBundle::write_csv(std::ostream& os) const {
  os.imbue(std::locale::classic());
  os << "x,y,z,rho,vx,vy,vz,ux,uy,uz,wx,wy,wz,P,p,E,F,Ebar,Q,theta,eta,ke_u,ke_v,jx,jy,jz,U\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!valid[i]) continue;
    const auto& f = points[i];
    const auto& x = nodes[i];
    os << x[0] << ',' << x[1] << ',' << x[2] << ',' << f.rho;
    for (const Vec3* v : {&f.v, &f.u, &f.w}) os << ',' << (*v)[0] << ',' << (*v)[1] << ',' << (*v)[2];
    os << ',' << f.P << ',' << f.p << ',' << f.E << ',' << f.F << ',' << f.Ebar << ',' << f.Q << ',' << f.theta
       << ',' << f.eta << ',' << f.ke_u << ',' << f.ke_v << ',' << f.j[0] << ',' << f.j[1] << ',' << f.j[2] << ','
       << f.U << '\n';
  }
}

FieldBundle field_bundle(const QuantumState& s, const Grid& g, double t, int threads, const NodeGuard& guard,
                         double max_skip_fraction) {
  if (g.size() == 0) throw DegenerateGrid("empty grid");
  if (max_skip_fraction < 0) max_skip_fraction = default_tolerances().max_skip_fraction;
  FieldBundle b;
  b.state = s.spec();
  b.t = t;
  b.grid = g.description;
  b.nodes = g.nodes;
  b.points.resize(g.size());
  b.valid.assign(g.size(), 0);
  parallel_chunks(g.size(), threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      try {
        b.points[i] = field_point(s, g.nodes[i], t, {}, guard);
        b.valid[i] = 1;
      } catch (const NodeError&) {
      } catch (const DomainError&) {
      }
    }
  });
  for (char v : b.valid) b.skipped += v ? 0 : 1;
  if (double(b.skipped) > max_skip_fraction * double(g.size()))
    throw DegenerateGrid("field bundle skipped " + std::to_string(b.skipped) + " of " + std::to_string(g.size()) +
                         " nodes");
  return b;
}

WaveSample wave_sample(const CJet<2>& psi) {
  WaveSample w;
  w.psi = psi.value();
  w.dt = psi.coef(unit_index(kT));
  for (int k = 0; k < 3; ++k) w.grad[k] = psi.coef(unit_index(k));
  // Taylor coefficient of x_k^2 is f_kk / 2
  w.lap = 2.0 * (psi.coef(monomial_index(2, 0, 0, 0)) + psi.coef(monomial_index(0, 2, 0, 0)) +
                 psi.coef(monomial_index(0, 0, 2, 0)));
  return w;
}

DensityTerms density_terms(const QuantumState& s, const Vec3& x, double t) {
  const WaveSample w = wave_sample(s.psi<2>(x, t));
  DensityTerms d{};
  d.rho = std::norm(w.psi);
  if (!(d.rho > 0)) throw NodeError("rho = 0");
  const std::complex<double> cj = std::conj(w.psi);
  Vec3 grad_rho, j;
  for (int k = 0; k < 3; ++k) {
    grad_rho[k] = 2.0 * std::real(cj * w.grad[k]);
    j[k] = std::imag(cj * w.grad[k]);
  }
  double grad2 = 0.0;
  for (int k = 0; k < 3; ++k) grad2 += std::norm(w.grad[k]);
  const double lap_rho = 2.0 * std::real(cj * w.lap) + 2.0 * grad2;
  const double div_j = std::imag(cj * w.lap);
  d.P = -kZeta * kZeta0 * lap_rho;
  d.p = -(kZeta0 / kMass) * div_j;
  d.E_rho = -std::imag(cj * w.dt);
  d.F_rho = kZeta0 * 2.0 * std::real(cj * w.dt);
  // 1/2 rho u^2 = zeta^2 |grad rho|^2 / (2 rho), 1/2 rho v^2 = |j|^2 / (2 rho)
  d.ke_u = 0.5 * kMass * kZeta * kZeta * grad_rho.squaredNorm() / d.rho;
  d.ke_v = 0.5 * j.squaredNorm() / (kMass * d.rho);
  d.U_rho = s.potential_value(x) * d.rho;
  return d;
}

#define QFLOW_INSTANTIATE(D)                                                                                  \
  template CJet<D> psi_jet<D>(const QuantumState&, const Vec3&, double, const DerivativePolicy&);             \
  template FlowJets<D> flow_jets<D>(const CJet<D>&, const Jet<D>&, const NodeGuard&);                          \
  template FlowJets<D> flow_at<D>(const QuantumState&, const Vec3&, double, const DerivativePolicy&,          \
                                  const NodeGuard&);
QFLOW_INSTANTIATE(2)
QFLOW_INSTANTIATE(3)
QFLOW_INSTANTIATE(4)
template CJet<0> psi_jet<0>(const QuantumState&, const Vec3&, double, const DerivativePolicy&);
template CJet<1> psi_jet<1>(const QuantumState&, const Vec3&, double, const DerivativePolicy&);

}  // namespace qflow
