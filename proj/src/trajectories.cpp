#include "qflow/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <locale>
#include <ostream>

namespace qflow {

std::string to_string(TrajectoryMode m) {
  switch (m) {
    case TrajectoryMode::madelung_v: return "madelung_v";
    case TrajectoryMode::bernoulli_w: return "bernoulli_w";
    case TrajectoryMode::cross_omega: return "cross_omega";
  }
  return "?";
}

TrajectoryMode parse_mode(const std::string& text) {
  if (text == "v" || text == "madelung_v") return TrajectoryMode::madelung_v;
  if (text == "w" || text == "bernoulli_w") return TrajectoryMode::bernoulli_w;
  if (text == "cross" || text == "cross_omega") return TrajectoryMode::cross_omega;
  throw ConfigError("unknown trajectory mode: " + text);
}

Vec3 mode_velocity(const QuantumState& s, const Vec3& x, double t, TrajectoryMode mode, const TraceOptions& opt) {
  const PolarJet j = polar_jet(s, x, t, {}, opt.guard);
  const auto [v, u] = momentae(j);
  switch (mode) {
    case TrajectoryMode::madelung_v: return v;
    case TrajectoryMode::bernoulli_w: return u + v;
    case TrajectoryMode::cross_omega: return cross_velocity(s, x, t, opt.policy, opt.guard) + v;
  }
  return v;
}

double path_hamiltonian(const QuantumState& s, const Vec3& x, double t, const Vec3& vel, const NodeGuard& guard) {
  const FieldPoint f = field_point(s, x, t, {}, guard);
  return 0.5 * kMass * vel.squaredNorm() + f.P / f.rho + f.U;
}

namespace {

Vec3 to_vec(const std::vector<double>& y) { return Vec3(y[0], y[1], y[2]); }

// Cubic Hermite on [0, h] through (p0, m0) and (p1, m1), evaluated at s in [0, 1].
template <class T>
T hermite(const T& p0, const T& m0, const T& p1, const T& m1, double h, double s) {
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * h * m0 + (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * h * m1;
}

}  // namespace

std::optional<ClosedOrbit> detect_closed_orbit(const std::vector<TrajectorySample>& samples) {
  if (samples.size() < 3) return std::nullopt;
  const Vec3 x0 = samples[0].x;
  const double speed = samples[0].vel.norm();
  if (speed == 0.0) return std::nullopt;
  const Vec3 n = samples[0].vel / speed;
  auto side = [&](const TrajectorySample& p) { return (p.x - x0).dot(n); };
  bool behind = false;
  for (std::size_t k = 1; k + 1 < samples.size(); ++k) {
    const auto& a = samples[k];
    const auto& b = samples[k + 1];
    const double da = side(a), db = side(b);
    if (da < 0.0) behind = true;
    if (!behind || !(da < 0.0 && db >= 0.0)) continue;
    const double h = b.t - a.t;
    auto d = [&](double s) { return hermite(da, a.vel.dot(n), db, b.vel.dot(n), h, s); };
    const double s = db == 0.0 ? 1.0 : find_root(d, 0.0, 1.0, 1e-14);
    const Vec3 xc = hermite(a.x, a.vel, b.x, b.vel, h, s);
    return ClosedOrbit{a.t + s * h - samples[0].t, (xc - x0).norm()};
  }
  return std::nullopt;
}

Trajectory integrate(const QuantumState& s, const Vec3& x0, TrajectoryMode mode, std::pair<double, double> t_span,
                     double dt, const TraceOptions& opt) {
  if (!(dt > 0.0) || !(t_span.second > t_span.first)) throw ConfigError("trajectory needs dt > 0 and t1 > t0");
  const double escape = opt.escape_radius > 0.0 ? opt.escape_radius : s.grid_extent().reference;
  Trajectory tr;
  tr.mode = mode;
  tr.policy = opt.policy;
  const OdeRhs rhs = [&](const std::vector<double>& y, std::vector<double>& dydt, double t) {
    const Vec3 vel = mode_velocity(s, to_vec(y), t, mode, opt);
    dydt.assign({vel[0], vel[1], vel[2]});
  };
  auto sample = [&](double t, const Vec3& x) {
    const Vec3 vel = mode_velocity(s, x, t, mode, opt);
    tr.samples.push_back({t, x, vel, path_hamiltonian(s, x, t, vel, opt.guard)});
  };
  std::vector<double> y{x0[0], x0[1], x0[2]};
  sample(t_span.first, x0);
  const auto steps = static_cast<long>(std::ceil((t_span.second - t_span.first) / dt - 1e-9));
  for (long k = 0; k < steps; ++k) {
    const double t = t_span.first + k * dt;
    const double h = std::min(dt, t_span.second - t);
    y = rk4_step(rhs, t, y, h);
    const Vec3 x = to_vec(y);
    if (x.norm() > escape)
      throw Escaped("trajectory left |x| <= " + std::to_string(escape) + " at t = " + std::to_string(t + h));
    sample(t + h, x);
    if (opt.stop_when_closed && !tr.closed) {
      tr.closed = detect_closed_orbit(tr.samples);
      if (tr.closed) break;
    }
  }
  if (!tr.closed) tr.closed = detect_closed_orbit(tr.samples);
  return tr;
}

nlohmann::json Trajectory::summary() const {
  nlohmann::json j;
  j["schema"] = 1;
  j["mode"] = to_string(mode);
  if (mode == TrajectoryMode::cross_omega) j["policy"] = policy.describe();
  j["samples"] = samples.size();
  if (!samples.empty()) {
    j["t0"] = samples.front().t;
    j["t1"] = samples.back().t;
    j["x_end"] = {samples.back().x[0], samples.back().x[1], samples.back().x[2]};
  }
  if (samples.size() >= 10) j["hamiltonian"] = hamiltonian_constancy(*this);
  if (closed)
    j["closed"] = {{"period", closed->period}, {"return_error", closed->return_error}};
  else
    j["closed"] = nullptr;
  return j;
}

void Trajectory::write_csv(std::ostream& os) const {
  os.imbue(std::locale::classic());
  os.precision(17);
  os << "t,x,y,z,vx,vy,vz,H\n";
  for (const auto& p : samples)
    os << p.t << ',' << p.x[0] << ',' << p.x[1] << ',' << p.x[2] << ',' << p.vel[0] << ',' << p.vel[1] << ','
       << p.vel[2] << ',' << p.H << '\n';
}

ResidualReport hamiltonian_constancy(const Trajectory& traj, double tolerance) {
  if (traj.samples.size() < 10) throw ConfigError("Hamiltonian check needs at least 10 samples");
  double lo = traj.samples[0].H, hi = lo, sum = 0.0;
  for (const auto& p : traj.samples) {
    lo = std::min(lo, p.H);
    hi = std::max(hi, p.H);
    sum += p.H;
  }
  const double mean = sum / traj.samples.size();
  ResidualReport r;
  r.name = "trajectory.hamiltonian";
  r.anchor = "H = T + P/rho + U constant along the path";
  r.l_inf = hi - lo;
  r.l2 = r.l_inf;
  r.rel = r.l_inf == 0.0 ? 0.0 : r.l_inf / std::abs(mean);
  r.tolerance = tolerance;
  r.nodes = traj.samples.size();
  r.extra = {{"mean", mean}, {"min", lo}, {"max", hi}};
  r.decide();
  return r;
}

double density_variation(const QuantumState& s, const Trajectory& traj) {
  if (traj.samples.empty()) return 0.0;
  const double r0 = std::norm(s.eval(traj.samples[0].x, traj.samples[0].t));
  double worst = 0.0;
  for (const auto& p : traj.samples) worst = std::max(worst, std::abs(std::norm(s.eval(p.x, p.t)) - r0) / r0);
  return worst;
}

namespace {

void require_s_state(const QuantumState& s) {
  if (!s.spherically_symmetric()) throw UnsupportedGeometry("radial force balance needs a spherically symmetric state");
}

}  // namespace

double modified_bohr_radius(const std::function<double(double)>& radial_force, double a, double b) {
  return find_first_root(radial_force, a, b);
}

double modified_bohr_radius(const QuantumState& s) {
  require_s_state(s);
  const double L = s.length_scale();
  return modified_bohr_radius(
      [&](double r) {
        const RadialForces f = radial_forces(s, Vec3(r, 0, 0));
        return f.coulomb + f.pressure + f.centrifugal;
      },
      0.05 * L, 20.0 * L);
}

double pressure_force_crossover(const QuantumState& s) {
  require_s_state(s);
  const double L = s.length_scale();
  return find_first_root([&](double r) { return radial_forces(s, Vec3(r, 0, 0)).pressure; }, 0.05 * L, 20.0 * L);
}

}  // namespace qflow
