#include "qflow/numerics.hpp"

#include <algorithm>
#include <boost/math/special_functions/legendre.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "qflow/config.hpp"

namespace qflow {

void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const auto zeros = boost::math::legendre_p_zeros<double>(n);  // non-negative zeros, ascending
  std::vector<double> t, wt;
  for (double z : zeros) {
    const double dp = boost::math::legendre_p_prime(n, z);
    const double wz = 2.0 / ((1.0 - z * z) * dp * dp);
    if (z == 0.0) {
      t.push_back(0.0);
      wt.push_back(wz);
    } else {
      t.push_back(z);
      wt.push_back(wz);
      t.push_back(-z);
      wt.push_back(wz);
    }
  }
  std::vector<std::size_t> order(t.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return t[i] < t[j]; });
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    x[i] = mid + half * t[order[i]];
    w[i] = half * wt[order[i]];
  }
}

Grid spherical_grid(int nr, int ntheta, int nphi, double rmax, double rmin) {
  if (nr < 1 || ntheta < 1 || nphi < 1 || !(rmax > rmin) || rmin < 0)
    throw ConfigError("spherical grid needs positive node counts and 0 <= rmin < rmax");
  std::vector<double> r, wr, c, wc;
  gauss_legendre(nr, rmin, rmax, r, wr);
  gauss_legendre(ntheta, -1.0, 1.0, c, wc);
  Grid g;
  g.kind = Grid::Kind::spherical_product;
  g.nodes.reserve(std::size_t(nr) * ntheta * nphi);
  g.weights.reserve(g.nodes.capacity());
  const double dphi = 2.0 * kPi / nphi;
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < ntheta; ++j) {
      const double st = std::sqrt(std::max(0.0, 1.0 - c[j] * c[j]));
      for (int k = 0; k < nphi; ++k) {
        const double ph = (k + 0.5) * dphi;
        g.nodes.emplace_back(r[i] * st * std::cos(ph), r[i] * st * std::sin(ph), r[i] * c[j]);
        g.weights.push_back(wr[i] * r[i] * r[i] * wc[j] * dphi);
      }
    }
  g.volume = 4.0 / 3.0 * kPi * (rmax * rmax * rmax - rmin * rmin * rmin);
  std::ostringstream os;
  os << "spherical:nr=" << nr << ",nt=" << ntheta << ",np=" << nphi << ",rmax=" << rmax << ",rmin=" << rmin;
  g.description = os.str();
  return g;
}

Grid cartesian_grid(const Vec3& lo, const Vec3& hi, const std::array<int, 3>& n) {
  std::vector<double> x[3], w[3];
  for (int d = 0; d < 3; ++d) {
    if (n[d] < 1 || !(hi[d] > lo[d])) throw ConfigError("box grid needs hi > lo and n >= 1 per axis");
    if (n[d] == 1) {
      x[d] = {0.5 * (lo[d] + hi[d])};
      w[d] = {hi[d] - lo[d]};
    } else {
      gauss_legendre(n[d], lo[d], hi[d], x[d], w[d]);
    }
  }
  Grid g;
  g.kind = Grid::Kind::cartesian_box;
  for (int i = 0; i < n[0]; ++i)
    for (int j = 0; j < n[1]; ++j)
      for (int k = 0; k < n[2]; ++k) {
        g.nodes.emplace_back(x[0][i], x[1][j], x[2][k]);
        g.weights.push_back(w[0][i] * w[1][j] * w[2][k]);
      }
  g.volume = (hi - lo).prod();
  std::ostringstream os;
  os << "box:lo=" << lo[0] << "," << lo[1] << "," << lo[2] << ";hi=" << hi[0] << "," << hi[1] << "," << hi[2]
     << ";n=" << n[0] << "," << n[1] << "," << n[2];
  g.description = os.str();
  return g;
}

Grid point_set(std::vector<Vec3> pts) {
  Grid g;
  g.kind = Grid::Kind::points;
  g.weights.assign(pts.size(), 1.0);
  g.nodes = std::move(pts);
  g.description = "points:" + std::to_string(g.nodes.size());
  return g;
}

std::vector<Vec3> random_shell_points(std::size_t n, double rmin, double rmax, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ur(rmin, rmax), uc(-1.0, 1.0), up(0.0, 2.0 * kPi);
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ur(rng), c = uc(rng), ph = up(rng);
    const double s = std::sqrt(1.0 - c * c);
    pts.emplace_back(r * s * std::cos(ph), r * s * std::sin(ph), r * c);
  }
  return pts;
}

namespace {

std::map<std::string, std::string> kv_list(const std::string& s, char sep) {
  std::map<std::string, std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("grid option needs key=value: " + item);
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

double num(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw ConfigError("bad number in grid spec: " + s);
  }
}

Vec3 vec_of(const std::string& s) {
  std::stringstream ss(s);
  std::string item;
  Vec3 v;
  int i = 0;
  while (std::getline(ss, item, ',') && i < 3) v[i++] = num(item);
  if (i != 3) throw ConfigError("grid vector needs three components: " + s);
  return v;
}

}  // namespace

Grid reference_grid(const GridExtent& ext) {
  if (ext.dimension == 1)
    return cartesian_grid(Vec3(-ext.reference, -0.5, -0.5), Vec3(ext.reference, 0.5, 0.5), {400, 1, 1});
  return spherical_grid(200, 64, 64, ext.reference);
}

Grid coarse_grid(const GridExtent& ext) {
  if (ext.dimension == 1)
    return cartesian_grid(Vec3(-ext.coarse, -0.5, -0.5), Vec3(ext.coarse, 0.5, 0.5), {200, 1, 1});
  return spherical_grid(40, 16, 16, ext.coarse);
}

Grid parse_grid(const std::string& spec, const GridExtent& ext) {
  if (spec.empty() || spec == "coarse") return coarse_grid(ext);
  if (spec == "reference") return reference_grid(ext);
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw ConfigError("unknown grid: " + spec);
  const std::string kind = spec.substr(0, colon), rest = spec.substr(colon + 1);
  if (kind == "spherical") {
    auto kv = kv_list(rest, ',');
    int nr = 40, nt = 16, np = 16;
    double rmax = ext.coarse, rmin = 0.0;
    for (const auto& [k, v] : kv) {
      if (k == "nr") nr = int(num(v));
      else if (k == "nt") nt = int(num(v));
      else if (k == "np") np = int(num(v));
      else if (k == "rmax") rmax = num(v);
      else if (k == "rmin") rmin = num(v);
      else throw ConfigError("unknown spherical grid key: " + k);
    }
    return spherical_grid(nr, nt, np, rmax, rmin);
  }
  if (kind == "box") {
    auto kv = kv_list(rest, ';');
    if (!kv.count("lo") || !kv.count("hi") || !kv.count("n")) throw ConfigError("box grid needs lo, hi and n");
    for (const auto& [k, v] : kv)
      if (k != "lo" && k != "hi" && k != "n") throw ConfigError("unknown box grid key: " + k);
    Vec3 nn = vec_of(kv["n"]);
    return cartesian_grid(vec_of(kv["lo"]), vec_of(kv["hi"]), {int(nn[0]), int(nn[1]), int(nn[2])});
  }
  if (kind == "line") {
    auto kv = kv_list(rest, ',');
    double L = ext.coarse;
    int n = 200;
    for (const auto& [k, v] : kv) {
      if (k == "L") L = num(v);
      else if (k == "n") n = int(num(v));
      else throw ConfigError("unknown line grid key: " + k);
    }
    return cartesian_grid(Vec3(-L, -0.5, -0.5), Vec3(L, 0.5, 0.5), {n, 1, 1});
  }
  throw ConfigError("unknown grid kind: " + kind);
}

void parallel_chunks(std::size_t n, int threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  const std::size_t nchunks = (n + kChunk - 1) / kChunk;
  if (threads <= 1 || nchunks <= 1) {
    for (std::size_t c = 0; c < nchunks; ++c) fn(c, c * kChunk, std::min(n, (c + 1) * kChunk));
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t nt = std::min<std::size_t>(threads, nchunks);
  for (std::size_t t = 0; t < nt; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t c = t; c < nchunks; c += nt) fn(c, c * kChunk, std::min(n, (c + 1) * kChunk));
    });
  for (auto& th : pool) th.join();
}

double ordered_sum(const std::vector<double>& parts) {
  double s = 0.0, comp = 0.0;
  for (double v : parts) {
    const double t = s + v;
    comp += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  return s + comp;
}

std::vector<IntegralResult> integrate_many(const std::function<void(const Vec3&, double*)>& f, std::size_t count,
                                           const Grid& g, int threads, double max_skip_fraction) {
  if (g.size() == 0) throw DegenerateGrid("empty grid");
  if (max_skip_fraction < 0) max_skip_fraction = default_tolerances().max_skip_fraction;
  const std::size_t nchunks = (g.size() + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> partial(count, std::vector<double>(nchunks, 0.0));
  std::vector<std::size_t> skipped(nchunks, 0);
  parallel_chunks(g.size(), threads, [&](std::size_t c, std::size_t b, std::size_t e) {
    std::vector<double> vals(count), sum(count, 0.0), comp(count, 0.0);
    for (std::size_t i = b; i < e; ++i) {
      try {
        f(g.nodes[i], vals.data());
      } catch (const NodeError&) {
        ++skipped[c];
        continue;
      } catch (const StencilError&) {
        ++skipped[c];
        continue;
      } catch (const DomainError&) {
        ++skipped[c];
        continue;
      }
      for (std::size_t k = 0; k < count; ++k) {
        const double v = g.weights[i] * vals[k];
        const double t = sum[k] + v;
        comp[k] += std::abs(sum[k]) >= std::abs(v) ? (sum[k] - t) + v : (v - t) + sum[k];
        sum[k] = t;
      }
    }
    for (std::size_t k = 0; k < count; ++k) partial[k][c] = sum[k] + comp[k];
  });
  std::size_t nskip = 0;
  for (auto s : skipped) nskip += s;
  if (double(nskip) > max_skip_fraction * double(g.size()))
    throw DegenerateGrid("skipped " + std::to_string(nskip) + " of " + std::to_string(g.size()) + " nodes");
  std::vector<IntegralResult> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = {ordered_sum(partial[k]), nskip, g.size()};
  return out;
}

IntegralResult integrate_scalar(const std::function<double(const Vec3&)>& f, const Grid& g, int threads,
                                double max_skip_fraction) {
  return integrate_many([&](const Vec3& x, double* out) { out[0] = f(x); }, 1, g, threads, max_skip_fraction)[0];
}

namespace {

template <class F>
auto guarded(const F& f, const Vec3& x) {
  try {
    return f(x);
  } catch (const NodeError& e) {
    throw StencilError(std::string("stencil touched a node: ") + e.what());
  } catch (const DomainError& e) {
    throw StencilError(std::string("stencil touched a singular point: ") + e.what());
  } catch (const DirectionUndefined& e) {
    throw StencilError(std::string("stencil touched an undefined direction: ") + e.what());
  }
}

template <class F>
auto central_first(const F& f, const Vec3& x, int axis, double h, int order) {
  Vec3 e = Vec3::Zero();
  e[axis] = h;
  if (order == 2) return (guarded(f, x + e) - guarded(f, x - e)) / (2.0 * h);
  return (-guarded(f, x + 2 * e) + 8.0 * guarded(f, x + e) - 8.0 * guarded(f, x - e) + guarded(f, x - 2 * e)) /
         (12.0 * h);
}

}  // namespace

Vec3 fd_gradient(const ScalarField& f, const Vec3& x, int order, double h0) {
  if (order != 2 && order != 4) throw ConfigError("fd order must be 2 or 4");
  if (h0 <= 0) h0 = fd_default_h0(order);
  const double h = h0 * (1.0 + x.norm());
  Vec3 g;
  for (int a = 0; a < 3; ++a) g[a] = central_first(f, x, a, h, order);
  return g;
}

double fd_divergence(const VectorField& f, const Vec3& x, int order, double h0) {
  if (order != 2 && order != 4) throw ConfigError("fd order must be 2 or 4");
  if (h0 <= 0) h0 = fd_default_h0(order);
  const double h = h0 * (1.0 + x.norm());
  double d = 0.0;
  for (int a = 0; a < 3; ++a) {
    auto comp = [&](const Vec3& y) { return f(y)[a]; };
    d += central_first(comp, x, a, h, order);
  }
  return d;
}

double fd_laplacian(const ScalarField& f, const Vec3& x, int order, double h0) {
  if (order != 2 && order != 4) throw ConfigError("fd order must be 2 or 4");
  if (h0 <= 0) h0 = fd_default_h0(order);
  const double h = h0 * (1.0 + x.norm());
  const double f0 = guarded(f, x);
  double s = 0.0;
  for (int a = 0; a < 3; ++a) {
    Vec3 e = Vec3::Zero();
    e[a] = h;
    if (order == 2)
      s += (guarded(f, x + e) - 2.0 * f0 + guarded(f, x - e)) / (h * h);
    else
      s += (-guarded(f, x + 2 * e) + 16.0 * guarded(f, x + e) - 30.0 * f0 + 16.0 * guarded(f, x - e) -
            guarded(f, x - 2 * e)) /
           (12.0 * h * h);
  }
  return s;
}

double fd_derivative(const std::function<double(double)>& f, double t, double h, int order) {
  if (order == 2) return (f(t + h) - f(t - h)) / (2.0 * h);
  return (-f(t + 2 * h) + 8.0 * f(t + h) - 8.0 * f(t - h) + f(t - 2 * h)) / (12.0 * h);
}

double find_root(const std::function<double(double)>& g, double a, double b, double tol) {
  const double ga = g(a), gb = g(b);
  if (ga == 0.0) return a;
  if (gb == 0.0) return b;
  if (!(ga * gb < 0.0)) throw NoBracket("no sign change on the bracket");
  std::uintmax_t iters = 200;
  auto stop = [tol](double l, double r) { return std::abs(r - l) <= tol; };
  auto res = boost::math::tools::toms748_solve(g, a, b, ga, gb, stop, iters);
  return 0.5 * (res.first + res.second);
}

double find_first_root(const std::function<double(double)>& g, double a, double b, int n, double tol) {
  double x0 = a, g0 = g(a);
  for (int i = 1; i <= n; ++i) {
    const double x1 = a + (b - a) * i / n, g1 = g(x1);
    if (g0 == 0.0) return x0;
    if (g0 * g1 < 0.0) return find_root(g, x0, x1, tol);
    x0 = x1;
    g0 = g1;
  }
  throw NoBracket("no sign change found while scanning");
}

std::vector<double> rk4_step(const OdeRhs& f, double t, const std::vector<double>& y, double dt) {
  boost::numeric::odeint::runge_kutta4<std::vector<double>> stepper;
  std::vector<double> out(y.size());
  stepper.do_step([&](const std::vector<double>& s, std::vector<double>& d, double tt) { f(s, d, tt); }, y, t, out,
                  dt);
  return out;
}

nlohmann::json grid_summary(const Grid& g) {
  return {{"description", g.description}, {"nodes", g.size()}, {"volume", g.volume}};
}

}  // namespace qflow
