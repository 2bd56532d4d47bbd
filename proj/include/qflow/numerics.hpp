// Grids, quadrature, finite differences, root finding and RK4.
#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qflow/core.hpp"

namespace qflow {

struct Grid {
  enum class Kind { cartesian_box, spherical_product, points };
  Kind kind = Kind::points;
  std::vector<Vec3> nodes;
  std::vector<double> weights;  // volume weights (points: 1 each)
  double volume = 0.0;          // enclosed volume (0 for point sets)
  std::string description;

  std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre nodes/weights on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w);

// Radial GL on (rmin, rmax], GL in cos(theta), uniform phi.
Grid spherical_grid(int nr, int ntheta, int nphi, double rmax, double rmin = 0.0);
// Tensor GL box. An axis with one node integrates over its full width.
Grid cartesian_grid(const Vec3& lo, const Vec3& hi, const std::array<int, 3>& n);
Grid point_set(std::vector<Vec3> pts);

// Random probes with radius uniform in [rmin, rmax] and isotropic direction.
std::vector<Vec3> random_shell_points(std::size_t n, double rmin, double rmax, unsigned seed);

// Default grid radii (half-widths for 1D lines) for a state.
struct GridExtent {
  double reference = 30.0;
  double coarse = 12.0;
  int dimension = 3;
};

// Parse "reference", "coarse", "spherical:nr=..,nt=..,np=..,rmax=..[,rmin=..]",
// "box:lo=x,y,z;hi=x,y,z;n=a,b,c" or "line:L=..,n=..". Throws ConfigError.
Grid parse_grid(const std::string& spec, const GridExtent& ext);
Grid reference_grid(const GridExtent& ext);
Grid coarse_grid(const GridExtent& ext);

struct IntegralResult {
  double value = 0.0;
  std::size_t skipped = 0;
  std::size_t total = 0;
};

// Deterministic chunked loop: fixed chunks, chunk results combined in order.
void parallel_chunks(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);
inline constexpr std::size_t kChunk = 2048;

// Compensated sum of per-chunk partials in chunk order.
double ordered_sum(const std::vector<double>& parts);

// Sum w_i f(x_i); NodeError/StencilError/DomainError nodes are skipped and
// counted; DegenerateGrid past max_skip_fraction (default from tolerances).
IntegralResult integrate_scalar(const std::function<double(const Vec3&)>& f, const Grid& g, int threads = 1,
                                double max_skip_fraction = -1.0);

// Several integrands in one pass.
std::vector<IntegralResult> integrate_many(const std::function<void(const Vec3&, double*)>& f, std::size_t count,
                                           const Grid& g, int threads = 1, double max_skip_fraction = -1.0);

using ScalarField = std::function<double(const Vec3&)>;
using VectorField = std::function<Vec3(const Vec3&)>;

inline double fd_default_h0(int order) { return order == 4 ? 1e-4 : 1e-5; }

// Central differences, step h = h0 (1 + |x|). Errors of f become StencilError.
Vec3 fd_gradient(const ScalarField& f, const Vec3& x, int order = 4, double h0 = -1.0);
double fd_divergence(const VectorField& f, const Vec3& x, int order = 4, double h0 = -1.0);
double fd_laplacian(const ScalarField& f, const Vec3& x, int order = 4, double h0 = -1.0);
// Derivative of a function of one variable (used for time derivatives).
double fd_derivative(const std::function<double(double)>& f, double t, double h, int order = 4);

// Root of g on [a, b] (TOMS 748); NoBracket when g(a) g(b) > 0.
double find_root(const std::function<double(double)>& g, double a, double b, double tol = 1e-12);
// Scan [a, b] in n steps for the first sign change, then refine.
double find_first_root(const std::function<double(double)>& g, double a, double b, int n = 400, double tol = 1e-12);

using OdeRhs = std::function<void(const std::vector<double>& y, std::vector<double>& dydt, double t)>;
// Classical fourth-order step.
std::vector<double> rk4_step(const OdeRhs& f, double t, const std::vector<double>& y, double dt);

nlohmann::json grid_summary(const Grid& g);

}  // namespace qflow
