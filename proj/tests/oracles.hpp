// Closed forms written out by hand, independent of the library's jets,
// polynomial tables and quadrature. Atomic units, hbar = m = 1.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Core>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

using V3 = Eigen::Vector3d;
using cd = std::complex<double>;
inline constexpr double pi = 3.14159265358979323846;

// Radial density profile rho(r) with first and second r-derivatives.
struct Radial {
  double rho, d1, d2;
};

inline Radial hydrogen_1s(double r, double Z = 1.0) {
  const double c = Z * Z * Z / pi * std::exp(-2 * Z * r);
  return {c, -2 * Z * c, 4 * Z * Z * c};
}

// (2 - r)^2 e^{-r} / (32 pi)
inline Radial hydrogen_2s(double r) {
  const double e = std::exp(-r) / (32 * pi);
  return {(2 - r) * (2 - r) * e, -(8 - 6 * r + r * r) * e, (14 - 8 * r + r * r) * e};
}

inline double laplacian(const Radial& f, double r) { return f.d2 + 2 * f.d1 / r; }

// Fields of a real stationary s state: u = -grad rho / (2 rho), P = -lap rho / 4.
struct SFields {
  double rho;
  V3 u;
  double P;
};
inline SFields s_fields(const Radial& f, const V3& x) {
  const double r = x.norm();
  return {f.rho, -0.5 * f.d1 / f.rho * x / r, -0.25 * laplacian(f, r)};
}

inline double psi_1s(const V3& x, double Z = 1.0) { return std::sqrt(Z * Z * Z / pi) * std::exp(-Z * x.norm()); }
inline double psi_2s(const V3& x) {
  const double r = x.norm();
  return (2 - r) * std::exp(-r / 2) / (4 * std::sqrt(2 * pi));
}

// |2p, m=1|^2 = (x^2 + y^2) e^{-r} / (64 pi); velocity grad(phi) = (-y, x, 0)/(x^2 + y^2).
struct P1Fields {
  double rho;
  V3 grad_rho;
  double lap_rho;
  V3 v;
};
inline P1Fields hydrogen_2p1(const V3& x) {
  const double r = x.norm(), s = x[0] * x[0] + x[1] * x[1];
  const double e = std::exp(-r) / (64 * pi);
  const V3 grad_s(2 * x[0], 2 * x[1], 0);
  return {s * e, e * (grad_s - s * x / r), e * (4 + s - 6 * s / r), V3(-x[1], x[0], 0) / s};
}

inline double hydrogen_energy(int n, double Z = 1.0) { return -Z * Z / (2.0 * n * n); }

// Equal-weight 1s + 2s superposition: Psi = (psi1 e^{-i E1 t} + psi2 e^{-i E2 t}) / sqrt 2.
struct Superposition {
  double rho, E, F;
};
inline Superposition superposition_1s2s(const V3& x, double t) {
  const double E1 = -0.5, E2 = -0.125;
  const cd a = psi_1s(x) / std::sqrt(2.0) * std::exp(cd(0, -E1 * t));
  const cd b = psi_2s(x) / std::sqrt(2.0) * std::exp(cd(0, -E2 * t));
  const cd psi = a + b;
  const cd dpsi = cd(0, -1) * (E1 * a + E2 * b);
  const double rho = std::norm(psi);
  const cd q = std::conj(psi) * dpsi;
  // S_t = Im(psi* psi_t)/rho, rho_t = 2 Re(psi* psi_t)
  return {rho, -q.imag() / rho, 0.5 * (2 * q.real()) / rho};
}

// Roots of the 1s radial force balance.
inline double pressure_crossover(double Z = 1.0) { return (1 + std::sqrt(3.0)) / (2 * Z); }
inline double modified_bohr_radius(double Z = 1.0) { return 1.5 / Z; }

// He-like 1s^2 with orbital exponent zeta and nuclear charge Z.
inline double he_total_energy(double zeta, double Z = 2.0) { return zeta * zeta - 2 * Z * zeta + 5 * zeta / 8; }
inline double he_coulomb_J(double zeta) { return 5 * zeta / 8; }
// Potential of the density |phi_1s(zeta)|^2 normalized to 1.
inline double he_hartree_potential(double r, double zeta) {
  return (1 - std::exp(-2 * zeta * r) * (1 + zeta * r)) / r;
}

// int_0^inf f(r) 4 pi r^2 dr on [0, R] by adaptive Gauss-Kronrod.
inline double radial_integral(const std::function<double(double)>& f, double R) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double r) { return 4 * pi * r * r * f(r); }, 0.0, R, 8, 1e-13);
}

inline std::vector<V3> shell_probes(std::size_t n, double rmin, double rmax, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> ur(rmin, rmax), uc(-1.0, 1.0), up(0.0, 2 * pi);
  std::vector<V3> out;
  while (out.size() < n) {
    const double r = ur(gen), c = uc(gen), p = up(gen), s = std::sqrt(1 - c * c);
    out.emplace_back(r * s * std::cos(p), r * s * std::sin(p), r * c);
  }
  return out;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

}  // namespace oracle
