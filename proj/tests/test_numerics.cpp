#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "qflow/numerics.hpp"

using namespace qflow;

TEST_CASE("Gauss-Legendre is exact to degree 2n - 1") {
  for (int n : {1, 3, 8, 20}) {
    std::vector<double> x, w;
    gauss_legendre(n, -0.5, 2.0, x, w);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double q = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) q += w[i] * std::pow(x[i], k);
      const double exact = (std::pow(2.0, k + 1) - std::pow(-0.5, k + 1)) / (k + 1);
      CAPTURE(n);
      CAPTURE(k);
      CHECK(q == doctest::Approx(exact).epsilon(1e-13));
    }
  }
}

TEST_CASE("spherical grid closed forms") {
  const Grid g = spherical_grid(80, 12, 12, 40.0);
  // int e^{-2r} dV = pi; int z^2 e^{-r} dV = 4 pi * 4! / 3 = 32 pi
  const auto a = integrate_scalar([](const Vec3& x) { return std::exp(-2 * x.norm()); }, g);
  const auto b = integrate_scalar([](const Vec3& x) { return x[2] * x[2] * std::exp(-x.norm()); }, g);
  CHECK(a.value == doctest::Approx(oracle::pi).epsilon(1e-12));
  CHECK(b.value == doctest::Approx(32 * oracle::pi).epsilon(1e-12));
  CHECK(g.volume == doctest::Approx(4.0 / 3.0 * oracle::pi * 64000.0).epsilon(1e-12));
  // angular polynomials x^2 y^2 z^2 on the unit sphere shell integrate to 4 pi / 105 * (R^9 - r^9) / 9
  const Grid shell = spherical_grid(6, 8, 8, 2.0, 1.0);
  const auto c = integrate_scalar([](const Vec3& x) { return x[0] * x[0] * x[1] * x[1] * x[2] * x[2]; }, shell);
  CHECK(c.value == doctest::Approx(4 * oracle::pi / 105 * (512.0 - 1.0) / 9).epsilon(1e-12));
}

TEST_CASE("cartesian box and line grids") {
  const Grid g = cartesian_grid(Vec3(-1, 0, 2), Vec3(1, 3, 2.5), {4, 3, 2});
  const auto r = integrate_scalar([](const Vec3& x) { return x[0] * x[0] * x[1] + x[2]; }, g);
  // int x^2 y = (2/3)(9/2)(1/2) = 1.5, int z = 6 * (2.5^2 - 4)/2 = 6.75
  CHECK(r.value == doctest::Approx(1.5 + 6.75).epsilon(1e-13));
  const Grid line = parse_grid("line:L=5,n=50", GridExtent{10, 5, 1});
  const auto gauss = integrate_scalar([](const Vec3& x) { return std::exp(-x[0] * x[0]); }, line);
  CHECK(gauss.value == doctest::Approx(std::sqrt(oracle::pi)).epsilon(1e-9));
}

TEST_CASE("grid specs") {
  const GridExtent ext{30, 12, 3};
  CHECK(parse_grid("spherical:nr=10,nt=4,np=6,rmax=5", ext).size() == 240);
  CHECK(parse_grid("box:lo=-1,-1,-1;hi=1,1,1;n=3,3,3", ext).size() == 27);
  CHECK(parse_grid("coarse", ext).size() == coarse_grid(ext).size());
  for (const char* bad : {"spherical:nr=0,nt=4,np=4,rmax=5", "box:lo=1,1,1;hi=0,0,0;n=2,2,2", "tetra", "spherical:q=1"})
    CHECK_THROWS_AS(parse_grid(bad, ext), ConfigError);
}

TEST_CASE("FD stencils match analytic derivatives") {
  const ScalarField f = [](const Vec3& x) { return std::exp(-x.norm()) * x[0]; };
  const Vec3 x(0.8, -0.5, 1.1);
  const double r = x.norm(), e = std::exp(-r);
  const Vec3 grad = e * (Vec3::UnitX() - x[0] * x / r);
  // lap(x e^{-r}) = x e^{-r} (1 - 4/r)
  const double lap = x[0] * e * (1 - 4 / r);
  CHECK((fd_gradient(f, x) - grad).norm() < 1e-10);
  CHECK(fd_laplacian(f, x) == doctest::Approx(lap).epsilon(1e-6));
  const VectorField v = [](const Vec3& y) { return Vec3(y[0] * y[1], y[1] * y[1], std::sin(y[2])); };
  CHECK(fd_divergence(v, x) == doctest::Approx(x[1] + 2 * x[1] + std::cos(x[2])).epsilon(1e-9));
}

TEST_CASE("h refinement: halving h cuts the fourth-order error by at least 8") {
  const ScalarField f = [](const Vec3& x) { return std::exp(-x.norm()); };
  const Vec3 x(1.2, 0.4, -0.7);
  const double r = x.norm();
  const Vec3 grad = -std::exp(-r) * x / r;
  const double lap = std::exp(-r) * (1 - 2 / r);
  for (double h : {0.04, 0.02}) {
    const double eg1 = (fd_gradient(f, x, 4, h) - grad).norm();
    const double eg2 = (fd_gradient(f, x, 4, h / 2) - grad).norm();
    const double el1 = std::abs(fd_laplacian(f, x, 4, h) - lap);
    const double el2 = std::abs(fd_laplacian(f, x, 4, h / 2) - lap);
    CAPTURE(h);
    CHECK(eg1 / eg2 >= 8.0);
    CHECK(el1 / el2 >= 8.0);
  }
  // second order gains only about 4
  const double e1 = (fd_gradient(f, x, 2, 0.04) - grad).norm(), e2 = (fd_gradient(f, x, 2, 0.02) - grad).norm();
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("dt refinement of RK4") {
  // y' = -y t, y = exp(-t^2/2)
  const OdeRhs rhs = [](const std::vector<double>& y, std::vector<double>& d, double t) { d = {-y[0] * t}; };
  auto err = [&](double dt) {
    std::vector<double> y{1.0};
    double t = 0.0;
    while (t < 2.0 - 1e-12) {
      y = rk4_step(rhs, t, y, dt);
      t += dt;
    }
    return std::abs(y[0] - std::exp(-2.0));
  };
  CHECK(err(0.1) / err(0.05) >= 8.0);
  CHECK(err(0.05) / err(0.025) >= 8.0);
}

TEST_CASE("roots") {
  CHECK(find_root([](double x) { return x * x - 2; }, 0, 2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(find_root([](double x) { return x * x + 1; }, -1, 1), NoBracket);
  // first of several roots
  CHECK(find_first_root([](double x) { return std::sin(x); }, 0.5, 10.0) == doctest::Approx(oracle::pi).epsilon(1e-12));
  CHECK_THROWS_AS(find_first_root([](double x) { return 1 + x * x; }, 0, 5), NoBracket);
}

TEST_CASE("deterministic reductions across thread counts") {
  const Grid g = spherical_grid(60, 20, 20, 10.0);
  const ScalarField f = [](const Vec3& x) { return std::exp(-x.norm()) * (1 + x[0]); };
  const double a = integrate_scalar(f, g, 1).value;
  const double b = integrate_scalar(f, g, 3).value;
  const double c = integrate_scalar(f, g, 8).value;
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("failing nodes are skipped up to the threshold") {
  const Grid g = point_set(oracle::shell_probes(200, 0.1, 1.0, 5));
  int calls = 0;
  auto f = [&](const Vec3& x) -> double {
    if (x[0] > 0.9 * x.norm()) throw NodeError("node");
    ++calls;
    return 1.0;
  };
  const auto r = integrate_scalar(f, g, 1, 1.0);
  CHECK(r.skipped > 0);
  CHECK(r.value == doctest::Approx(double(r.total - r.skipped)));
  CHECK_THROWS_AS(integrate_scalar(f, g, 1, 0.0), DegenerateGrid);
}
