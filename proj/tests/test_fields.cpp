#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "qflow/fields.hpp"

using namespace qflow;

TEST_CASE("Taylor jets carry exact derivatives") {
  // f = exp(x y) sin(z) + t^2 at (0.3, -0.8, 1.1, 0.5)
  const Jet<3> x = Jet<3>::variable(0.3, kX), y = Jet<3>::variable(-0.8, kY), z = Jet<3>::variable(1.1, kZ),
               t = Jet<3>::variable(0.5, kT);
  const Jet<3> f = exp(x * y) * sin(z) + t * t;
  const double e = std::exp(0.3 * -0.8), s = std::sin(1.1), c = std::cos(1.1);
  CHECK(f.value() == doctest::Approx(e * s + 0.25).epsilon(1e-14));
  CHECK(deriv(f, kX).value() == doctest::Approx(-0.8 * e * s).epsilon(1e-14));
  CHECK(deriv(deriv(f, kX), kY).value() == doctest::Approx((1 + 0.3 * -0.8) * e * s).epsilon(1e-14));
  CHECK(deriv(deriv(deriv(f, kX), kZ), kZ).value() == doctest::Approx(0.8 * e * s).epsilon(1e-14));
  CHECK(deriv(deriv(f, kT), kT).value() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(deriv(f, kZ).value() == doctest::Approx(e * c).epsilon(1e-14));
  const Jet<2> r = sqrt(truncate<2>(x * x + y * y));
  CHECK(deriv(r, kX).value() == doctest::Approx(0.3 / std::hypot(0.3, 0.8)).epsilon(1e-14));
  CHECK((recip(truncate<2>(y)) * truncate<2>(y)).value() == doctest::Approx(1.0));
}

TEST_CASE("s-state fields match the radial oracle") {
  struct Case {
    const char* name;
    oracle::Radial (*rho)(double);
    double E;
  };
  const Case cases[] = {{"hydrogen:1s", [](double r) { return oracle::hydrogen_1s(r); }, -0.5},
                        {"hydrogen:2s", oracle::hydrogen_2s, -0.125}};
  for (const auto& c : cases) {
    const QuantumState s(parse_state(c.name));
    for (const auto& x : oracle::shell_probes(100, 0.1, 10.0, 21)) {
      if (std::abs(x.norm() - 2.0) < 1e-3) continue;
      const FieldPoint f = field_point(s, x, 0.4);
      const auto o = oracle::s_fields(c.rho(x.norm()), x);
      CAPTURE(std::string(c.name));
      CHECK(f.rho == doctest::Approx(o.rho).epsilon(1e-12));
      CHECK((f.u - o.u).norm() <= 1e-10 * (1 + o.u.norm()));
      CHECK(f.v.norm() < 1e-14);
      CHECK(f.P == doctest::Approx(o.P).epsilon(1e-10).scale(1e-12));
      CHECK(f.E == doctest::Approx(c.E).epsilon(1e-12));
      CHECK(std::abs(f.F) < 1e-14);
      CHECK(std::abs(f.p) < 1e-14);
      // Bohm potential equals 1/2 u^2 + P/rho
      CHECK(f.Q == doctest::Approx(0.5 * f.u.squaredNorm() + f.P / f.rho).epsilon(1e-9));
    }
  }
}

TEST_CASE("2p1 fields match the closed form") {
  const QuantumState s(parse_state("hydrogen:2p1"));
  for (const auto& x : oracle::shell_probes(100, 0.2, 12.0, 22)) {
    if (std::hypot(x[0], x[1]) < 1e-2) continue;
    const PolarJet j = polar_jet(s, x, 0.0);
    const FieldPoint f = field_point(s, x, 0.0);
    const auto o = oracle::hydrogen_2p1(x);
    CHECK(j.rho == doctest::Approx(o.rho).epsilon(1e-12));
    CHECK((j.grad_rho - o.grad_rho).norm() <= 1e-11 * o.grad_rho.norm() + 1e-300);
    CHECK(j.lap_rho == doctest::Approx(o.lap_rho).epsilon(1e-10).scale(1e-14));
    CHECK((f.v - o.v).norm() <= 1e-11 * o.v.norm());
    CHECK(std::abs(f.u.dot(f.v)) < 1e-12 * (f.u.squaredNorm() + f.v.squaredNorm()));
    CHECK(f.E == doctest::Approx(-0.125).epsilon(1e-12));
    // current j = rho v and div j = 0 for a stationary state
    CHECK((f.j - o.rho * o.v).norm() < 1e-12 * o.rho * o.v.norm());
    CHECK(std::abs(j.div_rho_gradS) < 1e-14);
  }
}

TEST_CASE("superposition energy fields match the closed forms") {
  const QuantumState s(parse_state("superposition:1s+2s"));
  for (double t : {0.0, 0.7, 1.9, 3.1, 5.3})
    for (const auto& x : oracle::shell_probes(40, 0.1, 9.0, 23)) {
      const FieldPoint f = field_point(s, x, t);
      const auto o = oracle::superposition_1s2s(x, t);
      CHECK(f.E == doctest::Approx(o.E).epsilon(1e-8).scale(1e-8));
      CHECK(f.F == doctest::Approx(o.F).epsilon(1e-8).scale(1e-8));
      CHECK(f.Ebar == doctest::Approx(o.E + o.F).epsilon(1e-8).scale(1e-8));
    }
}

TEST_CASE("FD-vs-analytic gradients on 100 probes per state") {
  for (const char* name : {"hydrogen:1s", "hydrogen:2s", "hydrogen:2p1", "hydrogen:3d2", "oscillator3d:1,0,1",
                           "superposition:1s+2p0", "hydrogen:1s:Z=2"}) {
    const QuantumState s(parse_state(name));
    const double L = s.length_scale();
    double worst = 0.0;
    for (const auto& x : oracle::shell_probes(100, 0.1 * L, 6.0 * L, 24)) {
      const PolarJet a = polar_jet(s, x, 0.3);
      const Vec3 g = fd_gradient([&](const Vec3& y) { return std::norm(s.eval(y, 0.3)); }, x);
      const double scale = std::max(a.grad_rho.norm(), 1e-300);
      if (a.rho < 1e-12 * a.grad_rho.norm()) continue;
      worst = std::max(worst, (g - a.grad_rho).norm() / scale);
    }
    CAPTURE(std::string(name));
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("derivative policies agree") {
  const QuantumState s(parse_state("superposition:1s+2s"));
  for (const auto& x : oracle::shell_probes(20, 0.3, 6.0, 25)) {
    const FieldPoint a = field_point(s, x, 0.8);
    const FieldPoint b = field_point(s, x, 0.8, DerivativePolicy::fd_all());
    CHECK(b.rho == doctest::Approx(a.rho).epsilon(1e-12));
    CHECK((b.u - a.u).norm() < 1e-6 * (1 + a.u.norm()));
    CHECK(b.E == doctest::Approx(a.E).epsilon(1e-6).scale(1e-6));
    CHECK(b.P == doctest::Approx(a.P).epsilon(1e-4).scale(1e-6));
  }
}

TEST_CASE("nodes raise NodeError") {
  const QuantumState s(parse_state("hydrogen:2s"));
  CHECK_THROWS_AS(field_point(s, Vec3(2.0, 0, 0), 0.0), NodeError);
  const QuantumState p(parse_state("hydrogen:2p1"));
  CHECK_THROWS_AS(field_point(p, Vec3(0, 0, 1.0), 0.0), NodeError);
}

TEST_CASE("field bundle summary and CSV") {
  const QuantumState s(parse_state("hydrogen:2s"));
  const Grid g = spherical_grid(8, 4, 4, 10.0);
  const FieldBundle b = field_bundle(s, g, 0.0);
  CHECK(b.nodes.size() == g.size());
  CHECK(b.summary().at("schema") == 1);
  std::ostringstream os;
  b.write_csv(os);
  const std::string text = os.str();
  std::istringstream in(text);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
  CHECK(std::count(text.begin(), text.end(), '\n') == long(g.size() - b.skipped + 1));
}
