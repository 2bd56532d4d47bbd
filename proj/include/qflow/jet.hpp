// Truncated multivariate Taylor jets in (x, y, z, t).
//
// A Jet<D> stores the Taylor coefficients f^(a)/a! of a function around a
// point for every multi-index a with |a| <= D. Monomials are ordered by total
// degree first, so the coefficients of a lower-degree jet are a prefix of the
// higher-degree one and truncation is a copy.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace qflow {

inline constexpr int kVars = 4;     // x, y, z, t
inline constexpr int kMaxDeg = 4;
inline constexpr int kX = 0, kY = 1, kZ = 2, kT = 3;

constexpr int n_monomials(int d) { return d < 0 ? 0 : (d + 1) * (d + 2) * (d + 3) * (d + 4) / 24; }
constexpr int n_products(int d) {
  // multi-index pairs in 8 variables with total degree <= d
  int n = 1;
  for (int k = 1; k <= 8; ++k) n = n * (d + k) / k;
  return n;
}

namespace detail {

struct Monomial {
  std::array<std::int8_t, kVars> e{};
  int deg = 0;
};

constexpr auto build_monomials() {
  std::array<Monomial, n_monomials(kMaxDeg)> m{};
  int k = 0;
  for (int deg = 0; deg <= kMaxDeg; ++deg)
    for (int a = deg; a >= 0; --a)
      for (int b = deg - a; b >= 0; --b)
        for (int c = deg - a - b; c >= 0; --c) {
          m[k].e = {std::int8_t(a), std::int8_t(b), std::int8_t(c), std::int8_t(deg - a - b - c)};
          m[k].deg = deg;
          ++k;
        }
  return m;
}
inline constexpr auto kMonomials = build_monomials();

constexpr int lookup_slot(int a, int b, int c, int d) { return ((a * 5 + b) * 5 + c) * 5 + d; }

constexpr auto build_index() {
  std::array<std::int16_t, 625> idx{};
  for (auto& v : idx) v = -1;
  for (int k = 0; k < n_monomials(kMaxDeg); ++k) {
    const auto& e = kMonomials[k].e;
    idx[lookup_slot(e[0], e[1], e[2], e[3])] = std::int16_t(k);
  }
  return idx;
}
inline constexpr auto kIndex = build_index();

struct Triple {
  std::int16_t i, j, k;
};

constexpr auto build_products() {
  std::array<Triple, n_products(kMaxDeg)> p{};
  int n = 0;
  for (int k = 0; k < n_monomials(kMaxDeg); ++k) {
    const auto& ek = kMonomials[k].e;
    for (int i = 0; i < n_monomials(kMaxDeg); ++i) {
      const auto& ei = kMonomials[i].e;
      bool ok = true;
      for (int v = 0; v < kVars; ++v) ok = ok && ei[v] <= ek[v];
      if (!ok) continue;
      int j = kIndex[lookup_slot(ek[0] - ei[0], ek[1] - ei[1], ek[2] - ei[2], ek[3] - ei[3])];
      p[n++] = {std::int16_t(i), std::int16_t(j), std::int16_t(k)};
    }
  }
  return p;
}
inline constexpr auto kProducts = build_products();

// kShift[v][k]: index of monomial k + e_v, used by differentiation.
constexpr auto build_shift() {
  std::array<std::array<std::int16_t, n_monomials(kMaxDeg - 1)>, kVars> s{};
  for (int v = 0; v < kVars; ++v)
    for (int k = 0; k < n_monomials(kMaxDeg - 1); ++k) {
      auto e = kMonomials[k].e;
      e[v] += 1;
      s[v][k] = kIndex[lookup_slot(e[0], e[1], e[2], e[3])];
    }
  return s;
}
inline constexpr auto kShift = build_shift();

}  // namespace detail

constexpr int monomial_index(int a, int b, int c, int d) {
  return detail::kIndex[detail::lookup_slot(a, b, c, d)];
}
constexpr int unit_index(int v) { return 1 + v; }

template <int D>
struct Jet {
  static_assert(D >= 0 && D <= kMaxDeg);
  static constexpr int N = n_monomials(D);
  std::array<double, N> c{};

  Jet() = default;
  Jet(double value) { c[0] = value; }  // NOLINT: constants promote implicitly

  static Jet variable(double value, int v) {
    Jet j(value);
    if constexpr (D >= 1) j.c[unit_index(v)] = 1.0;
    return j;
  }

  double value() const { return c[0]; }

  Jet& operator+=(const Jet& o) {
    for (int k = 0; k < N; ++k) c[k] += o.c[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int k = 0; k < N; ++k) c[k] -= o.c[k];
    return *this;
  }
  Jet& operator*=(double s) {
    for (auto& x : c) x *= s;
    return *this;
  }
};

template <int D> Jet<D> operator+(Jet<D> a, const Jet<D>& b) { return a += b; }
template <int D> Jet<D> operator-(Jet<D> a, const Jet<D>& b) { return a -= b; }
template <int D> Jet<D> operator-(Jet<D> a) { return a *= -1.0; }
template <int D> Jet<D> operator*(Jet<D> a, double s) { return a *= s; }
template <int D> Jet<D> operator*(double s, Jet<D> a) { return a *= s; }
template <int D> Jet<D> operator/(Jet<D> a, double s) { return a *= 1.0 / s; }
template <int D> Jet<D> operator+(Jet<D> a, double s) { a.c[0] += s; return a; }
template <int D> Jet<D> operator+(double s, Jet<D> a) { a.c[0] += s; return a; }
template <int D> Jet<D> operator-(Jet<D> a, double s) { a.c[0] -= s; return a; }
template <int D> Jet<D> operator-(double s, Jet<D> a) { a *= -1.0; a.c[0] += s; return a; }

template <int D>
Jet<D> operator*(const Jet<D>& a, const Jet<D>& b) {
  Jet<D> r;
  constexpr int np = n_products(D);
  for (int p = 0; p < np; ++p) {
    const auto& t = detail::kProducts[p];
    r.c[t.k] += a.c[t.i] * b.c[t.j];
  }
  return r;
}

template <int D2, int D>
Jet<D2> truncate(const Jet<D>& a) {
  static_assert(D2 <= D);
  Jet<D2> r;
  for (int k = 0; k < Jet<D2>::N; ++k) r.c[k] = a.c[k];
  return r;
}

template <int D>
Jet<D - 1> deriv(const Jet<D>& a, int v) {
  static_assert(D >= 1);
  Jet<D - 1> r;
  for (int k = 0; k < Jet<D - 1>::N; ++k) {
    const int m = detail::kShift[v][k];
    r.c[k] = double(detail::kMonomials[k].e[v] + 1) * a.c[m];
  }
  return r;
}

// f(a0 + h) = sum_k taylor[k] h^k with h the nilpotent part of a.
template <int D>
Jet<D> compose(const Jet<D>& a, const std::array<double, D + 1>& taylor) {
  Jet<D> h = a;
  h.c[0] = 0.0;
  Jet<D> r(taylor[D]);
  for (int k = D - 1; k >= 0; --k) r = r * h + taylor[k];
  return r;
}

template <int D>
Jet<D> exp(const Jet<D>& a) {
  std::array<double, D + 1> t{};
  double e = std::exp(a.c[0]), f = 1.0;
  for (int k = 0; k <= D; ++k) {
    if (k > 0) f *= k;
    t[k] = e / f;
  }
  return compose(a, t);
}

template <int D>
Jet<D> pow(const Jet<D>& a, double p) {
  std::array<double, D + 1> t{};
  double binom = 1.0;
  for (int k = 0; k <= D; ++k) {
    t[k] = binom * std::pow(a.c[0], p - k);
    binom *= (p - k) / (k + 1);
  }
  return compose(a, t);
}

template <int D> Jet<D> sqrt(const Jet<D>& a) { return pow(a, 0.5); }

template <int D>
Jet<D> recip(const Jet<D>& a) {
  std::array<double, D + 1> t{};
  double inv = 1.0 / a.c[0], q = inv;
  for (int k = 0; k <= D; ++k) {
    t[k] = (k % 2 ? -q : q);
    q *= inv;
  }
  return compose(a, t);
}

template <int D> Jet<D> operator/(const Jet<D>& a, const Jet<D>& b) { return a * recip(b); }
template <int D> Jet<D> operator/(double s, const Jet<D>& b) { return recip(b) * s; }

template <int D>
Jet<D> log(const Jet<D>& a) {
  std::array<double, D + 1> t{};
  t[0] = std::log(a.c[0]);
  double inv = 1.0 / a.c[0], q = inv;
  for (int k = 1; k <= D; ++k) {
    t[k] = (k % 2 ? 1.0 : -1.0) * q / k;
    q *= inv;
  }
  return compose(a, t);
}

template <int D>
Jet<D> sin(const Jet<D>& a) {
  std::array<double, D + 1> t{};
  const double s = std::sin(a.c[0]), co = std::cos(a.c[0]);
  double f = 1.0;
  for (int k = 0; k <= D; ++k) {
    if (k > 0) f *= k;
    const double d[4] = {s, co, -s, -co};
    t[k] = d[k % 4] / f;
  }
  return compose(a, t);
}

template <int D>
Jet<D> cos(const Jet<D>& a) {
  std::array<double, D + 1> t{};
  const double s = std::sin(a.c[0]), co = std::cos(a.c[0]);
  double f = 1.0;
  for (int k = 0; k <= D; ++k) {
    if (k > 0) f *= k;
    const double d[4] = {co, -s, -co, s};
    t[k] = d[k % 4] / f;
  }
  return compose(a, t);
}

template <int D>
Jet<D> ipow(const Jet<D>& a, int n) {
  Jet<D> r(1.0);
  for (int k = 0; k < n; ++k) r = r * a;
  return r;
}

// Complex-valued jet stored as two real jets.
template <int D>
struct CJet {
  Jet<D> re, im;

  CJet() = default;
  CJet(const Jet<D>& r) : re(r) {}  // NOLINT
  CJet(const Jet<D>& r, const Jet<D>& i) : re(r), im(i) {}
  CJet(std::complex<double> z) : re(z.real()), im(z.imag()) {}  // NOLINT

  std::complex<double> value() const { return {re.c[0], im.c[0]}; }
  std::complex<double> coef(int k) const { return {re.c[k], im.c[k]}; }

  CJet& operator+=(const CJet& o) { re += o.re; im += o.im; return *this; }
  CJet& operator-=(const CJet& o) { re -= o.re; im -= o.im; return *this; }
};

template <int D> CJet<D> operator+(CJet<D> a, const CJet<D>& b) { return a += b; }
template <int D> CJet<D> operator-(CJet<D> a, const CJet<D>& b) { return a -= b; }
template <int D> CJet<D> operator-(const CJet<D>& a) { return {-a.re, -a.im}; }

template <int D>
CJet<D> operator*(const CJet<D>& a, const CJet<D>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <int D> CJet<D> operator*(const CJet<D>& a, const Jet<D>& b) { return {a.re * b, a.im * b}; }
template <int D> CJet<D> operator*(const Jet<D>& b, const CJet<D>& a) { return {a.re * b, a.im * b}; }
template <int D>
CJet<D> operator*(const CJet<D>& a, std::complex<double> s) {
  return {a.re * s.real() - a.im * s.imag(), a.re * s.imag() + a.im * s.real()};
}
template <int D> CJet<D> operator*(std::complex<double> s, const CJet<D>& a) { return a * s; }
template <int D> CJet<D> operator*(const CJet<D>& a, double s) { return {a.re * s, a.im * s}; }
template <int D> CJet<D> operator*(double s, const CJet<D>& a) { return {a.re * s, a.im * s}; }

template <int D> CJet<D> conj(const CJet<D>& a) { return {a.re, -a.im}; }

template <int D>
CJet<D> exp(const CJet<D>& a) {
  const Jet<D> m = exp(a.re);
  return {m * cos(a.im), m * sin(a.im)};
}

template <int D2, int D>
CJet<D2> truncate(const CJet<D>& a) {
  return {truncate<D2>(a.re), truncate<D2>(a.im)};
}

template <int D>
CJet<D - 1> deriv(const CJet<D>& a, int v) {
  return {deriv(a.re, v), deriv(a.im, v)};
}

// Re/Im of conj(a)*b without forming the full complex product twice.
template <int D> Jet<D> re_conj_mul(const CJet<D>& a, const CJet<D>& b) { return a.re * b.re + a.im * b.im; }
template <int D> Jet<D> im_conj_mul(const CJet<D>& a, const CJet<D>& b) { return a.re * b.im - a.im * b.re; }

// Factorial of a multi-index, used to turn Taylor coefficients into partials.
constexpr double multi_factorial(int k) {
  const auto& e = detail::kMonomials[k].e;
  double f = 1.0;
  for (int v = 0; v < kVars; ++v)
    for (int i = 2; i <= e[v]; ++i) f *= i;
  return f;
}

}  // namespace qflow
