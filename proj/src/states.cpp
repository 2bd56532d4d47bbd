#include "qflow/states.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

namespace qflow {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return factorial(n) / (factorial(k) * factorial(n - k));
}

// Generalized Laguerre L_k^a coefficients in ascending powers.
std::vector<double> laguerre_coeffs(int k, int a) {
  std::vector<double> c(k + 1);
  for (int i = 0; i <= k; ++i) c[i] = ((i % 2) ? -1.0 : 1.0) * binomial(k + a, k - i) / factorial(i);
  return c;
}

// Physicists' Hermite H_n coefficients in ascending powers.
std::vector<double> hermite_coeffs(int n) {
  std::vector<double> c(n + 1, 0.0);
  for (int k = 0; 2 * k <= n; ++k)
    c[n - 2 * k] = ((k % 2) ? -1.0 : 1.0) * factorial(n) / (factorial(k) * factorial(n - 2 * k)) *
                   std::pow(2.0, n - 2 * k);
  return c;
}

template <int D>
Jet<D> horner(const std::vector<double>& c, const Jet<D>& x) {
  Jet<D> r(c.back());
  for (int i = int(c.size()) - 2; i >= 0; --i) r = r * x + c[i];
  return r;
}

template <int D>
CJet<D> time_phase(double energy, double t) {
  // exp(-i energy t)
  Jet<D> T = Jet<D>::variable(t, kT);
  return exp(CJet<D>(Jet<D>(0.0), T * (-energy)));
}

const char kOrbitalLetters[] = "spdfgh";

}  // namespace

StateSpec StateSpec::hydrogen(int n, int l, int m, double Z) {
  StateSpec s;
  s.kind = StateKind::hydrogenic;
  s.n = n;
  s.l = l;
  s.m = m;
  s.Z = Z;
  return s;
}

StateSpec StateSpec::oscillator(int n, double omega) {
  StateSpec s;
  s.kind = StateKind::oscillator1d;
  s.n = n;
  s.omega = omega;
  return s;
}

StateSpec StateSpec::oscillator3(int nx, int ny, int nz, double omega) {
  StateSpec s;
  s.kind = StateKind::oscillator3d;
  s.nx = nx;
  s.ny = ny;
  s.nz = nz;
  s.omega = omega;
  return s;
}

StateSpec StateSpec::coherent(std::complex<double> alpha, double omega) {
  StateSpec s;
  s.kind = StateKind::coherent1d;
  s.alpha = alpha;
  s.omega = omega;
  return s;
}

StateSpec StateSpec::superpose(const std::vector<std::pair<std::complex<double>, StateSpec>>& terms) {
  StateSpec s;
  s.kind = StateKind::superposition;
  for (const auto& [c, st] : terms) s.terms.push_back({c, std::make_shared<StateSpec>(st)});
  return s;
}

StateSpec StateSpec::closed_shell(const std::vector<StateSpec>& orbitals, double nuclear_charge, bool interacting) {
  StateSpec s;
  s.kind = StateKind::determinant;
  s.orbitals = orbitals;
  s.occupancy.assign(orbitals.size(), 2);
  s.nuclear_charge = nuclear_charge;
  s.interacting = interacting;
  return s;
}

StateSpec StateSpec::perturb(const StateSpec& base, double rho_growth, double energy_shift) {
  StateSpec s;
  s.kind = StateKind::perturbed;
  s.base = std::make_shared<StateSpec>(base);
  s.rho_growth = rho_growth;
  s.energy_shift = energy_shift;
  return s;
}

std::string StateSpec::label() const {
  std::ostringstream os;
  switch (kind) {
    case StateKind::hydrogenic:
      os << "hydrogen:" << n << kOrbitalLetters[std::min(l, 5)];
      if (l > 0) os << m;
      if (Z != 1.0) os << ":Z=" << Z;
      break;
    case StateKind::oscillator1d:
      os << "oscillator:" << n;
      if (omega != 1.0) os << ":omega=" << omega;
      break;
    case StateKind::oscillator3d:
      os << "oscillator3d:" << nx << "," << ny << "," << nz;
      break;
    case StateKind::coherent1d:
      os << "coherent:" << alpha.real() << "," << alpha.imag();
      break;
    case StateKind::superposition: {
      os << "superposition:";
      for (std::size_t i = 0; i < terms.size(); ++i) os << (i ? "+" : "") << terms[i].state->label();
      break;
    }
    case StateKind::determinant: {
      os << "determinant:";
      for (std::size_t i = 0; i < orbitals.size(); ++i)
        os << (i ? "," : "") << orbitals[i].label() << "^" << occupancy[i];
      os << ":Znuc=" << nuclear_charge;
      if (!interacting) os << ":noninteracting";
      break;
    }
    case StateKind::perturbed:
      os << "perturbed(" << base->label() << ",growth=" << rho_growth << ",shift=" << energy_shift << ")";
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------- JSON

namespace {
nlohmann::json complex_json(std::complex<double> z) { return nlohmann::json::array({z.real(), z.imag()}); }
std::complex<double> json_complex(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  throw ConfigError("complex value must be a number or [re, im]");
}
const std::set<std::string>& allowed_keys(StateKind k) {
  static const std::map<StateKind, std::set<std::string>> keys = {
      {StateKind::hydrogenic, {"kind", "n", "l", "m", "Z"}},
      {StateKind::oscillator1d, {"kind", "n", "omega"}},
      {StateKind::oscillator3d, {"kind", "nx", "ny", "nz", "omega"}},
      {StateKind::coherent1d, {"kind", "alpha", "omega"}},
      {StateKind::superposition, {"kind", "terms"}},
      {StateKind::determinant, {"kind", "orbitals", "occupancy", "nuclear_charge", "interacting"}},
      {StateKind::perturbed, {"kind", "base", "rho_growth", "energy_shift"}},
  };
  return keys.at(k);
}
}  // namespace

void to_json(nlohmann::json& j, const StateSpec& s) {
  switch (s.kind) {
    case StateKind::hydrogenic:
      j = {{"kind", "hydrogenic"}, {"n", s.n}, {"l", s.l}, {"m", s.m}, {"Z", s.Z}};
      break;
    case StateKind::oscillator1d:
      j = {{"kind", "oscillator1d"}, {"n", s.n}, {"omega", s.omega}};
      break;
    case StateKind::oscillator3d:
      j = {{"kind", "oscillator3d"}, {"nx", s.nx}, {"ny", s.ny}, {"nz", s.nz}, {"omega", s.omega}};
      break;
    case StateKind::coherent1d:
      j = {{"kind", "coherent1d"}, {"alpha", complex_json(s.alpha)}, {"omega", s.omega}};
      break;
    case StateKind::superposition: {
      j = {{"kind", "superposition"}, {"terms", nlohmann::json::array()}};
      for (const auto& t : s.terms) j["terms"].push_back({{"coeff", complex_json(t.coeff)}, {"state", *t.state}});
      break;
    }
    case StateKind::determinant:
      j = {{"kind", "determinant"},
           {"orbitals", s.orbitals},
           {"occupancy", s.occupancy},
           {"nuclear_charge", s.nuclear_charge},
           {"interacting", s.interacting}};
      break;
    case StateKind::perturbed:
      j = {{"kind", "perturbed"}, {"base", *s.base}, {"rho_growth", s.rho_growth}, {"energy_shift", s.energy_shift}};
      break;
  }
}

void from_json(const nlohmann::json& j, StateSpec& s) {
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("state document needs a \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  static const std::map<std::string, StateKind> kinds = {
      {"hydrogenic", StateKind::hydrogenic},     {"oscillator1d", StateKind::oscillator1d},
      {"oscillator3d", StateKind::oscillator3d}, {"coherent1d", StateKind::coherent1d},
      {"superposition", StateKind::superposition}, {"determinant", StateKind::determinant},
      {"perturbed", StateKind::perturbed}};
  auto it = kinds.find(kind);
  if (it == kinds.end()) throw ConfigError("unknown state kind: " + kind);
  s = StateSpec{};
  s.kind = it->second;
  for (const auto& [key, _] : j.items())
    if (!allowed_keys(s.kind).count(key)) throw ConfigError("unknown key \"" + key + "\" for kind " + kind);
  try {
    switch (s.kind) {
      case StateKind::hydrogenic:
        s.n = j.at("n").get<int>();
        s.l = j.value("l", 0);
        s.m = j.value("m", 0);
        s.Z = j.value("Z", 1.0);
        break;
      case StateKind::oscillator1d:
        s.n = j.value("n", 0);
        s.omega = j.value("omega", 1.0);
        break;
      case StateKind::oscillator3d:
        s.nx = j.value("nx", 0);
        s.ny = j.value("ny", 0);
        s.nz = j.value("nz", 0);
        s.omega = j.value("omega", 1.0);
        break;
      case StateKind::coherent1d:
        s.alpha = json_complex(j.at("alpha"));
        s.omega = j.value("omega", 1.0);
        break;
      case StateKind::superposition:
        for (const auto& t : j.at("terms")) {
          auto child = std::make_shared<StateSpec>();
          from_json(t.at("state"), *child);
          s.terms.push_back({json_complex(t.at("coeff")), child});
        }
        break;
      case StateKind::determinant:
        for (const auto& o : j.at("orbitals")) {
          StateSpec child;
          from_json(o, child);
          s.orbitals.push_back(child);
        }
        if (j.contains("occupancy"))
          s.occupancy = j.at("occupancy").get<std::vector<int>>();
        else
          s.occupancy.assign(s.orbitals.size(), 2);
        s.nuclear_charge = j.value("nuclear_charge", 0.0);
        s.interacting = j.value("interacting", true);
        break;
      case StateKind::perturbed: {
        auto b = std::make_shared<StateSpec>();
        from_json(j.at("base"), *b);
        s.base = b;
        s.rho_growth = j.value("rho_growth", 1.0);
        s.energy_shift = j.value("energy_shift", 0.0);
        break;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad state document: ") + e.what());
  }
}

// ---------------------------------------------------------------- parsing

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double parse_number(const std::string& s) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw ConfigError("bad number: " + s);
    return v;
  } catch (const std::invalid_argument&) {
    throw ConfigError("bad number: " + s);
  } catch (const std::out_of_range&) {
    throw ConfigError("bad number: " + s);
  }
}

// "2p-1" -> hydrogenic(2,1,-1)
StateSpec parse_orbital(const std::string& tok, double Z) {
  std::size_t i = 0;
  while (i < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i]))) ++i;
  if (i == 0 || i >= tok.size()) throw ConfigError("bad orbital: " + tok);
  int n = std::stoi(tok.substr(0, i));
  const char* pos = std::strchr(kOrbitalLetters, tok[i]);
  if (!pos || !*pos) throw ConfigError("bad orbital letter: " + tok);
  int l = int(pos - kOrbitalLetters);
  int m = 0;
  if (i + 1 < tok.size()) m = int(parse_number(tok.substr(i + 1)));
  return StateSpec::hydrogen(n, l, m, Z);
}

std::map<std::string, double> parse_options(const std::vector<std::string>& parts, std::size_t from) {
  std::map<std::string, double> opts;
  for (std::size_t i = from; i < parts.size(); ++i) {
    auto eq = parts[i].find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value in state shorthand: " + parts[i]);
    opts[parts[i].substr(0, eq)] = parse_number(parts[i].substr(eq + 1));
  }
  return opts;
}

double take(std::map<std::string, double>& opts, const std::string& key, double dflt) {
  auto it = opts.find(key);
  if (it == opts.end()) return dflt;
  double v = it->second;
  opts.erase(it);
  return v;
}

void reject_rest(const std::map<std::string, double>& opts) {
  if (!opts.empty()) throw ConfigError("unknown state option: " + opts.begin()->first);
}

}  // namespace

StateSpec parse_state(const std::string& text_in) {
  std::string text = text_in;
  if (text.empty()) throw ConfigError("empty state");
  if (text[0] != '{' && std::filesystem::is_regular_file(text)) {
    std::ifstream in(text);
    std::stringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  StateSpec s;
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("state JSON: ") + e.what());
    }
    from_json(j, s);
    validate(s);
    return s;
  }
  if (text.rfind("corrupted:", 0) == 0) {
    s = StateSpec::perturb(parse_state(text.substr(10)), 1.01);
    validate(s);
    return s;
  }
  auto parts = split(text, ':');
  const std::string head = parts[0];
  if (head == "hydrogen" || head == "hydrogenic") {
    if (parts.size() < 2) throw ConfigError("hydrogen needs an orbital, e.g. hydrogen:1s");
    auto opts = parse_options(parts, 2);
    double Z = take(opts, "Z", 1.0);
    reject_rest(opts);
    s = parse_orbital(parts[1], Z);
  } else if (head == "oscillator") {
    auto opts = parse_options(parts, 2);
    double w = take(opts, "omega", 1.0);
    reject_rest(opts);
    s = StateSpec::oscillator(parts.size() > 1 ? int(parse_number(parts[1])) : 0, w);
  } else if (head == "oscillator3d") {
    if (parts.size() < 2) throw ConfigError("oscillator3d needs nx,ny,nz");
    auto q = split(parts[1], ',');
    if (q.size() != 3) throw ConfigError("oscillator3d needs nx,ny,nz");
    auto opts = parse_options(parts, 2);
    double w = take(opts, "omega", 1.0);
    reject_rest(opts);
    s = StateSpec::oscillator3(int(parse_number(q[0])), int(parse_number(q[1])), int(parse_number(q[2])), w);
  } else if (head == "coherent") {
    std::complex<double> a{1.0, 0.0};
    if (parts.size() > 1) {
      auto q = split(parts[1], ',');
      a = {parse_number(q.at(0)), q.size() > 1 ? parse_number(q[1]) : 0.0};
    }
    auto opts = parse_options(parts, 2);
    double w = take(opts, "omega", 1.0);
    reject_rest(opts);
    s = StateSpec::coherent(a, w);
  } else if (head == "superposition") {
    if (parts.size() < 2) throw ConfigError("superposition needs terms, e.g. superposition:1s+2s");
    auto opts = parse_options(parts, 2);
    double Z = take(opts, "Z", 1.0);
    reject_rest(opts);
    auto toks = split(parts[1], '+');
    std::vector<std::pair<std::complex<double>, StateSpec>> terms;
    for (const auto& tok : toks) terms.push_back({1.0 / std::sqrt(double(toks.size())), parse_orbital(tok, Z)});
    s = StateSpec::superpose(terms);
  } else if (head == "he-like" || head == "helium") {
    auto opts = parse_options(parts, 1);
    double zeta = take(opts, "zeta", 27.0 / 16.0);
    double Zn = take(opts, "Z", 2.0);
    const bool interacting = take(opts, "interacting", 1.0) != 0.0;
    reject_rest(opts);
    s = StateSpec::closed_shell({StateSpec::hydrogen(1, 0, 0, zeta)}, Zn, interacting);
  } else if (head == "determinant") {
    // determinant:1s,2s:Z=4[:zeta=3.7][:interacting=0]; "1s^1" is a single electron
    if (parts.size() < 2) throw ConfigError("determinant needs orbitals, e.g. determinant:1s,2s:Z=4");
    auto opts = parse_options(parts, 2);
    const double Zn = take(opts, "Z", 1.0);
    const double zeta = take(opts, "zeta", Zn);
    const bool interacting = take(opts, "interacting", 1.0) != 0.0;
    reject_rest(opts);
    std::vector<StateSpec> orbs;
    std::vector<int> occ;
    for (const auto& tok : split(parts[1], ',')) {
      const auto hat = tok.find('^');
      orbs.push_back(parse_orbital(tok.substr(0, hat), zeta));
      occ.push_back(hat == std::string::npos ? 2 : int(parse_number(tok.substr(hat + 1))));
    }
    s = StateSpec::closed_shell(orbs, Zn, interacting);
    s.occupancy = occ;
  } else {
    throw ConfigError("unrecognized state: " + text);
  }
  validate(s);
  return s;
}

void validate(const StateSpec& s) {
  switch (s.kind) {
    case StateKind::hydrogenic:
      if (s.n < 1 || s.l < 0 || s.l >= s.n || std::abs(s.m) > s.l || !(s.Z > 0))
        throw ConfigError("hydrogenic needs 0 <= l < n, |m| <= l, Z > 0: " + s.label());
      break;
    case StateKind::oscillator1d:
      if (s.n < 0 || !(s.omega > 0)) throw ConfigError("oscillator needs n >= 0, omega > 0");
      break;
    case StateKind::oscillator3d:
      if (s.nx < 0 || s.ny < 0 || s.nz < 0 || !(s.omega > 0)) throw ConfigError("oscillator3d needs n >= 0, omega > 0");
      break;
    case StateKind::coherent1d:
      if (!(s.omega > 0)) throw ConfigError("coherent state needs omega > 0");
      break;
    case StateKind::superposition: {
      if (s.terms.empty()) throw ConfigError("superposition without terms");
      double norm = 0.0;
      std::set<std::tuple<int, int, int, int>> seen;
      for (const auto& t : s.terms) {
        validate(*t.state);
        norm += std::norm(t.coeff);
        const auto& c = *t.state;
        const auto& c0 = *s.terms[0].state;
        if (!eigen_energy(c)) throw ConfigError("superposition terms must be eigenstates");
        bool same_h = c.kind == c0.kind &&
                      (c.kind == StateKind::hydrogenic ? c.Z == c0.Z : c.omega == c0.omega);
        if (!same_h) throw ConfigError("superposition terms must share one Hamiltonian");
        auto key = c.kind == StateKind::hydrogenic ? std::make_tuple(c.n, c.l, c.m, 0)
                                                   : std::make_tuple(c.n, c.nx, c.ny, c.nz);
        if (!seen.insert(key).second) throw ConfigError("superposition terms must be distinct eigenstates");
      }
      if (std::abs(norm - 1.0) > 1e-10) throw ConfigError("superposition coefficients must satisfy sum |C|^2 = 1");
      break;
    }
    case StateKind::determinant: {
      if (s.orbitals.empty()) throw ConfigError("determinant without orbitals");
      if (s.occupancy.size() != s.orbitals.size()) throw ConfigError("occupancy list must match orbitals");
      for (int o : s.occupancy)
        if (o != 2 && !(o == 1 && s.orbitals.size() == 1))
          throw ConfigError("only closed-shell determinants (occupancy 2) or a single electron are supported");
      for (const auto& o : s.orbitals) {
        if (o.kind != StateKind::hydrogenic && o.kind != StateKind::oscillator3d)
          throw ConfigError("determinant orbitals must be 3D hydrogenic or oscillator states");
        validate(o);
      }
      break;
    }
    case StateKind::perturbed:
      if (!s.base) throw ConfigError("perturbed state without base");
      if (!(s.rho_growth > 0)) throw ConfigError("rho_growth must be positive");
      validate(*s.base);
      break;
  }
}

std::optional<double> eigen_energy(const StateSpec& s) {
  switch (s.kind) {
    case StateKind::hydrogenic:
      return -s.Z * s.Z / (2.0 * s.n * s.n);
    case StateKind::oscillator1d:
      return (s.n + 0.5) * s.omega;
    case StateKind::oscillator3d:
      return (s.nx + s.ny + s.nz + 1.5) * s.omega;
    default:
      return std::nullopt;
  }
}

// ---------------------------------------------------------------- evaluation

QuantumState::QuantumState(StateSpec spec) : spec_(std::move(spec)) {
  validate(spec_);
  switch (spec_.kind) {
    case StateKind::hydrogenic: {
      const int n = spec_.n, l = spec_.l, am = std::abs(spec_.m);
      const double Z = spec_.Z;
      const double k = 2.0 * Z / n;
      const double radial_norm = std::sqrt(k * k * k * factorial(n - l - 1) / (2.0 * n * factorial(n + l)));
      const double ylm_norm = std::sqrt((2 * l + 1) / (4 * kPi) * factorial(l - am) / factorial(l + am));
      const double cs = (spec_.m > 0 && (am % 2)) ? -1.0 : 1.0;  // Condon-Shortley phase for m > 0
      prefactor_ = radial_norm * std::pow(k, l) * ylm_norm * cs;
      // Laguerre in r: L(k r)
      auto lc = laguerre_coeffs(n - l - 1, 2 * l + 1);
      laguerre_.resize(lc.size());
      for (std::size_t i = 0; i < lc.size(); ++i) laguerre_[i] = lc[i] * std::pow(k, double(i));
      // r^(l-|m|) P_l^(|m|)(z/r) = sum_k c_k z^(l-2k-|m|) (r^2)^k
      for (int kk = 0; 2 * kk <= l; ++kk) {
        const int a = l - 2 * kk - am;
        if (a < 0) continue;
        double c = ((kk % 2) ? -1.0 : 1.0) * binomial(l, kk) * binomial(2 * l - 2 * kk, l) / std::pow(2.0, l);
        c *= factorial(l - 2 * kk) / factorial(a);
        harmonic_.push_back({a, c});
      }
      break;
    }
    case StateKind::oscillator1d: {
      hermite_[0] = hermite_coeffs(spec_.n);
      const double w = spec_.omega;
      prefactor_ = std::pow(w / kPi, 0.25) / std::sqrt(std::pow(2.0, spec_.n) * factorial(spec_.n));
      for (std::size_t i = 0; i < hermite_[0].size(); ++i) hermite_[0][i] *= std::pow(std::sqrt(w), double(i));
      break;
    }
    case StateKind::oscillator3d: {
      const int q[3] = {spec_.nx, spec_.ny, spec_.nz};
      const double w = spec_.omega;
      prefactor_ = std::pow(w / kPi, 0.75);
      for (int d = 0; d < 3; ++d) {
        hermite_[d] = hermite_coeffs(q[d]);
        for (std::size_t i = 0; i < hermite_[d].size(); ++i) hermite_[d][i] *= std::pow(std::sqrt(w), double(i));
        prefactor_ /= std::sqrt(std::pow(2.0, q[d]) * factorial(q[d]));
      }
      break;
    }
    case StateKind::coherent1d:
      prefactor_ = std::pow(spec_.omega / kPi, 0.25);
      break;
    case StateKind::superposition:
      for (const auto& t : spec_.terms) {
        children_.emplace_back(*t.state);
        coeffs_.push_back(t.coeff);
      }
      break;
    case StateKind::determinant:
      for (const auto& o : spec_.orbitals) children_.emplace_back(o);
      break;
    case StateKind::perturbed:
      children_.emplace_back(*spec_.base);
      break;
  }
}

template <int D>
CJet<D> QuantumState::psi(const Vec3& x, double t) const {
  const Jet<D> X = Jet<D>::variable(x[0], kX);
  const Jet<D> Y = Jet<D>::variable(x[1], kY);
  const Jet<D> Zc = Jet<D>::variable(x[2], kZ);
  switch (spec_.kind) {
    case StateKind::hydrogenic: {
      const Jet<D> r2 = X * X + Y * Y + Zc * Zc;
      if (r2.value() == 0.0 && D > 0) throw DomainError("derivative jet requested at the Coulomb center");
      const Jet<D> r = sqrt(r2);
      const Jet<D> radial = exp(r * (-spec_.Z / spec_.n)) * horner(laguerre_, r);
      // polynomial part sum_k c z^a (r^2)^b
      Jet<D> poly(0.0);
      const int am = std::abs(spec_.m);
      for (const auto& [a, c] : harmonic_) {
        const int b = (spec_.l - am - a) / 2;
        poly += ipow(Zc, a) * ipow(r2, b) * c;
      }
      // (x +/- i y)^|m|
      CJet<D> az(Jet<D>(1.0));
      const CJet<D> base(X, spec_.m >= 0 ? Y : -Y);
      for (int k = 0; k < am; ++k) az = az * base;
      CJet<D> out = az * (radial * poly * prefactor_);
      return out * time_phase<D>(*qflow::eigen_energy(spec_), t);
    }
    case StateKind::oscillator1d: {
      const double w = spec_.omega;
      const Jet<D> g = exp(X * X * (-0.5 * w)) * horner(hermite_[0], X) * prefactor_;
      return CJet<D>(g) * time_phase<D>(*qflow::eigen_energy(spec_), t);
    }
    case StateKind::oscillator3d: {
      const double w = spec_.omega;
      const Jet<D> r2 = X * X + Y * Y + Zc * Zc;
      const Jet<D> g =
          exp(r2 * (-0.5 * w)) * horner(hermite_[0], X) * horner(hermite_[1], Y) * horner(hermite_[2], Zc) * prefactor_;
      return CJet<D>(g) * time_phase<D>(*qflow::eigen_energy(spec_), t);
    }
    case StateKind::coherent1d: {
      const double w = spec_.omega;
      const Jet<D> T = Jet<D>::variable(t, kT);
      // alpha(t) = alpha exp(-i w t)
      const CJet<D> at = exp(CJet<D>(Jet<D>(0.0), T * (-w))) * spec_.alpha;
      const CJet<D> xs(X);
      CJet<D> expo = CJet<D>(X * X * (-0.5 * w)) + at * xs * std::sqrt(2.0 * w) - at * at * 0.5;
      expo.re.c[0] -= 0.5 * std::norm(spec_.alpha);
      expo.im -= T * (0.5 * w);
      return exp(expo) * prefactor_;
    }
    case StateKind::superposition: {
      CJet<D> out;
      for (std::size_t i = 0; i < children_.size(); ++i) out += children_[i].psi<D>(x, t) * coeffs_[i];
      return out;
    }
    case StateKind::perturbed: {
      const Jet<D> T = Jet<D>::variable(t, kT);
      const CJet<D> f = exp(CJet<D>(T * (0.5 * std::log(spec_.rho_growth)), T * (-spec_.energy_shift)));
      return children_[0].psi<D>(x, t) * f;
    }
    case StateKind::determinant:
      throw UnsupportedGeometry("determinant states are evaluated per body through the manybody module");
  }
  return {};
}

template <int D>
Jet<D> QuantumState::potential(const Vec3& x) const {
  const Jet<D> X = Jet<D>::variable(x[0], kX);
  const Jet<D> Y = Jet<D>::variable(x[1], kY);
  const Jet<D> Zc = Jet<D>::variable(x[2], kZ);
  switch (spec_.kind) {
    case StateKind::hydrogenic:
    case StateKind::determinant: {
      const double Z = spec_.kind == StateKind::hydrogenic ? spec_.Z : spec_.nuclear_charge;
      const Jet<D> r2 = X * X + Y * Y + Zc * Zc;
      if (r2.value() == 0.0) throw DomainError("potential evaluated at the Coulomb center");
      return pow(r2, -0.5) * (-Z);
    }
    case StateKind::oscillator1d:
    case StateKind::coherent1d:
      return X * X * (0.5 * spec_.omega * spec_.omega);
    case StateKind::oscillator3d:
      return (X * X + Y * Y + Zc * Zc) * (0.5 * spec_.omega * spec_.omega);
    case StateKind::superposition:
    case StateKind::perturbed:
      return children_[0].potential<D>(x);
  }
  return {};
}

std::optional<double> QuantumState::eigen_energy() const { return qflow::eigen_energy(spec_); }

double QuantumState::length_scale() const {
  switch (spec_.kind) {
    case StateKind::hydrogenic:
      return spec_.n * spec_.n / spec_.Z;
    case StateKind::oscillator1d:
      return std::sqrt((2.0 * spec_.n + 1.0) / spec_.omega);
    case StateKind::oscillator3d:
      return std::sqrt((2.0 * (spec_.nx + spec_.ny + spec_.nz) + 3.0) / spec_.omega);
    case StateKind::coherent1d:
      return (1.0 + std::sqrt(2.0) * std::abs(spec_.alpha)) / std::sqrt(spec_.omega);
    case StateKind::superposition:
    case StateKind::determinant:
    case StateKind::perturbed: {
      double L = 0.0;
      for (const auto& c : children_) L = std::max(L, c.length_scale());
      return L;
    }
  }
  return 1.0;
}

bool QuantumState::gaussian_tail() const {
  switch (spec_.kind) {
    case StateKind::oscillator1d:
    case StateKind::oscillator3d:
    case StateKind::coherent1d:
      return true;
    case StateKind::superposition:
    case StateKind::determinant:
    case StateKind::perturbed:
      return !children_.empty() && children_[0].gaussian_tail();
    default:
      return false;
  }
}

GridExtent QuantumState::grid_extent() const {
  GridExtent e;
  e.dimension = dimension();
  const double L = length_scale();
  if (gaussian_tail()) {
    const QuantumState* leaf = this;
    while (!leaf->children_.empty()) leaf = &leaf->children_[0];
    const double width = 1.0 / std::sqrt(leaf->spec_.omega);
    e.reference = L + 8.0 * width;
    e.coarse = L + 5.0 * width;
  } else {
    e.reference = std::max(30.0, 10.0 * L);
    e.coarse = std::max(12.0, 6.0 * L);
  }
  return e;
}

int QuantumState::dimension() const {
  switch (spec_.kind) {
    case StateKind::oscillator1d:
    case StateKind::coherent1d:
      return 1;
    case StateKind::superposition:
    case StateKind::perturbed:
      return children_[0].dimension();
    default:
      return 3;
  }
}

bool QuantumState::spherically_symmetric() const {
  switch (spec_.kind) {
    case StateKind::hydrogenic:
      return spec_.l == 0;
    case StateKind::oscillator3d:
      return spec_.nx == 0 && spec_.ny == 0 && spec_.nz == 0;
    case StateKind::oscillator1d:
    case StateKind::coherent1d:
      return false;
    default:
      return std::all_of(children_.begin(), children_.end(), [](const auto& c) { return c.spherically_symmetric(); });
  }
}

template CJet<0> QuantumState::psi<0>(const Vec3&, double) const;
template CJet<1> QuantumState::psi<1>(const Vec3&, double) const;
template CJet<2> QuantumState::psi<2>(const Vec3&, double) const;
template CJet<3> QuantumState::psi<3>(const Vec3&, double) const;
template CJet<4> QuantumState::psi<4>(const Vec3&, double) const;
template Jet<0> QuantumState::potential<0>(const Vec3&) const;
template Jet<1> QuantumState::potential<1>(const Vec3&) const;
template Jet<2> QuantumState::potential<2>(const Vec3&) const;
template Jet<3> QuantumState::potential<3>(const Vec3&) const;
template Jet<4> QuantumState::potential<4>(const Vec3&) const;

}  // namespace qflow
