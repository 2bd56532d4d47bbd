#include "qflow/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <locale>
#include <sstream>

#include "CLI11.hpp"
#include "qflow/crossflow.hpp"
#include "qflow/manybody.hpp"
#include "qflow/trajectories.hpp"

namespace qflow {

namespace {

using nlohmann::json;

struct Common {
  std::string state;
  std::string grid;
  std::vector<double> t;
  std::vector<std::string> tol;
  std::string out;
  int threads = 1;

  std::vector<double> times() const { return t.empty() ? std::vector<double>{0.0} : t; }
  Tolerances tolerances() const {
    Tolerances r = default_tolerances();
    for (const auto& o : tol) r.override_from(o);
    return r;
  }
};

void add_common(CLI::App* app, Common& c, bool needs_state = true) {
  auto* st = app->add_option("--state", c.state, "state shorthand, JSON document or JSON file");
  if (needs_state) st->required();
  app->add_option("--grid", c.grid, "reference | coarse | spherical:... | box:... | line:...");
  app->add_option("--t", c.t, "time samples (repeatable)");
  app->add_option("--tol", c.tol, "tolerance overrides name=value[,name=value]");
  app->add_option("--out", c.out, "JSON report path (default stdout)");
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
}

Vec3 parse_vec3(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  ss.imbue(std::locale::classic());
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    is.imbue(std::locale::classic());
    double d = 0.0;
    if (!(is >> d) || !is.eof()) throw ConfigError("bad vector component: " + item);
    v.push_back(d);
  }
  if (v.size() != 3) throw ConfigError("expected x,y,z: " + text);
  return Vec3(v[0], v[1], v[2]);
}

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

// Collects reports and records, then writes the document and the verdict.
struct Report {
  json doc = json::object();
  std::vector<ResidualReport> checks;

  void add(std::vector<ResidualReport> r) { checks.insert(checks.end(), r.begin(), r.end()); }

  int finish(const std::string& path, std::ostream& out, std::ostream& err) {
    std::size_t passed = 0, failed = 0, diagnostics = 0;
    std::vector<const ResidualReport*> failing;
    for (const auto& c : checks) {
      if (!c.asserted) {
        ++diagnostics;
        continue;
      }
      if (c.pass) {
        ++passed;
      } else {
        ++failed;
        failing.push_back(&c);
      }
    }
    doc["schema"] = 1;
    doc["reports"] = checks;
    doc["summary"] = {{"passed", passed}, {"failed", failed}, {"diagnostics", diagnostics}};
    const std::string text = doc.dump(2) + "\n";
    if (path.empty()) {
      out << text;
    } else {
      std::ofstream f(path, std::ios::binary);
      if (!f) throw ConfigError("cannot write " + path);
      f << text;
    }
    if (failing.empty()) return 0;
    json first;
    to_json(first, *failing.front());
    err << "first failing check:\n" << first.dump(2) << "\nfailing checks:";
    for (const auto* c : failing) err << ' ' << c->name;
    err << '\n';
    return 1;
  }
};

Grid pointwise_grid(const QuantumState& s, const std::string& spec) {
  return spec.empty() ? coarse_grid(s.grid_extent()) : parse_grid(spec, s.grid_extent());
}

Grid integral_grid(const QuantumState& s, const std::string& spec) {
  return spec.empty() ? reference_grid(s.grid_extent()) : parse_grid(spec, s.grid_extent());
}

std::vector<std::string> expand_suites(const std::vector<std::string>& in) {
  const auto& known = suite_names();
  std::vector<std::string> out;
  for (const auto& name : in) {
    if (std::find(known.begin(), known.end(), name) == known.end()) throw ConfigError("unknown suite: " + name);
    if (name == "all") {
      for (const auto& k : known)
        if (k != "all" && std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
    } else if (std::find(out.begin(), out.end(), name) == out.end()) {
      out.push_back(name);
    }
  }
  return out;
}

void write_field_csv(const FieldBundle& b, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  b.write_csv(f);
}

std::string indexed_path(const std::string& path, std::size_t k, std::size_t count) {
  if (count <= 1) return path;
  const std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + "_t" + std::to_string(k) + p.extension().string())).string();
}

// Entries that differ from the defaults.
std::map<std::string, double> overrides(Tolerances t) {
  Tolerances base = default_tolerances();
  std::map<std::string, double> out;
  auto mine = t.table();
  for (const auto& [name, p] : base.table())
    if (*mine.at(name) != *p) out[name] = *mine.at(name);
  return out;
}

StateSpec state_from_json(const json& j) {
  if (j.is_string()) return parse_state(j.get<std::string>());
  if (j.is_object()) return parse_state(j.dump());
  throw ConfigError("state must be a string or an object");
}

}  // namespace

DerivativePolicy parse_derivative_policy(const std::string& text) {
  if (text == "analytic") return {};
  if (text == "fd-space") return DerivativePolicy::fd_space();
  if (text == "fd-time") return DerivativePolicy::fd_time();
  if (text == "fd-all") return DerivativePolicy::fd_all();
  throw ConfigError("unknown derivative policy: " + text);
}

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  static const std::vector<std::string> keys = {"state", "grid", "t_samples", "suites", "tolerances",
                                                "output", "deriv", "threads"};
  for (const auto& [k, v] : j.items())
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw ConfigError("unknown config key: " + k);
  if (!j.contains("state")) throw ConfigError("run config needs a state");
  RunConfig c;
  try {
    c.state = state_from_json(j.at("state"));
    if (j.contains("grid")) c.grid = j.at("grid").get<std::string>();
    if (j.contains("t_samples")) c.t_samples = j.at("t_samples").get<std::vector<double>>();
    if (j.contains("suites")) c.suites = j.at("suites").get<std::vector<std::string>>();
    if (j.contains("tolerances")) c.tolerances = j.at("tolerances").get<std::map<std::string, double>>();
    if (j.contains("deriv")) c.deriv = j.at("deriv").get<std::string>();
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    if (j.contains("output")) {
      const json& o = j.at("output");
      if (!o.is_object()) throw ConfigError("output must be an object");
      for (const auto& [k, v] : o.items()) {
        if (k == "json_path") c.json_path = v.get<std::string>();
        else if (k == "csv_dir") c.csv_dir = v.get<std::string>();
        else throw ConfigError("unknown output key: " + k);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad run config: ") + e.what());
  }
  if (c.t_samples.empty()) throw ConfigError("t_samples is empty");
  if (c.threads < 1) throw ConfigError("threads must be positive");
  expand_suites(c.suites);
  parse_derivative_policy(c.deriv);
  Tolerances probe;
  auto tab = probe.table();
  for (const auto& [name, v] : c.tolerances)
    if (!tab.count(name)) throw ConfigError("unknown tolerance: " + name);
  return c;
}

json RunConfig::to_json() const {
  return {{"state", state},   {"grid", grid},       {"t_samples", t_samples}, {"suites", suites},
          {"tolerances", tolerances}, {"deriv", deriv}, {"threads", threads},
          {"output", {{"json_path", json_path}, {"csv_dir", csv_dir}}}};
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const QuantumState s(cfg.state);
  VerifyOptions opt;
  opt.deriv = parse_derivative_policy(cfg.deriv);
  opt.threads = cfg.threads;
  auto tab = opt.tol.table();
  for (const auto& [name, v] : cfg.tolerances) {
    auto it = tab.find(name);
    if (it == tab.end()) throw ConfigError("unknown tolerance: " + name);
    *it->second = v;
  }
  const std::vector<std::string> suites = expand_suites(cfg.suites);
  Report rep;
  rep.doc["command"] = "verify";
  rep.doc["state"] = cfg.state;
  rep.doc["state_label"] = cfg.state.label();
  rep.doc["derivatives"] = cfg.deriv;
  rep.doc["t"] = cfg.t_samples;
  rep.doc["suites"] = suites;
  json records = json::array();
  for (double t : cfg.t_samples) {
    json rec = {{"t", t}};
    for (const auto& suite : suites) {
      const bool integral = suite == "conservation";
      const Grid g = integral ? integral_grid(s, cfg.grid) : pointwise_grid(s, cfg.grid);
      rec["grids"][suite] = g.description;
      auto reports = run_suite(suite, s, g, t, opt, &rec);
      for (auto& r : reports) r.extra["t"] = t;
      rep.add(std::move(reports));
    }
    records.push_back(rec);
  }
  rep.doc["records"] = records;
  if (!cfg.csv_dir.empty()) {
    std::filesystem::create_directories(cfg.csv_dir);
    for (std::size_t k = 0; k < cfg.t_samples.size(); ++k) {
      const FieldBundle b = field_bundle(s, pointwise_grid(s, cfg.grid), cfg.t_samples[k], cfg.threads, opt.guard);
      write_field_csv(b, (std::filesystem::path(cfg.csv_dir) / ("fields_t" + std::to_string(k) + ".csv")).string());
    }
  }
  return rep.finish(cfg.json_path, out, err);
}

namespace {

int cmd_fields(const Common& c, const std::string& csv, std::ostream& out, std::ostream& err) {
  const QuantumState s(parse_state(c.state));
  const Grid g = pointwise_grid(s, c.grid);
  const Tolerances tol = c.tolerances();
  const NodeGuard guard{tol.node_abs, tol.node_rel};
  Report rep;
  rep.doc["command"] = "fields";
  rep.doc["state"] = s.spec();
  json bundles = json::array();
  const auto times = c.times();
  for (std::size_t k = 0; k < times.size(); ++k) {
    const FieldBundle b = field_bundle(s, g, times[k], c.threads, guard, tol.max_skip_fraction);
    bundles.push_back(b.summary());
    if (!csv.empty()) write_field_csv(b, indexed_path(csv, k, times.size()));
  }
  rep.doc["fields"] = bundles;
  return rep.finish(c.out, out, err);
}

struct TraceArgs {
  std::string mode = "w";
  std::string x0;
  std::string tspan = "10";
  double dt = 0.01;
  std::string policy = "aux:z";
  double escape = -1.0;
  bool stop_closed = false;
  std::string csv;
};

int cmd_trace(const Common& c, const TraceArgs& a, std::ostream& out, std::ostream& err) {
  const QuantumState s(parse_state(c.state));
  const Tolerances tol = c.tolerances();
  std::vector<double> span;
  {
    std::stringstream ss(a.tspan);
    std::string item;
    while (std::getline(ss, item, ',')) span.push_back(std::stod(item));
  }
  if (span.size() == 1) span.insert(span.begin(), c.times().front());
  if (span.size() != 2) throw ConfigError("--tspan takes t1 or t0,t1");
  TraceOptions opt;
  opt.policy = CrossPolicy::parse(a.policy);
  opt.guard = {tol.node_abs, tol.node_rel};
  opt.escape_radius = a.escape;
  opt.stop_when_closed = a.stop_closed;
  const TrajectoryMode mode = parse_mode(a.mode);
  const Trajectory tr = integrate(s, parse_vec3(a.x0), mode, {span[0], span[1]}, a.dt, opt);
  Report rep;
  rep.doc["command"] = "trace";
  rep.doc["state"] = s.spec();
  rep.doc["x0"] = vec_json(parse_vec3(a.x0));
  rep.doc["dt"] = a.dt;
  rep.doc["trajectory"] = tr.summary();
  if (mode == TrajectoryMode::cross_omega) rep.doc["density_variation"] = density_variation(s, tr);
  if (tr.samples.size() >= 10) {
    ResidualReport h = hamiltonian_constancy(tr, tol.hamiltonian);
    // time-dependent fields do not conserve the path energy
    h.asserted = s.eigen_energy().has_value();
    rep.checks.push_back(h);
  }
  if (tr.closed) {
    ResidualReport r;
    r.name = "trajectory.closed_orbit";
    r.anchor = "first return to the initial plane lands on x0";
    r.l_inf = r.l2 = r.rel = tr.closed->return_error;
    r.tolerance = tol.closed_orbit;
    r.nodes = tr.samples.size();
    r.extra = {{"period", tr.closed->period}};
    r.decide();
    rep.checks.push_back(r);
  }
  if (!a.csv.empty()) {
    std::ofstream f(a.csv, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + a.csv);
    tr.write_csv(f);
  }
  return rep.finish(c.out, out, err);
}

int cmd_crossflow(const Common& c, const std::string& policy_text, const std::vector<double>& radii, std::ostream& out,
                  std::ostream& err) {
  const QuantumState s(parse_state(c.state));
  const Tolerances tol = c.tolerances();
  const CrossPolicy policy = CrossPolicy::parse(policy_text);
  const double t = c.times().front();
  const Grid g = c.grid.empty() ? crossflow_grid(s) : parse_grid(c.grid, s.grid_extent());
  Report rep;
  rep.doc["command"] = "crossflow";
  rep.doc["state"] = s.spec();
  rep.doc["policy"] = policy.describe();
  rep.doc["t"] = t;
  rep.doc["grid"] = grid_summary(g);
  const CrossDiagnostics d = cross_diagnostics(s, g, t, policy, c.threads);
  rep.doc["diagnostics"] = d.to_json();
  rep.add(cross_reports(d, policy, tol));
  if (s.spherically_symmetric()) {
    const double L = s.length_scale();
    json forces = json::array();
    for (double r : radii.empty() ? std::vector<double>{L, 1.5 * L} : radii) {
      const Vec3 x(r, 0, 0);
      const RadialForces f = radial_forces(s, x, t);
      json row = {{"r", r}, {"coulomb", f.coulomb}, {"pressure", f.pressure}, {"centrifugal", f.centrifugal}};
      if (policy.kind != CrossPolicy::Kind::gradS_cross) row["nowork_force"] = vec_json(required_nowork_force(s, x, policy, t));
      forces.push_back(row);
    }
    rep.doc["radial_forces"] = forces;
    if (s.eigen_energy()) {
      rep.doc["modified_bohr_radius"] = modified_bohr_radius(s);
      rep.doc["pressure_force_crossover"] = pressure_force_crossover(s);
    }
  }
  return rep.finish(c.out, out, err);
}

struct ManybodyArgs {
  std::vector<std::string> reports{"all"};
  std::string density = "n";
  std::size_t probes = 48;
  unsigned seed = 7;
  std::string csv;
};

int cmd_manybody(const Common& c, const ManybodyArgs& a, std::ostream& out, std::ostream& err) {
  static const std::vector<std::string> known = {"fields", "coulomb", "orbital", "energy", "euler"};
  std::vector<std::string> wanted;
  for (const auto& r : a.reports) {
    if (r == "all") wanted = known;
    else if (std::find(known.begin(), known.end(), r) == known.end()) throw ConfigError("unknown many-body report: " + r);
    else if (std::find(wanted.begin(), wanted.end(), r) == wanted.end()) wanted.push_back(r);
  }
  auto want = [&](const char* name) { return std::find(wanted.begin(), wanted.end(), name) != wanted.end(); };
  const ReducedState s(parse_state(c.state), parse_density_mode(a.density));
  VerifyOptions opt;
  opt.tol = c.tolerances();
  opt.threads = c.threads;
  const Grid probes = c.grid.empty() ? manybody_probes(s, a.probes, a.seed) : parse_grid(c.grid, {s.radius(), s.radius(), 3});
  Report rep;
  rep.doc["command"] = "manybody";
  rep.doc["state"] = s.spec();
  rep.doc["density_mode"] = to_string(s.mode());
  rep.doc["bodies"] = s.bodies();
  rep.doc["interacting"] = s.interacting();
  if (want("fields")) {
    json rows = json::array();
    for (const Vec3& x : probes.nodes) {
      const ReducedPoint p = reduced_fields(s, x);
      rows.push_back({{"x", vec_json(x)}, {"rho_hat", p.rho_hat}, {"u_hat", vec_json(p.u_hat)},
                      {"v_hat", vec_json(p.v_hat)}, {"P_hat", p.P_hat}});
    }
    rep.doc["reduced_fields"] = rows;
  }
  if (want("coulomb")) {
    const CoulombRecord rec = coulomb_diagnostics(s, opt.tol);
    rep.doc["coulomb"] = rec.to_json();
    if (s.interacting()) {
      ResidualReport tail;
      tail.name = "coulomb.gauss_tail";
      tail.anchor = "r^2 |E| approaches f (n - 1) far from the charge";
      tail.l_inf = tail.l2 = std::abs(rec.tail_r2_field - rec.tail_expected);
      tail.rel = tail.l_inf / std::max(1.0, std::abs(rec.tail_expected));
      tail.tolerance = opt.tol.gauss_tail;
      // off the radial path the quadrupole tail is physical, not an error
      tail.asserted = s.radial();
      tail.extra = {{"r", rec.tail_radius}, {"r2_field", rec.tail_r2_field}, {"expected", rec.tail_expected}};
      tail.decide();
      rep.checks.push_back(tail);
      ResidualReport circ;
      circ.name = "coulomb.circulation";
      circ.anchor = "closed loop integrals of E vanish";
      circ.l_inf = circ.l2 = circ.rel = std::max(rec.max_circulation, rec.triangle_circulation);
      circ.tolerance = opt.tol.circulation;
      circ.decide();
      rep.checks.push_back(circ);
    }
  }
  if (want("orbital")) rep.add(orbital_residual(s, probes, opt));
  if (want("energy")) {
    const json e = energy_functional(s, c.threads);
    rep.doc["energy"] = e;
    ResidualReport k;
    k.name = "energy.kinetic_split";
    k.anchor = "kinetic energy equals the flow form int rho_hat (u^2 + v^2)/2";
    k.l_inf = k.l2 = std::abs(e.at("kinetic").get<double>() - e.at("kinetic_flow").get<double>());
    k.rel = k.l_inf / std::max(1e-300, std::abs(e.at("kinetic").get<double>()));
    k.tolerance = opt.tol.integral;
    k.decide();
    rep.checks.push_back(k);
  }
  if (want("euler")) rep.add(reduced_euler_residual(s, probes, opt));
  if (!a.csv.empty()) {
    if (!s.radial() || !s.interacting()) throw UnsupportedGeometry("the V_e table exists for interacting radial states only");
    std::ofstream f(a.csv, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + a.csv);
    s.write_potential_csv(f);
  }
  return rep.finish(c.out, out, err);
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum flow fields: evaluation, verification and trajectories", "qflow"};
  app.require_subcommand(1);

  Common c_fields, c_verify, c_trace, c_cross, c_many, c_report;

  auto* fields = app.add_subcommand("fields", "evaluate every flow field on a grid");
  add_common(fields, c_fields);
  std::string fields_csv;
  fields->add_option("--csv", fields_csv, "CSV dump of the fields");

  auto* verify = app.add_subcommand("verify", "run verification suites");
  add_common(verify, c_verify);
  std::vector<std::string> suites{"all"};
  std::string deriv = "analytic";
  std::string csv_dir;
  verify->add_option("--suite", suites, "suite name (repeatable)");
  verify->add_option("--deriv", deriv, "analytic | fd-space | fd-time | fd-all");
  verify->add_option("--csv-dir", csv_dir, "directory for field CSV dumps");

  auto* trace = app.add_subcommand("trace", "integrate a point-mass path");
  add_common(trace, c_trace);
  TraceArgs ta;
  trace->add_option("--mode", ta.mode, "v | w | cross");
  trace->add_option("--x0", ta.x0, "start point x,y,z")->required();
  trace->add_option("--tspan", ta.tspan, "t1 or t0,t1");
  trace->add_option("--dt", ta.dt, "RK4 step");
  trace->add_option("--policy", ta.policy, "cross policy (cross mode)");
  trace->add_option("--escape", ta.escape, "escape radius");
  trace->add_flag("--stop-closed", ta.stop_closed, "stop at the first closure");
  trace->add_option("--csv", ta.csv, "CSV dump of the samples");

  auto* cross = app.add_subcommand("crossflow", "cross flow diagnostics and radial forces");
  add_common(cross, c_cross);
  std::string policy = "aux:z";
  std::vector<double> radii;
  cross->add_option("--policy", policy, "gradS[:raw] | aux:x|y|z[:raw] | holland[:-]");
  cross->add_option("--radius", radii, "radii for the force table (repeatable)");

  auto* many = app.add_subcommand("manybody", "reduced many-body flows and the quantum Coulomb field");
  add_common(many, c_many);
  ManybodyArgs ma;
  many->add_option("--report", ma.reports, "fields | coulomb | orbital | energy | euler | all (repeatable)");
  many->add_option("--density-mode", ma.density, "n | unity");
  many->add_option("--probes", ma.probes, "random probe count");
  many->add_option("--seed", ma.seed, "probe seed");
  many->add_option("--csv", ma.csv, "CSV of the radial V_e table");

  auto* report = app.add_subcommand("report", "run a JSON run configuration");
  add_common(report, c_report, false);
  std::string config_path;
  report->add_option("config", config_path, "run configuration file")->required();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*fields) return cmd_fields(c_fields, fields_csv, out, err);
    if (*verify) {
      RunConfig cfg;
      cfg.state = parse_state(c_verify.state);
      cfg.grid = c_verify.grid;
      cfg.t_samples = c_verify.times();
      cfg.suites = suites;
      cfg.deriv = deriv;
      cfg.threads = c_verify.threads;
      cfg.json_path = c_verify.out;
      cfg.csv_dir = csv_dir;
      cfg.tolerances = overrides(c_verify.tolerances());
      return run(cfg, out, err);
    }
    if (*trace) return cmd_trace(c_trace, ta, out, err);
    if (*cross) return cmd_crossflow(c_cross, policy, radii, out, err);
    if (*many) return cmd_manybody(c_many, ma, out, err);
    if (*report) {
      std::ifstream f(config_path);
      if (!f) throw ConfigError("cannot read " + config_path);
      json j;
      try {
        j = json::parse(f);
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("bad JSON: ") + e.what());
      }
      RunConfig cfg = RunConfig::from_json(j);
      if (!c_report.state.empty()) cfg.state = parse_state(c_report.state);
      if (!c_report.grid.empty()) cfg.grid = c_report.grid;
      if (!c_report.t.empty()) cfg.t_samples = c_report.t;
      if (!c_report.out.empty()) cfg.json_path = c_report.out;
      if (report->count("--threads")) cfg.threads = c_report.threads;
      for (const auto& [name, v] : overrides(c_report.tolerances())) cfg.tolerances[name] = v;
      return run(cfg, out, err);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const UnsupportedGeometry& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const QflowError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace qflow
