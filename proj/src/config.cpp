#include "qflow/config.hpp"

#include <cstdlib>
#include <sstream>

#include "qflow/core.hpp"

namespace qflow {

std::map<std::string, double*> Tolerances::table() {
  return {
      {"node_abs", &node_abs},
      {"node_rel", &node_rel},
      {"max_skip_fraction", &max_skip_fraction},
      {"continuity", &continuity},
      {"energy", &energy},
      {"energy_fd", &energy_fd},
      {"euler", &euler},
      {"momentum", &momentum},
      {"momentum_fd", &momentum_fd},
      {"bohmian", &bohmian},
      {"bohmian_fd", &bohmian_fd},
      {"orbital", &orbital},
      {"reduced_euler", &reduced_euler},
      {"integral", &integral},
      {"speed", &speed},
      {"energy_uniform", &energy_uniform},
      {"energy_uniform_fd", &energy_uniform_fd},
      {"root", &root},
      {"gamma_coupling", &gamma_coupling},
      {"closed_orbit", &closed_orbit},
      {"hamiltonian", &hamiltonian},
      {"holland", &holland},
      {"cross_divergence", &cross_divergence},
      {"pointwise_closed_form", &pointwise_closed_form},
      {"fd_gradient", &fd_gradient},
      {"pair_norm", &pair_norm},
      {"gauss_tail", &gauss_tail},
      {"hartree", &hartree},
      {"he_energy", &he_energy},
      {"circulation", &circulation},
      {"mutual_failure", &mutual_failure},
      {"refinement_ratio", &refinement_ratio},
      {"orthogonality", &orthogonality},
      {"term_floor", &term_floor},
  };
}

void Tolerances::override_from(const std::string& spec) {
  auto tab = table();
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("tolerance override needs name=value: " + item);
    auto name = item.substr(0, eq);
    auto it = tab.find(name);
    if (it == tab.end()) throw ConfigError("unknown tolerance: " + name);
    try {
      *it->second = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad tolerance value: " + item);
    }
  }
}

void Tolerances::scale(double s) {
  // Guards, ratios and the floor are structural, not pass/fail thresholds.
  for (auto& [name, p] : table()) {
    if (name == "node_abs" || name == "node_rel" || name == "max_skip_fraction" ||
        name == "refinement_ratio" || name == "term_floor" || name == "mutual_failure")
      continue;
    *p *= s;
  }
}

const Tolerances& default_tolerances() {
  static const Tolerances tol = [] {
    Tolerances t;
    if (const char* env = std::getenv("QFLOW_TOL_SCALE")) {
      char* end = nullptr;
      double s = std::strtod(env, &end);
      if (end != env && s > 0) t.scale(s);
    }
    return t;
  }();
  return tol;
}

}  // namespace qflow
