#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qflow/cli.hpp"

using namespace qflow;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run qflow_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "qflow_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("verify all on hydrogen 1s") {
  const Run r = qflow_run({"verify", "--state", "hydrogen:1s", "--suite", "all", "--grid",
                           "spherical:nr=48,nt=8,np=8,rmax=30"});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("schema") == 1);
  CHECK(j.at("summary").at("passed").get<int>() >= 15);
  CHECK(j.at("summary").at("failed") == 0);
  CHECK(r.err.empty());
}

TEST_CASE("exit codes") {
  CHECK(qflow_run({"verify", "--state", "hydrogen:1s", "--suite", "nope"}).code == 2);
  CHECK(qflow_run({"verify", "--state", "hydrogen:9q"}).code == 2);
  CHECK(qflow_run({"verify"}).code == 2);
  CHECK(qflow_run({"frobnicate"}).code == 2);
  CHECK(qflow_run({"verify", "--state", "hydrogen:1s", "--tol", "bogus=1"}).code == 2);
  CHECK(qflow_run({"--help"}).code == 0);
  const Run bad = qflow_run({"verify", "--state", "corrupted:hydrogen:1s", "--suite", "continuity", "--grid",
                                   "spherical:nr=10,nt=4,np=4,rmax=10"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("continuity.4") != std::string::npos);
  CHECK(bad.err.find("first failing check") != std::string::npos);
  // an impossible tolerance turns a pass into a failure
  CHECK(qflow_run({"verify", "--state", "hydrogen:2s", "--suite", "energy", "--tol", "energy=-1", "--grid",
                   "spherical:nr=10,nt=4,np=4,rmax=10"}).code == 1);
}

TEST_CASE("reports are byte-stable at a fixed thread count") {
  const std::vector<std::string> args = {"verify", "--state", "superposition:1s+2p1", "--suite", "continuity",
                                         "--suite", "euler", "--t", "0", "--t", "1.3", "--threads", "3",
                                         "--grid", "spherical:nr=20,nt=8,np=8,rmax=12"};
  const Run a = qflow_run(args), b = qflow_run(args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("run configuration files") {
  const auto cfg = scratch("run.json");
  const auto report = scratch("report.json");
  const auto csv = scratch("csv");
  {
    std::ofstream f(cfg);
    f << nlohmann::json{{"state", "hydrogen:2p1"},
                        {"grid", "spherical:nr=40,nt=8,np=8,rmax=40"},
                        {"t_samples", {0.0, 0.5}},
                        {"suites", {"continuity", "conservation"}},
                        {"tolerances", {{"continuity", 1e-9}}},
                        {"output", {{"json_path", report.string()}, {"csv_dir", csv.string()}}}}
             .dump();
  }
  const Run r = qflow_run({"report", cfg.string()});
  CHECK(r.code == 0);
  std::ifstream in(report);
  const auto j = nlohmann::json::parse(in);
  // six continuity items and seven integrals (2p1 adds the centrifugal split) per t
  CHECK(j.at("reports").size() == 2 * (6 + 7));
  CHECK(std::filesystem::exists(csv / "fields_t1.csv"));

  CHECK_THROWS_AS(RunConfig::from_json({{"state", "hydrogen:1s"}, {"extra", 1}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json({{"state", "hydrogen:1s"}, {"suites", {"nope"}}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json({{"state", "hydrogen:1s"}, {"output", {{"pdf", "x"}}}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json({{"grid", "coarse"}}), ConfigError);
  const RunConfig c = RunConfig::from_json({{"state", {{"kind", "hydrogenic"}, {"n", 2}, {"l", 1}, {"m", 1}, {"Z", 1.0}}}});
  CHECK(c.state.label() == parse_state("hydrogen:2p1").label());
  CHECK(RunConfig::from_json(c.to_json()).to_json() == c.to_json());
}

TEST_CASE("other subcommands") {
  const auto csv = scratch("fields.csv");
  const Run f = qflow_run({"fields", "--state", "hydrogen:2s", "--grid", "spherical:nr=6,nt=4,np=4,rmax=10", "--csv",
                           csv.string()});
  CHECK(f.code == 0);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("x,y,z,rho", 0) == 0);

  const Run t = qflow_run({"trace", "--state", "hydrogen:1s", "--mode", "cross", "--x0", "1,0,0", "--tspan", "7",
                           "--dt", "0.025", "--stop-closed"});
  CHECK(t.code == 0);
  const auto tj = nlohmann::json::parse(t.out);
  CHECK(tj.at("trajectory").at("closed").at("return_error").get<double>() < 1e-4);
  CHECK(qflow_run({"trace", "--state", "hydrogen:1s", "--x0", "1,0"}).code == 2);
  CHECK(qflow_run({"trace", "--state", "hydrogen:1s", "--x0", "1,0,0", "--tspan", "100"}).code == 1);

  const Run c = qflow_run({"crossflow", "--state", "hydrogen:1s", "--grid", "spherical:nr=4,nt=6,np=6,rmax=5,rmin=0.5"});
  CHECK(c.code == 0);
  const auto cj = nlohmann::json::parse(c.out);
  CHECK(cj.at("modified_bohr_radius").get<double>() == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(cj.at("radial_forces").at(0).at("nowork_force").at(0).get<double>() == doctest::Approx(-1.0).epsilon(1e-12));

  const Run m = qflow_run({"manybody", "--state", "he-like", "--report", "energy", "--report", "coulomb"});
  CHECK(m.code == 0);
  const auto mj = nlohmann::json::parse(m.out);
  CHECK(mj.at("energy").at("total").get<double>() == doctest::Approx(-2.84765625).epsilon(1e-8));
  CHECK(qflow_run({"manybody", "--state", "he-like", "--report", "vibes"}).code == 2);
  CHECK(qflow_run({"manybody", "--state", "hydrogen:1s", "--report", "energy", "--csv", scratch("ve.csv").string()}).code == 2);
}
