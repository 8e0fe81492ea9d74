#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "intsys/cli/commands.hpp"

using namespace intsys;
using namespace intsys::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = INTSYS_TEST_CONFIG_DIR;

std::string cfg(const char* name) { return (kConfigs / name).string(); }

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "intsys");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string config_error(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

nlohmann::json without_timing(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  j.erase("timing");
  return j;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("bundled double well config") {
  auto c = load_config(cfg("doublewell.json"));
  CHECK(c.dof == 1);
  CHECK(c.integrals == std::vector<std::string>{"p1^2/2 + (q1^2-1)^2"});
  CHECK(c.box == Box({-2.5, -3}, {2.5, 3}));
  CHECK(c.digest.size() == 16);
  CHECK(c.system.value(0, std::vector<double>{0, 0}) == 1.0);
}

TEST_CASE("every bundled config loads") {
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    CHECK_NOTHROW((void)load_config(entry.path()));
  }
}

TEST_CASE("schema errors name the field") {
  const std::string box1 = R"("box": {"min": [-1, -1], "max": [1, 1]})";
  CHECK(config_error(R"({"name": "x", "dof": 2, "integrals": ["q1"], "box": {"min": [0,0,0,0], "max": [1,1,1,1]}})") ==
        "integrals: expected 2");
  CHECK(config_error(R"({"name": "x", "dof": 1, "integrals": ["q1"], "box": {"min": [1, 0], "max": [1, 1]}})")
            .rfind("box:", 0) == 0);
  CHECK(config_error(R"({"dof": 1, "integrals": ["q1"], )" + box1 + "}") == "name: missing");
  CHECK(config_error(R"({"name": "x", "dof": 1, "integrals": ["q1"], "box": {"min": [0], "max": [1, 1]}})") ==
        "box.min: expected 2");
  CHECK(config_error(R"({"name": "x", "dof": 1, "integrals": ["q1"], )" + box1 + R"(, "defaults": {"resolution": 1}})")
            .rfind("defaults.resolution:", 0) == 0);
  CHECK(config_error("{not json").rfind("$:", 0) == 0);
  auto parse_err = config_error(R"({"name": "x", "dof": 1, "integrals": ["q1 + q9"], )" + box1 + "}");
  CHECK(parse_err.rfind("integrals[0]:", 0) == 0);
  CHECK(parse_err.find("q9") != std::string::npos);
}

TEST_CASE("exit code classes") {
  // pass
  CHECK(run({"check", cfg("osc2.json")}).code == kExitPass);
  CHECK(run({"equiv", cfg("osc2.json"), cfg("osc2recomb.json"), "--resolution", "10"}).code == kExitPass);
  CHECK(run({"mu", cfg("osc1.json")}).code == kExitPass);
  CHECK(run({"sympeq", cfg("osc1.json"), "--phi", "p1;-q1"}).code == kExitPass);
  CHECK(run({"orbit", cfg("osc1.json"), "--seed-point", "1,0"}).code == kExitPass);
  CHECK(run({"closedness", cfg("osc1.json")}).code == kExitPass);
  CHECK(run({"probe-complete", cfg("freeparticle.json")}).code == kExitPass);
  CHECK(run({"atlas", cfg("osc1.json")}).code == kExitPass);
  // fail
  CHECK(run({"check", cfg("degenerate.json")}).code == kExitFail);
  CHECK(run({"check", cfg("noninvolutive.json")}).code == kExitFail);
  CHECK(run({"equiv", cfg("osc2.json"), cfg("osc2mixed.json"), "--resolution", "10"}).code == kExitFail);
  CHECK(run({"mu", cfg("doublewell.json"), "--resolution", "301"}).code == kExitFail);
  CHECK(run({"sympeq", cfg("osc1.json"), "--phi", "2*q1;p1"}).code == kExitFail);
  CHECK(run({"closedness", cfg("gaussian.json")}).code == kExitFail);
  CHECK(run({"probe-complete", cfg("hyperbolic.json")}).code == kExitFail);
  CHECK(run({"rank", cfg("degenerate.json"), "--samples", "100"}).code == kExitFail);
  // error
  CHECK(run({"bogus", cfg("osc1.json")}).code == kExitError);
  CHECK(run({"check", cfg("osc1.json"), "--nope"}).code == kExitError);
  CHECK(run({"check", cfg("missing.json")}).code == kExitError);
  CHECK(run({"orbit", cfg("osc1.json")}).code == kExitError);
  CHECK(run({"orbit", cfg("osc1.json"), "--seed-point", "5,0"}).code == kExitError);
  CHECK(run({"fiber", cfg("osc1.json"), "--value", "1,2"}).code == kExitError);
  CHECK(run({"scan", cfg("osc1.json"), "--lattice", "0:1"}).code == kExitError);
  CHECK(run({"equiv", cfg("osc2.json")}).code == kExitError);
  CHECK(run({"equiv", cfg("osc1.json"), cfg("osc2.json")}).code == kExitError);
  CHECK(run({"equiv", cfg("osc2.json"), cfg("degenerate.json"), "--resolution", "8"}).code == kExitError);
  CHECK(run({"sympeq", cfg("osc1.json")}).code == kExitError);
  CHECK(run({"check", cfg("osc1.json"), "--format", "xml"}).code == kExitError);
  CHECK(run({"check", cfg("osc1.json"), "--format", "csv"}).code == kExitError);
  auto e = run({"check", cfg("osc1.json"), cfg("osc2.json")});
  CHECK(e.code == kExitError);
  CHECK(e.err.find("error:") == 0);
}

TEST_CASE("check report for the double well") {
  auto r = run({"check", cfg("doublewell.json")});
  REQUIRE(r.code == kExitPass);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["command"] == "check");
  CHECK(j["involution"]["pass"] == true);
  CHECK(j["involution"]["pairs"].empty());
  CHECK(j["rank"]["full_rank_fraction"].get<double>() >= 0.99);
  CHECK(j.contains("timing"));
  CHECK(j["configs"][0]["digest"] == load_config(cfg("doublewell.json")).digest);
}

TEST_CASE("scan table for the double well") {
  auto r = run({"scan", cfg("doublewell.json"), "--lattice", "0:2:20", "--resolution", "300", "--format", "csv"});
  REQUIRE(r.code == kExitPass);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "c1,count,critical");
  int row = 0;
  bool flagged_near_one = false;
  while (std::getline(in, line)) {
    double c = std::stod(line.substr(0, line.find(',')));
    int count = std::stoi(line.substr(line.find(',') + 1));
    CHECK(count == (c < 1.0 ? 2 : 1));
    if (std::abs(c - 1.0) < 0.1 && line.back() == '1') flagged_near_one = true;
    ++row;
  }
  CHECK(row == 20);
  CHECK(flagged_near_one);
}

TEST_CASE("equivalence report") {
  auto r = run({"equiv", cfg("osc2.json"), cfg("osc2recomb.json"), "--resolution", "10"});
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["equivalence"]["verdict"] == "equivalent");
  CHECK(j["equivalence"]["qualifier"] == "at resolution and sampling");
  auto n = nlohmann::json::parse(run({"equiv", cfg("osc2.json"), cfg("osc2mixed.json"), "--resolution", "10"}).out);
  CHECK(n["equivalence"]["verdict"] == "not-equivalent");
  CHECK(n["equivalence"].contains("bracket_witness"));
}

TEST_CASE("artifacts are written next to the report") {
  auto dir = fs::temp_directory_path() / "intsys_cli_artifacts";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto r = run({"atlas", cfg("doublewell.json"), "--out", (dir / "dw.json").string()});
  REQUIRE(r.code == kExitPass);
  CHECK(fs::exists(dir / "dw.json"));
  CHECK(slurp(dir / "dw.labels.csv").rfind("label,mu1,component,cells\n", 0) == 0);
  CHECK(slurp(dir / "dw.edges.csv").rfind("a,b\n", 0) == 0);
  auto dot = slurp(dir / "dw.base.dot");
  CHECK(dot.rfind("graph base_space {", 0) == 0);
  CHECK(dot.find(" -- ") != std::string::npos);
  auto j = nlohmann::json::parse(slurp(dir / "dw.json"));
  CHECK(j["orbit_space"]["graph"]["y_shaped"] == true);

  auto coarse = run({"atlas", cfg("doublewell.json"), "--resolution", "151"});
  auto cj = nlohmann::json::parse(coarse.out);
  CHECK(cj["orbit_space"]["thin_cells"].get<std::size_t>() > 0);
  bool warned = false;
  for (const auto& w : cj["warnings"]) warned = warned || w.get<std::string>().find("raise --resolution") != std::string::npos;
  CHECK(warned);

  run({"orbit", cfg("osc1.json"), "--seed-point", "1,0", "--field", "1", "--t-final", "1", "--out", (dir / "t.json").string()});
  CHECK(slurp(dir / "t.trajectory.csv").rfind("t,q1,p1\n0,1,0\n", 0) == 0);
  run({"fiber", cfg("osc1.json"), "--value", "0.5", "--out", (dir / "f.json").string()});
  CHECK(slurp(dir / "f.cells.csv").rfind("q1,p1,label\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("reports are reproducible") {
  const std::vector<std::vector<std::string>> cases = {
      {"check", cfg("osc2.json"), "--seed", "7"},
      {"orbit", cfg("doublewell.json"), "--seed-point", "1,0.5", "--resolution", "150"},
      {"scan", cfg("doublewell.json"), "--resolution", "150"},
      {"equiv", cfg("osc2.json"), cfg("osc2mixed.json"), "--resolution", "8", "--seed", "3"},
      {"sympeq", cfg("osc1.json"), "--phi", "p1;-q1", "--seed", "11"},
      {"probe-complete", cfg("hyperbolic.json"), "--seed", "5"},
  };
  for (const auto& c : cases) {
    auto a = run(c), b = run(c);
    CHECK(a.code == b.code);
    CHECK(without_timing(a.out) == without_timing(b.out));
  }
  auto c1 = run({"scan", cfg("doublewell.json"), "--resolution", "150", "--format", "csv"});
  auto c2 = run({"scan", cfg("doublewell.json"), "--resolution", "150", "--format", "csv"});
  CHECK(c1.out == c2.out);
}

TEST_CASE("number formatting round-trips") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
}

}
