#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qdisc/cli.hpp"
#include "qdisc/report.hpp"

using namespace qdisc;
using cli::json;

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code;
  std::string out, err;
};

RunResult run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"qdisc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path write_file(const std::string& name, const std::string& body) {
  fs::path dir = fs::temp_directory_path() / "qdisc_cli_tests";
  fs::create_directories(dir);
  fs::path p = dir / name;
  std::ofstream f(p);
  f << body;
  return p;
}

const char* kPairJson = R"({
  "schema_version": "1",
  "kind": "states",
  "dim": 2,
  "matrices": [
    [[[1,0],[0,0]],[[0,0],[0,0]]],
    [[[0.5,0],[0.5,0]],[[0.5,0],[0.5,0]]]
  ],
  "priors": [0.5, 0.5],
  "params": {"eta": 0.0, "seed": 7}
})";

const char* kDiagPairJson = R"({
  "schema_version": "1",
  "kind": "states",
  "dim": 2,
  "matrices": [
    [[[1,0],[0,0]],[[0,0],[0,0]]],
    [[[0.5,0],[0,0]],[[0,0],[0.5,0]]]
  ],
  "priors": [0.5, 0.5]
})";

// identity and depolarizing(0.5) as unnormalized Choi matrices
const char* kChannelsJson = R"({
  "schema_version": "1",
  "kind": "channels",
  "dim": 4,
  "matrices": [
    [[[1,0],[0,0],[0,0],[1,0]],
     [[0,0],[0,0],[0,0],[0,0]],
     [[0,0],[0,0],[0,0],[0,0]],
     [[1,0],[0,0],[0,0],[1,0]]],
    [[[0.75,0],[0,0],[0,0],[0.5,0]],
     [[0,0],[0.25,0],[0,0],[0,0]],
     [[0,0],[0,0],[0.25,0],[0,0]],
     [[0.5,0],[0,0],[0,0],[0.75,0]]]
  ],
  "priors": [0.5, 0.5],
  "params": {"dim_in": 2, "seed": 3}
})";

}  // namespace

TEST_CASE("state-game on the |0>,|+> pair reproduces the two-state optimum") {
  auto p = write_file("pair.json", kPairJson);
  auto res = run_cli({"state-game", "--eta", "0", "--input", p.string()});
  CHECK(res.code == 0);
  json rep = json::parse(res.out);
  CHECK(std::abs(rep["values"]["success_probability"].get<double>() - 0.8535534) <=
        1e-6);
}

TEST_CASE("qre subcommand") {
  auto p = write_file("pair.json", kPairJson);
  auto res = run_cli({"qre", "--input", p.string()});
  CHECK(res.code == 0);
  json rep = json::parse(res.out);
  CHECK(std::abs(rep["values"]["qre"].get<double>() - 1.7071068) <= 1e-6);
}

TEST_CASE("geometric divergence of the diagonal pair is ln 2") {
  auto p = write_file("diagpair.json", kDiagPairJson);
  auto res = run_cli(
      {"divergence", "--kind", "geometric", "--alpha", "2", "--input", p.string()});
  CHECK(res.code == 0);
  json rep = json::parse(res.out);
  CHECK(std::abs(rep["values"]["divergence"].get<double>() - std::log(2.0)) <= 1e-9);
}

TEST_CASE("channel subcommands") {
  auto p = write_file("channels.json", kChannelsJson);
  auto div = run_cli({"channel-divergence", "--alpha", "2", "--input", p.string()});
  CHECK(div.code == 0);
  json rep = json::parse(div.out);
  CHECK(rep["values"]["divergence"].get<double>() >= 0.0);

  auto bound = run_cli({"channel-bound", "--n", "1", "--l", "1", "--input", p.string()});
  CHECK(bound.code == 0);
  json brep = json::parse(bound.out);
  CHECK(brep["values"]["exponent_bound"].get<double>() >
        brep["values"]["choi_radius"].get<double>());

  auto sim = run_cli({"simulate", "--n", "2", "--seed", "5", "--input", p.string()});
  CHECK(sim.code == 0);
  json srep = json::parse(sim.out);
  CHECK(srep["checks"][0]["pass"].get<bool>());
}

TEST_CASE("exit-code contract on malformed inputs") {
  CHECK(run_cli({"state-game", "--input", "/does/not/exist.json"}).code == 2);

  auto bad_json = write_file("bad.json", "{ not json");
  CHECK(run_cli({"state-game", "--input", bad_json.string()}).code == 2);

  auto bad_priors = write_file("badpriors.json", R"({
    "schema_version": "1", "kind": "states", "dim": 2,
    "matrices": [[[[1,0],[0,0]],[[0,0],[0,0]]]],
    "priors": [0.7]
  })");
  auto res = run_cli({"state-game", "--input", bad_priors.string()});
  CHECK(res.code == 2);
  CHECK(res.err.find("priors") != std::string::npos);

  // asymmetry beyond tolerance is rejected, never silently Hermitized
  auto skew = write_file("skew.json", R"({
    "schema_version": "1", "kind": "states", "dim": 2,
    "matrices": [
      [[[0.5,0],[0.3,0]],[[0.1,0],[0.5,0]]],
      [[[0.5,0],[0,0]],[[0,0],[0.5,0]]]
    ],
    "priors": [0.5, 0.5]
  })");
  auto skew_res = run_cli({"state-game", "--input", skew.string()});
  CHECK(skew_res.code == 2);
  CHECK(skew_res.err.find("matrices[0]") != std::string::npos);

  // channel files must declare the input dimension
  auto no_dim = write_file("nodim.json", R"({
    "schema_version": "1", "kind": "channels", "dim": 4,
    "matrices": [
      [[[1,0],[0,0],[0,0],[1,0]],
       [[0,0],[0,0],[0,0],[0,0]],
       [[0,0],[0,0],[0,0],[0,0]],
       [[1,0],[0,0],[0,0],[1,0]]]
    ]
  })");
  auto nd = run_cli({"channel-divergence", "--input", no_dim.string()});
  CHECK(nd.code == 2);
  CHECK(nd.err.find("dim_in") != std::string::npos);

  auto pair = write_file("pair.json", kPairJson);
  CHECK(run_cli({"divergence", "--kind", "hypothesis", "--eps", "1.5", "--input",
                 pair.string()})
            .code == 2);
  CHECK(run_cli({"state-game", "--eta", "1.2", "--input", pair.string()}).code == 2);
  CHECK(run_cli({"nonsense-command", "--input", pair.string()}).code == 2);
}

TEST_CASE("reports are deterministic and round-trip numerically") {
  auto p = write_file("pair.json", kPairJson);
  auto a = run_cli({"validate", "--seed", "7", "--input", p.string()});
  auto b = run_cli({"validate", "--seed", "7", "--input", p.string()});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);

  json rep = json::parse(a.out);
  // every numeric leaf survives a parse round trip exactly
  std::function<void(const json&)> walk = [&](const json& v) {
    if (v.is_object() || v.is_array()) {
      for (const auto& e : v) walk(e);
    } else if (v.is_number_float()) {
      double x = v.get<double>();
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.12g", x);
      CHECK(std::strtod(buf, nullptr) == x);
    }
  };
  walk(rep);
}

TEST_CASE("csv output: one row per eta in a sweep") {
  auto p = write_file("pair.json", kPairJson);
  auto res = run_cli({"state-game", "--eta", "0,0.25,0.5", "--format", "csv",
                      "--input", p.string()});
  CHECK(res.code == 0);
  int lines = 0;
  for (char c : res.out) lines += c == '\n';
  CHECK(lines == 4);  // header + three rows
  CHECK(res.out.find("values.success_probability") != std::string::npos);
}

TEST_CASE("empty checks list is emitted as an empty array") {
  auto p = write_file("diagpair.json", kDiagPairJson);
  auto res = run_cli(
      {"divergence", "--kind", "umegaki", "--input", p.string()});
  json rep = json::parse(res.out);
  CHECK(rep["checks"].is_array());
  CHECK(rep["checks"].empty());
}

TEST_CASE("validate runs the instance property suite") {
  auto p = write_file("pair.json", kPairJson);
  auto res = run_cli({"validate", "--seed", "11", "--input", p.string()});
  CHECK(res.code == 0);
  json rep = json::parse(res.out);
  CHECK(rep["values"]["checks_failed"].get<int>() == 0);
  CHECK(rep["checks"].size() >= 8);

  auto ch = write_file("channels.json", kChannelsJson);
  auto cres = run_cli({"validate", "--seed", "11", "--n", "2", "--input", ch.string()});
  CHECK(cres.code == 0);
}

#ifdef QDISC_BIN
TEST_CASE("the installed binary produces byte-identical reports across runs") {
  auto p = write_file("pair.json", kPairJson);
  auto run_binary = [&](const std::string& outfile) {
    std::string cmd = std::string(QDISC_BIN) + " validate --seed 7 --input " +
                      p.string() + " > " + outfile + " 2>/dev/null";
    return std::system(cmd.c_str());
  };
  auto read = [](const std::string& f) {
    std::ifstream in(f);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  fs::path dir = fs::temp_directory_path() / "qdisc_cli_tests";
  int rc1 = run_binary((dir / "r1.json").string());
  int rc2 = run_binary((dir / "r2.json").string());
  CHECK(rc1 == 0);
  CHECK(rc2 == 0);
  std::string r1 = read((dir / "r1.json").string());
  CHECK(!r1.empty());
  CHECK(r1 == read((dir / "r2.json").string()));

  std::string bad = std::string(QDISC_BIN) + " state-game --input /no/file.json";
  int code = std::system((bad + " >/dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(code) == 2);
}
#endif
