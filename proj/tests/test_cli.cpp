#include "v2sim/csv.hpp"
#include "v2sim/scenario.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace v2sim;
using nlohmann::json;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run run(const std::string& scenario, std::vector<std::string> overrides, const std::string& config = "") {
  RunRequest req;
  req.scenario = scenario;
  req.configPath = config;
  req.overrides = std::move(overrides);
  std::ostringstream out, err;
  Run r;
  r.code = runScenario(req, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::filesystem::path tempFile(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("v2sim_test_" + name);
}

}  // namespace

TEST_CASE("catalog lists eight documented scenarios") {
  const auto& cat = scenarioCatalog();
  CHECK(cat.size() == 8);
  std::set<std::string> names;
  for (const auto& s : cat) names.insert(s.name);
  CHECK(names == std::set<std::string>{"rotpattern", "fieldsweep", "rabi", "echodecay",
                                       "pumprecovery", "deer", "swr", "fit"});
  const std::string text = listScenarios();
  for (const auto& s : cat) {
    CHECK(text.find(s.name + ": ") != std::string::npos);
    for (const auto& p : s.params) {
      if (p.type == ParamType::Number || p.type == ParamType::Integer || p.type == ParamType::NumberList) {
        CHECK_MESSAGE(!p.unit.empty(), s.name << "." << p.key);
      }
      if (!p.required) {
        // the catalog text is rendered from the same schema entry
        const ResolvedConfig cfg = resolveConfig(s.name, json::object(),
                                                 s.name == "fit" ? std::vector<std::string>{"input=x.csv"}
                                                 : s.find("fMW") && s.find("fMW")->required
                                                     ? std::vector<std::string>{"fMW=9.308"}
                                                     : std::vector<std::string>{});
        CHECK(cfg.params.at(p.key) == p.defaultValue);
      }
    }
  }
  CHECK_THROWS_AS(scenarioSpec("nope"), std::invalid_argument);
}

TEST_CASE("missing required key exits with code 2 naming the key") {
  const Run r = run("rotpattern", {});
  CHECK(r.code == 2);
  CHECK(r.err.find("fMW") != std::string::npos);
}

TEST_CASE("unknown keys are rejected") {
  CHECK_THROWS_WITH_AS(resolveConfig("swr", json{{"params", {{"bogus", 1}}}}, {}),
                       doctest::Contains("bogus"), ConfigError);
  CHECK_THROWS_WITH_AS(resolveConfig("swr", json{{"extra", 1}}, {}), doctest::Contains("extra"), ConfigError);
  CHECK_THROWS_WITH_AS(resolveConfig("swr", json::object(), {"nope=3"}), doctest::Contains("nope"), ConfigError);
  CHECK_THROWS_WITH_AS(resolveConfig("swr", json{{"output", {{"color", "red"}}}}, {}),
                       doctest::Contains("output.color"), ConfigError);
  CHECK_THROWS_WITH_AS(resolveConfig("swr", json{{"params", {{"modes", "six"}}}}, {}),
                       doctest::Contains("modes"), ConfigError);
  CHECK(run("swr", {"bogus=1"}).code == 2);
}

TEST_CASE("override precedence: command line > file > default") {
  const json file{{"params", {{"fMW", 30.0}, {"modes", 4}}}};
  const auto a = resolveConfig("swr", json::object(), {});
  CHECK(a.params.at("fMW") == 34.0);
  const auto b = resolveConfig("swr", file, {});
  CHECK(b.params.at("fMW") == 30.0);
  CHECK(b.params.at("modes") == 4);
  const auto c = resolveConfig("swr", file, {"fMW=36", "params.modes=5", "output.precision=3"});
  CHECK(c.params.at("fMW") == 36.0);
  CHECK(c.params.at("modes") == 5);
  CHECK(c.output.precision == 3);
  CHECK(c.params.at("thickness") == 100.0);
}

TEST_CASE("parseOverride reads JSON values and falls back to strings") {
  CHECK(parseOverride("a=3").second == 3);
  CHECK(parseOverride("a=[1,2]").second == json::array({1, 2}));
  CHECK(parseOverride("a=echo").second == "echo");
  CHECK_THROWS_AS(parseOverride("novalue"), ConfigError);
}

TEST_CASE("deer scenario emits a 250-row sweep") {
  const Run r = run("deer", {});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  const Table t = readCsv(in);
  CHECK(t.rows.size() == 250);
  CHECK(t.columns.front() == "fp_MHz");
  CHECK(t.rows.front().front() == doctest::Approx(9150.0));
  CHECK(t.rows.back().front() == doctest::Approx(9399.0));
}

TEST_CASE("rotpattern CSV is byte-identical across runs") {
  const auto path = tempFile("rot.csv");
  RunRequest req;
  req.scenario = "rotpattern";
  req.overrides = {"fMW=9.308", "angleStep=10"};
  req.csvPath = path.string();
  std::ostringstream out, err;
  REQUIRE(runScenario(req, out, err) == 0);
  std::ifstream f1(path, std::ios::binary);
  const std::string first((std::istreambuf_iterator<char>(f1)), {});
  REQUIRE(runScenario(req, out, err) == 0);
  std::ifstream f2(path, std::ios::binary);
  const std::string second((std::istreambuf_iterator<char>(f2)), {});
  CHECK(first == second);
  CHECK(first.rfind("# ", 0) == 0);
  CHECK(first.find("theta_deg,B_0_1_G,B_1_2_G,B_2_3_G\n") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("csv layout: sorted meta, header, fixed precision") {
  Table t;
  t.meta = {{"zeta", "1"}, {"alpha", "x"}};
  t.columns = {"a", "b"};
  t.rows = {{1.0, -0.0000001}, {2.5, 3.14159}};
  std::ostringstream os;
  writeCsv(os, t, 3);
  CHECK(os.str() == "# alpha=x\n# zeta=1\na,b\n1.000,0.000\n2.500,3.142\n");
  std::istringstream in(os.str());
  const Table back = readCsv(in);
  CHECK(back.columns == t.columns);
  CHECK(back.meta.at("zeta") == "1");
  CHECK_THROWS_AS(writeCsv(os, t, 18), std::invalid_argument);
}

TEST_CASE("fit scenario reads a CSV relative to the config file") {
  const auto dir = std::filesystem::temp_directory_path() / "v2sim_fit_case";
  std::filesystem::create_directories(dir);
  {
    std::ofstream data(dir / "trace.csv");
    data.precision(17);
    data << "t_us,echo\n";
    for (int i = 0; i < 64; ++i) {
      const double t = 240.0 * i / 63.0;
      data << t << "," << std::exp(-t / 48.0) << "\n";
    }
    std::ofstream cfg(dir / "fit.json");
    cfg << R"({"scenario": "fit", "params": {"input": "trace.csv"}})";
  }
  const Run r = run("fit", {}, (dir / "fit.json").string());
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  const Table t = readCsv(in);
  REQUIRE(t.meta.count("fit.tau_us") == 1);
  CHECK(std::stod(t.meta.at("fit.tau_us")) == doctest::Approx(48.0).epsilon(1e-6));
  CHECK(t.meta.at("fit.converged") == "true");
  CHECK(run("fit", {"input=missing.csv"}, (dir / "fit.json").string()).code == 2);
  std::filesystem::remove_all(dir);
}
