#include "qnl/scenario.hpp"

#include "qnl/serialize.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace qnl;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("qnl-test-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path writeConfig(const TempDir& dir, const std::string& name,
                     const std::string& body) {
  const fs::path p = dir.path / name;
  std::ofstream(p) << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("mesh construction rules") {
  ChainConfig cfg;
  cfg.n = 64;
  cfg.ell = 1.0;
  cfg.u0_1 = cfg.u1_1 = 1.0;

  SUBCASE("unit spacing fills the window") {
    MeshRule rule;
    rule.spacing = 1;
    const auto [mesh, desc] = meshFromRule(cfg, rule);
    CHECK(mesh.k1 == 8);
    CHECK(mesh.k2 == 56);
    CHECK(int(mesh.repatoms.size()) == cfg.n + 1);
    CHECK(desc.minSpacing == 1);
    CHECK(desc.spacingAt(0.3, cfg) == 1);
  }
  SUBCASE("spacing two leaves every other atom out") {
    MeshRule rule;
    rule.spacing = 2;
    const auto [mesh, desc] = meshFromRule(cfg, rule);
    CHECK(desc.rHat == 2);
    CHECK(desc.lHat == 2);
    CHECK(desc.minSpacing == 2);
    for (std::size_t i = 0; i + 1 < mesh.repatoms.size(); ++i) {
      const int a = mesh.repatoms[i], b = mesh.repatoms[i + 1];
      if (a > mesh.k1 && b < mesh.k2) CHECK(b - a == 2);
    }
  }
  SUBCASE("full mesh keeps every atom") {
    MeshRule rule;
    rule.kind = MeshRule::Full;
    const auto [mesh, desc] = meshFromRule(cfg, rule);
    CHECK(int(mesh.repatoms.size()) == cfg.n + 1);
    CHECK(desc.minSpacing == 1);
  }
  SUBCASE("infeasible windows are rejected") {
    ChainConfig tiny = cfg;
    tiny.n = 8;
    MeshRule rule;
    rule.k1Fixed = 4;
    CHECK_THROWS_AS(meshFromRule(tiny, rule), RuleInfeasible);
  }
}

TEST_CASE("scenario parsing") {
  TempDir dir;
  SUBCASE("key-value format with symbolic boundary values") {
    const auto p = writeConfig(dir, "a.conf",
                               "name = demo\n"
                               "task = converge\n"
                               "potential.kind = lennard-jones\n"
                               "potential.k1 = 1\n"
                               "potential.k2 = 1\n"
                               "chain.ell = 1.5*gamma   # fracture regime\n"
                               "chain.u0_1 = delta1\n"
                               "chain.u1_1 = gamma\n"
                               "chain.n_list = 16,24\n"
                               "mesh.spacing = 2\n");
    const LoadedScenario l = loadScenario(p.string());
    CHECK(l.scenario.name == "demo");
    CHECK(l.scenario.task == Task::Converge);
    CHECK(l.scenario.ell ==
          doctest::Approx(1.5 * l.analysis.gamma).epsilon(1e-15));
    CHECK(l.scenario.u0_1 ==
          doctest::Approx(l.analysis.delta1).epsilon(1e-15));
    CHECK(l.scenario.nList == std::vector<int>{16, 24});
  }
  SUBCASE("json format") {
    const auto p = writeConfig(dir, "b.json",
                               R"({"name":"jdemo",
                                   "potential":{"kind":"morse","k1":1,
                                                "k2":1,"delta1":1},
                                   "chain":{"ell":"0.9*gamma",
                                            "n_list":[32,48]}})");
    const LoadedScenario l = loadScenario(p.string());
    CHECK(l.scenario.name == "jdemo");
    CHECK(l.scenario.potential.kind == PotentialKind::Morse);
    CHECK(l.scenario.nList == std::vector<int>{32, 48});
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(loadScenario((dir.path / "missing.conf").string()),
                    ConfigError);
    const auto bad = writeConfig(dir, "bad.conf", "chain.ell\n");
    CHECK_THROWS_AS(loadScenario(bad.string()), ConfigError);
    const auto badList =
        writeConfig(dir, "list.conf", "chain.n_list = 32,16\n");
    CHECK_THROWS_AS(loadScenario(badList.string()), ConfigError);
    const auto badKind =
        writeConfig(dir, "kind.conf", "potential.kind = tersoff\n");
    CHECK_THROWS_AS(loadScenario(badKind.string()), ConfigError);
  }
}

TEST_CASE("potential-check task writes a passing report") {
  TempDir dir;
  const auto p = writeConfig(dir, "pc.conf",
                             "name = pc\n"
                             "potential.kind = lennard-jones\n");
  RunOptions opts;
  opts.outDir = dir.path.string();
  opts.taskOverride = Task::PotentialCheck;
  CHECK(runScenario(p.string(), opts) == 0);
  const auto out = dir.path / "pc.potential-check.json";
  REQUIRE(fs::exists(out));
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["schema"] == 1);
  CHECK(j["all_pass"] == true);

  SUBCASE("refuses to overwrite without force") {
    CHECK_THROWS_AS(runScenario(p.string(), opts), ConfigError);
    opts.force = true;
    CHECK(runScenario(p.string(), opts) == 0);
  }
}

TEST_CASE("converge task emits reproducible csv") {
  TempDir dir;
  const auto p = writeConfig(dir, "cv.conf",
                             "name = cv\n"
                             "potential.kind = lennard-jones\n"
                             "chain.ell = 0.9*gamma\n"
                             "chain.u0_1 = 0.9*gamma\n"
                             "chain.u1_1 = 0.9*gamma\n"
                             "chain.n_list = 16,24\n"
                             "mesh.spacing = 2\n");
  RunOptions opts;
  opts.outDir = dir.path.string();
  opts.taskOverride = Task::Converge;
  REQUIRE(runScenario(p.string(), opts) == 0);
  const auto csvPath = dir.path / "cv.converge.csv";
  REQUIRE(fs::exists(csvPath));
  const std::string first = slurp(csvPath);
  CHECK(first.rfind("n,minAtomistic,minQNL,gap,gapOverLambda,", 0) == 0);

  opts.force = true;
  opts.threads = 2;  // parallel workers must not change the bytes
  REQUIRE(runScenario(p.string(), opts) == 0);
  CHECK(slurp(csvPath) == first);

  const auto j = nlohmann::json::parse(slurp(dir.path / "cv.converge.json"));
  REQUIRE(j["rows"].size() == 2);
  for (const auto& row : j["rows"]) {
    CHECK(std::isfinite(row["minAtomistic"].get<double>()));
    CHECK(std::isfinite(row["minQNL"].get<double>()));
    CHECK(row["crackLocationAtomistic"].get<double>() == -1.0);
  }
}

TEST_CASE("converge first-order columns are Cauchy along the sweep") {
  TempDir dir;
  const auto p = writeConfig(dir, "cy.conf",
                             "name = cy\n"
                             "potential.kind = lennard-jones\n"
                             "chain.ell = 0.9*gamma\n"
                             "chain.u0_1 = delta1\n"          // boundary layers make
                             "chain.u1_1 = 0.95*gamma\n"      // the columns n-dependent
                             "chain.n_list = 16,32,64\n"
                             "mesh.spacing = 2\n");
  RunOptions opts;
  opts.outDir = dir.path.string();
  opts.taskOverride = Task::Converge;
  REQUIRE(runScenario(p.string(), opts) == 0);
  const auto j = nlohmann::json::parse(slurp(dir.path / "cy.converge.json"));
  REQUIRE(j["rows"].size() == 3);
  for (const char* col : {"firstOrderAtomistic", "firstOrderQNL"}) {
    const double f1 = j["rows"][0][col].get<double>();
    const double f2 = j["rows"][1][col].get<double>();
    const double f3 = j["rows"][2][col].get<double>();
    CHECK(std::abs(f3 - f2) < std::abs(f2 - f1));
  }
}

TEST_CASE("fracture-map and limit-compare tasks") {
  TempDir dir;
  const auto p = writeConfig(dir, "fm.conf",
                             "name = fm\n"
                             "potential.kind = lennard-jones\n"
                             "chain.ell = 1.5*gamma\n"
                             "chain.u0_1 = delta1\n"
                             "chain.u1_1 = gamma\n"
                             "chain.n = 36\n"
                             "mesh.spacing = 2\n"
                             "mesh.spacing_list = 1,2\n"
                             "limits.tol = 1e-9\n");
  RunOptions opts;
  opts.outDir = dir.path.string();
  opts.taskOverride = Task::FractureMap;
  REQUIRE(runScenario(p.string(), opts) == 0);
  const auto j =
      nlohmann::json::parse(slurp(dir.path / "fm.fracture-map.json"));
  REQUIRE(j["rows"].size() == 2);
  for (const auto& row : j["rows"])
    CHECK(row["crackRegionQNL"].get<std::string>() != "None");

  opts.taskOverride = Task::LimitCompare;
  REQUIRE(runScenario(p.string(), opts) == 0);
  const auto lc =
      nlohmann::json::parse(slurp(dir.path / "fm.limit-compare.json"));
  CHECK(lc["mesh_descriptor"]["r_hat"] == 2);
  CHECK(std::isfinite(lc["min_atomistic"]["value"].get<double>()));
  CHECK(std::isfinite(lc["min_qc"]["value"].get<double>()));
}

TEST_CASE("minimize task writes deformations") {
  TempDir dir;
  const auto p = writeConfig(dir, "mz.conf",
                             "name = mz\n"
                             "potential.kind = lennard-jones\n"
                             "chain.ell = 1.4*gamma\n"
                             "chain.u0_1 = delta1\n"
                             "chain.u1_1 = gamma\n"
                             "chain.n = 24\n"
                             "mesh.spacing = 2\n");
  RunOptions opts;
  opts.outDir = dir.path.string();
  opts.taskOverride = Task::Minimize;
  REQUIRE(runScenario(p.string(), opts) == 0);
  REQUIRE(fs::exists(dir.path / "mz.minimize.json"));
  const std::string csv = slurp(dir.path / "mz.minimize.atomistic.csv");
  CHECK(csv.rfind("index,position\n", 0) == 0);
  // one row per atom plus header
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 24 + 2);
}

TEST_CASE("serialization helpers") {
  Vector u(3);
  u << 0.0, 0.5, 1.0;
  CHECK(deformationCsv(u) == "index,position\n0,0\n1,0.5\n2,1\n");
  CheckReport rep;
  rep.checks.emplace_back("demo", CheckResult{true, -1.0, 2.0});
  const json j = toJson(rep);
  CHECK(j["demo"]["pass"] == true);
  CHECK(j["demo"]["worst_value"] == -1.0);

  const auto lj = PotentialSpec::lennardJones(1.0, 1.0);
  const auto a = computeConstants(lj);
  ChainConfig cfg;
  cfg.n = 16;
  cfg.ell = 0.9 * a.gamma;
  cfg.u0_1 = cfg.u1_1 = cfg.ell;
  MeshRule rule;
  rule.spacing = 2;
  const auto [mesh, desc] = meshFromRule(cfg, rule);
  const auto b =
      sigmaMuBreakdown(a, lj, cfg, mesh, affineDeformation(cfg, cfg.ell));
  const json bj = toJson(b);
  CHECK(bj["sigma"].size() == b.sigma.size());
  CHECK(bj["mu"].size() == b.mu.size());
  CHECK(bj["first_order"].get<double>() == b.firstOrder);
}
