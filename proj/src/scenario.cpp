#include "qnl/scenario.hpp"

#include "qnl/serialize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace qnl {
namespace fs = std::filesystem;

const char* taskName(Task t) {
  switch (t) {
    case Task::PotentialCheck: return "potential-check";
    case Task::Minimize: return "minimize";
    case Task::Converge: return "converge";
    case Task::BoundaryLayers: return "boundary-layer";
    case Task::FractureMap: return "fracture-map";
    case Task::LimitCompare: return "limit-compare";
  }
  return "?";
}

std::pair<MeshConfig, MeshDescriptor> meshFromRule(const ChainConfig& cfg,
                                                   const MeshRule& rule) {
  MeshConfig mesh;
  if (rule.kind == MeshRule::Full) {
    mesh = MeshConfig::full(cfg);
  } else {
    const int k1 = rule.k1Fixed > 0
                       ? rule.k1Fixed
                       : int(std::lround(rule.k1Factor * std::sqrt(cfg.n)));
    const int k2 = cfg.n - k1;
    if (!(0 < k1 && k1 < k2 && k2 < cfg.n - 2))
      throw RuleInfeasible("meshFromRule: atomistic windows overlap");
    if (k1 + rule.spacing >= k2)
      throw RuleInfeasible("meshFromRule: no room for the continuum window");
    mesh.k1 = k1;
    mesh.k2 = k2;
    for (int i = 0; i <= k1; ++i) mesh.repatoms.push_back(i);
    for (int t = k1 + rule.spacing; t < k2; t += rule.spacing)
      mesh.repatoms.push_back(t);
    for (int i = k2; i <= cfg.n; ++i) mesh.repatoms.push_back(i);
  }
  mesh.validate(cfg);
  return {mesh, describeMesh(cfg, mesh)};
}

namespace {

std::map<std::string, std::string> flattenJson(const nlohmann::json& j,
                                               const std::string& prefix) {
  std::map<std::string, std::string> out;
  for (const auto& [key, value] : j.items()) {
    const std::string full = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      auto sub = flattenJson(value, full);
      out.insert(sub.begin(), sub.end());
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) {
        if (!joined.empty()) joined += ',';
        joined += item.is_string() ? item.get<std::string>() : item.dump();
      }
      out[full] = joined;
    } else if (value.is_string()) {
      out[full] = value.get<std::string>();
    } else {
      out[full] = value.dump();
    }
  }
  return out;
}

std::map<std::string, std::string> readConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  if (fs::path(path).extension() == ".json") {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw ConfigError("invalid JSON config: " + path);
    return flattenJson(j, "");
  }

  std::map<std::string, std::string> kv;
  std::istringstream lines(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(lines, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineNo) +
                        ": expected key = value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

class ConfigView {
 public:
  ConfigView(std::map<std::string, std::string> kv, std::string path)
      : kv_(std::move(kv)), path_(std::move(path)) {}

  std::optional<std::string> get(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    return it->second;
  }
  std::string require(const std::string& key) const {
    if (auto v = get(key)) return *v;
    throw ConfigError(path_ + ": missing required key '" + key + "'");
  }
  double number(const std::string& key, double fallback) const {
    if (auto v = get(key)) return parseNumber(key, *v);
    return fallback;
  }
  int integer(const std::string& key, int fallback) const {
    return int(std::lround(number(key, fallback)));
  }
  double parseNumber(const std::string& key, const std::string& v) const {
    try {
      std::size_t pos = 0;
      const double x = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw ConfigError(path_ + ": key '" + key + "' is not a number: " + v);
    }
  }
  std::vector<int> intList(const std::string& key) const {
    std::vector<int> out;
    const auto v = get(key);
    if (!v) return out;
    std::stringstream ss(*v);
    std::string tok;
    while (std::getline(ss, tok, ','))
      out.push_back(int(std::lround(parseNumber(key, tok))));
    return out;
  }
  const std::string& path() const { return path_; }

 private:
  std::map<std::string, std::string> kv_;
  std::string path_;
};

// "1.5*gamma", "delta1", "0.97" -> value against the computed constants.
double resolveScaled(const ConfigView& cfg, const std::string& key,
                     const std::string& raw, const PotentialAnalysis& a) {
  const auto symbol = [&](const std::string& s) -> std::optional<double> {
    if (s == "gamma") return a.gamma;
    if (s == "delta1") return a.delta1;
    if (s == "delta2") return a.delta2;
    if (s == "z0") return a.z0;
    return std::nullopt;
  };
  const auto star = raw.find('*');
  if (star != std::string::npos) {
    const double factor = cfg.parseNumber(key, raw.substr(0, star));
    if (auto s = symbol(raw.substr(star + 1))) return factor * *s;
    throw ConfigError("unknown symbol in '" + raw + "' for key " + key);
  }
  if (auto s = symbol(raw)) return *s;
  return cfg.parseNumber(key, raw);
}

Task parseTask(const std::string& s) {
  for (Task t : {Task::PotentialCheck, Task::Minimize, Task::Converge,
                 Task::BoundaryLayers, Task::FractureMap, Task::LimitCompare})
    if (s == taskName(t)) return t;
  throw ConfigError("unknown task: " + s);
}

void writeArtifact(const fs::path& file, const std::string& content,
                   bool force) {
  if (fs::exists(file) && !force)
    throw ConfigError("refusing to overwrite " + file.string() +
                      " (pass --force)");
  fs::create_directories(file.parent_path().empty() ? "."
                                                    : file.parent_path());
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write " + file.string());
  out << content;
}

json baseJson(const Scenario& s, Task task) {
  json j;
  j["schema"] = 1;
  j["scenario"] = s.name;
  j["task"] = taskName(task);
  j["potential"] = toJson(s.potential);
  return j;
}

struct RowOutcome {
  json summary;
  std::string line;
  bool ok = true;
};

// Runs one job per row on `threads` workers; rows are buffered and emitted
// in input order.
void forEachRow(int threads, int rowCount,
                const std::function<RowOutcome(int)>& job,
                std::vector<RowOutcome>& out) {
  out.resize(rowCount);
  if (threads <= 1) {
    for (int i = 0; i < rowCount; ++i) out[i] = job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(threads, rowCount); ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < rowCount; i = next.fetch_add(1))
        out[i] = job(i);
    });
  for (auto& th : pool) th.join();
}

double firstCrackLocation(const MinimizeResult& r) {
  return r.cracks.bonds.empty() ? -1.0 : r.cracks.bonds.front().location;
}

}  // namespace

LoadedScenario loadScenario(const std::string& path) {
  ConfigView cfg(readConfigFile(path), path);

  LoadedScenario out;
  Scenario& s = out.scenario;
  s.name = cfg.get("name").value_or(fs::path(path).stem().string());
  if (auto t = cfg.get("task")) s.task = parseTask(*t);

  const std::string kind = cfg.get("potential.kind").value_or("lennard-jones");
  if (kind == "lennard-jones" || kind == "lj") {
    s.potential = PotentialSpec::lennardJones(cfg.number("potential.k1", 1.0),
                                              cfg.number("potential.k2", 1.0));
  } else if (kind == "morse") {
    s.potential = PotentialSpec::morse(cfg.number("potential.k1", 1.0),
                                       cfg.number("potential.k2", 1.0),
                                       cfg.number("potential.delta1", 1.0));
  } else {
    throw ConfigError("unknown potential.kind: " + kind);
  }
  if (!(s.potential.k1 > 0.0) || !(s.potential.k2 > 0.0))
    throw ConfigError("potential constants must be positive");
  out.analysis = computeConstants(s.potential);

  const auto scaled = [&](const std::string& key, double fallback) {
    if (auto v = cfg.get(key)) return resolveScaled(cfg, key, *v, out.analysis);
    return fallback;
  };
  s.ell = scaled("chain.ell", out.analysis.gamma);
  s.u0_1 = scaled("chain.u0_1", out.analysis.gamma);
  s.u1_1 = scaled("chain.u1_1", out.analysis.gamma);
  if (!(s.ell > 0.0 && s.u0_1 > 0.0 && s.u1_1 > 0.0))
    throw ConfigError("chain.ell, chain.u0_1, chain.u1_1 must be positive");

  s.nList = cfg.intList("chain.n_list");
  if (s.nList.empty()) {
    if (auto n = cfg.get("chain.n")) s.nList.push_back(cfg.integer("chain.n", 0));
  }
  if (s.nList.empty()) s.nList.push_back(64);
  if (!std::is_sorted(s.nList.begin(), s.nList.end(),
                      std::less_equal<int>()))
    throw ConfigError("chain.n_list must be strictly increasing");

  const std::string rule = cfg.get("mesh.rule").value_or("window");
  if (rule == "full")
    s.meshRule.kind = MeshRule::Full;
  else if (rule == "window")
    s.meshRule.kind = MeshRule::Window;
  else
    throw ConfigError("unknown mesh.rule: " + rule);
  if (auto k1 = cfg.get("mesh.k1")) {
    if (*k1 == "sqrt")
      s.meshRule.k1Fixed = 0;
    else
      s.meshRule.k1Fixed = cfg.integer("mesh.k1", 0);
  }
  s.meshRule.k1Factor = cfg.number("mesh.k1_factor", 1.0);
  s.meshRule.spacing = cfg.integer("mesh.spacing", 1);
  if (s.meshRule.spacing < 1) throw ConfigError("mesh.spacing must be >= 1");
  s.spacingList = cfg.intList("mesh.spacing_list");
  if (s.spacingList.empty()) s.spacingList = {s.meshRule.spacing};

  s.solver.gradTol = cfg.number("solver.grad_tol", 1e-10);
  s.solver.maxIter = cfg.integer("solver.max_iter", 100000);
  s.solver.crackStrainFactor = cfg.number("solver.crack_factor", 2.0);
  if (!(s.solver.gradTol > 0.0)) throw ConfigError("solver.grad_tol must be > 0");
  if (!(s.solver.crackStrainFactor > 1.0))
    throw ConfigError("solver.crack_factor must be > 1");
  s.limitsTol = cfg.number("limits.tol", 1e-10);
  s.oraclePoints = cfg.integer("oracle.points", 201);
  s.outPrefix = cfg.get("out.prefix").value_or(s.name);
  return out;
}

namespace {

struct TaskContext {
  const Scenario& s;
  const PotentialAnalysis& analysis;
  const RunOptions& opts;
  bool solverTrouble = false;

  fs::path artifact(const std::string& suffix) const {
    return fs::path(opts.outDir) / (s.outPrefix + "." + suffix);
  }
  void write(const std::string& suffix, const std::string& content) const {
    writeArtifact(artifact(suffix), content, opts.force);
  }
};

ChainConfig chainFor(const Scenario& s, int n) {
  ChainConfig cfg;
  cfg.n = n;
  cfg.ell = s.ell;
  cfg.u0_1 = s.u0_1;
  cfg.u1_1 = s.u1_1;
  cfg.validate();
  return cfg;
}

MinimizeOptions solverFor(const Scenario& s, BranchSet branchSet) {
  MinimizeOptions o = s.solver;
  o.branchSet = branchSet;
  return o;
}

void runPotentialCheck(TaskContext& ctx) {
  const GridSpec grid =
      GridSpec::defaultFor(ctx.s.potential, ctx.analysis.delta1);
  const CheckReport report =
      checkAssumptions(ctx.analysis, ctx.s.potential, grid);
  json j = baseJson(ctx.s, Task::PotentialCheck);
  j["constants"] = toJson(ctx.analysis);
  if (ctx.s.potential.kind == PotentialKind::LennardJones)
    j["R_tail_bound"] = evalRTailBound(ctx.analysis, ctx.s.potential);
  j["checks"] = toJson(report);
  j["all_pass"] = report.allPass();
  ctx.write("potential-check.json", j.dump(2) + "\n");
  std::cout << "potential-check " << ctx.s.name << ": "
            << (report.allPass() ? "all checks pass" : "CHECK FAILURES")
            << " (" << report.checks.size() << " checks)\n";
  if (!report.allPass()) ctx.solverTrouble = true;
}

void runMinimize(TaskContext& ctx) {
  const int n = ctx.s.nList.back();
  const ChainConfig cfg = chainFor(ctx.s, n);
  const auto [mesh, desc] = meshFromRule(cfg, ctx.s.meshRule);

  const auto atom = globalMinimize(
      EnergyModel::atomistic(cfg, ctx.s.potential, ctx.analysis),
      solverFor(ctx.s, BranchSet::AllBonds));
  const auto qnl = globalMinimize(
      EnergyModel::qnl(cfg, ctx.s.potential, ctx.analysis, mesh),
      solverFor(ctx.s, BranchSet::RepatomIntervals));

  json j = baseJson(ctx.s, Task::Minimize);
  j["n"] = n;
  j["mesh"] = {{"k1", mesh.k1},
               {"k2", mesh.k2},
               {"repatom_count", mesh.repatoms.size()},
               {"r_hat", desc.rHat},
               {"l_hat", desc.lHat},
               {"min_spacing", desc.minSpacing}};
  j["atomistic"] = toJson(atom);
  j["qnl"] = toJson(qnl);
  ctx.write("minimize.json", j.dump(2) + "\n");
  ctx.write("minimize.atomistic.csv", deformationCsv(atom.u));
  ctx.write("minimize.qnl.csv", deformationCsv(qnl.u));
  for (const auto* r : {&atom, &qnl}) {
    std::cout << "minimize " << ctx.s.name << " n=" << n << " "
              << (r == &atom ? "atomistic" : "qnl") << ": energy "
              << formatDouble(r->energy) << " branch " << r->branch
              << (r->converged ? "" : " [not converged]") << "\n";
    if (!r->converged) ctx.solverTrouble = true;
  }
}

void runConverge(TaskContext& ctx) {
  std::vector<RowOutcome> outcomes;
  forEachRow(ctx.opts.threads, int(ctx.s.nList.size()), [&](int i) {
    const int n = ctx.s.nList[i];
    const ChainConfig cfg = chainFor(ctx.s, n);
    const auto [mesh, desc] = meshFromRule(cfg, ctx.s.meshRule);
    const auto atom = globalMinimize(
        EnergyModel::atomistic(cfg, ctx.s.potential, ctx.analysis),
        solverFor(ctx.s, BranchSet::AllBonds));
    const auto qnl = globalMinimize(
        EnergyModel::qnl(cfg, ctx.s.potential, ctx.analysis, mesh),
        solverFor(ctx.s, BranchSet::RepatomIntervals));
    RowOutcome out;
    const double gap = atom.energy - qnl.energy;
    out.summary = {{"n", n},
                   {"minAtomistic", atom.energy},
                   {"minQNL", qnl.energy},
                   {"gap", gap},
                   {"gapOverLambda", n * gap},
                   {"firstOrderAtomistic", atom.firstOrder},
                   {"firstOrderQNL", qnl.firstOrder},
                   {"crackLocationAtomistic", firstCrackLocation(atom)},
                   {"crackLocationQNL", firstCrackLocation(qnl)}};
    out.ok = atom.converged && qnl.converged;
    out.line = "converge " + ctx.s.name + " n=" + std::to_string(n) +
               ": gap*n " + formatDouble(n * gap) +
               (out.ok ? "" : " [not converged]");
    return out;
  }, outcomes);

  std::string csv =
      "n,minAtomistic,minQNL,gap,gapOverLambda,firstOrderAtomistic,"
      "firstOrderQNL,crackLocationAtomistic,crackLocationQNL\n";
  json rows = json::array();
  for (const auto& r : outcomes) {
    const auto& s = r.summary;
    csv += std::to_string(s["n"].get<int>());
    for (const char* key :
         {"minAtomistic", "minQNL", "gap", "gapOverLambda",
          "firstOrderAtomistic", "firstOrderQNL", "crackLocationAtomistic",
          "crackLocationQNL"}) {
      csv += ',';
      csv += formatDouble(s[key].get<double>());
    }
    csv += '\n';
    rows.push_back(s);
    std::cout << r.line << "\n";
    if (!r.ok) ctx.solverTrouble = true;
  }
  json j = baseJson(ctx.s, Task::Converge);
  j["rows"] = rows;
  ctx.write("converge.json", j.dump(2) + "\n");
  ctx.write("converge.csv", csv);
}

std::vector<int> neededBifWeights(const LimitMeshDescriptor& md) {
  std::vector<int> ms = {0, 1, 2, 5};
  if (md.rHat != kInfiniteGap && md.rHat >= 1) ms.push_back(md.rHat - 1);
  if (md.lHat != kInfiniteGap && md.lHat >= 1) ms.push_back(md.lHat - 1);
  return ms;
}

void runBoundaryLayers(TaskContext& ctx) {
  const LimitTable table =
      buildLimitTable(ctx.s.potential, ctx.analysis, ctx.s.u0_1, ctx.s.u1_1,
                      {0, 1, 2, 5}, ctx.s.limitsTol);
  json j = baseJson(ctx.s, Task::BoundaryLayers);
  j["table"] = toJson(table);
  ctx.write("boundary-layer.json", j.dump(2) + "\n");

  std::string csv = "name,value,N_used,truncation_estimate\n";
  const auto row = [&](const std::string& name, const BLResult& r) {
    csv += name + "," + formatDouble(r.value) + "," +
           std::to_string(r.nUsed) + "," +
           formatDouble(r.truncationEstimate) + "\n";
  };
  row("B_elastic_u0", table.elastic0);
  row("B_elastic_u1", table.elastic1);
  row("B_gamma", table.bGamma);
  row("Bb_u0", table.bb0);
  row("Bb_u1", table.bb1);
  for (const auto& [m, r] : table.bIF) row("B_IF_" + std::to_string(m), r);
  csv += "B_BJ_u0," + formatDouble(table.bBJ0) + ",,\n";
  csv += "B_BJ_u1," + formatDouble(table.bBJ1) + ",,\n";
  csv += "B_IJ," + formatDouble(table.bIJ) + ",,\n";
  csv += "J0_gamma," + formatDouble(table.j0gamma) + ",,\n";
  ctx.write("boundary-layer.csv", csv);
  std::cout << "boundary-layer " << ctx.s.name << ": B(gamma) "
            << formatDouble(table.bGamma.value)
            << (table.allConverged ? "" : " [not converged]") << "\n";
  if (!table.allConverged) ctx.solverTrouble = true;
}

void runFractureMap(TaskContext& ctx) {
  struct Job {
    int spacing, n;
  };
  std::vector<Job> jobs;
  for (int s : ctx.s.spacingList)
    for (int n : ctx.s.nList) jobs.push_back({s, n});

  std::vector<RowOutcome> outcomes;
  forEachRow(ctx.opts.threads, int(jobs.size()), [&](int i) {
    const auto [spacing, n] = jobs[i];
    const ChainConfig cfg = chainFor(ctx.s, n);
    MeshRule rule = ctx.s.meshRule;
    rule.kind = MeshRule::Window;
    rule.spacing = spacing;
    const auto [mesh, desc] = meshFromRule(cfg, rule);
    const auto atom = globalMinimize(
        EnergyModel::atomistic(cfg, ctx.s.potential, ctx.analysis),
        solverFor(ctx.s, BranchSet::AllBonds));
    const auto qnl = globalMinimize(
        EnergyModel::qnl(cfg, ctx.s.potential, ctx.analysis, mesh),
        solverFor(ctx.s, BranchSet::RepatomIntervals));
    RowOutcome out;
    const std::string region =
        qnl.cracks.bonds.empty()
            ? "None"
            : regionName(qnl.cracks.bonds.front().region);
    out.summary = {{"spacing", spacing},
                   {"n", n},
                   {"r_hat", desc.rHat},
                   {"l_hat", desc.lHat},
                   {"crackRegionQNL", region},
                   {"crackLocationQNL", firstCrackLocation(qnl)},
                   {"crackLocationAtomistic", firstCrackLocation(atom)},
                   {"minAtomistic", atom.energy},
                   {"minQNL", qnl.energy},
                   {"firstOrderAtomistic", atom.firstOrder},
                   {"firstOrderQNL", qnl.firstOrder}};
    out.ok = atom.converged && qnl.converged;
    out.line = "fracture-map " + ctx.s.name + " s=" + std::to_string(spacing) +
               " n=" + std::to_string(n) + ": crack " + region +
               (out.ok ? "" : " [not converged]");
    return out;
  }, outcomes);

  std::string csv =
      "spacing,n,r_hat,l_hat,crackRegionQNL,crackLocationQNL,"
      "crackLocationAtomistic,minAtomistic,minQNL,firstOrderAtomistic,"
      "firstOrderQNL\n";
  json rows = json::array();
  for (const auto& r : outcomes) {
    const auto& s = r.summary;
    csv += std::to_string(s["spacing"].get<int>()) + "," +
           std::to_string(s["n"].get<int>()) + "," +
           std::to_string(s["r_hat"].get<int>()) + "," +
           std::to_string(s["l_hat"].get<int>()) + "," +
           s["crackRegionQNL"].get<std::string>();
    for (const char* key :
         {"crackLocationQNL", "crackLocationAtomistic", "minAtomistic",
          "minQNL", "firstOrderAtomistic", "firstOrderQNL"}) {
      csv += ',';
      csv += formatDouble(s[key].get<double>());
    }
    csv += '\n';
    rows.push_back(s);
    std::cout << r.line << "\n";
    if (!r.ok) ctx.solverTrouble = true;
  }
  json j = baseJson(ctx.s, Task::FractureMap);
  j["rows"] = rows;
  ctx.write("fracture-map.json", j.dump(2) + "\n");
  ctx.write("fracture-map.csv", csv);
}

void runLimitCompare(TaskContext& ctx) {
  const ChainConfig cfg = chainFor(ctx.s, ctx.s.nList.back());
  const auto [mesh, desc] = meshFromRule(cfg, ctx.s.meshRule);
  const LimitMeshDescriptor md = LimitMeshDescriptor::fromMesh(cfg, desc);
  const LimitTable table =
      buildLimitTable(ctx.s.potential, ctx.analysis, ctx.s.u0_1, ctx.s.u1_1,
                      neededBifWeights(md), ctx.s.limitsTol);
  const MinLimitResult atom = minLimit(LimitModel::Atomistic, table, md);
  const MinLimitResult qc = minLimit(LimitModel::QC, table, md);

  json j = baseJson(ctx.s, Task::LimitCompare);
  j["mesh_descriptor"] = {{"r_hat", md.rHat},
                          {"l_hat", md.lHat},
                          {"b0", md.b0},
                          {"b1", md.b1}};
  j["table"] = toJson(table);
  j["min_atomistic"] = {{"value", atom.value}, {"jumps", toJson(atom.argmin)}};
  j["min_qc"] = {{"value", qc.value}, {"jumps", toJson(qc.argmin)}};
  j["difference"] = atom.value - qc.value;
  ctx.write("limit-compare.json", j.dump(2) + "\n");
  std::cout << "limit-compare " << ctx.s.name << ": atomistic "
            << formatDouble(atom.value) << " qc " << formatDouble(qc.value)
            << "\n";
  if (!table.allConverged) ctx.solverTrouble = true;
}

}  // namespace

int runScenario(const std::string& configPath, const RunOptions& opts) {
  LoadedScenario loaded = loadScenario(configPath);
  if (opts.taskOverride) loaded.scenario.task = *opts.taskOverride;

  TaskContext ctx{loaded.scenario, loaded.analysis, opts};
  try {
    switch (loaded.scenario.task) {
      case Task::PotentialCheck: runPotentialCheck(ctx); break;
      case Task::Minimize: runMinimize(ctx); break;
      case Task::Converge: runConverge(ctx); break;
      case Task::BoundaryLayers: runBoundaryLayers(ctx); break;
      case Task::FractureMap: runFractureMap(ctx); break;
      case Task::LimitCompare: runLimitCompare(ctx); break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw TaskError(e.what());
  }
  return ctx.solverTrouble ? 1 : 0;
}

}  // namespace qnl
