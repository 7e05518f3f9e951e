#ifndef QNL_SCENARIO_HPP
#define QNL_SCENARIO_HPP

#include "qnl/limits.hpp"
#include "qnl/minimize.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qnl {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Solver trouble inside a task run; partial outputs stay on disk.
struct TaskError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RuleInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Task {
  PotentialCheck,
  Minimize,
  Converge,
  BoundaryLayers,
  FractureMap,
  LimitCompare
};

const char* taskName(Task t);

struct MeshRule {
  enum Kind { Full, Window } kind = Window;
  int k1Fixed = 0;        // > 0: use this atom count for the window
  double k1Factor = 1.0;  // else k1 = round(k1Factor * sqrt(n))
  int spacing = 1;        // repatom gap in the continuum window
};

/// Window k1 ~ sqrt(n), k2 = n - k1, repatoms {0..k1}, every `spacing`-th
/// atom in between, {k2..n}. The last continuum gap is whatever remains.
std::pair<MeshConfig, MeshDescriptor> meshFromRule(const ChainConfig& cfg,
                                                   const MeshRule& rule);

struct Scenario {
  std::string name;
  Task task = Task::PotentialCheck;
  PotentialSpec potential;
  double ell = 0.0;
  double u0_1 = 0.0;
  double u1_1 = 0.0;
  std::vector<int> nList;
  MeshRule meshRule;
  std::vector<int> spacingList;
  MinimizeOptions solver;
  double limitsTol = 1e-10;
  int oraclePoints = 201;
  std::string outPrefix;
};

struct LoadedScenario {
  Scenario scenario;
  PotentialAnalysis analysis;
};

/// Reads a flat key=value file (# comments) or a JSON object with the same
/// keys. Boundary values accept symbolic forms like "1.5*gamma" or "delta1".
LoadedScenario loadScenario(const std::string& path);

struct RunOptions {
  std::string outDir = ".";
  bool force = false;
  int threads = 1;
  std::optional<Task> taskOverride;
};

/// Executes the scenario task, writing JSON/CSV artifacts under outDir.
/// Returns 0 on success, 1 when a solver failed to converge (partial
/// outputs are kept). Configuration problems throw ConfigError.
int runScenario(const std::string& configPath, const RunOptions& opts);

}  // namespace qnl

#endif
