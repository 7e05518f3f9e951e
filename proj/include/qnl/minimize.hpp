#ifndef QNL_MINIMIZE_HPP
#define QNL_MINIMIZE_HPP

#include "qnl/chain.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qnl {

enum class ModelKind { Atomistic, QNL };

/// A chain energy together with its unknowns: all interior atoms for the
/// atomistic model, free repatom values for the coupled model.
struct EnergyModel {
  ModelKind kind = ModelKind::Atomistic;
  ChainConfig cfg;
  PotentialSpec pot;
  PotentialAnalysis analysis;
  std::optional<MeshConfig> mesh;

  static EnergyModel atomistic(const ChainConfig& cfg,
                               const PotentialSpec& pot,
                               const PotentialAnalysis& analysis);
  static EnergyModel qnl(const ChainConfig& cfg, const PotentialSpec& pot,
                         const PotentialAnalysis& analysis,
                         const MeshConfig& mesh);

  int dofCount() const;
  Vector extract(const Vector& u) const;   // full deformation -> unknowns
  Vector embed(const Vector& x) const;     // unknowns -> full deformation
  double energy(const Vector& u) const;    // of a full deformation
};

enum class BranchSet { ElasticOnly, AllBonds, RepatomIntervals };

struct MinimizeOptions {
  double gradTol = 1e-10;
  int maxIter = 100000;
  double crackStrainFactor = 2.0;  // cracks flagged where strain > factor*gamma
  BranchSet branchSet = BranchSet::AllBonds;
  int threads = 1;
};

enum class Region { LeftAtomistic, Interface, Continuum, RightAtomistic,
                    Boundary };

const char* regionName(Region r);

struct CrackBond {
  int bond = 0;
  double strain = 0.0;
  double location = 0.0;  // bond / n
  Region region = Region::Continuum;
  double jump = 0.0;  // opening beyond the gamma lattice gap
};

struct CrackReport {
  std::vector<CrackBond> bonds;
  int eventCount = 0;  // maximal runs of adjacent flagged bonds
};

struct BranchRecord {
  std::string start;
  double energy = kInf;
  int iterations = 0;
  bool converged = false;
};

struct MinimizeResult {
  Vector u;
  double energy = kInf;
  double firstOrder = kInf;
  CrackReport cracks;
  int iterations = 0;
  bool converged = false;
  bool lineSearchStalled = false;
  std::string branch;
  std::vector<BranchRecord> branchLog;
};

/// Projected quasi-Newton descent from one start (given as a full
/// deformation; for the coupled model it is first restricted to the mesh).
MinimizeResult localMinimize(const EnergyModel& model, const Vector& startFull,
                             const MinimizeOptions& opts);

/// Piecewise construction at slope gamma with the surplus ell - gamma opened
/// across one bond; boundary rows stay exact. Bond indices are clamped to
/// the free range [1, n-2] since bonds 0 and n-1 are fixed by the boundary
/// slopes.
Vector crackStart(const ChainConfig& cfg, double gamma, int bondIndex);

/// Elastic start plus one descent per candidate crack site; smallest energy
/// wins, ties go to the elastic branch and then to the smallest bond index.
MinimizeResult globalMinimize(const EnergyModel& model,
                              const MinimizeOptions& opts);

CrackReport detectCracks(const ChainConfig& cfg, const MeshConfig& mesh,
                         double gamma, const Vector& u,
                         const MinimizeOptions& opts);

struct OracleGrid {
  int pointsPerVar = 201;
  int maxFreeVars = 24;
  int maxPointsPerVar = 1025;
  int topPerLayer = 6;  // pair states expanded per layer before polishing
};

struct OracleResult {
  double gridEnergy = kInf;  // exact minimum over the product grid
  double energy = kInf;      // after local polish
  Vector u;
};

/// Exhaustive search over per-unknown position grids in [0, ell], done by
/// dynamic programming over consecutive unknowns (the energy couples at
/// most three consecutive repatoms). Equivalent to enumerating the full
/// tensor grid; the best pair states of every layer are then expanded and
/// polished locally so that competing basins within the grid resolution
/// are all visited.
OracleResult bruteForceOracle(const EnergyModel& model,
                              const OracleGrid& grid = {});

}  // namespace qnl

#endif
