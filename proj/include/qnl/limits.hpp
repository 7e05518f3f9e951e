#ifndef QNL_LIMITS_HPP
#define QNL_LIMITS_HPP

#include "qnl/chain.hpp"

#include <map>
#include <vector>

namespace qnl {

/// Sentinel for an unbounded repatom gap ("the limit is +infinity").
inline constexpr int kInfiniteGap = std::numeric_limits<int>::max();

enum class BLKind {
  ElasticB,  // B(theta, ell): clamped slope-ell tail, first bond theta
  BGamma,    // B(gamma): free surface, slope-gamma tail
  Bb,        // B_b(theta): fracture at a boundary point, theta next to it
  BIF        // B_IF(m): fracture at the coupling interface, weight (2m+1)/2
};

struct BLQuery {
  BLKind kind = BLKind::BGamma;
  double theta = 0.0;  // ElasticB, Bb
  double ell = 0.0;    // ElasticB only, requires 0 < ell <= gamma
  int m = 0;           // BIF only
  int nStart = 8;
  int nCap = 1 << 14;
  double tol = 1e-10;
};

struct BLResult {
  double value = kInf;
  int nUsed = 0;
  double truncationEstimate = kInf;
  bool converged = false;
};

BLResult solveBoundaryLayer(const BLQuery& q, const PotentialAnalysis& analysis,
                            const PotentialSpec& spec);

/// All limiting boundary-layer and jump energies for one pair of boundary
/// slopes, plus the exact composites built from them.
struct LimitTable {
  double theta0 = 0.0, theta1 = 0.0;
  BLResult elastic0, elastic1;  // B(theta0, gamma), B(theta1, gamma)
  BLResult bGamma;              // B(gamma)
  BLResult bb0, bb1;            // B_b(theta0), B_b(theta1)
  std::map<int, BLResult> bIF;  // m -> B_IF(m)
  double bBJ0 = 0.0, bBJ1 = 0.0;  // boundary-jump energies
  double bIJ = 0.0;               // interior-jump energy
  double j0gamma = 0.0;
  bool allConverged = false;

  double bIFValue(int m) const;  // B_IF(m), with B_IF(inf) = B(gamma)
  double bAIF(int n) const;      // B_IF(n-1) + B(gamma) - 2 J0(gamma)
  double bTildeIFJ(int n, int k) const;
  double bIFJ(int n, int k, double theta) const;  // theta must be theta0/theta1

 private:
  double elasticFor(double theta) const;
  double bBJFor(double theta) const;
};

/// Exact arithmetic composition of already-solved boundary layers.
LimitTable composites(const PotentialSpec& spec, double theta0, double theta1,
                      const BLResult& elastic0, const BLResult& elastic1,
                      const BLResult& bGamma, const BLResult& bb0,
                      const BLResult& bb1, const std::map<int, BLResult>& bIF,
                      double j0gamma);

/// Solves every constituent problem and composes the table. `bifMs` lists
/// the interface weights needed downstream (deduplicated, m >= 0 only).
LimitTable buildLimitTable(const PotentialSpec& spec,
                           const PotentialAnalysis& analysis, double theta0,
                           double theta1, std::vector<int> bifMs,
                           double tol = 1e-10);

/// Mesh summary entering the first-order QC limit.
struct LimitMeshDescriptor {
  int rHat = kInfiniteGap;
  int lHat = kInfiniteGap;
  int b0 = kInfiniteGap;  // repatom gap near macroscopic point 0
  int b1 = kInfiniteGap;  // near point 1
  std::vector<int> interiorGaps;  // distinct b values available in (0,1)

  static LimitMeshDescriptor fromMesh(const ChainConfig& cfg,
                                      const MeshDescriptor& d);
};

struct JumpPoint {
  enum Kind { Boundary0, Boundary1, Interior } kind = Interior;
  double x = 0.5;        // macroscopic location, interior only
  int b = kInfiniteGap;  // repatom gap at an interior jump (QC functional)
};

struct JumpSpec {
  std::vector<JumpPoint> jumps;
};

struct LimitValue {
  bool feasible = false;
  double value = kInf;
};

/// First-order limit of the fully atomistic chain for a fractured state.
LimitValue limitEnergyAtomistic(const JumpSpec& jump, const LimitTable& table);

/// First-order limit of the coupled chain; the jump cost depends on the
/// local repatom gap and on the interface descriptors.
LimitValue limitEnergyQC(const JumpSpec& jump,
                         const LimitMeshDescriptor& meshDesc,
                         const LimitTable& table);

enum class LimitModel { Atomistic, QC };

struct MinLimitResult {
  double value = kInf;
  JumpSpec argmin;
};

/// Minimum of the first-order limit over single-jump states (multi-jump
/// states cost at least one extra positive jump energy).
MinLimitResult minLimit(LimitModel model, const LimitTable& table,
                        const LimitMeshDescriptor& meshDesc = {});

/// Elastic-regime limit value (ell <= gamma): two elastic boundary layers
/// plus the affine correction.
double elasticLimitValue(const PotentialSpec& spec, double theta0,
                         double theta1, double ell, const BLResult& elastic0,
                         const BLResult& elastic1);

}  // namespace qnl

#endif
