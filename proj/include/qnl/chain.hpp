#ifndef QNL_CHAIN_HPP
#define QNL_CHAIN_HPP

#include "qnl/potentials.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace qnl {

using Sparse = Eigen::SparseMatrix<double>;

/// Scaled chain on [0,1]: n bonds, atoms 0..n, lattice spacing 1/n.
/// Boundary slopes pin atoms 0, 1, n-1, n:
///   u^0 = 0, u^1 = lambda u0_1, u^{n-1} = ell - lambda u1_1, u^n = ell.
struct ChainConfig {
  int n = 8;
  double ell = 1.0;
  double u0_1 = 1.0;
  double u1_1 = 1.0;

  double lambda() const { return 1.0 / double(n); }
  void validate() const;
};

/// Atomistic window [0,k1] u [k2,n] plus repatoms. The boundary-condition
/// atoms 0, 1, n-1, n are always repatoms.
struct MeshConfig {
  int k1 = 0;
  int k2 = 0;
  std::vector<int> repatoms;  // sorted, contains {0..k1} and {k2..n}

  static MeshConfig full(const ChainConfig& cfg);
  void validate(const ChainConfig& cfg) const;
  std::vector<int> freeRepatoms(const ChainConfig& cfg) const;
};

/// Finite-n stand-ins for the limiting mesh descriptors: repatom gaps in
/// the continuum window and at the two coupling interfaces.
struct MeshDescriptor {
  int rHat = 1;        // first repatom gap past k1
  int lHat = 1;        // last repatom gap before k2
  int minSpacing = 1;  // minimal gap strictly inside (k1, k2)
  std::vector<std::pair<int, int>> continuumIntervals;  // (start, gap)
  double atomisticFractionLeft = 0.0;   // k1 / n
  double atomisticFractionRight = 0.0;  // (n - k2) / n

  int spacingAt(double x, const ChainConfig& cfg) const;
};

MeshDescriptor describeMesh(const ChainConfig& cfg, const MeshConfig& mesh);

// Deformations are plain position vectors u^0..u^n.
Vector affineDeformation(const ChainConfig& cfg, double slope);
void applyBoundaryConditions(const ChainConfig& cfg, Vector& u);
bool boundarySatisfied(const ChainConfig& cfg, const Vector& u,
                       double tol = 1e-12);

double energyAtomistic(const PotentialSpec& pot, const ChainConfig& cfg,
                       const Vector& u, bool enforceBC);
double energyQNL(const PotentialSpec& pot, const ChainConfig& cfg,
                 const MeshConfig& mesh, const Vector& u, bool enforceBC);

/// Gradients with respect to the interior atoms 2..n-2 (size n-3).
Vector gradAtomistic(const PotentialSpec& pot, const ChainConfig& cfg,
                     const Vector& u);
Vector gradQNL(const PotentialSpec& pot, const ChainConfig& cfg,
               const MeshConfig& mesh, const Vector& u);

/// Unconstrained gradients with respect to every atom 0..n; used by the
/// repatom chain rule.
Vector gradAtomisticFull(const PotentialSpec& pot, const ChainConfig& cfg,
                         const Vector& u);
Vector gradQNLFull(const PotentialSpec& pot, const ChainConfig& cfg,
                   const MeshConfig& mesh, const Vector& u);

/// Piecewise-affine interpolation between repatom values and its inverse.
Vector lift(const MeshConfig& mesh, const Vector& repatomValues, int n);
Vector restrictToRepatoms(const MeshConfig& mesh, const Vector& u);
bool isInReducedSpace(const MeshConfig& mesh, const Vector& u,
                      double tol = 1e-10);

/// QNL energy of lift(r) plus its gradient over the free repatoms.
std::pair<double, Vector> reducedEnergyAndGrad(const PotentialSpec& pot,
                                               const ChainConfig& cfg,
                                               const MeshConfig& mesh,
                                               const Vector& repatomValues);

double firstOrderEnergy(const PotentialAnalysis& analysis,
                        const PotentialSpec& pot, const ChainConfig& cfg,
                        double energy);

/// Both chain energies decompose into scaled pair terms; the list drives
/// the Hessian assembly and the exhaustive-search oracle.
struct EnergyTerm {
  enum Type { J1Bond, J2Bond, J2Double } type;
  int atom;  // bond index, or start of the second-neighbour pair
  double weight;

  int rightmostAtom() const { return type == J2Double ? atom + 2 : atom + 1; }
};

std::vector<EnergyTerm> atomisticTerms(const ChainConfig& cfg);
std::vector<EnergyTerm> qnlTerms(const ChainConfig& cfg,
                                 const MeshConfig& mesh);

/// Hessian with respect to the interior atoms 2..n-2.
Sparse hessianAtomistic(const PotentialSpec& pot, const ChainConfig& cfg,
                        const Vector& u);
/// Hessian of the reduced coupled energy with respect to free repatoms.
Sparse hessianReducedQNL(const PotentialSpec& pot, const ChainConfig& cfg,
                         const MeshConfig& mesh, const Vector& u);

/// Per-cell excess over the tangent of the convex envelope at ell. The
/// sigma terms carry the atomistic windows, the mu terms the Cauchy-Born
/// window; both are nonnegative and reassemble the first-order energy.
struct EnergyBreakdown {
  std::vector<int> sigmaIndices;
  std::vector<double> sigma;
  std::vector<int> muIndices;
  std::vector<double> mu;
  // Boundary-slope halves and the affine correction of the reassembly.
  double halfJ1Left = 0.0;
  double halfJ1Right = 0.0;
  double minusJ0StarStar = 0.0;
  double tangentCorrection = 0.0;
  double firstOrder = 0.0;
  std::vector<double> cellEnergies;  // E_n^i(u), i = 0..n-2
};

EnergyBreakdown sigmaMuBreakdown(const PotentialAnalysis& analysis,
                                 const PotentialSpec& pot,
                                 const ChainConfig& cfg,
                                 const MeshConfig& mesh, const Vector& u);

}  // namespace qnl

#endif
