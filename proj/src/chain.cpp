#include "qnl/chain.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace qnl {

void ChainConfig::validate() const {
  if (n < 8) throw DomainError("ChainConfig: n must be at least 8");
  if (!(ell > 0.0) || !(u0_1 > 0.0) || !(u1_1 > 0.0))
    throw DomainError("ChainConfig: ell, u0_1, u1_1 must be positive");
}

MeshConfig MeshConfig::full(const ChainConfig& cfg) {
  MeshConfig m;
  m.k1 = std::max(1, cfg.n / 4);
  m.k2 = cfg.n - m.k1;
  m.repatoms.resize(cfg.n + 1);
  for (int i = 0; i <= cfg.n; ++i) m.repatoms[i] = i;
  return m;
}

void MeshConfig::validate(const ChainConfig& cfg) const {
  if (!(0 < k1 && k1 < k2 && k2 < cfg.n - 2))
    throw DomainError("MeshConfig: need 0 < k1 < k2 < n-2");
  if (!std::is_sorted(repatoms.begin(), repatoms.end()) ||
      std::adjacent_find(repatoms.begin(), repatoms.end()) != repatoms.end())
    throw DomainError("MeshConfig: repatoms must be strictly increasing");
  std::set<int> t(repatoms.begin(), repatoms.end());
  for (int i = 0; i <= k1; ++i)
    if (!t.count(i)) throw DomainError("MeshConfig: {0..k1} must be repatoms");
  for (int i = k2; i <= cfg.n; ++i)
    if (!t.count(i)) throw DomainError("MeshConfig: {k2..n} must be repatoms");
}

std::vector<int> MeshConfig::freeRepatoms(const ChainConfig& cfg) const {
  std::vector<int> free;
  for (int t : repatoms)
    if (t != 0 && t != 1 && t != cfg.n - 1 && t != cfg.n) free.push_back(t);
  return free;
}

MeshDescriptor describeMesh(const ChainConfig& cfg, const MeshConfig& mesh) {
  MeshDescriptor d;
  d.atomisticFractionLeft = double(mesh.k1) / double(cfg.n);
  d.atomisticFractionRight = double(cfg.n - mesh.k2) / double(cfg.n);
  d.minSpacing = 1;
  int firstPastK1 = mesh.k2, lastBeforeK2 = mesh.k1;
  bool any = false;
  for (std::size_t i = 0; i + 1 < mesh.repatoms.size(); ++i) {
    const int a = mesh.repatoms[i], b = mesh.repatoms[i + 1];
    if (a >= mesh.k1 && b <= mesh.k2) {
      if (a > mesh.k1 && a < firstPastK1 && a < mesh.k2) firstPastK1 = a;
      if (b < mesh.k2 && b > lastBeforeK2) lastBeforeK2 = b;
      if (a > mesh.k1 && b < mesh.k2) {
        d.continuumIntervals.emplace_back(a, b - a);
        d.minSpacing = any ? std::min(d.minSpacing, b - a) : b - a;
        any = true;
      }
    }
  }
  if (!any) d.minSpacing = firstPastK1 >= mesh.k2 ? mesh.k2 - mesh.k1 : 1;
  d.rHat = (firstPastK1 < mesh.k2 ? firstPastK1 : mesh.k2) - mesh.k1;
  d.lHat = mesh.k2 - (lastBeforeK2 > mesh.k1 ? lastBeforeK2 : mesh.k1);
  return d;
}

int MeshDescriptor::spacingAt(double x, const ChainConfig& cfg) const {
  if (continuumIntervals.empty()) return minSpacing;
  const double atom = x * cfg.n;
  int best = continuumIntervals.front().second;
  double bestDist = kInf;
  for (const auto& [start, gap] : continuumIntervals) {
    const double mid = start + 0.5 * gap;
    const double dist = std::abs(mid - atom);
    if (dist < bestDist) {
      bestDist = dist;
      best = gap;
    }
  }
  return best;
}

Vector affineDeformation(const ChainConfig& cfg, double slope) {
  Vector u(cfg.n + 1);
  const double lam = cfg.lambda();
  for (int i = 0; i <= cfg.n; ++i) u[i] = slope * lam * i;
  applyBoundaryConditions(cfg, u);
  return u;
}

void applyBoundaryConditions(const ChainConfig& cfg, Vector& u) {
  const double lam = cfg.lambda();
  u[0] = 0.0;
  u[1] = lam * cfg.u0_1;
  u[cfg.n - 1] = cfg.ell - lam * cfg.u1_1;
  u[cfg.n] = cfg.ell;
}

bool boundarySatisfied(const ChainConfig& cfg, const Vector& u, double tol) {
  const double lam = cfg.lambda();
  return std::abs(u[0]) <= tol && std::abs(u[1] - lam * cfg.u0_1) <= tol &&
         std::abs(u[cfg.n - 1] - (cfg.ell - lam * cfg.u1_1)) <= tol &&
         std::abs(u[cfg.n] - cfg.ell) <= tol;
}

namespace {

// Strain of bond i and of the double bond (i, i+2).
inline double strain(const Vector& u, double invLam, int i) {
  return (u[i + 1] - u[i]) * invLam;
}
inline double doubleStrain(const Vector& u, double invLam, int i) {
  return 0.5 * (u[i + 2] - u[i]) * invLam;
}

}  // namespace

double energyAtomistic(const PotentialSpec& pot, const ChainConfig& cfg,
                       const Vector& u, bool enforceBC) {
  if (u.size() != cfg.n + 1)
    throw DomainError("energyAtomistic: deformation size mismatch");
  if (enforceBC && !boundarySatisfied(cfg, u)) return kInf;
  const double lam = cfg.lambda();
  const double invLam = 1.0 / lam;
  double e = 0.0;
  for (int i = 0; i < cfg.n; ++i) {
    const double v = evalJ(pot, Which::J1, strain(u, invLam, i), 0);
    if (v == kInf) return kInf;
    e += lam * v;
  }
  for (int i = 0; i <= cfg.n - 2; ++i) {
    const double v = evalJ(pot, Which::J2, doubleStrain(u, invLam, i), 0);
    if (v == kInf) return kInf;
    e += lam * v;
  }
  return e;
}

double energyQNL(const PotentialSpec& pot, const ChainConfig& cfg,
                 const MeshConfig& mesh, const Vector& u, bool enforceBC) {
  if (u.size() != cfg.n + 1)
    throw DomainError("energyQNL: deformation size mismatch");
  if (enforceBC && !boundarySatisfied(cfg, u)) return kInf;
  const double lam = cfg.lambda();
  const double invLam = 1.0 / lam;
  const int k1 = mesh.k1, k2 = mesh.k2;

  // Cell form of the coupled energy: atomistic cells in the two windows,
  // half-weight Cauchy-Born bonds at the interfaces, full Cauchy-Born in
  // between, and the two half nearest-neighbour boundary bonds.
  const auto J1 = [&](int bond) {
    return evalJ(pot, Which::J1, strain(u, invLam, bond), 0);
  };
  const auto JCB = [&](int bond) {
    return evalJ(pot, Which::JCB, strain(u, invLam, bond), 0);
  };

  double e = 0.0;
  e += 0.5 * lam * J1(0);
  for (int i = 0; i <= k1 - 1; ++i) {
    const double cell = evalJ(pot, Which::J2, doubleStrain(u, invLam, i), 0) +
                        0.5 * (J1(i) + J1(i + 1));
    if (!std::isfinite(cell)) return kInf;
    e += lam * cell;
  }
  e += 0.5 * lam * JCB(k1);
  for (int i = k1 + 1; i <= k2 - 2; ++i) {
    const double v = JCB(i);
    if (!std::isfinite(v)) return kInf;
    e += lam * v;
  }
  e += 0.5 * lam * JCB(k2 - 1);
  for (int i = k2 - 1; i <= cfg.n - 2; ++i) {
    const double cell = evalJ(pot, Which::J2, doubleStrain(u, invLam, i), 0) +
                        0.5 * (J1(i) + J1(i + 1));
    if (!std::isfinite(cell)) return kInf;
    e += lam * cell;
  }
  e += 0.5 * lam * J1(cfg.n - 1);
  return std::isfinite(e) ? e : kInf;
}

Vector gradAtomisticFull(const PotentialSpec& pot, const ChainConfig& cfg,
                         const Vector& u) {
  const double invLam = 1.0 / cfg.lambda();
  Vector g = Vector::Zero(cfg.n + 1);
  for (int i = 0; i < cfg.n; ++i) {
    const double d = evalJ(pot, Which::J1, strain(u, invLam, i), 1);
    g[i] -= d;
    g[i + 1] += d;
  }
  for (int i = 0; i <= cfg.n - 2; ++i) {
    const double d =
        0.5 * evalJ(pot, Which::J2, doubleStrain(u, invLam, i), 1);
    g[i] -= d;
    g[i + 2] += d;
  }
  return g;
}

Vector gradQNLFull(const PotentialSpec& pot, const ChainConfig& cfg,
                   const MeshConfig& mesh, const Vector& u) {
  const double invLam = 1.0 / cfg.lambda();
  const int k1 = mesh.k1, k2 = mesh.k2;
  Vector g = Vector::Zero(cfg.n + 1);

  // Accumulated per-bond J1 weights: full everywhere once cell halves and
  // boundary halves are combined.
  const auto addBondJ1 = [&](int bond, double w) {
    const double d = w * evalJ(pot, Which::J1, strain(u, invLam, bond), 1);
    g[bond] -= d;
    g[bond + 1] += d;
  };
  const auto addBondJ2 = [&](int bond, double w) {
    const double d = w * evalJ(pot, Which::J2, strain(u, invLam, bond), 1);
    g[bond] -= d;
    g[bond + 1] += d;
  };
  const auto addDouble = [&](int i) {
    const double d =
        0.5 * evalJ(pot, Which::J2, doubleStrain(u, invLam, i), 1);
    g[i] -= d;
    g[i + 2] += d;
  };

  for (int i = 0; i < cfg.n; ++i) addBondJ1(i, 1.0);
  for (int i = 0; i <= k1 - 1; ++i) addDouble(i);
  for (int i = k2 - 1; i <= cfg.n - 2; ++i) addDouble(i);
  addBondJ2(k1, 0.5);
  for (int i = k1 + 1; i <= k2 - 2; ++i) addBondJ2(i, 1.0);
  addBondJ2(k2 - 1, 0.5);
  return g;
}

namespace {

Vector interiorSlice(const ChainConfig& cfg, const Vector& full) {
  return full.segment(2, cfg.n - 3);
}

}  // namespace

Vector gradAtomistic(const PotentialSpec& pot, const ChainConfig& cfg,
                     const Vector& u) {
  return interiorSlice(cfg, gradAtomisticFull(pot, cfg, u));
}

Vector gradQNL(const PotentialSpec& pot, const ChainConfig& cfg,
               const MeshConfig& mesh, const Vector& u) {
  return interiorSlice(cfg, gradQNLFull(pot, cfg, mesh, u));
}

Vector lift(const MeshConfig& mesh, const Vector& repatomValues, int n) {
  if (repatomValues.size() != static_cast<Eigen::Index>(mesh.repatoms.size()))
    throw DomainError("lift: one value per repatom required");
  Vector u(n + 1);
  for (std::size_t j = 0; j + 1 < mesh.repatoms.size(); ++j) {
    const int a = mesh.repatoms[j], b = mesh.repatoms[j + 1];
    const double va = repatomValues[j], vb = repatomValues[j + 1];
    for (int i = a; i < b; ++i)
      u[i] = va + (vb - va) * double(i - a) / double(b - a);
  }
  u[n] = repatomValues[repatomValues.size() - 1];
  return u;
}

Vector restrictToRepatoms(const MeshConfig& mesh, const Vector& u) {
  Vector r(mesh.repatoms.size());
  for (std::size_t j = 0; j < mesh.repatoms.size(); ++j)
    r[j] = u[mesh.repatoms[j]];
  return r;
}

bool isInReducedSpace(const MeshConfig& mesh, const Vector& u, double tol) {
  const Vector lifted =
      lift(mesh, restrictToRepatoms(mesh, u), int(u.size()) - 1);
  return (lifted - u).lpNorm<Eigen::Infinity>() <= tol;
}

std::pair<double, Vector> reducedEnergyAndGrad(const PotentialSpec& pot,
                                               const ChainConfig& cfg,
                                               const MeshConfig& mesh,
                                               const Vector& repatomValues) {
  const Vector u = lift(mesh, repatomValues, cfg.n);
  const double e = energyQNL(pot, cfg, mesh, u, false);
  const auto free = mesh.freeRepatoms(cfg);
  if (!std::isfinite(e)) {
    return {kInf, Vector::Zero(free.size())};
  }
  const Vector gFull = gradQNLFull(pot, cfg, mesh, u);

  // Chain rule through the interpolation: each repatom carries its own
  // entry plus hat-weighted shares of the interpolated atoms on both sides.
  Vector g = Vector::Zero(free.size());
  for (std::size_t fi = 0; fi < free.size(); ++fi) {
    const int t = free[fi];
    const auto it =
        std::lower_bound(mesh.repatoms.begin(), mesh.repatoms.end(), t);
    const std::size_t j = std::size_t(it - mesh.repatoms.begin());
    double acc = gFull[t];
    if (j > 0) {
      const int a = mesh.repatoms[j - 1];
      for (int i = a + 1; i < t; ++i)
        acc += gFull[i] * double(i - a) / double(t - a);
    }
    if (j + 1 < mesh.repatoms.size()) {
      const int b = mesh.repatoms[j + 1];
      for (int i = t + 1; i < b; ++i)
        acc += gFull[i] * double(b - i) / double(b - t);
    }
    g[fi] = acc;
  }
  return {e, g};
}

double firstOrderEnergy(const PotentialAnalysis& analysis,
                        const PotentialSpec& pot, const ChainConfig& cfg,
                        double energy) {
  if (!std::isfinite(energy)) return kInf;
  return (energy - evalJ0StarStar(analysis, pot, cfg.ell)) / cfg.lambda();
}

std::vector<EnergyTerm> atomisticTerms(const ChainConfig& cfg) {
  std::vector<EnergyTerm> terms;
  for (int b = 0; b < cfg.n; ++b)
    terms.push_back({EnergyTerm::J1Bond, b, 1.0});
  for (int i = 0; i <= cfg.n - 2; ++i)
    terms.push_back({EnergyTerm::J2Double, i, 1.0});
  return terms;
}

std::vector<EnergyTerm> qnlTerms(const ChainConfig& cfg,
                                 const MeshConfig& mesh) {
  std::vector<EnergyTerm> terms;
  const int k1 = mesh.k1, k2 = mesh.k2;
  for (int b = 0; b < cfg.n; ++b)
    terms.push_back({EnergyTerm::J1Bond, b, 1.0});
  for (int i = 0; i <= k1 - 1; ++i)
    terms.push_back({EnergyTerm::J2Double, i, 1.0});
  for (int i = k2 - 1; i <= cfg.n - 2; ++i)
    terms.push_back({EnergyTerm::J2Double, i, 1.0});
  terms.push_back({EnergyTerm::J2Bond, k1, 0.5});
  for (int i = k1 + 1; i <= k2 - 2; ++i)
    terms.push_back({EnergyTerm::J2Bond, i, 1.0});
  terms.push_back({EnergyTerm::J2Bond, k2 - 1, 0.5});
  return terms;
}

namespace {

// Each term contributes c * (e_q - e_p)(e_q - e_p)^T in atom coordinates;
// `columnsOf` maps an atom onto variable columns (identity for interior
// atoms, interpolation weights for repatom reductions, empty if pinned).
Sparse assembleHessian(
    const PotentialSpec& pot, const ChainConfig& cfg,
    const std::vector<EnergyTerm>& terms, const Vector& u, int cols,
    const std::function<void(int, std::vector<std::pair<int, double>>&)>&
        columnsOf) {
  const double lam = cfg.lambda();
  const double invLam = 1.0 / lam;
  std::vector<Eigen::Triplet<double>> trips;
  std::vector<std::pair<int, double>> psi, cq;
  for (const EnergyTerm& t : terms) {
    int p = t.atom, q;
    double c;
    if (t.type == EnergyTerm::J2Double) {
      q = t.atom + 2;
      const double d = 0.5 * (u[q] - u[p]) * invLam;
      c = t.weight * 0.25 * invLam * evalJ(pot, Which::J2, d, 2);
    } else {
      q = t.atom + 1;
      const double s = (u[q] - u[p]) * invLam;
      c = t.weight * invLam *
          evalJ(pot, t.type == EnergyTerm::J1Bond ? Which::J1 : Which::J2, s,
                2);
    }
    if (c == 0.0) continue;
    psi.clear();
    columnsOf(q, psi);
    cq.clear();
    columnsOf(p, cq);
    for (auto& [col, w] : cq) psi.emplace_back(col, -w);
    for (const auto& [ci, wi] : psi)
      for (const auto& [cj, wj] : psi)
        trips.emplace_back(ci, cj, c * wi * wj);
  }
  Sparse H(cols, cols);
  H.setFromTriplets(trips.begin(), trips.end());
  return H;
}

}  // namespace

Sparse hessianAtomistic(const PotentialSpec& pot, const ChainConfig& cfg,
                        const Vector& u) {
  const int cols = cfg.n - 3;
  return assembleHessian(
      pot, cfg, atomisticTerms(cfg), u, cols,
      [&](int atom, std::vector<std::pair<int, double>>& out) {
        if (atom >= 2 && atom <= cfg.n - 2) out.emplace_back(atom - 2, 1.0);
      });
}

Sparse hessianReducedQNL(const PotentialSpec& pot, const ChainConfig& cfg,
                         const MeshConfig& mesh, const Vector& u) {
  const auto free = mesh.freeRepatoms(cfg);
  std::vector<int> columnOfRepatom(cfg.n + 1, -1);
  for (std::size_t i = 0; i < free.size(); ++i) columnOfRepatom[free[i]] = int(i);

  return assembleHessian(
      pot, cfg, qnlTerms(cfg, mesh), u, int(free.size()),
      [&](int atom, std::vector<std::pair<int, double>>& out) {
        const auto it = std::lower_bound(mesh.repatoms.begin(),
                                         mesh.repatoms.end(), atom);
        if (it != mesh.repatoms.end() && *it == atom) {
          const int col = columnOfRepatom[atom];
          if (col >= 0) out.emplace_back(col, 1.0);
          return;
        }
        const int b = *it;
        const int a = *(it - 1);
        const double wb = double(atom - a) / double(b - a);
        const int colA = columnOfRepatom[a], colB = columnOfRepatom[b];
        if (colA >= 0) out.emplace_back(colA, 1.0 - wb);
        if (colB >= 0) out.emplace_back(colB, wb);
      });
}

EnergyBreakdown sigmaMuBreakdown(const PotentialAnalysis& analysis,
                                 const PotentialSpec& pot,
                                 const ChainConfig& cfg,
                                 const MeshConfig& mesh, const Vector& u) {
  if (!boundarySatisfied(cfg, u))
    throw DomainError("sigmaMuBreakdown: boundary conditions violated");
  const double lam = cfg.lambda();
  const double invLam = 1.0 / lam;
  const double ell = cfg.ell;
  const double j0ss = evalJ0StarStar(analysis, pot, ell);
  const double j0ssPrime = evalJ0StarStarPrime(analysis, pot, ell);
  const int k1 = mesh.k1, k2 = mesh.k2;

  EnergyBreakdown b;
  b.cellEnergies.reserve(cfg.n - 1);
  for (int i = 0; i <= cfg.n - 2; ++i) {
    const double cell =
        evalJ(pot, Which::J2, doubleStrain(u, invLam, i), 0) +
        0.5 * (evalJ(pot, Which::J1, strain(u, invLam, i), 0) +
               evalJ(pot, Which::J1, strain(u, invLam, i + 1), 0));
    b.cellEnergies.push_back(cell);
  }

  const auto sigma = [&](int i) {
    return b.cellEnergies[i] - j0ss -
           j0ssPrime * (doubleStrain(u, invLam, i) - ell);
  };
  const auto mu = [&](int i) {
    return evalJ(pot, Which::JCB, strain(u, invLam, i), 0) - j0ss -
           j0ssPrime * (strain(u, invLam, i) - ell);
  };

  double total = 0.0;
  b.halfJ1Left = 0.5 * evalJ(pot, Which::J1, cfg.u0_1, 0);
  b.halfJ1Right = 0.5 * evalJ(pot, Which::J1, cfg.u1_1, 0);
  total += b.halfJ1Left + b.halfJ1Right;
  for (int i = 0; i <= k1 - 1; ++i) {
    b.sigmaIndices.push_back(i);
    b.sigma.push_back(sigma(i));
    total += b.sigma.back();
  }
  b.muIndices.push_back(k1);
  b.mu.push_back(mu(k1));
  total += 0.5 * b.mu.back();
  for (int i = k1 + 1; i <= k2 - 2; ++i) {
    b.muIndices.push_back(i);
    b.mu.push_back(mu(i));
    total += b.mu.back();
  }
  b.muIndices.push_back(k2 - 1);
  b.mu.push_back(mu(k2 - 1));
  total += 0.5 * b.mu.back();
  for (int i = k2 - 1; i <= cfg.n - 2; ++i) {
    b.sigmaIndices.push_back(i);
    b.sigma.push_back(sigma(i));
    total += b.sigma.back();
  }
  b.minusJ0StarStar = -j0ss;
  b.tangentCorrection =
      -j0ssPrime * (0.5 * (cfg.u0_1 + cfg.u1_1) - ell);
  total += b.minusJ0StarStar + b.tangentCorrection;
  b.firstOrder = total;
  return b;
}

}  // namespace qnl
