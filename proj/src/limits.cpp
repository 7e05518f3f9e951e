#include "qnl/limits.hpp"

#include <algorithm>
#include <cmath>

namespace qnl {
namespace {

// One truncated boundary-layer problem: a finite window of lattice positions
// w_0..w_{L-1}, some of them free unknowns, the rest pinned or tied to the
// last free one (the clamped tail). Cell terms carry the sigma-form
// normalization c0 + c1 * (midstrain - ell).
struct Truncation {
  explicit Truncation(const PotentialSpec& s) : spec(s) {}

  const PotentialSpec& spec;
  double c0 = 0.0;           // J0**(ell) or J0(gamma)
  double c1 = 0.0;           // (J0**)'(ell), zero in the fracture kinds
  double ell = 0.0;          // tangent anchor
  int cells = 0;             // cell indices 0..cells-1
  std::vector<double> w;     // workspace, length cells + 2
  std::vector<int> freeIdx;  // positions of the unknowns in w
  int tailFrom = -1;         // if >= 0: w[i] = w[tailFrom] + (i - tailFrom)*slope
  double tailSlope = 0.0;
  int prefixBond = -1;       // index of the half-J1 boundary bond, or -1
  double penaltyWeight = 0.0;  // BIF: (2m+1)/2 on the last bond, JCB form
  bool penalty = false;

  void fill(const Vector& x) {
    for (std::size_t i = 0; i < freeIdx.size(); ++i) w[freeIdx[i]] = x[i];
    if (tailFrom >= 0)
      for (std::size_t i = tailFrom + 1; i < w.size(); ++i)
        w[i] = w[tailFrom] + (double(i) - tailFrom) * tailSlope;
  }

  double energy(Vector* grad, const Vector& x) {
    fill(x);
    std::vector<double> gw(w.size(), 0.0);
    double e = 0.0;
    if (prefixBond >= 0) {
      const int b = prefixBond;
      const double s = w[b + 1] - w[b];
      const double v = evalJ(spec, Which::J1, s, 0);
      if (v == kInf) return kInf;
      e += 0.5 * v;
      if (grad) {
        const double d = 0.5 * evalJ(spec, Which::J1, s, 1);
        gw[b] -= d;
        gw[b + 1] += d;
      }
    }
    for (int i = 0; i < cells; ++i) {
      const double mid = 0.5 * (w[i + 2] - w[i]);
      const double b1 = w[i + 1] - w[i];
      const double b2 = w[i + 2] - w[i + 1];
      const double v = evalJ(spec, Which::J2, mid, 0) +
                       0.5 * (evalJ(spec, Which::J1, b1, 0) +
                              evalJ(spec, Which::J1, b2, 0)) -
                       c0 - c1 * (mid - ell);
      if (!std::isfinite(v)) return kInf;
      e += v;
      if (grad) {
        const double dm = 0.5 * evalJ(spec, Which::J2, mid, 1) - 0.5 * c1;
        const double d1 = 0.5 * evalJ(spec, Which::J1, b1, 1);
        const double d2 = 0.5 * evalJ(spec, Which::J1, b2, 1);
        gw[i] += -dm - d1;
        gw[i + 1] += d1 - d2;
        gw[i + 2] += dm + d2;
      }
    }
    if (penalty) {
      const int b = cells;  // bond (w_k, w_{k+1})
      const double s = w[b + 1] - w[b];
      const double v = evalJ(spec, Which::JCB, s, 0);
      if (v == kInf) return kInf;
      e += penaltyWeight * (v - c0);
      if (grad) {
        const double d = penaltyWeight * evalJ(spec, Which::JCB, s, 1);
        gw[b] -= d;
        gw[b + 1] += d;
      }
    }
    if (grad) {
      grad->resize(freeIdx.size());
      // A clamped tail rides on its anchor with unit sensitivity.
      if (tailFrom >= 0)
        for (std::size_t i = tailFrom + 1; i < w.size(); ++i)
          gw[tailFrom] += gw[i];
      for (std::size_t i = 0; i < freeIdx.size(); ++i)
        (*grad)[i] = gw[freeIdx[i]];
    }
    return e;
  }

  bool admissible(const Vector& x) {
    if (spec.domainLow == -kInf) return true;
    fill(x);
    const double guard = spec.domainLow + 1e-3;  // strains are unscaled here
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
      if (w[i + 1] - w[i] < guard) return false;
    return true;
  }
};

double minimizeTruncation(Truncation& tr, const std::vector<Vector>& starts,
                          double gradTol, double maxStep) {
  LbfgsOptions lo;
  lo.gradTol = gradTol;
  lo.maxStepInf = maxStep;
  double best = kInf;
  for (const Vector& x0 : starts) {
    if (!tr.admissible(x0)) continue;
    const auto fg = [&](const Vector& x, Vector* g) {
      return tr.energy(g, x);
    };
    const auto adm = [&](const Vector& x) { return tr.admissible(x); };
    try {
      const LbfgsResult r = lbfgsMinimize(fg, x0, lo, adm);
      best = std::min(best, r.f);
    } catch (const DomainError&) {
    }
  }
  return best;
}

// Value of one truncation level for the given query.
double truncatedValue(const BLQuery& q, const PotentialAnalysis& analysis,
                      const PotentialSpec& spec, int level) {
  const double gamma = analysis.gamma;
  Truncation tr(spec);
  std::vector<Vector> starts;

  switch (q.kind) {
    case BLKind::ElasticB: {
      const int N = level;
      tr.c0 = evalJ0StarStar(analysis, spec, q.ell);
      tr.c1 = evalJ0StarStarPrime(analysis, spec, q.ell);
      tr.ell = q.ell;
      tr.cells = N;
      tr.w.assign(N + 2, 0.0);
      tr.w[1] = q.theta;
      for (int i = 2; i <= N; ++i) tr.freeIdx.push_back(i);
      tr.tailFrom = N;
      tr.tailSlope = q.ell;
      tr.prefixBond = 0;
      Vector s0(N - 1);
      for (int i = 2; i <= N; ++i) s0[i - 2] = q.theta + (i - 1) * q.ell;
      starts.push_back(s0);
      Vector s1 = s0;
      if (N >= 2) {
        for (int i = 2; i <= N; ++i)
          s1[i - 2] = q.theta + analysis.delta1 + (i - 2) * q.ell;
        starts.push_back(s1);
      }
      break;
    }
    case BLKind::BGamma: {
      const int N = level;
      tr.c0 = analysis.j0gamma;
      tr.ell = gamma;
      tr.cells = N;
      tr.w.assign(N + 2, 0.0);
      for (int i = 1; i <= N; ++i) tr.freeIdx.push_back(i);
      tr.tailFrom = N;
      tr.tailSlope = gamma;
      tr.prefixBond = 0;
      Vector s0(N);
      for (int i = 1; i <= N; ++i) s0[i - 1] = i * gamma;
      starts.push_back(s0);
      Vector s1(N);
      for (int i = 1; i <= N; ++i)
        s1[i - 1] = analysis.delta1 + (i - 1) * gamma;
      starts.push_back(s1);
      break;
    }
    case BLKind::Bb: {
      const int k = level;
      tr.c0 = analysis.j0gamma;
      tr.ell = gamma;
      tr.cells = k;
      tr.w.assign(k + 2, 0.0);
      tr.w[k] = -q.theta;
      tr.w[k + 1] = 0.0;
      for (int i = 0; i <= k - 1; ++i) tr.freeIdx.push_back(i);
      tr.prefixBond = 0;
      if (k == 0) {
        starts.push_back(Vector(0));
        break;
      }
      Vector s0(k);
      for (int i = 0; i < k; ++i) s0[i] = -q.theta - (k - i) * gamma;
      starts.push_back(s0);
      Vector s1 = s0;
      s1[0] = (k >= 2 ? s0[1] : -q.theta) - analysis.delta1;
      starts.push_back(s1);
      break;
    }
    case BLKind::BIF: {
      const int k = level;
      tr.c0 = analysis.j0gamma;
      tr.ell = gamma;
      tr.cells = k;
      tr.w.assign(k + 2, 0.0);
      for (int i = 1; i <= k + 1; ++i) tr.freeIdx.push_back(i);
      tr.prefixBond = 0;
      tr.penalty = true;
      tr.penaltyWeight = 0.5 * (2.0 * q.m + 1.0);
      Vector s0(k + 1);
      for (int i = 1; i <= k + 1; ++i) s0[i - 1] = i * gamma;
      starts.push_back(s0);
      Vector s1(k + 1);
      for (int i = 1; i <= k + 1; ++i)
        s1[i - 1] = analysis.delta1 + (i - 1) * gamma;
      starts.push_back(s1);
      break;
    }
  }
  return minimizeTruncation(tr, starts, 1e-9, 0.5 * analysis.delta1);
}

}  // namespace

BLResult solveBoundaryLayer(const BLQuery& q, const PotentialAnalysis& analysis,
                            const PotentialSpec& spec) {
  if (q.kind == BLKind::ElasticB &&
      !(q.ell > 0.0 && q.ell <= analysis.gamma * (1.0 + 1e-12)))
    throw DomainError("solveBoundaryLayer: ElasticB requires 0 < ell <= gamma");
  if (q.kind == BLKind::BIF && q.m < 0)
    throw DomainError("solveBoundaryLayer: BIF requires m >= 0");

  const bool sweepFromZero = q.kind == BLKind::Bb || q.kind == BLKind::BIF;
  BLResult res;
  double runningMin = kInf;
  double prev = kInf;
  int level = sweepFromZero ? 0 : std::max(4, q.nStart);
  int stable = 0;
  while (level <= q.nCap) {
    const double v = truncatedValue(q, analysis, spec, level);
    runningMin = std::min(runningMin, v);
    res.value = runningMin;
    res.nUsed = level;
    if (std::isfinite(prev)) {
      res.truncationEstimate = std::abs(runningMin - prev);
      if (res.truncationEstimate <= q.tol && level >= 16) {
        if (++stable >= (sweepFromZero ? 2 : 1)) {
          res.converged = true;
          return res;
        }
      } else {
        stable = 0;
      }
    }
    prev = runningMin;
    level = level == 0 ? 1 : 2 * level;
  }
  res.converged = false;  // cap reached; best value still reported
  return res;
}

double LimitTable::elasticFor(double theta) const {
  if (theta == theta0) return elastic0.value;
  if (theta == theta1) return elastic1.value;
  throw DomainError("LimitTable: unknown boundary slope");
}

double LimitTable::bBJFor(double theta) const {
  if (theta == theta0) return bBJ0;
  if (theta == theta1) return bBJ1;
  throw DomainError("LimitTable: unknown boundary slope");
}

double LimitTable::bIFValue(int m) const {
  if (m == kInfiniteGap) return bGamma.value;
  const auto it = bIF.find(m);
  if (it == bIF.end())
    throw DomainError("LimitTable: B_IF(" + std::to_string(m) +
                      ") was not computed");
  return it->second.value;
}

double LimitTable::bAIF(int n) const {
  if (n == kInfiniteGap) return bIJ;  // B_IF(inf) + B(gamma) - 2 J0(gamma)
  return bIFValue(n - 1) + bGamma.value - 2.0 * j0gamma;
}

double LimitTable::bTildeIFJ(int n, int k) const {
  const double t1 = bAIF(n);
  const double t2 = n == kInfiniteGap
                        ? kInf
                        : bGamma.value - (0.5 + double(n)) * j0gamma;
  const double t3 = k == kInfiniteGap ? kInf : -double(k) * j0gamma;
  return std::min({t1, t2, t3});
}

double LimitTable::bIFJ(int n, int k, double theta) const {
  return std::min(bTildeIFJ(n, k) + elasticFor(theta), bBJFor(theta));
}

LimitTable composites(const PotentialSpec& spec, double theta0, double theta1,
                      const BLResult& elastic0, const BLResult& elastic1,
                      const BLResult& bGamma, const BLResult& bb0,
                      const BLResult& bb1, const std::map<int, BLResult>& bIF,
                      double j0gamma) {
  LimitTable t;
  t.theta0 = theta0;
  t.theta1 = theta1;
  t.elastic0 = elastic0;
  t.elastic1 = elastic1;
  t.bGamma = bGamma;
  t.bb0 = bb0;
  t.bb1 = bb1;
  t.bIF = bIF;
  t.j0gamma = j0gamma;
  t.bBJ0 = 0.5 * evalJ(spec, Which::J1, theta0, 0) + bb0.value +
           bGamma.value - 2.0 * j0gamma;
  t.bBJ1 = 0.5 * evalJ(spec, Which::J1, theta1, 0) + bb1.value +
           bGamma.value - 2.0 * j0gamma;
  t.bIJ = 2.0 * bGamma.value - 2.0 * j0gamma;
  t.allConverged = elastic0.converged && elastic1.converged &&
                   bGamma.converged && bb0.converged && bb1.converged;
  for (const auto& [m, r] : bIF) t.allConverged &= r.converged;
  return t;
}

LimitTable buildLimitTable(const PotentialSpec& spec,
                           const PotentialAnalysis& analysis, double theta0,
                           double theta1, std::vector<int> bifMs, double tol) {
  const auto solve = [&](BLKind kind, double theta, double ell, int m) {
    BLQuery q;
    q.kind = kind;
    q.theta = theta;
    q.ell = ell;
    q.m = m;
    q.tol = tol;
    return solveBoundaryLayer(q, analysis, spec);
  };
  const double g = analysis.gamma;
  std::map<int, BLResult> bIF;
  std::sort(bifMs.begin(), bifMs.end());
  bifMs.erase(std::unique(bifMs.begin(), bifMs.end()), bifMs.end());
  for (int m : bifMs)
    if (m >= 0 && m != kInfiniteGap) bIF[m] = solve(BLKind::BIF, 0.0, 0.0, m);

  LimitTable t = composites(
      spec, theta0, theta1, solve(BLKind::ElasticB, theta0, g, 0),
      solve(BLKind::ElasticB, theta1, g, 0), solve(BLKind::BGamma, 0, 0, 0),
      solve(BLKind::Bb, theta0, 0.0, 0), solve(BLKind::Bb, theta1, 0.0, 0),
      bIF, analysis.j0gamma);
  return t;
}

LimitMeshDescriptor LimitMeshDescriptor::fromMesh(const ChainConfig& cfg,
                                                  const MeshDescriptor& d) {
  LimitMeshDescriptor md;
  md.rHat = d.rHat;
  md.lHat = d.lHat;
  md.b0 = d.spacingAt(0.0, cfg);
  md.b1 = d.spacingAt(1.0, cfg);
  std::vector<int> gaps;
  for (const auto& [start, gap] : d.continuumIntervals) gaps.push_back(gap);
  std::sort(gaps.begin(), gaps.end());
  gaps.erase(std::unique(gaps.begin(), gaps.end()), gaps.end());
  md.interiorGaps = std::move(gaps);
  if (md.interiorGaps.empty()) md.interiorGaps.push_back(d.minSpacing);
  return md;
}

namespace {

struct JumpCounts {
  int at0 = 0;
  int at1 = 0;
  std::vector<const JumpPoint*> interior;
};

JumpCounts countJumps(const JumpSpec& jump) {
  JumpCounts c;
  for (const auto& j : jump.jumps) {
    switch (j.kind) {
      case JumpPoint::Boundary0: ++c.at0; break;
      case JumpPoint::Boundary1: ++c.at1; break;
      case JumpPoint::Interior: c.interior.push_back(&j); break;
    }
  }
  if (c.at0 > 1 || c.at1 > 1)
    throw DomainError("JumpSpec: boundary jump points must be distinct");
  return c;
}

}  // namespace

LimitValue limitEnergyAtomistic(const JumpSpec& jump, const LimitTable& t) {
  LimitValue out;
  const JumpCounts c = countJumps(jump);
  if (c.at0 + c.at1 + int(c.interior.size()) == 0) return out;  // infeasible
  out.feasible = true;
  out.value = t.elastic0.value * (1 - c.at0) + t.elastic1.value * (1 - c.at1) -
              t.j0gamma + t.bBJ0 * c.at0 + t.bBJ1 * c.at1 +
              t.bIJ * double(c.interior.size());
  return out;
}

LimitValue limitEnergyQC(const JumpSpec& jump,
                         const LimitMeshDescriptor& meshDesc,
                         const LimitTable& t) {
  LimitValue out;
  const JumpCounts c = countJumps(jump);
  if (c.at0 + c.at1 + int(c.interior.size()) == 0) return out;  // infeasible
  double v = t.elastic0.value * (1 - c.at0) + t.elastic1.value * (1 - c.at1) -
             t.j0gamma;
  if (c.at0) v += t.bIFJ(meshDesc.rHat, meshDesc.b0, t.theta0);
  if (c.at1) v += t.bIFJ(meshDesc.lHat, meshDesc.b1, t.theta1);
  for (const JumpPoint* p : c.interior) {
    if (p->b == kInfiniteGap)
      throw DomainError("limitEnergyQC: interior jump needs a finite gap");
    v -= double(p->b) * t.j0gamma;
  }
  out.feasible = true;
  out.value = v;
  return out;
}

MinLimitResult minLimit(LimitModel model, const LimitTable& t,
                        const LimitMeshDescriptor& meshDesc) {
  MinLimitResult res;
  std::vector<JumpSpec> candidates;
  {
    JumpSpec s;
    s.jumps.push_back({JumpPoint::Boundary0, 0.0, kInfiniteGap});
    candidates.push_back(s);
  }
  {
    JumpSpec s;
    s.jumps.push_back({JumpPoint::Boundary1, 1.0, kInfiniteGap});
    candidates.push_back(s);
  }
  if (model == LimitModel::QC) {
    for (int b : meshDesc.interiorGaps) {
      JumpSpec s;
      s.jumps.push_back({JumpPoint::Interior, 0.5, b});
      candidates.push_back(s);
    }
  } else {
    JumpSpec s;
    s.jumps.push_back({JumpPoint::Interior, 0.5, 1});
    candidates.push_back(s);
  }

  for (const auto& cand : candidates) {
    const LimitValue v = model == LimitModel::Atomistic
                             ? limitEnergyAtomistic(cand, t)
                             : limitEnergyQC(cand, meshDesc, t);
    if (v.feasible && v.value < res.value) {
      res.value = v.value;
      res.argmin = cand;
    }
  }
  return res;
}

double elasticLimitValue(const PotentialSpec& spec, double theta0,
                         double theta1, double ell, const BLResult& elastic0,
                         const BLResult& elastic1) {
  const double j0 = evalJ(spec, Which::JCB, ell, 0);
  const double j0p = evalJ(spec, Which::JCB, ell, 1);
  return elastic0.value + elastic1.value - j0 -
         j0p * (0.5 * (theta0 + theta1) - ell);
}

}  // namespace qnl
