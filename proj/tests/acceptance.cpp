// Acceptance suite: one verdict line per criterion, selected by number on
// the command line (no argument runs everything). Exit status is the number
// of failed criteria.

#include "qnl/limits.hpp"
#include "qnl/minimize.hpp"
#include "qnl/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace qnl;
using Clock = std::chrono::steady_clock;

namespace {

struct Criterion {
  int failures = 0;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) ++failures;
    notes.push_back(std::string(ok ? "    ok   " : "    FAIL ") + what);
  }
  void note(const std::string& what) { notes.push_back("    note " + what); }
};

const PotentialSpec lj = PotentialSpec::lennardJones(1.0, 1.0);
const PotentialAnalysis ljA = computeConstants(lj);

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

LimitTable ljLimitTable() {
  return buildLimitTable(lj, ljA, ljA.delta1, ljA.gamma, {0, 1, 2, 4, 5});
}

// ---- criterion implementations -------------------------------------------

void criterion1(Criterion& c) {
  const double d1 = std::pow(2.0 * lj.k1 / lj.k2, 1.0 / 6.0);
  const double gamma =
      std::pow((1.0 + std::pow(2.0, -12.0)) / (1.0 + std::pow(2.0, -6.0)),
               1.0 / 6.0) *
      d1;
  const double z0 = std::pow(lj.k1 / lj.k2, 1.0 / 6.0);
  const double zc =
      d1 * std::pow(13.0 / 7.0 * (1.0 + std::pow(2.0, -11.0)) /
                        (1.0 + std::pow(2.0, -5.0)),
                    1.0 / 6.0);
  c.expect(std::abs(ljA.delta1 - d1) <= 1e-12 * d1,
           "delta1 = " + num(ljA.delta1));
  c.expect(std::abs(ljA.gamma - gamma) <= 1e-12 * gamma,
           "gamma = " + num(ljA.gamma));
  c.expect(std::abs(ljA.zc - zc) <= 1e-12 * zc, "zc = " + num(ljA.zc));
  c.expect(std::abs(ljA.z0 - 1.0) <= 1e-14, "z0 = " + num(ljA.z0));
}

void criterion2(Criterion& c) {
  c.expect(std::abs(evalR(ljA, lj, ljA.gamma)) <= 1e-10,
           "R(gamma) = " + num(evalR(ljA, lj, ljA.gamma)));
  double worst = -kInf, at = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double t = 0.3 + i * (10.0 - 0.3) / 19999.0;
    const double v = evalR(ljA, lj, t);
    if (v > worst) {
      worst = v;
      at = t;
    }
  }
  c.expect(worst <= 1e-10,
           "max R on [0.3,10] = " + num(worst) + " at t = " + num(at));
  const double bound = evalRTailBound(ljA, lj) * lj.k1 / (lj.k2 * lj.k2);
  c.expect(near(bound, -0.0469, 1e-3),
           "tail majorant of R at zc, scaled by k1/k2^2 = " + num(bound));
  c.expect(evalR(ljA, lj, ljA.zc) <= bound + 1e-14,
           "R(zc) = " + num(evalR(ljA, lj, ljA.zc)) +
               " stays below the majorant");
  c.note("the reported -0.0469 k2^2/k1 is the tail majorant "
         "-J2(zc)/2 - JCB(zc) + (J1(gamma)+J0(gamma))/2; "
         "R(zc) itself is about -0.0527 k2^2/k1");
}

void criterion3(Criterion& c) {
  const auto solve = [&](BLKind kind, double theta, double ell, int m) {
    BLQuery q;
    q.kind = kind;
    q.theta = theta;
    q.ell = ell;
    q.m = m;
    return solveBoundaryLayer(q, ljA, lj);
  };
  const double halfJ1Gamma = 0.5 * evalJ(lj, Which::J1, ljA.gamma, 0);

  const BLResult bb = solve(BLKind::Bb, ljA.delta1, 0, 0);
  c.expect(bb.converged && near(bb.value, -0.125, 1e-8),
           "B_b(delta1) = " + num(bb.value));
  const BLResult bgg = solve(BLKind::ElasticB, ljA.gamma, ljA.gamma, 0);
  c.expect(bgg.converged && near(bgg.value, halfJ1Gamma, 1e-8),
           "B(gamma,gamma) = " + num(bgg.value) + " vs J1(gamma)/2 = " +
               num(halfJ1Gamma));
  const BLResult bg = solve(BLKind::BGamma, 0, 0, 0);
  c.expect(bg.converged && bg.value >= -0.125 - 1e-8 &&
               bg.value <= halfJ1Gamma + 1e-8,
           "B(gamma) = " + num(bg.value) + " in [-0.125, J1(gamma)/2]");
  for (int m : {1, 2, 5}) {
    const BLResult bif = solve(BLKind::BIF, 0, 0, m);
    c.expect(bif.converged && near(bif.value, bg.value, 1e-7),
             "B_IF(" + std::to_string(m) + ") = " + num(bif.value));
  }
}

void inequalitySuite(Criterion& c, const PotentialSpec& spec,
                const PotentialAnalysis& a, const std::string& tag) {
  const double tol = 1e-9;  // ten times the boundary-layer tolerance
  const LimitTable t =
      buildLimitTable(spec, a, a.delta1, a.gamma, {0, 1, 2, 4, 5});
  const double hd = 0.5 * evalJ(spec, Which::J1, a.delta1, 0);
  const double hg = 0.5 * evalJ(spec, Which::J1, a.gamma, 0);
  c.expect(t.allConverged, tag + ": all boundary layers converged");
  c.expect(hd - tol <= t.bGamma.value && t.bGamma.value <= hg + tol,
           tag + ": J1(delta1)/2 <= B(gamma) <= J1(gamma)/2");
  c.expect(t.elastic0.value >= hd - tol,
           tag + ": B(delta1,gamma) >= J1(delta1)/2");
  c.expect(t.elastic1.value >= hg - tol,
           tag + ": B(gamma,gamma) >= J1(gamma)/2");
  c.expect(t.bb0.value >= hd - tol && t.bb1.value >= hd - tol,
           tag + ": B_b(theta) >= J1(delta1)/2");
  c.expect(near(t.bb0.value, hd, tol), tag + ": B_b(delta1) = J1(delta1)/2");
  c.expect(t.bb0.value <= hd + tol && t.bb1.value <= hg + tol,
           tag + ": B_b(theta) <= J1(theta)/2");
  bool bifBounds = true;
  for (int m : {0, 1, 2, 4, 5})
    bifBounds &= hd - tol <= t.bIFValue(m) && t.bIFValue(m) <= hg + tol;
  c.expect(bifBounds, tag + ": J1(delta1)/2 <= B_IF(m) <= J1(gamma)/2");
  c.expect(t.bIJ > 0.0, tag + ": B_IJ = " + num(t.bIJ) + " > 0");
  c.expect(t.elastic0.value <= t.bBJ0 + tol &&
               t.bBJ0 <= t.elastic0.value + t.bIJ + tol &&
               t.elastic1.value <= t.bBJ1 + tol &&
               t.bBJ1 <= t.elastic1.value + t.bIJ + tol,
           tag + ": B(theta,gamma) <= B_BJ(theta) <= B(theta,gamma) + B_IJ");
  bool l53 = true;
  for (int n : {1, 2, 5, kInfiniteGap})
    l53 &= near(t.bTildeIFJ(n, 1), -t.j0gamma, tol);
  for (int k : {2, 3, kInfiniteGap})
    l53 &= near(t.bTildeIFJ(1, k), t.bGamma.value - 1.5 * t.j0gamma, tol);
  for (int n : {2, 3, 5})
    for (int k : {2, 4, kInfiniteGap})
      l53 &= near(t.bTildeIFJ(n, k), t.bAIF(n), tol);
  c.expect(l53, tag + ": reduced interface-jump minima take the predicted "
                      "branch");
}

void criterion4(Criterion& c) {
  inequalitySuite(c, lj, ljA, "LJ(1,1)");
  const auto mo = PotentialSpec::morse(1.0, 1.0, 1.0);
  inequalitySuite(c, mo, computeConstants(mo), "Morse(1,1,1)");
}

void criterion5(Criterion& c) {
  const LimitTable t = ljLimitTable();
  LimitMeshDescriptor md;
  md.rHat = md.lHat = md.b0 = md.b1 = 2;
  md.interiorGaps = {2};
  const MinLimitResult atom = minLimit(LimitModel::Atomistic, t);
  const MinLimitResult qc = minLimit(LimitModel::QC, t, md);
  c.expect(near(qc.value, atom.value, 1e-7),
           "min QC = " + num(qc.value) + " vs min atomistic = " +
               num(atom.value));
  bool onBoundary = !qc.argmin.jumps.empty();
  for (const auto& j : qc.argmin.jumps)
    onBoundary &= j.kind != JumpPoint::Interior;
  c.expect(onBoundary, "QC argmin jump set lies in {0, 1}");
}

void criterion6(Criterion& c) {
  const LimitTable t = ljLimitTable();
  const double atomMin = minLimit(LimitModel::Atomistic, t).value;

  LimitMeshDescriptor unit;
  unit.rHat = unit.lHat = unit.b0 = unit.b1 = 1;
  unit.interiorGaps = {1};
  const MinLimitResult qc1 = minLimit(LimitModel::QC, t, unit);
  const double predicted1 =
      t.elastic0.value + t.elastic1.value - 2.0 * t.j0gamma;
  c.expect(near(qc1.value, predicted1, 1e-7),
           "unit-gap mesh: min = " + num(qc1.value) +
               " vs B(d1,g)+B(g,g)-2J0(g) = " + num(predicted1));
  c.expect(qc1.value < atomMin - 1e-3,
           "unit-gap minimum undercuts the atomistic one by " +
               num(atomMin - qc1.value));

  LimitMeshDescriptor lhat1;
  lhat1.rHat = 2;
  lhat1.lHat = 1;
  lhat1.b0 = lhat1.b1 = 2;
  lhat1.interiorGaps = {2};
  const MinLimitResult qc2 = minLimit(LimitModel::QC, t, lhat1);
  const double predicted2 = t.elastic0.value + t.elastic1.value +
                            t.bGamma.value - 2.5 * t.j0gamma;
  c.expect(near(qc2.value, predicted2, 1e-7),
           "lHat=1 mesh: min = " + num(qc2.value) +
               " vs B(d1,g)+B(g,g)+B(g)-5/2 J0(g) = " + num(predicted2));
  c.expect(qc2.argmin.jumps.size() == 1 &&
               qc2.argmin.jumps[0].kind == JumpPoint::Boundary1,
           "lHat=1 argmin jumps at 1");
  c.expect(qc2.value < atomMin,
           "lHat=1 minimum stays below the atomistic one");
  c.note("the -5/2 J0(gamma) constant follows from the limit functional and "
         "its interface-jump table; the -3/2 variant printed elsewhere "
         "double-counts one -J0(gamma); the finite-chain cross-check in the "
         "unit tests confirms -5/2");
}

struct ConvergeRow {
  int n = 0;
  double gapOverLambda = 0.0;
  MinimizeResult atom, qnl;
};

std::vector<ConvergeRow> convergeRows(const std::vector<int>& ns,
                                      int spacing) {
  std::vector<ConvergeRow> rows;
  for (int n : ns) {
    ChainConfig cfg;
    cfg.n = n;
    cfg.ell = 1.5 * ljA.gamma;
    cfg.u0_1 = ljA.delta1;
    cfg.u1_1 = ljA.gamma;
    MeshRule rule;
    rule.spacing = spacing;
    const auto [mesh, desc] = meshFromRule(cfg, rule);
    MinimizeOptions opts;
    opts.threads = 2;
    ConvergeRow row;
    row.n = n;
    row.atom = globalMinimize(EnergyModel::atomistic(cfg, lj, ljA), opts);
    opts.branchSet = BranchSet::RepatomIntervals;
    row.qnl = globalMinimize(EnergyModel::qnl(cfg, lj, ljA, mesh), opts);
    row.gapOverLambda = n * std::abs(row.atom.energy - row.qnl.energy);
    rows.push_back(std::move(row));
  }
  return rows;
}

void criterion7(Criterion& c) {
  const std::vector<int> ns = {64, 128, 256, 512};
  const auto rows = convergeRows(ns, 2);
  bool allConverged = true;
  for (const auto& r : rows) {
    allConverged &= r.atom.converged && r.qnl.converged;
    c.note("n = " + std::to_string(r.n) +
           ": n|minAtomistic - minQNL| = " + num(r.gapOverLambda));
  }
  c.expect(allConverged, "all solves converged");
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i)
    monotone &= rows[i].gapOverLambda < rows[i - 1].gapOverLambda;
  c.expect(monotone, "n|gap| decreases monotonically");
  c.expect(rows.back().gapOverLambda < 0.5 * rows.front().gapOverLambda,
           "last n|gap| is below half of the first");
  bool tiny = true;
  for (const auto& r : rows) tiny &= r.gapOverLambda <= 1e-8;
  c.expect(tiny, "supporting bound: n|gap| <= 1e-8 at every tested n "
                 "(the minimal energies coincide to machine precision)");
  c.note("the trend clauses compare rounding noise: the window coupling "
         "error decays like rho^(2 k1) with rho ~ 0.03, so the true gap is "
         "below double precision from n = 64 on; see the decisions ledger");
}

void criterion8(Criterion& c) {
  const auto rows2 = convergeRows({128, 256, 512}, 2);
  for (const auto& r : rows2) {
    const bool ok =
        !r.qnl.cracks.bonds.empty() &&
        (r.qnl.cracks.bonds.front().region == Region::Boundary ||
         r.qnl.cracks.bonds.front().region == Region::LeftAtomistic);
    c.expect(ok, "spacing 2, n = " + std::to_string(r.n) +
                     ": crack region = " +
                     (r.qnl.cracks.bonds.empty()
                          ? "none"
                          : regionName(r.qnl.cracks.bonds.front().region)));
  }
  const auto rows1 = convergeRows({128}, 1);
  const auto& r = rows1.front();
  c.expect(!r.qnl.cracks.bonds.empty(),
           "spacing 1: coupled minimizer still fractures");
  const double firstOrderGap = r.atom.firstOrder - r.qnl.firstOrder;
  c.expect(firstOrderGap > 1e-3,
           "spacing 1: first-order QC minimum undercuts the atomistic one "
           "by " +
               num(firstOrderGap));
  if (!r.qnl.cracks.bonds.empty())
    c.note("spacing 1 crack sits in the " +
           std::string(regionName(r.qnl.cracks.bonds.front().region)) +
           " region (any location is admissible under the unit-gap "
           "indifference)");
}

void criterion9(Criterion& c) {
  for (int n : {8, 10}) {
    for (double f : {0.8, 1.4}) {
      ChainConfig cfg;
      cfg.n = n;
      cfg.ell = f * ljA.gamma;
      cfg.u0_1 = f > 1.0 ? ljA.delta1 : cfg.ell;
      cfg.u1_1 = f > 1.0 ? ljA.gamma : cfg.ell;
      for (bool coupled : {false, true}) {
        const EnergyModel model =
            coupled ? EnergyModel::qnl(cfg, lj, ljA, MeshConfig::full(cfg))
                    : EnergyModel::atomistic(cfg, lj, ljA);
        MinimizeOptions opts;
        if (coupled) opts.branchSet = BranchSet::RepatomIntervals;
        const MinimizeResult g = globalMinimize(model, opts);
        const OracleResult o = bruteForceOracle(model, {});
        const std::string label = std::string(coupled ? "qnl" : "atomistic") +
                                  " n=" + std::to_string(n) +
                                  " ell=" + num(f) + "*gamma";
        c.expect(std::abs(g.energy - o.energy) <= 1e-6,
                 label + ": |global - oracle| = " +
                     num(std::abs(g.energy - o.energy)));
      }
    }
  }
}

void criterion10(Criterion& c) {
  std::mt19937 rng(2024);
  ChainConfig cfg;
  cfg.n = 32;
  cfg.ell = 1.05;
  cfg.u0_1 = cfg.u1_1 = 1.05;
  MeshRule rule;
  rule.spacing = 2;
  const auto [mesh, desc] = meshFromRule(cfg, rule);

  const auto randomAdmissible = [&](double amp) {
    std::uniform_real_distribution<double> d(-amp, amp);
    Vector u = affineDeformation(cfg, cfg.ell);
    for (int i = 2; i <= cfg.n - 2; ++i) u[i] += cfg.lambda() * d(rng);
    return u;
  };

  {  // gradient versus finite differences
    const Vector u = randomAdmissible(0.04);
    const Vector ga = gradAtomistic(lj, cfg, u);
    const Vector gq = gradQNL(lj, cfg, mesh, u);
    double worst = 0.0;
    const double h = 1e-7;
    for (int i = 2; i <= cfg.n - 2; ++i) {
      Vector up = u, dn = u;
      up[i] += h;
      dn[i] -= h;
      worst = std::max(worst,
                       std::abs(ga[i - 2] - (energyAtomistic(lj, cfg, up, false) -
                                             energyAtomistic(lj, cfg, dn, false)) /
                                                (2 * h)));
      worst = std::max(
          worst, std::abs(gq[i - 2] - (energyQNL(lj, cfg, mesh, up, false) -
                                       energyQNL(lj, cfg, mesh, dn, false)) /
                                          (2 * h)));
    }
    c.expect(worst <= 1e-6, "gradient vs finite differences, worst " +
                                num(worst));
  }

  {  // sigma/mu nonnegativity and reconstruction on 100 random deformations
    double worstEntry = 0.0, worstRec = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
      const Vector u = randomAdmissible(0.03);
      const auto b = sigmaMuBreakdown(ljA, lj, cfg, mesh, u);
      for (double s : b.sigma) worstEntry = std::min(worstEntry, s);
      for (double m : b.mu) worstEntry = std::min(worstEntry, m);
      const double direct = firstOrderEnergy(
          ljA, lj, cfg, energyQNL(lj, cfg, mesh, u, true));
      worstRec = std::max(worstRec, std::abs(b.firstOrder - direct) /
                                        (1.0 + std::abs(direct)));
    }
    c.expect(worstEntry >= -1e-12,
             "sigma/mu nonnegativity, worst entry " + num(worstEntry));
    c.expect(worstRec <= 1e-9,
             "first-order reconstruction, worst relative " + num(worstRec));
  }

  {  // affine equality of the two energies
    std::uniform_real_distribution<double> slope(0.85, 3.0);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const double z = slope(rng);
      Vector u(cfg.n + 1);
      for (int j = 0; j <= cfg.n; ++j) u[j] = z * cfg.lambda() * j;
      worst = std::max(worst,
                       std::abs(energyAtomistic(lj, cfg, u, false) -
                                energyQNL(lj, cfg, mesh, u, false)));
    }
    c.expect(worst <= 1e-12, "affine atomistic/QNL equality, worst " +
                                 num(worst));
  }

  {  // ghost-force patch test at gamma
    ChainConfig gcfg = cfg;
    gcfg.ell = ljA.gamma;
    gcfg.u0_1 = gcfg.u1_1 = ljA.gamma;
    const Vector u = affineDeformation(gcfg, ljA.gamma);
    const double ghost =
        gradQNL(lj, gcfg, mesh, u).lpNorm<Eigen::Infinity>();
    c.expect(ghost <= 1e-10, "ghost forces at gamma, sup norm " + num(ghost));
  }
}

struct Entry {
  int id;
  const char* title;
  double runtimeLimit;  // seconds, 0 = none
  std::function<void(Criterion&)> run;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> list = {
      {1, "closed-form constants", 1.0, criterion1},
      {2, "fracture residual R", 5.0, criterion2},
      {3, "boundary-layer exact values", 60.0, criterion3},
      {4, "boundary-layer inequality suite", 0.0, criterion4},
      {5, "coarse-mesh limit equality", 0.0, criterion5},
      {6, "fine-mesh sharpness", 0.0, criterion6},
      {7, "finite-n energy gap trend", 600.0, criterion7},
      {8, "fracture location flip", 0.0, criterion8},
      {9, "exhaustive-oracle equivalence", 0.0, criterion9},
      {10, "property suites", 60.0, criterion10},
  };
  return list;
}

int runOne(const Entry& e) {
  Criterion c;
  const auto t0 = Clock::now();
  e.run(c);
  const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
  if (e.runtimeLimit > 0.0)
    c.expect(dt < e.runtimeLimit,
             "runtime " + num(dt) + " s < " + num(e.runtimeLimit) + " s");
  std::printf("[%s] criterion %d: %s (%.1f s)\n",
              c.failures == 0 ? "PASS" : "FAIL", e.id, e.title, dt);
  for (const auto& n : c.notes) std::printf("%s\n", n.c_str());
  std::fflush(stdout);
  return c.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  int failed = 0;
  if (argc > 1) {
    const int want = std::atoi(argv[1]);
    for (const auto& e : entries())
      if (e.id == want) return runOne(e);
    std::fprintf(stderr, "unknown criterion %d\n", want);
    return 2;
  }
  for (const auto& e : entries()) failed += runOne(e);
  std::printf("%d of %zu criteria failed\n", failed, entries().size());
  return failed;
}
