#include "qnl/minimize.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

namespace qnl {

EnergyModel EnergyModel::atomistic(const ChainConfig& cfg,
                                   const PotentialSpec& pot,
                                   const PotentialAnalysis& analysis) {
  EnergyModel m;
  m.kind = ModelKind::Atomistic;
  m.cfg = cfg;
  m.pot = pot;
  m.analysis = analysis;
  return m;
}

EnergyModel EnergyModel::qnl(const ChainConfig& cfg, const PotentialSpec& pot,
                             const PotentialAnalysis& analysis,
                             const MeshConfig& mesh) {
  EnergyModel m;
  m.kind = ModelKind::QNL;
  m.cfg = cfg;
  m.pot = pot;
  m.analysis = analysis;
  m.mesh = mesh;
  return m;
}

int EnergyModel::dofCount() const {
  if (kind == ModelKind::Atomistic) return cfg.n - 3;
  return int(mesh->freeRepatoms(cfg).size());
}

Vector EnergyModel::extract(const Vector& u) const {
  if (kind == ModelKind::Atomistic) return u.segment(2, cfg.n - 3);
  const auto free = mesh->freeRepatoms(cfg);
  Vector x(free.size());
  for (std::size_t i = 0; i < free.size(); ++i) x[i] = u[free[i]];
  return x;
}

Vector EnergyModel::embed(const Vector& x) const {
  if (kind == ModelKind::Atomistic) {
    Vector u(cfg.n + 1);
    applyBoundaryConditions(cfg, u);
    u.segment(2, cfg.n - 3) = x;
    return u;
  }
  const auto free = mesh->freeRepatoms(cfg);
  Vector r(mesh->repatoms.size());
  const double lam = cfg.lambda();
  std::size_t fi = 0;
  for (std::size_t j = 0; j < mesh->repatoms.size(); ++j) {
    const int t = mesh->repatoms[j];
    if (t == 0)
      r[j] = 0.0;
    else if (t == 1)
      r[j] = lam * cfg.u0_1;
    else if (t == cfg.n - 1)
      r[j] = cfg.ell - lam * cfg.u1_1;
    else if (t == cfg.n)
      r[j] = cfg.ell;
    else
      r[j] = x[fi++];
  }
  return lift(*mesh, r, cfg.n);
}

double EnergyModel::energy(const Vector& u) const {
  return kind == ModelKind::Atomistic
             ? energyAtomistic(pot, cfg, u, false)
             : energyQNL(pot, cfg, *mesh, u, false);
}

const char* regionName(Region r) {
  switch (r) {
    case Region::LeftAtomistic: return "LeftAtomistic";
    case Region::Interface: return "Interface";
    case Region::Continuum: return "Continuum";
    case Region::RightAtomistic: return "RightAtomistic";
    case Region::Boundary: return "Boundary";
  }
  return "?";
}

namespace {

// Strain guard for the line search: keeps every bond a fixed margin above
// the potential wall. The Morse domain is the whole line, so no guard.
bool admissibleDeformation(const EnergyModel& model, const Vector& u) {
  if (model.pot.domainLow == -kInf) return true;
  const double minGap =
      model.cfg.lambda() *
      (model.pot.domainLow + 1e-3 * model.analysis.delta1);
  for (int i = 0; i < model.cfg.n; ++i)
    if (u[i + 1] - u[i] < minGap) return false;
  return true;
}

struct Objective {
  const EnergyModel& model;
  std::vector<int> freeRepatoms;
  Vector repatomBuffer;

  explicit Objective(const EnergyModel& m) : model(m) {
    if (m.kind == ModelKind::QNL) {
      freeRepatoms = m.mesh->freeRepatoms(m.cfg);
      repatomBuffer.resize(m.mesh->repatoms.size());
    }
  }

  Vector repatomValues(const Vector& x) const {
    Vector r(model.mesh->repatoms.size());
    const double lam = model.cfg.lambda();
    std::size_t fi = 0;
    for (std::size_t j = 0; j < model.mesh->repatoms.size(); ++j) {
      const int t = model.mesh->repatoms[j];
      if (t == 0)
        r[j] = 0.0;
      else if (t == 1)
        r[j] = lam * model.cfg.u0_1;
      else if (t == model.cfg.n - 1)
        r[j] = model.cfg.ell - lam * model.cfg.u1_1;
      else if (t == model.cfg.n)
        r[j] = model.cfg.ell;
      else
        r[j] = x[fi++];
    }
    return r;
  }

  double operator()(const Vector& x, Vector* g) const {
    if (model.kind == ModelKind::Atomistic) {
      const Vector u = model.embed(x);
      const double e = energyAtomistic(model.pot, model.cfg, u, false);
      if (g) {
        if (!std::isfinite(e))
          throw DomainError("gradient at non-finite energy");
        *g = gradAtomistic(model.pot, model.cfg, u);
      }
      return e;
    }
    const Vector r = repatomValues(x);
    auto [e, gr] = reducedEnergyAndGrad(model.pot, model.cfg, *model.mesh, r);
    if (g) {
      if (!std::isfinite(e))
        throw DomainError("gradient at non-finite energy");
      *g = std::move(gr);
    }
    return e;
  }
};

// Damped Newton on the analytic Hessian. The quasi-Newton phase bottoms out
// once energy differences fall below double resolution; the Newton step is
// built from the exact gradient and reaches tight gradient tolerances.
struct NewtonOutcome {
  double f = kInf;
  double gradInf = kInf;
  int iterations = 0;
  bool converged = false;
};

NewtonOutcome newtonRefine(const EnergyModel& model, Objective& obj, Vector& x,
                           double f, Vector& g, const MinimizeOptions& opts,
                           int cap = 50) {
  NewtonOutcome out;
  out.f = f;
  const int n = int(x.size());
  out.gradInf = n == 0 ? 0.0 : g.lpNorm<Eigen::Infinity>();
  if (n == 0 || out.gradInf <= opts.gradTol) {
    out.converged = true;
    return out;
  }
  Eigen::SimplicialLDLT<Sparse> solver;
  Sparse I(n, n);
  I.setIdentity();
  for (int iter = 0; iter < cap; ++iter) {
    out.gradInf = g.lpNorm<Eigen::Infinity>();
    if (out.gradInf <= opts.gradTol) {
      out.converged = true;
      return out;
    }
    const Vector uFull = model.embed(x);
    const Sparse H =
        model.kind == ModelKind::Atomistic
            ? hessianAtomistic(model.pot, model.cfg, uFull)
            : hessianReducedQNL(model.pot, model.cfg, *model.mesh, uFull);
    double diagScale = 1.0;
    for (int i = 0; i < n; ++i)
      diagScale = std::max(diagScale, std::abs(H.coeff(i, i)));
    double mu = 0.0;
    bool accepted = false;
    for (int attempt = 0; attempt < 60 && !accepted; ++attempt) {
      solver.compute(mu == 0.0 ? H : Sparse(H + mu * I));
      if (solver.info() == Eigen::Success) {
        const Vector dx = solver.solve(-g);
        if (dx.allFinite()) {
          const Vector xT = x + dx;
          if (admissibleDeformation(model, model.embed(xT))) {
            try {
              Vector gT(n);
              const double fT = obj(xT, &gT);
              const double giT = gT.lpNorm<Eigen::Infinity>();
              if (std::isfinite(fT) &&
                  (giT < 0.5 * out.gradInf || fT < f)) {
                x = xT;
                f = fT;
                g = gT;
                accepted = true;
              }
            } catch (const DomainError&) {
            }
          }
        }
      }
      if (!accepted) mu = mu == 0.0 ? 1e-12 * diagScale : 10.0 * mu;
    }
    ++out.iterations;
    out.f = f;
    if (!accepted) return out;  // damping exhausted, keep best iterate
  }
  out.gradInf = g.lpNorm<Eigen::Infinity>();
  out.converged = out.gradInf <= opts.gradTol;
  return out;
}

}  // namespace

MinimizeResult localMinimize(const EnergyModel& model, const Vector& startFull,
                             const MinimizeOptions& opts) {
  Objective obj(model);
  const Vector x0 = model.extract(startFull);

  LbfgsOptions lo;
  lo.gradTol = opts.gradTol;
  lo.maxIter = opts.maxIter;
  lo.maxStepInf = 0.5 * model.analysis.delta1 * model.cfg.lambda();
  const auto admissible = [&](const Vector& x) {
    return admissibleDeformation(model, model.embed(x));
  };
  const auto fg = [&](const Vector& x, Vector* g) { return obj(x, g); };
  LbfgsResult lr = lbfgsMinimize(fg, x0, lo, admissible);

  Vector x = lr.x;
  Vector g(x.size());
  double f = obj(x, &g);
  NewtonOutcome nr = newtonRefine(model, obj, x, f, g, opts);

  MinimizeResult res;
  res.u = model.embed(x);
  res.energy = nr.f;
  res.firstOrder =
      firstOrderEnergy(model.analysis, model.pot, model.cfg, nr.f);
  res.iterations = lr.iterations + nr.iterations;
  res.converged = nr.converged;
  res.lineSearchStalled = lr.lineSearchStalled && !nr.converged;
  const MeshConfig meshForRegions =
      model.mesh ? *model.mesh : MeshConfig::full(model.cfg);
  res.cracks = detectCracks(model.cfg, meshForRegions, model.analysis.gamma,
                            res.u, opts);
  return res;
}

Vector crackStart(const ChainConfig& cfg, double gamma, int bondIndex) {
  const int j = std::clamp(bondIndex, 1, cfg.n - 2);
  const double lam = cfg.lambda();
  Vector u(cfg.n + 1);
  applyBoundaryConditions(cfg, u);
  for (int i = 2; i <= j; ++i) u[i] = u[1] + (i - 1) * lam * gamma;
  for (int i = cfg.n - 2; i >= j + 1; --i)
    u[i] = u[cfg.n - 1] - (cfg.n - 1 - i) * lam * gamma;
  return u;
}

namespace {

std::vector<int> crackSites(const EnergyModel& model, BranchSet branchSet) {
  std::vector<int> sites;
  const int n = model.cfg.n;
  switch (branchSet) {
    case BranchSet::ElasticOnly:
      break;
    case BranchSet::AllBonds:
      for (int j = 1; j <= n - 2; ++j) sites.push_back(j);
      break;
    case BranchSet::RepatomIntervals: {
      const MeshConfig& mesh =
          model.mesh ? *model.mesh : MeshConfig::full(model.cfg);
      for (std::size_t i = 0; i + 1 < mesh.repatoms.size(); ++i) {
        const int j = std::clamp(mesh.repatoms[i], 1, n - 2);
        if (sites.empty() || sites.back() != j) sites.push_back(j);
      }
      break;
    }
  }
  return sites;
}

}  // namespace

MinimizeResult globalMinimize(const EnergyModel& model,
                              const MinimizeOptions& opts) {
  struct Branch {
    std::string name;
    Vector start;
  };
  std::vector<Branch> branches;
  branches.push_back({"elastic",
                      affineDeformation(model.cfg, model.cfg.ell)});
  for (int j : crackSites(model, opts.branchSet))
    branches.push_back({"crack@" + std::to_string(j),
                        crackStart(model.cfg, model.analysis.gamma, j)});

  std::vector<MinimizeResult> results(branches.size());
  std::vector<bool> failed(branches.size(), false);
  const auto runBranch = [&](std::size_t i) {
    try {
      results[i] = localMinimize(model, branches[i].start, opts);
    } catch (const std::exception&) {
      failed[i] = true;
    }
  };

  const int threads = std::max(1, opts.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < branches.size(); ++i) runBranch(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < branches.size();
             i = next.fetch_add(1))
          runBranch(i);
      });
    for (auto& t : pool) t.join();
  }

  // Deterministic reduction in branch order; elastic is first, crack sites
  // ascend, so "keep on ties" realizes the tie-breaking rule.
  std::ptrdiff_t best = -1;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (failed[i] || !std::isfinite(results[i].energy)) continue;
    if (best < 0) {
      best = std::ptrdiff_t(i);
      continue;
    }
    const double tie = 1e-12 * (1.0 + std::abs(results[best].energy));
    if (results[i].energy < results[best].energy - tie)
      best = std::ptrdiff_t(i);
  }
  if (best < 0)
    throw NonConvergence("globalMinimize: every branch failed");

  MinimizeResult res = results[best];
  res.branch = branches[best].name;
  res.branchLog.reserve(branches.size());
  for (std::size_t i = 0; i < branches.size(); ++i) {
    BranchRecord rec;
    rec.start = branches[i].name;
    rec.energy = failed[i] ? kInf : results[i].energy;
    rec.iterations = failed[i] ? 0 : results[i].iterations;
    rec.converged = failed[i] ? false : results[i].converged;
    res.branchLog.push_back(std::move(rec));
  }
  return res;
}

CrackReport detectCracks(const ChainConfig& cfg, const MeshConfig& mesh,
                         double gamma, const Vector& u,
                         const MinimizeOptions& opts) {
  CrackReport rep;
  const double lam = cfg.lambda();
  const double threshold = opts.crackStrainFactor * gamma;
  int prevBond = -10;
  for (int i = 0; i < cfg.n; ++i) {
    const double strain = (u[i + 1] - u[i]) / lam;
    if (strain <= threshold) continue;
    CrackBond cb;
    cb.bond = i;
    cb.strain = strain;
    cb.location = double(i) / double(cfg.n);
    cb.jump = (u[i + 1] - u[i]) - lam * gamma;
    if (i == 0 || i == cfg.n - 1)
      cb.region = Region::Boundary;
    else if (i == mesh.k1 || i == mesh.k2 - 1)
      cb.region = Region::Interface;
    else if (i < mesh.k1)
      cb.region = Region::LeftAtomistic;
    else if (i > mesh.k2 - 1)
      cb.region = Region::RightAtomistic;
    else
      cb.region = Region::Continuum;
    if (i != prevBond + 1) ++rep.eventCount;
    prevBond = i;
    rep.bonds.push_back(cb);
  }
  return rep;
}

OracleResult bruteForceOracle(const EnergyModel& model,
                              const OracleGrid& grid) {
  const ChainConfig& cfg = model.cfg;
  std::vector<int> allAtoms;
  if (model.kind == ModelKind::Atomistic) {
    allAtoms.resize(cfg.n + 1);
    for (int i = 0; i <= cfg.n; ++i) allAtoms[i] = i;
  }
  const std::vector<int>& reps =
      model.kind == ModelKind::Atomistic ? allAtoms : model.mesh->repatoms;

  const int M = int(reps.size()) - 1;  // layers 1..M over repatom pairs
  int freeVars = 0;
  for (int t : reps)
    if (t != 0 && t != 1 && t != cfg.n - 1 && t != cfg.n) ++freeVars;
  if (freeVars > grid.maxFreeVars)
    throw TooLarge("bruteForceOracle: too many free unknowns");
  if (grid.pointsPerVar > grid.maxPointsPerVar)
    throw TooLarge("bruteForceOracle: grid too fine");

  const double lam = cfg.lambda();
  const auto pinnedValue = [&](int t) -> std::optional<double> {
    if (t == 0) return 0.0;
    if (t == 1) return lam * cfg.u0_1;
    if (t == cfg.n - 1) return cfg.ell - lam * cfg.u1_1;
    if (t == cfg.n) return cfg.ell;
    return std::nullopt;
  };

  std::vector<std::vector<double>> grids(reps.size());
  for (std::size_t j = 0; j < reps.size(); ++j) {
    if (auto v = pinnedValue(reps[j])) {
      grids[j] = {*v};
    } else {
      grids[j].resize(grid.pointsPerVar);
      for (int p = 0; p < grid.pointsPerVar; ++p)
        grids[j][p] = cfg.ell * double(p) / double(grid.pointsPerVar - 1);
    }
  }

  // Assign terms to the layer of their rightmost atom.
  const std::vector<EnergyTerm> terms =
      model.kind == ModelKind::Atomistic ? atomisticTerms(cfg)
                                         : qnlTerms(cfg, *model.mesh);
  std::vector<std::vector<EnergyTerm>> layerTerms(M + 1);
  for (const EnergyTerm& t : terms) {
    const int ra = t.rightmostAtom();
    int m = 1;
    while (reps[m] < ra) ++m;
    layerTerms[m].push_back(t);
  }

  // Atom value from the repatom triple of layer m.
  const auto atomValue = [&](int m, int i, double a, double b,
                             double c) -> double {
    const int tm1 = reps[m - 1], tm = reps[m];
    if (i >= tm1)
      return b + (c - b) * double(i - tm1) / double(tm - tm1);
    const int tm2 = reps[m - 2];
    return a + (b - a) * double(i - tm2) / double(tm1 - tm2);
  };
  const auto evalLayer = [&](int m, double a, double b, double c) -> double {
    double e = 0.0;
    for (const EnergyTerm& t : layerTerms[m]) {
      double v;
      if (t.type == EnergyTerm::J2Double) {
        const double z = 0.5 *
                         (atomValue(m, t.atom + 2, a, b, c) -
                          atomValue(m, t.atom, a, b, c)) /
                         lam;
        v = evalJ(model.pot, Which::J2, z, 0);
      } else {
        const double z = (atomValue(m, t.atom + 1, a, b, c) -
                          atomValue(m, t.atom, a, b, c)) /
                         lam;
        v = evalJ(model.pot,
                  t.type == EnergyTerm::J1Bond ? Which::J1 : Which::J2, z, 0);
      }
      if (v == kInf) return kInf;
      e += t.weight * lam * v;
    }
    return e;
  };

  // Forward and backward sweeps over pair states (r_{m-1}, r_m). Keeping
  // both lets every near-optimal pair state be expanded into a full grid
  // assignment, which enumerates the competitive basins, not just the
  // single best grid point.
  const auto idx = [](std::size_t nc, std::size_t ib, std::size_t ic) {
    return ib * nc + ic;
  };
  std::vector<std::vector<double>> F(M + 1), G(M + 1);
  std::vector<std::vector<int>> fBack(M + 1), gBack(M + 1);

  F[1].resize(grids[0].size() * grids[1].size());
  for (std::size_t i0 = 0; i0 < grids[0].size(); ++i0)
    for (std::size_t i1 = 0; i1 < grids[1].size(); ++i1)
      F[1][idx(grids[1].size(), i0, i1)] =
          evalLayer(1, 0.0, grids[0][i0], grids[1][i1]);

  for (int m = 2; m <= M; ++m) {
    const auto& ga = grids[m - 2];
    const auto& gb = grids[m - 1];
    const auto& gc = grids[m];
    F[m].assign(gb.size() * gc.size(), kInf);
    fBack[m].assign(gb.size() * gc.size(), -1);
    for (std::size_t ib = 0; ib < gb.size(); ++ib) {
      for (std::size_t ic = 0; ic < gc.size(); ++ic) {
        double best = kInf;
        int bestA = -1;
        for (std::size_t ia = 0; ia < ga.size(); ++ia) {
          const double prev = F[m - 1][idx(gb.size(), ia, ib)];
          if (prev == kInf) continue;
          const double add = evalLayer(m, ga[ia], gb[ib], gc[ic]);
          if (add == kInf) continue;
          if (prev + add < best) {
            best = prev + add;
            bestA = int(ia);
          }
        }
        F[m][idx(gc.size(), ib, ic)] = best;
        fBack[m][idx(gc.size(), ib, ic)] = bestA;
      }
    }
  }

  G[M].assign(grids[M - 1].size() * grids[M].size(), 0.0);
  for (int m = M; m >= 2; --m) {
    const auto& ga = grids[m - 2];
    const auto& gb = grids[m - 1];
    const auto& gc = grids[m];
    G[m - 1].assign(ga.size() * gb.size(), kInf);
    gBack[m - 1].assign(ga.size() * gb.size(), -1);
    for (std::size_t ia = 0; ia < ga.size(); ++ia) {
      for (std::size_t ib = 0; ib < gb.size(); ++ib) {
        double best = kInf;
        int bestC = -1;
        for (std::size_t ic = 0; ic < gc.size(); ++ic) {
          const double tail = G[m][idx(gc.size(), ib, ic)];
          if (tail == kInf) continue;
          const double add = evalLayer(m, ga[ia], gb[ib], gc[ic]);
          if (add == kInf) continue;
          if (add + tail < best) {
            best = add + tail;
            bestC = int(ic);
          }
        }
        G[m - 1][idx(gb.size(), ia, ib)] = best;
        gBack[m - 1][idx(gb.size(), ia, ib)] = bestC;
      }
    }
  }

  OracleResult res;
  res.gridEnergy = kInf;
  for (std::size_t st = 0; st < F[M].size(); ++st)
    res.gridEnergy = std::min(res.gridEnergy, F[M][st] + G[M][st]);
  if (!std::isfinite(res.gridEnergy))
    throw NonConvergence("bruteForceOracle: no admissible grid assignment");

  // Expand a pair state at layer m into the full assignment that realizes
  // F[m] + G[m] through it.
  const auto expand = [&](int m, int ib, int ic) {
    std::vector<int> choice(reps.size(), 0);
    choice[m - 1] = ib;
    choice[m] = ic;
    for (int j = m; j >= 2; --j)
      choice[j - 2] = fBack[j][idx(grids[j].size(), std::size_t(choice[j - 1]),
                                   std::size_t(choice[j]))];
    for (int j = m; j + 1 <= M; ++j)
      choice[j + 1] = gBack[j][idx(grids[j].size(), std::size_t(choice[j - 1]),
                                   std::size_t(choice[j]))];
    return choice;
  };

  // Candidate basins: per layer, the best few pair states by total energy.
  std::set<std::vector<int>> candidates;
  for (int m = 1; m <= M; ++m) {
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t st = 0; st < F[m].size(); ++st) {
      const double tot = F[m][st] + G[m][st];
      if (std::isfinite(tot)) ranked.emplace_back(tot, st);
    }
    const std::size_t keep =
        std::min<std::size_t>(ranked.size(), std::size_t(grid.topPerLayer));
    std::partial_sort(ranked.begin(), ranked.begin() + keep, ranked.end());
    for (std::size_t r = 0; r < keep; ++r) {
      const std::size_t nc = grids[m].size();
      candidates.insert(
          expand(m, int(ranked[r].second / nc), int(ranked[r].second % nc)));
    }
  }

  MinimizeOptions mo;
  for (const auto& choice : candidates) {
    Vector r(reps.size());
    for (std::size_t j = 0; j < reps.size(); ++j)
      r[j] = grids[j][std::size_t(choice[j])];
    const Vector uGrid = model.kind == ModelKind::Atomistic
                             ? Vector(r)
                             : lift(*model.mesh, r, cfg.n);
    try {
      const MinimizeResult polished = localMinimize(model, uGrid, mo);
      if (polished.energy < res.energy) {
        res.energy = polished.energy;
        res.u = polished.u;
      }
    } catch (const std::exception&) {
    }
  }
  if (!std::isfinite(res.energy))
    throw NonConvergence("bruteForceOracle: polish failed on every candidate");
  return res;
}

}  // namespace qnl
