#include "qnl/serialize.hpp"

#include <cstdio>

namespace qnl {

std::string formatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json toJson(const CheckReport& report) {
  json j = json::object();
  for (const auto& [name, r] : report.checks)
    j[name] = {{"pass", r.pass},
               {"worst_value", r.worstValue},
               {"witness_z", r.witnessZ}};
  return j;
}

json toJson(const PotentialSpec& spec) {
  json j;
  j["kind"] =
      spec.kind == PotentialKind::LennardJones ? "lennard-jones" : "morse";
  j["k1"] = spec.k1;
  j["k2"] = spec.k2;
  if (spec.kind == PotentialKind::Morse) j["delta1"] = spec.delta1;
  return j;
}

json toJson(const PotentialAnalysis& a) {
  json j;
  j["delta1"] = a.delta1;
  j["delta2"] = a.delta2;
  j["gamma"] = a.gamma;
  j["z0"] = a.z0;
  if (std::isfinite(a.zc)) j["zc"] = a.zc;
  j["J0_gamma"] = a.j0gamma;
  j["J0_infinity"] = a.j0infinity;
  j["z_max"] = a.zMax;
  return j;
}

json toJson(const BLResult& r) {
  return {{"value", r.value},
          {"N_used", r.nUsed},
          {"truncation_estimate", r.truncationEstimate},
          {"converged", r.converged}};
}

json toJson(const LimitTable& t) {
  json j;
  j["theta0"] = t.theta0;
  j["theta1"] = t.theta1;
  j["B_elastic_u0"] = toJson(t.elastic0);
  j["B_elastic_u1"] = toJson(t.elastic1);
  j["B_gamma"] = toJson(t.bGamma);
  j["Bb_u0"] = toJson(t.bb0);
  j["Bb_u1"] = toJson(t.bb1);
  json bif = json::object();
  for (const auto& [m, r] : t.bIF) bif[std::to_string(m)] = toJson(r);
  j["B_IF"] = bif;
  j["B_BJ_u0"] = t.bBJ0;
  j["B_BJ_u1"] = t.bBJ1;
  j["B_IJ"] = t.bIJ;
  j["J0_gamma"] = t.j0gamma;
  j["all_converged"] = t.allConverged;
  return j;
}

json toJson(const EnergyBreakdown& b) {
  json j;
  j["sigma_indices"] = b.sigmaIndices;
  j["sigma"] = b.sigma;
  j["mu_indices"] = b.muIndices;
  j["mu"] = b.mu;
  j["half_J1_left"] = b.halfJ1Left;
  j["half_J1_right"] = b.halfJ1Right;
  j["minus_J0_star_star"] = b.minusJ0StarStar;
  j["tangent_correction"] = b.tangentCorrection;
  j["first_order"] = b.firstOrder;
  j["cell_energies"] = b.cellEnergies;
  return j;
}

json toJson(const CrackReport& r) {
  json bonds = json::array();
  for (const auto& b : r.bonds)
    bonds.push_back({{"bond", b.bond},
                     {"strain", b.strain},
                     {"location", b.location},
                     {"region", regionName(b.region)},
                     {"jump", b.jump}});
  return {{"bonds", bonds}, {"event_count", r.eventCount}};
}

json toJson(const MinimizeResult& r, bool includeDeformation) {
  json j;
  j["energy"] = r.energy;
  j["first_order"] = r.firstOrder;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["line_search_stalled"] = r.lineSearchStalled;
  j["branch"] = r.branch;
  j["cracks"] = toJson(r.cracks);
  if (includeDeformation) {
    json u = json::array();
    for (Eigen::Index i = 0; i < r.u.size(); ++i) u.push_back(r.u[i]);
    j["deformation"] = u;
  }
  json log = json::array();
  for (const auto& b : r.branchLog) {
    json e;
    e["start"] = b.start;
    e["energy"] = std::isfinite(b.energy) ? json(b.energy) : json("inf");
    e["iterations"] = b.iterations;
    e["converged"] = b.converged;
    log.push_back(e);
  }
  j["branch_log"] = log;
  return j;
}

json toJson(const JumpSpec& s) {
  json arr = json::array();
  for (const auto& p : s.jumps) {
    json e;
    switch (p.kind) {
      case JumpPoint::Boundary0: e["at"] = 0.0; e["kind"] = "boundary0"; break;
      case JumpPoint::Boundary1: e["at"] = 1.0; e["kind"] = "boundary1"; break;
      case JumpPoint::Interior:
        e["at"] = p.x;
        e["kind"] = "interior";
        e["b"] = p.b;
        break;
    }
    arr.push_back(e);
  }
  return arr;
}

std::string deformationCsv(const Vector& u) {
  std::string out = "index,position\n";
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += formatDouble(u[i]);
    out += '\n';
  }
  return out;
}

}  // namespace qnl
