#ifndef QNL_POTENTIALS_HPP
#define QNL_POTENTIALS_HPP

#include "qnl/numerics.hpp"

#include <map>
#include <string>
#include <vector>

namespace qnl {

enum class PotentialKind { LennardJones, Morse };

enum class Which { J1, J2, JCB };

/// Pair potential family for the chain. J2 is always the next-to-nearest
/// neighbour companion J2(z) = J1(2z).
struct PotentialSpec {
  PotentialKind kind = PotentialKind::LennardJones;
  double k1 = 1.0;
  double k2 = 1.0;
  double delta1 = 1.0;   // Morse only: prescribed minimizer of J1
  double domainLow = 0.0;  // greatest lower bound of dom J1

  static PotentialSpec lennardJones(double k1, double k2);
  static PotentialSpec morse(double k1, double k2, double delta1);
};

double evalJ(const PotentialSpec& spec, Which which, double z, int order = 0);

/// Named diagnostics, serializable as JSON.
struct CheckResult {
  bool pass = false;
  double worstValue = 0.0;
  double witnessZ = 0.0;
};

struct CheckReport {
  // Insertion-ordered list of (name, result).
  std::vector<std::pair<std::string, CheckResult>> checks;

  bool allPass() const;
  const CheckResult* find(const std::string& name) const;
};

/// Characteristic constants of a potential pair.
struct PotentialAnalysis {
  double delta1 = 0.0;  // minimizer of J1
  double delta2 = 0.0;  // minimizer of J2 (= delta1 / 2)
  double gamma = 0.0;   // minimizer of J0 and JCB
  double z0 = 0.0;      // zero of J1, J1 < 0 beyond it
  double zc = std::numeric_limits<double>::quiet_NaN();  // LJ only
  double j0gamma = 0.0;
  double j0infinity = 0.0;  // J0 evaluated at zMax
  double zMax = 0.0;        // proxy for +infinity (1e3 * delta1)
  CheckReport checks;
};

struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  int count = 20000;
  bool logSpaced = true;

  static GridSpec defaultFor(const PotentialSpec& spec, double delta1);
  std::vector<double> points() const;
};

PotentialAnalysis computeConstants(const PotentialSpec& spec);

/// Effective potential J0(z) = J2(z) + 1/2 inf { J1(z1)+J1(z2) : z1+z2 = 2z }.
/// The inner problem is solved numerically; the symmetric split z1 = z is
/// always among the candidates.
struct J0Result {
  double value = kInf;
  double innerArgmin = 0.0;  // optimal z1 (reported in the half z1 <= z)
};

J0Result evalJ0Full(const PotentialAnalysis& analysis,
                    const PotentialSpec& spec, double z);

double evalJ0(const PotentialAnalysis& analysis, const PotentialSpec& spec,
              double z);

/// Convex lower-semicontinuous envelope of J0 and its derivative:
/// JCB below gamma, constant JCB(gamma) above.
double evalJ0StarStar(const PotentialAnalysis& analysis,
                      const PotentialSpec& spec, double z);
double evalJ0StarStarPrime(const PotentialAnalysis& analysis,
                           const PotentialSpec& spec, double z);

/// Residual controlling whether an interface fracture layer can be traded
/// for a free fracture layer:
///   R(t) = J2((gamma+t)/2) + (J1(gamma)+J1(t))/2 - J0(gamma)
///          - 3/2 (JCB(t) - J0(gamma)).
double evalR(const PotentialAnalysis& analysis, const PotentialSpec& spec,
             double t);

/// Upper bound for R on [zc, +inf): -J2(zc)/2 - JCB(zc)
/// + (J1(gamma)+J0(gamma))/2. For LJ(k1,k2) this evaluates to about
/// -0.0469 k2^2/k1. LJ only.
double evalRTailBound(const PotentialAnalysis& analysis,
                      const PotentialSpec& spec);

CheckReport checkAssumptions(const PotentialAnalysis& analysis,
                             const PotentialSpec& spec, const GridSpec& grid);

}  // namespace qnl

#endif
