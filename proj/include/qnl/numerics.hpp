#ifndef QNL_NUMERICS_HPP
#define QNL_NUMERICS_HPP

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <stdexcept>

namespace qnl {

using Vector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown when a potential or one of its derivatives is requested outside
/// its domain.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when an iterative solver exhausts its budget without reaching the
/// requested tolerance.
struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RootNotBracketed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Brent-style bracketed root finding. f(lo) and f(hi) must have opposite
/// signs, otherwise RootNotBracketed is thrown.
double findRoot(const std::function<double(double)>& f, double lo, double hi,
                double xtol = 1e-14, int maxIter = 200);

/// Golden-section minimization of a unimodal function on [lo, hi] down to an
/// interval of width xtol. Returns the midpoint of the final bracket.
double goldenMinimize(const std::function<double(double)>& f, double lo,
                      double hi, double xtol = 1e-12, int maxIter = 300);

struct LbfgsOptions {
  double gradTol = 1e-10;  // sup-norm of the gradient
  int maxIter = 100000;
  int memory = 10;
  double minStep = 1e-16;  // line search gives up below this step
  double armijo = 1e-4;
  double maxStepInf = kInf;  // cap on the initial trial displacement
  int stallWindow = 60;      // quit when f stops decreasing for this long
};

struct LbfgsResult {
  Vector x;
  double f = kInf;
  double gradInf = kInf;
  int iterations = 0;
  bool converged = false;
  bool lineSearchStalled = false;
  bool stagnated = false;  // ran out of representable energy decrease
};

/// Limited-memory BFGS with backtracking line search.
///
/// `fg` evaluates the objective and, when the pointer is non-null, the
/// gradient. `admissible` guards the line search: trial points failing it
/// are rejected before any evaluation (used to stay inside potential
/// domains). The start must be admissible with finite objective.
LbfgsResult lbfgsMinimize(
    const std::function<double(const Vector&, Vector*)>& fg, Vector x0,
    const LbfgsOptions& opts = {},
    const std::function<bool(const Vector&)>& admissible = nullptr);

}  // namespace qnl

#endif
