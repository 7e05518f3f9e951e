#include "qnl/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace qnl {

double findRoot(const std::function<double(double)>& f, double lo, double hi,
                double xtol, int maxIter) {
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0))
    throw RootNotBracketed("findRoot: no sign change on bracket");

  // Brent: inverse quadratic / secant with bisection fallback.
  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int iter = 0; iter < maxIter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol = 2.0 * std::numeric_limits<double>::epsilon() *
                           std::abs(b) +
                       0.5 * xtol;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0.0) return b;
    if (std::abs(e) < tol || std::abs(fa) <= std::abs(fb)) {
      d = e = m;
    } else {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0)
        q = -q;
      else
        p = -p;
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q),
                             std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = e = m;
      }
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol) ? d : (m > 0.0 ? tol : -tol);
    fb = f(b);
  }
  throw NonConvergence("findRoot: iteration cap reached");
}

double goldenMinimize(const std::function<double(double)>& f, double lo,
                      double hi, double xtol, int maxIter) {
  constexpr double invPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - invPhi * (b - a);
  double x2 = a + invPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int iter = 0; iter < maxIter && (b - a) > xtol; ++iter) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invPhi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

LbfgsResult lbfgsMinimize(
    const std::function<double(const Vector&, Vector*)>& fg, Vector x0,
    const LbfgsOptions& opts,
    const std::function<bool(const Vector&)>& admissible) {
  LbfgsResult res;
  const auto n = x0.size();
  res.x = std::move(x0);
  if (n == 0) {
    res.f = fg(res.x, nullptr);
    res.gradInf = 0.0;
    res.converged = true;
    return res;
  }

  Vector g(n);
  double f = fg(res.x, &g);
  if (!std::isfinite(f))
    throw DomainError("lbfgsMinimize: start point has non-finite energy");

  const int m = std::max(1, opts.memory);
  std::vector<Vector> sHist, yHist;
  std::vector<double> rhoHist;

  Vector d(n), xTrial(n), gTrial(n), alphaBuf;
  double fCheckpoint = f;
  int lastCheckpoint = 0;
  for (int iter = 0; iter < opts.maxIter; ++iter) {
    res.gradInf = g.lpNorm<Eigen::Infinity>();
    if (res.gradInf <= opts.gradTol) {
      res.f = f;
      res.iterations = iter;
      res.converged = true;
      return res;
    }
    if (iter - lastCheckpoint >= opts.stallWindow) {
      // Energy differences are below double resolution; a follow-up solve
      // on the exact gradient has to take over from here.
      if (!(f < fCheckpoint - 1e-16 * (1.0 + std::abs(fCheckpoint)))) {
        res.f = f;
        res.iterations = iter;
        res.stagnated = true;
        return res;
      }
      fCheckpoint = f;
      lastCheckpoint = iter;
    }

    // Two-loop recursion.
    d = -g;
    const int k = static_cast<int>(sHist.size());
    alphaBuf.resize(k);
    for (int i = k - 1; i >= 0; --i) {
      alphaBuf[i] = rhoHist[i] * sHist[i].dot(d);
      d -= alphaBuf[i] * yHist[i];
    }
    if (k > 0) {
      const double yy = yHist.back().squaredNorm();
      if (yy > 0.0) d *= sHist.back().dot(yHist.back()) / yy;
    }
    for (int i = 0; i < k; ++i) {
      const double beta = rhoHist[i] * yHist[i].dot(d);
      d += (alphaBuf[i] - beta) * sHist[i];
    }

    double slope = g.dot(d);
    if (!(slope < 0.0)) {  // not a descent direction, restart
      sHist.clear();
      yHist.clear();
      rhoHist.clear();
      d = -g;
      slope = -g.squaredNorm();
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double step = 1.0;
      if (std::isfinite(opts.maxStepInf)) {
        const double dInf = d.lpNorm<Eigen::Infinity>();
        if (dInf > opts.maxStepInf) step = opts.maxStepInf / dInf;
      }
      while (step >= opts.minStep) {
        xTrial = res.x + step * d;
        if (!admissible || admissible(xTrial)) {
          const double fTrial = fg(xTrial, &gTrial);
          if (std::isfinite(fTrial) &&
              fTrial <= f + opts.armijo * step * slope) {
            Vector s = step * d;
            Vector y = gTrial - g;
            const double sy = s.dot(y);
            if (sy > 1e-12 * s.norm() * y.norm()) {
              if (static_cast<int>(sHist.size()) == m) {
                sHist.erase(sHist.begin());
                yHist.erase(yHist.begin());
                rhoHist.erase(rhoHist.begin());
              }
              sHist.push_back(std::move(s));
              yHist.push_back(std::move(y));
              rhoHist.push_back(1.0 / sy);
            }
            res.x = xTrial;
            f = fTrial;
            g = gTrial;
            accepted = true;
            break;
          }
        }
        step *= 0.5;
      }
      if (!accepted && !sHist.empty()) {
        // Quasi-Newton step failed even when damped; fall back to steepest
        // descent once before declaring a stall.
        sHist.clear();
        yHist.clear();
        rhoHist.clear();
        d = -g;
        slope = -g.squaredNorm();
      } else if (!accepted) {
        break;
      }
    }
    if (!accepted) {
      res.f = f;
      res.iterations = iter;
      res.lineSearchStalled = true;
      return res;
    }
  }
  res.f = f;
  res.iterations = opts.maxIter;
  res.gradInf = g.lpNorm<Eigen::Infinity>();
  res.converged = res.gradInf <= opts.gradTol;
  return res;
}

}  // namespace qnl
