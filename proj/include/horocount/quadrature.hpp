#pragma once

// Adaptive Simpson quadrature, 1-D and tensor 2-D, with relative-tolerance
// control and interval diagnostics.  Deterministic: subdivision order and
// arithmetic do not depend on thread count or platform state.

#include <cmath>
#include <functional>
#include <stdexcept>

namespace horo::quad {

struct QuadResult {
  double value = 0;
  int intervals = 0;       // leaf intervals accepted
  int maxDepth = 0;
  double cappedError = 0;  // residual estimate from depth-capped leaves
  bool converged = true;
};

namespace detail {

inline double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double rec(const std::function<double(double)>& f, double a, double fa,
                  double b, double fb, double m, double fm, double whole,
                  double tol, int depth, int maxDepth, QuadResult& diag) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(a, fa, m, fm, flm);
  const double right = simpson(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth > diag.maxDepth) diag.maxDepth = depth;
  if (depth >= maxDepth) {
    // Jump discontinuities (step-function factors) always exhaust the depth
    // but leave a residual ~ |delta|/15 that shrinks with the interval; the
    // caller judges convergence from the accumulated total.
    diag.cappedError += std::abs(delta) / 15.0;
    diag.intervals += 2;
    return left + right + delta / 15.0;
  }
  if (std::abs(delta) <= 15.0 * tol) {
    diag.intervals += 2;
    return left + right + delta / 15.0;
  }
  return rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1, maxDepth,
             diag) +
         rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1, maxDepth,
             diag);
}

}  // namespace detail

// Integrate f over [a, b] to relative tolerance relTol (with a small
// absolute floor for integrals near zero).
inline QuadResult integrate(const std::function<double(double)>& f, double a,
                            double b, double relTol = 1e-6,
                            int maxDepth = 48) {
  QuadResult diag;
  if (!(b > a)) return diag;
  const double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
  const double whole = detail::simpson(a, fa, b, fb, fm);
  // scale the tolerance by a coarse magnitude estimate of the integral
  double scale = std::abs(whole);
  if (scale < 1e-300) {
    // probe a few points before concluding the integrand vanishes
    double probe = 0;
    for (int i = 1; i <= 7; ++i) probe += std::abs(f(a + (b - a) * i / 8.0));
    if (probe == 0) return diag;
    scale = probe * (b - a) / 7.0;
  }
  diag.value = detail::rec(f, a, fa, b, fb, m, fm, whole, relTol * scale, 0,
                           maxDepth, diag);
  diag.converged =
      diag.cappedError <=
      10.0 * relTol * std::max(std::abs(diag.value), scale) + 1e-300;
  return diag;
}

// Tensor-product version over [ax,bx] x [ay,by]: the outer integral is
// adaptive in x of the adaptive inner integral in y.
inline QuadResult integrate2d(const std::function<double(double, double)>& f,
                              double ax, double bx, double ay, double by,
                              double relTol = 1e-6) {
  QuadResult outerDiag;
  bool innerOk = true;
  auto inner = [&](double x) {
    QuadResult r = integrate([&](double y) { return f(x, y); }, ay, by,
                             relTol * 0.2);
    if (!r.converged) innerOk = false;
    return r.value;
  };
  outerDiag = integrate(inner, ax, bx, relTol);
  outerDiag.converged = outerDiag.converged && innerOk;
  return outerDiag;
}

}  // namespace horo::quad
