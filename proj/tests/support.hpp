#pragma once

// Shared helpers for the unit tests: seeded random group elements and a few
// geometric utilities.  Everything here is deterministic given the seed.

#include <random>

#include "horocount/core.hpp"

namespace horotest {

using namespace horo;

// Haar-ish random rotation from the QR decomposition of a Gaussian matrix,
// with the usual sign fix, forced into SO(n).
inline Mat random_so(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = gauss(rng);
  Eigen::HouseholderQR<Mat> qr(A);
  Mat Q = qr.householderQ();
  Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  if (Q.determinant() < 0) Q.col(n - 1) *= -1.0;
  return Q;
}

// Random element u_t a_s k with t, s of the given spread.
inline Mat random_element(const Frame& F, std::mt19937_64& rng,
                          double spread = 1.0) {
  std::normal_distribution<double> gauss(0.0, spread);
  Row t(F.n - 1);
  for (int i = 0; i < F.n - 1; ++i) t(i) = gauss(rng);
  const double s = gauss(rng);
  return translation(F, t) * dilation(F, s) * rotation(F, random_so(F.n, rng));
}

// Random boundary point (uniform direction).
inline BoundaryPoint random_boundary(const Frame& F, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Row w(F.n);
  do {
    for (int i = 0; i < F.n; ++i) w(i) = gauss(rng);
  } while (w.norm() < 1e-6);
  w /= w.norm();
  return boundary_from_direction(F, w);
}

// Point on the geodesic ray from the base point o toward xi at time time.
inline HPoint ray_point(const Frame& F, const BoundaryPoint& xi, double time) {
  Row w = direction_of(F, xi);
  Row pd(F.n + 1);
  pd.head(F.n) = std::sinh(time) * w;
  pd(F.n) = std::cosh(time);
  return pd * F.P;
}

}  // namespace horotest
