#include "horocount/core.hpp"

#include <cmath>
#include <stdexcept>

namespace horo {

Frame Frame::make(int n) {
  if (n < 2) throw std::invalid_argument("Frame: need n >= 2");
  Frame F;
  F.n = n;
  const int d = n + 1;
  F.J = Mat::Zero(d, d);
  F.J(0, d - 1) = 1.0;
  F.J(d - 1, 0) = 1.0;
  for (int i = 1; i < d - 1; ++i) F.J(i, i) = -1.0;

  const double r = 1.0 / std::sqrt(2.0);
  F.P = Mat::Identity(d, d);
  F.P(0, 0) = -r;
  F.P(0, d - 1) = r;
  F.P(d - 1, 0) = r;
  F.P(d - 1, d - 1) = r;

  F.o = Row::Zero(d);
  F.o(0) = r;
  F.o(d - 1) = r;

  F.wplus = Row::Zero(d);
  F.wplus(0) = 1.0;
  F.wminus = Row::Zero(d);
  F.wminus(d - 1) = 1.0;
  return F;
}

Mat translation(const Frame& F, const Row& t) {
  const int d = F.n + 1;
  if (t.size() != F.n - 1) throw std::invalid_argument("translation: bad t size");
  Mat u = Mat::Identity(d, d);
  u.block(0, 1, 1, F.n - 1) = t;
  u.block(1, d - 1, F.n - 1, 1) = t.transpose();
  u(0, d - 1) = 0.5 * t.squaredNorm();
  return u;
}

Mat dilation(const Frame& F, double s) {
  const int d = F.n + 1;
  Mat a = Mat::Identity(d, d);
  a(0, 0) = std::exp(s);
  a(d - 1, d - 1) = std::exp(-s);
  return a;
}

Mat rotation(const Frame& F, const Mat& R) {
  const int d = F.n + 1;
  if (R.rows() != F.n || R.cols() != F.n)
    throw std::invalid_argument("rotation: R must be n x n");
  Mat blk = Mat::Identity(d, d);
  blk.block(0, 0, F.n, F.n) = R;
  return F.P * blk * F.P;
}

Mat rotation_m(const Frame& F, const Mat& m) {
  const int d = F.n + 1;
  if (m.rows() != F.n - 1 || m.cols() != F.n - 1)
    throw std::invalid_argument("rotation_m: m must be (n-1) x (n-1)");
  Mat blk = Mat::Identity(d, d);
  blk.block(1, 1, F.n - 1, F.n - 1) = m;
  return blk;
}

Mat group_inverse(const Frame& F, const Mat& g) { return F.J * g.transpose() * F.J; }

double group_defect(const Frame& F, const Mat& g) {
  return (g * F.J * g.transpose() - F.J).cwiseAbs().maxCoeff();
}

bool in_group(const Frame& F, const Mat& g, double tol) {
  const int d = F.n + 1;
  if (g.rows() != d || g.cols() != d) return false;
  const double scale = std::max(1.0, max_norm(g));
  if (group_defect(F, g) > tol * scale * scale) return false;
  if (std::abs(g.determinant() - 1.0) > tol * scale) return false;
  // future cone preserved: the image of the null row e_{n+1} must point up
  // in diagonal coordinates (last coordinate of v P positive).
  Row v = g.row(d - 1);
  return (v * F.P)(d - 1) > 0.0;
}

double max_norm(const Mat& g) { return g.cwiseAbs().maxCoeff(); }

Mat recover_k(const Frame& F, const LightVector& v) {
  const int d = F.n + 1;
  Row vd = v * F.P;  // diagonal coordinates: (y, r) with r = |y| > 0
  const double r = vd(d - 1);
  if (!(r > 0)) throw std::invalid_argument("recover_k: not a future null row");
  Eigen::VectorXd y = vd.head(F.n).transpose() / vd.head(F.n).norm();

  // R in SO(n) with first row y: symmetric Householder reflection sending
  // the first coordinate vector to y (its first row is then y), with a
  // determinant fix on the last row.
  Mat R = Mat::Identity(F.n, F.n);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(F.n);
  w(0) = 1.0;
  w -= y;
  const double wn2 = w.squaredNorm();
  if (wn2 > 1e-24) {
    R -= (2.0 / wn2) * (w * w.transpose());
    R.row(F.n - 1) *= -1.0;  // reflection has det -1
  }
  return rotation(F, R);
}

Iwasawa iwasawa(const Frame& F, const Mat& g) {
  const int d = F.n + 1;
  Iwasawa iw;
  Row v = g.row(d - 1);  // e_{n+1} g
  const double nv = v.norm();
  iw.s = -std::log(nv);
  Mat k0 = recover_k(F, v);
  // g k0^{-1} a_{-s} = u_t mtilde exactly; read off t and the M part.
  Mat h = g * group_inverse(F, k0) * dilation(F, -iw.s);
  iw.t = h.block(1, d - 1, F.n - 1, 1).transpose();
  Mat mt = Mat::Identity(d, d);
  mt.block(1, 1, F.n - 1, F.n - 1) = h.block(1, 1, F.n - 1, F.n - 1);
  iw.k = mt * k0;
  iw.ak = dilation(F, iw.s) * iw.k;
  return iw;
}

LightVector light_vector(const Frame& F, const Mat& psi) { return psi.row(F.n); }

BoundaryPoint unit_null(const Frame& F, const LightVector& v) {
  (void)F;
  return v / v.norm();
}

BoundaryPoint forward_endpoint(const Frame& F, const Mat& g) {
  return unit_null(F, g.row(0));
}

BoundaryPoint backward_endpoint(const Frame& F, const Mat& g) {
  return unit_null(F, g.row(F.n));
}

double chordal(const Frame& F, const BoundaryPoint& a, const BoundaryPoint& b) {
  (void)F;
  return (a - b).norm();
}

BoundaryPoint boundary_from_direction(const Frame& F, const Row& w) {
  const int d = F.n + 1;
  if (w.size() != F.n) throw std::invalid_argument("boundary_from_direction: w in R^n");
  Row vd(d);
  const double r = 1.0 / std::sqrt(2.0);
  vd.head(F.n) = w * r;
  vd(d - 1) = r;
  return vd * F.P;  // P is its own inverse
}

Row direction_of(const Frame& F, const BoundaryPoint& xi) {
  const int d = F.n + 1;
  Row vd = unit_null(F, xi) * F.P;
  return vd.head(F.n) / vd(d - 1);
}

double hyp_distance(const Frame& F, const HPoint& x, const HPoint& y) {
  double c = F.b(x, y);
  if (c < 1.0 - 1e-9)
    throw std::domain_error("hyp_distance: B(x,y) < 1, not hyperboloid points");
  if (c < 1.0) c = 1.0;
  return std::acosh(c);
}

double busemann(const Frame& F, const BoundaryPoint& xi, const HPoint& x,
                const HPoint& y) {
  const double bx = F.b(x, xi);
  const double by = F.b(y, xi);
  if (!(bx > 0) || !(by > 0))
    throw std::domain_error("busemann: nonpositive pairing with xi");
  return std::log(bx / by);
}

double star(const Frame& F, const Mat& psi_x, const Mat& psi_y) {
  const int d = F.n + 1;
  Mat E = Mat::Zero(d, d);
  E(0, d - 1) = 1.0;
  Mat M = group_inverse(F, psi_x) * E * psi_y;
  return std::sqrt(0.5 * max_norm(M));
}

double star_vectors(const Frame& F, const LightVector& vx, const LightVector& vy) {
  (void)F;
  return std::sqrt(0.5 * vx.cwiseAbs().maxCoeff() * vy.cwiseAbs().maxCoeff());
}

Row u_component(const Frame& F, const Mat& psi_x, const Mat& g) {
  return iwasawa(F, psi_x * g).t;
}

Visual visual_inverse(const Frame& F, const Mat& g, const BoundaryPoint& lambda) {
  const int d = F.n + 1;
  Visual out;
  Row m = lambda * group_inverse(F, g);
  const double scale = m.cwiseAbs().maxCoeff();
  // Null-direction check on the ambient quadratic form.  Testing the form
  // before dividing by m(0) keeps the tolerance meaningful near the chart
  // pole, where the quotient q - |t|^2/2 is amplified by 1/m(0)^2.
  const double defect =
      2.0 * m(0) * m(d - 1) - m.segment(1, F.n - 1).squaredNorm();
  if (std::abs(defect) > 1e-9 * scale * scale)
    throw std::runtime_error("visual_inverse: lambda is not a null direction");
  out.m0 = m(0);
  if (std::abs(m(0)) <= 1e-9 * scale) {
    out.pole = true;
    out.t = Row::Zero(F.n - 1);
    return out;
  }
  out.t = m.segment(1, F.n - 1) / m(0);
  return out;
}

}  // namespace horo
