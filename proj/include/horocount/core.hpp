#pragma once

// Linear-algebra kernel for the identity component of the Lorentz group
// SO(n,1)° acting on row vectors from the right, in the "off-diagonal" frame
// where the invariant bilinear form is
//
//     B(x, y) = x J y^T,   J = [[0, 0, 1], [0, -I_{n-1}, 0], [1, 0, 0]],
//
// i.e. Q(x) = 2 x_1 x_{n+1} - x_2^2 - ... - x_n^2.  In this frame the
// horospherical translations u_t, the diagonal flow a_s and the compact
// factors have exact closed forms, and inverses are free: g^{-1} = J g^T J.
//
// Hyperbolic n-space is the upper sheet {B(x,x) = 1, future}, the boundary
// sphere is the future null cone up to positive scaling, and V = e_{n+1} G
// is the full future null cone.

#include <Eigen/Dense>

namespace horo {

using Mat = Eigen::MatrixXd;
using Row = Eigen::RowVectorXd;

// Aliases that say what a Row is used as.  A BoundaryPoint is kept as the
// unit-Euclidean-norm future null representative of its ray (the Euclidean
// norm is frame-independent here because the diagonalizing change of basis
// is orthogonal).  An HPoint x satisfies B(x,x) = 1 on the future sheet.
// A LightVector is any positively scaled future null row.
using BoundaryPoint = Row;
using HPoint = Row;
using LightVector = Row;

// Fixed-dimension context.  n >= 2 is the hyperbolic dimension; all matrices
// are (n+1) x (n+1).
struct Frame {
  int n = 2;
  Mat J;        // bilinear form
  Mat P;        // symmetric orthogonal involution with P J P^T = diag(-I_n, 1)
  HPoint o;     // base point e_{n+1} P = (1/sqrt2, 0, ..., 0, 1/sqrt2)
  BoundaryPoint wplus;   // e_1: forward fixed direction of a_s (s > 0)
  BoundaryPoint wminus;  // e_{n+1}: backward direction; u_t fixes it exactly

  static Frame make(int n);

  double b(const Row& x, const Row& y) const {
    return x * J * y.transpose();
  }
};

// --- element construction and validation -----------------------------------

// Horospherical translation u_t, t a row vector in R^{n-1}:
//   [[1, t, |t|^2/2], [0, I, t^T], [0, 0, 1]].
Mat translation(const Frame& F, const Row& t);

// Diagonal flow a_s = diag(e^s, 1, ..., 1, e^{-s}).
Mat dilation(const Frame& F, double s);

// Embed R in SO(n) as the stabilizer of the base point: P blockdiag(R,1) P.
Mat rotation(const Frame& F, const Mat& R);

// Embed m in SO(n-1) as blockdiag(1, m, 1) (commutes with a_s, fixes both
// w+ and w-).
Mat rotation_m(const Frame& F, const Mat& m);

// Exact inverse J g^T J (valid precisely on the group).
Mat group_inverse(const Frame& F, const Mat& g);

// ‖g J g^T − J‖_max: zero on the group, used for validation and drift checks.
double group_defect(const Frame& F, const Mat& g);

// Membership in SO(n,1)°: form preserved to tol (relative), det = +1,
// future cone preserved.
bool in_group(const Frame& F, const Mat& g, double tol = 1e-9);

// Max norm (largest absolute entry) — the norm all ball thresholds use.
double max_norm(const Mat& g);

// --- Iwasawa decomposition ---------------------------------------------------

// g = u_t a_s k with k stabilizing o.  ak = a_s k is the canonical coset
// representative of U g (the "AK part").
struct Iwasawa {
  Row t;    // R^{n-1}
  double s = 0;
  Mat k;
  Mat ak;
};

// A rotation k with  v / ‖v‖₂ = e_{n+1} k,  for a future null row v.
// The M-coset of k is determined; this picks a fixed representative
// (Householder completion, deterministic).
Mat recover_k(const Frame& F, const LightVector& v);

Iwasawa iwasawa(const Frame& F, const Mat& g);

// e_{n+1} · psi: the null-cone coordinates of the coset with AK part psi.
LightVector light_vector(const Frame& F, const Mat& psi);

// --- boundary geometry -------------------------------------------------------

// Scale a future null row to Euclidean norm 1 (canonical boundary rep).
BoundaryPoint unit_null(const Frame& F, const LightVector& v);

// Forward/backward visual endpoints of g: the rays [e_1 g] and [e_{n+1} g].
BoundaryPoint forward_endpoint(const Frame& F, const Mat& g);
BoundaryPoint backward_endpoint(const Frame& F, const Mat& g);

// Euclidean distance between unit representatives (chordal metric; maximum
// value sqrt(2) for antipodal rays).
double chordal(const Frame& F, const BoundaryPoint& a, const BoundaryPoint& b);

// Boundary point with given spatial direction w in S^{n-1} (diagonal
// coordinates), and the inverse map.
BoundaryPoint boundary_from_direction(const Frame& F, const Row& w);
Row direction_of(const Frame& F, const BoundaryPoint& xi);

// Hyperbolic distance: cosh d(x,y) = B(x,y) for points on the future sheet.
// Values of B in [1 - 1e-9, 1] clamp to distance 0; smaller values throw.
double hyp_distance(const Frame& F, const HPoint& x, const HPoint& y);

// Busemann cocycle at xi:  lim_{t->inf} d(x, xi_t) - d(y, xi_t)
//                        = log( B(x, xi) / B(y, xi) ),
// positive when y is closer to xi; independent of the scaling of xi.
double busemann(const Frame& F, const BoundaryPoint& xi, const HPoint& x,
                const HPoint& y);

// --- the star product and U-components --------------------------------------

// x ⋆ y = sqrt( ‖Ψ(x)^{-1} E_{1,n+1} Ψ(y)‖_max / 2 ), literal form.
double star(const Frame& F, const Mat& psi_x, const Mat& psi_y);

// Equal rank-one form: sqrt( ‖v_x‖_max ‖v_y‖_max / 2 ) on light vectors,
// because Ψ(x)^{-1} E_{1,n+1} Ψ(y) = (J v_x^T) v_y.
double star_vectors(const Frame& F, const LightVector& vx,
                    const LightVector& vy);

// U-component c_x(g): the t of the Iwasawa decomposition of Ψ(x) g.
Row u_component(const Frame& F, const Mat& psi_x, const Mat& g);

// --- visual inverse ----------------------------------------------------------

// Solve (u_t g)^+ = lambda for t.  pole = true when lambda is the backward
// endpoint of g (no solution; t is then meaningless).
struct Visual {
  Row t;
  bool pole = false;
  // First coordinate of lambda * g^{-1}.  For the chart point y directly
  // under lambda on the unipotent line through g, b(y, lambda) = m0 / sqrt(2)
  // exactly, so conformal weights can be formed without the cancellation-prone
  // pairing of a large chart point with lambda.
  double m0 = 0.0;
};
Visual visual_inverse(const Frame& F, const Mat& g, const BoundaryPoint& lambda);

}  // namespace horo
