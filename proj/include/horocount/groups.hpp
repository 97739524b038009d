#pragma once

// Construction and validation of the discrete groups the experiments run on:
// Schottky groups from boundary axis data, the symmetric-square image of
// SL2(Z), and rank-one (cyclic) hyperbolic groups.  Free products come with
// a grid-checked ping-pong certificate.

#include <string>
#include <utility>
#include <vector>

#include "horocount/core.hpp"

namespace horo::forge {

// Ping-pong data: one attracting and one repelling chordal ball per
// generator.  The certificate records the worst margins seen on a boundary
// sample grid; valid == false means the check failed and the group must not
// be treated as certified-free.
struct PingPong {
  struct Ball {
    BoundaryPoint center;
    double radius = 0;
  };
  std::vector<Ball> plus;   // images of everything outside minus[i] land here
  std::vector<Ball> minus;
  double margin = 0;        // min over ball disjointness gaps and mapping slack
  double contraction = 0;   // max chord(image, plus-center)/radius observed
  int gridSamples = 0;
  bool valid = false;
};

struct GroupSpec {
  Frame frame;
  std::string kind;    // "schottky" | "cyclic" | "sl2z_lattice"
  std::string label;
  std::vector<Mat> generators;
  PingPong cert;       // meaningful for schottky/cyclic only

  bool free_kind() const { return kind == "schottky" || kind == "cyclic"; }
};

// Element of the group with first row spanning plus and last row spanning
// minus (so conjugating the diagonal flow by it gives the translation along
// the (minus -> plus) axis).
Mat axis_conjugator(const Frame& F, const BoundaryPoint& plus,
                    const BoundaryPoint& minus);

// Hyperbolic element with the given attracting/repelling points and
// translation length.
Mat hyperbolic_generator(const Frame& F, const BoundaryPoint& plus,
                         const BoundaryPoint& minus, double length);

BoundaryPoint attracting_point(const Frame& F, const Mat& h);
BoundaryPoint repelling_point(const Frame& F, const Mat& h);

// Grid-checked ping-pong certificate for the given generators: chooses a
// uniform ball radius from the fixed-point configuration, measures the
// actual contraction on >= gridSamples boundary points, and verifies
// disjointness and the mapping conditions with margin >= minMargin.
PingPong certify_ping_pong(const Frame& F, const std::vector<Mat>& gens,
                           int gridSamples = 20000, double minMargin = 1e-6,
                           unsigned seed = 12345);

// Schottky group from axis endpoint pairs, all with the same translation
// length; throws if the ping-pong certificate fails.
GroupSpec build_schottky(
    const Frame& F,
    const std::vector<std::pair<BoundaryPoint, BoundaryPoint>>& axes,
    double length, const std::string& label);

// Rank-one group generated by one hyperbolic element.
GroupSpec build_cyclic(const Frame& F, const BoundaryPoint& plus,
                       const BoundaryPoint& minus, double length,
                       const std::string& label);

// --- SL2(Z) and the symmetric square ----------------------------------------

// Symmetric-square homomorphism SL2(R) -> SO(2,1)° in this frame, on the
// basis (x^2, sqrt2 xy, y^2):  diag(e^{s/2}, e^{-s/2}) maps to a_s and
// [[1,1],[0,1]] maps to u_{sqrt2}.  Kernel {+-I}.
Mat sl2_to_so21(double a, double b, double c, double d);
Mat sl2_to_so21(const Eigen::Matrix2d& m);

// Max-norm squaring band: |m|^2 <= |rho(m)| <= normSquareUpper * |m|^2.
inline constexpr double kNormSquareLower = 1.0;
inline constexpr double kNormSquareUpper = 2.0;

// The lattice rho(SL2(Z)) with generators rho(S), rho(T).
GroupSpec sl2z_lattice();

// --- persistence -------------------------------------------------------------

// JSON round-trip with full double precision.  validate_group throws an
// io::Error (code E_GROUP_INVALID) on malformed data and re-checks the
// certificate on load.
void save_group(const GroupSpec& spec, const std::string& path);
GroupSpec load_group(const std::string& path);
void validate_group(const GroupSpec& spec, double tol = 1e-9);

// --- base points -------------------------------------------------------------

// AK representative whose backward endpoint is the attracting fixed point of
// generator genIdx (a radial limit point), with unit light vector.
Mat radial_basepoint(const GroupSpec& spec, int genIdx);

}  // namespace horo::forge
