#include "horocount/groups.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "horocount/io.hpp"

namespace horo::forge {

using io::Error;
using nlohmann::json;

Mat axis_conjugator(const Frame& F, const BoundaryPoint& plus,
                    const BoundaryPoint& minus) {
  const int d = F.n + 1;
  Row p = unit_null(F, plus);
  Row m = unit_null(F, minus);
  const double beta = F.b(p, m);
  if (beta <= 1e-12)
    throw Error("E_AXIS_DEGENERATE", "axis endpoints span the same null ray");

  Mat q(d, d);
  q.row(0) = p;
  q.row(d - 1) = m / beta;

  // Middle rows: orthonormal basis (under -B, positive definite there) of the
  // complement of the two null rows.  Candidate seeds are the standard basis
  // rows; near-degenerate projections are skipped.
  int filled = 0;
  for (int cand = 0; cand < d && filled < F.n - 1; ++cand) {
    Row v = Row::Zero(d);
    v(cand) = 1.0;
    v -= F.b(v, q.row(d - 1)) * q.row(0);
    v -= F.b(v, q.row(0)) * q.row(d - 1);
    for (int j = 1; j <= filled; ++j) v += F.b(v, q.row(j)) * q.row(j);
    const double nrm2 = -F.b(v, v);
    if (nrm2 > 1e-8) {
      q.row(1 + filled) = v / std::sqrt(nrm2);
      ++filled;
    }
  }
  if (filled != F.n - 1)
    throw Error("E_AXIS_DEGENERATE", "could not complete a frame for the axis");
  if (q.determinant() < 0) q.row(1) *= -1.0;
  if (!in_group(F, q, 1e-8))
    throw Error("E_AXIS_DEGENERATE", "axis frame failed the group check");
  return q;
}

Mat hyperbolic_generator(const Frame& F, const BoundaryPoint& plus,
                         const BoundaryPoint& minus, double length) {
  if (!(length > 0))
    throw Error("E_BAD_LENGTH", "translation length must be positive");
  Mat q = axis_conjugator(F, plus, minus);
  return group_inverse(F, q) * dilation(F, length) * q;
}

namespace {

// Left row eigenvector of h for its largest eigenvalue, oriented to the
// future cone; this is the attracting endpoint of the right action.
BoundaryPoint dominant_row(const Frame& F, const Mat& h) {
  Eigen::EigenSolver<Mat> es(h.transpose());
  const auto& vals = es.eigenvalues();
  int best = 0;
  for (int i = 1; i < vals.size(); ++i)
    if (vals(i).real() > vals(best).real()) best = i;
  if (std::abs(vals(best).imag()) > 1e-8 || vals(best).real() <= 1.0 + 1e-12)
    throw Error("E_NOT_HYPERBOLIC", "element has no expanding real eigenvalue");
  Row v = es.eigenvectors().col(best).real().transpose();
  if ((v * F.P)(F.n) < 0) v = -v;
  return unit_null(F, v);
}

}  // namespace

BoundaryPoint attracting_point(const Frame& F, const Mat& h) {
  return dominant_row(F, h);
}

BoundaryPoint repelling_point(const Frame& F, const Mat& h) {
  return dominant_row(F, group_inverse(F, h));
}

PingPong certify_ping_pong(const Frame& F, const std::vector<Mat>& gens,
                           int gridSamples, double minMargin, unsigned seed) {
  PingPong cert;
  const std::size_t k = gens.size();
  if (k == 0) return cert;

  std::vector<BoundaryPoint> centers;
  for (const Mat& h : gens) {
    cert.plus.push_back({attracting_point(F, h), 0.0});
    cert.minus.push_back({repelling_point(F, h), 0.0});
  }
  for (auto& b : cert.plus) centers.push_back(b.center);
  for (auto& b : cert.minus) centers.push_back(b.center);

  double minPair = 2.0;
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 1; j < centers.size(); ++j)
      minPair = std::min(minPair, chordal(F, centers[i], centers[j]));
  const double radius = 0.45 * minPair;
  for (auto& b : cert.plus) b.radius = radius;
  for (auto& b : cert.minus) b.radius = radius;

  // Boundary sample: exact uniform angles on the circle, seeded directions
  // on higher spheres.
  std::vector<BoundaryPoint> grid;
  grid.reserve(gridSamples);
  if (F.n == 2) {
    for (int i = 0; i < gridSamples; ++i) {
      const double th = 2.0 * M_PI * (i + 0.5) / gridSamples;
      Row w(2);
      w << std::cos(th), std::sin(th);
      grid.push_back(boundary_from_direction(F, w));
    }
  } else {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    while ((int)grid.size() < gridSamples) {
      Row w(F.n);
      for (int i = 0; i < F.n; ++i) w(i) = gauss(rng);
      if (w.norm() < 1e-6) continue;
      grid.push_back(boundary_from_direction(F, Row(w / w.norm())));
    }
  }
  cert.gridSamples = gridSamples;

  // Mapping condition: each generator sends the complement of its repelling
  // ball inside its attracting ball (and the inverse the other way round).
  double worstSlack = radius;
  double worstContraction = 0.0;
  bool ok = true;
  for (std::size_t i = 0; i < k; ++i) {
    const Mat inv = group_inverse(F, gens[i]);
    for (const auto& xi : grid) {
      if (chordal(F, xi, cert.minus[i].center) > radius) {
        const double c = chordal(F, unit_null(F, Row(xi * gens[i])),
                                 cert.plus[i].center);
        worstSlack = std::min(worstSlack, radius - c);
        worstContraction = std::max(worstContraction, c / radius);
        if (c > radius) ok = false;
      }
      if (chordal(F, xi, cert.plus[i].center) > radius) {
        const double c =
            chordal(F, unit_null(F, Row(xi * inv)), cert.minus[i].center);
        worstSlack = std::min(worstSlack, radius - c);
        worstContraction = std::max(worstContraction, c / radius);
        if (c > radius) ok = false;
      }
    }
  }

  double disjoint = 2.0;
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 1; j < centers.size(); ++j)
      disjoint = std::min(disjoint,
                          chordal(F, centers[i], centers[j]) - 2.0 * radius);

  // With a single generator the free-group conclusion needs no mapping
  // condition (any infinite-order hyperbolic element generates Z), so the
  // grid check above is recorded for diagnostics but does not gate validity.
  if (k == 1) {
    cert.margin = disjoint;
    cert.contraction = worstContraction;
    cert.valid = cert.margin >= minMargin;
    return cert;
  }

  cert.margin = std::min(worstSlack, disjoint);
  cert.contraction = worstContraction;
  cert.valid = ok && cert.margin >= minMargin;
  return cert;
}

GroupSpec build_schottky(
    const Frame& F,
    const std::vector<std::pair<BoundaryPoint, BoundaryPoint>>& axes,
    double length, const std::string& label) {
  GroupSpec spec;
  spec.frame = F;
  spec.kind = "schottky";
  spec.label = label;
  for (const auto& [p, m] : axes)
    spec.generators.push_back(hyperbolic_generator(F, p, m, length));
  spec.cert = certify_ping_pong(F, spec.generators);
  if (!spec.cert.valid)
    throw Error("E_CERT_FAIL", "ping-pong certificate failed",
                {{"margin", spec.cert.margin}});
  return spec;
}

GroupSpec build_cyclic(const Frame& F, const BoundaryPoint& plus,
                       const BoundaryPoint& minus, double length,
                       const std::string& label) {
  GroupSpec spec;
  spec.frame = F;
  spec.kind = "cyclic";
  spec.label = label;
  spec.generators.push_back(hyperbolic_generator(F, plus, minus, length));
  spec.cert = certify_ping_pong(F, spec.generators);
  if (!spec.cert.valid)
    throw Error("E_CERT_FAIL", "ping-pong certificate failed",
                {{"margin", spec.cert.margin}});
  return spec;
}

Mat sl2_to_so21(double a, double b, double c, double d) {
  const double r2 = std::sqrt(2.0);
  Mat g(3, 3);
  g << a * a, r2 * a * b, b * b,
       r2 * a * c, a * d + b * c, r2 * b * d,
       c * c, r2 * c * d, d * d;
  return g;
}

Mat sl2_to_so21(const Eigen::Matrix2d& m) {
  return sl2_to_so21(m(0, 0), m(0, 1), m(1, 0), m(1, 1));
}

GroupSpec sl2z_lattice() {
  GroupSpec spec;
  spec.frame = Frame::make(2);
  spec.kind = "sl2z_lattice";
  spec.label = "sl2z";
  spec.generators.push_back(sl2_to_so21(0, -1, 1, 0));  // the form matrix J
  spec.generators.push_back(sl2_to_so21(1, 1, 0, 1));   // u_{sqrt 2}
  return spec;
}

// --- persistence -------------------------------------------------------------

namespace {

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Mat mat_from_json(const json& j, int rows, int cols) {
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
  return m;
}

json row_to_json(const Row& r) {
  json out = json::array();
  for (int i = 0; i < r.size(); ++i) out.push_back(r(i));
  return out;
}

Row row_from_json(const json& j) {
  Row r(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) r(i) = j.at(i).get<double>();
  return r;
}

}  // namespace

void save_group(const GroupSpec& spec, const std::string& path) {
  json j;
  j["format"] = "horocount-group-v1";
  j["n"] = spec.frame.n;
  j["kind"] = spec.kind;
  j["label"] = spec.label;
  json gens = json::array();
  for (const Mat& g : spec.generators) gens.push_back(mat_to_json(g));
  j["generators"] = gens;
  if (spec.free_kind()) {
    json cert;
    cert["valid"] = spec.cert.valid;
    cert["margin"] = spec.cert.margin;
    cert["contraction"] = spec.cert.contraction;
    cert["grid_samples"] = spec.cert.gridSamples;
    json plus = json::array(), minus = json::array();
    for (const auto& b : spec.cert.plus)
      plus.push_back({{"center", row_to_json(b.center)}, {"radius", b.radius}});
    for (const auto& b : spec.cert.minus)
      minus.push_back({{"center", row_to_json(b.center)}, {"radius", b.radius}});
    cert["plus"] = plus;
    cert["minus"] = minus;
    j["certificate"] = cert;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("E_IO", "cannot write group file", {{"path", path}});
  out << j.dump(2) << "\n";
}

GroupSpec load_group(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("E_GROUP_NOT_FOUND", "group file not found", {{"path", path}});
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error("E_GROUP_INVALID", std::string("group file is not JSON: ") + e.what(),
                {{"path", path}});
  }
  GroupSpec spec;
  try {
    const int n = j.at("n").get<int>();
    spec.frame = Frame::make(n);
    spec.kind = j.at("kind").get<std::string>();
    spec.label = j.value("label", "");
    for (const auto& gj : j.at("generators"))
      spec.generators.push_back(mat_from_json(gj, n + 1, n + 1));
    if (j.contains("certificate")) {
      const json& c = j["certificate"];
      spec.cert.valid = c.value("valid", false);
      spec.cert.margin = c.value("margin", 0.0);
      spec.cert.contraction = c.value("contraction", 0.0);
      spec.cert.gridSamples = c.value("grid_samples", 0);
      for (const auto& b : c.at("plus"))
        spec.cert.plus.push_back(
            {row_from_json(b.at("center")), b.at("radius").get<double>()});
      for (const auto& b : c.at("minus"))
        spec.cert.minus.push_back(
            {row_from_json(b.at("center")), b.at("radius").get<double>()});
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error("E_GROUP_INVALID", std::string("malformed group file: ") + e.what(),
                {{"path", path}});
  }
  validate_group(spec);
  return spec;
}

void validate_group(const GroupSpec& spec, double tol) {
  const Frame& F = spec.frame;
  if (F.n < 2) throw Error("E_GROUP_INVALID", "dimension must be >= 2");
  if (spec.kind != "schottky" && spec.kind != "cyclic" &&
      spec.kind != "sl2z_lattice")
    throw Error("E_GROUP_INVALID", "unknown group kind", {{"kind", spec.kind}});
  if (spec.generators.empty())
    throw Error("E_GROUP_INVALID", "no generators");
  for (const Mat& g : spec.generators)
    if (!in_group(F, g, tol))
      throw Error("E_GROUP_INVALID", "generator is not in the group");
  if (spec.free_kind()) {
    if (!spec.cert.valid ||
        spec.cert.plus.size() != spec.generators.size() ||
        spec.cert.minus.size() != spec.generators.size())
      throw Error("E_GROUP_INVALID", "free group without a valid certificate");
    // cheap re-checks of the stored certificate: ball disjointness and the
    // mapping condition on a coarse grid
    PingPong fresh = certify_ping_pong(F, spec.generators, 2000);
    if (!fresh.valid)
      throw Error("E_GROUP_INVALID", "certificate re-check failed",
                  {{"margin", fresh.margin}});
  }
}

Mat radial_basepoint(const GroupSpec& spec, int genIdx) {
  const Frame& F = spec.frame;
  BoundaryPoint lambda;
  if (spec.kind == "sl2z_lattice") {
    // generators are elliptic/parabolic; use a fixed hyperbolic word instead
    lambda = attracting_point(F, sl2_to_so21(2, 1, 1, 1));
  } else {
    if (genIdx < 0 || genIdx >= (int)spec.generators.size())
      throw Error("E_BAD_ARG", "generator index out of range");
    lambda = attracting_point(F, spec.generators[genIdx]);
  }
  // AK representative (a = identity) whose backward endpoint is lambda.
  return recover_k(F, lambda);
}

}  // namespace horo::forge
