#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "horocount/groups.hpp"
#include "horocount/io.hpp"
#include "support.hpp"

using namespace horo;
using namespace horo::forge;
namespace fs = std::filesystem;

namespace {

BoundaryPoint bd(const Frame& F, double x, double y) {
  Row w(2);
  w << x, y;
  return boundary_from_direction(F, w);
}

GroupSpec test_schottky(double length = 4.0) {
  const Frame F = Frame::make(2);
  return build_schottky(
      F, {{bd(F, 1, 0), bd(F, -1, 0)}, {bd(F, 0, 1), bd(F, 0, -1)}}, length,
      "schottky2");
}

Eigen::Matrix2d m2(double a, double b, double c, double d) {
  Eigen::Matrix2d m;
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_SUITE("groups") {

TEST_CASE("axis conjugator maps the standard axis onto the given one") {
  std::mt19937_64 rng(71);
  for (int n : {2, 3, 4}) {
    const Frame F = Frame::make(n);
    for (int trial = 0; trial < 50; ++trial) {
      const BoundaryPoint plus = horotest::random_boundary(F, rng);
      const BoundaryPoint minus = horotest::random_boundary(F, rng);
      if (chordal(F, plus, minus) < 0.2) continue;
      const Mat q = axis_conjugator(F, plus, minus);
      CHECK(in_group(F, q, 1e-8));
      // first row spans plus, last row spans minus
      CHECK(chordal(F, unit_null(F, q.row(0)), plus) < 1e-8);
      CHECK(chordal(F, unit_null(F, q.row(n)), minus) < 1e-8);
    }
  }
}

TEST_CASE("hyperbolic generator translates its axis by the given length") {
  std::mt19937_64 rng(72);
  const Frame F = Frame::make(3);
  for (int trial = 0; trial < 20; ++trial) {
    const BoundaryPoint plus = horotest::random_boundary(F, rng);
    const BoundaryPoint minus = horotest::random_boundary(F, rng);
    if (chordal(F, plus, minus) < 0.3) continue;
    const double ell = 0.5 + 0.2 * trial;
    const Mat h = hyperbolic_generator(F, plus, minus, ell);
    CHECK(in_group(F, h, 1e-8));

    // the attracting row is scaled by e^ell exactly
    const Mat q = axis_conjugator(F, plus, minus);
    const Row lam = q.row(0);
    CHECK(((lam * h) - std::exp(ell) * lam).cwiseAbs().maxCoeff() <
          1e-8 * std::exp(ell));

    // a point on the axis moves by exactly ell
    const HPoint axisPoint = F.o * q;
    CHECK(hyp_distance(F, Row(axisPoint * h), axisPoint) ==
          doctest::Approx(ell).epsilon(1e-9));

    CHECK(chordal(F, attracting_point(F, h), plus) < 1e-7);
    CHECK(chordal(F, repelling_point(F, h), minus) < 1e-7);
  }
}

TEST_CASE("ping-pong certificate holds for well-separated axes") {
  const GroupSpec spec = test_schottky();
  CHECK(spec.cert.valid);
  CHECK(spec.cert.margin > 0.05);
  CHECK(spec.cert.contraction < 0.2);
  CHECK(spec.cert.plus.size() == 2);
  // balls around the four cardinal fixed points, uniform radius
  for (const auto& b : spec.cert.plus) CHECK(b.radius > 0.3);
}

TEST_CASE("certification rejects a weakly contracting configuration") {
  const Frame F = Frame::make(2);
  CHECK_THROWS_AS(
      build_schottky(
          F, {{bd(F, 1, 0), bd(F, -1, 0)}, {bd(F, 0, 1), bd(F, 0, -1)}}, 0.3,
          "weak"),
      io::Error);
}

TEST_CASE("symmetric square is a homomorphism hitting the right generators") {
  const Frame F = Frame::make(2);
  // the generator images pin the normalization
  CHECK((sl2_to_so21(0, -1, 1, 0) - F.J).cwiseAbs().maxCoeff() < 1e-15);
  Row t(1);
  t << std::sqrt(2.0);
  CHECK((sl2_to_so21(1, 1, 0, 1) - translation(F, t)).cwiseAbs().maxCoeff() <
        1e-15);
  for (double s : {0.3, -1.2}) {
    const double e = std::exp(s / 2.0);
    CHECK((sl2_to_so21(e, 0, 0, 1.0 / e) - dilation(F, s))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }

  // multiplicativity and the +-I kernel on random integer words
  std::mt19937_64 rng(73);
  std::uniform_int_distribution<int> pick(-3, 3);
  Eigen::Matrix2d A = m2(1, 0, 0, 1);
  for (int i = 0; i < 40; ++i) {
    const Eigen::Matrix2d B =
        i % 2 ? m2(1, pick(rng), 0, 1) : m2(1, 0, pick(rng), 1);
    const Mat lhs = sl2_to_so21(Eigen::Matrix2d(A * B));
    const Mat rhs = sl2_to_so21(A) * sl2_to_so21(B);
    const double scale = std::max(1.0, max_norm(lhs));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12 * scale);
    A = A * B;
    CHECK((sl2_to_so21(Eigen::Matrix2d(-A)) - sl2_to_so21(A))
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK(in_group(F, sl2_to_so21(A), 1e-6));
  }
}

TEST_CASE("max-norm squaring band for the symmetric square") {
  std::mt19937_64 rng(74);
  std::uniform_int_distribution<int> pick(-9, 9);
  int checked = 0;
  while (checked < 200) {
    const double a = pick(rng), b = pick(rng), c = pick(rng), d = pick(rng);
    if (std::abs(a * d - b * c - 1.0) > 1e-12) continue;
    ++checked;
    const double mn = std::max({std::abs(a), std::abs(b), std::abs(c),
                                std::abs(d)});
    const double rn = max_norm(sl2_to_so21(a, b, c, d));
    CHECK(rn >= kNormSquareLower * mn * mn - 1e-9);
    CHECK(rn <= kNormSquareUpper * mn * mn + 1e-9);
  }
}

TEST_CASE("group files round-trip and validate") {
  const fs::path dir = fs::temp_directory_path() / "horotest-groups";
  fs::create_directories(dir);
  const GroupSpec spec = test_schottky();
  const std::string path = (dir / "roundtrip.group.json").string();
  save_group(spec, path);
  const GroupSpec back = load_group(path);
  REQUIRE(back.generators.size() == spec.generators.size());
  for (std::size_t i = 0; i < spec.generators.size(); ++i)
    CHECK((back.generators[i] - spec.generators[i]).cwiseAbs().maxCoeff() <
          1e-13);
  CHECK(back.kind == "schottky");
  CHECK(back.cert.valid);
  CHECK(back.cert.margin == doctest::Approx(spec.cert.margin).epsilon(1e-9));

  const GroupSpec lat = sl2z_lattice();
  const std::string latPath = (dir / "lattice.group.json").string();
  save_group(lat, latPath);
  CHECK(load_group(latPath).kind == "sl2z_lattice");
}

TEST_CASE("loading rejects missing and malformed files") {
  const fs::path dir = fs::temp_directory_path() / "horotest-groups";
  fs::create_directories(dir);
  try {
    load_group((dir / "no-such-file.json").string());
    FAIL("expected an error");
  } catch (const io::Error& e) {
    CHECK(e.code == "E_GROUP_NOT_FOUND");
  }
  const std::string bad = (dir / "bad.group.json").string();
  std::ofstream(bad) << "{ not json";
  try {
    load_group(bad);
    FAIL("expected an error");
  } catch (const io::Error& e) {
    CHECK(e.code == "E_GROUP_INVALID");
  }
  // valid JSON, broken matrix: a generator that is not in the group
  const std::string broken = (dir / "broken.group.json").string();
  std::ofstream(broken)
      << "{\"n\":2,\"kind\":\"sl2z_lattice\",\"label\":\"x\","
         "\"generators\":[[[1,0,0],[0,2,0],[0,0,1]]]}";
  try {
    load_group(broken);
    FAIL("expected an error");
  } catch (const io::Error& e) {
    CHECK(e.code == "E_GROUP_INVALID");
  }
}

TEST_CASE("radial basepoint is an AK matrix aimed at a fixed point") {
  const GroupSpec spec = test_schottky();
  const Frame& F = spec.frame;
  for (int i : {0, 1}) {
    const Mat psi = radial_basepoint(spec, i);
    CHECK(in_group(F, psi, 1e-9));
    const Iwasawa iw = iwasawa(F, psi);
    CHECK(iw.t.cwiseAbs().maxCoeff() < 1e-9);  // no horospherical part
    CHECK(std::abs(iw.s) < 1e-9);              // unit light vector
    const BoundaryPoint target = attracting_point(F, spec.generators[i]);
    CHECK(chordal(F, backward_endpoint(F, psi), target) < 1e-8);
    CHECK(std::abs(light_vector(F, psi).norm() - 1.0) < 1e-12);
  }
  // the lattice has a fixed hyperbolic word for this purpose
  const Mat psiLat = radial_basepoint(sl2z_lattice(), 0);
  CHECK(in_group(Frame::make(2), psiLat, 1e-9));
}

TEST_CASE("lattice spec validates and has involutive first generator") {
  const GroupSpec lat = sl2z_lattice();
  validate_group(lat);
  const Mat s2 = lat.generators[0] * lat.generators[0];
  CHECK((s2 - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
}

}  // TEST_SUITE
