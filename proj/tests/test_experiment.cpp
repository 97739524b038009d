#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "horocount/experiment.hpp"
#include "horocount/io.hpp"
#include "horocount/orbit.hpp"
#include "support.hpp"

using namespace horo;
using namespace horo::xp;

namespace {

BoundaryPoint bd(const Frame& F, double x, double y) {
  Row w(2);
  w << x, y;
  return boundary_from_direction(F, w);
}

forge::GroupSpec make_schottky() {
  const Frame F = Frame::make(2);
  return forge::build_schottky(
      F, {{bd(F, 1, 0), bd(F, -1, 0)}, {bd(F, 0, 1), bd(F, 0, -1)}}, 4.0,
      "schottky2");
}

// shared fixture: group, exponent, atoms, base point, test function
struct Setup {
  forge::GroupSpec spec = make_schottky();
  ps::DeltaFit fit = ps::estimate_delta(spec, 20.0);
  ps::PSMeasureAtoms atoms = ps::build_ps_atoms(spec, fit.delta + 0.1, 22.0);
  Mat psi = forge::radial_basepoint(spec, 0);
  TestFunction phi;

  Setup() {
    phi.f = RadialBump(1.5, 80.0);
    phi.h.center = forge::attracting_point(spec.frame, spec.generators[1]);
    phi.h.radius = 0.6;
  }
};

const Setup& setup() {
  static const Setup s;
  return s;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("radial bump shape and closed-form moments") {
  RadialBump f(2.0, 6.0);
  CHECK(f(2.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(f(6.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(f(4.0) == doctest::Approx(1.0));  // midpoint, z = 0
  CHECK(f(1.9) == 0.0);
  CHECK(f(6.1) == 0.0);
  CHECK(f(3.0) > 0.0);
  CHECK(f(3.0) < 1.0);

  for (double a : {0.0, 0.7, -0.5, 2.0}) {
    const quad::QuadResult q = quad::integrate(
        [&](double r) { return f(r) * std::pow(r, a); }, 2.0, 6.0, 1e-12);
    REQUIRE(q.converged);
    CHECK(f.moment(a, 0.0, 100.0) == doctest::Approx(q.value).epsilon(1e-10));
  }
  // clipping: moment over a sub-interval
  const quad::QuadResult part = quad::integrate(
      [&](double r) { return f(r) * std::pow(r, 0.3); }, 3.0, 5.0, 1e-12);
  CHECK(f.moment(0.3, 3.0, 5.0) == doctest::Approx(part.value).epsilon(1e-10));
  CHECK(f.moment(0.3, 7.0, 9.0) == 0.0);
}

TEST_CASE("log-scale radial bump is symmetric in log rho with exact moments") {
  RadialBump f(2.0, 50.0, true);
  CHECK(f(2.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(f(50.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(f(10.0) == doctest::Approx(1.0));  // geometric midpoint, z = 0
  CHECK(f(1.9) == 0.0);
  CHECK(f(51.0) == 0.0);
  // log-symmetry: 5 and 20 are reflections through the geometric midpoint
  CHECK(f(5.0) == doctest::Approx(f(20.0)).epsilon(1e-12));
  CHECK(f(5.0) > f(3.0));

  // a = -1 drives the exponent k = a + 1 through zero, the series branch of
  // the antiderivative
  for (double a : {0.0, 0.7, -0.5, -1.0, 2.0}) {
    const quad::QuadResult q = quad::integrate(
        [&](double r) { return f(r) * std::pow(r, a); }, 2.0, 50.0, 1e-12);
    REQUIRE(q.converged);
    CHECK(f.moment(a, 0.0, 100.0) == doctest::Approx(q.value).epsilon(1e-10));
  }
  const quad::QuadResult part = quad::integrate(
      [&](double r) { return f(r) * std::pow(r, 0.3); }, 4.0, 30.0, 1e-12);
  CHECK(f.moment(0.3, 4.0, 30.0) == doctest::Approx(part.value).epsilon(1e-10));
  CHECK(f.moment(0.3, 60.0, 90.0) == 0.0);
}

TEST_CASE("angular bump peaks at its center and vanishes off support") {
  const Frame F = Frame::make(2);
  AngularBump h;
  h.center = bd(F, 1, 0);
  h.radius = 0.5;
  CHECK(h(F, h.center) == doctest::Approx(1.0));
  CHECK(h(F, bd(F, -1, 0)) == 0.0);   // antipode, chordal distance 2
  CHECK(h(F, bd(F, 0, 1)) == 0.0);    // chordal sqrt(2) > 0.5
  const BoundaryPoint near = bd(F, 1, 0.05);
  CHECK(h(F, near) > 0.5);
  CHECK(h(F, near) < 1.0);
}

TEST_CASE("plane bump integrates to amp * pi r^2 / 4 in closed form") {
  // int (1 - q^2)^3 over the disk of radius r is pi r^2 / 4
  PlaneBump f{2.0, 0.5, 0.8, 1.0};
  const quad::QuadResult q = quad::integrate2d(
      [&](double x, double y) { return f(x, y); }, f.cx - f.radius,
      f.cx + f.radius, f.cy - f.radius, f.cy + f.radius, 1e-9);
  REQUIRE(q.converged);
  CHECK(q.value ==
        doctest::Approx(M_PI * f.radius * f.radius / 4.0).epsilon(1e-7));
  PlaneBump g = f;
  g.amp = 3.0;
  CHECK(g(2.1, 0.6) == doctest::Approx(3.0 * f(2.1, 0.6)).epsilon(1e-14));
}

TEST_CASE("orbit sum over the identity alone is the test function at x") {
  const Setup& s = setup();
  const Frame& F = s.spec.frame;
  orbit::OrbitBatch only;
  only.pts.push_back({Mat::Identity(3, 3), {}, 1.0, 0.0});
  only.T = 1.0;
  const LightVector vx = light_vector(F, s.psi);
  CHECK(orbit_sum(F, vx, s.phi, only) ==
        doctest::Approx(s.phi.eval_light(F, vx)).epsilon(1e-14));

  // a bump supported far below every orbit norm sums to zero
  TestFunction tiny = s.phi;
  tiny.f = RadialBump(1e-7, 5e-7);
  const orbit::OrbitBatch batch = orbit::enumerate_ball(s.spec, 1e3);
  CHECK(orbit_sum(F, vx, tiny, batch) == 0.0);
}

TEST_CASE("comparison integral is linear in the atom weights") {
  const Setup& s = setup();
  const Frame& F = s.spec.frame;
  ps::PSMeasureAtoms doubled = s.atoms;
  for (auto& a : doubled.atoms) a.w *= 2.0;
  doubled.totalMass *= 2.0;
  const ps::MassProfile p1 = ps::mass_profile(F, s.psi, s.atoms, s.fit.delta);
  const ps::MassProfile p2 = ps::mass_profile(F, s.psi, doubled, s.fit.delta);
  for (double T : {1e2, 1e4}) {
    const double a = eval_I_closed(F, s.psi, s.phi, T, p1, s.atoms,
                                   s.fit.delta);
    const double b = eval_I_closed(F, s.psi, s.phi, T, p2, doubled,
                                   s.fit.delta);
    CHECK(b == doctest::Approx(4.0 * a).epsilon(1e-12));  // weight x profile
  }
}

TEST_CASE("quadrature and closed-form evaluations of I agree") {
  const Setup& s = setup();
  const Frame& F = s.spec.frame;
  const ps::MassProfile prof = ps::mass_profile(F, s.psi, s.atoms,
                                                s.fit.delta);
  for (double T : {30.0, 1e3, 1e5}) {
    const double a = eval_I(F, s.psi, s.phi, T, prof, s.atoms, s.fit.delta);
    const double b = eval_I_closed(F, s.psi, s.phi, T, prof, s.atoms,
                                   s.fit.delta);
    REQUIRE(b > 0);
    CHECK(a == doctest::Approx(b).epsilon(2e-5));
  }
}

TEST_CASE("quadrature and closed-form I agree on a wide log-scale bump") {
  const Setup& s = setup();
  const Frame& F = s.spec.frame;
  const ps::MassProfile prof = ps::mass_profile(F, s.psi, s.atoms,
                                                s.fit.delta);
  TestFunction phi = s.phi;
  phi.f = RadialBump(0.4, 8000.0, true);
  phi.h.radius = 1.2;
  for (double T : {30.0, 1e3, 1e5}) {
    const double a = eval_I(F, s.psi, phi, T, prof, s.atoms, s.fit.delta);
    const double b = eval_I_closed(F, s.psi, phi, T, prof, s.atoms,
                                   s.fit.delta);
    REQUIRE(b > 0);
    CHECK(a == doctest::Approx(b).epsilon(2e-5));
  }

  // near-zero exponent takes the moment-by-moment fallback
  const double deltaTiny = 5e-4;
  const ps::MassProfile profTiny = ps::mass_profile(F, s.psi, s.atoms,
                                                    deltaTiny);
  const double a = eval_I(F, s.psi, phi, 1e3, profTiny, s.atoms, deltaTiny);
  const double b = eval_I_closed(F, s.psi, phi, 1e3, profTiny, s.atoms,
                                 deltaTiny);
  REQUIRE(b > 0);
  CHECK(a == doctest::Approx(b).epsilon(2e-5));
}

TEST_CASE("one-atom comparison integral against independent arithmetic") {
  const Setup& s = setup();
  const Frame& F = s.spec.frame;
  const double delta = 0.3;

  ps::PSMeasureAtoms one;
  one.s = delta + 0.1;
  one.R = 22.0;
  one.totalMass = 1.0;
  ps::Atom a;
  a.xi = forge::attracting_point(F, s.spec.generators[1]);
  a.w = 1.0;
  one.atoms.push_back(a);

  const ps::MassProfile prof = ps::mass_profile(F, s.psi, one, delta);
  REQUIRE(prof.radius.size() == 1);
  const double R0 = prof.radius[0];
  const double w0 = prof.prefix[0];

  TestFunction phi = s.phi;  // h(a.xi) = 1 at the bump center
  const double c = star_vectors(F, light_vector(F, s.psi),
                                Row(a.xi / a.xi.norm()));
  for (double T : {1e3, 1e6}) {
    // I = w0 * int f(r) r^{delta-1} [sqrt(T)/(sqrt(r) c) >= R0] dr
    //   = w0 * moment(delta - 1, rho1, min(rho2, T / (c^2 R0^2)))
    const double hi = std::min(phi.f.rho2, T / (c * c * R0 * R0));
    const double expect = w0 * phi.f.moment(delta - 1.0, phi.f.rho1, hi);
    const double got = eval_I_closed(F, s.psi, phi, T, prof, one, delta);
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("deep-ball scaling of I follows the exponent") {
  const Setup& s = setup();
  const Frame& F = s.spec.frame;
  const ps::MassProfile prof = ps::mass_profile(F, s.psi, s.atoms,
                                                s.fit.delta);
  // once sqrt(T)/c clears every jump radius for the whole bump support, the
  // profile factor is constant and I(T) ~ T^0; before that regime, on the
  // shadow-scaling stretch, I(4T)/I(T) should track 4^{delta/2}
  const double T = 1e4;
  const double r = eval_I_closed(F, s.psi, s.phi, 4 * T, prof, s.atoms,
                                 s.fit.delta) /
                   eval_I_closed(F, s.psi, s.phi, T, prof, s.atoms,
                                 s.fit.delta);
  const double ideal = std::pow(4.0, s.fit.delta / 2.0);
  CHECK(r > ideal / 1.5);
  CHECK(r < ideal * 1.5);
}

TEST_CASE("geometric grids hit both endpoints exactly") {
  const std::vector<double> g = geometric_grid(100.0, 1e6, 9);
  REQUIRE(g.size() == 9);
  CHECK(g.front() == 100.0);
  CHECK(g.back() == 1e6);
  for (std::size_t i = 1; i < g.size(); ++i)
    CHECK(g[i] / g[i - 1] == doctest::Approx(std::pow(1e4, 0.125)));
  CHECK_THROWS_AS(geometric_grid(-1.0, 10.0, 3), io::Error);
  CHECK_THROWS_AS(geometric_grid(10.0, 1.0, 3), io::Error);
}

TEST_CASE("ratio sweep fills every column with finite positive values") {
  const Setup& s = setup();
  const std::vector<double> grid = geometric_grid(1e3, 1e5, 5);
  const std::vector<RatioRecord> rows =
      ratio_sweep(s.spec, s.psi, s.phi, grid, s.atoms, s.fit.delta);
  REQUIRE(rows.size() == grid.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].T == grid[i]);
    CHECK(rows[i].orbitSum > 0);
    CHECK(rows[i].Ivalue > 0);
    CHECK(rows[i].ratio ==
          doctest::Approx(rows[i].orbitSum / rows[i].Ivalue).epsilon(1e-12));
    CHECK(rows[i].Tpower ==
          doctest::Approx(rows[i].orbitSum / std::pow(rows[i].T,
                                                      s.fit.delta / 2.0))
              .epsilon(1e-12));
    CHECK(rows[i].bandIntegral > 0);
    CHECK(rows[i].flags.empty());
  }
  // orbit sums only grow with T
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].orbitSum >= rows[i - 1].orbitSum);
}

TEST_CASE("planar sums scale linearly in the test function") {
  PlaneBump f1{2.0, 0.5, 0.8, 1.0};
  PlaneBump f3 = f1;
  f3.amp = 3.0;
  const std::vector<double> grid{300.0, 1000.0};
  const auto rows = ledrappier_sweep(1.0, 0.0, {f1, f3}, grid);
  REQUIRE(rows.size() == grid.size());
  for (const auto& row : rows) {
    REQUIRE(row.sumOverT.size() == 2);
    CHECK(row.sumOverT[1] ==
          doctest::Approx(3.0 * row.sumOverT[0]).epsilon(1e-12));
    CHECK(row.reference[1] ==
          doctest::Approx(3.0 * row.reference[0]).epsilon(1e-6));
  }
}

TEST_CASE("planar sums match a direct double loop at small radius") {
  PlaneBump f{2.0, 0.5, 0.8, 1.0};
  const double T = 300.0;
  const auto rows = ledrappier_sweep(1.0, 0.0, {f}, {T});
  REQUIRE(rows.size() == 1);

  // independent accumulation via the raw integer scan
  const orbit::DirectScan scan = orbit::direct_scan_sl2z(300);
  double direct = 0;
  for (const auto& m : scan.sl2) {
    if (double(m[0] * m[0] + m[1] * m[1] + m[2] * m[2] + m[3] * m[3]) >
        T * T)
      continue;
    // row vector (1, 0) acted on the right: X gamma = (a, b)
    direct += f(double(m[0]), double(m[1]));
  }
  CHECK(rows[0].sumOverT[0] == doctest::Approx(direct / T).epsilon(1e-9));
  CHECK(rows[0].reference[0] > 0);
}

TEST_CASE("planar sweep rejects degenerate inputs") {
  PlaneBump f{2.0, 0.5, 0.8, 1.0};
  CHECK_THROWS_AS(ledrappier_sweep(0.0, 0.0, {f}, {100.0}), io::Error);
  PlaneBump origin{0.1, 0.0, 0.8, 1.0};
  CHECK_THROWS_AS(ledrappier_sweep(1.0, 0.0, {origin}, {100.0}), io::Error);
}

TEST_CASE("component growth audit is flat and respects window shrinking") {
  const Setup& s = setup();
  const std::vector<double> grid{1e2, 1e4};
  const LemmaAudit audit = lemma_bound_audit(s.spec, s.psi, grid);
  REQUIRE(audit.rows.size() == 2);
  for (const auto& row : audit.rows) {
    CHECK(std::isfinite(row.cstar));
    CHECK(row.cstar >= 0);
    CHECK(row.samples > 0);
    CHECK(row.inclusionsHold);
  }
  CHECK(audit.rows[1].samples >= audit.rows[0].samples);
  CHECK(std::isfinite(audit.growthRatio));

  // a narrower window can only lower the defect supremum
  const LemmaAudit narrow =
      lemma_bound_audit(s.spec, s.psi, grid, 0.5, 5.0);
  CHECK(narrow.windowLo == 0.5);
  CHECK(narrow.windowHi == 5.0);
  CHECK(narrow.rows[1].cstar <= audit.rows[1].cstar + 1e-12);
}

}  // TEST_SUITE
