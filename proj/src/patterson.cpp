#include "horocount/patterson.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "horocount/io.hpp"

namespace horo::ps {

using io::Error;

namespace {

struct Fit {
  double slope = 0;
  double intercept = 0;
  double se = 0;  // standard error of the slope
};

Fit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  Fit f;
  const std::size_t n = x.size();
  if (n < 2) return f;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - (f.intercept + f.slope * x[i]);
      ss += r * r;
    }
    f.se = std::sqrt(ss / ((n - 2) * sxx));
  }
  return f;
}

long count_below(const std::vector<double>& sorted, double R) {
  return static_cast<long>(
      std::upper_bound(sorted.begin(), sorted.end(), R) - sorted.begin());
}

}  // namespace

double poincare_series(const forge::GroupSpec& spec, double s, double Rcutoff) {
  double sum = 0;
  for (double d : orbit::orbit_distances(spec, Rcutoff))
    sum += std::exp(-s * d);
  return sum;
}

DeltaFit estimate_delta(const forge::GroupSpec& spec, double Rmax) {
  const std::vector<double> dists = orbit::orbit_distances(spec, Rmax);
  const long N = static_cast<long>(dists.size());
  if (N < 200) {
    const double crude =
        N > 1 ? std::log(static_cast<double>(N)) / Rmax : 0.1;
    const double suggested =
        std::min(3.0 * Rmax, Rmax + std::log(200.0 / std::max(1L, N)) /
                                        std::max(0.05, crude));
    throw Error("E_TOO_FEW_POINTS",
                "too few orbit points below Rmax for a stable exponent fit",
                {{"count", N}, {"Rmax", Rmax}, {"suggestedRmax", suggested}});
  }

  DeltaFit out;

  // Growth regression: log N(R) against R on [Rmax/2, Rmax].
  {
    std::vector<double> xs, ys;
    for (int i = 0; i < 9; ++i) {
      const double R = Rmax / 2.0 + (Rmax / 2.0) * i / 8.0;
      xs.push_back(R);
      ys.push_back(std::log(static_cast<double>(count_below(dists, R))));
    }
    const Fit f = least_squares(xs, ys);
    out.growth = {f.slope, f.se, "growth_regression", Rmax / 2.0, Rmax};
  }

  // Poincare-series abscissa: shell sums Q(r) = sum e^{-s d} over d in
  // [r, r+w) decay like e^{(delta-s) r}, so delta = s + slope of log Q.
  {
    const double pilot =
        std::min(std::max(out.growth.delta, 0.05), spec.frame.n - 1 + 0.5);
    double width = 1.0;
    const double rLo = Rmax / 3.0;
    auto shells_for = [&](double w) {
      std::vector<std::pair<double, long>> shells;  // (sum d, count) per shell
      const int nsh = static_cast<int>(std::floor((Rmax - rLo) / w));
      shells.assign(nsh, {0.0, 0});
      for (double d : dists) {
        if (d < rLo || d > Rmax) continue;
        const int idx = std::min(nsh - 1, static_cast<int>((d - rLo) / w));
        if (idx >= 0) {
          shells[idx].first += d;
          shells[idx].second += 1;
        }
      }
      return shells;
    };
    for (double w : {1.0, 2.0, Rmax / 6.0}) {
      width = w;
      long nonempty = 0;
      for (const auto& sh : shells_for(w))
        if (sh.second > 0) ++nonempty;
      if (nonempty >= 5) break;
    }
    const auto shells = shells_for(width);

    std::vector<double> deltaHats, fitSes;
    for (double s : {pilot + 0.25, pilot + 0.5}) {
      std::vector<double> xs, ys;
      for (std::size_t i = 0; i < shells.size(); ++i) {
        if (shells[i].second == 0) continue;
        const double mid = shells[i].first / shells[i].second;
        double q = 0;
        const double lo = rLo + width * i, hi = lo + width;
        for (double d : dists)
          if (d >= lo && d < hi) q += std::exp(-s * d);
        xs.push_back(mid);
        ys.push_back(std::log(q));
      }
      const Fit f = least_squares(xs, ys);
      deltaHats.push_back(s + f.slope);
      fitSes.push_back(f.se);
    }
    const double dp = 0.5 * (deltaHats[0] + deltaHats[1]);
    const double spread = std::abs(deltaHats[0] - deltaHats[1]) / 2.0;
    const double se = std::max({fitSes[0], fitSes[1], spread});
    out.poincare = {dp, se, "poincare_abscissa", rLo, Rmax};
  }

  out.delta = out.growth.delta;
  out.flagged = std::abs(out.growth.delta - out.poincare.delta) >
                2.0 * std::max(out.growth.stderr_, out.poincare.stderr_);
  return out;
}

PSMeasureAtoms build_ps_atoms(const forge::GroupSpec& spec, double s, double R,
                              std::size_t minAtoms) {
  const Frame& F = spec.frame;
  PSMeasureAtoms out;
  out.s = s;
  out.R = R;

  // Collect (group element, distance) pairs with d <= R.
  std::vector<std::pair<Mat, double>> pts;
  if (spec.kind == "sl2z_lattice") {
    const int T = static_cast<int>(std::ceil(std::sqrt(2.0 * std::cosh(R))));
    if (T > 500)
      throw Error("E_SCAN_BUDGET", "atom annulus needs an integer scan beyond 500",
                  {{"R", R}});
    orbit::DirectScan scan = orbit::direct_scan_sl2z(T);
    for (auto& p : scan.rho.pts)
      if (p.dist <= R) pts.emplace_back(std::move(p.g), p.dist);
  } else {
    const double T = std::pow(F.n + 1.0, 2.0) * std::exp(R);
    orbit::OrbitBatch batch = orbit::enumerate_ball(spec, T);
    for (auto& p : batch.pts)
      if (p.dist <= R) pts.emplace_back(std::move(p.g), p.dist);
  }

  for (const auto& [g, d] : pts) {
    if (d < R / 2.0 || d > R) continue;
    // project o g to the boundary along the ray from o: in diagonal
    // coordinates the point is (sinh(d) w, cosh(d)) with w the direction
    const Row yd = (F.o * g) * F.P;
    const Row spatial = yd.head(F.n);
    const double sn = spatial.norm();
    if (sn < 1e-12) continue;  // d > 0 on the annulus, so this never fires
    Atom a;
    a.xi = boundary_from_direction(F, Row(spatial / sn));
    a.w = std::exp(-s * d);
    out.rawMass += a.w;
    out.atoms.push_back(std::move(a));
  }
  if (out.atoms.size() < minAtoms) {
    const double suggested = R + 2.0 / std::max(0.1, s - 0.1);
    throw Error("E_TOO_FEW_ATOMS", "too few orbit points in the annulus",
                {{"found", out.atoms.size()},
                 {"minAtoms", minAtoms},
                 {"R", R},
                 {"suggestedR", suggested}});
  }
  for (auto& a : out.atoms) a.w /= out.rawMass;
  out.totalMass = 1.0;
  return out;
}

namespace {

// Conformal weight e^{delta * b_xi(o, y)} for the chart point y of xi on the
// unipotent line through g.  Writing m = xi g^{-1}, the pairing b(y, xi)
// collapses algebraically to m(0)/sqrt(2), so the weight is
// (b(o, xi) * sqrt(2) / m(0))^delta.  Forming y explicitly and pairing it
// with xi is equivalent in exact arithmetic but loses all precision near the
// chart pole, where |y| ~ |t|^2 and the pairing is a tiny difference of huge
// terms.  The closed form is also exactly covariant: a dilation of the base
// multiplies m(0) by a single matrix entry.
double conformal_weight(const Frame& F, const BoundaryPoint& xi, double m0,
                        double delta) {
  const double by = m0 / std::numbers::sqrt2;
  if (!(by > 0))
    throw std::domain_error("conformal_weight: nonpositive pairing with xi");
  return std::pow(F.b(F.o, xi) / by, delta);
}

}  // namespace

PSLineMass ps_ball_mass(const Frame& F, const Mat& g, double T,
                        const PSMeasureAtoms& atoms, double delta) {
  PSLineMass r;
  r.T = T;
  for (const Atom& a : atoms.atoms) {
    const Visual vis = visual_inverse(F, g, a.xi);
    if (vis.pole) {
      r.poleMass += a.w;
      continue;
    }
    const double tn = vis.t.size() ? vis.t.cwiseAbs().maxCoeff() : 0.0;
    if (tn > T) continue;
    r.mass += a.w * conformal_weight(F, a.xi, vis.m0, delta);
    ++r.atomCount;
  }
  return r;
}

double MassProfile::eval(double T) const {
  const auto it = std::upper_bound(radius.begin(), radius.end(), T);
  if (it == radius.begin()) return 0.0;
  return prefix[static_cast<std::size_t>(it - radius.begin()) - 1];
}

MassProfile mass_profile(const Frame& F, const Mat& g,
                         const PSMeasureAtoms& atoms, double delta) {
  std::vector<std::pair<double, double>> jumps;  // (radius, weighted mass)
  MassProfile prof;
  for (const Atom& a : atoms.atoms) {
    const Visual vis = visual_inverse(F, g, a.xi);
    if (vis.pole) {
      prof.poleMass += a.w;
      continue;
    }
    const double tn = vis.t.size() ? vis.t.cwiseAbs().maxCoeff() : 0.0;
    jumps.emplace_back(tn, a.w * conformal_weight(F, a.xi, vis.m0, delta));
  }
  std::sort(jumps.begin(), jumps.end());
  prof.radius.reserve(jumps.size());
  prof.prefix.reserve(jumps.size());
  double acc = 0;
  for (const auto& [rad, m] : jumps) {
    acc += m;
    prof.radius.push_back(rad);
    prof.prefix.push_back(acc);
  }
  prof.total = acc;
  return prof;
}

RegularityReport measure_regularity_audit(const Frame& F, const Mat& g,
                                          const PSMeasureAtoms& atoms,
                                          double delta,
                                          const std::vector<double>& Tgrid,
                                          const std::vector<double>& epsGrid) {
  const MassProfile prof = mass_profile(F, g, atoms, delta);
  RegularityReport rep;
  rep.Tgrid = Tgrid;
  rep.epsGrid = epsGrid;

  std::vector<double> lx, ly;
  double bandLo = 0, bandHi = 0;
  for (double T : Tgrid) {
    const double m = prof.eval(T);
    rep.mass.push_back(m);
    rep.doubling2.push_back(m > 0 ? prof.eval(2.0 * T) / m : 0.0);
    rep.doubling4.push_back(m > 0 ? prof.eval(4.0 * T) / m : 0.0);
    if (m > 0) {
      lx.push_back(std::log(T));
      ly.push_back(std::log(m));
      const double scaled = m / std::pow(T, delta);
      if (bandHi == 0) {
        bandLo = bandHi = scaled;
      } else {
        bandLo = std::min(bandLo, scaled);
        bandHi = std::max(bandHi, scaled);
      }
    }
  }
  rep.shadowSlope = least_squares(lx, ly).slope;
  rep.shadowBand = bandLo > 0 ? bandHi / bandLo : 0.0;

  std::vector<double> ax, ay;
  for (double eps : epsGrid) {
    double sum = 0;
    long cnt = 0;
    for (double T : Tgrid) {
      const double m = prof.eval(T);
      if (m <= 0) continue;
      sum += (prof.eval((1.0 + 2.0 * eps) * T) - m) / m;
      ++cnt;
    }
    const double mean = cnt ? sum / cnt : 0.0;
    rep.annulus.push_back(mean);
    if (mean > 0) {
      ax.push_back(std::log(eps));
      ay.push_back(std::log(mean));
    }
  }
  rep.alphaFit = ax.size() >= 2 ? least_squares(ax, ay).slope : 0.0;
  return rep;
}

}  // namespace horo::ps
