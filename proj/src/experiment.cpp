#include "horocount/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "horocount/io.hpp"

namespace horo::xp {

using io::Error;

namespace {

double binom(int k, int j) {
  double r = 1;
  for (int i = 0; i < j; ++i) r = r * (k - i) / (i + 1);
  return r;
}

// Definite integral of e^{k u} u^j over [u0, u1].  Both endpoints go through
// the same branch: the closed form e^{k u} sum_i d_i u^i carries the constant
// j!/(-k)^{-j-1}-style offset relative to the series antiderivative, so mixing
// branches between endpoints would leak that constant into the difference.
// The closed form itself cancels catastrophically when |k u| is small (both
// endpoint values approach the same huge constant d_0 ~ j!/k^{j+1}), so the
// small-|k u| pair uses the exponential series, whose worst case (alternating
// signs for k u < 0) loses no more than a factor e^{|k u|} ~ 3e3 of relative
// accuracy on this branch.
double exp_poly_integral(double k, double u0, double u1, int j) {
  const double m0 = std::abs(k * u0), m1 = std::abs(k * u1);
  if (std::max(m0, m1) < 8.0) {
    double sum = 0, maxTerm = 0, kp = 1;
    for (int m = 0; m <= 64; ++m) {
      const double term = kp *
                          (std::pow(u1, j + m + 1) - std::pow(u0, j + m + 1)) /
                          (j + m + 1);
      sum += term;
      maxTerm = std::max(maxTerm, std::abs(term));
      kp = kp * k / (m + 1);
      if (m > std::max(m0, m1) &&
          std::abs(kp) * std::max(std::pow(std::abs(u0), j + m + 2),
                                  std::pow(std::abs(u1), j + m + 2)) <
              1e-18 * maxTerm)
        break;
    }
    return sum;
  }
  auto closed = [&](double u) {
    double d = 1.0 / k;  // coefficient of u^j
    double val = d * std::pow(u, j);
    for (int i = j - 1; i >= 0; --i) {
      d *= -(i + 1) / k;
      val += d * std::pow(u, i);
    }
    return std::exp(k * u) * val;
  };
  return closed(u1) - closed(u0);
}

// Range sums of jump-weighted radius powers over the mass profile, one channel
// per monomial the per-jump moment decomposes into.  Contiguous ranges are
// summed head + whole blocks + tail, all positive additions; a single global
// prefix array would not do, because the channel values span many orders of
// magnitude and differencing two near-equal prefix entries erases exactly the
// small far-tail contributions the wide windows are made of.
struct JumpChannels {
  static constexpr int kChannels = 7;
  static constexpr std::size_t kBlock = 128;
  std::vector<std::array<double, kChannels>> vals;
  std::vector<std::array<double, kChannels>> blocks;

  // Log scale: channel b holds w R^{-2k} (ln R)^b.
  // Linear scale: channel j holds w R^{-2(k+j)}.
  JumpChannels(const ps::MassProfile& prof, bool logScale, double k) {
    const std::size_t n = prof.radius.size();
    vals.resize(n);
    blocks.assign((n + kBlock - 1) / kBlock, {});
    for (std::size_t m = 0; m < n; ++m) {
      const double w = prof.prefix[m] - (m ? prof.prefix[m - 1] : 0.0);
      const double lnR = std::log(prof.radius[m]);
      std::array<double, kChannels>& v = vals[m];
      double base = w * std::exp(-2.0 * k * lnR);
      const double step = logScale ? lnR : std::exp(-2.0 * lnR);
      for (int b = 0; b < kChannels; ++b) {
        v[b] = base;
        base *= step;
      }
      for (int b = 0; b < kChannels; ++b) blocks[m / kBlock][b] += v[b];
    }
  }

  void range_sum(std::size_t lo, std::size_t hi, double out[kChannels]) const {
    for (int b = 0; b < kChannels; ++b) out[b] = 0;
    std::size_t i = lo;
    while (i < hi && i % kBlock != 0) {
      for (int b = 0; b < kChannels; ++b) out[b] += vals[i][b];
      ++i;
    }
    for (; i + kBlock <= hi; i += kBlock)
      for (int b = 0; b < kChannels; ++b) out[b] += blocks[i / kBlock][b];
    for (; i < hi; ++i)
      for (int b = 0; b < kChannels; ++b) out[b] += vals[i][b];
  }
};

}  // namespace

void RadialBump::rebuild() {
  if (!(rho2 > rho1) || !(rho1 > 0))
    throw Error("E_BAD_ARG", "radial support must satisfy 0 < rho1 < rho2");
  // (1 - z^2)^3 = 1 - 3 z^2 + 3 z^4 - z^6 with z = alpha q + beta, where q
  // is rho (linear scale) or ln rho (log scale).
  const double q1 = logScale ? std::log(rho1) : rho1;
  const double q2 = logScale ? std::log(rho2) : rho2;
  const double alpha = 2.0 / (q2 - q1);
  const double beta = -(q1 + q2) / (q2 - q1);
  static const double cz[7] = {1, 0, -3, 0, 3, 0, -1};
  for (int j = 0; j < 7; ++j) coeff[j] = 0;
  for (int k = 0; k < 7; ++k) {
    if (cz[k] == 0) continue;
    for (int j = 0; j <= k; ++j)
      coeff[j] += cz[k] * binom(k, j) * std::pow(alpha, j) *
                  std::pow(beta, k - j);
  }
}

double RadialBump::operator()(double rho) const {
  if (rho <= rho1 || rho >= rho2) return 0.0;
  const double q1 = logScale ? std::log(rho1) : rho1;
  const double q2 = logScale ? std::log(rho2) : rho2;
  const double q = logScale ? std::log(rho) : rho;
  const double z = (2.0 * q - q1 - q2) / (q2 - q1);
  const double w = 1.0 - z * z;
  return w * w * w;
}

double RadialBump::moment(double a, double lo, double hi) const {
  lo = std::max(lo, rho1);
  hi = std::min(hi, rho2);
  if (!(hi > lo)) return 0.0;
  double sum = 0;
  if (logScale) {
    // substitute rho = e^u: int rho^a u^j drho = int e^{(a+1)u} u^j du
    const double k = a + 1.0;
    const double ulo = std::log(lo), uhi = std::log(hi);
    for (int j = 0; j < 7; ++j) {
      if (coeff[j] == 0) continue;
      sum += coeff[j] * exp_poly_integral(k, ulo, uhi, j);
    }
    return sum;
  }
  for (int j = 0; j < 7; ++j) {
    if (coeff[j] == 0) continue;
    const double p = a + j + 1;
    if (std::abs(p) < 1e-12)
      sum += coeff[j] * std::log(hi / lo);
    else
      sum += coeff[j] * (std::pow(hi, p) - std::pow(lo, p)) / p;
  }
  return sum;
}

double AngularBump::operator()(const Frame& F, const BoundaryPoint& xi) const {
  const double q = chordal(F, center, xi) / radius;
  if (q >= 1.0) return 0.0;
  const double w = 1.0 - q * q;
  return w * w * w;
}

double TestFunction::eval_light(const Frame& F, const LightVector& v) const {
  const double r = v.norm();
  const double fr = f(r);
  if (fr == 0.0) return 0.0;
  return fr * h(F, unit_null(F, v));
}

double orbit_sum(const Frame& F, const LightVector& vx, const TestFunction& phi,
                 const orbit::OrbitBatch& batch, double Tcap) {
  const std::size_t n = std::isfinite(Tcap) ? batch.count_below(Tcap)
                                            : batch.pts.size();
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i)
    sum += phi.eval_light(F, Row(vx * batch.pts[i].g));
  return sum;
}

double eval_I(const Frame& F, const Mat& psi_x, const TestFunction& phi,
              double T, const ps::MassProfile& prof,
              const ps::PSMeasureAtoms& atoms, double delta) {
  const LightVector vx = light_vector(F, psi_x);
  const double sqrtT = std::sqrt(T);
  double total = 0;
  for (const ps::Atom& a : atoms.atoms) {
    const double hl = phi.h(F, a.xi);
    if (hl <= 0.0) continue;
    const double c = star_vectors(F, vx, a.xi);
    auto integrand = [&](double rho) {
      return phi.f(rho) * std::pow(rho, delta - 1.0) *
             prof.eval(sqrtT / (std::sqrt(rho) * c));
    };
    const quad::QuadResult q =
        quad::integrate(integrand, phi.f.rho1, phi.f.rho2, 1e-6);
    if (!q.converged)
      throw Error("E_QUAD", "rho-integral failed to converge",
                  {{"cappedError", q.cappedError},
                   {"intervals", q.intervals},
                   {"T", T}});
    total += a.w * hl * q.value;
  }
  return total;
}

double eval_I_closed(const Frame& F, const Mat& psi_x, const TestFunction& phi,
                     double T, const ps::MassProfile& prof,
                     const ps::PSMeasureAtoms& atoms, double delta) {
  const LightVector vx = light_vector(F, psi_x);
  const RadialBump& f = phi.f;
  const double a = delta - 1.0;
  const double fullMoment = f.moment(a, f.rho1, f.rho2);
  const double k = a + 1.0;  // rho^a drho = e^{k u} du with u = ln rho

  // mass(sqrt(T)/(sqrt(rho) c)) is a step function of rho: the jump at radius
  // R covers rho <= rho*(R) = T / (c R)^2, so the integral splits into
  // closed-form moments over [rho1, rho*].  Summing those moments jump by
  // jump costs O(window) moment evaluations per atom; instead the moment is
  // expanded into monomials of R, whose jump-weighted sums over the window
  // come from the channel table in O(block).  The small-exponent regime falls
  // back to the direct loop: the monomial coefficients grow like j!/k^{j+1}
  // and would swamp the sums in roundoff, while moment() itself stays
  // well-conditioned there.
  if (k < 0.05) {
    double total = 0;
    for (const ps::Atom& at : atoms.atoms) {
      const double hl = phi.h(F, at.xi);
      if (hl <= 0.0) continue;
      const double c = star_vectors(F, vx, at.xi);
      const double Rfull = std::sqrt(T / (f.rho2 * c * c));  // rho* >= rho2
      const double Rzero = std::sqrt(T / (f.rho1 * c * c));  // rho* <= rho1
      double inner = prof.eval(Rfull) * fullMoment;
      const auto lo = std::upper_bound(prof.radius.begin(), prof.radius.end(),
                                       Rfull);
      const auto hi = std::lower_bound(prof.radius.begin(), prof.radius.end(),
                                       Rzero);
      for (auto it = lo; it != hi; ++it) {
        const auto j = static_cast<std::size_t>(it - prof.radius.begin());
        const double jump = prof.prefix[j] - (j ? prof.prefix[j - 1] : 0.0);
        const double rhoStar = T / (c * c * (*it) * (*it));
        inner += jump * f.moment(a, f.rho1, rhoStar);
      }
      total += at.w * hl * inner;
    }
    return total;
  }

  const JumpChannels chan(prof, f.logScale, k);

  // Log scale: the antiderivative of e^{k u} u^j is e^{k u} sum_i d[j][i] u^i,
  // and u* = ln rho* = ln(T/c^2) - 2 ln R splits binomially into the channel
  // powers of ln R.  endLo collects the fixed lower endpoint, evaluated with
  // the same closed form as the batched upper endpoints so the antiderivative
  // constant cancels exactly between the two.
  double d[7][7] = {};
  double endLo = 0;
  // Linear scale: the moment term for channel j is
  // coeff[j]/p_j ((T/c^2)^{p_j} R^{-2 p_j} - rho1^{p_j}) with p_j = k + j.
  double lowPow[7] = {};
  if (f.logScale) {
    const double u1 = std::log(f.rho1);
    for (int j = 0; j < 7; ++j) {
      d[j][j] = 1.0 / k;
      for (int i = j - 1; i >= 0; --i) d[j][i] = -(i + 1) * d[j][i + 1] / k;
      double poly = 0;
      for (int i = 0; i <= j; ++i) poly += d[j][i] * std::pow(u1, i);
      endLo += f.coeff[j] * std::exp(k * u1) * poly;
    }
  } else {
    for (int j = 0; j < 7; ++j) lowPow[j] = std::pow(f.rho1, k + j);
  }

  double total = 0;
  for (const ps::Atom& at : atoms.atoms) {
    const double hl = phi.h(F, at.xi);
    if (hl <= 0.0) continue;
    const double c = star_vectors(F, vx, at.xi);
    const double Rfull = std::sqrt(T / (f.rho2 * c * c));
    const double Rzero = std::sqrt(T / (f.rho1 * c * c));
    double inner = prof.eval(Rfull) * fullMoment;
    const std::size_t lo = static_cast<std::size_t>(
        std::upper_bound(prof.radius.begin(), prof.radius.end(), Rfull) -
        prof.radius.begin());
    const std::size_t hi = static_cast<std::size_t>(
        std::lower_bound(prof.radius.begin(), prof.radius.end(), Rzero) -
        prof.radius.begin());
    if (lo < hi) {
      double S[JumpChannels::kChannels];
      chan.range_sum(lo, hi, S);
      const double Sw = prof.prefix[hi - 1] - (lo ? prof.prefix[lo - 1] : 0.0);
      const double lnTC = std::log(T / (c * c));
      if (f.logScale) {
        double spow[7];
        spow[0] = 1;
        for (int i = 1; i < 7; ++i) spow[i] = spow[i - 1] * lnTC;
        double acc[7] = {};
        for (int j = 0; j < 7; ++j) {
          if (f.coeff[j] == 0) continue;
          for (int i = 0; i <= j; ++i)
            for (int b = 0; b <= i; ++b)
              acc[b] += f.coeff[j] * d[j][i] * binom(i, b) * spow[i - b];
        }
        const double eks = std::exp(k * lnTC);
        double pm2 = 1;  // (-2)^b from u*^i = (lnTC - 2 ln R)^i
        double jumpPart = 0;
        for (int b = 0; b < 7; ++b) {
          jumpPart += eks * pm2 * acc[b] * S[b];
          pm2 *= -2.0;
        }
        inner += jumpPart - endLo * Sw;
      } else {
        double jumpPart = 0;
        for (int j = 0; j < 7; ++j) {
          if (f.coeff[j] == 0) continue;
          const double p = k + j;
          jumpPart +=
              f.coeff[j] / p * (std::exp(p * lnTC) * S[j] - lowPow[j] * Sw);
        }
        inner += jumpPart;
      }
    }
    total += at.w * hl * inner;
  }
  return total;
}

double band_integral(const Frame& F, const Mat& psi_x, const TestFunction& phi,
                     const ps::PSMeasureAtoms& atoms, double delta) {
  const LightVector vx = light_vector(F, psi_x);
  const double m = phi.f.moment(delta / 2.0 - 1.0, phi.f.rho1, phi.f.rho2);
  double total = 0;
  for (const ps::Atom& a : atoms.atoms) {
    const double hl = phi.h(F, a.xi);
    if (hl <= 0.0) continue;
    const double c = star_vectors(F, vx, a.xi);
    total += a.w * hl * std::pow(c, -delta) * m;
  }
  return total;
}

std::vector<double> geometric_grid(double tmin, double tmax, int points) {
  if (points < 2 || !(tmax > tmin) || !(tmin > 0))
    throw Error("E_BAD_ARG", "bad geometric grid parameters");
  std::vector<double> g(points);
  const double r = std::pow(tmax / tmin, 1.0 / (points - 1));
  double v = tmin;
  for (int i = 0; i < points; ++i) {
    g[i] = v;
    v *= r;
  }
  g.back() = tmax;
  return g;
}

std::vector<RatioRecord> ratio_sweep(const forge::GroupSpec& spec,
                                     const Mat& psi_x, const TestFunction& phi,
                                     const std::vector<double>& Tgrid,
                                     const ps::PSMeasureAtoms& atoms,
                                     double delta,
                                     const orbit::EnumerationPolicy& policy) {
  const Frame& F = spec.frame;
  std::vector<double> grid = Tgrid;
  std::sort(grid.begin(), grid.end());
  if (grid.empty()) return {};

  const orbit::OrbitBatch batch = orbit::enumerate_ball(spec, grid.back(),
                                                        policy);
  const LightVector vx = light_vector(F, psi_x);
  const ps::MassProfile prof = ps::mass_profile(F, psi_x, atoms, delta);
  const double bi = band_integral(F, psi_x, phi, atoms, delta);

  std::vector<RatioRecord> out;
  for (double T : grid) {
    RatioRecord rec;
    rec.T = T;
    rec.orbitSum = orbit_sum(F, vx, phi, batch, T);
    rec.Ivalue = eval_I_closed(F, psi_x, phi, T, prof, atoms, delta);
    rec.Tpower = rec.orbitSum / std::pow(T, delta / 2.0);
    rec.bandIntegral = bi;
    if (rec.Ivalue > 0) {
      rec.ratio = rec.orbitSum / rec.Ivalue;
    } else {
      rec.ratio = 0;
      rec.flags = "I_zero";
    }
    if (!batch.certified)
      rec.flags += rec.flags.empty() ? "heuristic_enumeration"
                                     : ";heuristic_enumeration";
    out.push_back(std::move(rec));
  }
  return out;
}

// --- planar lattice check ----------------------------------------------------

double PlaneBump::operator()(double x, double y) const {
  const double dx = x - cx, dy = y - cy;
  const double q2 = (dx * dx + dy * dy) / (radius * radius);
  if (q2 >= 1.0) return 0.0;
  const double w = 1.0 - q2;
  return amp * w * w * w;
}

std::vector<LedrappierRow> ledrappier_sweep(double X1, double X2,
                                            const std::vector<PlaneBump>& fs,
                                            const std::vector<double>& Tgrid) {
  if (fs.empty() || Tgrid.empty()) return {};
  const double Xnorm = std::hypot(X1, X2);
  if (!(Xnorm > 0)) throw Error("E_BAD_ARG", "base vector must be nonzero");
  for (const PlaneBump& f : fs)
    if (std::hypot(f.cx, f.cy) <= f.radius + 0.05)
      throw Error("E_BAD_ARG",
                  "bump support must stay away from the origin");

  std::vector<double> grid = Tgrid;
  std::sort(grid.begin(), grid.end());
  const double Tmax = grid.back();

  // one streaming pass: bucket each group element into the first grid entry
  // that contains it
  std::vector<std::vector<double>> sums(fs.size(),
                                        std::vector<double>(grid.size(), 0.0));
  orbit::sl2z_stream(
      Tmax, [&](std::int64_t a, std::int64_t b, std::int64_t c,
                std::int64_t d) {
        const double Yx = X1 * static_cast<double>(a) +
                          X2 * static_cast<double>(c);
        const double Yy = X1 * static_cast<double>(b) +
                          X2 * static_cast<double>(d);
        int bucket = -1;
        for (std::size_t fi = 0; fi < fs.size(); ++fi) {
          const double v = fs[fi](Yx, Yy);
          if (v == 0.0) continue;
          if (bucket < 0) {
            const double frob = std::sqrt(
                static_cast<double>(a * a + b * b + c * c + d * d));
            bucket = static_cast<int>(
                std::lower_bound(grid.begin(), grid.end(), frob) -
                grid.begin());
            if (bucket >= static_cast<int>(grid.size())) return;
          }
          sums[fi][static_cast<std::size_t>(bucket)] += v;
        }
      });
  for (auto& row : sums)
    for (std::size_t i = 1; i < row.size(); ++i) row[i] += row[i - 1];

  std::vector<double> refs;
  for (const PlaneBump& f : fs) {
    const quad::QuadResult q = quad::integrate2d(
        [&](double x, double y) { return f(x, y) / (Xnorm * std::hypot(x, y)); },
        f.cx - f.radius, f.cx + f.radius, f.cy - f.radius, f.cy + f.radius,
        1e-8);
    if (!q.converged)
      throw Error("E_QUAD", "reference integral failed to converge");
    refs.push_back(q.value);
  }

  std::vector<LedrappierRow> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    LedrappierRow row;
    row.T = grid[i];
    for (std::size_t fi = 0; fi < fs.size(); ++fi) {
      row.sumOverT.push_back(sums[fi][i] / grid[i]);
      row.reference.push_back(refs[fi]);
    }
    out.push_back(std::move(row));
  }
  return out;
}

// --- U-component growth audit ------------------------------------------------

LemmaAudit lemma_bound_audit(const forge::GroupSpec& spec, const Mat& psi_x,
                             const std::vector<double>& Tgrid,
                             double windowLo, double windowHi,
                             const orbit::EnumerationPolicy& policy) {
  const Frame& F = spec.frame;
  const LightVector vx = light_vector(F, psi_x);
  const double vxn = vx.norm();
  LemmaAudit out;
  out.windowLo = windowLo > 0 ? windowLo : 0.05 * vxn;
  out.windowHi = windowHi > 0 ? windowHi : 20.0 * vxn;

  std::vector<double> grid = Tgrid;
  std::sort(grid.begin(), grid.end());
  if (grid.empty()) return out;

  const orbit::OrbitBatch batch = orbit::enumerate_ball(spec, grid.back(),
                                                        policy);
  struct Row3 {
    double norm, defect, product;
  };
  std::vector<Row3> data;
  for (const auto& p : batch.pts) {
    const LightVector vz = Row(vx * p.g);
    const double zn = vz.norm();
    if (zn < out.windowLo || zn > out.windowHi) continue;
    const Row cx = u_component(F, psi_x, p.g);
    const double cn = cx.size() ? cx.cwiseAbs().maxCoeff() : 0.0;
    const double prod = cn * star_vectors(F, vx, vz);
    data.push_back({p.norm, std::abs(prod - std::sqrt(p.norm)), prod});
  }

  for (double T : grid) {
    LemmaAuditRow row;
    row.T = T;
    const double sq = std::sqrt(T);
    for (const Row3& r : data)
      if (r.norm <= T) {
        row.cstar = std::max(row.cstar, r.defect);
        ++row.samples;
      }
    bool ok = true;
    for (const Row3& r : data) {
      if (r.norm <= T && r.product > sq + row.cstar) ok = false;
      if (r.product <= sq - row.cstar && r.norm > T) ok = false;
    }
    row.inclusionsHold = ok;
    out.rows.push_back(row);
  }
  const double first = out.rows.front().cstar;
  const double last = out.rows.back().cstar;
  out.growthRatio = first > 0 ? last / first - 1.0
                              : (last > 0 ? std::numeric_limits<double>::infinity()
                                          : 0.0);
  return out;
}

}  // namespace horo::xp
