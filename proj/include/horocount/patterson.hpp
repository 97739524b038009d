#pragma once

// Critical exponent estimation, atomic approximations of the conformal
// boundary density, and masses of horospherical balls with regularity
// audits (shadow band, doubling, annulus decay).

#include <string>
#include <vector>

#include "horocount/orbit.hpp"

namespace horo::ps {

struct DeltaEstimate {
  double delta = 0;
  double stderr_ = 0;
  std::string method;  // "growth_regression" | "poincare_abscissa"
  double Rlo = 0, Rhi = 0;
};

// Both estimators plus the agreement flag (|difference| <= 2 max stderr).
struct DeltaFit {
  DeltaEstimate growth;
  DeltaEstimate poincare;
  double delta = 0;  // the growth-regression value, the one experiments use
  bool flagged = false;
};

// Partial sum sum_{d(o, o gamma) <= Rcutoff} e^{-s d}, identity included.
double poincare_series(const forge::GroupSpec& spec, double s, double Rcutoff);

// Least-squares slope of log N(R) on [Rmax/2, Rmax], cross-checked against
// the Poincare-series shell-decay abscissa.  Throws io::Error
// E_TOO_FEW_POINTS (with a suggested Rmax) when N(Rmax) < 200.
DeltaFit estimate_delta(const forge::GroupSpec& spec, double Rmax);

struct Atom {
  BoundaryPoint xi;  // unit null row
  double w = 0;      // positive, normalized to total 1
};

struct PSMeasureAtoms {
  std::vector<Atom> atoms;
  double s = 0;        // conformal exponent used for the weights
  double R = 0;        // orbit annulus [R/2, R] that generated the atoms
  double totalMass = 1;
  double rawMass = 0;  // pre-normalization sum of e^{-s d}
};

// Orbit points with d(o, o gamma) in [R/2, R], projected to the boundary
// along the ray from o, weighted e^{-s d} and normalized.  Throws
// E_TOO_FEW_ATOMS when fewer than minAtoms orbit points land in the annulus.
PSMeasureAtoms build_ps_atoms(const forge::GroupSpec& spec, double s, double R,
                              std::size_t minAtoms = 500);

struct PSLineMass {
  double T = 0;
  double mass = 0;      // conformally weighted mass of B_U(T) at the base
  double poleMass = 0;  // atoms at the backward endpoint, excluded
  int atomCount = 0;    // atoms inside the ball
};

// mass = sum over atoms lambda with |t(lambda)|_max <= T of
//        w * exp(delta * busemann(lambda, o, o u_{t(lambda)} g)),
// with t(lambda) from visual_inverse at the AK base g.
PSLineMass ps_ball_mass(const Frame& F, const Mat& g, double T,
                        const PSMeasureAtoms& atoms, double delta);

// The same mass as a step function of T, precomputed: sorted jump radii and
// prefix-summed weights.  eval(T) matches ps_ball_mass to rounding.
struct MassProfile {
  std::vector<double> radius;  // ascending
  std::vector<double> prefix;  // prefix[i] = mass at T >= radius[i]
  double poleMass = 0;
  double total = 0;
  double eval(double T) const;
};
MassProfile mass_profile(const Frame& F, const Mat& g,
                         const PSMeasureAtoms& atoms, double delta);

struct RegularityReport {
  std::vector<double> Tgrid;
  std::vector<double> mass;        // mass(T)
  double shadowSlope = 0;          // LS slope of log mass vs log T
  double shadowBand = 0;           // max/min of mass(T)/T^delta
  std::vector<double> doubling2;   // mass(2T)/mass(T) per T
  std::vector<double> doubling4;   // mass(4T)/mass(T) per T
  std::vector<double> epsGrid;
  std::vector<double> annulus;     // mean over T of (mass((1+2e)T)-mass(T))/mass(T)
  double alphaFit = 0;             // slope of log annulus vs log eps
};

RegularityReport measure_regularity_audit(const Frame& F, const Mat& g,
                                          const PSMeasureAtoms& atoms,
                                          double delta,
                                          const std::vector<double>& Tgrid,
                                          const std::vector<double>& epsGrid);

}  // namespace horo::ps
