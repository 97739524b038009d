#pragma once

// Enumeration of norm balls Gamma_T = { gamma : |gamma|_max <= T }:
// a frontier BFS over reduced words with a sound stop rule, an exhaustive
// integer scan for SL2(Z), and a streaming normal-form walk of SL2(Z) for
// thresholds far beyond what can be stored.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "horocount/groups.hpp"

namespace horo::orbit {

struct EnumerationPolicy {
  enum class Method { word_bfs, dedup_bfs, direct_scan };
  Method method = Method::word_bfs;
  int maxWordLength = 256;
  double dedupTolerance = 1e-8;
  int threadCount = 0;            // 0 = HOROCOUNT_THREADS env or hardware
  double frontierStopFactor = 0;  // 0 = auto: (n+1) * max_g |g^{-1}|
  std::size_t maxFrontier = 5'000'000;
};

struct OrbitPoint {
  Mat g;
  std::vector<int> word;  // letters +-(i+1); empty = identity
  double norm = 0;        // max_norm(g)
  double dist = 0;        // d(o, o g)
};

struct OrbitBatch {
  std::vector<OrbitPoint> pts;  // sorted by (norm, word length, word)
  std::string label;
  double T = 0;
  bool certified = false;
  std::string note;

  // number of points with norm <= cap (pts are norm-sorted)
  std::size_t count_below(double cap) const;
};

// Word-by-word frontier enumeration.  word_bfs trusts free reduction
// (schottky/cyclic); dedup_bfs additionally hashes matrices to collapse
// relations (the lattice).  Throws io::Error E_FRONTIER_BUDGET with the
// largest certified threshold when the frontier memory budget is exceeded.
OrbitBatch enumerate_ball(const forge::GroupSpec& spec, double T,
                          const EnumerationPolicy& policy = {});

// All of SL2(Z) with max-norm at most T by exhaustive integer scan
// (T <= 500), plus the symmetric-square image with +-gamma collapsed.
struct DirectScan {
  std::vector<std::array<std::int64_t, 4>> sl2;  // (a, b, c, d), both signs
  OrbitBatch rho;                                // one point per +- pair
};
DirectScan direct_scan_sl2z(int T);

// Multiset of orbit distances d(o, o gamma) up to Rmax (identity included),
// sorted ascending.  Uses the integer scan for the lattice and the word BFS
// otherwise.
std::vector<double> orbit_distances(const forge::GroupSpec& spec, double Rmax);

// (R, N(R)) table on a uniform grid, N(R) = #{gamma : d(o, o gamma) <= R}.
std::vector<std::pair<double, long>> growth_profile(const forge::GroupSpec& spec,
                                                    double Rmax, int gridPoints = 25);

// Visit every gamma in SL2(Z) with Frobenius norm <= frobT exactly once,
// streaming, via the unique alternating normal form in Z2 * Z3 (cores are
// nonnegative words in [[1,1],[0,1]] and [[1,0],[1,1]] with entrywise
// monotone growth, so subtrees prune soundly).  Both signs are visited.
void sl2z_stream(double frobT,
                 const std::function<void(std::int64_t a, std::int64_t b,
                                          std::int64_t c, std::int64_t d)>& visit);

}  // namespace horo::orbit
