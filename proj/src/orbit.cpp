#include "horocount/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>
#include <unordered_map>

#include "horocount/io.hpp"

namespace horo::orbit {

using io::Error;

std::size_t OrbitBatch::count_below(double cap) const {
  auto it = std::upper_bound(
      pts.begin(), pts.end(), cap,
      [](double c, const OrbitPoint& p) { return c < p.norm; });
  return static_cast<std::size_t>(it - pts.begin());
}

namespace {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HOROCOUNT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

bool word_less(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool point_less(const OrbitPoint& x, const OrbitPoint& y) {
  if (x.norm != y.norm) return x.norm < y.norm;
  if (x.word.size() != y.word.size()) return x.word.size() < y.word.size();
  return word_less(x.word, y.word);
}

// Tolerance-based matrix dedup: elements are bucketed on two shifted grids of
// cell size tol * scale, so a pair within tol/4 of each other collides in at
// least one grid per coordinate; candidates are confirmed entrywise.
struct MatrixSet {
  double tol;
  std::vector<Mat> store;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;

  explicit MatrixSet(double tol_) : tol(tol_) {}

  static std::uint64_t mix(std::uint64_t h, std::int64_t v) {
    h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) +
         (h >> 2);
    return h;
  }

  std::uint64_t key(const Mat& g, double scale, double shift) const {
    const double q = tol * scale;
    std::uint64_t h = 1469598103934665603ULL;
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j)
        h = mix(h, static_cast<std::int64_t>(std::floor(g(i, j) / q + shift)));
    return h;
  }

  bool equal(const Mat& a, const Mat& b, double scale) const {
    return (a - b).cwiseAbs().maxCoeff() <= tol * scale;
  }

  // Returns true when g was already present; inserts it otherwise.
  bool check_insert(const Mat& g, double norm) {
    const double scale = std::max(1.0, norm);
    const std::uint64_t k0 = key(g, scale, 0.0);
    const std::uint64_t k1 = key(g, scale, 0.5);
    for (std::uint64_t k : {k0, k1}) {
      auto it = buckets.find(k);
      if (it == buckets.end()) continue;
      for (std::uint32_t idx : it->second)
        if (equal(store[idx], g, scale)) return true;
    }
    const auto idx = static_cast<std::uint32_t>(store.size());
    store.push_back(g);
    buckets[k0].push_back(idx);
    if (k1 != k0) buckets[k1].push_back(idx);
    return false;
  }
};

struct Node {
  Mat g;
  std::vector<int> word;
  int lastLetter = -1;  // index into the letter table, -1 for the identity
};

struct Candidate {
  Mat g;
  double norm = 0;
  std::uint32_t parent = 0;
  int letter = 0;
};

}  // namespace

OrbitBatch enumerate_ball(const forge::GroupSpec& spec, double T,
                          const EnumerationPolicy& policy) {
  if (!(T >= 1.0)) throw Error("E_BAD_ARG", "ball threshold must be >= 1");
  if (policy.method == EnumerationPolicy::Method::direct_scan)
    throw Error("E_BAD_ARG",
                "direct_scan is only available through direct_scan_sl2z");
  const Frame& F = spec.frame;
  const bool dedup = policy.method == EnumerationPolicy::Method::dedup_bfs;
  if (!dedup && !spec.free_kind())
    throw Error("E_BAD_ARG", "word_bfs requires a certified free group");

  // Letter table: generators then inverses, with codes +-(i+1).
  const std::size_t k = spec.generators.size();
  std::vector<Mat> letter(2 * k);
  std::vector<int> code(2 * k), invLetter(2 * k);
  double maxInvNorm = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    letter[i] = spec.generators[i];
    letter[k + i] = group_inverse(F, spec.generators[i]);
    code[i] = static_cast<int>(i) + 1;
    code[k + i] = -(static_cast<int>(i) + 1);
    invLetter[i] = static_cast<int>(k + i);
    invLetter[k + i] = static_cast<int>(i);
    maxInvNorm = std::max({maxInvNorm, max_norm(letter[i]),
                           max_norm(letter[k + i])});
  }

  const double Fs = policy.frontierStopFactor > 0
                        ? policy.frontierStopFactor
                        : (F.n + 1) * maxInvNorm;
  const double stopBound = T * Fs;
  const double keepBound = T * Fs * Fs;
  const int nThreads = resolve_threads(policy.threadCount);

  OrbitBatch out;
  out.label = spec.label;
  out.T = T;

  std::vector<Node> frontier;
  {
    Node id;
    id.g = Mat::Identity(F.n + 1, F.n + 1);
    frontier.push_back(std::move(id));
  }
  out.pts.push_back({frontier[0].g, {}, 1.0, 0.0});

  MatrixSet seen(policy.dedupTolerance);
  if (dedup) seen.check_insert(frontier[0].g, 1.0);

  std::vector<double> genMins;
  int consecutiveHigh = 0;
  int generation = 0;
  bool stopped = false;

  while (!frontier.empty()) {
    ++generation;
    if (generation > policy.maxWordLength) {
      out.note = "word length cap reached before the stop rule fired";
      break;
    }

    // Expand the whole generation (chunked across threads, merged in chunk
    // order so the candidate sequence is independent of the thread count).
    std::vector<Candidate> cands;
    auto expand_range = [&](std::size_t lo, std::size_t hi,
                            std::vector<Candidate>& sink) {
      for (std::size_t ni = lo; ni < hi; ++ni) {
        const Node& nd = frontier[ni];
        for (std::size_t l = 0; l < letter.size(); ++l) {
          if (spec.free_kind() && nd.lastLetter >= 0 &&
              static_cast<int>(l) == invLetter[nd.lastLetter])
            continue;
          Candidate c;
          c.g = nd.g * letter[l];
          c.norm = max_norm(c.g);
          c.parent = static_cast<std::uint32_t>(ni);
          c.letter = static_cast<int>(l);
          sink.push_back(std::move(c));
        }
      }
    };
    if (nThreads <= 1 || frontier.size() < 512) {
      expand_range(0, frontier.size(), cands);
    } else {
      const std::size_t nChunks = std::min<std::size_t>(
          frontier.size(), static_cast<std::size_t>(nThreads) * 8);
      const std::size_t chunk = (frontier.size() + nChunks - 1) / nChunks;
      std::vector<std::vector<Candidate>> parts(nChunks);
      std::vector<std::thread> pool;
      for (int t = 0; t < nThreads; ++t) {
        pool.emplace_back([&, t]() {
          for (std::size_t ci = t; ci < nChunks;
               ci += static_cast<std::size_t>(nThreads)) {
            const std::size_t lo = ci * chunk;
            const std::size_t hi = std::min(frontier.size(), lo + chunk);
            if (lo < hi) expand_range(lo, hi, parts[ci]);
          }
        });
      }
      for (auto& th : pool) th.join();
      for (auto& p : parts)
        for (auto& c : p) cands.push_back(std::move(c));
    }
    if (cands.empty()) break;

    double genMin = cands[0].norm;
    for (const auto& c : cands) genMin = std::min(genMin, c.norm);
    genMins.push_back(genMin);

    // Keep tier + dedup + emission, serial and order-deterministic.
    std::vector<Node> next;
    for (auto& c : cands) {
      if (c.norm > keepBound) continue;
      if (dedup && seen.check_insert(c.g, c.norm)) continue;
      Node nd;
      nd.word = frontier[c.parent].word;
      nd.word.push_back(code[c.letter]);
      nd.lastLetter = c.letter;
      nd.g = std::move(c.g);
      if (c.norm <= T) out.pts.push_back({nd.g, nd.word, c.norm, 0.0});
      next.push_back(std::move(nd));
    }

    if (genMin > stopBound)
      ++consecutiveHigh;
    else
      consecutiveHigh = 0;
    if (consecutiveHigh >= 2) {
      stopped = true;
      break;
    }
    if (next.size() > policy.maxFrontier) {
      // Largest threshold the completed generations certify under the same
      // two-consecutive rule, capped at the requested T.
      double certT = 0;
      for (std::size_t i = 1; i < genMins.size(); ++i)
        certT = std::max(certT, std::min(genMins[i - 1], genMins[i]) / Fs);
      certT = std::min(certT, T);
      throw Error("E_FRONTIER_BUDGET", "frontier exceeded the memory budget",
                  {{"frontier", next.size()},
                   {"maxFrontier", policy.maxFrontier},
                   {"certifiedT", certT},
                   {"emitted", out.pts.size()}});
    }
    frontier = std::move(next);
    if (frontier.empty()) {
      // Nothing survives below T*Fs^2; certified only if the rule fired on
      // the trailing generations.
      stopped = consecutiveHigh >= 1 && genMin > stopBound;
      if (!stopped) out.note = "frontier exhausted before the stop rule fired";
      break;
    }
  }

  out.certified = stopped;
  if (out.certified && out.note.empty()) out.note = "stop rule";

  std::sort(out.pts.begin(), out.pts.end(), point_less);
  for (auto& p : out.pts) p.dist = hyp_distance(F, Row(F.o * p.g), F.o);
  return out;
}

DirectScan direct_scan_sl2z(int T) {
  if (T > 500)
    throw Error("E_SCAN_BUDGET", "integer scan threshold exceeds 500",
                {{"T", T}});
  if (T < 1) throw Error("E_BAD_ARG", "scan threshold must be >= 1");
  DirectScan out;
  const auto S = static_cast<std::int64_t>(T);

  auto push = [&](std::int64_t a, std::int64_t b, std::int64_t c,
                  std::int64_t d) {
    out.sl2.push_back({a, b, c, d});
    // one symmetric-square point per +- pair: keep the lexicographically
    // positive representative
    const std::array<std::int64_t, 4> m{a, b, c, d};
    for (std::int64_t v : m) {
      if (v > 0) break;
      if (v < 0) return;
    }
    OrbitPoint p;
    p.g = forge::sl2_to_so21(static_cast<double>(a), static_cast<double>(b),
                             static_cast<double>(c), static_cast<double>(d));
    p.norm = max_norm(p.g);
    const double f2 = static_cast<double>(a * a + b * b + c * c + d * d);
    p.dist = std::acosh(std::max(1.0, f2 / 2.0));
    out.rho.pts.push_back(std::move(p));
  };

  for (std::int64_t a = -S; a <= S; ++a) {
    if (a == 0) {
      for (std::int64_t d = -S; d <= S; ++d) {
        push(0, 1, -1, d);
        push(0, -1, 1, d);
      }
      continue;
    }
    for (std::int64_t b = -S; b <= S; ++b)
      for (std::int64_t c = -S; c <= S; ++c) {
        const std::int64_t num = 1 + b * c;
        if (num % a != 0) continue;
        const std::int64_t d = num / a;
        if (d >= -S && d <= S) push(a, b, c, d);
      }
  }

  out.rho.label = "sl2z-scan";
  out.rho.T = static_cast<double>(T) * static_cast<double>(T);
  out.rho.certified = true;
  out.rho.note = "integer scan";
  std::sort(out.rho.pts.begin(), out.rho.pts.end(),
            [](const OrbitPoint& x, const OrbitPoint& y) {
              if (x.norm != y.norm) return x.norm < y.norm;
              for (int i = 0; i < 9; ++i) {
                const double xv = x.g(i / 3, i % 3), yv = y.g(i / 3, i % 3);
                if (xv != yv) return xv < yv;
              }
              return false;
            });
  return out;
}

std::vector<double> orbit_distances(const forge::GroupSpec& spec, double Rmax) {
  std::vector<double> d;
  if (spec.kind == "sl2z_lattice") {
    // cosh d = (Frobenius norm)^2 / 2, so entries stay below sqrt(2 cosh R)
    const double S = std::sqrt(2.0 * std::cosh(Rmax));
    const int T = static_cast<int>(std::ceil(S));
    if (T > 500)
      throw Error("E_SCAN_BUDGET",
                  "distance cutoff needs an integer scan beyond 500",
                  {{"Rmax", Rmax}, {"neededT", T}, {"maxRmax", 11.5}});
    DirectScan scan = direct_scan_sl2z(T);
    for (const auto& p : scan.rho.pts)
      if (p.dist <= Rmax) d.push_back(p.dist);
  } else {
    // Cartan: g = k1 a_d k2 with orthogonal k's, so |g|max <= (n+1)^2 e^d
    const double T =
        std::pow(spec.frame.n + 1.0, 2.0) * std::exp(Rmax);
    OrbitBatch batch = enumerate_ball(spec, T);
    for (const auto& p : batch.pts)
      if (p.dist <= Rmax) d.push_back(p.dist);
  }
  std::sort(d.begin(), d.end());
  return d;
}

std::vector<std::pair<double, long>> growth_profile(
    const forge::GroupSpec& spec, double Rmax, int gridPoints) {
  const std::vector<double> d = orbit_distances(spec, Rmax);
  std::vector<std::pair<double, long>> out;
  for (int i = 1; i <= gridPoints; ++i) {
    const double R = Rmax * i / gridPoints;
    const long cnt = static_cast<long>(
        std::upper_bound(d.begin(), d.end(), R) - d.begin());
    out.emplace_back(R, cnt);
  }
  return out;
}

void sl2z_stream(double frobT,
                 const std::function<void(std::int64_t, std::int64_t,
                                          std::int64_t, std::int64_t)>& visit) {
  if (!(frobT >= 2.0)) return;  // smallest element norm is |I|_F = sqrt 2
  using A4 = std::array<std::int64_t, 4>;
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  const auto visitThresh =
      static_cast<std::int64_t>(std::floor(frobT * frobT + 1e-9));
  const auto coreThresh = static_cast<std::int64_t>(
      std::ceil(phi * phi * frobT * frobT)) + 2;

  auto frob2 = [](const A4& m) {
    return m[0] * m[0] + m[1] * m[1] + m[2] * m[2] + m[3] * m[3];
  };
  // elliptic decorations: tau = [[0,-1],[1,1]] (left), sigma = [[0,-1],[1,0]]
  // (right); the core is a nonnegative word in [[1,1],[0,1]] and [[1,0],[1,1]]
  auto tau1 = [](const A4& m) -> A4 {
    return {-m[2], -m[3], m[0] + m[2], m[1] + m[3]};
  };
  auto tau2 = [](const A4& m) -> A4 {
    return {-m[0] - m[2], -m[1] - m[3], m[0], m[1]};
  };
  auto sigmaR = [](const A4& m) -> A4 { return {m[1], -m[0], m[3], -m[2]}; };

  auto emit = [&](const A4& w) {
    if (frob2(w) > visitThresh) return;
    visit(w[0], w[1], w[2], w[3]);
    visit(-w[0], -w[1], -w[2], -w[3]);
  };

  std::vector<A4> stack;
  stack.push_back({1, 0, 0, 1});
  while (!stack.empty()) {
    const A4 core = stack.back();
    stack.pop_back();

    for (int a0 = 0; a0 < 3; ++a0) {
      const A4 w = a0 == 0 ? core : (a0 == 1 ? tau1(core) : tau2(core));
      emit(w);
      emit(sigmaR(w));
    }

    const A4 right{core[0] + core[1], core[1], core[2] + core[3], core[3]};
    const A4 left{core[0], core[0] + core[1], core[2], core[2] + core[3]};
    if (frob2(right) <= coreThresh) stack.push_back(right);  // core * T'
    if (frob2(left) <= coreThresh) stack.push_back(left);    // core * T
  }
}

}  // namespace horo::orbit
