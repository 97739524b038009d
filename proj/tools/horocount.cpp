// Command-line front end: orbit enumeration, exponent estimation, boundary
// atoms, orbit sums, ratio sweeps, the planar lattice check, and the
// U-component growth audit.  All outputs are deterministic CSV/JSON.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "horocount/experiment.hpp"
#include "horocount/io.hpp"

namespace fs = std::filesystem;
using horo::Frame;
using horo::Mat;
using horo::Row;
using nlohmann::json;

namespace {

int thread_count(int flagThreads) {
  // the environment variable wins over the flag
  if (const char* env = std::getenv("HOROCOUNT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return flagThreads;
}

std::string resolve(const std::string& base, const std::string& path) {
  fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(base) / p).string();
}

json jrow(const Row& r) {
  json out = json::array();
  for (int i = 0; i < r.size(); ++i) out.push_back(r(i));
  return out;
}

// --- config-driven experiment setup -----------------------------------------

struct Experiment {
  json cfg;
  std::string dir;  // directory of the config file
  horo::forge::GroupSpec group;
  Mat psi_x;
  horo::xp::TestFunction phi;
  std::vector<double> Tgrid;
  horo::orbit::EnumerationPolicy policy;
  long seed = 0;
  std::string outDir;
};

Experiment load_experiment(const std::string& configPath, int threads,
                           bool needPhi = true) {
  Experiment ex;
  ex.cfg = horo::io::load_config(configPath);
  ex.dir = fs::path(configPath).parent_path().string();
  if (ex.dir.empty()) ex.dir = ".";

  if (!ex.cfg.contains("group"))
    throw horo::io::Error("E_CONFIG_INVALID", "config is missing 'group'");
  ex.group = horo::forge::load_group(
      resolve(ex.dir, ex.cfg["group"].get<std::string>()));

  ex.seed = ex.cfg.value("seed", 0L);
  ex.outDir = ex.cfg.value("output_dir", ".");
  ex.outDir = resolve(ex.dir, ex.outDir);

  ex.policy.method = ex.group.free_kind()
                         ? horo::orbit::EnumerationPolicy::Method::word_bfs
                         : horo::orbit::EnumerationPolicy::Method::dedup_bfs;
  ex.policy.threadCount = thread_count(threads);

  const json& x = ex.cfg.value("x", json::object());
  if (x.contains("ak")) {
    const auto& m = x["ak"];
    const int d = ex.group.frame.n + 1;
    ex.psi_x = Mat(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        ex.psi_x(i, j) = m.at(i).at(j).get<double>();
  } else {
    ex.psi_x = horo::forge::radial_basepoint(ex.group, x.value("generator", 0));
  }

  if (needPhi) {
    const json& p = ex.cfg.value("phi", json::object());
    const std::string scale = p.value("radial_scale", std::string("linear"));
    if (scale != "linear" && scale != "log")
      throw horo::io::Error("E_BAD_ARG",
                            "phi.radial_scale must be \"linear\" or \"log\"",
                            {{"radial_scale", scale}});
    ex.phi.f = horo::xp::RadialBump(p.value("rho1", 1.0), p.value("rho2", 4.0),
                                    scale == "log");
    ex.phi.h.radius = p.value("angular_radius", 0.5);
    if (p.contains("center_direction")) {
      Row w(ex.group.frame.n);
      for (int i = 0; i < ex.group.frame.n; ++i)
        w(i) = p["center_direction"].at(i).get<double>();
      ex.phi.h.center =
          horo::boundary_from_direction(ex.group.frame, Row(w / w.norm()));
    } else if (ex.group.kind == "sl2z_lattice") {
      ex.phi.h.center = horo::forge::attracting_point(
          ex.group.frame, horo::forge::sl2_to_so21(2, 1, 1, 1));
    } else {
      ex.phi.h.center = horo::forge::attracting_point(
          ex.group.frame, ex.group.generators[p.value("center_generator", 0)]);
    }
  }

  const json& tg = ex.cfg.value("tgrid", json::object());
  ex.Tgrid = horo::xp::geometric_grid(tg.value("tmin", 1e2),
                                      tg.value("tmax", 1e6),
                                      tg.value("points", 33));
  return ex;
}

// delta-hat and the atoms, per the config's [delta] and [atoms] sections
struct MeasureSetup {
  horo::ps::DeltaFit fit;
  horo::ps::PSMeasureAtoms atoms;
};

MeasureSetup load_measure(const Experiment& ex) {
  MeasureSetup m;
  const json& dc = ex.cfg.value("delta", json::object());
  m.fit = horo::ps::estimate_delta(ex.group, dc.value("rmax", 12.0));
  const json& ac = ex.cfg.value("atoms", json::object());
  double s = 0;
  if (!ac.contains("s") || (ac["s"].is_string() &&
                            ac["s"].get<std::string>() == "auto"))
    s = m.fit.delta + 0.1;
  else
    s = ac["s"].get<double>();
  m.atoms = horo::ps::build_ps_atoms(
      ex.group, s, ac.value("R", dc.value("rmax", 12.0)),
      ac.value("min_atoms", 500UL));
  return m;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw horo::io::Error("E_IO", "cannot write output", {{"path", path}});
  out << j.dump(2) << "\n";
}

// --- subcommands -------------------------------------------------------------

int cmd_enumerate(const std::string& groupPath, double T,
                  const std::string& method, int threads,
                  const std::string& outPath) {
  horo::forge::GroupSpec spec = horo::forge::load_group(groupPath);
  horo::orbit::EnumerationPolicy policy;
  if (method == "word_bfs")
    policy.method = horo::orbit::EnumerationPolicy::Method::word_bfs;
  else if (method == "dedup_bfs")
    policy.method = horo::orbit::EnumerationPolicy::Method::dedup_bfs;
  else
    throw horo::io::Error("E_BAD_ARG", "unknown method", {{"method", method}});
  policy.threadCount = thread_count(threads);

  horo::orbit::OrbitBatch batch = horo::orbit::enumerate_ball(spec, T, policy);

  horo::io::CsvWriter csv(outPath);
  csv.raw_line(horo::io::kCsvVersionHeader);
  const int d = spec.frame.n + 1;
  std::vector<std::string> head = {"word", "norm", "dist_o"};
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      head.push_back("m" + std::to_string(i) + std::to_string(j));
  csv.row(head);
  for (const auto& p : batch.pts) {
    std::vector<std::string> cells = {horo::io::word_to_string(p.word),
                                      horo::io::fmt17(p.norm),
                                      horo::io::fmt17(p.dist)};
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) cells.push_back(horo::io::fmt17(p.g(i, j)));
    csv.row(cells);
  }
  csv.close();
  return batch.certified ? 0 : 2;
}

int cmd_delta(const std::string& groupPath, double Rmax,
              const std::string& outPath) {
  horo::forge::GroupSpec spec = horo::forge::load_group(groupPath);
  horo::ps::DeltaFit fit = horo::ps::estimate_delta(spec, Rmax);
  const json j = {
      {"delta", fit.delta},
      {"flagged", fit.flagged},
      {"growth",
       {{"delta", fit.growth.delta},
        {"stderr", fit.growth.stderr_},
        {"Rlo", fit.growth.Rlo},
        {"Rhi", fit.growth.Rhi}}},
      {"poincare",
       {{"delta", fit.poincare.delta},
        {"stderr", fit.poincare.stderr_},
        {"Rlo", fit.poincare.Rlo},
        {"Rhi", fit.poincare.Rhi}}}};
  if (outPath.empty())
    std::cout << j.dump(2) << "\n";
  else
    write_json(outPath, j);
  return fit.flagged ? 2 : 0;
}

int cmd_atoms(const std::string& groupPath, const std::string& sArg, double R,
              double Rmax, const std::string& outPath) {
  horo::forge::GroupSpec spec = horo::forge::load_group(groupPath);
  double s = 0;
  if (sArg == "auto") {
    horo::ps::DeltaFit fit =
        horo::ps::estimate_delta(spec, Rmax > 0 ? Rmax : R);
    s = fit.delta + 0.1;
  } else {
    s = std::stod(sArg);
  }
  horo::ps::PSMeasureAtoms atoms = horo::ps::build_ps_atoms(spec, s, R);
  json j;
  j["s"] = atoms.s;
  j["R"] = atoms.R;
  json arr = json::array();
  for (const auto& a : atoms.atoms)
    arr.push_back({{"xi", jrow(a.xi)}, {"w", a.w}});
  j["atoms"] = arr;
  write_json(outPath, j);
  return 0;
}

int cmd_orbit_sum(const std::string& configPath, double T, int threads) {
  Experiment ex = load_experiment(configPath, threads);
  horo::orbit::OrbitBatch batch =
      horo::orbit::enumerate_ball(ex.group, T, ex.policy);
  const horo::LightVector vx = horo::light_vector(ex.group.frame, ex.psi_x);
  const double sum = horo::xp::orbit_sum(ex.group.frame, vx, ex.phi, batch);
  const json j = {{"T", T},
                  {"orbit_sum", sum},
                  {"points", batch.pts.size()},
                  {"certified", batch.certified}};
  std::cout << j.dump(2) << "\n";
  return batch.certified ? 0 : 2;
}

int cmd_ratio(const std::string& configPath, int threads) {
  Experiment ex = load_experiment(configPath, threads);
  MeasureSetup m = load_measure(ex);
  const Frame& F = ex.group.frame;

  std::vector<horo::xp::RatioRecord> rows = horo::xp::ratio_sweep(
      ex.group, ex.psi_x, ex.phi, ex.Tgrid, m.atoms, m.fit.delta, ex.policy);

  fs::create_directories(ex.outDir);
  const std::string csvPath = (fs::path(ex.outDir) / "ratio.csv").string();
  horo::io::CsvWriter csv(csvPath);
  csv.raw_line(horo::io::kCsvVersionHeader);
  csv.row({"T", "orbit_sum", "I_value", "ratio", "t_power", "band_integral",
           "flags"});
  bool flagged = m.fit.flagged;
  for (const auto& r : rows) {
    csv.row({horo::io::fmt17(r.T), horo::io::fmt17(r.orbitSum),
             horo::io::fmt17(r.Ivalue), horo::io::fmt17(r.ratio),
             horo::io::fmt17(r.Tpower), horo::io::fmt17(r.bandIntegral),
             r.flags});
    if (!r.flags.empty()) flagged = true;
  }
  csv.close();

  // sensitivity of the final ratio to delta-hat +- stderr
  const double Tmax = ex.Tgrid.back();
  const double se = std::max(m.fit.growth.stderr_, 1e-12);
  json sens = json::object();
  {
    const horo::orbit::OrbitBatch batch =
        horo::orbit::enumerate_ball(ex.group, Tmax, ex.policy);
    const horo::LightVector vx = horo::light_vector(F, ex.psi_x);
    const double S = horo::xp::orbit_sum(F, vx, ex.phi, batch, Tmax);
    for (double d : {m.fit.delta - se, m.fit.delta + se}) {
      const horo::ps::MassProfile prof =
          horo::ps::mass_profile(F, ex.psi_x, m.atoms, d);
      const double I =
          horo::xp::eval_I_closed(F, ex.psi_x, ex.phi, Tmax, prof, m.atoms, d);
      sens[d < m.fit.delta ? "minus" : "plus"] = I > 0 ? S / I : 0.0;
    }
  }

  const json meta = {{"config", configPath},
                     {"seed", ex.seed},
                     {"delta", m.fit.delta},
                     {"delta_stderr", m.fit.growth.stderr_},
                     {"delta_flagged", m.fit.flagged},
                     {"poincare_delta", m.fit.poincare.delta},
                     {"atom_count", m.atoms.atoms.size()},
                     {"atom_s", m.atoms.s},
                     {"atom_R", m.atoms.R},
                     {"ratio_sensitivity_at_tmax", sens}};
  write_json((fs::path(ex.outDir) / "ratio_meta.json").string(), meta);
  return flagged ? 2 : 0;
}

int cmd_ledrappier(const std::string& configPath) {
  const json cfg = horo::io::load_config(configPath);
  const std::string dir = fs::path(configPath).parent_path().string();
  const json& lc = cfg.value("ledrappier", json::object());
  const double X1 = lc.contains("X") ? lc["X"].at(0).get<double>() : 1.0;
  const double X2 = lc.contains("X") ? lc["X"].at(1).get<double>() : 0.0;
  std::vector<horo::xp::PlaneBump> fs_;
  if (lc.contains("bumps")) {
    for (const auto& b : lc["bumps"]) {
      horo::xp::PlaneBump bump{b.at(0).get<double>(), b.at(1).get<double>(),
                               b.at(2).get<double>()};
      if (b.size() > 3) bump.amp = b.at(3).get<double>();
      fs_.push_back(bump);
    }
  } else {
    fs_.push_back({2.0, 0.5, 0.8});
    fs_.push_back({-1.5, 2.0, 0.8});
  }
  if (fs_.size() != 2)
    throw horo::io::Error("E_BAD_ARG",
                          "the lattice check needs exactly two bumps");
  const json& tg = cfg.value("tgrid", json::object());
  const std::vector<double> grid = horo::xp::geometric_grid(
      tg.value("tmin", 1e2), tg.value("tmax", 1e4), tg.value("points", 9));

  std::vector<horo::xp::LedrappierRow> rows =
      horo::xp::ledrappier_sweep(X1, X2, fs_, grid);

  std::string outDir = resolve(dir.empty() ? "." : dir,
                               cfg.value("output_dir", "."));
  fs::create_directories(outDir);
  horo::io::CsvWriter csv((fs::path(outDir) / "ledrappier.csv").string());
  csv.raw_line(horo::io::kCsvVersionHeader);
  csv.row({"T", "s1_over_T", "ref1", "s2_over_T", "ref2", "pair_ratio",
           "ref_ratio", "rel_err"});
  for (const auto& r : rows) {
    const double pair = r.sumOverT[1] != 0 ? r.sumOverT[0] / r.sumOverT[1] : 0;
    const double refr = r.reference[1] != 0 ? r.reference[0] / r.reference[1]
                                            : 0;
    const double rel = refr != 0 && pair != 0 ? std::abs(pair / refr - 1.0)
                                              : 1.0;
    csv.row({horo::io::fmt17(r.T), horo::io::fmt17(r.sumOverT[0]),
             horo::io::fmt17(r.reference[0]), horo::io::fmt17(r.sumOverT[1]),
             horo::io::fmt17(r.reference[1]), horo::io::fmt17(pair),
             horo::io::fmt17(refr), horo::io::fmt17(rel)});
  }
  csv.close();
  return 0;
}

int cmd_audit(const std::string& configPath, int threads) {
  Experiment ex = load_experiment(configPath, threads, /*needPhi=*/false);
  const json& ac = ex.cfg.value("audit", json::object());
  horo::xp::LemmaAudit audit = horo::xp::lemma_bound_audit(
      ex.group, ex.psi_x, ex.Tgrid, ac.value("window_lo", 0.0),
      ac.value("window_hi", 0.0), ex.policy);

  json rows = json::array();
  bool bad = false;
  for (const auto& r : audit.rows) {
    rows.push_back({{"T", r.T},
                    {"cstar", r.cstar},
                    {"samples", r.samples},
                    {"inclusions_hold", r.inclusionsHold}});
    if (!r.inclusionsHold) bad = true;
  }
  const json j = {{"window", {audit.windowLo, audit.windowHi}},
                  {"growth_ratio", audit.growthRatio},
                  {"rows", rows}};
  fs::create_directories(ex.outDir);
  write_json((fs::path(ex.outDir) / "audit.json").string(), j);
  return bad ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale orbit counting experiments for thin subgroups of "
               "SO(n,1)"};
  app.require_subcommand(1);

  std::string groupPath, outPath, configPath, method = "word_bfs", sArg = "auto";
  double T = 1e3, Rmax = 12.0, R = 12.0;
  int threads = 0;
  long seed = 0;
  app.add_option("--seed", seed, "recorded in outputs; the pipeline is "
                                 "deterministic regardless");

  auto* enumc = app.add_subcommand("enumerate", "enumerate a norm ball");
  enumc->add_option("--group", groupPath)->required();
  enumc->add_option("--T", T);
  enumc->add_option("--method", method);
  enumc->add_option("--threads", threads);
  enumc->add_option("--out", outPath)->required();

  auto* deltac = app.add_subcommand("delta", "estimate the critical exponent");
  deltac->add_option("--group", groupPath)->required();
  deltac->add_option("--Rmax", Rmax);
  deltac->add_option("--out", outPath);

  auto* atomsc = app.add_subcommand("atoms", "boundary measure atoms");
  atomsc->add_option("--group", groupPath)->required();
  atomsc->add_option("--s", sArg);
  atomsc->add_option("--R", R);
  atomsc->add_option("--Rmax", Rmax);
  atomsc->add_option("--out", outPath)->required();

  auto* sumc = app.add_subcommand("orbit-sum", "orbit sum at one threshold");
  sumc->add_option("--config", configPath)->required();
  sumc->add_option("--T", T);
  sumc->add_option("--threads", threads);

  auto* ratioc = app.add_subcommand("ratio", "ratio sweep over the T grid");
  ratioc->add_option("--config", configPath)->required();
  ratioc->add_option("--threads", threads);

  auto* ledc = app.add_subcommand("ledrappier", "planar lattice check");
  ledc->add_option("--config", configPath)->required();

  auto* auditc = app.add_subcommand("audit", "U-component growth audit");
  auditc->add_option("--config", configPath)->required();
  auditc->add_option("--threads", threads);

  CLI11_PARSE(app, argc, argv);

  try {
    if (enumc->parsed())
      return cmd_enumerate(groupPath, T, method, threads, outPath);
    if (deltac->parsed()) return cmd_delta(groupPath, Rmax, outPath);
    if (atomsc->parsed()) return cmd_atoms(groupPath, sArg, R, Rmax, outPath);
    if (sumc->parsed()) return cmd_orbit_sum(configPath, T, threads);
    if (ratioc->parsed()) return cmd_ratio(configPath, threads);
    if (ledc->parsed()) return cmd_ledrappier(configPath);
    if (auditc->parsed()) return cmd_audit(configPath, threads);
  } catch (const horo::io::Error& e) {
    std::cerr << e.to_json().dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"code", "E_INTERNAL"}, {"message", e.what()}}.dump()
              << "\n";
    return 1;
  }
  return 1;
}
