// hopflab: numerical laboratory for harmonic maps S^3 -> S^2.
//
// Subcommands: analyze (pointwise singular-value / Hessian reports),
// verify (Bochner identity batteries), pinch (pinching-theorem margins),
// flow (heat flow on a point-cloud discretization), calibrate (graph
// Laplacian quality report). All reports are deterministic for a fixed
// seed. HOPFLAB_THREADS caps worker threads.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "hopflab/bochner.hpp"
#include "hopflab/config.hpp"
#include "hopflab/errors.hpp"
#include "hopflab/flow.hpp"
#include "hopflab/io.hpp"
#include "hopflab/map_zoo.hpp"
#include "hopflab/pinching.hpp"
#include "hopflab/rng.hpp"
#include "hopflab/svd_analysis.hpp"

namespace {

using hopflab::RunConfig;
using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitVerificationFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
  std::string config_file;
  std::string map_desc;
  std::string out_dir;
  std::string lemma = "all";
  std::string theorem = "A2";
  std::string mode;
  double a = 0.0;
  int n = 0;
  int k = 0;
  int steps = 0;
  int stride = 0;
  std::uint64_t seed = 0;
  double h = 0.0;
  int order = 0;
  double tol = 0.0;
};

// flags override the config file values; defaults fill the rest
RunConfig build_config(const CommonFlags& fl, const CLI::App& cmd) {
  RunConfig cfg;
  if (!fl.config_file.empty()) cfg = RunConfig::from_file(fl.config_file);
  RunConfig overrides;
  auto set_if = [&](const char* flag, const char* key, auto value) {
    const CLI::Option* o = cmd.get_option_no_throw(flag);
    if (o && o->count()) overrides.set(key, value);
  };
  set_if("--map", "map", fl.map_desc);
  set_if("--init", "init", fl.map_desc);
  set_if("--lemma", "lemma", fl.lemma);
  set_if("--theorem", "theorem", fl.theorem);
  set_if("--mode", "mode", fl.mode);
  set_if("--a", "a", hopflab::format_double(fl.a));
  set_if("-n", "n", std::to_string(fl.n));
  set_if("-k", "k", std::to_string(fl.k));
  set_if("--steps", "steps", std::to_string(fl.steps));
  set_if("--stride", "stride", std::to_string(fl.stride));
  set_if("--seed", "seed", std::to_string(fl.seed));
  set_if("--h", "h", hopflab::format_double(fl.h));
  set_if("--order", "order", std::to_string(fl.order));
  set_if("--out", "out", fl.out_dir);
  set_if("--tol", "tol", hopflab::format_double(fl.tol));
  cfg.merge_overrides(overrides);
  return cfg;
}

hopflab::FDConfig fd_from_config(const RunConfig& cfg) {
  hopflab::FDConfig fd;
  if (cfg.has("h")) {
    // one knob scales the three step sizes together
    double factor = cfg.get_double("h", fd.h) / fd.h;
    fd = fd.scaled(factor);
  }
  fd.order = cfg.get_int("order", fd.order);
  fd.validate();
  return fd;
}

json header_json(const char* command, const RunConfig& cfg) {
  return json{{"version", hopflab::kVersion},
              {"command", command},
              {"config", cfg.to_json()}};
}

void write_outputs(const RunConfig& cfg,
                   const std::vector<std::pair<std::string, std::string>>& files) {
  if (!cfg.has("out")) return;
  std::filesystem::path dir = cfg.get("out", ".");
  for (const auto& [name, content] : files)
    hopflab::atomic_write_file(dir / name, content);
}

int cmd_analyze(const CommonFlags& fl, const CLI::App& cmd) {
  RunConfig cfg = build_config(fl, cmd);
  hopflab::FDConfig fd = fd_from_config(cfg);
  hopflab::SphereMap f = hopflab::parse_map_descriptor(cfg.get("map", "hopf"));
  int n = cfg.get_int("n", 100);
  std::uint64_t seed = cfg.get_u64("seed", 1);

  hopflab::Rng rng(seed);
  std::vector<hopflab::Vec4> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = rng.unit4();
  auto records = hopflab::analyze_batch(f, pts, fd);

  auto agg = [&](auto getter) {
    double mn = 0, mx = 0, mean = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      double v = getter(records[i]);
      if (i == 0) mn = mx = v;
      mn = std::min(mn, v);
      mx = std::max(mx, v);
      mean += v;
    }
    if (!records.empty()) mean /= records.size();
    return json{{"min", mn}, {"max", mx}, {"mean", mean}};
  };

  json out = header_json("analyze", cfg);
  out["map"] = f.descriptor;
  out["n"] = n;
  out["seed"] = seed;
  out["aggregate"] =
      json{{"u", agg([](const auto& r) { return r.u; })},
           {"d2", agg([](const auto& r) { return std::abs(r.v); })},
           {"B_norm2", agg([](const auto& r) { return r.B_norm2; })},
           {"tension_norm", agg([](const auto& r) { return r.tension_norm; })}};
  json pj = json::array();
  for (const auto& r : records) pj.push_back(hopflab::point_record_to_json(r));
  out["points"] = pj;
  std::cout << out.dump(2) << "\n";

  hopflab::CsvWriter csv({"x0", "x1", "x2", "x3", "lambda", "mu", "u", "v", "w",
                          "rho", "B_norm2", "gradB_norm2", "tension_norm",
                          "degenerate", "symmetry_residual"});
  using hopflab::format_double;
  for (const auto& r : records)
    csv.add_row({format_double(r.point[0]), format_double(r.point[1]),
                 format_double(r.point[2]), format_double(r.point[3]),
                 format_double(r.lambda), format_double(r.mu),
                 format_double(r.u), format_double(r.v), format_double(r.w),
                 format_double(r.rho), format_double(r.B_norm2),
                 format_double(r.gradB_norm2), format_double(r.tension_norm),
                 r.degenerate ? "1" : "0",
                 format_double(r.symmetry_residual)});
  write_outputs(cfg, {{"analyze.json", out.dump(2) + "\n"},
                      {"analyze_points.csv", csv.str()}});
  return kExitOk;
}

int cmd_verify(const CommonFlags& fl, const CLI::App& cmd) {
  RunConfig cfg = build_config(fl, cmd);
  hopflab::VerifyOptions opt;
  opt.cfg = fd_from_config(cfg);
  opt.tol = cfg.get_double("tol", opt.tol);
  hopflab::SphereMap f = hopflab::parse_map_descriptor(cfg.get("map", "hopf"));
  hopflab::Lemma lemma = hopflab::lemma_from_string(cfg.get("lemma", "all"));
  int n = cfg.get_int("n", 100);
  std::uint64_t seed = cfg.get_u64("seed", 1);

  auto battery = hopflab::run_battery(f, lemma, n, seed, opt);

  json out = header_json("verify", cfg);
  out["map"] = f.descriptor;
  out["n"] = n;
  out["seed"] = seed;
  out["tol"] = opt.tol;
  out["pass"] = battery.pass;
  out["n_skipped"] = battery.n_skipped;
  out["n_errors"] = battery.n_errors;
  json summ = json::array();
  for (const auto& s : battery.summaries)
    summ.push_back(json{{"name", s.name},
                        {"n_points", s.n_points},
                        {"max_rel_residual", s.max_rel_residual},
                        {"n_skipped", s.n_skipped},
                        {"n_errors", s.n_errors}});
  out["summary"] = summ;
  json reports = json::array();
  for (const auto& r : battery.reports)
    reports.push_back(hopflab::report_to_json(r));
  out["reports"] = reports;
  std::cout << out.dump(2) << "\n";

  write_outputs(cfg, {{"verify.json", out.dump(2) + "\n"},
                      {"verify_summary.csv", hopflab::summary_csv(battery)}});
  return battery.pass ? kExitOk : kExitVerificationFailed;
}

int cmd_pinch(const CommonFlags& fl, const CLI::App& cmd) {
  RunConfig cfg = build_config(fl, cmd);
  hopflab::PinchOptions opt;
  opt.cfg = fd_from_config(cfg);
  opt.tol = cfg.get_double("tol", opt.tol);
  hopflab::SphereMap f = hopflab::parse_map_descriptor(cfg.get("map", "hopf"));
  std::string thm_str = cfg.get("theorem", "A2");
  // `pinch --theorem B --mode constant-u` spelling
  if (thm_str == "B") {
    std::string mode = cfg.get("mode", "constant-u");
    thm_str = "B-" + mode;
  }
  hopflab::Theorem thm = hopflab::theorem_from_string(thm_str);
  double a = cfg.get_double("a", 0.0);
  int n = cfg.get_int("n", 200);
  std::uint64_t seed = cfg.get_u64("seed", 1);

  hopflab::PinchReport report = hopflab::scan(f, thm, a, n, seed, opt);

  json out = header_json("pinch", cfg);
  out["map"] = f.descriptor;
  out["seed"] = seed;
  out["report"] = hopflab::pinch_report_to_json(report);
  std::cout << out.dump(2) << "\n";

  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("pinch.json", out.dump(2) + "\n");
  if (thm == hopflab::Theorem::kA1 || thm == hopflab::Theorem::kA2 ||
      thm == hopflab::Theorem::kC) {
    auto samples = hopflab::margin_samples(f, thm, a, n, seed, opt);
    hopflab::CsvWriter csv({"x0", "x1", "x2", "x3", "margin"});
    using hopflab::format_double;
    for (const auto& [p, m] : samples)
      csv.add_row({format_double(p[0]), format_double(p[1]),
                   format_double(p[2]), format_double(p[3]),
                   format_double(m)});
    files.emplace_back("pinch_margins.csv", csv.str());
  }
  write_outputs(cfg, files);
  return kExitOk;
}

std::string snapshot_csv(const hopflab::PointCloudS3& cloud,
                         const hopflab::FlowState& state) {
  hopflab::CsvWriter csv({"index", "x0", "x1", "x2", "x3", "F1", "F2", "F3",
                          "u_est", "d2_est"});
  using hopflab::format_double;
  for (int i = 0; i < cloud.n; ++i) {
    auto est = hopflab::estimate_singular_values(cloud, state.F, i);
    double u = est.ok ? est.lambda * est.lambda + est.mu * est.mu : 0.0;
    double d2 = est.ok ? est.lambda * est.mu : 0.0;
    csv.add_row({std::to_string(i), format_double(cloud.points[i][0]),
                 format_double(cloud.points[i][1]),
                 format_double(cloud.points[i][2]),
                 format_double(cloud.points[i][3]),
                 format_double(state.F[i][0]), format_double(state.F[i][1]),
                 format_double(state.F[i][2]), format_double(u),
                 format_double(d2)});
  }
  return csv.str();
}

int cmd_flow(const CommonFlags& fl, const CLI::App& cmd) {
  RunConfig cfg = build_config(fl, cmd);
  hopflab::SphereMap f0 =
      hopflab::parse_map_descriptor(cfg.get("init", cfg.get("map", "hopf")));
  int n = cfg.get_int("n", 4000);
  int k = cfg.get_int("k", 12);
  int steps = cfg.get_int("steps", 200);
  int stride = cfg.get_int("stride", 0);
  std::uint64_t seed = cfg.get_u64("seed", 1);
  std::filesystem::path dir = cfg.get("out", "hopflab_out");

  hopflab::FlowOptions opt;
  std::vector<std::pair<std::string, std::string>> snaps;
  auto on_snapshot = [&](int step, const hopflab::PointCloudS3& cloud,
                         const hopflab::FlowState& st) {
    if (stride <= 0 || step % stride != 0) return;
    char name[64];
    std::snprintf(name, sizeof(name), "flow_snap_%06d.csv", step);
    snaps.emplace_back(name, snapshot_csv(cloud, st));
  };
  hopflab::FlowResult res =
      hopflab::run_flow(f0, n, seed, steps, k, opt, on_snapshot);

  hopflab::CsvWriter diag({"step", "time", "energy", "u_spread", "d2_spread"});
  using hopflab::format_double;
  for (const auto& row : res.series)
    diag.add_row({std::to_string(row.step), format_double(row.time),
                  format_double(row.energy), format_double(row.u_spread),
                  format_double(row.d2_spread)});

  json out = header_json("flow", cfg);
  out["init"] = f0.descriptor;
  out["n"] = n;
  out["k"] = k;
  out["steps"] = steps;
  out["seed"] = seed;
  out["calibration"] = json{{"scale", res.calibration.scale},
                            {"residual", res.calibration.residual}};
  out["energy_initial"] = res.state.energy_history.front();
  out["energy_final"] = res.state.energy_history.back();
  out["final_tension_rms"] = res.tension_rms;
  out["final_u_spread"] = res.series.back().u_spread;
  out["final_d2_spread"] = res.series.back().d2_spread;
  out["out_dir"] = dir.string();
  std::cout << out.dump(2) << "\n";

  hopflab::atomic_write_file(dir / "flow_diagnostics.csv", diag.str());
  hopflab::atomic_write_file(dir / "flow_final.csv",
                             snapshot_csv(res.cloud, res.state));
  hopflab::atomic_write_file(dir / "flow.json", out.dump(2) + "\n");
  for (const auto& [name, content] : snaps)
    hopflab::atomic_write_file(dir / name, content);
  return kExitOk;
}

int cmd_calibrate(const CommonFlags& fl, const CLI::App& cmd) {
  RunConfig cfg = build_config(fl, cmd);
  int n = cfg.get_int("n", 4000);
  int k = cfg.get_int("k", 12);
  std::uint64_t seed = cfg.get_u64("seed", 1);

  auto cloud = hopflab::sample_s3(n, seed, k);
  auto res = hopflab::calibrate(cloud);

  json out = header_json("calibrate", cfg);
  out["n"] = n;
  out["k"] = k;
  out["seed"] = seed;
  out["epsilon"] = cloud.epsilon;
  out["scale"] = res.scale;
  out["residual"] = res.residual;
  out["deg2_eigenvalue"] = res.deg2_eigenvalue;
  out["coarse_warning"] = res.coarse_warning;
  std::cout << out.dump(2) << "\n";
  if (res.coarse_warning)
    std::cerr << "warning: kernel bandwidth " +
                     hopflab::format_double(cloud.epsilon) +
                     " is coarse; estimates degrade above 0.3\n";
  write_outputs(cfg, {{"calibrate.json", out.dump(2) + "\n"}});
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hopflab: harmonic maps S^3 -> S^2, numerically"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help");  // frees -h for the step flag

  CommonFlags fl;
  auto add_common = [&](CLI::App* sub, bool init_flag = false) {
    sub->set_help_flag("--help", "print help");
    sub->add_option("--config", fl.config_file, "key=value config file");
    if (init_flag)
      sub->add_option("--init", fl.map_desc, "initial map descriptor");
    else
      sub->add_option("--map", fl.map_desc,
                      "map descriptor: hopf | constant | mobius:a,b,c,d | "
                      "mobiusbar:a,b,c,d | rational:p/q | "
                      "perturbed:<base>,<amp>,<seed>");
    sub->add_option("-n", fl.n, "sample size / cloud size");
    sub->add_option("--seed", fl.seed, "random seed");
    sub->add_option("--h", fl.h, "finite-difference step (scales all stencils)");
    sub->add_option("--order", fl.order, "stencil order, 2 or 4");
    sub->add_option("--out", fl.out_dir, "output directory");
    sub->add_option("--tol", fl.tol, "tolerance override");
  };

  auto* analyze = app.add_subcommand("analyze", "pointwise map analysis");
  add_common(analyze);

  auto* verify = app.add_subcommand("verify", "Bochner identity battery");
  add_common(verify);
  verify->add_option("--lemma", fl.lemma,
                     "lemma71|lapu|lapv|lapw|laprho|lemma72|hopf_field|koszul|all");

  auto* pinch = app.add_subcommand("pinch", "pinching-theorem margins");
  add_common(pinch);
  pinch->add_option("--theorem", fl.theorem, "A1|A2|C|B");
  pinch->add_option("--a", fl.a, "parameter a for theorem A1");
  pinch->add_option("--mode", fl.mode, "constant-u|constant-d2 (theorem B)");

  auto* flow = app.add_subcommand("flow", "heat flow on a point cloud");
  add_common(flow, true);
  flow->add_option("--steps", fl.steps, "accepted steps to take");
  flow->add_option("--stride", fl.stride, "snapshot every this many steps");
  flow->add_option("-k", fl.k, "neighbors per point");

  auto* calibrate = app.add_subcommand("calibrate", "graph Laplacian report");
  calibrate->set_help_flag("--help", "print help");
  calibrate->add_option("--config", fl.config_file, "key=value config file");
  calibrate->add_option("-n", fl.n, "cloud size");
  calibrate->add_option("-k", fl.k, "neighbors per point");
  calibrate->add_option("--seed", fl.seed, "random seed");
  calibrate->add_option("--out", fl.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(fl, *analyze);
    if (verify->parsed()) return cmd_verify(fl, *verify);
    if (pinch->parsed()) return cmd_pinch(fl, *pinch);
    if (flow->parsed()) return cmd_flow(fl, *flow);
    if (calibrate->parsed()) return cmd_calibrate(fl, *calibrate);
  } catch (const hopflab::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const hopflab::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const hopflab::PreconditionError& e) {
    std::cerr << "precondition failure: " << e.what() << "\n";
    return kExitVerificationFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
