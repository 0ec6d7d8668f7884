#include "roughfpca/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "roughfpca/diagnostics.hpp"
#include "roughfpca/errors.hpp"
#include "roughfpca/fpca.hpp"
#include "roughfpca/parallel.hpp"
#include "roughfpca/rmt.hpp"
#include "roughfpca/rng.hpp"
#include "roughfpca/simulate.hpp"
#include "roughfpca/spectral.hpp"
#include "roughfpca/theory.hpp"

namespace roughfpca {

namespace fs = std::filesystem;

namespace {

template <class T>
T get(const json& j, const char* key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field \"") + key + "\" has the wrong type");
  }
}

template <class T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field \"") + key + "\"");
  return get<T>(j, key, T{});
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<ExperimentCell> cells_from_json(const json& models) {
  if (!models.is_array() || models.empty()) throw ConfigError("\"models\" must be a non-empty array");
  std::vector<ExperimentCell> cells;
  for (std::size_t i = 0; i < models.size(); ++i) {
    json m = models[i];
    std::string label = "m" + std::to_string(i + 1);
    if (m.contains("label")) {
      label = m["label"].get<std::string>();
      m.erase("label");
    }
    cells.push_back({label, model_from_json(m)});
  }
  return cells;
}

BootstrapSpec bootstrap_from_json(const json& j) {
  BootstrapSpec b;
  if (!j.contains("bootstrap")) return b;
  reject_unknown_keys(j["bootstrap"], {"reps", "goe_dim"}, "bootstrap");
  b.reps = get(j["bootstrap"], "reps", b.reps);
  b.goe_dim = get(j["bootstrap"], "goe_dim", b.goe_dim);
  return b;
}

/// {"path", "layout", "na"} or {"model", "N", "p", "grid", "seed"} under "simulate".
CurveSet curves_from_config(const json& cfg) {
  if (cfg.contains("data") == cfg.contains("simulate")) throw ConfigError("give exactly one of \"data\" or \"simulate\"");
  if (cfg.contains("data")) {
    const json& d = cfg["data"];
    reject_unknown_keys(d, {"path", "layout", "na"}, "data");
    return ingest_curves(require<std::string>(d, "path"), parse_layout(get<std::string>(d, "layout", "row")),
                         parse_na_policy(get<std::string>(d, "na", "error")));
  }
  const json& s = cfg["simulate"];
  reject_unknown_keys(s, {"model", "N", "p", "grid", "seed"}, "simulate");
  const int N = require<int>(s, "N");
  SimConfig sc{model_from_json(require<json>(s, "model")), N, get(s, "p", 5 * N), get(s, "grid", 256),
               get<std::uint64_t>(s, "seed", 1), false};
  return draw_sample(sc).curves;
}

std::string output_name(const std::string& name, const char* suffix) { return name + "_" + suffix + ".csv"; }

void emit(RunManifest& man, const std::string& outdir, const std::string& file, const std::string& text) {
  write_output(man, (fs::path(outdir) / file).string(), text);
  man.outputs.back().path = file;
}

void run_level_power(const json& cfg, const std::string& outdir, RunManifest& man) {
  reject_unknown_keys(cfg, {"kind", "name", "models", "N", "p", "K1", "alpha", "sims", "seed", "bootstrap", "center"},
                      "level_power");
  LevelPowerConfig lp;
  lp.cells = cells_from_json(require<json>(cfg, "models"));
  lp.N = get(cfg, "N", lp.N);
  lp.p = get(cfg, "p", 0);
  lp.K1s = get(cfg, "K1", lp.K1s);
  lp.alpha = get(cfg, "alpha", lp.alpha);
  lp.sims = get(cfg, "sims", lp.sims);
  lp.bootstrap = bootstrap_from_json(cfg);
  lp.seed = man.master_seed;
  lp.center = get(cfg, "center", false);
  const auto rates = level_power_experiment(lp);
  const std::string name = get<std::string>(cfg, "name", "level_power");
  emit(man, outdir, output_name(name, "table"), rejection_table_csv(rates));
  emit(man, outdir, output_name(name, "long"), rejection_long_csv(rates));
}

void run_eigenpair(const json& cfg, const std::string& outdir, RunManifest& man) {
  reject_unknown_keys(cfg, {"kind", "name", "models", "N", "p", "k", "sims", "seed", "center"}, "eigenpair");
  const auto cells = cells_from_json(require<json>(cfg, "models"));
  const int N = require<int>(cfg, "N");
  const int p = get(cfg, "p", 5 * N);
  const int k = get(cfg, "k", 1);
  const int sims = get(cfg, "sims", 500);
  const bool center = get(cfg, "center", false);
  std::string samples = "model,rep,eigenvalue,angle_deg\n";
  std::string summary =
      "model,spike,regime,median_eigenvalue,limit_eigenvalue,median_angle_deg,limit_angle_deg\n";
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto est = eigenpair_experiment(cells[c].model, N, p, k, sims, split_seed(man.master_seed, c), center);
    std::vector<double> ev;
    std::vector<double> ang;
    for (std::size_t r = 0; r < est.size(); ++r) {
      samples += cells[c].label + "," + std::to_string(r) + "," + fmt(est[r].eigenvalue) + "," +
                 fmt(est[r].angle_deg) + "\n";
      ev.push_back(est[r].eigenvalue);
      ang.push_back(est[r].angle_deg);
    }
    const CriticalityReport rep = classify(cells[c].model);
    double limit_ev = rep.subcritical_limit;
    double limit_angle = 90.0;
    std::string regime = "bulk";
    double spike = std::numeric_limits<double>::quiet_NaN();
    if (static_cast<int>(rep.per_spike.size()) >= k) {
      const auto& s = rep.per_spike[k - 1];
      spike = s.spike;
      regime = s.regime == Regime::Super ? "super" : "sub";
      limit_ev = s.limit_eigenvalue;
      limit_angle = s.limit_angle_deg();
    }
    summary += cells[c].label + "," + fmt(spike) + "," + regime + "," + fmt(empirical_quantile(ev, 0.5)) + "," +
               fmt(limit_ev) + "," + fmt(empirical_quantile(ang, 0.5)) + "," + fmt(limit_angle) + "\n";
  }
  const std::string name = get<std::string>(cfg, "name", "eigenpair");
  emit(man, outdir, output_name(name, "samples"), samples);
  emit(man, outdir, output_name(name, "summary"), summary);
}

std::string scan_csv(const SmoothScan& scan) {
  std::string out = "t,statistic,quantile,significant\n";
  for (std::size_t i = 0; i < scan.windows.size(); ++i) {
    out += std::to_string(scan.windows[i]) + "," + fmt(scan.statistics[i]) + "," + fmt(scan.quantile) + "," +
           (scan.significant[i] ? "1" : "0") + "\n";
  }
  return out;
}

void run_smooth_scan(const json& cfg, const std::string& outdir, RunManifest& man) {
  reject_unknown_keys(cfg, {"kind", "name", "data", "simulate", "windows", "K1", "alpha", "seed", "bootstrap", "center"},
                      "smooth_scan");
  const CurveSet data = curves_from_config(cfg);
  const BootstrapSpec bs = bootstrap_from_json(cfg);
  const auto scan = smooth_scan(data, require<std::vector<int>>(cfg, "windows"), get(cfg, "K1", 3),
                                get(cfg, "alpha", 0.05), bs.reps, bs.goe_dim, man.master_seed, get(cfg, "center", true));
  emit(man, outdir, output_name(get<std::string>(cfg, "name", "smooth_scan"), "scan"), scan_csv(scan));
}

std::string mean_levels_csv(const std::vector<MeanLevelRow>& rows) {
  std::vector<int> sizes;
  std::vector<int> ks;
  for (const auto& r : rows) {
    if (std::find(sizes.begin(), sizes.end(), r.sample_size) == sizes.end()) sizes.push_back(r.sample_size);
    if (std::find(ks.begin(), ks.end(), r.k) == ks.end()) ks.push_back(r.k);
  }
  std::string out = "N";
  for (int k : ks) out += ",k" + std::to_string(k);
  out += "\n";
  for (int n : sizes) {
    out += std::to_string(n);
    for (int k : ks) {
      for (const auto& r : rows) {
        if (r.sample_size == n && r.k == k) {
          char buf[32];
          std::snprintf(buf, sizeof buf, ",%.10g", 100.0 * r.rejection_rate);
          out += buf;
        }
      }
    }
    out += "\n";
  }
  return out;
}

void run_mean_levels(const json& cfg, const std::string& outdir, RunManifest& man) {
  reject_unknown_keys(cfg, {"kind", "name", "data", "simulate", "sizes", "k", "sims", "seed"}, "mean_levels");
  const CurveSet data = curves_from_config(cfg);
  const auto rows = mean_test_levels(data, require<std::vector<int>>(cfg, "sizes"), require<std::vector<int>>(cfg, "k"),
                                     get(cfg, "sims", 500), man.master_seed);
  emit(man, outdir, output_name(get<std::string>(cfg, "name", "mean_levels"), "levels"), mean_levels_csv(rows));
}

}  // namespace

RunManifest run_experiment(const json& config, const std::string& outdir, std::uint64_t seed_override) {
  const auto start = std::chrono::steady_clock::now();
  RunManifest man;
  man.command = "experiment";
  man.config_hash = hex64(fnv1a(config.dump()));
  man.master_seed = seed_override != 0 ? seed_override : get<std::uint64_t>(config, "seed", 1);
  fs::create_directories(outdir);
  const std::string kind = require<std::string>(config, "kind");
  try {
    if (kind == "level_power") {
      run_level_power(config, outdir, man);
    } else if (kind == "eigenpair") {
      run_eigenpair(config, outdir, man);
    } else if (kind == "smooth_scan") {
      run_smooth_scan(config, outdir, man);
    } else if (kind == "mean_levels") {
      run_mean_levels(config, outdir, man);
    } else {
      throw ConfigError("unknown experiment kind \"" + kind + "\"");
    }
  } catch (const ConfigError& e) {
    throw ConfigError("experiment \"" + get<std::string>(config, "name", kind) + "\": " + e.what());
  } catch (const json::exception& e) {
    throw ConfigError("experiment \"" + get<std::string>(config, "name", kind) + "\": " + e.what());
  }
  man.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream(fs::path(outdir) / "manifest.json") << manifest_to_json(man).dump(2) << '\n';
  return man;
}

namespace {

struct DataArgs {
  std::string path;
  std::string layout = "row";
  std::string na = "error";

  void add(CLI::App* app) {
    app->add_option("--data", path, "CSV of curves")->required()->check(CLI::ExistingFile);
    app->add_option("--layout", layout, "row | column")->check(CLI::IsMember({"row", "column"}));
    app->add_option("--na", na, "error | interpolate")->check(CLI::IsMember({"error", "interpolate"}));
  }
  CurveSet load() const { return ingest_curves(path, parse_layout(layout), parse_na_policy(na)); }
};

/// Writes text to path, or to stdout when path is empty.
void deliver(const std::string& path, const std::string& text, RunManifest* man = nullptr) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  if (man) {
    write_output(*man, path, text);
  } else {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
  }
}

void write_manifest(const std::string& path, RunManifest& man, std::chrono::steady_clock::time_point start) {
  if (path.empty()) return;
  man.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << manifest_to_json(man).dump(2) << '\n';
}

std::string report_table(const CriticalityReport& r) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "threshold 1/xi(inf) = %.10g   subcritical limit = %.10g   M = %d\n", r.threshold,
                r.subcritical_limit, r.M);
  os << line;
  if (r.per_spike.empty()) return os.str();
  std::snprintf(line, sizeof line, "%5s %12s %7s %16s %12s %10s\n", "k", "spike", "regime", "limit_eig", "|cos|",
                "angle");
  os << line;
  for (const auto& s : r.per_spike) {
    std::snprintf(line, sizeof line, "%5d %12.6g %7s %16.10g %12.8f %10.4f\n", s.index, s.spike,
                  s.regime == Regime::Super ? "super" : "sub", s.limit_eigenvalue, s.limit_abs_cosine,
                  s.limit_angle_deg());
    os << line;
  }
  return os.str();
}

TestFunction parse_test_function(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "power") return TestFunction::power(arg.empty() ? 1 : std::stoi(arg));
  if (kind == "table") {
    const CurveSet t = parse_curves(read_text_file(arg), CurveLayout::RowPerCurve, NaPolicy::Error);
    if (t.grid_size() != 2) throw ConfigError("test function table needs two columns x,h");
    std::vector<std::pair<double, double>> knots;
    for (int i = 0; i < t.size(); ++i) knots.emplace_back(t.values(i, 0), t.values(i, 1));
    return TestFunction::piecewise_linear(std::move(knots));
  }
  throw ConfigError("--h must be power:k or table:path");
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Rough functional data: FPCA bias, criticality and diagnostics"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: ROUGHFPCA_THREADS or hardware)");
  std::string manifest_path;
  app.add_option("--manifest", manifest_path, "write a run manifest to this path");
  app.set_version_flag("--version", std::string(kVersion));

  // simulate
  auto* sim = app.add_subcommand("simulate", "draw curves from a model");
  std::string sim_model, sim_out, sim_coef;
  int sim_N = 0, sim_p = 0, sim_grid = 256;
  std::uint64_t sim_seed = 1;
  bool sim_center = false;
  sim->add_option("--model", sim_model, "model JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--N", sim_N, "sample size")->required();
  sim->add_option("--p", sim_p, "basis truncation (default 5N)");
  sim->add_option("--grid", sim_grid, "grid points");
  sim->add_option("--seed", sim_seed, "master seed");
  sim->add_flag("--center", sim_center, "subtract the empirical mean of the coefficients");
  sim->add_option("--out", sim_out, "curves CSV")->required();
  sim->add_option("--coefficients", sim_coef, "also write the basis coefficients");

  // theory
  auto* th = app.add_subcommand("theory", "criticality report of a model");
  std::string th_model, th_out;
  double th_gamma = 0.0;
  th->add_option("--model", th_model, "model JSON")->required()->check(CLI::ExistingFile);
  th->add_option("--gamma", th_gamma, "also report xi(gamma) and psi_gamma(1/xi(gamma))");
  th->add_option("--out", th_out, "JSON output (default stdout)");

  // fpca
  auto* fp = app.add_subcommand("fpca", "empirical eigensystem, resampling stability and ACF");
  DataArgs fp_data;
  fp_data.add(fp);
  bool fp_center = true;
  std::string fp_eigv;
  int fp_k = 5, fp_acf = 0, fp_reps = 100;
  std::vector<int> fp_sizes;
  std::string fp_mode = "without", fp_out, fp_eigf;
  std::uint64_t fp_seed = 1;
  fp->add_flag("--center,!--no-center", fp_center, "subtract the sample mean (default on)");
  fp->add_option("--k", fp_k, "number of components reported");
  fp->add_option("--split-sizes", fp_sizes, "subsample sizes for split stability")->delimiter(',');
  fp->add_option("--reps", fp_reps, "split-stability replicates");
  fp->add_option("--mode", fp_mode, "without | with replacement")->check(CLI::IsMember({"without", "with"}));
  fp->add_option("--seed", fp_seed, "seed");
  fp->add_option("--acf-lags,--acf-lag", fp_acf, "autocorrelation of the eigenfunctions up to this lag");
  fp->add_option("--eigenfunctions", fp_eigf, "CSV of the first k eigenfunctions");
  fp->add_option("--eigenvalues", fp_eigv, "CSV of all eigenvalues");
  fp->add_option("--out", fp_out, "JSON output (default stdout)");

  // rmt
  auto* rm = app.add_subcommand("rmt", "GOE ratio quantile, deformed MP density, finite-sample edge");
  int rm_k1 = 3, rm_reps = 1000, rm_dim = 1000, rm_points = 4001, rm_p = 0, rm_n = 0;
  double rm_alpha = 0.05, rm_y = 1.0, rm_eta = 1e-4;
  std::uint64_t rm_seed = 1;
  std::string rm_mp, rm_edge, rm_out, rm_density;
  rm->add_option("--k1", rm_k1, "K1");
  rm->add_option("--alpha", rm_alpha, "level");
  rm->add_option("--reps", rm_reps, "bootstrap replicates");
  rm->add_option("--goe-dim", rm_dim, "GOE dimension");
  rm->add_option("--seed", rm_seed, "seed");
  rm->add_option("--mp", rm_mp, "measure JSON: compute the deformed MP density")->check(CLI::ExistingFile);
  rm->add_option("--y", rm_y, "aspect ratio for --mp");
  rm->add_option("--eta", rm_eta, "imaginary offset for --mp");
  rm->add_option("--points", rm_points, "grid points for --mp");
  rm->add_option("--density", rm_density, "density CSV for --mp");
  rm->add_option("--edge", rm_edge, "measure JSON: finite-sample edge")->check(CLI::ExistingFile);
  rm->add_option("--p", rm_p, "dimension for --edge");
  rm->add_option("--n", rm_n, "sample size for --edge");
  rm->add_option("--out", rm_out, "JSON output (default stdout)");

  // test-supercritical
  auto* ts = app.add_subcommand("test-supercritical", "eigengap-ratio test for supercritical components");
  DataArgs ts_data;
  ts_data.add(ts);
  int ts_k1 = 3, ts_reps = 1000, ts_dim = 1000;
  double ts_alpha = 0.05;
  std::uint64_t ts_seed = 1;
  bool ts_center = true;
  std::string ts_out;
  ts->add_option("--k1", ts_k1, "K1");
  ts->add_option("--alpha", ts_alpha, "level");
  ts->add_option("--reps", ts_reps, "bootstrap replicates");
  ts->add_option("--goe-dim", ts_dim, "GOE dimension");
  ts->add_option("--seed", ts_seed, "seed");
  ts->add_flag("--center,!--no-center", ts_center, "subtract the sample mean (default on)");
  ts->add_option("--out", ts_out, "JSON output (default stdout)");

  // mean-test
  auto* mt = app.add_subcommand("mean-test", "chi-square test of a hypothesised mean curve");
  DataArgs mt_data;
  mt_data.add(mt);
  std::vector<int> mt_k{1, 2, 3};
  std::vector<int> mt_sizes;
  std::string mt_mu0 = "zero", mt_out;
  double mt_level = 0.95;
  int mt_sims = 500;
  std::uint64_t mt_seed = 1;
  mt->add_option("--k", mt_k, "numbers of components")->delimiter(',');
  mt->add_option("--mu0", mt_mu0, "zero | CSV with one curve");
  mt->add_option("--level", mt_level, "quantile level");
  mt->add_option("--levels", mt_sizes, "resample sizes: empirical levels instead of one test")->delimiter(',');
  mt->add_option("--sims", mt_sims, "resampling runs for --levels");
  mt->add_option("--seed", mt_seed, "seed for --levels");
  mt->add_option("--out", mt_out, "output (default stdout)");

  // smooth-scan
  auto* ss = app.add_subcommand("smooth-scan", "test statistic across moving-average windows");
  DataArgs ss_data;
  ss_data.add(ss);
  std::vector<int> ss_windows{1};
  int ss_k1 = 3, ss_reps = 1000, ss_dim = 1000;
  double ss_alpha = 0.05;
  std::uint64_t ss_seed = 1;
  std::string ss_out;
  ss->add_option("--windows", ss_windows, "window widths, increasing")->delimiter(',')->required();
  ss->add_option("--k1", ss_k1, "K1");
  ss->add_option("--alpha", ss_alpha, "level");
  ss->add_option("--reps", ss_reps, "bootstrap replicates");
  ss->add_option("--goe-dim", ss_dim, "GOE dimension");
  ss->add_option("--seed", ss_seed, "seed");
  ss->add_option("--out", ss_out, "CSV output (default stdout)");

  // spectral
  auto* sp = app.add_subcommand("spectral", "spectral statistic versus its deformed-MP limit");
  std::string sp_model, sp_h = "power:1", sp_out;
  int sp_N = 400, sp_p = 0, sp_reps = 1, sp_atoms = 2000;
  double sp_gamma = 1.0;
  std::uint64_t sp_seed = 1;
  sp->add_option("--model", sp_model, "model JSON")->required()->check(CLI::ExistingFile);
  sp->set_help_flag("--help", "Print this help message and exit");
  sp->add_option("--h", sp_h, "power:k | table:path");
  sp->add_option("--gamma", sp_gamma, "truncation of the bulk measure");
  sp->add_option("--N", sp_N, "sample size of the simulated statistic");
  sp->add_option("--p", sp_p, "basis truncation (default 5N)");
  sp->add_option("--reps", sp_reps, "simulations averaged");
  sp->add_option("--atoms", sp_atoms, "atoms of the discretised bulk measure");
  sp->add_option("--seed", sp_seed, "seed");
  sp->add_option("--out", sp_out, "JSON output (default stdout)");

  // experiment
  auto* ex = app.add_subcommand("experiment", "run an experiment config");
  std::string ex_config, ex_outdir = ".";
  std::uint64_t ex_seed = 0;
  ex->add_option("--config", ex_config, "experiment JSON")->required()->check(CLI::ExistingFile);
  ex->add_option("--outdir", ex_outdir, "output directory");
  ex->add_option("--seed", ex_seed, "override the config seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code(ErrorKind::Config);
  }

  const auto start = std::chrono::steady_clock::now();
  RunManifest man;
  {
    std::string joined;
    for (int i = 1; i < argc; ++i) joined += std::string(argv[i]) + '\n';
    man.config_hash = hex64(fnv1a(joined));
  }
  try {
    if (threads < 0) throw ConfigError("--threads must be non-negative");
    if (threads > 0) set_thread_count(threads);

    if (sim->parsed()) {
      man.command = "simulate";
      man.master_seed = sim_seed;
      SimConfig cfg{model_from_json(read_json_file(sim_model)), sim_N, sim_p > 0 ? sim_p : 5 * sim_N, sim_grid,
                    sim_seed, sim_center};
      const SimulatedSample s = draw_sample(cfg);
      write_output(man, sim_out, curves_to_csv(s.curves));
      json sidecar = {{"model", model_to_json(cfg.model)}, {"N", cfg.N},       {"p", cfg.p},
                      {"grid", cfg.grid_size},            {"seed", cfg.seed}, {"center", cfg.center_empirically}};
      write_output(man, sim_out + ".json", sidecar.dump(2) + "\n");
      if (!sim_coef.empty()) {
        std::vector<std::string> header;
        for (int j = 1; j <= s.coefficients.cols(); ++j) header.push_back("c" + std::to_string(j));
        write_output(man, sim_coef, matrix_to_csv(s.coefficients, header));
      }
    } else if (th->parsed()) {
      man.command = "theory";
      const ModelSpec model = model_from_json(read_json_file(th_model));
      json out = report_to_json(classify(model));
      if (th_gamma > 0.0) {
        const double xg = solve_xi(model.bulk(), th_gamma);
        out["xi_gamma"] = xg;
        out["psi_gamma_edge"] = psi(model.bulk(), 1.0 / xg, th_gamma);
      }
      deliver(th_out, out.dump(2) + "\n", &man);
      (th_out.empty() ? std::cerr : std::cout) << report_table(classify(model));
    } else if (fp->parsed()) {
      man.command = "fpca";
      man.master_seed = fp_seed;
      const CurveSet data = fp_data.load();
      const EigenSystem es = empirical_covariance_eigen(data, fp_center);
      const int k = std::min(fp_k, es.rank());
      json out;
      out["N"] = data.size();
      out["grid_size"] = data.grid_size();
      out["eigenvalues"] = std::vector<double>(es.eigenvalues.data(), es.eigenvalues.data() + es.eigenvalues.size());
      out["trace"] = es.eigenvalues.sum();
      if (!fp_sizes.empty()) {
        json arr = json::array();
        const auto mode = fp_mode == "with" ? SamplingMode::WithReplacement : SamplingMode::WithoutReplacement;
        for (const auto& s : split_stability(data, fp_sizes, k, fp_reps, mode, fp_seed, fp_center)) {
          arr.push_back({{"k", s.order_k},
                         {"sample_size", s.sample_size},
                         {"mean_angle_deg", s.mean_angle_deg},
                         {"median_angle_deg", s.median_angle_deg},
                         {"replicates", s.replicates}});
        }
        out["split_stability"] = arr;
      }
      if (fp_acf > 0) {
        json arr = json::array();
        for (int j = 0; j < k; ++j) arr.push_back(eigenfunction_acf(es.eigenfunctions.row(j).transpose(), fp_acf));
        out["acf"] = arr;
      }
      if (!fp_eigv.empty()) {
        std::string csv = "k,eigenvalue\n";
        for (Eigen::Index j = 0; j < es.eigenvalues.size(); ++j) csv += std::to_string(j + 1) + "," + fmt(es.eigenvalues(j)) + "\n";
        write_output(man, fp_eigv, csv);
      }
      if (!fp_eigf.empty()) {
        std::vector<std::string> header;
        for (int g = 1; g <= data.grid_size(); ++g) header.push_back("t" + std::to_string(g));
        write_output(man, fp_eigf, matrix_to_csv(es.eigenfunctions.topRows(k), header));
      }
      deliver(fp_out, out.dump(2) + "\n", &man);
    } else if (rm->parsed()) {
      man.command = "rmt";
      man.master_seed = rm_seed;
      json out;
      if (!rm_mp.empty()) {
        const AtomicMeasure H = measure_from_json(read_json_file(rm_mp));
        const MPLaw law = mp_density(rm_y, H, mp_default_grid(rm_y, H, rm_points), rm_eta);
        out["y"] = rm_y;
        out["atom_at_zero"] = law.atom_at_zero;
        out["bulk_mass"] = law.bulk_mass();
        json edges = json::array();
        for (const auto& [a, b] : law.support_edges) edges.push_back({a, b});
        out["support"] = edges;
        if (!rm_density.empty()) {
          std::string csv = "E,density\n";
          for (const auto& [e, f] : law.density_grid) csv += fmt(e) + "," + fmt(f) + "\n";
          write_output(man, rm_density, csv);
        }
      } else if (!rm_edge.empty()) {
        if (rm_p < 1 || rm_n < 1) throw ConfigError("--edge needs --p and --n");
        const EdgeParams e = finite_sample_edge(measure_from_json(read_json_file(rm_edge)), rm_p, rm_n);
        out = {{"xi_n", e.xi_n}, {"r_n", e.r_n}, {"sigma_n", e.sigma_n}, {"y_n", e.y_n}};
      } else {
        out["K1"] = rm_k1;
        out["alpha"] = rm_alpha;
        out["reps"] = rm_reps;
        out["goe_dim"] = rm_dim;
        out["quantile"] = tw_ratio_quantile(rm_k1, rm_alpha, rm_reps, rm_dim, rm_seed);
      }
      deliver(rm_out, out.dump(2) + "\n", &man);
    } else if (ts->parsed()) {
      man.command = "test-supercritical";
      man.master_seed = ts_seed;
      const TestResult r =
          test_supercritical(ts_data.load(), ts_k1, ts_alpha, ts_reps, ts_dim, ts_seed, ts_center);
      json out = {{"statistic", r.statistic}, {"quantile", r.quantile}, {"alpha", r.alpha},
                  {"reject", r.reject},       {"K1", r.K1},             {"reps_bootstrap", r.reps_bootstrap}};
      deliver(ts_out, out.dump(2) + "\n", &man);
    } else if (mt->parsed()) {
      man.command = "mean-test";
      man.master_seed = mt_seed;
      const CurveSet data = mt_data.load();
      if (!mt_sizes.empty()) {
        deliver(mt_out, mean_levels_csv(mean_test_levels(data, mt_sizes, mt_k, mt_sims, mt_seed)), &man);
      } else {
        Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(data.grid_size());
        if (mt_mu0 != "zero") {
          const CurveSet m = ingest_curves(mt_mu0, CurveLayout::RowPerCurve, NaPolicy::Error);
          if (m.size() != 1 || m.grid_size() != data.grid_size()) {
            throw ConfigError("--mu0 must hold exactly one curve on the data grid");
          }
          mu0 = m.values.row(0).transpose();
        }
        json arr = json::array();
        for (int k : mt_k) {
          const MeanTestResult r = mean_test(data, mu0, k, mt_level);
          arr.push_back({{"k", r.k}, {"statistic", r.statistic}, {"chi2_quantile", r.chi2_quantile}, {"reject", r.reject}});
        }
        deliver(mt_out, arr.dump(2) + "\n", &man);
      }
    } else if (ss->parsed()) {
      man.command = "smooth-scan";
      man.master_seed = ss_seed;
      const auto scan = smooth_scan(ss_data.load(), ss_windows, ss_k1, ss_alpha, ss_reps, ss_dim, ss_seed);
      deliver(ss_out, scan_csv(scan), &man);
    } else if (sp->parsed()) {
      man.command = "spectral";
      man.master_seed = sp_seed;
      const ModelSpec model = model_from_json(read_json_file(sp_model));
      const TestFunction h = parse_test_function(sp_h);
      const int p = sp_p > 0 ? sp_p : 5 * sp_N;
      const SpectrumView spectrum(model, sp_N, p);
      std::vector<double> stats(static_cast<std::size_t>(std::max(sp_reps, 1)));
      parallel_for(stats.size(), [&](std::size_t r) {
        Rng rng(sp_seed, r);
        const Eigen::MatrixXd coef = draw_coefficients(spectrum, rng);
        const Eigen::MatrixXd active = coef.leftCols(std::max(positive_truncation(spectrum), 1));
        stats[r] = spectral_statistic(empirical_eigenvalues(SampleView(active, 1.0), false), sp_N, h);
      });
      double mean = 0.0;
      for (double s : stats) mean += s / static_cast<double>(stats.size());
      const SpectralLimit lim = spectral_limit(model, h, sp_gamma, sp_atoms);
      if (lim.gamma_small) std::cerr << "warning: b(gamma) exceeds 1% of b(0); the limit may be truncated\n";
      json out = {{"h", h.name()},       {"N", sp_N},
                  {"reps", stats.size()}, {"statistic", mean},
                  {"limit", lim.value},   {"gap", mean - lim.value},
                  {"gamma", sp_gamma}};
      deliver(sp_out, out.dump(2) + "\n", &man);
    } else if (ex->parsed()) {
      RunManifest m = run_experiment(read_json_file(ex_config), ex_outdir, ex_seed);
      std::cout << manifest_to_json(m).dump(2) << '\n';
      write_manifest(manifest_path, m, start);
      return 0;
    }
    write_manifest(manifest_path, man, start);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(ErrorKind::Config);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(ErrorKind::Config);
  }
  return 0;
}

}  // namespace roughfpca
