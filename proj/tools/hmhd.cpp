// hmhd: command-line front end for the Hall-MHD simulator and its audits.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hallmhd/hallmhd.hpp"

namespace {

using namespace hallmhd;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  RunConfig c = parse_config(slurp(path));
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
    c = with_override(c, o.substr(0, eq), o.substr(eq + 1));
  }
  return c;
}

void print_audits(const std::vector<AuditReport>& audits) {
  for (const auto& a : audits) {
    std::printf("%-28s %s  worst=%.6g  C=%.6g\n", a.name.c_str(), a.pass ? "PASS" : "FAIL", a.worst,
                a.empirical_constant);
  }
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides,
            const std::string& resume, bool verbose) {
  const RunConfig cfg = load_config(config_path, overrides);
  RunOptions opts;
  if (!resume.empty()) opts.resume = read_checkpoint(resume, grid_from(cfg));
  if (verbose) opts.log = [](const std::string& s) { std::fprintf(stderr, "%s\n", s.c_str()); };
  const RunOutcome out = run_simulation(cfg, opts);
  for (const auto& w : out.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (out.failure) std::fprintf(stderr, "blow-up: %s\n", out.failure->c_str());
  print_audits(out.audits);
  std::printf("outputs in %s\n", cfg.output.directory.c_str());
  return out.exit_code;
}

int cmd_verify(const std::string& target, const std::vector<std::string>& overrides) {
  SolverState state;
  PhysicsParams params;
  StepControl control;
  std::optional<GridSpec> grid;
  std::ifstream probe(target, std::ios::binary);
  char magic[4] = {};
  probe.read(magic, 4);
  if (probe && std::string(magic, 4) == "HMHD") {
    CheckpointData d = read_checkpoint(target);
    grid.emplace(make_grid(d.header.n, d.header.box_length, d.header.dealias_fraction));
    params.nu = d.header.nu;
    params.mu_resistivity = d.header.mu_resistivity;
    params.hall_coefficient = d.header.hall_coefficient;
    state = std::move(d.state);
  } else {
    const RunConfig cfg = load_config(target, overrides);
    grid.emplace(grid_from(cfg));
    params = cfg.physics;
    control = cfg.time.control;
    state = initial_state(cfg, *grid);
  }
  const auto audits = verify_state(state, *grid, params, control);
  print_audits(audits);
  for (const auto& a : audits) {
    std::cout << a.to_json().dump() << '\n';
  }
  for (const auto& a : audits) {
    if (!a.pass) return kExitAuditFailure;
  }
  return kExitPass;
}

int cmd_analyze(const std::string& path, double t_a, double t_b, int m, double mu, double tol,
                double span, std::optional<double> box_length, double alpha) {
  const History h = read_series(path);
  if (h.empty()) throw ConfigError("series '" + path + "' holds no samples");
  FitOptions fo;
  fo.min_span_factor = span;
  const FitResult f = fit_power_law(derivative_series(h, m), t_a, t_b, fo);
  const TheoremVerdict v = theorem_check(f, m, mu, tol);
  nlohmann::json j;
  j["series"] = path;
  j["m"] = m;
  j["decay_mu"] = mu;
  j["window"] = {f.t_a, f.t_b};
  j["exponent"] = f.exponent;
  j["prefactor"] = f.prefactor;
  j["rms_residual"] = f.rms_residual;
  j["samples"] = f.samples;
  j["claimed"] = v.claimed;
  j["tolerance"] = tol;
  j["margin"] = v.margin;
  j["pass"] = v.pass;
  if (box_length) {
    const double tv = t_valid(*box_length, alpha);
    j["t_valid"] = tv;
    j["inside_t_valid"] = t_b <= tv;
  }
  if (m == 0) {
    const TheoremVerdict s = theorem_check(f, m, mu, tol, TheoremKind::sobolev);
    j["sobolev_pass"] = s.pass;
  }
  std::cout << j.dump(2) << '\n';
  return v.pass ? kExitPass : kExitAuditFailure;
}

int cmd_oracle(const std::string& profile, int m, const std::vector<double>& times) {
  if (profile != "gaussian") throw ConfigError("only the gaussian profile is built in");
  const RadialProfile p = gaussian_profile();
  std::printf("%-12s %-24s %-24s %-12s\n", "t", "value", "closed_form", "slope");
  for (double t : times) {
    std::printf("%-12.6g %-24.17g %-24.17g %-12.8f\n", t, heat_oracle(p, m, t),
                heat_oracle_gaussian_exact(m, t), heat_oracle_slope(p, m, t));
  }
  return kExitPass;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& params) {
  const RunConfig base = parse_config(slurp(config_path));
  if (params.size() != 1) throw ConfigError("sweep takes exactly one --param path=v1,v2,...");
  const auto eq = params[0].find('=');
  if (eq == std::string::npos) throw ConfigError("--param must look like section.key=v1,v2");
  const std::string key = params[0].substr(0, eq);
  std::vector<std::string> values;
  std::stringstream vs(params[0].substr(eq + 1));
  for (std::string v; std::getline(vs, v, ',');) values.push_back(v);
  if (values.empty()) throw ConfigError("--param lists no values");
  int worst = kExitPass;
  for (const auto& v : values) {
    RunConfig c = with_override(base, key, v);
    c.output.directory = (std::filesystem::path(base.output.directory) / (key + "=" + v)).string();
    const RunOutcome out = run_simulation(c);
    std::printf("%s=%s exit=%d\n", key.c_str(), v.c_str(), out.exit_code);
    print_audits(out.audits);
    worst = std::max(worst, out.exit_code);
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-spectral Hall-MHD simulator with decay audits"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string resume;
  bool verbose = false;
  auto* run = app.add_subcommand("run", "simulate and write series, audits and checkpoints");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--set", overrides, "override section.key=value");
  run->add_option("--resume", resume, "continue from a checkpoint");
  run->add_flag("-v,--verbose", verbose, "log every sample");

  std::string verify_target;
  auto* verify = app.add_subcommand("verify", "run the identity and audit suites on initial data or a checkpoint");
  verify->add_option("target", verify_target, "config file or checkpoint")->required();
  verify->add_option("--set", overrides, "override section.key=value");

  std::string series_path;
  std::vector<double> window;
  int m = 0;
  double mu = 0.75;
  double tol = 0.3;
  double span = 4.0;
  double alpha = 0.1;
  std::optional<double> box;
  auto* analyze = app.add_subcommand("analyze", "fit decay exponents and compare with the proven rates");
  analyze->add_option("series", series_path, "series file")->required();
  analyze->add_option("--window", window, "fit window a b")->expected(2)->required();
  analyze->add_option("--m", m, "derivative order")->check(CLI::NonNegativeNumber);
  analyze->add_option("--mu", mu, "decay exponent parameter");
  analyze->add_option("--tol", tol, "one-sided tolerance");
  analyze->add_option("--span", span, "minimum span factor of (t+1) in the window");
  analyze->add_option("--box", box, "box length, to report t_valid");
  analyze->add_option("--alpha", alpha, "t_valid coefficient");

  std::string profile = "gaussian";
  int oracle_m = 0;
  std::vector<double> times = {0.0, 1.0, 3.0, 10.0, 100.0, 1000.0};
  auto* oracle = app.add_subcommand("oracle", "heat-semigroup oracle values and slopes");
  oracle->add_option("--profile", profile, "radial profile");
  oracle->add_option("--m", oracle_m, "derivative order")->check(CLI::NonNegativeNumber);
  oracle->add_option("--t", times, "times");

  std::string sweep_config;
  std::vector<std::string> sweep_params;
  auto* sweep = app.add_subcommand("sweep", "run a config for each value of one parameter");
  sweep->add_option("config", sweep_config, "config file")->required();
  sweep->add_option("--param", sweep_params, "section.key=v1,v2,...")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*run) return cmd_run(config_path, overrides, resume, verbose);
    if (*verify) return cmd_verify(verify_target, overrides);
    if (*analyze) return cmd_analyze(series_path, window[0], window[1], m, mu, tol, span, box, alpha);
    if (*oracle) return cmd_oracle(profile, oracle_m, times);
    if (*sweep) return cmd_sweep(sweep_config, sweep_params);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const BlowupError& e) {
    std::fprintf(stderr, "blow-up: %s\n", e.what());
    return kExitBlowup;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
