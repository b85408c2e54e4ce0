#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hallmhd/checkpoint.hpp"
#include "hallmhd/config.hpp"
#include "hallmhd/decay.hpp"
#include "hallmhd/diagnostics.hpp"
#include "hallmhd/initial_data.hpp"
#include "hallmhd/integrator.hpp"
#include "hallmhd/series.hpp"

namespace hallmhd {

enum ExitCode : int {
  kExitPass = 0,
  kExitAuditFailure = 1,
  kExitUsage = 2,
  kExitBlowup = 3,
};

inline RecordOptions record_options(const RunConfig& c) {
  RecordOptions r;
  r.m_max = c.analysis.m_max;
  r.linf_order = c.analysis.linf_order;
  r.k_const = c.analysis.k_const;
  r.split_m = c.analysis.m_max;
  return r;
}

inline SeriesLayout series_layout(const RunConfig& c) {
  return {c.analysis.m_max, c.analysis.linf_order};
}

/// Initial state from the config: construct, optionally rescale, t = 0.
inline SolverState initial_state(const RunConfig& c, const GridSpec& grid) {
  InitialFields f = make_initial(grid, c.init.spec);
  if (c.init.target_norm) {
    f = rescale_small(std::move(f), grid, *c.init.target_norm, c.init.target_m);
  }
  SolverState s;
  s.u_hat = std::move(f.u);
  s.b_hat = std::move(f.b);
  return s;
}

struct RunOptions {
  std::optional<SolverState> resume;  ///< continue from this state instead of t = 0
  bool write_outputs = true;
  std::function<void(const std::string&)> log;
};

struct RunOutcome {
  int exit_code = kExitPass;
  History history;
  std::vector<AuditReport> audits;
  std::vector<std::string> warnings;
  SolverState final_state;
  std::optional<std::string> failure;
};

/// Fit of ‖D^m(u,B)‖² over the configured window with its one-sided verdict.
inline AuditReport fit_report(const History& h, const RunConfig& c, int m) {
  AuditReport r;
  r.name = "fit_m" + std::to_string(m);
  r.tolerance = c.analysis.fit_tolerance;
  const double ta = *c.analysis.fit_t_a;
  const double tb = *c.analysis.fit_t_b;
  const double tv = t_valid(c.grid.box_length, c.analysis.alpha);
  r.details["window"] = {ta, tb};
  r.details["t_valid"] = tv;
  r.details["alpha"] = c.analysis.alpha;
  if (tb > tv) {
    r.notes.push_back("fit window extends past t_valid; box effects may steepen the decay");
  }
  try {
    FitOptions fo;
    fo.min_span_factor = c.analysis.min_span_factor;
    const FitResult f = fit_power_law(derivative_series(h, m), ta, tb, fo);
    const TheoremVerdict v = theorem_check(f, m, c.analysis.decay_mu, c.analysis.fit_tolerance);
    r.empirical_constant = f.prefactor;
    r.worst = v.margin;
    r.pass = v.pass;
    r.details["exponent"] = f.exponent;
    r.details["prefactor"] = f.prefactor;
    r.details["rms_residual"] = f.rms_residual;
    r.details["samples"] = f.samples;
    r.details["claimed"] = v.claimed;
  } catch (const InvalidArgument& e) {
    r.pass = false;
    r.notes.push_back(std::string("fit failed: ") + e.what());
  }
  return r;
}

inline void write_audits(const std::vector<AuditReport>& audits, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  for (const auto& a : audits) {
    out << a.to_json().dump() << '\n';
  }
}

inline RunOutcome run_simulation(const RunConfig& cfg, RunOptions opts = {}) {
  validate(cfg);
  const GridSpec grid = grid_from(cfg);
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output.directory);
  auto log = [&](const std::string& s) {
    if (opts.log) opts.log(s);
  };

  RunOutcome out;
  const SolverState initial = initial_state(cfg, grid);
  SolverState start = opts.resume ? *opts.resume : initial;
  const InitNorms n0 = init_norms(initial, grid);

  std::unique_ptr<SeriesWriter> writer;
  if (opts.write_outputs) {
    fs::create_directories(dir);
    std::ofstream(dir / "config.ini") << render_config(cfg);
    writer = std::make_unique<SeriesWriter>((dir / "series.tsv").string(), series_layout(cfg));
  }

  const RecordOptions ropts = record_options(cfg);
  std::optional<FourierBoundAuditor> fourier;
  std::optional<LowFrequencyAuditor> lowfreq;
  if (cfg.analysis.audit_fourier) fourier.emplace(n0, cfg.physics);
  if (cfg.analysis.audit_low_frequency) lowfreq.emplace(n0, cfg.physics, cfg.analysis.low_frequency_j);

  std::int64_t samples_seen = 0;
  SampleSink sink = [&](const SolverState& s, const SampleInfo& info) {
    SampleRecord rec = make_record(s, grid, ropts, info.last_dt);
    if (writer) writer->append(rec);
    out.history.push_back(std::move(rec));
    if (fourier) fourier->observe(s, grid);
    if (lowfreq) lowfreq->observe(s, grid);
    ++samples_seen;
    if (opts.write_outputs && cfg.output.checkpoint_every > 0 &&
        info.sample_index % cfg.output.checkpoint_every == 0) {
      write_checkpoint(s, grid, cfg.physics,
                       (dir / ("checkpoint_" + std::to_string(info.sample_index) + ".bin")).string());
    }
    log("t=" + detail::format_double(s.t) + " E=" + detail::format_double(out.history.back().energy()));
  };

  try {
    RunResult rr = run(std::move(start), grid, cfg.physics, cfg.time.control,
                       Schedule{cfg.time.t_end, cfg.time.sample_interval}, {sink});
    out.final_state = std::move(rr.state);
    out.warnings = std::move(rr.warnings);
  } catch (const BlowupError& e) {
    out.exit_code = kExitBlowup;
    out.failure = e.what();
  }

  auto add = [&](AuditReport r) { out.audits.push_back(std::move(r)); };
  const auto& a = cfg.analysis;
  const bool enough = out.history.size() >= 3;
  if (a.audit_energy && enough) add(energy_identity_residual(out.history, cfg.physics, a.energy_tolerance));
  if (a.audit_monotonicity && enough) add(hm_monotonicity_audit(out.history, cfg.physics, a.monotonicity_m));
  if (a.audit_lemma23 && enough) add(lemma23_inequality_audit(out.history, cfg.physics, a.lemma23_m));
  if (a.audit_splitting) add(splitting_audit(out.history));
  if (fourier) add(fourier->report());
  if (lowfreq) add(lowfreq->report());
  if (a.fit_t_a) {
    for (int m = 0; m <= std::min(a.m_max, 2); ++m) add(fit_report(out.history, cfg, m));
  }

  if (out.exit_code == kExitPass) {
    for (const auto& r : out.audits) {
      if (!r.pass) out.exit_code = kExitAuditFailure;
    }
  }
  if (opts.write_outputs) {
    write_audits(out.audits, (dir / "audits.jsonl").string());
    if (!out.failure) {
      write_checkpoint(out.final_state, grid, cfg.physics, (dir / "checkpoint_final.bin").string());
    }
    nlohmann::json summary;
    summary["exit_code"] = out.exit_code;
    summary["samples"] = out.history.size();
    summary["warnings"] = out.warnings;
    summary["failure"] = out.failure ? nlohmann::json(*out.failure) : nlohmann::json(nullptr);
    nlohmann::json verdicts = nlohmann::json::object();
    for (const auto& r : out.audits) verdicts[r.name] = r.pass;
    summary["audits"] = verdicts;
    std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';
  }
  return out;
}

}  // namespace hallmhd
