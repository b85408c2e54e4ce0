// Acceptance suite.  Prints one line per criterion and exits non-zero if any fails.
//
//   acceptance [ids...]                   run all criteria, or only the listed ones
//   acceptance --write-golden <path>      regenerate the stored MHD regression series
//
// HMHD_ACCEPTANCE_LARGE=1 switches criteria 7 and 8 to the n=192, L=128 configuration.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hallmhd/hallmhd.hpp"

using namespace hallmhd;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

bool large_mode() {
  const char* v = std::getenv("HMHD_ACCEPTANCE_LARGE");
  return v && std::string(v) == "1";
}

// Every history produced by the suite, for the splitting audit.
std::vector<std::pair<std::string, History>> g_histories;

void keep(const std::string& name, const History& h) { g_histories.emplace_back(name, h); }

RunConfig base_config(std::size_t n, double box, double t_end, double interval) {
  RunConfig c;
  c.grid.n = n;
  c.grid.box_length = box;
  c.time.t_end = t_end;
  c.time.sample_interval = interval;
  c.output.directory = "unused";
  return c;
}

RunOutcome simulate(const RunConfig& c, const std::string& name) {
  RunOptions o;
  o.write_outputs = false;
  RunOutcome out = run_simulation(c, o);
  keep(name, out.history);
  return out;
}

SpectralVectorField random_solenoidal(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  PhysicalVectorField f(g);
  for (auto& c : f.comp) {
    for (auto& v : c) v = nd(rng);
  }
  SpectralVectorField s = leray_project(forward_transform(f, g), g);
  dealias_in_place(s, g);
  zero_mean_in_place(s);
  return s;
}

RunConfig random_band_config(double amp, double t_end, double interval) {
  RunConfig c = base_config(32, 16.0, t_end, interval);
  c.init.spec.kind = InitKind::random_band;
  c.init.spec.amplitude = amp;
  c.init.spec.b_amplitude = amp;
  c.init.spec.band_lo = 0.5;
  c.init.spec.band_hi = 1.5;
  c.init.spec.width = 2.0;
  c.init.spec.seed = 2024;
  c.analysis.m_max = 2;
  return c;
}

// ---------------------------------------------------------------------------

Verdict c1_linear_oracle() {
  const GridSpec g = make_grid(32, 10.0);
  SolverState s;
  s.u_hat = random_solenoidal(g, 1);
  s.b_hat = random_solenoidal(g, 2);
  PhysicsParams p;
  p.nonlinear = false;
  const RunResult rr = run(s, g, p, StepControl{}, Schedule{1.0, 1.0}, {});
  const SolverState exact = linear_evolve(s, g, p, 1.0);
  double worst = 0.0;
  std::size_t modes = 0;
  for (int f = 0; f < 2; ++f) {
    const auto& a = f == 0 ? rr.state.u_hat : rr.state.b_hat;
    const auto& b = f == 0 ? exact.u_hat : exact.b_hat;
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t i = 0; i < b[c].size(); ++i) {
        if (std::abs(b[c][i]) == 0.0) continue;
        worst = std::max(worst, std::abs(a[c][i] - b[c][i]) / std::abs(b[c][i]));
        ++modes;
      }
    }
  }
  return {worst <= 1e-12, fmt("max per-mode relative error %.3g over %zu coefficients (tol 1e-12)", worst, modes)};
}

Verdict c2_heat_rates() {
  const RadialProfile p = gaussian_profile();
  bool ok = true;
  std::string slopes;
  for (int m = 0; m <= 3; ++m) {
    const double s = heat_oracle_slope(p, m, 1e3);
    ok = ok && std::abs(s + (m + 1.5)) <= 0.02;
    slopes += fmt("%s%.5f", m ? ", " : "", s);
  }
  const double ratio = heat_oracle(p, 0, 3.0) / heat_oracle(p, 0, 0.0);
  const double dev = std::abs(ratio - std::pow(7.0, -1.5));
  ok = ok && dev <= 1e-6;
  return {ok, fmt("slopes at t=1e3 [%s] vs -(m+3/2) (tol 0.02); ratio error %.2g (tol 1e-6)", slopes.c_str(), dev)};
}

// Small-data blob run on n=64, L=32; shared by criteria 3 and 14.
const RunOutcome& small_data_run() {
  static std::optional<RunOutcome> out;
  if (!out) {
    RunConfig c = base_config(64, 32.0, 5.0, 0.00625);
    c.init.spec.kind = InitKind::gaussian_blob;
    c.init.spec.width = 1.8;
    c.init.target_norm = 1e-2;
    c.init.target_m = 3;
    c.analysis.m_max = 3;
    c.analysis.audit_monotonicity = true;
    c.analysis.monotonicity_m = 3;
    out = simulate(c, "small-data n=64");
  }
  return *out;
}

Verdict c3_energy_identity() {
  const History& h = small_data_run().history;
  const PhysicsParams p;
  std::vector<AuditReport> reps;
  std::string levels;
  for (std::size_t stride : {4, 2, 1}) {
    reps.push_back(energy_identity_residual(subsample(h, stride), p, 1e-4));
    levels += fmt("%s h=%.5g: %.3g", levels.empty() ? "" : ",", 0.00625 * static_cast<double>(stride), reps.back().worst);
  }
  // compare at the interior times of the coarsest sampling, which all three share
  auto at = [](const AuditReport& r, double t) {
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      if (std::abs(r.times[i] - t) < 1e-9) return std::abs(r.lhs[i] - r.rhs[i]) / std::abs(r.rhs[i]);
    }
    throw std::runtime_error("missing common sample time");
  };
  std::array<double, 3> peak{};
  double min_order = std::numeric_limits<double>::infinity();
  for (double t : reps[0].times) {
    std::array<double, 3> v{};
    for (std::size_t k = 0; k < 3; ++k) {
      v[k] = at(reps[k], t);
      peak[k] = std::max(peak[k], v[k]);
    }
    min_order = std::min({min_order, std::log2(v[0] / v[1]), std::log2(v[1] / v[2])});
  }
  const double order_coarse = std::log2(peak[0] / peak[1]);
  const double order_fine = std::log2(peak[1] / peak[2]);
  const bool ok = reps[2].worst <= 1e-4 && order_coarse >= 2.0 && order_fine >= 2.0;
  return {ok, fmt("residual%s (tol 1e-4 at the run interval); orders at %zu common times %.6f, %.6f (need >= 2), pointwise min %.6f", levels.c_str(),
                  reps[0].times.size(), order_coarse, order_fine, min_order)};
}

Verdict c4_hall_neutrality() {
  const GridSpec g = make_grid(32, kTwoPi);
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) worst = std::max(worst, hall_energy_neutrality(random_solenoidal(g, 1000 + s), g));
  return {worst <= 1e-10, fmt("max relative |<hall_term(B),B>| %.3g over 100 fields (tol 1e-10)", worst)};
}

Verdict c5_form_equivalence() {
  const GridSpec g = make_grid(32, 6.0);
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    worst = std::max(worst, cross_validate_forms(random_solenoidal(g, 2000 + s), random_solenoidal(g, 3000 + s), 1.0, g));
  }
  RunConfig c = random_band_config(0.5, 1.0, 0.05);
  const RunOutcome div = simulate(c, "divergence form");
  c.physics.form = RhsForm::primitive;
  const RunOutcome prim = simulate(c, "primitive form");
  double series = 0.0;
  for (std::size_t i = 0; i < div.history.size(); ++i) {
    for (std::size_t j = 0; j < div.history[i].u_dsq.size(); ++j) {
      series = std::max(series, std::abs(div.history[i].u_dsq[j] - prim.history[i].u_dsq[j]) / div.history[i].u_dsq[j]);
      series = std::max(series, std::abs(div.history[i].b_dsq[j] - prim.history[i].b_dsq[j]) / div.history[i].b_dsq[j]);
    }
    series = std::max(series, std::abs(div.history[i].u_linf[0] - prim.history[i].u_linf[0]) / div.history[i].u_linf[0]);
  }
  const bool ok = worst <= 1e-10 && series <= 1e-8 && div.history.size() == prim.history.size();
  return {ok, fmt("cross_validate_forms max %.3g (tol 1e-10); series relative difference to t=1 %.3g (tol 1e-8)", worst, series)};
}

Verdict c6_fourier_bound() {
  RunConfig c = base_config(96, 64.0, 20.0, 1.0);
  c.init.spec.kind = InitKind::gaussian_blob;
  c.init.spec.width = 2.0;
  c.init.target_norm = 1e-2;
  const RunOutcome out = simulate(c, "blob n=96");
  for (const auto& a : out.audits) {
    if (a.name == "fourier_bound") {
      const auto n = a.details["samples"].get<std::size_t>();
      const auto passed = a.details["samples_passed"].get<std::size_t>();
      return {a.pass && n == out.history.size() && n > 0,
              fmt("%zu/%zu samples within the bound; worst ratio %.3g, empirical C %.3g vs combined C %.3g", passed, n,
                  a.worst, a.empirical_constant, a.details["bound"]["combined_C"].get<double>())};
    }
  }
  return {false, "fourier_bound audit missing"};
}

// Decay configuration for criteria 7 and 8.
struct DecaySetup {
  std::size_t n;
  double box;
  double t_a, t_b, interval, tol, span;
  const char* label;
};

DecaySetup decay_setup() {
  if (large_mode()) return {192, 128.0, 5.0, 40.0, 0.5, 0.3, 4.0, "large n=192 L=128"};
  return {96, 64.0, 3.0, 10.0, 0.25, 0.5, 2.5, "reduced n=96 L=64"};
}

struct DecayRuns {
  DecaySetup setup;
  History nonlinear;
  std::vector<DecaySeries> linear;  // m = 0, 1, 2
};

const DecayRuns& decay_runs() {
  static std::optional<DecayRuns> out;
  if (!out) {
    const DecaySetup d = decay_setup();
    RunConfig c = base_config(d.n, d.box, d.t_b, d.interval);
    c.init.spec.kind = InitKind::projected_gaussian;
    c.init.spec.width = std::sqrt(2.0);
    c.init.target_norm = 1e-2;
    c.analysis.m_max = 2;
    DecayRuns r{d, simulate(c, d.label).history, {}};
    const GridSpec g = grid_from(c);
    const SolverState s0 = initial_state(c, g);
    PhysicsParams lin;
    lin.nonlinear = false;
    r.linear.resize(3);
    for (int m = 0; m <= 2; ++m) r.linear[static_cast<std::size_t>(m)].m = m;
    for (const auto& rec : r.nonlinear) {
      const SolverState s = linear_evolve(s0, g, lin, rec.t);
      for (int m = 0; m <= 2; ++m) {
        auto& series = r.linear[static_cast<std::size_t>(m)];
        series.times.push_back(rec.t);
        series.values.push_back(seminorm_sq(s.u_hat, g, m) + seminorm_sq(s.b_hat, g, m));
      }
    }
    out = std::move(r);
  }
  return *out;
}

FitResult fit(const DecaySeries& s, const DecaySetup& d) {
  FitOptions o;
  o.min_span_factor = d.span;
  return fit_power_law(s, d.t_a, d.t_b, o);
}

Verdict c7_energy_decay() {
  const DecayRuns& r = decay_runs();
  const DecaySetup& d = r.setup;
  const FitResult nl = fit(derivative_series(r.nonlinear, 0), d);
  const FitResult lin = fit(r.linear[0], d);
  const TheoremVerdict v = theorem_check(nl, 0, 0.75, d.tol, TheoremKind::sobolev);
  const bool lin_ok = std::abs(lin.exponent + 1.5) <= 0.1;
  return {v.pass && lin_ok,
          fmt("[%s] window [%g,%g]: exponent %.4f (need <= %.2f); linear companion %.4f (need -1.5 +- 0.1); t_valid %.1f",
              d.label, d.t_a, d.t_b, nl.exponent, -1.5 + d.tol, lin.exponent, t_valid(d.box))};
}

Verdict c8_derivative_increments() {
  const DecayRuns& r = decay_runs();
  const DecaySetup& d = r.setup;
  double e[3], l[3];
  for (int m = 0; m <= 2; ++m) {
    e[m] = fit(derivative_series(r.nonlinear, m), d).exponent;
    l[m] = fit(r.linear[static_cast<std::size_t>(m)], d).exponent;
  }
  bool ok = true;
  for (int m = 1; m <= 2; ++m) {
    ok = ok && e[m] <= e[0] - m + 0.4;
    ok = ok && std::abs((l[m - 1] - l[m]) - 1.0) <= 0.05;
  }
  return {ok, fmt("[%s] exponents m=0,1,2: %.4f %.4f %.4f (need e_m <= e_0 - m + 0.4); linear increments %.4f %.4f (need 1 +- 0.05)",
                  d.label, e[0], e[1], e[2], l[0] - l[1], l[1] - l[2])};
}

// Worst case of the bootstrap hypothesis taken with equality, integrated by RK4.
double worst_case_ratio(const BootstrapInput& in, const BootstrapResult& r, double y0) {
  const double rho = to_double(in.rho_prev);
  const double rho_m = to_double(r.rho_m);
  auto rhs = [&](double t, double y) {
    double f = -r.k / (t + 1.0) * y + in.c_prev * (in.c0 + r.k) * (in.c0 + r.k) * std::pow(t + 1.0, -2.0 - rho);
    for (const auto& term : in.forcing) f += term.c * std::pow(t + 1.0, -term.s);
    return f;
  };
  double t = in.t_star;
  double y = y0 * std::pow(t + 1.0, -rho_m);
  const double h = 1e-3;
  double worst = y / (r.c_m * std::pow(t + 1.0, -rho_m));
  while (t < 500.0) {
    const double k1 = rhs(t, y);
    const double k2 = rhs(t + h / 2, y + h / 2 * k1);
    const double k3 = rhs(t + h / 2, y + h / 2 * k2);
    const double k4 = rhs(t + h, y + h * k3);
    y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    t += h;
    worst = std::max(worst, y / (r.c_m * std::pow(t + 1.0, -rho_m)));
  }
  return worst;
}

Verdict c9_bootstrap() {
  BootstrapInput in;
  in.rho_prev = Rational(3, 2);
  in.c_prev = 1.0;
  in.c0 = 0.5;
  in.forcing = {{0.2, 4.0}};
  bool ok = bootstrap_step(in).rho_m == Rational(5, 2);
  Rational rho(3, 2);
  for (int m = 1; m <= 10; ++m) {
    BootstrapInput s;
    s.rho_prev = rho;
    s.c_prev = 1.0;
    s.forcing = {{1.0, to_double(rho) + 2.0}};
    rho = bootstrap_step(s).rho_m;
    ok = ok && rho == Rational(2 * m + 3, 2);
  }
  double worst = 0.0;
  bool same_c = true;
  for (const Rational& r0 : {Rational(3, 2), Rational(5, 2), Rational(7, 2)}) {
    std::vector<double> cm;
    for (double t_star : {1.0, 10.0}) {
      BootstrapInput b;
      b.rho_prev = r0;
      b.c_prev = 2.0;
      b.c0 = 1.5;
      b.forcing = {{0.7, to_double(r0) + 2.0}, {3.0, to_double(r0) + 3.25}};
      b.t_star = t_star;
      b.initial_level = 0.8;
      const BootstrapResult res = bootstrap_step(b);
      cm.push_back(res.c_m);
      worst = std::max(worst, worst_case_ratio(b, res, 0.8));
    }
    same_c = same_c && cm[0] == cm[1];
  }
  ok = ok && worst <= 1.0 && same_c;
  return {ok, fmt("composition reaches %lld/%lld at m=10; worst-case ODE / bound max %.4f (need <= 1); C_m equal for T*=1,10: %s",
                  static_cast<long long>(rho.numerator()), static_cast<long long>(rho.denominator()), worst, same_c ? "yes" : "no")};
}

Verdict c10_rate_table() {
  std::size_t checked = 0;
  bool ok = true;
  for (const Rational& mu : {Rational(0), Rational(3, 4), Rational(2)}) {
    for (int m = 3; m <= 64; ++m) {
      for (const auto& e : rm_rates(m, mu)) {
        ok = ok && e.holds && e.s >= Rational(2) * mu + Rational(m + 1);
        const Rational a = gn_exponent_exact(m, e.j);
        ok = ok && a == Rational(2 * e.j + 3, 2 * (m + 1)) && a > Rational(0) && a < Rational(1);
        ++checked;
      }
    }
  }
  return {ok, fmt("%zu (m, j, mu) entries checked in exact arithmetic", checked)};
}

Verdict c11_splitting() {
  double worst = std::numeric_limits<double>::infinity();
  std::size_t samples = 0;
  std::string where;
  for (const auto& [name, h] : g_histories) {
    for (const auto& r : h) {
      ++samples;
      if (r.split.slack < worst) {
        worst = r.split.slack;
        where = name;
      }
    }
  }
  if (samples == 0) return {false, "no runs recorded"};
  return {worst >= -1e-12,
          fmt("min relative slack %.3g over %zu samples in %zu runs (tol -1e-12; min in %s)", worst, samples,
              g_histories.size(), where.c_str())};
}

Verdict c12_duhamel() {
  RunConfig c = random_band_config(0.5, 1.0, 1e-3);
  const GridSpec g = grid_from(c);
  const std::vector<ModeIndex> probes = {{2, 0, 0},  {0, 3, 0}, {1, 1, 1}, {2, -1, 1}, {-1, 2, 2},
                                         {3, 1, 0},  {0, -2, 2}, {1, 0, 3}, {2, 2, 0}, {-3, 1, 1}};
  DuhamelRecorder rec(probes);
  History h;
  const RecordOptions ro = record_options(c);
  SampleSink sink = [&](const SolverState& s, const SampleInfo& info) {
    rec.observe(s, g);
    if (info.sample_index % 50 == 0) h.push_back(make_record(s, g, ro, info.last_dt));
  };
  run(initial_state(c, g), g, c.physics, c.time.control, Schedule{1.0, 1e-3}, {sink});
  keep("duhamel n=32", h);
  double worst = 0.0;
  double hall = 0.0;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const DuhamelResult r = duhamel_residual(rec, p, g, c.physics);
    worst = std::max(worst, r.residual());
    hall = std::max(hall, r.hall_flux);
  }
  return {worst <= 1e-4 && hall > 0.0 && rec.times().size() == 1001,
          fmt("max residual %.3g over %zu wavevectors, %zu samples (tol 1e-4); max Hall flux %.3g", worst,
              probes.size(), rec.times().size(), hall)};
}

RunConfig golden_config() {
  RunConfig c = random_band_config(0.5, 1.0, 0.05);
  c.physics.hall_coefficient = 0.0;
  return c;
}

std::string golden_path() { return std::string(HALLMHD_TEST_DATA) + "/golden_mhd.tsv"; }

double max_relative_difference(const History& a, const History& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  auto cmp = [&](double x, double y) {
    const double s = std::max(std::abs(x), std::abs(y));
    if (s > 0.0) worst = std::max(worst, std::abs(x - y) / s);
  };
  for (std::size_t i = 0; i < a.size(); ++i) {
    cmp(a[i].t, b[i].t);
    for (std::size_t j = 0; j < a[i].u_dsq.size(); ++j) {
      cmp(a[i].u_dsq[j], b[i].u_dsq[j]);
      cmp(a[i].b_dsq[j], b[i].b_dsq[j]);
    }
    cmp(a[i].u_linf[0], b[i].u_linf[0]);
    cmp(a[i].b_linf[0], b[i].b_linf[0]);
    cmp(a[i].u_l1, b[i].u_l1);
    cmp(a[i].b_l1, b[i].b_l1);
  }
  return worst;
}

Verdict c13_mhd_regression() {
  const History golden = read_series(golden_path());
  const RunOutcome mhd = simulate(golden_config(), "mhd n=32");
  const double diff = max_relative_difference(mhd.history, golden);
  RunConfig hall = golden_config();
  hall.physics.hall_coefficient = 1.0;
  const double hall_diff = max_relative_difference(simulate(hall, "hall n=32").history, golden);
  return {diff <= 1e-8 && hall_diff > 1e-8,
          fmt("hall=0 run vs golden: %.3g (tol 1e-8); hall=1 run differs by %.3g (must exceed 1e-8)", diff, hall_diff)};
}

Verdict c14_monotonicity() {
  const AuditReport small = hm_monotonicity_audit(small_data_run().history, PhysicsParams{}, 3);
  RunConfig c = base_config(32, 16.0, 0.5, 0.01);
  c.init.spec.kind = InitKind::gaussian_blob;
  c.init.spec.width = 0.9;
  c.init.spec.amplitude = 20.0;
  c.init.spec.b_amplitude = 20.0;
  c.analysis.m_max = 3;
  const RunOutcome big = simulate(c, "large-data n=32");
  const AuditReport large = hm_monotonicity_audit(big.history, c.physics, 3);
  std::string violation = "none";
  if (large.details.contains("first_violation")) {
    const auto& v = large.details["first_violation"];
    violation = fmt("t=%.3g margin %.3g", v["t"].get<double>(), v["margin"].get<double>());
  }
  return {small.pass, fmt("small data m=3 min margin %.3g (tol -1e-3); large data %s, first violation: %s", small.worst,
                          large.pass ? "passes" : "fails", violation.c_str())};
}

int write_golden(const std::string& path) {
  RunOptions o;
  o.write_outputs = false;
  const RunConfig c = golden_config();
  const RunOutcome out = run_simulation(c, o);
  emit_series(out.history, path, series_layout(c));
  std::printf("wrote %zu samples to %s\n", out.history.size(), path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc == 3 && std::string(argv[1]) == "--write-golden") return write_golden(argv[2]);
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  const std::vector<std::pair<int, std::function<Verdict()>>> criteria = {
      {1, c1_linear_oracle},     {2, c2_heat_rates},      {3, c3_energy_identity},
      {4, c4_hall_neutrality},   {5, c5_form_equivalence}, {6, c6_fourier_bound},
      {7, c7_energy_decay},      {8, c8_derivative_increments}, {9, c9_bootstrap},
      {10, c10_rate_table},      {12, c12_duhamel},       {13, c13_mhd_regression},
      {14, c14_monotonicity},    {11, c11_splitting},
  };
  std::map<int, std::pair<Verdict, double>> results;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    results[id] = {v, secs};
    std::fflush(stdout);
  }
  bool all = true;
  for (const auto& [id, r] : results) {
    std::printf("criterion %2d %s  (%.1fs)  %s\n", id, r.first.pass ? "PASS" : "FAIL", r.second, r.first.detail.c_str());
    all = all && r.first.pass;
  }
  std::printf("%s\n", all ? "ALL PASS" : "SOME CRITERIA FAILED");
  return all ? 0 : 1;
}
