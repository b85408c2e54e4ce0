#include <gtest/gtest.h>

#include "support.hpp"

using namespace hallmhd;
using hmtest::max_abs;
using hmtest::max_abs_diff;
using hmtest::random_solenoidal;

namespace {

SolverState state_of(SpectralVectorField u, SpectralVectorField b) {
  SolverState s;
  s.u_hat = std::move(u);
  s.b_hat = std::move(b);
  return s;
}

// Smooth localized data with max|u|, max|B| of order `amp`.
SolverState smooth_state(const GridSpec& g, double amp, std::uint64_t seed = 42) {
  InitSpec spec;
  spec.kind = InitKind::random_band;
  spec.amplitude = amp;
  spec.b_amplitude = amp;
  spec.band_lo = 0.5;
  spec.band_hi = 1.5;
  spec.width = g.box_length() / 8.0;
  spec.seed = seed;
  InitialFields f = make_initial(g, spec);
  return state_of(std::move(f.u), std::move(f.b));
}

double energy(const SolverState& s, const GridSpec& g) {
  return seminorm_sq(s.u_hat, g, 0) + seminorm_sq(s.b_hat, g, 0);
}

double dissipation(const SolverState& s, const GridSpec& g) {
  return seminorm_sq(s.u_hat, g, 1) + seminorm_sq(s.b_hat, g, 1);
}

double state_diff(const SolverState& a, const SolverState& b) {
  return std::max(max_abs_diff(a.u_hat, b.u_hat), max_abs_diff(a.b_hat, b.b_hat));
}

SolverState march(SolverState s, const GridSpec& g, const PhysicsParams& p, double dt, int steps) {
  for (int i = 0; i < steps; ++i) s = step(s, g, p, dt);
  return s;
}

}  // namespace

TEST(ComputeDt, NoConstraintGivesDtMax) {
  const GridSpec g = make_grid(16, 8.0);
  const SolverState s = state_of(SpectralVectorField(g), SpectralVectorField(g));
  StepControl c;
  const DtChoice d = compute_dt(s, g, PhysicsParams{}, c);
  EXPECT_EQ(d.dt, c.dt_max);
  EXPECT_EQ(d.limiter, DtLimiter::dt_max);
}

TEST(ComputeDt, WhistlerArithmetic) {
  EXPECT_NEAR(whistler_dt(0.5, 1.0, 1.0, 0.3), 0.3 * 0.25 / (kPi * kPi), 1e-18);
  EXPECT_NEAR(whistler_dt(0.5, 1.0, 1.0, 0.3), 7.599e-3, 1e-6);
  const GridSpec g = make_grid(16, 8.0);  // dx = 0.5
  PhysicsParams p;
  StepControl c;
  c.cfl_advective = 1.0;
  const DtChoice d = dt_from_maxima(1.0, 1.0, g, p, c);
  EXPECT_EQ(d.limiter, DtLimiter::whistler);
  EXPECT_NEAR(d.dt, 0.3 * 0.25 / (kPi * kPi), 1e-18);
}

TEST(ComputeDt, NoHallMeansAdvectiveOnly) {
  const GridSpec g = make_grid(16, 8.0);
  PhysicsParams p;
  p.hall_coefficient = 0.0;
  StepControl c;
  c.dt_max = 1.0;
  const DtChoice d = dt_from_maxima(2.0, 1.0, g, p, c);
  EXPECT_EQ(d.limiter, DtLimiter::advective);
  EXPECT_NEAR(d.dt, 0.4 * 0.5 / 2.0, 1e-15);
}

TEST(ComputeDt, FloorWarns) {
  const GridSpec g = make_grid(16, 8.0);
  StepControl c;
  c.dt_min = 1e-3;
  const DtChoice d = dt_from_maxima(1e6, 1e6, g, PhysicsParams{}, c);
  EXPECT_TRUE(d.floored);
  EXPECT_EQ(d.dt, 1e-3);
}

TEST(Step, LinearSingleModeExact) {
  const GridSpec g = make_grid(16, 5.0);
  SpectralVectorField u(g);
  SpectralVectorField b(g);
  const std::size_t idx = g.index(0, 2, 1);
  u[0][idx] = Complex{0.3, -0.7};
  b[0][idx] = Complex{1.1, 0.2};
  PhysicsParams p;
  p.nonlinear = false;
  p.nu = 0.7;
  p.mu_resistivity = 1.3;
  const double dt = 0.01;
  const SolverState s = step(state_of(u, b), g, p, dt);
  EXPECT_LT(std::abs(s.u_hat[0][idx] - u[0][idx] * std::exp(-0.7 * g.k2(idx) * dt)), 1e-15);
  EXPECT_LT(std::abs(s.b_hat[0][idx] - b[0][idx] * std::exp(-1.3 * g.k2(idx) * dt)), 1e-15);
  EXPECT_DOUBLE_EQ(s.t, dt);
  EXPECT_EQ(s.step_index, 1);
}

TEST(Step, ZeroStateStaysZero) {
  const GridSpec g = make_grid(16, 5.0);
  const SolverState s = step(state_of(SpectralVectorField(g), SpectralVectorField(g)), g, PhysicsParams{}, 0.01);
  EXPECT_EQ(max_abs(s.u_hat), 0.0);
  EXPECT_EQ(max_abs(s.b_hat), 0.0);
}

TEST(Step, NonFiniteStageThrows) {
  const GridSpec g = make_grid(16, 5.0);
  SolverState s = smooth_state(g, 0.5);
  s.u_hat[1][g.index(1, 1, 1)] = Complex{std::numeric_limits<double>::infinity(), 0.0};
  EXPECT_THROW(step(s, g, PhysicsParams{}, 0.01), Error);
}

TEST(Step, RichardsonRatioNearEight) {
  const GridSpec g = make_grid(16, 8.0);
  const SolverState s0 = smooth_state(g, 0.8);
  const PhysicsParams p;
  const double T = 0.08;
  const SolverState a = march(s0, g, p, T / 10, 10);
  const SolverState b = march(s0, g, p, T / 20, 20);
  const SolverState c = march(s0, g, p, T / 40, 40);
  const double ratio = state_diff(a, b) / state_diff(b, c);
  EXPECT_GT(ratio, 6.5);
  EXPECT_LT(ratio, 9.5);
}

TEST(Step, DiscreteEnergyBalanceThirdOrder) {
  // r(dt) = |E(dt) - E(0) + 2∫D| / dt with Simpson's rule on a half-step midpoint.
  const GridSpec g = make_grid(16, 8.0);
  const SolverState s0 = smooth_state(g, 0.8);
  const PhysicsParams p;
  auto residual = [&](double dt) {
    const SolverState mid = step(s0, g, p, dt / 2);
    const SolverState end = step(s0, g, p, dt);
    const double integral = dt / 6.0 * (dissipation(s0, g) + 4.0 * dissipation(mid, g) + dissipation(end, g));
    return std::abs(energy(end, g) - energy(s0, g) + 2.0 * integral) / (dt * 2.0 * dissipation(s0, g));
  };
  std::vector<double> r;
  for (double dt : {0.002, 0.001, 0.0005}) r.push_back(residual(dt));
  EXPECT_GE(std::log2(r[0] / r[1]), 2.7);
  EXPECT_GE(std::log2(r[1] / r[2]), 2.7);
}

TEST(Run, ZeroEndTimeEmitsOneSample) {
  const GridSpec g = make_grid(16, 5.0);
  int samples = 0;
  const RunResult rr = run(smooth_state(g, 0.5), g, PhysicsParams{}, StepControl{}, Schedule{0.0, 1.0},
                           {[&](const SolverState&, const SampleInfo&) { ++samples; }});
  EXPECT_EQ(samples, 1);
  EXPECT_EQ(rr.state.step_index, 0);
}

TEST(Run, SamplesLandExactly) {
  const GridSpec g = make_grid(16, 5.0);
  std::vector<double> times;
  StepControl c;
  c.dt_max = 0.03;
  run(smooth_state(g, 0.5), g, PhysicsParams{}, c, Schedule{0.5, 0.1},
      {[&](const SolverState& s, const SampleInfo&) { times.push_back(s.t); }});
  ASSERT_EQ(times.size(), 6u);
  for (std::size_t i = 0; i < times.size(); ++i) EXPECT_EQ(times[i], 0.1 * static_cast<double>(i));
}

TEST(Run, LinearModeMatchesLinearEvolve) {
  const GridSpec g = make_grid(32, 10.0);
  const SolverState s0 = smooth_state(g, 1.0);
  PhysicsParams p;
  p.nonlinear = false;
  const RunResult rr = run(s0, g, p, StepControl{}, Schedule{1.0, 0.25}, {});
  const SolverState ex = linear_evolve(s0, g, p, 1.0);
  double worst = 0.0;
  for (const auto& [x, y] : {std::pair{&rr.state.u_hat, &ex.u_hat}, std::pair{&rr.state.b_hat, &ex.b_hat}}) {
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t i = 0; i < (*y)[c].size(); ++i) {
        const double m = std::abs((*y)[c][i]);
        if (m > 0.0) worst = std::max(worst, std::abs((*x)[c][i] - (*y)[c][i]) / m);
      }
    }
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(LinearEvolve, IdentityAndModeDecay) {
  const GridSpec g = make_grid(16, 5.0);
  const SolverState s0 = smooth_state(g, 1.0);
  PhysicsParams p;
  p.nu = 0.5;
  const SolverState same = linear_evolve(s0, g, p, 0.0);
  EXPECT_EQ(same.u_hat, s0.u_hat);
  const SolverState s = linear_evolve(s0, g, p, 0.7);
  for (std::size_t i = 1; i < g.spectral_size(); ++i) {
    const double e0 = std::norm(s0.u_hat[0][i]);
    if (e0 == 0.0) continue;
    EXPECT_NEAR(std::norm(s.u_hat[0][i]) / e0, std::exp(-2.0 * 0.5 * g.k2(i) * 0.7), 1e-14);
  }
}

TEST(LinearEvolve, GaussianSpectrumMatchesHeatOracle) {
  // û₀ = e^{-|k|²/2} ê_x, so |û₀|² is the e^{-r²} profile.
  const GridSpec g = make_grid(32, 16.0);
  SpectralVectorField u(g);
  detail::for_each_mode(g, [&](std::size_t idx, double, double, double, std::size_t) {
    if (g.retained(idx)) u[0][idx] = std::exp(-g.k2(idx) / 2.0);
  });
  const SolverState s0 = state_of(u, SpectralVectorField(g));
  const double e0 = seminorm_sq(u, g, 0);
  for (double t : {0.5, 1.0, 2.0}) {
    const double e = seminorm_sq(linear_evolve(s0, g, PhysicsParams{}, t).u_hat, g, 0);
    const double expect = heat_oracle_gaussian_exact(0, t) / heat_oracle_gaussian_exact(0, 0.0);
    EXPECT_NEAR(e / e0, expect, 1e-3 * expect) << t;
  }
}

TEST(Health, FreshPassesAndViolationsFail) {
  const GridSpec g = make_grid(16, 8.0);
  const SolverState s0 = smooth_state(g, 1.0);
  EXPECT_TRUE(health_check(s0, g, StepControl{}).pass);

  SolverState nan = s0;
  nan.b_hat[2][g.index(2, 3, 1)] = Complex{std::nan(""), 0.0};
  const HealthReport hn = health_check(nan, g, StepControl{});
  EXPECT_FALSE(hn.pass);
  ASSERT_TRUE(hn.non_finite_mode.has_value());
  EXPECT_EQ(hn.non_finite_mode->mx, 2);
  EXPECT_EQ(hn.non_finite_mode->my, 3);
  EXPECT_EQ(hn.non_finite_mode->mz, 1);

  // Add a gradient component sized so the divergence residual is about 1e-6.
  SolverState div = s0;
  SpectralVectorField phi(g);
  phi[0] = s0.u_hat[1];
  SpectralVectorField grad = gradient(phi[0], g);
  const double target = 1e-6;
  const double scale = target * std::sqrt(seminorm_sq(s0.u_hat, g, 1) / seminorm_sq(grad, g, 1));
  grad *= scale;
  div.u_hat += grad;
  const HealthReport hd = health_check(div, g, StepControl{});
  EXPECT_FALSE(hd.pass);
  EXPECT_GT(hd.divergence_u, 0.3 * target);
  EXPECT_LT(hd.divergence_u, 3.0 * target);
}

TEST(Run, DivergenceStaysSmallOverThousandSteps) {
  const GridSpec g = make_grid(16, 8.0);
  SolverState s = smooth_state(g, 0.5);
  for (int i = 0; i < 1000; ++i) s = step(s, g, PhysicsParams{}, 0.005);
  EXPECT_LT(divergence_residual(s.u_hat, g), 1e-11);
  EXPECT_LT(divergence_residual(s.b_hat, g), 1e-11);
}

TEST(Run, DeterministicBitIdentical) {
  const GridSpec g = make_grid(16, 8.0);
  auto go = [&] {
    std::vector<double> e;
    run(smooth_state(g, 0.7), g, PhysicsParams{}, StepControl{}, Schedule{0.5, 0.1},
        {[&](const SolverState& s, const SampleInfo&) { e.push_back(energy(s, g)); }});
    return e;
  };
  EXPECT_EQ(go(), go());
}

TEST(Run, SmallDataEnergyMonotone) {
  const GridSpec g = make_grid(64, 32.0);
  InitSpec spec;
  spec.kind = InitKind::gaussian_blob;
  InitialFields f = rescale_small(make_initial(g, spec), g, 1e-2, 3);
  std::vector<double> e;
  run(state_of(f.u, f.b), g, PhysicsParams{}, StepControl{}, Schedule{10.0, 0.5},
      {[&](const SolverState& s, const SampleInfo&) { e.push_back(energy(s, g)); }});
  ASSERT_EQ(e.size(), 21u);
  for (std::size_t i = 1; i < e.size(); ++i) EXPECT_LT(e[i], e[i - 1]) << i;
}

TEST(Run, BlowupThresholdThrows) {
  const GridSpec g = make_grid(16, 8.0);
  StepControl c;
  c.blowup_threshold = 0.1;
  EXPECT_THROW(run(smooth_state(g, 1.0), g, PhysicsParams{}, c, Schedule{0.1, 0.1}, {}), BlowupError);
}
