#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hallmhd/dynamics.hpp"
#include "hallmhd/field.hpp"
#include "hallmhd/grid.hpp"
#include "hallmhd/spectral.hpp"

namespace hallmhd {

struct PhysicsParams {
  double nu = 1.0;
  double mu_resistivity = 1.0;
  double hall_coefficient = 1.0;
  RhsForm form = RhsForm::divergence;
  bool nonlinear = true;  ///< false leaves only the exact diffusion semigroup

  void validate() const {
    if (!(nu > 0.0) || !(mu_resistivity > 0.0)) {
      throw InvalidArgument("nu and mu_resistivity must be positive");
    }
    if (!(hall_coefficient >= 0.0)) {
      throw InvalidArgument("hall_coefficient must be non-negative");
    }
  }
};

struct SolverState {
  SpectralVectorField u_hat;
  SpectralVectorField b_hat;
  double t = 0.0;
  std::int64_t step_index = 0;
};

struct StepControl {
  double cfl_advective = 0.4;
  double cfl_whistler = 0.3;
  double dt_min = 1e-8;
  double dt_max = 0.05;
  double blowup_threshold = 1e6;  ///< on the L∞ norm of u and B

  void validate() const {
    if (!(cfl_advective > 0.0 && cfl_advective <= 1.0) ||
        !(cfl_whistler > 0.0 && cfl_whistler <= 1.0)) {
      throw InvalidArgument("CFL numbers must lie in (0, 1]");
    }
    if (!(dt_min > 0.0) || !(dt_min <= dt_max)) {
      throw InvalidArgument("need 0 < dt_min <= dt_max");
    }
    if (!(blowup_threshold > 0.0)) {
      throw InvalidArgument("blowup_threshold must be positive");
    }
  }
};

/// Raised when a state stops being finite or exceeds the blow-up threshold.
class BlowupError : public Error {
 public:
  BlowupError(const std::string& what, double t, std::int64_t step)
      : Error(what), t_(t), step_(step) {}
  [[nodiscard]] double time() const { return t_; }
  [[nodiscard]] std::int64_t step() const { return step_; }

 private:
  double t_;
  std::int64_t step_;
};

enum class DtLimiter { dt_max, advective, whistler, dt_min_floor };

inline const char* to_string(DtLimiter l) {
  switch (l) {
    case DtLimiter::dt_max:
      return "dt_max";
    case DtLimiter::advective:
      return "advective";
    case DtLimiter::whistler:
      return "whistler";
    case DtLimiter::dt_min_floor:
      return "dt_min_floor";
  }
  return "?";
}

struct DtChoice {
  double dt = 0.0;
  DtLimiter limiter = DtLimiter::dt_max;
  bool floored = false;
  double max_speed = 0.0;  ///< max_x (|u| + |B|)
  double max_u = 0.0;
  double max_b = 0.0;
};

/// Whistler limit: cfl_whistler·Δx² / (π²·hall·max|B|).  Infinite when inactive.
inline double whistler_dt(double dx, double max_b, double hall_coefficient, double cfl_whistler) {
  if (hall_coefficient == 0.0 || max_b == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return cfl_whistler * dx * dx / (kPi * kPi * hall_coefficient * max_b);
}

inline DtChoice dt_from_maxima(double max_speed, double max_b, const GridSpec& grid,
                               const PhysicsParams& params, const StepControl& control) {
  DtChoice c;
  c.max_speed = max_speed;
  c.max_b = max_b;
  c.dt = control.dt_max;
  c.limiter = DtLimiter::dt_max;
  if (params.nonlinear) {
    if (max_speed > 0.0) {
      const double adv = control.cfl_advective * grid.dx() / max_speed;
      if (adv < c.dt) {
        c.dt = adv;
        c.limiter = DtLimiter::advective;
      }
    }
    const double wh = whistler_dt(grid.dx(), max_b, params.hall_coefficient, control.cfl_whistler);
    if (wh < c.dt) {
      c.dt = wh;
      c.limiter = DtLimiter::whistler;
    }
  }
  if (c.dt < control.dt_min) {
    c.dt = control.dt_min;
    c.limiter = DtLimiter::dt_min_floor;
    c.floored = true;
  }
  return c;
}

/// Stable timestep for the explicit nonlinear part.  Diffusion is integrated exactly
/// and imposes no constraint.
inline DtChoice compute_dt(const SolverState& state, const GridSpec& grid,
                           const PhysicsParams& params, const StepControl& control) {
  const PhysicalVectorField u = inverse_transform(state.u_hat, grid);
  const PhysicalVectorField b = inverse_transform(state.b_hat, grid);
  double max_speed = 0.0;
  double max_u = 0.0;
  double max_b = 0.0;
  for (std::size_t p = 0; p < u.size(); ++p) {
    const double mu = std::sqrt(u[0][p] * u[0][p] + u[1][p] * u[1][p] + u[2][p] * u[2][p]);
    const double mb = std::sqrt(b[0][p] * b[0][p] + b[1][p] * b[1][p] + b[2][p] * b[2][p]);
    max_speed = std::max(max_speed, mu + mb);
    max_u = std::max(max_u, mu);
    max_b = std::max(max_b, mb);
  }
  DtChoice c = dt_from_maxima(max_speed, max_b, grid, params, control);
  c.max_u = max_u;
  return c;
}

namespace detail {

inline bool all_finite(const SpectralVectorField& v) {
  for (const auto& c : v.comp) {
    for (const auto& z : c) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        return false;
      }
    }
  }
  return true;
}

/// out = E(τ)·(a + s·b) per mode, E(τ) = exp(-coef |k|² τ); b may be null.
inline SpectralVectorField decay_combine(const SpectralVectorField& a, const SpectralVectorField* b,
                                         double s, double coef, double tau, const GridSpec& grid) {
  SpectralVectorField out(grid);
  for (std::size_t idx = 0; idx < a.size(); ++idx) {
    const double e = std::exp(-coef * grid.k2(idx) * tau);
    for (std::size_t c = 0; c < 3; ++c) {
      Complex v = a[c][idx];
      if (b != nullptr) {
        v += s * (*b)[c][idx];
      }
      out[c][idx] = e * v;
    }
  }
  return out;
}

inline void axpy_decay(SpectralVectorField& y, const SpectralVectorField& x, double s, double coef,
                       double tau, const GridSpec& grid) {
  for (std::size_t idx = 0; idx < x.size(); ++idx) {
    const double e = s * std::exp(-coef * grid.k2(idx) * tau);
    for (std::size_t c = 0; c < 3; ++c) {
      y[c][idx] += e * x[c][idx];
    }
  }
}

inline RhsPair evaluate_rhs(const SpectralVectorField& u, const SpectralVectorField& b,
                            const GridSpec& grid, const PhysicsParams& params,
                            const SolverState& origin) {
  if (!params.nonlinear) {
    return {SpectralVectorField(grid), SpectralVectorField(grid)};
  }
  try {
    return nonlinear_rhs(u, b, params.hall_coefficient, params.form, grid);
  } catch (const NonFiniteError& e) {
    throw BlowupError(std::string("non-finite stage: ") + e.what(), origin.t, origin.step_index);
  }
}

inline void finish_state(SpectralVectorField& v, const GridSpec& grid) {
  v = leray_project(v, grid);
  dealias_in_place(v, grid);
  zero_mean_in_place(v);
}

}  // namespace detail

/// One integrating-factor SSP-RK3 step.  Diffusion enters through the exact factors
/// exp(-ν|k|²τ), exp(-μ|k|²τ); the nonlinear tendencies are explicit with stage
/// times 0, dt, dt/2.
inline SolverState step(const SolverState& state, const GridSpec& grid,
                        const PhysicsParams& params, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw InvalidArgument("step: dt must be positive and finite");
  }
  const double nu = params.nu;
  const double mu = params.mu_resistivity;
  const auto& u0 = state.u_hat;
  const auto& b0 = state.b_hat;

  if (!params.nonlinear) {
    SolverState next;
    next.u_hat = detail::decay_combine(u0, nullptr, 0.0, nu, dt, grid);
    next.b_hat = detail::decay_combine(b0, nullptr, 0.0, mu, dt, grid);
    next.t = state.t + dt;
    next.step_index = state.step_index + 1;
    return next;
  }

  const RhsPair n0 = detail::evaluate_rhs(u0, b0, grid, params, state);
  const SpectralVectorField u1 = detail::decay_combine(u0, &n0.du, dt, nu, dt, grid);
  const SpectralVectorField b1 = detail::decay_combine(b0, &n0.dB, dt, mu, dt, grid);

  const RhsPair n1 = detail::evaluate_rhs(u1, b1, grid, params, state);
  SpectralVectorField u2 = detail::decay_combine(u0, &n0.du, 0.25 * dt, nu, 0.5 * dt, grid);
  SpectralVectorField b2 = detail::decay_combine(b0, &n0.dB, 0.25 * dt, mu, 0.5 * dt, grid);
  detail::axpy_decay(u2, n1.du, 0.25 * dt, nu, -0.5 * dt, grid);
  detail::axpy_decay(b2, n1.dB, 0.25 * dt, mu, -0.5 * dt, grid);

  const RhsPair n2 = detail::evaluate_rhs(u2, b2, grid, params, state);
  SolverState next;
  next.u_hat = detail::decay_combine(u0, nullptr, 0.0, nu, dt, grid);
  next.b_hat = detail::decay_combine(b0, nullptr, 0.0, mu, dt, grid);
  next.u_hat *= 1.0 / 3.0;
  next.b_hat *= 1.0 / 3.0;
  const SpectralVectorField u3 = detail::decay_combine(u2, &n2.du, dt, nu, 0.5 * dt, grid);
  const SpectralVectorField b3 = detail::decay_combine(b2, &n2.dB, dt, mu, 0.5 * dt, grid);
  detail::axpy_decay(next.u_hat, u3, 2.0 / 3.0, nu, 0.0, grid);
  detail::axpy_decay(next.b_hat, b3, 2.0 / 3.0, mu, 0.0, grid);

  detail::finish_state(next.u_hat, grid);
  detail::finish_state(next.b_hat, grid);
  next.t = state.t + dt;
  next.step_index = state.step_index + 1;

  if (!detail::all_finite(next.u_hat) || !detail::all_finite(next.b_hat)) {
    std::ostringstream msg;
    msg << "non-finite state after step " << next.step_index << " (t=" << state.t
        << ", dt=" << dt << ")";
    throw BlowupError(msg.str(), state.t, state.step_index);
  }
  return next;
}

/// Exact diffusion-only evolution over an interval t.
inline SolverState linear_evolve(const SolverState& state, const GridSpec& grid,
                                 const PhysicsParams& params, double t) {
  if (!(t >= 0.0)) {
    throw InvalidArgument("linear_evolve: t must be non-negative");
  }
  SolverState out;
  out.u_hat = detail::decay_combine(state.u_hat, nullptr, 0.0, params.nu, t, grid);
  out.b_hat = detail::decay_combine(state.b_hat, nullptr, 0.0, params.mu_resistivity, t, grid);
  out.t = state.t + t;
  out.step_index = state.step_index;
  return out;
}

struct HealthReport {
  bool pass = true;
  bool finite = true;
  std::optional<ModeIndex> non_finite_mode;
  double divergence_u = 0.0;
  double divergence_b = 0.0;
  double linf_u = 0.0;
  double linf_b = 0.0;
  double outside_mask = 0.0;  ///< largest |coefficient| the dealias mask should have removed
  double mean = 0.0;          ///< |û(0)| + |B̂(0)|
  std::vector<std::string> failures;
};

inline constexpr double kDivergenceTolerance = 1e-12;

inline HealthReport health_check(const SolverState& state, const GridSpec& grid,
                                 const StepControl& control) {
  HealthReport r;
  for (const auto* field : {&state.u_hat, &state.b_hat}) {
    for (std::size_t c = 0; c < 3 && r.finite; ++c) {
      for (std::size_t i = 0; i < grid.n() && r.finite; ++i) {
        for (std::size_t j = 0; j < grid.n() && r.finite; ++j) {
          for (std::size_t l = 0; l < grid.nz(); ++l) {
            const Complex z = (*field)[c][grid.index(i, j, l)];
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
              r.finite = false;
              r.non_finite_mode = grid.mode(i, j, l);
              break;
            }
          }
        }
      }
    }
  }
  if (!r.finite) {
    const ModeIndex m = *r.non_finite_mode;
    r.failures.push_back("non-finite coefficient at mode (" + std::to_string(m.mx) + "," +
                         std::to_string(m.my) + "," + std::to_string(m.mz) + ")");
    r.pass = false;
    return r;
  }
  r.divergence_u = divergence_residual(state.u_hat, grid);
  r.divergence_b = divergence_residual(state.b_hat, grid);
  if (r.divergence_u > kDivergenceTolerance) {
    r.failures.push_back("divergence residual of u = " + std::to_string(r.divergence_u));
  }
  if (r.divergence_b > kDivergenceTolerance) {
    r.failures.push_back("divergence residual of B = " + std::to_string(r.divergence_b));
  }
  r.linf_u = max_magnitude(inverse_transform(state.u_hat, grid));
  r.linf_b = max_magnitude(inverse_transform(state.b_hat, grid));
  if (r.linf_u > control.blowup_threshold || r.linf_b > control.blowup_threshold) {
    r.failures.push_back("L-infinity norm above blow-up threshold");
  }
  for (std::size_t idx = 0; idx < grid.spectral_size(); ++idx) {
    if (!grid.retained(idx)) {
      for (std::size_t c = 0; c < 3; ++c) {
        r.outside_mask = std::max({r.outside_mask, std::abs(state.u_hat[c][idx]),
                                   std::abs(state.b_hat[c][idx])});
      }
    }
  }
  if (r.outside_mask > 0.0) {
    r.failures.push_back("energy outside the dealias mask: " + std::to_string(r.outside_mask));
  }
  for (std::size_t c = 0; c < 3; ++c) {
    r.mean += std::abs(state.u_hat[c][0]) + std::abs(state.b_hat[c][0]);
  }
  if (r.mean > 0.0) {
    r.failures.push_back("non-zero mean mode");
  }
  r.pass = r.failures.empty();
  return r;
}

// ---------------------------------------------------------------------------
// Driver.

struct Schedule {
  double t_end = 0.0;
  double sample_interval = 1.0;
};

struct SampleInfo {
  std::int64_t sample_index = 0;
  double last_dt = 0.0;  ///< 0 for the initial sample
  DtLimiter limiter = DtLimiter::dt_max;
};

using SampleSink = std::function<void(const SolverState&, const SampleInfo&)>;

struct RunResult {
  SolverState state;
  std::vector<std::string> warnings;
  std::int64_t samples_emitted = 0;
};

/// Advances to schedule.t_end.  Steps are shortened so that every multiple of
/// sample_interval is hit exactly; sinks see the state at each of those times.
inline RunResult run(SolverState state, const GridSpec& grid, const PhysicsParams& params,
                     const StepControl& control, const Schedule& schedule,
                     const std::vector<SampleSink>& sinks) {
  params.validate();
  control.validate();
  if (!(schedule.sample_interval > 0.0) || !(schedule.t_end >= state.t)) {
    throw InvalidArgument("schedule needs sample_interval > 0 and t_end >= current time");
  }
  const double h = schedule.sample_interval;
  const double eps = 1e-9 * h;

  RunResult result;
  auto emit = [&](std::int64_t index, double last_dt, DtLimiter lim) {
    SampleInfo info{index, last_dt, lim};
    for (const auto& sink : sinks) {
      sink(state, info);
    }
    ++result.samples_emitted;
  };

  auto k = static_cast<std::int64_t>(std::floor(state.t / h + 1e-9));
  if (std::abs(state.t - static_cast<double>(k) * h) <= eps) {
    emit(k, 0.0, DtLimiter::dt_max);
  }
  double last_dt = 0.0;
  DtLimiter last_lim = DtLimiter::dt_max;
  while (state.t < schedule.t_end - eps) {
    const double next_sample = static_cast<double>(k + 1) * h;
    const bool lands_on_sample = next_sample <= schedule.t_end + eps;
    const double target = lands_on_sample ? next_sample : schedule.t_end;

    while (target - state.t > eps) {
      const DtChoice choice = compute_dt(state, grid, params, control);
      if (choice.max_u > control.blowup_threshold || choice.max_b > control.blowup_threshold) {
        std::ostringstream msg;
        msg << "L-infinity norm exceeded blow-up threshold (|u|max=" << choice.max_u
            << ", |B|max=" << choice.max_b << ") at t=" << state.t;
        throw BlowupError(msg.str(), state.t, state.step_index);
      }
      if (choice.floored) {
        std::ostringstream msg;
        msg << "dt floored at dt_min=" << control.dt_min << " at t=" << state.t;
        result.warnings.push_back(msg.str());
      }
      // Split what is left into equal steps so the last one lands on the target.
      const double remaining = target - state.t;
      const double count = std::max(1.0, std::ceil(remaining / choice.dt * (1.0 - 1e-12)));
      const double dt = remaining / count;
      state = step(state, grid, params, dt);
      if (count == 1.0) {
        state.t = target;
      }
      last_dt = dt;
      last_lim = choice.limiter;
    }
    state.t = target;
    if (lands_on_sample) {
      ++k;
      state.t = static_cast<double>(k) * h;
      emit(k, last_dt, last_lim);
    }
  }
  result.state = std::move(state);
  return result;
}

}  // namespace hallmhd
