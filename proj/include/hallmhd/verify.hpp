#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hallmhd/diagnostics.hpp"
#include "hallmhd/dynamics.hpp"
#include "hallmhd/integrator.hpp"
#include "hallmhd/spectral.hpp"

namespace hallmhd {

namespace detail {

inline AuditReport identity_report(const std::string& name, double residual, double tolerance) {
  AuditReport r;
  r.name = name;
  r.worst = residual;
  r.tolerance = tolerance;
  r.pass = std::isfinite(residual) && residual <= tolerance;
  return r;
}

inline double spectral_max(const SpectralVectorField& v) {
  double m = 0.0;
  for (const auto& c : v.comp) {
    for (const auto& z : c) m = std::max(m, std::abs(z));
  }
  return m;
}

inline double scalar_max(const SpectralScalarField& s) {
  double m = 0.0;
  for (const auto& z : s) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace detail

/// |⟨hall_term(B), B⟩| / (‖∇×B‖ ‖B‖ max|B|).
inline double hall_energy_neutrality(const SpectralVectorField& b, const GridSpec& grid) {
  const double scale = std::sqrt(seminorm_sq(curl(b, grid), grid, 0)) *
                       std::sqrt(seminorm_sq(b, grid, 0)) * max_magnitude(inverse_transform(b, grid));
  if (scale == 0.0) return 0.0;
  return std::abs(inner_product(hall_term(b, grid), b, grid)) / scale;
}

/// |⟨N_u, u⟩ + ⟨N_B(h=0), B⟩| relative to the size of the individual terms.
inline double transport_energy_neutrality(const SpectralVectorField& u, const SpectralVectorField& b,
                                          const GridSpec& grid) {
  const double a = inner_product(momentum_nonlinear(u, b, grid), u, grid);
  const double c = inner_product(induction_nonlinear(u, b, 0.0, grid), b, grid);
  const double gu = std::sqrt(seminorm_sq(u, grid, 1));
  const double gb = std::sqrt(seminorm_sq(b, grid, 1));
  const double lu = std::sqrt(seminorm_sq(u, grid, 0));
  const double lb = std::sqrt(seminorm_sq(b, grid, 0));
  const double mx = std::max(max_magnitude(inverse_transform(u, grid)),
                             max_magnitude(inverse_transform(b, grid)));
  const double scale = (gu + gb) * (lu + lb) * mx;
  return scale > 0.0 ? std::abs(a + c) / scale : 0.0;
}

/// Runs the operator and dynamics identity suite on a state.
inline std::vector<AuditReport> verify_state(const SolverState& s, const GridSpec& grid,
                                             const PhysicsParams& params,
                                             const StepControl& control) {
  std::vector<AuditReport> out;
  const auto& u = s.u_hat;
  const auto& b = s.b_hat;
  const double su = std::max(detail::spectral_max(u), 1e-300);

  {
    const SpectralVectorField back = forward_transform(inverse_transform(u, grid), grid);
    out.push_back(detail::identity_report("round_trip", detail::spectral_max(back - u) / su, 1e-13));
  }
  {
    const NormBundle nb = norms(u, grid, 0);
    const double r = nb.l2 > 0.0 ? std::abs(nb.l2 - nb.l2_physical) / nb.l2 : 0.0;
    out.push_back(detail::identity_report("parseval", r, 1e-12));
  }
  {
    const SpectralVectorField c = curl(u, grid);
    const double scale = std::max(detail::spectral_max(c), 1e-300);
    out.push_back(detail::identity_report(
        "div_curl", detail::scalar_max(divergence(c, grid)) / (scale * grid.dealias_cutoff()), 1e-13));
  }
  {
    const SpectralVectorField g = gradient(u[0], grid);
    const double scale = std::max(detail::spectral_max(g), 1e-300);
    out.push_back(detail::identity_report(
        "curl_grad", detail::spectral_max(curl(g, grid)) / (scale * grid.dealias_cutoff()), 1e-13));
  }
  {
    const SpectralVectorField p1 = leray_project(u, grid);
    const SpectralVectorField p2 = leray_project(p1, grid);
    out.push_back(detail::identity_report("leray_idempotent", detail::spectral_max(p2 - p1) / su, 1e-12));
  }
  out.push_back(detail::identity_report("hall_energy_neutrality", hall_energy_neutrality(b, grid), 1e-10));
  out.push_back(detail::identity_report("transport_energy_neutrality",
                                        transport_energy_neutrality(u, b, grid), 1e-9));
  out.push_back(detail::identity_report(
      "cross_validate_forms", cross_validate_forms(u, b, params.hall_coefficient, grid), 1e-10));
  {
    const SpectralVectorField with = induction_nonlinear(u, b, params.hall_coefficient, grid);
    const SpectralVectorField without = induction_nonlinear(u, b, 0.0, grid);
    SpectralVectorField expect = without;
    SpectralVectorField h = hall_term(b, grid);
    h *= -params.hall_coefficient;
    expect += h;
    const double scale = std::max(detail::spectral_max(with), 1e-300);
    out.push_back(detail::identity_report("hall_linearity", detail::spectral_max(with - expect) / scale, 1e-11));
  }
  {
    PhysicsParams lin = params;
    lin.nonlinear = false;
    StepControl ctl = control;
    const double horizon = 1.0;
    RunResult rr = run(s, grid, lin, ctl, Schedule{s.t + horizon, horizon}, {});
    const SolverState exact = linear_evolve(s, grid, lin, horizon);
    double worst = 0.0;
    for (const auto* pair : {&rr.state.u_hat, &rr.state.b_hat}) {
      const auto& ref = pair == &rr.state.u_hat ? exact.u_hat : exact.b_hat;
      for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t idx = 0; idx < ref[c].size(); ++idx) {
          const double mag = std::abs(ref[c][idx]);
          if (mag > 0.0) worst = std::max(worst, std::abs((*pair)[c][idx] - ref[c][idx]) / mag);
        }
      }
    }
    out.push_back(detail::identity_report("linear_oracle", worst, 1e-12));
  }
  {
    const HealthReport h = health_check(s, grid, control);
    AuditReport r = detail::identity_report("health", h.pass ? 0.0 : 1.0, 0.0);
    r.details["divergence_u"] = h.divergence_u;
    r.details["divergence_b"] = h.divergence_b;
    r.details["failures"] = h.failures;
    out.push_back(r);
  }
  {
    FourierBoundAuditor aud(init_norms(s, grid), params);
    aud.observe(s, grid);
    out.push_back(aud.report());
  }
  return out;
}

}  // namespace hallmhd
