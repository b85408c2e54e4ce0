#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/rational.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "hallmhd/core.hpp"
#include "hallmhd/diagnostics.hpp"

namespace hallmhd {

using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

// ---------------------------------------------------------------------------
// Series and power-law fits.

struct DecaySeries {
  std::vector<double> times;
  std::vector<double> values;
  std::string label;
  int m = 0;

  void validate() const {
    if (times.size() != values.size()) {
      throw InvalidArgument("decay series: times and values differ in length");
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (i > 0 && !(times[i] > times[i - 1])) {
        throw InvalidArgument("decay series: times must be strictly increasing");
      }
      if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
        throw InvalidArgument("decay series '" + label + "': values must be positive and finite");
      }
    }
  }
};

/// ‖D^m u‖² + ‖D^m B‖² over a history.
inline DecaySeries derivative_series(const History& h, int m) {
  DecaySeries s;
  s.m = m;
  s.label = m == 0 ? "energy" : "d" + std::to_string(m) + "_sq";
  const auto mi = static_cast<std::size_t>(m);
  for (const auto& r : h) {
    s.times.push_back(r.t);
    s.values.push_back(r.u_dsq.at(mi) + r.b_dsq.at(mi));
  }
  return s;
}

/// Σ_{j≤m} (‖D^j u‖² + ‖D^j B‖²).
inline DecaySeries sobolev_series(const History& h, int m) {
  DecaySeries s;
  s.m = m;
  s.label = "h" + std::to_string(m) + "_sq";
  for (const auto& r : h) {
    double v = 0.0;
    for (int j = 0; j <= m; ++j) {
      v += r.u_dsq.at(static_cast<std::size_t>(j)) + r.b_dsq.at(static_cast<std::size_t>(j));
    }
    s.times.push_back(r.t);
    s.values.push_back(v);
  }
  return s;
}

struct FitOptions {
  std::size_t min_samples = 10;
  double min_span_factor = 4.0;  ///< required ratio (t_b+1)/(t_a+1) of the samples used
};

struct FitResult {
  double exponent = 0.0;
  double prefactor = 0.0;
  double t_a = 0.0;
  double t_b = 0.0;
  double rms_residual = 0.0;
  std::size_t samples = 0;
};

/// Least-squares line through (log(t+1), log value) over samples with t in [t_a, t_b].
inline FitResult fit_power_law(const DecaySeries& series, double t_a, double t_b,
                               FitOptions opts = {}) {
  series.validate();
  if (!(t_b > t_a)) {
    throw InvalidArgument("fit window must satisfy t_a < t_b");
  }
  std::vector<double> x;
  std::vector<double> y;
  double first = 0.0;
  double last = 0.0;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const double t = series.times[i];
    if (t >= t_a - 1e-12 && t <= t_b + 1e-12) {
      if (x.empty()) first = t;
      last = t;
      x.push_back(std::log(t + 1.0));
      y.push_back(std::log(series.values[i]));
    }
  }
  if (x.size() < opts.min_samples) {
    throw InvalidArgument("fit window [" + std::to_string(t_a) + ", " + std::to_string(t_b) +
                          "] holds " + std::to_string(x.size()) + " samples, need " +
                          std::to_string(opts.min_samples));
  }
  const double span = (last + 1.0) / (first + 1.0);
  if (span < opts.min_span_factor * (1.0 - 1e-12)) {
    throw InvalidArgument("fit window spans a factor " + std::to_string(span) +
                          " in (t+1), need " + std::to_string(opts.min_span_factor));
  }
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  FitResult f;
  f.exponent = sxy / sxx;
  const double intercept = my - f.exponent * mx;
  f.prefactor = std::exp(intercept);
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (intercept + f.exponent * x[i]);
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / n);
  f.t_a = first;
  f.t_b = last;
  f.samples = x.size();
  return f;
}

/// Upper end of the fit window on a box of side L: α (L/2π)².
inline double t_valid(double box_length, double alpha = 0.1) {
  if (!(box_length > 0.0) || !(alpha > 0.0)) {
    throw InvalidArgument("t_valid needs positive box length and alpha");
  }
  const double s = box_length / kTwoPi;
  return alpha * s * s;
}

// ---------------------------------------------------------------------------
// Heat-semigroup oracle.

using RadialProfile = std::function<double(double)>;

inline RadialProfile gaussian_profile() {
  return [](double r) { return std::exp(-r * r); };
}

/// 4π ∫₀^∞ r^{2m+2} e^{-2r²t} profile(r) dr, i.e. ∫ |ξ|^{2m} e^{-2|ξ|²t} |û₀|² dξ.
inline double heat_oracle(const RadialProfile& profile, int m, double t, double rel_tol = 1e-10) {
  if (m < 0 || !(t >= 0.0)) {
    throw InvalidArgument("heat_oracle needs m >= 0 and t >= 0");
  }
  auto f = [&](double r) {
    if (r == 0.0) return 0.0;
    const double v = std::pow(r, 2 * m + 2) * std::exp(-2.0 * r * r * t) * profile(r);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, 0.0, std::numeric_limits<double>::infinity(), 20, rel_tol, &error);
  if (!std::isfinite(value) || !(value > 0.0) || error > 1e-8 * value) {
    throw InvalidArgument("heat_oracle: integral does not converge for this profile (value " +
                          std::to_string(value) + ", error " + std::to_string(error) + ")");
  }
  return 4.0 * kPi * value;
}

/// d log I_m / d log(t+1) = -2 (t+1) I_{m+1}(t) / I_m(t), exact for the semigroup.
inline double heat_oracle_slope(const RadialProfile& profile, int m, double t) {
  return -2.0 * (t + 1.0) * heat_oracle(profile, m + 1, t) / heat_oracle(profile, m, t);
}

/// Closed form for the Gaussian profile: 2π Γ(m+3/2) (2t+1)^{-(m+3/2)}.
inline double heat_oracle_gaussian_exact(int m, double t) {
  const double a = m + 1.5;
  return 2.0 * kPi * boost::math::tgamma(a) * std::pow(2.0 * t + 1.0, -a);
}

// ---------------------------------------------------------------------------
// Exponent arithmetic.

/// a_j = (j + 3/2)/(m + 1).
inline Rational gn_exponent_exact(int m, int j) {
  if (m < 2 || j < 1 || 2 * j > m) {
    throw InvalidArgument("gn_exponent needs m >= 2 and 1 <= j <= m/2");
  }
  return Rational(2 * j + 3, 2 * (m + 1));
}

inline double gn_exponent(int m, int j) { return to_double(gn_exponent_exact(m, j)); }

struct RateEntry {
  int j = 0;
  Rational s;      ///< 2μ + (m+1)(m-j)/(m-j-1/2)
  Rational bound;  ///< 2μ + m + 1
  bool holds = false;
};

inline std::vector<RateEntry> rm_rates(int m, const Rational& mu) {
  if (m < 3) {
    throw InvalidArgument("rm_rates needs m >= 3");
  }
  if (mu < Rational(0)) {
    throw InvalidArgument("rm_rates needs mu >= 0");
  }
  std::vector<RateEntry> out;
  for (int j = 1; 2 * j <= m; ++j) {
    RateEntry e;
    e.j = j;
    e.s = Rational(2) * mu + Rational(2 * (m + 1) * (m - j), 2 * m - 2 * j - 1);
    e.bound = Rational(2) * mu + Rational(m + 1);
    e.holds = e.s >= e.bound;
    out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bootstrap step of the higher-order decay argument.

struct ForcingTerm {
  double c = 0.0;  ///< C_i
  double s = 0.0;  ///< s_i
};

struct BootstrapInput {
  Rational rho_prev{0};
  double c_prev = 0.0;
  double c0 = 0.0;
  std::vector<ForcingTerm> forcing;
  double t_star = 0.0;
  /// Y(T*)(T*+1)^{ρ_m}: the weighted size of the quantity at the start time.
  double initial_level = 0.0;
};

struct BootstrapResult {
  Rational rho_m{0};
  double c_m = 0.0;
  double k = 0.0;  ///< 1 + max s_i
};

/// With Y = ‖D^m u‖² + ‖D^m B‖² satisfying
///   Y' + ‖D^{m+1}(u,B)‖² ≤ C₀(t+1)^{-1} Y + Σ C_i (t+1)^{-s_i}
/// and the previous-order bound C_{m-1}(t+1)^{-ρ_{m-1}}, splitting at radius
/// ((C₀+k)/(t+1))^{1/2} gives Y' + k/(t+1) Y ≤ C_{m-1}(C₀+k)²(t+1)^{-2-ρ} + Σ C_i(t+1)^{-s_i};
/// integrating against (t+1)^k yields Y ≤ C_m (t+1)^{-ρ_m} with the constant below.
inline BootstrapResult bootstrap_step(const BootstrapInput& in) {
  if (in.rho_prev < Rational(0)) {
    throw InvalidArgument("bootstrap_step: rho_prev must be non-negative");
  }
  if (!(in.c_prev > 0.0) || !(in.c0 >= 0.0) || !(in.t_star >= 0.0) || !(in.initial_level >= 0.0)) {
    throw InvalidArgument("bootstrap_step: need C_prev > 0, C_0 >= 0, T* >= 0, initial level >= 0");
  }
  const double rho = to_double(in.rho_prev);
  double s_max = rho + 2.0;
  for (const auto& f : in.forcing) {
    if (f.s < rho + 2.0) {
      throw InvalidArgument("bootstrap_step: hypothesis violated, s_i = " + std::to_string(f.s) +
                            " < rho_prev + 2 = " + std::to_string(rho + 2.0));
    }
    if (!(f.c >= 0.0)) {
      throw InvalidArgument("bootstrap_step: forcing constants must be non-negative");
    }
    s_max = std::max(s_max, f.s);
  }
  BootstrapResult r;
  r.rho_m = in.rho_prev + Rational(1);
  r.k = 1.0 + s_max;
  const double ck = in.c0 + r.k;
  r.c_m = in.c_prev * ck * ck / (r.k - 1.0 - rho) + in.initial_level;
  for (const auto& f : in.forcing) {
    r.c_m += f.c / (r.k - f.s + 1.0);
  }
  return r;
}

// ---------------------------------------------------------------------------
// One-sided comparison with the proven rates.

enum class TheoremKind {
  higher_order,  ///< exponent ≤ -(m + 2μ) + tol
  sobolev,       ///< m-independent exponent ≤ -3/2 + tol
};

struct TheoremVerdict {
  bool pass = false;
  double claimed = 0.0;
  double fitted = 0.0;
  double margin = 0.0;  ///< claimed + tolerance - fitted, ≥ 0 on pass
  double tolerance = 0.0;
};

inline TheoremVerdict theorem_check(const FitResult& fit, int m, double decay_mu, double tolerance,
                                    TheoremKind kind = TheoremKind::higher_order) {
  TheoremVerdict v;
  v.claimed = kind == TheoremKind::higher_order ? -(m + 2.0 * decay_mu) : -1.5;
  v.fitted = fit.exponent;
  v.tolerance = tolerance;
  v.margin = v.claimed + tolerance - fit.exponent;
  v.pass = v.margin >= 0.0;
  return v;
}

}  // namespace hallmhd
