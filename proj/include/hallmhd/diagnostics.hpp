#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hallmhd/field.hpp"
#include "hallmhd/grid.hpp"
#include "hallmhd/integrator.hpp"
#include "hallmhd/spectral.hpp"

namespace hallmhd {

// ---------------------------------------------------------------------------
// Audit records.

struct AuditReport {
  std::string name;
  std::vector<double> times;
  std::vector<double> lhs;
  std::vector<double> rhs;
  double empirical_constant = 0.0;
  double worst = 0.0;  ///< largest residual (identities) or smallest margin (inequalities)
  double tolerance = 0.0;
  bool pass = true;
  std::vector<std::string> notes;
  nlohmann::json details = nlohmann::json::object();

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["pass"] = pass;
    j["tolerance"] = tolerance;
    j["worst"] = worst;
    j["empirical_constant"] = empirical_constant;
    j["times"] = times;
    j["lhs"] = lhs;
    j["rhs"] = rhs;
    j["notes"] = notes;
    j["details"] = details;
    return j;
  }
};

// ---------------------------------------------------------------------------
// Per-sample records.

struct SplittingRecord {
  double radius = 0.0;        ///< (k_const/(t+1))^{1/2}
  double e_ball = 0.0;        ///< E_S
  double e_total = 0.0;       ///< E
  double dissipation = 0.0;   ///< D
  double slack = 0.0;         ///< (D - r²(E - E_S)) / D, ≥ 0 up to roundoff
  std::int64_t modes_in_ball = 0;
};

struct RecordOptions {
  int m_max = 3;         ///< ‖D^j‖² columns for j = 0..m_max+1
  int linf_order = 0;    ///< ‖D^j‖_{L∞} columns for j = 0..linf_order
  double k_const = 1.5;  ///< splitting-ball constant
  int split_m = 3;       ///< H^m weight used by the splitting record
};

struct SampleRecord {
  double t = 0.0;
  double dt = 0.0;
  std::vector<double> u_dsq;   ///< ‖D^j u‖²
  std::vector<double> b_dsq;
  std::vector<double> u_linf;  ///< ‖D^j u‖_{L∞} (grid maximum)
  std::vector<double> b_linf;
  double u_l1 = 0.0;
  double b_l1 = 0.0;
  SplittingRecord split;

  [[nodiscard]] double energy() const { return u_dsq.at(0) + b_dsq.at(0); }
};

using History = std::vector<SampleRecord>;

/// Grid maximum of |D^j f|, where |D^j f|² sums |∂_{a1}…∂_{aj} f_c|² over ordered
/// index tuples (each multi-index weighted by its multinomial count).
inline double derivative_linf(const SpectralVectorField& v, const GridSpec& grid, int j) {
  if (j < 0) {
    throw InvalidArgument("derivative order must be non-negative");
  }
  if (j == 0) {
    return max_magnitude(inverse_transform(v, grid));
  }
  AlignedVector<double> acc(grid.physical_size(), 0.0);
  std::vector<double> factorial(static_cast<std::size_t>(j) + 1, 1.0);
  for (int p = 1; p <= j; ++p) {
    factorial[static_cast<std::size_t>(p)] = factorial[static_cast<std::size_t>(p) - 1] * p;
  }
  for (int a = 0; a <= j; ++a) {
    for (int b = 0; a + b <= j; ++b) {
      const int c = j - a - b;
      const double mult = factorial[static_cast<std::size_t>(j)] /
                          (factorial[static_cast<std::size_t>(a)] *
                           factorial[static_cast<std::size_t>(b)] *
                           factorial[static_cast<std::size_t>(c)]);
      for (std::size_t comp = 0; comp < 3; ++comp) {
        const AlignedVector<double> d = inverse_scalar(derivative(v[comp], grid, {a, b, c}), grid);
        for (std::size_t p = 0; p < d.size(); ++p) {
          acc[p] += mult * d[p] * d[p];
        }
      }
    }
  }
  return std::sqrt(*std::max_element(acc.begin(), acc.end()));
}

/// Fourier-splitting partition with H^m weights w(k) = Σ_{j≤m} |k|^{2j}.
inline SplittingRecord splitting_ball_energies(const SolverState& state, const GridSpec& grid,
                                               double k_const, int m) {
  if (!(k_const > 0.0)) {
    throw InvalidArgument("splitting constant must be positive");
  }
  SplittingRecord r;
  const double r2 = k_const / (state.t + 1.0);
  r.radius = std::sqrt(r2);
  const std::size_t nz = grid.nz();
  double e_total = 0.0;
  double e_ball = 0.0;
  double diss = 0.0;
  for (std::size_t idx = 0; idx < grid.spectral_size(); ++idx) {
    const double k2 = grid.k2(idx);
    const double herm = grid.hermitian_weight(idx % nz);
    double w = 1.0;
    double kp = 1.0;
    for (int j = 1; j <= m; ++j) {
      kp *= k2;
      w += kp;
    }
    const double amp = herm * w *
                       (std::norm(state.u_hat[0][idx]) + std::norm(state.u_hat[1][idx]) +
                        std::norm(state.u_hat[2][idx]) + std::norm(state.b_hat[0][idx]) +
                        std::norm(state.b_hat[1][idx]) + std::norm(state.b_hat[2][idx]));
    e_total += amp;
    diss += k2 * amp;
    if (k2 <= r2) {
      e_ball += amp;
      r.modes_in_ball += static_cast<std::int64_t>(herm);
    }
  }
  const double dv = grid.mode_volume();
  r.e_total = e_total * dv;
  r.e_ball = e_ball * dv;
  r.dissipation = diss * dv;
  const double gap = r.dissipation - r2 * (r.e_total - r.e_ball);
  r.slack = r.dissipation > 0.0 ? gap / r.dissipation : (gap >= 0.0 ? 0.0 : -1.0);
  return r;
}

inline SampleRecord make_record(const SolverState& state, const GridSpec& grid,
                                const RecordOptions& opts, double dt = 0.0) {
  SampleRecord r;
  r.t = state.t;
  r.dt = dt;
  for (int j = 0; j <= opts.m_max + 1; ++j) {
    r.u_dsq.push_back(seminorm_sq(state.u_hat, grid, j));
    r.b_dsq.push_back(seminorm_sq(state.b_hat, grid, j));
  }
  const PhysicalVectorField u = inverse_transform(state.u_hat, grid);
  const PhysicalVectorField b = inverse_transform(state.b_hat, grid);
  const double dv = grid.cell_volume();
  double lu = 0.0;
  double lb = 0.0;
  double mu = 0.0;
  double mb = 0.0;
  for (std::size_t p = 0; p < u.size(); ++p) {
    const double au = std::sqrt(u[0][p] * u[0][p] + u[1][p] * u[1][p] + u[2][p] * u[2][p]);
    const double ab = std::sqrt(b[0][p] * b[0][p] + b[1][p] * b[1][p] + b[2][p] * b[2][p]);
    lu += au;
    lb += ab;
    mu = std::max(mu, au);
    mb = std::max(mb, ab);
  }
  r.u_l1 = lu * dv;
  r.b_l1 = lb * dv;
  r.u_linf.push_back(mu);
  r.b_linf.push_back(mb);
  for (int j = 1; j <= opts.linf_order; ++j) {
    r.u_linf.push_back(derivative_linf(state.u_hat, grid, j));
    r.b_linf.push_back(derivative_linf(state.b_hat, grid, j));
  }
  r.split = splitting_ball_energies(state, grid, opts.k_const, opts.split_m);
  return r;
}

/// Every stride-th record, starting from the first.
inline History subsample(const History& h, std::size_t stride) {
  if (stride == 0) {
    throw InvalidArgument("subsample stride must be positive");
  }
  History out;
  for (std::size_t i = 0; i < h.size(); i += stride) {
    out.push_back(h[i]);
  }
  return out;
}

namespace detail {

inline void require_uniform(const History& h, std::size_t min_samples, const char* who) {
  if (h.size() < min_samples) {
    throw InvalidArgument(std::string(who) + ": need at least " + std::to_string(min_samples) +
                          " samples, got " + std::to_string(h.size()));
  }
  const double spacing = h[1].t - h[0].t;
  for (std::size_t i = 1; i < h.size(); ++i) {
    const double d = h[i].t - h[i - 1].t;
    if (!(d > 0.0) || std::abs(d - spacing) > 1e-9 * spacing) {
      throw InvalidArgument(std::string(who) + ": samples must be uniformly spaced");
    }
  }
}

inline double sum_orders(const std::vector<double>& v, int lo, int hi) {
  double s = 0.0;
  for (int j = lo; j <= hi; ++j) {
    s += v.at(static_cast<std::size_t>(j));
  }
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Energy identity d/dt E = -2(ν‖∇u‖² + μ‖∇B‖²).

inline AuditReport energy_identity_residual(const History& h, const PhysicsParams& params,
                                            double tolerance = 1e-4) {
  detail::require_uniform(h, 3, "energy_identity_residual");
  AuditReport r;
  r.name = "energy_identity";
  r.tolerance = tolerance;
  const double spacing = h[1].t - h[0].t;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < h.size(); ++i) {
    const double dE = (h[i + 1].energy() - h[i - 1].energy()) / (2.0 * spacing);
    const double rhs = -2.0 * (params.nu * h[i].u_dsq.at(1) + params.mu_resistivity * h[i].b_dsq.at(1));
    const double scale = std::abs(rhs);
    const double res = scale > 0.0 ? std::abs(dE - rhs) / scale : std::abs(dE);
    r.times.push_back(h[i].t);
    r.lhs.push_back(dE);
    r.rhs.push_back(rhs);
    worst = std::max(worst, res);
  }
  r.worst = worst;
  r.pass = worst <= tolerance;
  r.details["sample_interval"] = spacing;
  return r;
}

// ---------------------------------------------------------------------------
// H^m monotonicity: d/dt Σ_{j≤m}(‖D^j u‖²+‖D^j B‖²) ≤ -Σ_{j=1}^{m+1}(ν‖D^j u‖²+μ‖D^j B‖²).

inline AuditReport hm_monotonicity_audit(const History& h, const PhysicsParams& params, int m,
                                         double tolerance = 1e-3) {
  if (m < 0) {
    throw InvalidArgument("hm_monotonicity_audit: m must be non-negative");
  }
  detail::require_uniform(h, 3, "hm_monotonicity_audit");
  AuditReport r;
  r.name = "hm_monotonicity_m" + std::to_string(m);
  r.tolerance = tolerance;
  const double spacing = h[1].t - h[0].t;
  auto level = [&](const SampleRecord& s) {
    return detail::sum_orders(s.u_dsq, 0, m) + detail::sum_orders(s.b_dsq, 0, m);
  };
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < h.size(); ++i) {
    const double dY = (level(h[i + 1]) - level(h[i - 1])) / (2.0 * spacing);
    const double z = params.nu * detail::sum_orders(h[i].u_dsq, 1, m + 1) +
                     params.mu_resistivity * detail::sum_orders(h[i].b_dsq, 1, m + 1);
    r.times.push_back(h[i].t);
    r.lhs.push_back(dY);
    r.rhs.push_back(-z);
    const double margin = z > 0.0 ? (-z - dY) / z : -dY;
    worst = std::min(worst, margin);
    if (margin < -tolerance && !r.details.contains("first_violation")) {
      r.details["first_violation"] = {{"t", h[i].t}, {"lhs", dY}, {"rhs", -z}, {"margin", margin}};
    }
  }
  r.worst = worst;
  r.pass = worst >= -tolerance;
  r.details["margin_definition"] = "(rhs - lhs) / |rhs|";
  return r;
}

// ---------------------------------------------------------------------------
// Fourier amplitude bounds and the low-frequency derivative bound.

struct InitNorms {
  NormBundle u;
  NormBundle b;
};

inline InitNorms init_norms(const SolverState& s, const GridSpec& grid) {
  return {norms(s.u_hat, grid, 0), norms(s.b_hat, grid, 0)};
}

/// Constants a, b of the bound |û| + |B̂| ≤ a + b/|k|.
struct AmplitudeBound {
  double u_const = 0.0;
  double u_inv_k = 0.0;
  double b_const = 0.0;
  double b_inv_k = 0.0;

  [[nodiscard]] double u_at(double k) const { return u_const + u_inv_k / k; }
  [[nodiscard]] double b_at(double k) const { return b_const + b_inv_k / k; }
  /// C with |û| + |B̂| ≤ C (1 + 1/|k|).
  [[nodiscard]] double combined() const {
    return std::max(u_const + b_const, u_inv_k + b_inv_k);
  }
};

/// |û| ≤ (2π)^{-3/2}‖u₀‖₁ + (‖u₀‖² + ‖B₀‖²)/(ν|k|),
/// |B̂| ≤ (2π)^{-3/2}‖B₀‖₁ + 2‖u₀‖‖B₀‖/(μ|k|) + (h/μ)‖B₀‖².
inline AmplitudeBound amplitude_bound(const InitNorms& n0, const PhysicsParams& params) {
  AmplitudeBound c;
  const double nu = params.nu;
  const double mu = params.mu_resistivity;
  c.u_const = kTransformPrefactor * n0.u.l1;
  c.u_inv_k = (n0.u.l2 * n0.u.l2 + n0.b.l2 * n0.b.l2) / nu;
  c.b_const = kTransformPrefactor * n0.b.l1 + params.hall_coefficient / mu * n0.b.l2 * n0.b.l2;
  c.b_inv_k = 2.0 * n0.u.l2 * n0.b.l2 / mu;
  return c;
}

struct FourierBoundSample {
  double t = 0.0;
  double worst_ratio_u = 0.0;  ///< max_k |û| / bound
  double worst_ratio_b = 0.0;
  double c_emp = 0.0;          ///< max_k (|û| + |B̂|) / (1 + 1/|k|)
  ModeIndex worst_mode;
};

inline FourierBoundSample fourier_bound_sample(const SolverState& state, const GridSpec& grid,
                                               const AmplitudeBound& bound) {
  FourierBoundSample s;
  s.t = state.t;
  double worst = -1.0;
  for (std::size_t i = 0; i < grid.n(); ++i) {
    for (std::size_t j = 0; j < grid.n(); ++j) {
      for (std::size_t l = 0; l < grid.nz(); ++l) {
        const std::size_t idx = grid.index(i, j, l);
        if (!grid.retained(idx) || grid.k2(idx) == 0.0) {
          continue;
        }
        const double k = std::sqrt(grid.k2(idx));
        const double au = std::sqrt(std::norm(state.u_hat[0][idx]) + std::norm(state.u_hat[1][idx]) +
                                    std::norm(state.u_hat[2][idx]));
        const double ab = std::sqrt(std::norm(state.b_hat[0][idx]) + std::norm(state.b_hat[1][idx]) +
                                    std::norm(state.b_hat[2][idx]));
        const double bu = bound.u_at(k);
        const double bb = bound.b_at(k);
        const double ru = bu > 0.0 ? au / bu : (au > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        const double rb = bb > 0.0 ? ab / bb : (ab > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        s.worst_ratio_u = std::max(s.worst_ratio_u, ru);
        s.worst_ratio_b = std::max(s.worst_ratio_b, rb);
        if (std::max(ru, rb) > worst) {
          worst = std::max(ru, rb);
          s.worst_mode = grid.mode(i, j, l);
        }
        s.c_emp = std::max(s.c_emp, (au + ab) / (1.0 + 1.0 / k));
      }
    }
  }
  return s;
}

/// Accumulates the amplitude-bound audit over the samples of a run.
class FourierBoundAuditor {
 public:
  FourierBoundAuditor(const InitNorms& n0, const PhysicsParams& params)
      : bound_(amplitude_bound(n0, params)) {}

  void observe(const SolverState& state, const GridSpec& grid) {
    samples_.push_back(fourier_bound_sample(state, grid, bound_));
  }

  [[nodiscard]] const AmplitudeBound& bound() const { return bound_; }
  [[nodiscard]] const std::vector<FourierBoundSample>& samples() const { return samples_; }

  [[nodiscard]] AuditReport report(double tolerance = 0.0) const {
    AuditReport r;
    r.name = "fourier_bound";
    r.tolerance = tolerance;
    std::size_t passed = 0;
    double worst = 0.0;
    for (const auto& s : samples_) {
      const double ratio = std::max(s.worst_ratio_u, s.worst_ratio_b);
      r.times.push_back(s.t);
      r.lhs.push_back(ratio);
      r.rhs.push_back(1.0);
      worst = std::max(worst, ratio);
      r.empirical_constant = std::max(r.empirical_constant, s.c_emp);
      if (ratio <= 1.0 + tolerance) {
        ++passed;
      } else if (!r.details.contains("first_violation")) {
        r.details["first_violation"] = {
            {"t", s.t}, {"ratio", ratio}, {"mode", {s.worst_mode.mx, s.worst_mode.my, s.worst_mode.mz}}};
      }
    }
    r.worst = worst;
    r.pass = passed == samples_.size();
    r.details["samples"] = samples_.size();
    r.details["samples_passed"] = passed;
    r.details["bound"] = {{"u_const", bound_.u_const},
                          {"u_inv_k", bound_.u_inv_k},
                          {"b_const", bound_.b_const},
                          {"b_inv_k", bound_.b_inv_k},
                          {"combined_C", bound_.combined()}};
    r.notes.push_back("lhs is max over resolved k != 0 of |f^(k)| / bound(k)");
    return r;
  }

 private:
  AmplitudeBound bound_;
  std::vector<FourierBoundSample> samples_;
};

struct LowFrequencySample {
  double t = 0.0;
  double value = 0.0;  ///< max_{0<|k|≤1} |k|^j (|û| + |B̂|)
};

inline LowFrequencySample low_frequency_sample(const SolverState& state, const GridSpec& grid, int j) {
  if (j < 1) {
    throw InvalidArgument("low_frequency_derivative_audit: j must be >= 1");
  }
  LowFrequencySample s;
  s.t = state.t;
  for (std::size_t idx = 0; idx < grid.spectral_size(); ++idx) {
    const double k2 = grid.k2(idx);
    if (k2 == 0.0 || k2 > 1.0 || !grid.retained(idx)) {
      continue;
    }
    const double au = std::sqrt(std::norm(state.u_hat[0][idx]) + std::norm(state.u_hat[1][idx]) +
                                std::norm(state.u_hat[2][idx]));
    const double ab = std::sqrt(std::norm(state.b_hat[0][idx]) + std::norm(state.b_hat[1][idx]) +
                                std::norm(state.b_hat[2][idx]));
    s.value = std::max(s.value, std::pow(k2, 0.5 * j) * (au + ab));
  }
  return s;
}

/// |k|^j(|û| + |B̂|) ≤ 2C on 0 < |k| ≤ 1, with C the combined amplitude constant.
class LowFrequencyAuditor {
 public:
  LowFrequencyAuditor(const InitNorms& n0, const PhysicsParams& params, int j)
      : threshold_(2.0 * amplitude_bound(n0, params).combined()), j_(j) {
    if (j < 1) {
      throw InvalidArgument("low_frequency_derivative_audit: j must be >= 1");
    }
  }

  void observe(const SolverState& state, const GridSpec& grid) {
    samples_.push_back(low_frequency_sample(state, grid, j_));
  }

  [[nodiscard]] AuditReport report() const {
    AuditReport r;
    r.name = "low_frequency_j" + std::to_string(j_);
    double worst = 0.0;
    for (const auto& s : samples_) {
      r.times.push_back(s.t);
      r.lhs.push_back(s.value);
      r.rhs.push_back(threshold_);
      worst = std::max(worst, s.value);
    }
    r.empirical_constant = worst;
    r.worst = threshold_ > 0.0 ? worst / threshold_ : 0.0;
    r.pass = worst <= threshold_;
    r.details["threshold"] = threshold_;
    return r;
  }

 private:
  double threshold_;
  int j_;
  std::vector<LowFrequencySample> samples_;
};

// ---------------------------------------------------------------------------
// Splitting-ball partition audit.

inline AuditReport splitting_audit(const History& h, double tolerance = 1e-12) {
  AuditReport r;
  r.name = "splitting_ball";
  r.tolerance = tolerance;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& s : h) {
    r.times.push_back(s.t);
    r.lhs.push_back(s.split.radius * s.split.radius * (s.split.e_total - s.split.e_ball));
    r.rhs.push_back(s.split.dissipation);
    worst = std::min(worst, s.split.slack);
  }
  if (h.empty()) {
    worst = 0.0;
  }
  r.worst = worst;
  r.pass = worst >= -tolerance;
  r.details["modes_in_ball_first"] = h.empty() ? 0 : h.front().split.modes_in_ball;
  return r;
}

// ---------------------------------------------------------------------------
// Duhamel representation at probe wavevectors.

struct DuhamelProbeSample {
  std::array<Complex, 3> u{};
  std::array<Complex, 3> b{};
  std::array<Complex, 6> reynolds_maxwell{};  ///< (u⊗u - B⊗B)^ in symmetric slots
  std::array<Complex, 3> transport{};         ///< (u⊗B - B⊗u)^ slots (0,1), (0,2), (1,2)
  std::array<Complex, 6> maxwell{};           ///< (B⊗B)^
};

/// Stores û, B̂ and the quadratic flux transforms at a few wavevectors.
class DuhamelRecorder {
 public:
  explicit DuhamelRecorder(std::vector<ModeIndex> probes) : probes_(std::move(probes)) {}

  void observe(const SolverState& state, const GridSpec& grid) {
    if (idx_.empty()) {
      for (const auto& m : probes_) {
        std::size_t idx = 0;
        bool conj = false;
        if (!grid.locate(m, idx, conj) || !grid.retained(idx)) {
          throw InvalidArgument("Duhamel probe is not a retained grid mode");
        }
        idx_.push_back(idx);
        conj_.push_back(conj);
      }
    }
    const PhysicalVectorField u = inverse_transform(state.u_hat, grid);
    const PhysicalVectorField b = inverse_transform(state.b_hat, grid);
    std::array<SpectralScalarField, 6> rm;
    std::array<SpectralScalarField, 6> mx;
    std::array<SpectralScalarField, 3> tr;
    AlignedVector<double> buf(grid.physical_size());
    for (std::size_t s = 0; s < 6; ++s) {
      const auto [a, c] = detail::kSymmetricPairs[s];
      for (std::size_t p = 0; p < buf.size(); ++p) buf[p] = u[a][p] * u[c][p] - b[a][p] * b[c][p];
      rm[s] = forward_scalar(buf, grid);
      for (std::size_t p = 0; p < buf.size(); ++p) buf[p] = b[a][p] * b[c][p];
      mx[s] = forward_scalar(buf, grid);
    }
    constexpr std::array<std::pair<std::size_t, std::size_t>, 3> kAnti = {{{0, 1}, {0, 2}, {1, 2}}};
    for (std::size_t s = 0; s < 3; ++s) {
      const auto [a, c] = kAnti[s];
      for (std::size_t p = 0; p < buf.size(); ++p) buf[p] = u[a][p] * b[c][p] - b[a][p] * u[c][p];
      tr[s] = forward_scalar(buf, grid);
    }
    times_.push_back(state.t);
    std::vector<DuhamelProbeSample> row;
    for (std::size_t q = 0; q < idx_.size(); ++q) {
      const std::size_t idx = idx_[q];
      auto pick = [&](Complex z) { return conj_[q] ? std::conj(z) : z; };
      DuhamelProbeSample ps;
      for (std::size_t a = 0; a < 3; ++a) {
        ps.u[a] = pick(state.u_hat[a][idx]);
        ps.b[a] = pick(state.b_hat[a][idx]);
        ps.transport[a] = pick(tr[a][idx]);
      }
      for (std::size_t s = 0; s < 6; ++s) {
        ps.reynolds_maxwell[s] = pick(rm[s][idx]);
        ps.maxwell[s] = pick(mx[s][idx]);
      }
      row.push_back(ps);
    }
    samples_.push_back(std::move(row));
  }

  [[nodiscard]] const std::vector<ModeIndex>& probes() const { return probes_; }
  [[nodiscard]] const std::vector<double>& times() const { return times_; }
  [[nodiscard]] const std::vector<std::vector<DuhamelProbeSample>>& samples() const { return samples_; }

 private:
  std::vector<ModeIndex> probes_;
  std::vector<std::size_t> idx_;
  std::vector<bool> conj_;
  std::vector<double> times_;
  std::vector<std::vector<DuhamelProbeSample>> samples_;
};

struct DuhamelResult {
  ModeIndex mode;
  double residual_u = 0.0;
  double residual_b = 0.0;
  double hall_flux = 0.0;  ///< max over samples of |k × (k·(B⊗B)^)|
  [[nodiscard]] double residual() const { return std::max(residual_u, residual_b); }
};

namespace detail {

using C3 = std::array<Complex, 3>;

inline double norm3(const C3& v) {
  return std::sqrt(std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]));
}

/// (ik·T)_a = Σ_b i k_b T_ba for a symmetric tensor.
inline C3 sym_div(const std::array<double, 3>& k, const std::array<Complex, 6>& t) {
  C3 out{};
  for (std::size_t a = 0; a < 3; ++a) {
    Complex s{};
    for (std::size_t b = 0; b < 3; ++b) {
      s += k[b] * t[sym_slot(a, b)];
    }
    out[a] = Complex{0.0, 1.0} * s;
  }
  return out;
}

inline C3 cross_ik(const std::array<double, 3>& k, const C3& v) {
  const Complex I{0.0, 1.0};
  return {I * (k[1] * v[2] - k[2] * v[1]), I * (k[2] * v[0] - k[0] * v[2]),
          I * (k[0] * v[1] - k[1] * v[0])};
}

}  // namespace detail

struct DuhamelOptions {
  double target_tolerance = 1e-4;  ///< sets the required sample spacing
};

/// Compares û(k,t), B̂(k,t) with e^{-ν|k|²t}û₀ + ∫₀ᵗ e^{-ν|k|²(t-s)} N̂(k,s) ds evaluated by
/// the trapezoid rule over the recorded samples; returns the largest relative mismatch.
inline DuhamelResult duhamel_residual(const DuhamelRecorder& rec, std::size_t probe,
                                      const GridSpec& grid, const PhysicsParams& params,
                                      DuhamelOptions opts = {}) {
  if (probe >= rec.probes().size()) {
    throw InvalidArgument("duhamel_residual: probe index out of range");
  }
  const auto& times = rec.times();
  const ModeIndex m = rec.probes()[probe];
  const double dk = grid.dk();
  const std::array<double, 3> k{dk * m.mx, dk * m.my, dk * m.mz};
  const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
  const double lambda = std::max({params.nu * k2, params.mu_resistivity * k2, 1.0});
  const double required = std::sqrt(12.0 * opts.target_tolerance) / lambda;
  if (times.size() < 2) {
    throw InvalidArgument("duhamel_residual: history needs at least two samples");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] - times[i - 1] > required * (1.0 + 1e-9)) {
      throw InvalidArgument("duhamel_residual: history too sparse (spacing " +
                            std::to_string(times[i] - times[i - 1]) + ", required <= " +
                            std::to_string(required) + ")");
    }
  }

  auto nonlinear = [&](const DuhamelProbeSample& s, detail::C3& nu_out, detail::C3& nb_out,
                       double& hall_mag) {
    detail::C3 f = detail::sym_div(k, s.reynolds_maxwell);
    const Complex kf = k2 > 0.0 ? (k[0] * f[0] + k[1] * f[1] + k[2] * f[2]) / k2 : Complex{};
    for (std::size_t a = 0; a < 3; ++a) {
      nu_out[a] = -(f[a] - k[a] * kf);
    }
    // (ik·W)_a = Σ_b i k_b W_ba with W antisymmetric.
    std::array<std::array<Complex, 3>, 3> w{};
    w[0][1] = s.transport[0];
    w[0][2] = s.transport[1];
    w[1][2] = s.transport[2];
    w[1][0] = -w[0][1];
    w[2][0] = -w[0][2];
    w[2][1] = -w[1][2];
    const detail::C3 hall = detail::cross_ik(k, detail::sym_div(k, s.maxwell));
    hall_mag = detail::norm3(hall);
    for (std::size_t a = 0; a < 3; ++a) {
      Complex d{};
      for (std::size_t b = 0; b < 3; ++b) {
        d += k[b] * w[b][a];
      }
      nb_out[a] = -Complex{0.0, 1.0} * d - params.hall_coefficient * hall[a];
    }
  };

  DuhamelResult res;
  res.mode = m;
  const auto& first = rec.samples()[0][probe];
  detail::C3 iu{}, ib{};
  detail::C3 prev_nu{}, prev_nb{};
  double hm = 0.0;
  nonlinear(first, prev_nu, prev_nb, hm);
  res.hall_flux = hm;
  const double t0 = times[0];
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double h = times[i] - times[i - 1];
    const auto& s = rec.samples()[i][probe];
    detail::C3 nu_i{}, nb_i{};
    nonlinear(s, nu_i, nb_i, hm);
    res.hall_flux = std::max(res.hall_flux, hm);
    const double eu = std::exp(-params.nu * k2 * h);
    const double eb = std::exp(-params.mu_resistivity * k2 * h);
    for (std::size_t a = 0; a < 3; ++a) {
      iu[a] = eu * iu[a] + 0.5 * h * (eu * prev_nu[a] + nu_i[a]);
      ib[a] = eb * ib[a] + 0.5 * h * (eb * prev_nb[a] + nb_i[a]);
    }
    prev_nu = nu_i;
    prev_nb = nb_i;
    const double t = times[i] - t0;
    const double fu = std::exp(-params.nu * k2 * t);
    const double fb = std::exp(-params.mu_resistivity * k2 * t);
    detail::C3 du{}, db{};
    for (std::size_t a = 0; a < 3; ++a) {
      du[a] = fu * first.u[a] + iu[a] - s.u[a];
      db[a] = fb * first.b[a] + ib[a] - s.b[a];
    }
    const double su = detail::norm3(s.u);
    const double sb = detail::norm3(s.b);
    const double ru = su > 0.0 ? detail::norm3(du) / su : detail::norm3(du);
    const double rb = sb > 0.0 ? detail::norm3(db) / sb : detail::norm3(db);
    res.residual_u = std::max(res.residual_u, ru);
    res.residual_b = std::max(res.residual_b, rb);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Differential inequality for ‖D^m u‖² + ‖D^m B‖².

struct Lemma23Terms {
  double lhs = 0.0;
  double bracket = 0.0;
  double remainder = 0.0;  ///< R_m without its constant; zero for m = 1, 2
};

/// Structural terms at one interior sample.  Needs linf columns up to order
/// max(1, (m+1)/2).
inline Lemma23Terms lemma23_terms(const History& h, std::size_t i, const PhysicsParams& params,
                                  int m) {
  const double spacing = h[i + 1].t - h[i - 1].t;
  const auto mi = static_cast<std::size_t>(m);
  const double y_next = h[i + 1].u_dsq.at(mi) + h[i + 1].b_dsq.at(mi);
  const double y_prev = h[i - 1].u_dsq.at(mi) + h[i - 1].b_dsq.at(mi);
  const SampleRecord& s = h[i];
  Lemma23Terms t;
  t.lhs = (y_next - y_prev) / spacing + params.nu * s.u_dsq.at(mi + 1) +
          params.mu_resistivity * s.b_dsq.at(mi + 1);
  const double u_inf = s.u_linf.at(0);
  const double b_inf = s.b_linf.at(0);
  const double gb_inf = s.b_linf.at(1);
  const double du = s.u_dsq.at(mi);
  const double db = s.b_dsq.at(mi);
  t.bracket = u_inf * u_inf * du + b_inf * b_inf * db + b_inf * b_inf * du + u_inf * u_inf * db +
              gb_inf * gb_inf * db;
  if (m >= 3) {
    for (int j = 1; 2 * j <= m; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      const auto mj = static_cast<std::size_t>(m - j);
      const double uj = s.u_linf.at(jj);
      const double bj = s.b_linf.at(jj);
      t.remainder += uj * uj * s.u_dsq.at(mj) + bj * bj * s.b_dsq.at(mj) +
                     bj * bj * s.u_dsq.at(mj) + uj * uj * s.b_dsq.at(mj);
    }
    for (int i2 = 2; 2 * i2 <= m + 1; ++i2) {
      const double bi = s.b_linf.at(static_cast<std::size_t>(i2));
      t.remainder += bi * bi * s.b_dsq.at(static_cast<std::size_t>(m + 1 - i2));
    }
  }
  return t;
}

/// Linf orders lemma23_inequality_audit needs for a given m.
inline int lemma23_linf_order(int m) { return std::max(1, (m + 1) / 2); }

inline AuditReport lemma23_inequality_audit(const History& h, const PhysicsParams& params, int m,
                                            double stability_factor = 3.0) {
  if (m < 1) {
    throw InvalidArgument("lemma23_inequality_audit: m must be >= 1");
  }
  detail::require_uniform(h, 3, "lemma23_inequality_audit");
  const auto need = static_cast<std::size_t>(lemma23_linf_order(m)) + 1;
  if (h.front().u_linf.size() < need || h.front().u_dsq.size() < static_cast<std::size_t>(m) + 2) {
    throw InvalidArgument("lemma23_inequality_audit: history lacks the required norm columns");
  }
  AuditReport r;
  r.name = "lemma23_m" + std::to_string(m);
  r.tolerance = stability_factor;
  std::vector<double> ratios;
  bool infinite = false;
  for (std::size_t i = 1; i + 1 < h.size(); ++i) {
    const Lemma23Terms t = lemma23_terms(h, i, params, m);
    const double den = t.bracket + t.remainder;
    double ratio = 0.0;
    if (t.lhs > 0.0) {
      if (den > 0.0) {
        ratio = t.lhs / den;
      } else {
        infinite = true;
        ratio = std::numeric_limits<double>::infinity();
      }
    }
    r.times.push_back(h[i].t);
    r.lhs.push_back(t.lhs);
    r.rhs.push_back(den);
    ratios.push_back(ratio);
  }
  const std::size_t half = ratios.size() / 2;
  const double c_first = ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.begin() + static_cast<std::ptrdiff_t>(std::max<std::size_t>(half, 1)));
  const double c_second = ratios.empty() ? 0.0 : *std::max_element(ratios.begin() + static_cast<std::ptrdiff_t>(half), ratios.end());
  r.empirical_constant = std::max(c_first, c_second);
  bool stable = true;
  if (c_first > 0.0 && c_second > 0.0) {
    stable = std::max(c_first, c_second) / std::min(c_first, c_second) < stability_factor;
  }
  r.pass = !infinite && std::isfinite(r.empirical_constant) && stable;
  r.worst = (c_first > 0.0 && c_second > 0.0) ? std::max(c_first, c_second) / std::min(c_first, c_second) : 1.0;
  r.details["c_first_half"] = c_first;
  r.details["c_second_half"] = c_second;
  r.details["remainder_active"] = m >= 3;
  r.notes.push_back("L-infinity norms are grid maxima, lower bounds of the true supremum");
  return r;
}

}  // namespace hallmhd
