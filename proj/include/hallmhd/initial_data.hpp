#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hallmhd/field.hpp"
#include "hallmhd/grid.hpp"
#include "hallmhd/spectral.hpp"

namespace hallmhd {

enum class InitKind { gaussian_blob, projected_gaussian, random_band };

inline const char* to_string(InitKind k) {
  switch (k) {
    case InitKind::gaussian_blob:
      return "gaussian_blob";
    case InitKind::projected_gaussian:
      return "projected_gaussian";
    case InitKind::random_band:
      return "random_band";
  }
  return "?";
}

inline InitKind parse_init_kind(const std::string& s) {
  if (s == "gaussian_blob") return InitKind::gaussian_blob;
  if (s == "projected_gaussian") return InitKind::projected_gaussian;
  if (s == "random_band") return InitKind::random_band;
  throw InvalidArgument("unknown init kind '" + s + "'");
}

struct InitSpec {
  InitKind kind = InitKind::gaussian_blob;
  double amplitude = 1.0;    ///< velocity amplitude
  double b_amplitude = 1.0;  ///< magnetic amplitude
  std::optional<std::array<double, 3>> center;  ///< box centre when empty
  double width = 1.8;
  double band_lo = 1.0;
  double band_hi = 2.0;
  std::uint64_t seed = 42;

  friend bool operator==(const InitSpec&, const InitSpec&) = default;
};

struct InitialFields {
  SpectralVectorField u;
  SpectralVectorField b;
};

/// Potential directions.  u circulates about z, B about the body diagonal, so the
/// two fields are nowhere parallel and every coupling term is active.
inline constexpr std::array<double, 3> kVelocityAxis = {0.0, 0.0, 1.0};
inline const std::array<double, 3> kMagneticAxis = {1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0),
                                                    1.0 / std::sqrt(3.0)};

/// Relative boundary level a localized constructor must reach.
inline constexpr double kLocalizationLevel = 1e-14;

namespace detail {

inline std::array<double, 3> resolve_center(const InitSpec& spec, const GridSpec& grid) {
  if (spec.center) {
    return *spec.center;
  }
  const double c = 0.5 * grid.box_length();
  return {c, c, c};
}

/// Minimal-image displacement from c along one axis.
inline double periodic_offset(double x, double c, double box) {
  double d = std::fmod(x - c, box);
  if (d < -0.5 * box) d += box;
  if (d >= 0.5 * box) d -= box;
  return d;
}

/// exp(-|x-c|²/(2w²)) on the grid, with periodic minimal-image distance.
inline AlignedVector<double> gaussian_envelope(const GridSpec& grid, std::array<double, 3> c,
                                               double width) {
  const std::size_t n = grid.n();
  const double dx = grid.dx();
  const double box = grid.box_length();
  std::vector<double> ax(n), ay(n), az(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = dx * static_cast<double>(i);
    const double ox = periodic_offset(x, c[0], box);
    const double oy = periodic_offset(x, c[1], box);
    const double oz = periodic_offset(x, c[2], box);
    ax[i] = std::exp(-ox * ox / (2.0 * width * width));
    ay[i] = std::exp(-oy * oy / (2.0 * width * width));
    az[i] = std::exp(-oz * oz / (2.0 * width * width));
  }
  AlignedVector<double> g(grid.physical_size());
  std::size_t p = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double gij = ax[i] * ay[j];
      for (std::size_t l = 0; l < n; ++l, ++p) {
        g[p] = gij * az[l];
      }
    }
  }
  return g;
}

inline SpectralVectorField along(const SpectralScalarField& s, const std::array<double, 3>& e,
                                 double scale) {
  SpectralVectorField v;
  for (std::size_t a = 0; a < 3; ++a) {
    v[a] = s;
    for (auto& z : v[a]) {
      z *= scale * e[a];
    }
  }
  return v;
}

inline void finish_initial(SpectralVectorField& v, const GridSpec& grid) {
  v = leray_project(v, grid);
  dealias_in_place(v, grid);
  zero_mean_in_place(v);
}

/// Largest distance-to-face ratio check: the envelope at the nearest face point,
/// including the polynomial factor r/w carried by a curl of the envelope.
inline double analytic_face_level(const GridSpec& grid, std::array<double, 3> c, double width) {
  const double box = grid.box_length();
  double nearest = 0.5 * box;
  for (double ci : c) {
    const double d = std::abs(periodic_offset(0.0, ci, box));
    nearest = std::min(nearest, d);
  }
  const double r = nearest / width;
  return std::max(1.0, r) * std::exp(-0.5 * r * r);
}

/// Copies each stored entry of the self-conjugate planes (l = 0 and l = n/2)
/// onto its partner so the spectrum represents a real field.
inline void enforce_hermitian(SpectralScalarField& s, const GridSpec& grid) {
  const std::size_t n = grid.n();
  for (std::size_t l : {std::size_t{0}, n / 2}) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t pi = (n - i) % n;
        const std::size_t pj = (n - j) % n;
        const std::size_t idx = grid.index(i, j, l);
        const std::size_t pidx = grid.index(pi, pj, l);
        if (idx == pidx) {
          s[idx] = Complex(s[idx].real(), 0.0);
        } else if (idx < pidx) {
          s[pidx] = std::conj(s[idx]);
        }
      }
    }
  }
}

}  // namespace detail

struct BlobOptions {
  bool check_localization = true;
};

/// u₀ = ∇×(a·w·g·ê_u), B₀ = ∇×(b·w·g·ê_B) with g the Gaussian envelope of width w.
/// The curl is taken spectrally so the result is exactly solenoidal.
inline InitialFields gaussian_blob(const GridSpec& grid, const InitSpec& spec,
                                   BlobOptions opts = {}) {
  if (!(spec.width > 0.0)) {
    throw InvalidArgument("gaussian_blob: width must be positive");
  }
  const auto c = detail::resolve_center(spec, grid);
  if (opts.check_localization) {
    const double level = detail::analytic_face_level(grid, c, spec.width);
    if (level > kLocalizationLevel) {
      throw InvalidArgument("gaussian_blob: width " + std::to_string(spec.width) +
                            " is too large for box length " +
                            std::to_string(grid.box_length()) + " (face level " +
                            std::to_string(level) + ")");
    }
  }
  const SpectralScalarField g_hat = forward_scalar(detail::gaussian_envelope(grid, c, spec.width), grid);
  InitialFields out;
  out.u = curl(detail::along(g_hat, kVelocityAxis, spec.amplitude * spec.width), grid);
  out.b = curl(detail::along(g_hat, kMagneticAxis, spec.b_amplitude * spec.width), grid);
  detail::finish_initial(out.u, grid);
  detail::finish_initial(out.b, grid);
  return out;
}

/// u₀ = P(a·g·ê_u), B₀ = P(b·g·ê_B).  Unlike the curl construction, û₀(0) ≠ 0 in
/// the continuum, so the energy decays at the full whole-space rate (t+1)^{-3/2}.
/// The projection leaves |x|^{-3} tails, so these fields are not compactly localized.
inline InitialFields projected_gaussian(const GridSpec& grid, const InitSpec& spec) {
  if (!(spec.width > 0.0)) {
    throw InvalidArgument("projected_gaussian: width must be positive");
  }
  const auto c = detail::resolve_center(spec, grid);
  const SpectralScalarField g_hat = forward_scalar(detail::gaussian_envelope(grid, c, spec.width), grid);
  InitialFields out;
  out.u = detail::along(g_hat, kVelocityAxis, spec.amplitude);
  out.b = detail::along(g_hat, kMagneticAxis, spec.b_amplitude);
  detail::finish_initial(out.u, grid);
  detail::finish_initial(out.b, grid);
  return out;
}

namespace detail {

inline SpectralVectorField random_band_field(const GridSpec& grid, const InitSpec& spec,
                                             std::mt19937_64& rng, double amplitude) {
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralVectorField v(grid);
  std::size_t shell_modes = 0;
  for (std::size_t i = 0; i < grid.n(); ++i) {
    for (std::size_t j = 0; j < grid.n(); ++j) {
      for (std::size_t l = 0; l < grid.nz(); ++l) {
        const std::size_t idx = grid.index(i, j, l);
        const double k = std::sqrt(grid.k2(idx));
        // Draw for every mode so the stream does not depend on the band.
        std::array<Complex, 3> z;
        for (auto& zc : z) {
          const double re = normal(rng);
          const double im = normal(rng);
          zc = Complex(re, im);
        }
        if (grid.retained(idx) && k >= spec.band_lo && k <= spec.band_hi && k > 0.0) {
          for (std::size_t a = 0; a < 3; ++a) {
            v[a][idx] = z[a];
          }
          ++shell_modes;
        }
      }
    }
  }
  if (shell_modes == 0) {
    throw InvalidArgument("random_band: no retained modes in the shell [" +
                          std::to_string(spec.band_lo) + ", " + std::to_string(spec.band_hi) +
                          "]");
  }
  for (auto& comp : v.comp) {
    enforce_hermitian(comp, grid);
  }
  v = leray_project(v, grid);

  const auto c = resolve_center(spec, grid);
  const AlignedVector<double> env = gaussian_envelope(grid, c, spec.width);
  PhysicalVectorField f = inverse_transform(v, grid);
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t p = 0; p < f.size(); ++p) {
      f[a][p] *= env[p];
    }
  }
  SpectralVectorField out = forward_transform(f, grid);
  finish_initial(out, grid);
  const double peak = max_magnitude(inverse_transform(out, grid));
  if (peak > 0.0) {
    out *= amplitude / peak;
  }
  return out;
}

}  // namespace detail

/// Random solenoidal shell k_lo ≤ |k| ≤ k_hi, localized by the Gaussian envelope of
/// the spec width and re-projected.  Scaled so max|u| = amplitude, max|B| = b_amplitude.
inline InitialFields random_band(const GridSpec& grid, const InitSpec& spec) {
  if (!(spec.band_lo >= 0.0) || !(spec.band_hi >= spec.band_lo)) {
    throw InvalidArgument("random_band: need 0 <= band_lo <= band_hi");
  }
  if (!(spec.width > 0.0)) {
    throw InvalidArgument("random_band: envelope width must be positive");
  }
  if (spec.band_lo > grid.dealias_cutoff()) {
    throw InvalidArgument("random_band: band lies above the dealias cutoff");
  }
  std::mt19937_64 rng(spec.seed);
  InitialFields out;
  out.u = detail::random_band_field(grid, spec, rng, spec.amplitude);
  out.b = detail::random_band_field(grid, spec, rng, spec.b_amplitude);
  return out;
}

inline InitialFields make_initial(const GridSpec& grid, const InitSpec& spec) {
  switch (spec.kind) {
    case InitKind::gaussian_blob:
      return gaussian_blob(grid, spec);
    case InitKind::projected_gaussian:
      return projected_gaussian(grid, spec);
    case InitKind::random_band:
      return random_band(grid, spec);
  }
  throw InvalidArgument("unknown init kind");
}

/// Inhomogeneous Sobolev norm ‖f‖_{H^m} = (Σ_{j≤m} ‖D^j f‖²)^{1/2}.
inline double sobolev_norm(const SpectralVectorField& v, const GridSpec& grid, int m) {
  double s = 0.0;
  for (int j = 0; j <= m; ++j) {
    s += seminorm_sq(v, grid, j);
  }
  return std::sqrt(s);
}

/// Multiplies both fields by one scalar so ‖u‖_{H^m} + ‖B‖_{H^m} = target.
inline InitialFields rescale_small(InitialFields fields, const GridSpec& grid, double target, int m) {
  if (!(target > 0.0)) {
    throw InvalidArgument("rescale_small: target must be positive");
  }
  if (m < 0) {
    throw InvalidArgument("rescale_small: m must be non-negative");
  }
  const double current = sobolev_norm(fields.u, grid, m) + sobolev_norm(fields.b, grid, m);
  if (!(current > 0.0)) {
    throw InvalidArgument("rescale_small: cannot rescale zero fields");
  }
  const double s = target / current;
  fields.u *= s;
  fields.b *= s;
  return fields;
}

struct FieldAdmissibility {
  NormBundle norms;
  double divergence = 0.0;
  double boundary_level = 0.0;  ///< max |f| on the faces i=0, j=0, l=0 over max |f|
  double mean = 0.0;            ///< |mean of f| over max |f|
};

struct AdmissibilityThresholds {
  double divergence = 1e-12;
  double boundary = 1e-12;
  double mean = 1e-12;
};

struct AdmissibilityReport {
  FieldAdmissibility u;
  FieldAdmissibility b;
  bool pass = true;
  std::vector<std::string> failures;
};

namespace detail {

inline FieldAdmissibility assess_field(const PhysicalVectorField& f, const GridSpec& grid,
                                       int m_max) {
  FieldAdmissibility a;
  const SpectralVectorField s = forward_transform(f, grid);
  a.norms = norms(f, s, grid, m_max);
  a.divergence = divergence_residual(s, grid);
  const std::size_t n = grid.n();
  double face = 0.0;
  std::array<double, 3> sum{};
  std::size_t p = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t l = 0; l < n; ++l, ++p) {
        for (std::size_t c = 0; c < 3; ++c) {
          sum[c] += f[c][p];
        }
        if (i == 0 || j == 0 || l == 0) {
          face = std::max(face, std::sqrt(f[0][p] * f[0][p] + f[1][p] * f[1][p] + f[2][p] * f[2][p]));
        }
      }
    }
  }
  const double peak = a.norms.linf;
  const double count = static_cast<double>(f.size());
  const double mean = std::sqrt(sum[0] * sum[0] + sum[1] * sum[1] + sum[2] * sum[2]) / count;
  a.boundary_level = peak > 0.0 ? face / peak : 0.0;
  a.mean = peak > 0.0 ? mean / peak : 0.0;
  return a;
}

}  // namespace detail

inline AdmissibilityReport admissibility_report(const PhysicalVectorField& u,
                                                const PhysicalVectorField& b,
                                                const GridSpec& grid, int m_max = 3,
                                                AdmissibilityThresholds th = {}) {
  AdmissibilityReport r;
  r.u = detail::assess_field(u, grid, m_max);
  r.b = detail::assess_field(b, grid, m_max);
  auto judge = [&](const FieldAdmissibility& f, const char* name) {
    if (f.divergence > th.divergence) {
      r.failures.push_back(std::string(name) + ": divergence residual " + std::to_string(f.divergence));
    }
    if (f.boundary_level > th.boundary) {
      r.failures.push_back(std::string(name) + ": boundary level " + std::to_string(f.boundary_level));
    }
    if (f.mean > th.mean) {
      r.failures.push_back(std::string(name) + ": non-zero mean " + std::to_string(f.mean));
    }
    if (!std::isfinite(f.norms.l1) || !std::isfinite(f.norms.l2)) {
      r.failures.push_back(std::string(name) + ": non-finite norms");
    }
  };
  judge(r.u, "u");
  judge(r.b, "B");
  r.pass = r.failures.empty();
  return r;
}

inline AdmissibilityReport admissibility_report(const InitialFields& fields, const GridSpec& grid,
                                                int m_max = 3, AdmissibilityThresholds th = {}) {
  return admissibility_report(inverse_transform(fields.u, grid), inverse_transform(fields.b, grid),
                              grid, m_max, th);
}

struct SpectralSupport {
  double fraction_in_band = 0.0;  ///< energy fraction within [lo - broadening, hi + broadening]
  double k_peak = 0.0;            ///< |k| of the largest shell-averaged energy
  double broadening = 0.0;
};

/// Energy fraction of a field inside a |k| window; used to check that the envelope
/// only broadens a shell spectrum by roughly its inverse width.
inline SpectralSupport spectral_support(const SpectralVectorField& v, const GridSpec& grid,
                                        double lo, double hi, double broadening) {
  SpectralSupport s;
  s.broadening = broadening;
  double inside = 0.0;
  double total = 0.0;
  const double dk = grid.dk();
  std::vector<double> shells(static_cast<std::size_t>(std::sqrt(3.0) * grid.n()) + 2, 0.0);
  for (std::size_t i = 0; i < grid.n(); ++i) {
    for (std::size_t j = 0; j < grid.n(); ++j) {
      for (std::size_t l = 0; l < grid.nz(); ++l) {
        const std::size_t idx = grid.index(i, j, l);
        const double e = grid.hermitian_weight(l) *
                         (std::norm(v[0][idx]) + std::norm(v[1][idx]) + std::norm(v[2][idx]));
        const double k = std::sqrt(grid.k2(idx));
        total += e;
        if (k >= lo - broadening && k <= hi + broadening) {
          inside += e;
        }
        shells[static_cast<std::size_t>(std::lround(k / dk))] += e;
      }
    }
  }
  s.fraction_in_band = total > 0.0 ? inside / total : 0.0;
  const auto peak = std::max_element(shells.begin(), shells.end());
  s.k_peak = dk * static_cast<double>(peak - shells.begin());
  return s;
}

}  // namespace hallmhd
