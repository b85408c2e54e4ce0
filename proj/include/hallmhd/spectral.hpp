#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "hallmhd/core.hpp"
#include "hallmhd/field.hpp"
#include "hallmhd/grid.hpp"

namespace hallmhd {

inline constexpr double kHermitianTolerance = 1e-12;

// ---------------------------------------------------------------------------
// Transforms.  û(k) = (2π)^{-3/2} Σ_x f(x) e^{-ik·x} Δx³, so that
// Σ_x |f|² Δx³ = Σ_k |û|² Δk³ holds exactly.

inline void check_finite(const AlignedVector<double>& f, const GridSpec& grid,
                         const std::string& what) {
  const std::size_t n = grid.n();
  for (std::size_t p = 0; p < f.size(); ++p) {
    if (!std::isfinite(f[p])) {
      const std::size_t l = p % n;
      const std::size_t j = (p / n) % n;
      const std::size_t i = p / (n * n);
      throw NonFiniteError(what + ": non-finite value at grid point (" + std::to_string(i) +
                               "," + std::to_string(j) + "," + std::to_string(l) + ")",
                           {i, j, l});
    }
  }
}

inline SpectralScalarField forward_scalar(const AlignedVector<double>& f, const GridSpec& grid) {
  SpectralScalarField out(grid.spectral_size());
  grid.fft().forward(f.data(), out.data());
  const double scale = kTransformPrefactor * grid.cell_volume();
  for (auto& v : out) {
    v *= scale;
  }
  return out;
}

/// Largest violation of û(-k) = conj(û(k)) on the self-conjugate planes
/// (l = 0 and l = n/2), relative to the largest coefficient magnitude.
struct AsymmetryReport {
  double relative = 0.0;
  ModeIndex worst{};
};

inline AsymmetryReport hermitian_asymmetry(const SpectralScalarField& s, const GridSpec& grid) {
  const std::size_t n = grid.n();
  double scale = 0.0;
  for (const auto& v : s) {
    scale = std::max(scale, std::abs(v));
  }
  AsymmetryReport report;
  if (scale == 0.0) {
    return report;
  }
  double worst = 0.0;
  for (const std::size_t l : {std::size_t{0}, n / 2}) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t ci = (n - i) % n;
        const std::size_t cj = (n - j) % n;
        const double d = std::abs(s[grid.index(i, j, l)] - std::conj(s[grid.index(ci, cj, l)]));
        if (d > worst) {
          worst = d;
          report.worst = grid.mode(i, j, l);
        }
      }
    }
  }
  report.relative = worst / scale;
  return report;
}

inline AlignedVector<double> inverse_scalar(const SpectralScalarField& s, const GridSpec& grid,
                                            double tolerance = kHermitianTolerance) {
  const AsymmetryReport asym = hermitian_asymmetry(s, grid);
  if (asym.relative > tolerance) {
    throw SymmetryError("spectrum is not Hermitian: relative asymmetry " +
                            std::to_string(asym.relative) + " at mode (" +
                            std::to_string(asym.worst.mx) + "," + std::to_string(asym.worst.my) +
                            "," + std::to_string(asym.worst.mz) + ")",
                        {asym.worst.mx, asym.worst.my, asym.worst.mz}, asym.relative);
  }
  AlignedVector<double> out(grid.physical_size());
  grid.fft().backward(s.data(), out.data());
  const double scale = kTransformPrefactor * grid.mode_volume();
  for (auto& v : out) {
    v *= scale;
  }
  return out;
}

inline SpectralVectorField forward_transform(const PhysicalVectorField& f, const GridSpec& grid) {
  SpectralVectorField out;
  for (std::size_t a = 0; a < 3; ++a) {
    check_finite(f[a], grid, "forward_transform");
    out[a] = forward_scalar(f[a], grid);
  }
  return out;
}

inline PhysicalVectorField inverse_transform(const SpectralVectorField& s, const GridSpec& grid) {
  PhysicalVectorField out;
  for (std::size_t a = 0; a < 3; ++a) {
    out[a] = inverse_scalar(s[a], grid);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Differential operators (exact spectral multipliers).

namespace detail {

template <class Fn>
void for_each_mode(const GridSpec& grid, Fn&& fn) {
  const std::size_t n = grid.n();
  const std::size_t nz = grid.nz();
  for (std::size_t i = 0; i < n; ++i) {
    const double kx = grid.kd_x(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double ky = grid.kd_y(j);
      std::size_t idx = grid.index(i, j, 0);
      for (std::size_t l = 0; l < nz; ++l, ++idx) {
        fn(idx, kx, ky, grid.kd_z(l), l);
      }
    }
  }
}

}  // namespace detail

/// Multiplies a scalar spectrum by (ik)^α for the multi-index α.
inline SpectralScalarField derivative(const SpectralScalarField& s, const GridSpec& grid,
                                      std::array<int, 3> alpha) {
  SpectralScalarField out(s.size());
  const int order = alpha[0] + alpha[1] + alpha[2];
  Complex i_pow{1.0, 0.0};
  for (int p = 0; p < order; ++p) {
    i_pow *= Complex{0.0, 1.0};
  }
  detail::for_each_mode(grid, [&](std::size_t idx, double kx, double ky, double kz, std::size_t) {
    const double mult = std::pow(kx, alpha[0]) * std::pow(ky, alpha[1]) * std::pow(kz, alpha[2]);
    out[idx] = i_pow * mult * s[idx];
  });
  return out;
}

inline SpectralVectorField gradient(const SpectralScalarField& s, const GridSpec& grid) {
  SpectralVectorField out(grid);
  detail::for_each_mode(grid, [&](std::size_t idx, double kx, double ky, double kz, std::size_t) {
    const Complex is = Complex{0.0, 1.0} * s[idx];
    out[0][idx] = kx * is;
    out[1][idx] = ky * is;
    out[2][idx] = kz * is;
  });
  return out;
}

inline SpectralScalarField divergence(const SpectralVectorField& v, const GridSpec& grid) {
  SpectralScalarField out(grid.spectral_size());
  detail::for_each_mode(grid, [&](std::size_t idx, double kx, double ky, double kz, std::size_t) {
    out[idx] = Complex{0.0, 1.0} * (kx * v[0][idx] + ky * v[1][idx] + kz * v[2][idx]);
  });
  return out;
}

inline SpectralVectorField curl(const SpectralVectorField& v, const GridSpec& grid) {
  SpectralVectorField out(grid);
  const Complex I{0.0, 1.0};
  detail::for_each_mode(grid, [&](std::size_t idx, double kx, double ky, double kz, std::size_t) {
    const Complex a = v[0][idx];
    const Complex b = v[1][idx];
    const Complex c = v[2][idx];
    out[0][idx] = I * (ky * c - kz * b);
    out[1][idx] = I * (kz * a - kx * c);
    out[2][idx] = I * (kx * b - ky * a);
  });
  return out;
}

inline SpectralVectorField laplacian(const SpectralVectorField& v, const GridSpec& grid) {
  SpectralVectorField out(grid);
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t idx = 0; idx < v.size(); ++idx) {
      out[a][idx] = -grid.k2(idx) * v[a][idx];
    }
  }
  return out;
}

/// |k|^m multiplier; realizes the homogeneous seminorm ‖D^m f‖ by Parseval.
inline SpectralVectorField k_power(const SpectralVectorField& v, const GridSpec& grid, double m) {
  SpectralVectorField out(grid);
  for (std::size_t idx = 0; idx < v.size(); ++idx) {
    const double mult = (m == 0.0) ? 1.0 : std::pow(grid.k2(idx), 0.5 * m);
    for (std::size_t a = 0; a < 3; ++a) {
      out[a][idx] = mult * v[a][idx];
    }
  }
  return out;
}

/// Leray projector P = I - k k^T/|k|²; the k = 0 entry is left untouched.
inline SpectralVectorField leray_project(const SpectralVectorField& v, const GridSpec& grid) {
  SpectralVectorField out = v;
  detail::for_each_mode(grid, [&](std::size_t idx, double kx, double ky, double kz, std::size_t) {
    const double kk = kx * kx + ky * ky + kz * kz;
    if (kk == 0.0) {
      return;
    }
    const Complex kv = (kx * v[0][idx] + ky * v[1][idx] + kz * v[2][idx]) / kk;
    out[0][idx] = v[0][idx] - kx * kv;
    out[1][idx] = v[1][idx] - ky * kv;
    out[2][idx] = v[2][idx] - kz * kv;
  });
  return out;
}

inline void dealias_in_place(SpectralVectorField& v, const GridSpec& grid) {
  for (std::size_t idx = 0; idx < v.size(); ++idx) {
    if (!grid.retained(idx)) {
      v[0][idx] = v[1][idx] = v[2][idx] = Complex{};
    }
  }
}

inline SpectralVectorField dealias(SpectralVectorField v, const GridSpec& grid) {
  dealias_in_place(v, grid);
  return v;
}

inline void zero_mean_in_place(SpectralVectorField& v) {
  for (auto& c : v.comp) {
    c[0] = Complex{};
  }
}

// ---------------------------------------------------------------------------
// Norms.

/// Σ_k w |û|² Δk³ with optional |k|^{2m} weight: ‖D^m f‖²_{L²}.
inline double seminorm_sq(const SpectralVectorField& v, const GridSpec& grid, int m) {
  const std::size_t nz = grid.nz();
  double sum = 0.0;
  for (std::size_t idx = 0; idx < v.size(); ++idx) {
    const double w = grid.hermitian_weight(idx % nz);
    double amp = std::norm(v[0][idx]) + std::norm(v[1][idx]) + std::norm(v[2][idx]);
    if (m > 0) {
      amp *= std::pow(grid.k2(idx), m);
    }
    sum += w * amp;
  }
  return sum * grid.mode_volume();
}

/// Real spectral inner product ⟨a, b⟩ = Σ_k Re(a·conj b) Δk³ (equals ∫ a·b dx).
inline double inner_product(const SpectralVectorField& a, const SpectralVectorField& b,
                            const GridSpec& grid) {
  const std::size_t nz = grid.nz();
  double sum = 0.0;
  for (std::size_t idx = 0; idx < a.size(); ++idx) {
    const double w = grid.hermitian_weight(idx % nz);
    double s = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      s += (a[c][idx] * std::conj(b[c][idx])).real();
    }
    sum += w * s;
  }
  return sum * grid.mode_volume();
}

/// Pointwise Euclidean magnitude |f(x)|.
inline AlignedVector<double> magnitude(const PhysicalVectorField& f) {
  AlignedVector<double> out(f.size());
  for (std::size_t p = 0; p < f.size(); ++p) {
    out[p] = std::sqrt(f[0][p] * f[0][p] + f[1][p] * f[1][p] + f[2][p] * f[2][p]);
  }
  return out;
}

inline double max_magnitude(const PhysicalVectorField& f) {
  double m = 0.0;
  for (std::size_t p = 0; p < f.size(); ++p) {
    m = std::max(m, std::sqrt(f[0][p] * f[0][p] + f[1][p] * f[1][p] + f[2][p] * f[2][p]));
  }
  return m;
}

struct NormBundle {
  double l1 = 0.0;
  double l2 = 0.0;           ///< via Parseval
  double l2_physical = 0.0;  ///< via Riemann sum
  double linf = 0.0;
  std::vector<double> hm;    ///< hm[m] = ‖D^m f‖_{L²}, hm[0] == l2
};

inline NormBundle norms(const PhysicalVectorField& f, const SpectralVectorField& s,
                        const GridSpec& grid, int m_max) {
  if (m_max < 0) {
    throw InvalidArgument("m_max must be non-negative");
  }
  NormBundle nb;
  const double dv = grid.cell_volume();
  double l1 = 0.0;
  double l2 = 0.0;
  for (std::size_t p = 0; p < f.size(); ++p) {
    const double sq = f[0][p] * f[0][p] + f[1][p] * f[1][p] + f[2][p] * f[2][p];
    l1 += std::sqrt(sq);
    l2 += sq;
    nb.linf = std::max(nb.linf, std::sqrt(sq));
  }
  nb.l1 = l1 * dv;
  nb.l2_physical = std::sqrt(l2 * dv);
  nb.hm.resize(static_cast<std::size_t>(m_max) + 1);
  for (int m = 0; m <= m_max; ++m) {
    nb.hm[static_cast<std::size_t>(m)] = std::sqrt(seminorm_sq(s, grid, m));
  }
  nb.l2 = nb.hm[0];
  return nb;
}

inline NormBundle norms(const PhysicalVectorField& f, const GridSpec& grid, int m_max) {
  return norms(f, forward_transform(f, grid), grid, m_max);
}

inline NormBundle norms(const SpectralVectorField& s, const GridSpec& grid, int m_max) {
  return norms(inverse_transform(s, grid), s, grid, m_max);
}

/// Euclidean magnitude of the 3-component coefficient at an on-grid wavevector.
inline double fourier_amplitude(const SpectralVectorField& s, const GridSpec& grid, ModeIndex k) {
  std::size_t idx = 0;
  bool conj = false;
  if (!grid.locate(k, idx, conj)) {
    throw InvalidArgument("wavevector (" + std::to_string(k.mx) + "," + std::to_string(k.my) +
                          "," + std::to_string(k.mz) + ") is not on the grid");
  }
  return std::sqrt(std::norm(s[0][idx]) + std::norm(s[1][idx]) + std::norm(s[2][idx]));
}

/// Relative divergence residual ‖k·û‖ / ‖k‖‖û‖ in the Parseval norm.
inline double divergence_residual(const SpectralVectorField& v, const GridSpec& grid) {
  double num = 0.0;
  double den = 0.0;
  detail::for_each_mode(grid, [&](std::size_t idx, double kx, double ky, double kz, std::size_t l) {
    const double w = grid.hermitian_weight(l);
    num += w * std::norm(kx * v[0][idx] + ky * v[1][idx] + kz * v[2][idx]);
    den += w * (kx * kx + ky * ky + kz * kz) *
           (std::norm(v[0][idx]) + std::norm(v[1][idx]) + std::norm(v[2][idx]));
  });
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

}  // namespace hallmhd
