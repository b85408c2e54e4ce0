#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "hallmhd/field.hpp"
#include "hallmhd/grid.hpp"
#include "hallmhd/spectral.hpp"

namespace hallmhd {

/// Nonlinear tendencies (diffusion excluded) of the momentum and induction equations.
struct RhsPair {
  SpectralVectorField du;
  SpectralVectorField dB;
};

/// Which algebraic arrangement of the nonlinear terms is assembled.
enum class RhsForm {
  divergence,  ///< -P∇·(u⊗u - B⊗B), -∇·(u⊗B - B⊗u) - h ∇×∇·(B⊗B)
  primitive,   ///< P[-(u·∇)u + (∇×B)×B], ∇×(u×B) - h ∇×((∇×B)×B)
};

namespace detail {

inline constexpr std::array<std::pair<std::size_t, std::size_t>, 6> kSymmetricPairs = {
    {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};

inline std::size_t sym_slot(std::size_t a, std::size_t b) {
  if (a > b) {
    std::swap(a, b);
  }
  // (0,0)=0 (0,1)=1 (0,2)=2 (1,1)=3 (1,2)=4 (2,2)=5
  return a == 0 ? b : (a == 1 ? 2 + b : 5);
}

inline PhysicalVectorField checked_physical(const SpectralVectorField& s, const GridSpec& grid,
                                            const char* what) {
  PhysicalVectorField f = inverse_transform(s, grid);
  for (std::size_t a = 0; a < 3; ++a) {
    check_finite(f[a], grid, what);
  }
  return f;
}

/// out_a = Σ_b i k_b T̂_ba for a symmetric tensor stored in six slots.
inline SpectralVectorField symmetric_tensor_divergence(const std::array<SpectralScalarField, 6>& t,
                                                       const GridSpec& grid) {
  SpectralVectorField out(grid);
  const Complex I{0.0, 1.0};
  for_each_mode(grid, [&](std::size_t idx, double kx, double ky, double kz, std::size_t) {
    const std::array<double, 3> k{kx, ky, kz};
    for (std::size_t a = 0; a < 3; ++a) {
      Complex s{};
      for (std::size_t b = 0; b < 3; ++b) {
        s += k[b] * t[sym_slot(a, b)][idx];
      }
      out[a][idx] = I * s;
    }
  });
  return out;
}

/// Forward transforms of the six independent entries of f⊗f, less g⊗g when g is given.
inline std::array<SpectralScalarField, 6> symmetric_products(const PhysicalVectorField& f,
                                                            const PhysicalVectorField* g,
                                                            const GridSpec& grid) {
  std::array<SpectralScalarField, 6> out;
  AlignedVector<double> prod(grid.physical_size());
  for (std::size_t s = 0; s < 6; ++s) {
    const auto [a, b] = kSymmetricPairs[s];
    for (std::size_t p = 0; p < prod.size(); ++p) {
      prod[p] = f[a][p] * f[b][p];
      if (g != nullptr) {
        prod[p] -= (*g)[a][p] * (*g)[b][p];
      }
    }
    out[s] = forward_scalar(prod, grid);
  }
  return out;
}

/// Spectrum of the pointwise cross product f × g.
inline SpectralVectorField cross_product(const PhysicalVectorField& f, const PhysicalVectorField& g,
                                         const GridSpec& grid) {
  PhysicalVectorField c(grid);
  for (std::size_t p = 0; p < f.size(); ++p) {
    c[0][p] = f[1][p] * g[2][p] - f[2][p] * g[1][p];
    c[1][p] = f[2][p] * g[0][p] - f[0][p] * g[2][p];
    c[2][p] = f[0][p] * g[1][p] - f[1][p] * g[0][p];
  }
  return forward_transform(c, grid);
}

inline void finish_tendency(SpectralVectorField& v, const GridSpec& grid) {
  dealias_in_place(v, grid);
  zero_mean_in_place(v);
}

inline SpectralVectorField momentum_from_physical(const PhysicalVectorField& u,
                                                  const PhysicalVectorField& b,
                                                  const GridSpec& grid) {
  const auto t = symmetric_products(u, &b, grid);
  SpectralVectorField div = symmetric_tensor_divergence(t, grid);
  div *= -1.0;
  SpectralVectorField out = leray_project(div, grid);
  finish_tendency(out, grid);
  return out;
}

/// -∇·(u⊗B - B⊗u) using the three independent entries of the antisymmetric flux.
inline SpectralVectorField transport_induction_from_physical(const PhysicalVectorField& u,
                                                             const PhysicalVectorField& b,
                                                             const GridSpec& grid) {
  // W_ab = u_a B_b - B_a u_b stored as W01, W02, W12.
  constexpr std::array<std::pair<std::size_t, std::size_t>, 3> pairs = {{{0, 1}, {0, 2}, {1, 2}}};
  std::array<SpectralScalarField, 3> w;
  AlignedVector<double> prod(grid.physical_size());
  for (std::size_t s = 0; s < 3; ++s) {
    const auto [a, c] = pairs[s];
    for (std::size_t p = 0; p < prod.size(); ++p) {
      prod[p] = u[a][p] * b[c][p] - b[a][p] * u[c][p];
    }
    w[s] = forward_scalar(prod, grid);
  }
  auto entry = [&](std::size_t a, std::size_t c, std::size_t idx) -> Complex {
    if (a == c) {
      return {};
    }
    if (a < c) {
      return w[a == 0 ? (c == 1 ? 0 : 1) : 2][idx];
    }
    return -w[c == 0 ? (a == 1 ? 0 : 1) : 2][idx];
  };
  SpectralVectorField out(grid);
  const Complex I{0.0, 1.0};
  for_each_mode(grid, [&](std::size_t idx, double kx, double ky, double kz, std::size_t) {
    const std::array<double, 3> k{kx, ky, kz};
    for (std::size_t a = 0; a < 3; ++a) {
      // (∇·(u⊗B - B⊗u))_a = Σ_b ∂_b (u_b B_a - B_b u_a) = Σ_b ∂_b W_ba
      Complex s{};
      for (std::size_t c = 0; c < 3; ++c) {
        s += k[c] * entry(c, a, idx);
      }
      out[a][idx] = -I * s;
    }
  });
  finish_tendency(out, grid);
  return out;
}

/// ∇×{∇·(B⊗B)}.
inline SpectralVectorField hall_divergence_form(const PhysicalVectorField& b, const GridSpec& grid) {
  const auto t = symmetric_products(b, nullptr, grid);
  SpectralVectorField out = curl(symmetric_tensor_divergence(t, grid), grid);
  finish_tendency(out, grid);
  return out;
}

}  // namespace detail

/// -P∇·(u⊗u - B⊗B), dealiased and divergence-free.
inline SpectralVectorField momentum_nonlinear(const SpectralVectorField& u,
                                              const SpectralVectorField& b, const GridSpec& grid) {
  const auto up = detail::checked_physical(u, grid, "momentum_nonlinear");
  const auto bp = detail::checked_physical(b, grid, "momentum_nonlinear");
  return detail::momentum_from_physical(up, bp, grid);
}

/// -∇·(u⊗B - B⊗u) - hall_coefficient ∇×{∇·(B⊗B)}.
inline SpectralVectorField induction_nonlinear(const SpectralVectorField& u,
                                               const SpectralVectorField& b,
                                               double hall_coefficient, const GridSpec& grid) {
  const auto up = detail::checked_physical(u, grid, "induction_nonlinear");
  const auto bp = detail::checked_physical(b, grid, "induction_nonlinear");
  SpectralVectorField out = detail::transport_induction_from_physical(up, bp, grid);
  if (hall_coefficient != 0.0) {
    SpectralVectorField hall = detail::hall_divergence_form(bp, grid);
    hall *= hall_coefficient;
    out -= hall;
  }
  return out;
}

/// ∇×((∇×B)×B) with the cross product formed in physical space.
inline SpectralVectorField hall_term(const SpectralVectorField& b, const GridSpec& grid) {
  const auto bp = detail::checked_physical(b, grid, "hall_term");
  const auto jp = detail::checked_physical(curl(b, grid), grid, "hall_term");
  SpectralVectorField out = curl(detail::cross_product(jp, bp, grid), grid);
  detail::finish_tendency(out, grid);
  return out;
}

/// Both tendencies from the divergence-form fluxes, sharing the physical fields.
inline RhsPair divergence_form_rhs(const SpectralVectorField& u, const SpectralVectorField& b,
                                   double hall_coefficient, const GridSpec& grid) {
  const auto up = detail::checked_physical(u, grid, "divergence_form_rhs");
  const auto bp = detail::checked_physical(b, grid, "divergence_form_rhs");
  RhsPair out;
  out.du = detail::momentum_from_physical(up, bp, grid);
  out.dB = detail::transport_induction_from_physical(up, bp, grid);
  if (hall_coefficient != 0.0) {
    SpectralVectorField hall = detail::hall_divergence_form(bp, grid);
    hall *= hall_coefficient;
    out.dB -= hall;
  }
  return out;
}

/// Momentum P[-(u·∇)u + (∇×B)×B], induction ∇×(u×B) - hall_coefficient ∇×((∇×B)×B).
inline RhsPair primitive_form_rhs(const SpectralVectorField& u, const SpectralVectorField& b,
                                  double hall_coefficient, const GridSpec& grid) {
  const auto up = detail::checked_physical(u, grid, "primitive_form_rhs");
  const auto bp = detail::checked_physical(b, grid, "primitive_form_rhs");
  const SpectralVectorField j = curl(b, grid);
  const auto jp = detail::checked_physical(j, grid, "primitive_form_rhs");

  // (u·∇)u_a = Σ_c u_c ∂_c u_a
  PhysicalVectorField advect(grid);
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t c = 0; c < 3; ++c) {
      std::array<int, 3> alpha{0, 0, 0};
      alpha[c] = 1;
      const auto grad = inverse_scalar(derivative(u[a], grid, alpha), grid);
      for (std::size_t p = 0; p < grad.size(); ++p) {
        advect[a][p] += up[c][p] * grad[p];
      }
    }
  }
  SpectralVectorField lorentz = detail::cross_product(jp, bp, grid);
  SpectralVectorField mom = lorentz - forward_transform(advect, grid);
  RhsPair out;
  out.du = leray_project(mom, grid);
  detail::finish_tendency(out.du, grid);

  out.dB = curl(detail::cross_product(up, bp, grid), grid);
  if (hall_coefficient != 0.0) {
    SpectralVectorField hall = curl(lorentz, grid);
    hall *= hall_coefficient;
    out.dB -= hall;
  }
  detail::finish_tendency(out.dB, grid);
  return out;
}

inline RhsPair nonlinear_rhs(const SpectralVectorField& u, const SpectralVectorField& b,
                             double hall_coefficient, RhsForm form, const GridSpec& grid) {
  return form == RhsForm::divergence ? divergence_form_rhs(u, b, hall_coefficient, grid)
                                     : primitive_form_rhs(u, b, hall_coefficient, grid);
}

namespace detail {

inline double max_coefficient(const SpectralVectorField& v) {
  double m = 0.0;
  for (const auto& c : v.comp) {
    for (const auto& z : c) {
      m = std::max(m, std::abs(z));
    }
  }
  return m;
}

inline double max_relative_difference(const SpectralVectorField& a, const SpectralVectorField& b) {
  const double scale = std::max(max_coefficient(a), max_coefficient(b));
  if (scale == 0.0) {
    return 0.0;
  }
  double worst = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < a[c].size(); ++i) {
      worst = std::max(worst, std::abs(a[c][i] - b[c][i]));
    }
  }
  return worst / scale;
}

}  // namespace detail

/// Largest relative spectral disagreement between the primitive-form and the
/// divergence-form assemblies.  Only small for divergence-free inputs.
inline double cross_validate_forms(const SpectralVectorField& u, const SpectralVectorField& b,
                                   double hall_coefficient, const GridSpec& grid) {
  const RhsPair prim = primitive_form_rhs(u, b, hall_coefficient, grid);
  const SpectralVectorField du = momentum_nonlinear(u, b, grid);
  const SpectralVectorField dB = induction_nonlinear(u, b, hall_coefficient, grid);
  return std::max(detail::max_relative_difference(prim.du, du),
                  detail::max_relative_difference(prim.dB, dB));
}

}  // namespace hallmhd
