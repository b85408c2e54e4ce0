#pragma once

#include <array>
#include <cstddef>

#include "hallmhd/core.hpp"
#include "hallmhd/grid.hpp"

namespace hallmhd {

/// Three real component arrays on the n³ grid, index (i*n + j)*n + l.
struct PhysicalVectorField {
  std::array<AlignedVector<double>, 3> comp;

  PhysicalVectorField() = default;
  explicit PhysicalVectorField(const GridSpec& grid) {
    for (auto& c : comp) {
      c.assign(grid.physical_size(), 0.0);
    }
  }

  [[nodiscard]] std::size_t size() const { return comp[0].size(); }
  AlignedVector<double>& operator[](std::size_t a) { return comp[a]; }
  const AlignedVector<double>& operator[](std::size_t a) const { return comp[a]; }
};

using SpectralScalarField = AlignedVector<Complex>;

/// Continuum-normalized half-spectrum coefficients of a real vector field.
struct SpectralVectorField {
  std::array<SpectralScalarField, 3> comp;

  SpectralVectorField() = default;
  explicit SpectralVectorField(const GridSpec& grid) {
    for (auto& c : comp) {
      c.assign(grid.spectral_size(), Complex{});
    }
  }

  [[nodiscard]] std::size_t size() const { return comp[0].size(); }
  SpectralScalarField& operator[](std::size_t a) { return comp[a]; }
  const SpectralScalarField& operator[](std::size_t a) const { return comp[a]; }

  SpectralVectorField& operator+=(const SpectralVectorField& other) {
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t i = 0; i < comp[a].size(); ++i) {
        comp[a][i] += other.comp[a][i];
      }
    }
    return *this;
  }

  SpectralVectorField& operator-=(const SpectralVectorField& other) {
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t i = 0; i < comp[a].size(); ++i) {
        comp[a][i] -= other.comp[a][i];
      }
    }
    return *this;
  }

  SpectralVectorField& operator*=(double s) {
    for (auto& c : comp) {
      for (auto& v : c) {
        v *= s;
      }
    }
    return *this;
  }

  friend bool operator==(const SpectralVectorField&, const SpectralVectorField&) = default;
};

inline SpectralVectorField operator+(SpectralVectorField a, const SpectralVectorField& b) {
  a += b;
  return a;
}

inline SpectralVectorField operator-(SpectralVectorField a, const SpectralVectorField& b) {
  a -= b;
  return a;
}

inline SpectralVectorField operator*(double s, SpectralVectorField a) {
  a *= s;
  return a;
}

}  // namespace hallmhd
