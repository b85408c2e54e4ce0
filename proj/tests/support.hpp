#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <tuple>

#include "hallmhd/hallmhd.hpp"

namespace hmtest {

using hallmhd::Complex;
using hallmhd::GridSpec;
using hallmhd::ModeIndex;
using hallmhd::PhysicalVectorField;
using hallmhd::SpectralVectorField;

// Random dealiased, divergence-free, zero-mean field.  Drawn in physical space so
// the spectrum is Hermitian by construction.
inline SpectralVectorField random_solenoidal(const GridSpec& grid, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, scale);
  PhysicalVectorField f(grid);
  for (auto& c : f.comp) {
    for (auto& v : c) v = nd(rng);
  }
  SpectralVectorField s = hallmhd::forward_transform(f, grid);
  s = hallmhd::leray_project(s, grid);
  hallmhd::dealias_in_place(s, grid);
  hallmhd::zero_mean_in_place(s);
  return s;
}

inline double max_abs(const SpectralVectorField& v) {
  double m = 0.0;
  for (const auto& c : v.comp) {
    for (const auto& z : c) m = std::max(m, std::abs(z));
  }
  return m;
}

inline double max_abs_diff(const SpectralVectorField& a, const SpectralVectorField& b) {
  double m = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < a[c].size(); ++i) m = std::max(m, std::abs(a[c][i] - b[c][i]));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Direct convolution oracle on the full integer lattice.  Coefficients follow
// the continuum normalization: (fg)^(k) = (2π)^{-3/2} Δk³ Σ_{p+q=k} f̂(p) ĝ(q).

using Key = std::tuple<int, int, int>;
using C3 = std::array<Complex, 3>;
using ModeMap = std::map<Key, C3>;

inline ModeMap to_modes(const SpectralVectorField& v, const GridSpec& grid) {
  ModeMap out;
  const int h = static_cast<int>(grid.n() / 2);
  for (int x = -h + 1; x < h; ++x) {
    for (int y = -h + 1; y < h; ++y) {
      for (int z = -h + 1; z < h; ++z) {
        std::size_t idx = 0;
        bool conj = false;
        if (!grid.locate({x, y, z}, idx, conj)) continue;
        if (!grid.retained(idx)) continue;
        C3 c;
        bool nonzero = false;
        for (std::size_t a = 0; a < 3; ++a) {
          c[a] = conj ? std::conj(v[a][idx]) : v[a][idx];
          nonzero = nonzero || c[a] != Complex{};
        }
        if (nonzero) out[{x, y, z}] = c;
      }
    }
  }
  return out;
}

inline std::array<double, 3> wavevector(const Key& k, const GridSpec& grid) {
  return {grid.dk() * std::get<0>(k), grid.dk() * std::get<1>(k), grid.dk() * std::get<2>(k)};
}

// T_ab(k) = Σ_{p+q=k} f_a(p) g_b(q), scaled.
inline std::map<Key, std::array<Complex, 9>> outer(const ModeMap& f, const ModeMap& g, const GridSpec& grid) {
  const double scale = hallmhd::kTransformPrefactor * grid.mode_volume();
  std::map<Key, std::array<Complex, 9>> out;
  for (const auto& [p, fp] : f) {
    for (const auto& [q, gq] : g) {
      const Key k{std::get<0>(p) + std::get<0>(q), std::get<1>(p) + std::get<1>(q),
                  std::get<2>(p) + std::get<2>(q)};
      auto& t = out[k];
      for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = 0; b < 3; ++b) t[3 * a + b] += scale * fp[a] * gq[b];
      }
    }
  }
  return out;
}

inline C3 project(const std::array<double, 3>& k, C3 v) {
  const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
  if (k2 == 0.0) return v;
  const Complex kv = k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
  for (std::size_t a = 0; a < 3; ++a) v[a] -= k[a] * kv / k2;
  return v;
}

inline C3 curl_of(const std::array<double, 3>& k, const C3& v) {
  const Complex I{0.0, 1.0};
  return {I * (k[1] * v[2] - k[2] * v[1]), I * (k[2] * v[0] - k[0] * v[2]), I * (k[0] * v[1] - k[1] * v[0])};
}

// (∇·T)_a = Σ_b i k_b T_ba
inline C3 tensor_div(const std::array<double, 3>& k, const std::array<Complex, 9>& t) {
  const Complex I{0.0, 1.0};
  C3 out{};
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) out[a] += I * k[b] * t[3 * b + a];
  }
  return out;
}

// Fills every retained stored entry of the output from a per-mode rule.
template <class Fn>
SpectralVectorField assemble(const GridSpec& grid, Fn&& rule) {
  SpectralVectorField out(grid);
  for (std::size_t i = 0; i < grid.n(); ++i) {
    for (std::size_t j = 0; j < grid.n(); ++j) {
      for (std::size_t l = 0; l < grid.nz(); ++l) {
        const std::size_t idx = grid.index(i, j, l);
        if (!grid.retained(idx)) continue;
        const ModeIndex m = grid.mode(i, j, l);
        if (m.mx == 0 && m.my == 0 && m.mz == 0) continue;
        const C3 v = rule(Key{m.mx, m.my, m.mz});
        for (std::size_t a = 0; a < 3; ++a) out[a][idx] = v[a];
      }
    }
  }
  return out;
}

inline std::array<Complex, 9> lookup(const std::map<Key, std::array<Complex, 9>>& t, const Key& k) {
  const auto it = t.find(k);
  return it == t.end() ? std::array<Complex, 9>{} : it->second;
}

inline SpectralVectorField oracle_momentum(const SpectralVectorField& u, const SpectralVectorField& b,
                                           const GridSpec& grid) {
  const ModeMap um = to_modes(u, grid);
  const ModeMap bm = to_modes(b, grid);
  const auto uu = outer(um, um, grid);
  const auto bb = outer(bm, bm, grid);
  return assemble(grid, [&](const Key& key) {
    const auto k = wavevector(key, grid);
    auto t = lookup(uu, key);
    const auto s = lookup(bb, key);
    for (std::size_t e = 0; e < 9; ++e) t[e] -= s[e];
    C3 d = tensor_div(k, t);
    for (auto& z : d) z = -z;
    return project(k, d);
  });
}

inline SpectralVectorField oracle_hall(const SpectralVectorField& b, const GridSpec& grid) {
  const ModeMap bm = to_modes(b, grid);
  ModeMap jm;
  for (const auto& [key, v] : bm) jm[key] = curl_of(wavevector(key, grid), v);
  const auto jb = outer(jm, bm, grid);
  return assemble(grid, [&](const Key& key) {
    const auto k = wavevector(key, grid);
    const auto t = lookup(jb, key);
    // (J × B)_a = ε_abc J_b B_c
    const C3 cross{t[3 * 1 + 2] - t[3 * 2 + 1], t[3 * 2 + 0] - t[3 * 0 + 2], t[3 * 0 + 1] - t[3 * 1 + 0]};
    return curl_of(k, cross);
  });
}

inline SpectralVectorField oracle_induction(const SpectralVectorField& u, const SpectralVectorField& b,
                                            double hall, const GridSpec& grid) {
  const ModeMap um = to_modes(u, grid);
  const ModeMap bm = to_modes(b, grid);
  const auto ub = outer(um, bm, grid);
  const auto bu = outer(bm, um, grid);
  const auto bb = outer(bm, bm, grid);
  return assemble(grid, [&](const Key& key) {
    const auto k = wavevector(key, grid);
    auto w = lookup(ub, key);
    const auto v = lookup(bu, key);
    for (std::size_t e = 0; e < 9; ++e) w[e] -= v[e];
    C3 out = tensor_div(k, w);
    for (auto& z : out) z = -z;
    const C3 h = curl_of(k, tensor_div(k, lookup(bb, key)));
    for (std::size_t a = 0; a < 3; ++a) out[a] -= hall * h[a];
    return out;
  });
}

}  // namespace hmtest
