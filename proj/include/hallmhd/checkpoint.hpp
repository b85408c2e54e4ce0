#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "hallmhd/core.hpp"
#include "hallmhd/grid.hpp"
#include "hallmhd/integrator.hpp"

namespace hallmhd {

// Layout (all fields little-endian):
//   "HMHD" | u32 version | u64 n | f64 box_length | f64 dealias_fraction | f64 t
//   | i64 step_index | f64 nu | f64 mu_resistivity | f64 hall_coefficient | u64 count
//   | count × (f64 re, f64 im)
// The payload holds û_x, û_y, û_z, then B̂_x, B̂_y, B̂_z, each in half-spectrum order
// (i, j, l) -> (i*n + j)*(n/2+1) + l, so count = 6 n² (n/2+1).

inline constexpr char kCheckpointMagic[4] = {'H', 'M', 'H', 'D'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public Error {
 public:
  using Error::Error;
};

struct CheckpointHeader {
  std::uint32_t version = kCheckpointVersion;
  std::uint64_t n = 0;
  double box_length = 0.0;
  double dealias_fraction = 0.0;
  double t = 0.0;
  std::int64_t step_index = 0;
  double nu = 0.0;
  double mu_resistivity = 0.0;
  double hall_coefficient = 0.0;
  std::uint64_t count = 0;
};

struct CheckpointData {
  CheckpointHeader header;
  SolverState state;
};

namespace detail {

template <class T>
void put_le(std::vector<unsigned char>& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits;
  std::memcpy(&bits, &value, sizeof bits);
  for (std::size_t b = 0; b < sizeof bits; ++b) {
    out.push_back(static_cast<unsigned char>((bits >> (8 * b)) & 0xFFu));
  }
}

template <class T>
T get_le(const unsigned char*& p, const unsigned char* end) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  if (static_cast<std::size_t>(end - p) < sizeof(U)) {
    throw CheckpointError("checkpoint is truncated");
  }
  U bits = 0;
  for (std::size_t b = 0; b < sizeof bits; ++b) {
    bits |= static_cast<U>(p[b]) << (8 * b);
  }
  p += sizeof bits;
  T value;
  std::memcpy(&value, &bits, sizeof value);
  return value;
}

}  // namespace detail

inline std::vector<unsigned char> encode_checkpoint(const SolverState& s, const GridSpec& grid,
                                                    const PhysicsParams& params) {
  std::vector<unsigned char> out(kCheckpointMagic, kCheckpointMagic + 4);
  const std::uint64_t count = 6 * static_cast<std::uint64_t>(grid.spectral_size());
  out.reserve(out.size() + 84 + count * 16);
  detail::put_le(out, kCheckpointVersion);
  detail::put_le(out, static_cast<std::uint64_t>(grid.n()));
  detail::put_le(out, grid.box_length());
  detail::put_le(out, grid.dealias_fraction());
  detail::put_le(out, s.t);
  detail::put_le(out, s.step_index);
  detail::put_le(out, params.nu);
  detail::put_le(out, params.mu_resistivity);
  detail::put_le(out, params.hall_coefficient);
  detail::put_le(out, count);
  for (const auto* field : {&s.u_hat, &s.b_hat}) {
    if (field->size() != grid.spectral_size()) {
      throw CheckpointError("state does not match the grid");
    }
    for (const auto& comp : field->comp) {
      for (const Complex& z : comp) {
        detail::put_le(out, z.real());
        detail::put_le(out, z.imag());
      }
    }
  }
  return out;
}

inline CheckpointData decode_checkpoint(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw CheckpointError("not a checkpoint (bad magic)");
  }
  const unsigned char* p = bytes.data() + 4;
  const unsigned char* end = bytes.data() + bytes.size();
  CheckpointData d;
  auto& h = d.header;
  h.version = detail::get_le<std::uint32_t>(p, end);
  if (h.version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(h.version));
  }
  h.n = detail::get_le<std::uint64_t>(p, end);
  h.box_length = detail::get_le<double>(p, end);
  h.dealias_fraction = detail::get_le<double>(p, end);
  h.t = detail::get_le<double>(p, end);
  h.step_index = detail::get_le<std::int64_t>(p, end);
  h.nu = detail::get_le<double>(p, end);
  h.mu_resistivity = detail::get_le<double>(p, end);
  h.hall_coefficient = detail::get_le<double>(p, end);
  h.count = detail::get_le<std::uint64_t>(p, end);
  if (h.n < 8 || h.n > 4096 || h.n % 2 != 0) {
    throw CheckpointError("checkpoint has an invalid grid size " + std::to_string(h.n));
  }
  const std::uint64_t spectral = h.n * h.n * (h.n / 2 + 1);
  if (h.count != 6 * spectral) {
    throw CheckpointError("checkpoint payload count does not match its grid size");
  }
  if (static_cast<std::uint64_t>(end - p) != h.count * 16) {
    throw CheckpointError(static_cast<std::uint64_t>(end - p) < h.count * 16
                              ? "checkpoint is truncated"
                              : "checkpoint has trailing bytes");
  }
  d.state.t = h.t;
  d.state.step_index = h.step_index;
  for (auto* field : {&d.state.u_hat, &d.state.b_hat}) {
    for (auto& comp : field->comp) {
      comp.resize(spectral);
      for (auto& z : comp) {
        const double re = detail::get_le<double>(p, end);
        const double im = detail::get_le<double>(p, end);
        z = Complex(re, im);
      }
    }
  }
  return d;
}

inline void write_checkpoint(const SolverState& s, const GridSpec& grid, const PhysicsParams& params,
                             const std::string& path) {
  const auto bytes = encode_checkpoint(s, grid, params);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open '" + tmp + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw CheckpointError("cannot move checkpoint into place at '" + path + "'");
  }
}

inline CheckpointData read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

/// Reads a checkpoint for an existing session; rejects grids that differ.
inline SolverState read_checkpoint(const std::string& path, const GridSpec& grid) {
  CheckpointData d = read_checkpoint(path);
  if (d.header.n != grid.n()) {
    throw CheckpointError("checkpoint grid n=" + std::to_string(d.header.n) +
                          " does not match session n=" + std::to_string(grid.n()));
  }
  if (d.header.box_length != grid.box_length() ||
      d.header.dealias_fraction != grid.dealias_fraction()) {
    throw CheckpointError("checkpoint box length or dealias fraction does not match the session");
  }
  return std::move(d.state);
}

}  // namespace hallmhd
