#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <new>
#include <stdexcept>
#include <string>
#include <vector>

namespace hallmhd {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// (2π)^{-3/2}: continuum prefactor of the Fourier transform in three dimensions.
inline const double kTransformPrefactor = 1.0 / (kTwoPi * std::sqrt(kTwoPi));

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition on an argument (bad grid size, empty band, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Spectrum handed to the inverse transform is not the transform of a real field.
class SymmetryError : public Error {
 public:
  SymmetryError(const std::string& what, std::array<int, 3> mode, double asymmetry)
      : Error(what), mode_(mode), asymmetry_(asymmetry) {}
  [[nodiscard]] std::array<int, 3> mode() const { return mode_; }
  [[nodiscard]] double asymmetry() const { return asymmetry_; }

 private:
  std::array<int, 3> mode_;
  double asymmetry_;
};

/// NaN/Inf encountered while forming a nonlinear product or advancing a state.
class NonFiniteError : public Error {
 public:
  NonFiniteError(const std::string& what, std::array<std::size_t, 3> location)
      : Error(what), location_(location) {}
  [[nodiscard]] std::array<std::size_t, 3> location() const { return location_; }

 private:
  std::array<std::size_t, 3> location_;
};

/// Minimal over-aligned allocator so FFTW can use its SIMD kernels on our buffers.
template <class T, std::size_t Alignment = 64>
struct AlignedAllocator {
  using value_type = T;

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U, Alignment>&) noexcept {}

  template <class U>
  struct rebind {
    using other = AlignedAllocator<U, Alignment>;
  };

  T* allocate(std::size_t count) {
    return static_cast<T*>(::operator new(count * sizeof(T), std::align_val_t{Alignment}));
  }
  void deallocate(T* ptr, std::size_t) noexcept {
    ::operator delete(ptr, std::align_val_t{Alignment});
  }

  template <class U>
  bool operator==(const AlignedAllocator<U, Alignment>&) const noexcept {
    return true;
  }
};

template <class T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

}  // namespace hallmhd
