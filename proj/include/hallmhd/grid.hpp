#pragma once

#include <fftw3.h>

#include <cmath>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "hallmhd/core.hpp"

namespace hallmhd {

namespace detail {

// FFTW's planner is not reentrant; execution with the new-array interface is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// Pair of r2c/c2r plans for an n³ box.  Plans are made with FFTW_ESTIMATE so the
/// chosen algorithm (and therefore every rounding) is the same from run to run.
class FftEngine {
 public:
  explicit FftEngine(std::size_t n) : n_(n) {
    const int ni = static_cast<int>(n);
    const std::size_t real_size = n * n * n;
    const std::size_t complex_size = n * n * (n / 2 + 1);
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    double* real_buf = fftw_alloc_real(real_size);
    fftw_complex* cplx_buf = fftw_alloc_complex(complex_size);
    forward_ = fftw_plan_dft_r2c_3d(ni, ni, ni, real_buf, cplx_buf, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_3d(ni, ni, ni, cplx_buf, real_buf, FFTW_ESTIMATE);
    fftw_free(real_buf);
    fftw_free(cplx_buf);
    if (forward_ == nullptr || backward_ == nullptr) {
      throw Error("FFTW failed to create plans for n=" + std::to_string(n));
    }
  }

  FftEngine(const FftEngine&) = delete;
  FftEngine& operator=(const FftEngine&) = delete;

  ~FftEngine() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  /// Unnormalized forward DFT, input preserved.
  void forward(const double* in, Complex* out) const {
    fftw_execute_dft_r2c(forward_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
  }

  /// Unnormalized backward DFT.  c2r destroys its input, so it runs on a copy.
  void backward(const Complex* in, double* out) const {
    thread_local AlignedVector<Complex> scratch;
    const std::size_t size = n_ * n_ * (n_ / 2 + 1);
    scratch.assign(in, in + size);
    fftw_execute_dft_c2r(backward_, reinterpret_cast<fftw_complex*>(scratch.data()), out);
  }

 private:
  std::size_t n_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace detail

/// Integer mode numbers (m_x, m_y, m_z) of a stored spectral coefficient.
struct ModeIndex {
  int mx = 0;
  int my = 0;
  int mz = 0;
};

/// Uniform periodic grid on [0, L)³ with precomputed wavevector tables and the
/// dealiasing mask.  Spectral arrays use the r2c half-spectrum layout
/// (i, j, l) -> (i * n + j) * (n/2 + 1) + l with l in [0, n/2].
class GridSpec {
 public:
  GridSpec(std::size_t n, double box_length, double dealias_fraction)
      : n_(n), box_length_(box_length), dealias_fraction_(dealias_fraction) {
    nz_ = n_ / 2 + 1;
    dk_ = kTwoPi / box_length_;
    dx_ = box_length_ / static_cast<double>(n_);
    cutoff_ = dealias_fraction_ * static_cast<double>(n_) / 2.0;

    axis_mode_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto ii = static_cast<int>(i);
      axis_mode_[i] = (ii < static_cast<int>(n_ / 2)) ? ii : ii - static_cast<int>(n_);
    }
    kd_xy_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      kd_xy_[i] = (i == n_ / 2) ? 0.0 : dk_ * axis_mode_[i];
    }
    kd_z_.resize(nz_);
    for (std::size_t l = 0; l < nz_; ++l) {
      kd_z_[l] = (l == n_ / 2) ? 0.0 : dk_ * static_cast<double>(l);
    }

    const std::size_t size = spectral_size();
    k2_.resize(size);
    mask_.resize(size);
    retained_count_ = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        for (std::size_t l = 0; l < nz_; ++l) {
          const ModeIndex m = mode(i, j, l);
          const double kx = dk_ * m.mx;
          const double ky = dk_ * m.my;
          const double kz = dk_ * m.mz;
          const std::size_t idx = (i * n_ + j) * nz_ + l;
          k2_[idx] = kx * kx + ky * ky + kz * kz;
          const bool keep = keeps(m.mx) && keeps(m.my) && keeps(m.mz);
          mask_[idx] = keep ? 1 : 0;
          if (keep) {
            retained_count_ += (l == 0 || l == n_ / 2) ? 1 : 2;
          }
        }
      }
    }
  }

  [[nodiscard]] std::size_t n() const { return n_; }
  [[nodiscard]] std::size_t nz() const { return nz_; }
  [[nodiscard]] double box_length() const { return box_length_; }
  [[nodiscard]] double dealias_fraction() const { return dealias_fraction_; }
  [[nodiscard]] double dx() const { return dx_; }
  [[nodiscard]] double dk() const { return dk_; }
  [[nodiscard]] double cell_volume() const { return dx_ * dx_ * dx_; }
  [[nodiscard]] double mode_volume() const { return dk_ * dk_ * dk_; }
  [[nodiscard]] std::size_t physical_size() const { return n_ * n_ * n_; }
  [[nodiscard]] std::size_t spectral_size() const { return n_ * n_ * nz_; }

  /// Largest retained |k_i| (strictly below fraction·π·n/L).
  [[nodiscard]] double dealias_cutoff() const { return cutoff_ * dk_; }

  [[nodiscard]] std::size_t index(std::size_t i, std::size_t j, std::size_t l) const {
    return (i * n_ + j) * nz_ + l;
  }

  /// Signed mode numbers; the Nyquist index maps to -n/2 on x/y and +n/2 on z.
  [[nodiscard]] ModeIndex mode(std::size_t i, std::size_t j, std::size_t l) const {
    return {axis_mode_[i], axis_mode_[j], static_cast<int>(l)};
  }

  /// First-derivative wavenumbers.  Nyquist entries are zero so that odd
  /// derivatives keep the spectrum Hermitian.
  [[nodiscard]] double kd_x(std::size_t i) const { return kd_xy_[i]; }
  [[nodiscard]] double kd_y(std::size_t j) const { return kd_xy_[j]; }
  [[nodiscard]] double kd_z(std::size_t l) const { return kd_z_[l]; }

  /// |k|² including Nyquist contributions (used by diffusion and norms).
  [[nodiscard]] double k2(std::size_t idx) const { return k2_[idx]; }
  [[nodiscard]] bool retained(std::size_t idx) const { return mask_[idx] != 0; }

  /// Parseval weight of a stored half-spectrum entry (its conjugate partner is implicit).
  [[nodiscard]] double hermitian_weight(std::size_t l) const {
    return (l == 0 || l == n_ / 2) ? 1.0 : 2.0;
  }

  /// Number of full-lattice modes surviving the dealias mask.
  [[nodiscard]] std::size_t retained_mode_count() const { return retained_count_; }

  /// Locate the stored entry for an integer wavevector.  Returns false when the
  /// mode lies outside the grid.  `conjugate` is set when the stored entry is the
  /// Hermitian partner (-m) of the requested mode.
  bool locate(ModeIndex m, std::size_t& idx, bool& conjugate) const {
    const int half = static_cast<int>(n_ / 2);
    auto in_range = [&](int v) { return v >= -half && v < half; };
    conjugate = false;
    if (m.mz < 0) {
      m = {-m.mx, -m.my, -m.mz};
      conjugate = true;
    }
    if (!in_range(m.mx) || !in_range(m.my) || m.mz >= half) {
      return false;
    }
    const auto wrap = [&](int v) {
      return static_cast<std::size_t>(v < 0 ? v + static_cast<int>(n_) : v);
    };
    idx = index(wrap(m.mx), wrap(m.my), static_cast<std::size_t>(m.mz));
    return true;
  }

  /// Plans are built on first use and shared by every copy of this grid.
  [[nodiscard]] const detail::FftEngine& fft() const {
    LazyEngine& lazy = *fft_;
    std::call_once(lazy.once, [&] { lazy.engine = std::make_unique<detail::FftEngine>(n_); });
    return *lazy.engine;
  }

 private:
  [[nodiscard]] bool keeps(int m) const {
    return static_cast<double>(std::abs(m)) < cutoff_ - 1e-9;
  }

  std::size_t n_;
  std::size_t nz_ = 0;
  double box_length_;
  double dealias_fraction_;
  double dx_ = 0.0;
  double dk_ = 0.0;
  double cutoff_ = 0.0;
  std::vector<int> axis_mode_;
  std::vector<double> kd_xy_;
  std::vector<double> kd_z_;
  std::vector<double> k2_;
  std::vector<unsigned char> mask_;
  std::size_t retained_count_ = 0;
  struct LazyEngine {
    std::once_flag once;
    std::unique_ptr<detail::FftEngine> engine;
  };
  std::shared_ptr<LazyEngine> fft_ = std::make_shared<LazyEngine>();
};

/// Validated grid construction.
inline GridSpec make_grid(std::size_t n, double box_length, double dealias_fraction = 2.0 / 3.0) {
  if (n < 8 || n % 2 != 0) {
    throw InvalidArgument("grid size n must be even and >= 8, got " + std::to_string(n));
  }
  if (!(box_length > 0.0) || !std::isfinite(box_length)) {
    throw InvalidArgument("box_length must be positive and finite");
  }
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0)) {
    throw InvalidArgument("dealias_fraction must lie in (0, 1], got " +
                          std::to_string(dealias_fraction));
  }
  return GridSpec(n, box_length, dealias_fraction);
}

}  // namespace hallmhd
