#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <mutex>
#include <stdexcept>

#include "sparsephase/grid.hpp"

namespace sparsephase {

/// Raised when a transform input contains NaN or Inf.
class NonFiniteError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {
// FFTW planning is not thread-safe; execution of an existing plan is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/**
 * 2D complex DFT pair for one grid shape, backed by FFTW.
 *
 * Forward is unnormalized, inverse carries 1/(W*H). Plans are made with
 * FFTW_ESTIMATE into buffers this object owns, so for a fixed input the
 * output is bit-identical across instances and threads.
 */
class FourierTransform {
 public:
  FourierTransform(std::size_t width, std::size_t height) : width_(width), height_(height) {
    if (width < 2 || height < 2) throw ShapeError("transform shape must be at least 2x2");
    const std::size_t n = width * height;
    std::lock_guard lock(detail::fftw_planner_mutex());
    in_ = fftw_alloc_complex(n);
    out_ = fftw_alloc_complex(n);
    if (in_ == nullptr || out_ == nullptr) {
      release();
      throw std::bad_alloc();
    }
    const int h = static_cast<int>(height);
    const int w = static_cast<int>(width);
    forward_ = fftw_plan_dft_2d(h, w, in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_2d(h, w, in_, out_, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (forward_ == nullptr || backward_ == nullptr) {
      release();
      throw std::runtime_error("FFTW failed to create a plan");
    }
  }

  FourierTransform(const FourierTransform&) = delete;
  FourierTransform& operator=(const FourierTransform&) = delete;

  ~FourierTransform() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    release();
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }

  Spectrum forward(const ComplexField& field) {
    check(field, "forward_transform");
    Spectrum out(width_, height_);
    run(forward_, field.data(), out.data(), 1.0);
    return out;
  }

  ComplexField inverse(const Spectrum& spectrum) {
    check(spectrum, "inverse_transform");
    ComplexField out(width_, height_);
    run(backward_, spectrum.data(), out.data(), 1.0 / static_cast<double>(width_ * height_));
    return out;
  }

 private:
  template <class G>
  void check(const G& g, const char* what) const {
    if (g.width() != width_ || g.height() != height_) {
      throw ShapeError(std::string(what) + ": grid shape does not match the transform");
    }
    if (!all_finite(g)) throw NonFiniteError(std::string(what) + ": input contains non-finite samples");
  }

  void run(fftw_plan plan, std::span<const complex_t> src, std::span<complex_t> dst, double scale) {
    static_assert(sizeof(fftw_complex) == sizeof(complex_t));
    std::memcpy(in_, src.data(), src.size() * sizeof(complex_t));
    fftw_execute(plan);
    const auto* res = reinterpret_cast<const complex_t*>(out_);
    if (scale == 1.0) {
      std::copy(res, res + dst.size(), dst.begin());
    } else {
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = res[i] * scale;
    }
  }

  void release() noexcept {
    if (forward_ != nullptr) fftw_destroy_plan(forward_);
    if (backward_ != nullptr) fftw_destroy_plan(backward_);
    if (in_ != nullptr) fftw_free(in_);
    if (out_ != nullptr) fftw_free(out_);
    forward_ = backward_ = nullptr;
    in_ = out_ = nullptr;
  }

  std::size_t width_;
  std::size_t height_;
  fftw_complex* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

inline Spectrum forward_transform(const ComplexField& field) {
  FourierTransform ft(field.width(), field.height());
  return ft.forward(field);
}

inline ComplexField inverse_transform(const Spectrum& spectrum) {
  FourierTransform ft(spectrum.width(), spectrum.height());
  return ft.inverse(spectrum);
}

inline MagnitudeData magnitude_of(const Spectrum& spectrum) {
  MagnitudeData out(spectrum.width(), spectrum.height());
  for (std::size_t i = 0; i < spectrum.size(); ++i) out[i] = std::abs(spectrum[i]);
  return out;
}

/// Keeps the phase of each sample and sets its modulus to the target.
/// Samples that are exactly zero take phase 0.
inline Spectrum impose_magnitude(const Spectrum& spectrum, const MagnitudeData& target) {
  require_same_shape(spectrum, target, "impose_magnitude");
  Spectrum out(spectrum.width(), spectrum.height());
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const complex_t s = spectrum[i];
    const double m = std::abs(s);
    out[i] = m == 0.0 ? complex_t(target[i], 0.0) : s * (target[i] / m);
  }
  return out;
}

/// ||  |spectrum| - target  ||_2 / || target ||_2  (0 when target is all zero).
inline double magnitude_residual(const Spectrum& spectrum, const MagnitudeData& target) {
  require_same_shape(spectrum, target, "magnitude_residual");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double d = std::abs(spectrum[i]) - target[i];
    num += d * d;
    den += target[i] * target[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

}  // namespace sparsephase
