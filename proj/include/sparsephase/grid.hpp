#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparsephase {

using complex_t = std::complex<double>;

/// Thrown when two grids that must share a shape do not.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FieldTag {};
struct SpectrumTag {};
struct MagnitudeTag {};

/**
 * Dense 2D grid stored row-major, index i = y * width + x.
 *
 * The tag parameter keeps object-space fields, Fourier-space spectra and
 * magnitude data from being mixed up by accident; the storage is the same.
 */
template <class T, class Tag>
class Grid {
 public:
  using value_type = T;

  Grid() = default;

  Grid(std::size_t width, std::size_t height, T fill = T{})
      : width_(width), height_(height), data_(checked_size(width, height), fill) {}

  Grid(std::size_t width, std::size_t height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != checked_size(width, height)) {
      throw ShapeError("grid data length " + std::to_string(data_.size()) +
                       " does not match " + std::to_string(width) + "x" +
                       std::to_string(height));
    }
  }

  /// Reinterpret the samples of a grid with another tag (e.g. field -> spectrum).
  template <class OtherTag>
  static Grid from(const Grid<T, OtherTag>& other) {
    return Grid(other.width(), other.height(),
                std::vector<T>(other.data().begin(), other.data().end()));
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
  const T& operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  const std::vector<T>& vector() const noexcept { return data_; }

  template <class U, class V>
  bool same_shape(const Grid<U, V>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Grid&) const = default;

 private:
  static std::size_t checked_size(std::size_t width, std::size_t height) {
    if (width < 2 || height < 2) {
      throw ShapeError("grid must be at least 2x2, got " + std::to_string(width) + "x" +
                       std::to_string(height));
    }
    return width * height;
  }

  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> data_;
};

using ComplexField = Grid<complex_t, FieldTag>;
using RealGrid = Grid<double, FieldTag>;
using Spectrum = Grid<complex_t, SpectrumTag>;
using MagnitudeData = Grid<double, MagnitudeTag>;

template <class A, class B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + std::to_string(a.width()) + "x" +
                     std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                     std::to_string(b.height()));
  }
}

inline bool is_finite(complex_t v) noexcept {
  return std::isfinite(v.real()) && std::isfinite(v.imag());
}
inline bool is_finite(double v) noexcept { return std::isfinite(v); }

template <class T, class Tag>
bool all_finite(const Grid<T, Tag>& g) noexcept {
  return std::all_of(g.data().begin(), g.data().end(), [](const T& v) { return is_finite(v); });
}

/// Validates magnitude samples (finite, nonnegative) and retags them.
inline MagnitudeData make_magnitude(const RealGrid& values) {
  for (double v : values.data()) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("magnitude data must be finite and nonnegative");
    }
  }
  return MagnitudeData::from(values);
}

/// Axis-aligned inclusive pixel rectangle.
struct BoundingBox {
  std::size_t x0 = 0;
  std::size_t y0 = 0;
  std::size_t x1 = 0;
  std::size_t y1 = 0;

  std::size_t width() const noexcept { return x1 - x0 + 1; }
  std::size_t height() const noexcept { return y1 - y0 + 1; }
  bool operator==(const BoundingBox&) const = default;
};

/**
 * Boolean support region C. At least one pixel must be set; the bounding box
 * of the set pixels is computed once at construction.
 */
class SupportMask {
 public:
  SupportMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> inside)
      : cells_(width, height, std::move(inside)) {
    bool any = false;
    box_ = BoundingBox{width, height, 0, 0};
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        if (cells_(x, y) != 0) {
          cells_(x, y) = 1;
          any = true;
          box_.x0 = std::min(box_.x0, x);
          box_.y0 = std::min(box_.y0, y);
          box_.x1 = std::max(box_.x1, x);
          box_.y1 = std::max(box_.y1, y);
        }
      }
    }
    if (!any) throw std::invalid_argument("support mask has no true pixel");
  }

  /// Builds a mask from a real 0/1 grid (nonzero means inside).
  static SupportMask from_real(const RealGrid& g) {
    std::vector<std::uint8_t> inside(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) inside[i] = g[i] != 0.0 ? 1 : 0;
    return SupportMask(g.width(), g.height(), std::move(inside));
  }

  std::size_t width() const noexcept { return cells_.width(); }
  std::size_t height() const noexcept { return cells_.height(); }
  std::size_t size() const noexcept { return cells_.size(); }

  bool operator()(std::size_t x, std::size_t y) const { return cells_(x, y) != 0; }
  bool operator[](std::size_t i) const { return cells_[i] != 0; }

  const BoundingBox& bounding_box() const noexcept { return box_; }

  std::size_t count() const noexcept {
    return static_cast<std::size_t>(std::count(cells_.data().begin(), cells_.data().end(), 1));
  }

  /// mask(x, y) == mask(W-1-x, H-1-y) everywhere.
  bool is_centro_symmetric() const noexcept {
    const std::size_t w = width();
    const std::size_t h = height();
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        if (cells_(x, y) != cells_(w - 1 - x, h - 1 - y)) return false;
      }
    }
    return true;
  }

  RealGrid to_real() const {
    RealGrid out(width(), height());
    for (std::size_t i = 0; i < size(); ++i) out[i] = cells_[i] ? 1.0 : 0.0;
    return out;
  }

  template <class U, class V>
  bool same_shape(const Grid<U, V>& other) const noexcept {
    return width() == other.width() && height() == other.height();
  }
  bool same_shape(const SupportMask& other) const noexcept {
    return width() == other.width() && height() == other.height();
  }

  bool operator==(const SupportMask& other) const { return cells_ == other.cells_; }

 private:
  Grid<std::uint8_t, FieldTag> cells_;
  BoundingBox box_;
};

}  // namespace sparsephase
