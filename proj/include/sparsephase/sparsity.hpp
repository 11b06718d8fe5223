#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sparsephase/config.hpp"
#include "sparsephase/grid.hpp"

namespace sparsephase {

/// Forward differences with replicate boundaries: the last column of gx and
/// the last row of gy are zero.
struct GradientField {
  ComplexField gx;
  ComplexField gy;
};

inline GradientField discrete_gradient(const ComplexField& f) {
  const std::size_t w = f.width();
  const std::size_t h = f.height();
  GradientField g{ComplexField(w, h), ComplexField(w, h)};
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (x + 1 < w) g.gx(x, y) = f(x + 1, y) - f(x, y);
      if (y + 1 < h) g.gy(x, y) = f(x, y + 1) - f(x, y);
    }
  }
  return g;
}

/// Negative adjoint of discrete_gradient: <grad f, p> = -<f, div p>.
inline ComplexField discrete_divergence(const GradientField& p) {
  require_same_shape(p.gx, p.gy, "discrete_divergence");
  const std::size_t w = p.gx.width();
  const std::size_t h = p.gx.height();
  ComplexField div(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      complex_t v{};
      if (x + 1 < w) v += p.gx(x, y);
      if (x > 0) v -= p.gx(x - 1, y);
      if (y + 1 < h) v += p.gy(x, y);
      if (y > 0) v -= p.gy(x, y - 1);
      div(x, y) = v;
    }
  }
  return div;
}

namespace detail {

/// Pixel weights (1 inside the region, 0 outside) cropped to the patch.
using Weights = std::vector<double>;

/// Crop window used for penalty work on a region: its bounding box, grown
/// to at least 2x2 so that a grid can hold it.
struct Patch {
  std::size_t x0, y0, w, h;
};

inline Patch patch_for(const SupportMask& region) {
  const auto& b = region.bounding_box();
  auto grow = [](std::size_t lo, std::size_t len, std::size_t full) {
    if (len >= 2) return std::pair{lo, len};
    return std::pair{lo + 1 < full ? lo : lo - 1, std::size_t{2}};
  };
  auto [x0, w] = grow(b.x0, b.width(), region.width());
  auto [y0, h] = grow(b.y0, b.height(), region.height());
  return {x0, y0, w, h};
}

inline ComplexField crop(const ComplexField& f, const Patch& p) {
  ComplexField out(p.w, p.h);
  for (std::size_t y = 0; y < p.h; ++y) {
    for (std::size_t x = 0; x < p.w; ++x) out(x, y) = f(p.x0 + x, p.y0 + y);
  }
  return out;
}

inline Weights crop_weights(const SupportMask& region, const Patch& p) {
  Weights wts(p.w * p.h);
  for (std::size_t y = 0; y < p.h; ++y) {
    for (std::size_t x = 0; x < p.w; ++x) wts[y * p.w + x] = region(p.x0 + x, p.y0 + y) ? 1.0 : 0.0;
  }
  return wts;
}

inline double squared_modulus(const GradientField& g, std::size_t i) {
  return std::norm(g.gx[i]) + std::norm(g.gy[i]);
}

// Per-pixel penalty rho(s) of s = |grad f|^2 and the matching weight
// d rho / d s * 2, which multiplies grad f inside the divergence.
struct TvTerm {
  double eps2;
  double value(double s) const { return std::sqrt(s + eps2); }
  double weight(double s) const { return 1.0 / std::sqrt(s + eps2); }
};

struct HuberTerm {
  double inv_delta2;
  double value(double s) const { return std::sqrt(1.0 + s * inv_delta2) - 1.0; }
  double weight(double s) const { return inv_delta2 / std::sqrt(1.0 + s * inv_delta2); }
};

template <class Term>
double penalty_sum(const ComplexField& f, const Weights* wts, const Term& term) {
  const std::size_t w = f.width();
  const std::size_t h = f.height();
  double sum = 0.0;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      if (wts != nullptr && (*wts)[i] == 0.0) continue;
      const double sx = x + 1 < w ? std::norm(f[i + 1] - f[i]) : 0.0;
      const double sy = y + 1 < h ? std::norm(f[i + w] - f[i]) : 0.0;
      sum += term.value(sx + sy);
    }
  }
  return sum;
}

template <class Term>
ComplexField penalty_gradient(const ComplexField& f, const Weights* wts, const Term& term) {
  auto g = discrete_gradient(f);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double wgt = (wts == nullptr || (*wts)[i] != 0.0) ? term.weight(squared_modulus(g, i)) : 0.0;
    g.gx[i] *= wgt;
    g.gy[i] *= wgt;
  }
  auto div = discrete_divergence(g);
  for (auto& v : div.data()) v = -v;
  return div;
}

inline double max_modulus(const ComplexField& f, const Weights& wts) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (wts[i] != 0.0) m = std::max(m, std::abs(f[i]));
  }
  return m;
}

inline double smoothing_for(const ComplexField& patch, const Weights& wts, double relative_eps) {
  return std::max(relative_eps * max_modulus(patch, wts), 1e-12);
}

}  // namespace detail

/// Sum over the region of |grad g|, with differences taken inside the
/// region's bounding box.
inline double tv_value(const ComplexField& field, const SupportMask& region) {
  require_same_shape(region, field, "tv_value");
  const auto p = detail::patch_for(region);
  const auto wts = detail::crop_weights(region, p);
  return detail::penalty_sum(detail::crop(field, p), &wts, detail::TvTerm{0.0});
}

/// Smoothed TV over the whole grid: sum sqrt(|grad f|^2 + eps^2).
inline double smoothed_tv_value(const ComplexField& field, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  return detail::penalty_sum(field, nullptr, detail::TvTerm{epsilon * epsilon});
}

/// Functional gradient of the smoothed TV: -div(grad f / sqrt(|grad f|^2 + eps^2)).
inline ComplexField tv_gradient(const ComplexField& field, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  return detail::penalty_gradient(field, nullptr, detail::TvTerm{epsilon * epsilon});
}

inline double huber_value(const ComplexField& field, double delta, const SupportMask& region) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  require_same_shape(region, field, "huber_value");
  const auto p = detail::patch_for(region);
  const auto wts = detail::crop_weights(region, p);
  return detail::penalty_sum(detail::crop(field, p), &wts, detail::HuberTerm{1.0 / (delta * delta)});
}

/// Huber over the whole grid (no region), the value matching huber_gradient.
inline double huber_value(const ComplexField& field, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  return detail::penalty_sum(field, nullptr, detail::HuberTerm{1.0 / (delta * delta)});
}

/// -(1/delta^2) div(grad f / sqrt(1 + |grad f|^2 / delta^2)).
inline ComplexField huber_gradient(const ComplexField& field, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  return detail::penalty_gradient(field, nullptr, detail::HuberTerm{1.0 / (delta * delta)});
}

namespace detail {

inline double median_gradient_modulus(const ComplexField& patch, const Weights& wts) {
  const auto g = discrete_gradient(patch);
  std::vector<double> mods;
  mods.reserve(patch.size());
  double largest = 0.0;
  for (std::size_t i = 0; i < patch.size(); ++i) {
    if (wts[i] == 0.0) continue;
    mods.push_back(std::sqrt(squared_modulus(g, i)));
    largest = std::max(largest, mods.back());
  }
  if (mods.empty()) throw std::invalid_argument("select_delta: empty region");
  const std::size_t n = mods.size();
  const auto mid = mods.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(mods.begin(), mid, mods.end());
  double median = *mid;
  if (n % 2 == 0) {
    const double lower = *std::max_element(mods.begin(), mid);
    median = 0.5 * (lower + median);
  }
  if (median > 0.0) return median;
  return 1e-6 * (largest > 0.0 ? largest : 1.0);
}

}  // namespace detail

/// Median of |grad g| over the region, falling back to 1e-6 * max (or 1e-6)
/// when the median is zero.
inline double select_delta(const ComplexField& field, const SupportMask& region) {
  require_same_shape(region, field, "select_delta");
  const auto p = detail::patch_for(region);
  return detail::median_gradient_modulus(detail::crop(field, p), detail::crop_weights(region, p));
}

/**
 * Armijo backtracking along a descent direction.
 *
 * Tries t = t0 * ls_shrink^k with t0 = t_init / max(1, ||dir||_inf) and
 * returns the first t with P(f + t dir) <= P(f) - ls_alpha * t * ||dir||^2.
 * Returns 0 when 60 shrinks were not enough.
 */
template <class Penalty>
double backtracking_step(const ComplexField& field, const ComplexField& descent_dir, Penalty&& penalty,
                         const PenaltySpec& spec, double current_value = std::numeric_limits<double>::quiet_NaN()) {
  require_same_shape(field, descent_dir, "backtracking_step");
  double norm2 = 0.0;
  double inf = 0.0;
  for (const auto& d : descent_dir.data()) {
    norm2 += std::norm(d);
    inf = std::max(inf, std::abs(d));
  }
  const double p0 = std::isnan(current_value) ? penalty(field) : current_value;
  double t = spec.t_init / std::max(1.0, inf);
  ComplexField trial(field.width(), field.height());
  for (int k = 0; k <= 60; ++k) {
    for (std::size_t i = 0; i < field.size(); ++i) trial[i] = field[i] + t * descent_dir[i];
    if (penalty(trial) <= p0 - spec.ls_alpha * t * norm2) return t;
    t *= spec.ls_shrink;
  }
  return 0.0;
}

struct DescentResult {
  ComplexField field;
  /// Penalty before the first step and after every accepted step.
  std::vector<double> penalty_trace;
  std::vector<double> step_sizes;
};

/**
 * Gradient descent on the TV or Huber penalty of the pixels in a region.
 *
 * Work happens on the region's bounding box; only pixels inside the region
 * move, everything else is copied through untouched. For Huber with the
 * median rule, delta is re-selected at every step. Stops early if the line
 * search cannot make progress.
 */
inline DescentResult descend(const ComplexField& field, const SupportMask& region, const PenaltySpec& spec) {
  require_same_shape(region, field, "sparsity_descent");
  spec.validate();
  DescentResult result{field, {}, {}};
  if (spec.kind == PenaltyKind::None || spec.n_inner_steps == 0) return result;

  const auto box = detail::patch_for(region);
  const auto wts = detail::crop_weights(region, box);
  auto patch = detail::crop(field, box);
  const double eps = detail::smoothing_for(patch, wts, spec.epsilon);

  ComplexField dir(box.w, box.h);
  for (int step = 0; step < spec.n_inner_steps; ++step) {
    ComplexField grad;
    std::function<double(const ComplexField&)> penalty;
    if (spec.kind == PenaltyKind::TV) {
      const detail::TvTerm term{eps * eps};
      penalty = [&wts, term](const ComplexField& f) { return detail::penalty_sum(f, &wts, term); };
      grad = detail::penalty_gradient(patch, &wts, term);
    } else {
      const double delta = spec.delta_rule.kind == DeltaRule::Kind::Fixed
                               ? spec.delta_rule.value
                               : detail::median_gradient_modulus(patch, wts);
      const detail::HuberTerm term{1.0 / (delta * delta)};
      penalty = [&wts, term](const ComplexField& f) { return detail::penalty_sum(f, &wts, term); };
      grad = detail::penalty_gradient(patch, &wts, term);
    }
    for (std::size_t i = 0; i < patch.size(); ++i) dir[i] = wts[i] != 0.0 ? -grad[i] : complex_t{};

    const double p0 = penalty(patch);
    if (result.penalty_trace.empty()) result.penalty_trace.push_back(p0);
    const double t = backtracking_step(patch, dir, penalty, spec, p0);
    if (t == 0.0) break;
    for (std::size_t i = 0; i < patch.size(); ++i) patch[i] += t * dir[i];
    result.step_sizes.push_back(t);
    result.penalty_trace.push_back(penalty(patch));
  }

  for (std::size_t y = 0; y < box.h; ++y) {
    for (std::size_t x = 0; x < box.w; ++x) {
      if (wts[y * box.w + x] != 0.0) result.field(box.x0 + x, box.y0 + y) = patch(x, y);
    }
  }
  return result;
}

inline ComplexField sparsity_descent(const ComplexField& field, const SupportMask& region, const PenaltySpec& spec) {
  return descend(field, region, spec).field;
}

}  // namespace sparsephase
