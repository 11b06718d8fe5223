#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparsephase/config.hpp"
#include "sparsephase/fourier.hpp"
#include "sparsephase/grid.hpp"
#include "sparsephase/sparsity.hpp"

namespace sparsephase {

enum class PhantomKind { BinaryPhase, GrayPhase };

struct PhantomSpec {
  std::size_t image_size = 128;
  std::size_t support_size = 60;
  PhantomKind kind = PhantomKind::BinaryPhase;
  double phase_step = 2.0 * std::numbers::pi / 3.0;
  double phase_range = 5.0 * std::numbers::pi / 6.0;
  std::uint64_t pattern_seed = 1;

  void validate() const {
    if (image_size < 4 || image_size % 2 != 0) throw std::invalid_argument("image size must be even and >= 4");
    if (support_size < 2 || support_size % 2 != 0) throw std::invalid_argument("support size must be even and >= 2");
    if (2 * support_size >= image_size) {
      throw std::invalid_argument("support size " + std::to_string(support_size) +
                                  " must be smaller than half the image size " + std::to_string(image_size));
    }
  }
};

inline constexpr double kDefaultTwinThreshold = 0.2;

/// Centered square support; centro-symmetric by construction.
inline SupportMask make_support(std::size_t image_size, std::size_t support_size) {
  PhantomSpec{image_size, support_size}.validate();
  const std::size_t lo = (image_size - support_size) / 2;
  const std::size_t hi = lo + support_size;
  std::vector<std::uint8_t> inside(image_size * image_size, 0);
  for (std::size_t y = lo; y < hi; ++y) {
    for (std::size_t x = lo; x < hi; ++x) inside[y * image_size + x] = 1;
  }
  return SupportMask(image_size, image_size, std::move(inside));
}

/**
 * Closed right triangle inside a square block: bounded by the block's left
 * edge, its bottom edge and the diagonal from top-left to bottom-right.
 */
inline SupportMask triangular_truncation(const SupportMask& mask) {
  const auto& b = mask.bounding_box();
  if (b.width() != b.height() || mask.count() != b.width() * b.height()) {
    throw std::invalid_argument("triangular_truncation expects a filled square block");
  }
  std::vector<std::uint8_t> inside(mask.size(), 0);
  for (std::size_t ly = 0; ly < b.height(); ++ly) {
    for (std::size_t lx = 0; lx <= ly; ++lx) inside[(b.y0 + ly) * mask.width() + b.x0 + lx] = 1;
  }
  return SupportMask(mask.width(), mask.height(), std::move(inside));
}

namespace detail {

inline ComplexField unit_phase_object(const RealGrid& phase, const SupportMask& support) {
  ComplexField out(phase.width(), phase.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (support[i]) out[i] = std::polar(1.0, phase[i]);
  }
  return out;
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

}  // namespace detail

namespace detail {

// 5x7 block glyphs, row-major, '#' = raised phase. None of them is
// symmetric under a half turn.
inline constexpr std::array<const char*, 14> kGlyphs{
    "#####..#....#....#....#....#....#..",  // T
    "####.#...##...##...##...##...#####.",  // D
    "#....#....#....#....#....#....#####",  // L
    "######....####.#....#....#....#####",  // E
    "######....####.#....#....#....#....",  // F
    "####.#...##...#####.#....#....#....",  // P
    "..###...#....#....#....##...#.###..",  // J
    ".#####....#....#....#....#.....####",  // C
    "#...##...##...##...##...##...#.###.",  // U
    "####.#...##...#####.#.#..#..#.#...#",  // R
    "#...##..#.#.#..##...#.#..#..#.#...#",  // K
    ".#####....#....#..###...##...#.###.",  // G
    "#...##...#.#.#...#....#....#....#..",  // Y
    ".###.#...##...#######...##...##...#",  // A
};

/// Rasterizes glyph `g` into the pixel rectangle [x0, x0+w) x [y0, y0+h).
inline void draw_glyph(RealGrid& phase, const char* g, double x0, double y0, double w, double h, double value) {
  const auto xa = static_cast<std::size_t>(std::floor(x0));
  const auto ya = static_cast<std::size_t>(std::floor(y0));
  const auto xb = static_cast<std::size_t>(std::ceil(x0 + w));
  const auto yb = static_cast<std::size_t>(std::ceil(y0 + h));
  for (std::size_t y = ya; y < yb; ++y) {
    for (std::size_t x = xa; x < xb; ++x) {
      const double px = static_cast<double>(x) + 0.5;
      const double py = static_cast<double>(y) + 0.5;
      if (px < x0 || py < y0 || px >= x0 + w || py >= y0 + h) continue;
      const auto col = static_cast<std::size_t>((px - x0) / w * 5.0);
      const auto row = static_cast<std::size_t>((py - y0) / h * 7.0);
      if (g[row * 5 + col] == '#') phase(x, y) = value;
    }
  }
}

/// Correlation of an object with its own twin after mean removal.
inline double self_twin_correlation(const ComplexField& g, const SupportMask& support);

}  // namespace detail

/// Largest truth/twin correlation accepted for a generated binary phantom.
inline constexpr double kMaxPhantomTwinCorrelation = 0.1;

/**
 * Two-level pure-phase object: four blocky letters on a 2x2 layout, phase
 * `phase_step` on the strokes and 0 on the background. Letters are drawn at
 * random from a fixed glyph set; draws whose twin correlates with the
 * object above kMaxPhantomTwinCorrelation are rejected so the object and
 * its twin are distinguishable.
 */
inline ComplexField binary_phase_phantom(const PhantomSpec& spec) {
  spec.validate();
  if (spec.kind != PhantomKind::BinaryPhase) throw std::invalid_argument("binary_phase_phantom needs BinaryPhase");
  const auto support = make_support(spec.image_size, spec.support_size);
  const auto& b = support.bounding_box();
  const double cell = static_cast<double>(spec.support_size) / 2.0;
  const double margin = 0.12 * cell;
  std::mt19937_64 rng(spec.pattern_seed);

  ComplexField best;
  double best_corr = 2.0;
  for (int attempt = 0; attempt < 1000 && best_corr > kMaxPhantomTwinCorrelation; ++attempt) {
    RealGrid phase(spec.image_size, spec.image_size, 0.0);
    for (std::size_t k = 0; k < 4; ++k) {
      const char* g = detail::kGlyphs[rng() % detail::kGlyphs.size()];
      detail::draw_glyph(phase, g, static_cast<double>(b.x0) + static_cast<double>(k % 2) * cell + margin,
                         static_cast<double>(b.y0) + static_cast<double>(k / 2) * cell + margin, cell - 2 * margin,
                         cell - 2 * margin, spec.phase_step);
    }
    auto candidate = detail::unit_phase_object(phase, support);
    const double corr = detail::self_twin_correlation(candidate, support);
    if (corr < best_corr) {
      best_corr = corr;
      best = std::move(candidate);
    }
  }
  return best;
}

/**
 * Gray pure-phase object: a sum of low-frequency sinusoids plus a few
 * sharp-edged patches, affinely rescaled to [0, phase_range] on the support.
 */
inline ComplexField gray_phase_phantom(const PhantomSpec& spec) {
  spec.validate();
  if (spec.kind != PhantomKind::GrayPhase) throw std::invalid_argument("gray_phase_phantom needs GrayPhase");
  if (!(spec.phase_range > 0.0)) throw std::invalid_argument("phase_range must be > 0");
  const auto support = make_support(spec.image_size, spec.support_size);
  const auto& b = support.bounding_box();
  const std::size_t s = spec.support_size;
  const double two_pi = 2.0 * std::numbers::pi;
  std::mt19937_64 rng(spec.pattern_seed);

  struct Wave {
    double kx, ky, shift, amp;
  };
  std::vector<Wave> waves(5);
  for (auto& wv : waves) {
    wv.kx = two_pi * (detail::uniform_unit(rng) * 2.5 - 1.25) / static_cast<double>(s);
    wv.ky = two_pi * (detail::uniform_unit(rng) * 2.5 - 1.25) / static_cast<double>(s);
    wv.shift = two_pi * detail::uniform_unit(rng);
    wv.amp = 0.5 + detail::uniform_unit(rng);
  }

  struct Patch {
    std::size_t x0, y0, w, h;
    double offset;
  };
  std::vector<Patch> patches(6);
  for (auto& p : patches) {
    p.w = detail::uniform_index(rng, s / 8, s / 3);
    p.h = detail::uniform_index(rng, s / 8, s / 3);
    p.x0 = detail::uniform_index(rng, 0, s - p.w);
    p.y0 = detail::uniform_index(rng, 0, s - p.h);
    p.offset = (detail::uniform_unit(rng) < 0.5 ? -1.0 : 1.0) * (1.5 + detail::uniform_unit(rng));
  }

  std::vector<double> raw(s * s);
  for (std::size_t y = 0; y < s; ++y) {
    for (std::size_t x = 0; x < s; ++x) {
      double v = 0.0;
      for (const auto& wv : waves) v += wv.amp * std::sin(wv.kx * static_cast<double>(x) + wv.ky * static_cast<double>(y) + wv.shift);
      for (const auto& p : patches) {
        if (x >= p.x0 && x < p.x0 + p.w && y >= p.y0 && y < p.y0 + p.h) v += p.offset;
      }
      raw[y * s + x] = v;
    }
  }
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  const double low = *lo;
  const double span = *hi - *lo;
  RealGrid phase(spec.image_size, spec.image_size, 0.0);
  for (std::size_t y = 0; y < s; ++y) {
    for (std::size_t x = 0; x < s; ++x) {
      phase(b.x0 + x, b.y0 + y) = span > 0.0 ? spec.phase_range * (raw[y * s + x] - low) / span : 0.0;
    }
  }
  return detail::unit_phase_object(phase, support);
}

inline ComplexField make_phantom(const PhantomSpec& spec) {
  return spec.kind == PhantomKind::BinaryPhase ? binary_phase_phantom(spec) : gray_phase_phantom(spec);
}

/// Fourier magnitude data of an object.
inline MagnitudeData synthesize_magnitude(const ComplexField& object) {
  return magnitude_of(forward_transform(object));
}

/// Flip-conjugate replica: conj(g(W-1-x, H-1-y)).
inline ComplexField twin_of(const ComplexField& g) {
  const std::size_t w = g.width();
  const std::size_t h = g.height();
  ComplexField out(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) out(x, y) = std::conj(g(w - 1 - x, h - 1 - y));
  }
  return out;
}

namespace detail {

/// sum over mask of a * conj(b)
inline complex_t masked_inner(const ComplexField& a, const ComplexField& b, const SupportMask& mask) {
  complex_t s{};
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (mask[i]) s += a[i] * std::conj(b[i]);
  }
  return s;
}

inline double masked_norm(const ComplexField& a, const SupportMask& mask) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (mask[i]) s += std::norm(a[i]);
  }
  return std::sqrt(s);
}

/// Field minus its mean over the mask (zero outside the mask).
inline ComplexField centered(const ComplexField& a, const SupportMask& mask) {
  complex_t mean{};
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (mask[i]) {
      mean += a[i];
      ++n;
    }
  }
  mean /= static_cast<double>(n);
  ComplexField out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (mask[i]) out[i] = a[i] - mean;
  }
  return out;
}

}  // namespace detail

/// Removes the constant phase offset between recon and truth on the mask.
inline ComplexField align_global_phase(const ComplexField& recon, const ComplexField& truth, const SupportMask& mask) {
  require_same_shape(recon, truth, "align_global_phase");
  require_same_shape(mask, truth, "align_global_phase");
  const complex_t overlap = detail::masked_inner(recon, truth, mask);
  if (overlap == complex_t{}) throw std::domain_error("align_global_phase: fields have zero overlap");
  const complex_t rot = std::conj(overlap) / std::abs(overlap);
  ComplexField out(recon.width(), recon.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = recon[i] * rot;
  return out;
}

/**
 * Normalized correlations of recon with the truth and with its twin over
 * the mask, after subtracting each field's masked mean. The mean of a pure
 * phase object is shared (up to a global phase) by the object and its twin,
 * so it carries no information about which of the two is present.
 */
inline TwinMetrics twin_correlations(const ComplexField& recon, const ComplexField& truth, const SupportMask& mask,
                                     double twin_threshold = kDefaultTwinThreshold) {
  require_same_shape(recon, truth, "twin_correlations");
  require_same_shape(mask, truth, "twin_correlations");
  const auto r = detail::centered(recon, mask);
  const auto t = detail::centered(truth, mask);
  const auto w = detail::centered(twin_of(truth), mask);
  const double nr = detail::masked_norm(r, mask);
  const double nt = detail::masked_norm(t, mask);
  const double nw = detail::masked_norm(w, mask);
  if (nr == 0.0 || nt == 0.0 || nw == 0.0) throw std::domain_error("twin_correlations: degenerate norm");
  TwinMetrics m;
  m.c_up = std::min(1.0, std::abs(detail::masked_inner(r, t, mask)) / (nr * nt));
  m.c_twin = std::min(1.0, std::abs(detail::masked_inner(r, w, mask)) / (nr * nw));
  m.twin_present = std::min(m.c_up, m.c_twin) > twin_threshold;
  return m;
}

inline double detail::self_twin_correlation(const ComplexField& g, const SupportMask& support) {
  const auto a = centered(g, support);
  const auto t = centered(twin_of(g), support);
  const double na = masked_norm(a, support);
  const double nt = masked_norm(t, support);
  if (na == 0.0 || nt == 0.0) return 1.0;
  return std::abs(masked_inner(a, t, support)) / (na * nt);
}

inline double wrap_phase(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a < 0.0) a += two_pi;
  return a - std::numbers::pi;
}

/// RMS of the wrapped phase difference over the mask after global-phase alignment.
inline double phase_rmse(const ComplexField& recon, const ComplexField& truth, const SupportMask& mask) {
  const auto aligned = align_global_phase(recon, truth, mask);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < aligned.size(); ++i) {
    if (!mask[i]) continue;
    const double d = wrap_phase(std::arg(aligned[i]) - std::arg(truth[i]));
    sum += d * d;
    ++n;
  }
  return std::sqrt(sum / static_cast<double>(n));
}

/// Phase RMSE against whichever of truth and its twin fits better; both are
/// valid solutions of the same magnitude data.
inline double best_phase_rmse(const ComplexField& recon, const ComplexField& truth, const SupportMask& mask) {
  return std::min(phase_rmse(recon, truth, mask), phase_rmse(recon, twin_of(truth), mask));
}

struct RunSummaryRow {
  std::uint64_t seed = 0;
  double final_tv = 0.0;
  double final_penalty = 0.0;
  TwinMetrics twin;
};

struct RunStatistics {
  std::size_t runs = 0;
  double tv_mean = 0.0;
  double tv_std = 0.0;
  double penalty_mean = 0.0;
  double penalty_std = 0.0;
  std::size_t twin_count = 0;
  double twin_fraction = 0.0;
  std::vector<RunSummaryRow> rows;
};

/// Mean and sample (n-1) standard deviation; std is 0 for a single value.
inline std::pair<double, double> mean_and_std(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("mean_and_std: no values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

inline RunStatistics run_statistics(const std::vector<RunReport>& reports, const ComplexField& truth,
                                    const SupportMask& mask, double twin_threshold = kDefaultTwinThreshold) {
  if (reports.empty()) throw std::invalid_argument("run_statistics: no reports");
  RunStatistics stats;
  stats.runs = reports.size();
  std::vector<double> tvs;
  std::vector<double> penalties;
  for (const auto& r : reports) {
    RunSummaryRow row;
    row.seed = r.seed;
    row.final_tv = tv_value(r.final_field, mask);
    row.final_penalty = r.penalty_trace.empty() ? row.final_tv : r.penalty_trace.back();
    row.twin = r.twin_metrics ? *r.twin_metrics : twin_correlations(r.final_field, truth, mask, twin_threshold);
    if (row.twin.twin_present) ++stats.twin_count;
    tvs.push_back(row.final_tv);
    penalties.push_back(row.final_penalty);
    stats.rows.push_back(row);
  }
  std::tie(stats.tv_mean, stats.tv_std) = mean_and_std(tvs);
  std::tie(stats.penalty_mean, stats.penalty_std) = mean_and_std(penalties);
  stats.twin_fraction = static_cast<double>(stats.twin_count) / static_cast<double>(stats.runs);
  return stats;
}

}  // namespace sparsephase
