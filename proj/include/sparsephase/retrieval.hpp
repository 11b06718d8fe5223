#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>

#include "sparsephase/config.hpp"
#include "sparsephase/fourier.hpp"
#include "sparsephase/grid.hpp"
#include "sparsephase/sparsity.hpp"

namespace sparsephase {

/// I.i.d. uniform phases on [0, 2pi), reproducible for a given seed.
inline RealGrid random_phase_init(std::size_t width, std::size_t height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RealGrid phase(width, height);
  constexpr double kUnit = 1.0 / 9007199254740992.0;  // 2^-53
  for (auto& v : phase.data()) v = 2.0 * std::numbers::pi * static_cast<double>(rng() >> 11) * kUnit;
  return phase;
}

/// Inside the support keep g_hat, outside apply g_prev - beta * g_hat.
inline ComplexField hio_update(const ComplexField& g_prev, const ComplexField& g_hat, const SupportMask& mask,
                               double beta) {
  require_same_shape(g_prev, g_hat, "hio_update");
  require_same_shape(mask, g_hat, "hio_update");
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("hio_update: beta must lie in (0, 1]");
  ComplexField out(g_hat.width(), g_hat.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mask[i] ? g_hat[i] : g_prev[i] - beta * g_hat[i];
  return out;
}

inline ComplexField zero_outside_support(const ComplexField& field, const SupportMask& mask) {
  require_same_shape(mask, field, "zero_outside_support");
  ComplexField out = field;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!mask[i]) out[i] = complex_t{};
  }
  return out;
}

/// Support used for the first `iterations` outer iterations before switching
/// to the full support (e.g. a triangular truncation).
struct SupportSchedule {
  SupportMask early_mask;
  int iterations = 0;
};

/// The in-support penalty recorded in traces: TV unless Huber is selected.
inline double support_penalty(const ComplexField& field, const SupportMask& mask, const PenaltySpec& spec) {
  if (spec.kind != PenaltyKind::Huber) return tv_value(field, mask);
  const double delta =
      spec.delta_rule.kind == DeltaRule::Kind::Fixed ? spec.delta_rule.value : select_delta(field, mask);
  return huber_value(field, delta, mask);
}

namespace detail {

/// Called with the iteration index and the spectrum right after magnitude replacement.
using SpectrumObserver = std::function<void(int, const Spectrum&)>;

/**
 * Shared loop for every engine. The residual trace measures the support-
 * projected iterate: HIO leaves decaying feedback outside the support, so
 * the raw iterate would never match the data even at a fixed point.
 */
inline RunReport run_engine(const MagnitudeData& magnitude, const SupportMask& mask, const RetrievalConfig& config,
                            const std::optional<SupportSchedule>& schedule, const SpectrumObserver& observe = {}) {
  require_same_shape(mask, magnitude, "retrieval");
  if (schedule) require_same_shape(schedule->early_mask, magnitude, "retrieval schedule");
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  const std::size_t w = magnitude.width();
  const std::size_t h = magnitude.height();
  FourierTransform ft(w, h);

  const auto phase0 = random_phase_init(w, h, config.seed);
  Spectrum spectrum(w, h);
  for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] = std::polar(magnitude[i], phase0[i]);

  RunReport report;
  report.seed = config.seed;
  report.penalty_trace.reserve(static_cast<std::size_t>(config.n_iterations));
  report.fourier_residual_trace.reserve(static_cast<std::size_t>(config.n_iterations));

  ComplexField g(w, h);  // g_0 = 0
  for (int n = 0; n < config.n_iterations; ++n) {
    const SupportMask& active = (schedule && n < schedule->iterations) ? schedule->early_mask : mask;
    const ComplexField g_hat = ft.inverse(spectrum);
    ComplexField next = hio_update(g, g_hat, active, config.beta);
    if (config.penalty.kind != PenaltyKind::None) next = sparsity_descent(next, active, config.penalty);
    if (!all_finite(next)) throw NonFiniteError("retrieval produced non-finite samples at iteration " + std::to_string(n));
    report.penalty_trace.push_back(support_penalty(next, mask, config.penalty));

    report.fourier_residual_trace.push_back(magnitude_residual(ft.forward(zero_outside_support(next, mask)), magnitude));
    spectrum = impose_magnitude(ft.forward(next), magnitude);
    if (observe) observe(n, spectrum);
    g = std::move(next);
  }

  report.final_field = zero_outside_support(g, mask);
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace detail

/// Plain HIO with the support as the only object-domain constraint.
inline RunReport run_hio(const MagnitudeData& magnitude, const SupportMask& mask, const RetrievalConfig& config) {
  if (config.penalty.kind != PenaltyKind::None) throw std::invalid_argument("run_hio expects penalty kind none");
  return detail::run_engine(magnitude, mask, config, std::nullopt);
}

/// Plain HIO whose first iterations use a different (e.g. truncated) support.
inline RunReport run_hio(const MagnitudeData& magnitude, const SupportMask& mask, const RetrievalConfig& config,
                         const SupportSchedule& schedule) {
  if (config.penalty.kind != PenaltyKind::None) throw std::invalid_argument("run_hio expects penalty kind none");
  return detail::run_engine(magnitude, mask, config, schedule);
}

/**
 * HIO with a sparsity step. Each outer iteration: inverse transform of the
 * current spectrum, HIO update, N inner descent steps on the support,
 * forward transform, magnitude replacement.
 */
inline RunReport run_sparse_hio(const MagnitudeData& magnitude, const SupportMask& mask,
                                const RetrievalConfig& config) {
  if (config.penalty.kind == PenaltyKind::None) {
    throw std::invalid_argument("run_sparse_hio expects a TV or Huber penalty");
  }
  return detail::run_engine(magnitude, mask, config, std::nullopt);
}

}  // namespace sparsephase
