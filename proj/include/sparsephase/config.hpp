#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sparsephase/grid.hpp"

namespace sparsephase {

enum class PenaltyKind { None, TV, Huber };

inline std::string_view to_string(PenaltyKind k) {
  switch (k) {
    case PenaltyKind::None: return "none";
    case PenaltyKind::TV: return "tv";
    case PenaltyKind::Huber: return "huber";
  }
  return "?";
}

/// How the Huber transition scale is chosen in each descent step.
struct DeltaRule {
  enum class Kind { MedianInSupport, Fixed };
  Kind kind = Kind::MedianInSupport;
  double value = 0.0;  // used only for Fixed

  static DeltaRule median() { return {}; }
  static DeltaRule fixed(double v) { return {Kind::Fixed, v}; }
};

struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::None;
  int n_inner_steps = 30;
  /// TV smoothing, relative to the max modulus of the descended region.
  double epsilon = 1e-8;
  DeltaRule delta_rule;
  double ls_alpha = 0.3;
  double ls_shrink = 0.5;
  double t_init = 1.0;

  void validate() const {
    if (n_inner_steps < 0) throw std::invalid_argument("n_inner_steps must be >= 0");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    if (!(ls_alpha > 0.0 && ls_alpha < 0.5)) throw std::invalid_argument("ls_alpha must lie in (0, 0.5)");
    if (!(ls_shrink > 0.0 && ls_shrink < 1.0)) throw std::invalid_argument("ls_shrink must lie in (0, 1)");
    if (!(t_init > 0.0)) throw std::invalid_argument("t_init must be > 0");
    if (delta_rule.kind == DeltaRule::Kind::Fixed && !(delta_rule.value > 0.0)) {
      throw std::invalid_argument("fixed delta must be > 0");
    }
  }
};

struct RetrievalConfig {
  double beta = 0.9;
  int n_iterations = 500;
  std::uint64_t seed = 0;
  PenaltySpec penalty;

  void validate() const {
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in (0, 1]");
    if (n_iterations < 1) throw std::invalid_argument("n_iterations must be >= 1");
    penalty.validate();
  }
};

struct TwinMetrics {
  double c_up = 0.0;
  double c_twin = 0.0;
  bool twin_present = false;
};

struct RunReport {
  ComplexField final_field;
  std::vector<double> penalty_trace;
  std::vector<double> fourier_residual_trace;
  std::optional<TwinMetrics> twin_metrics;
  std::uint64_t seed = 0;
  double wall_time = 0.0;
};

}  // namespace sparsephase
