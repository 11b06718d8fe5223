#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "sparsephase/config.hpp"
#include "sparsephase/retrieval.hpp"

namespace sparsephase {

enum class Algorithm { Hio, HioTv, HioHuber };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Hio: return "hio";
    case Algorithm::HioTv: return "hio-tv";
    case Algorithm::HioHuber: return "hio-huber";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view name) {
  if (name == "hio") return Algorithm::Hio;
  if (name == "hio-tv") return Algorithm::HioTv;
  if (name == "hio-huber") return Algorithm::HioHuber;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "' (expected hio, hio-tv or hio-huber)");
}

inline PenaltyKind penalty_kind_of(Algorithm a) {
  switch (a) {
    case Algorithm::Hio: return PenaltyKind::None;
    case Algorithm::HioTv: return PenaltyKind::TV;
    case Algorithm::HioHuber: return PenaltyKind::Huber;
  }
  return PenaltyKind::None;
}

/// The template config with the penalty kind set for the algorithm.
inline RetrievalConfig config_for(Algorithm a, RetrievalConfig base, std::uint64_t seed) {
  base.penalty.kind = penalty_kind_of(a);
  base.seed = seed;
  return base;
}

inline RunReport run_algorithm(Algorithm a, const MagnitudeData& magnitude, const SupportMask& mask,
                               const RetrievalConfig& config, const std::optional<SupportSchedule>& schedule = {}) {
  if (config.penalty.kind != penalty_kind_of(a)) {
    throw std::invalid_argument("penalty kind does not match algorithm " + std::string(to_string(a)));
  }
  return detail::run_engine(magnitude, mask, config, schedule);
}

/**
 * Calls fn(i) for i in [0, n) on up to `jobs` threads. Work is claimed
 * from a shared counter, so which thread runs which index varies, but fn
 * must write only to its own slot.
 */
template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(jobs);
  for (unsigned j = 0; j < jobs; ++j) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

struct SweepCell {
  Algorithm algorithm = Algorithm::Hio;
  std::uint64_t seed = 0;
};

/// A cell's report, or the error that stopped it.
struct CellOutcome {
  SweepCell cell;
  std::optional<RunReport> report;
  std::string error;
  bool numerical_failure = false;
};

/// Runs every cell; outcomes come back in the order of `cells` whatever `jobs` is.
inline std::vector<CellOutcome> run_cells(const std::vector<SweepCell>& cells, const MagnitudeData& magnitude,
                                          const SupportMask& mask, const RetrievalConfig& base,
                                          const std::optional<SupportSchedule>& schedule, unsigned jobs) {
  std::vector<CellOutcome> out(cells.size());
  parallel_for(cells.size(), jobs, [&](std::size_t i) {
    out[i].cell = cells[i];
    try {
      out[i].report = run_algorithm(cells[i].algorithm, magnitude, mask, config_for(cells[i].algorithm, base, cells[i].seed),
                                    schedule);
    } catch (const NonFiniteError& e) {
      out[i].error = e.what();
      out[i].numerical_failure = true;
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

}  // namespace sparsephase
