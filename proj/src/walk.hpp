#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "common.hpp"
#include "environment.hpp"
#include "lattice.hpp"

namespace rwre {

inline constexpr int64_t kDefaultStepBudget = 1'000'000'000;

// Count, per level index in [lo, hi], of transitions from the level set into
// its frontal boundary (excursions to the forward side) before the walk stops.
struct LevelTracking {
  double spacing = 0;
  int64_t lo = 0;
  int64_t hi = -1;
};

// Stopping rule for a simulated walk. Threshold mode stops on leaving the
// region back < x . l' < front with |x . R(e_k)| < lateral, classified like a
// box boundary (lateral wins at corners). Level mode stops on entering one of
// the level sets adjacent to the start's level.
struct StopSpec {
  Eigen::MatrixXd rotation;
  double back = -std::numeric_limits<double>::infinity();
  double front = std::numeric_limits<double>::infinity();
  double lateral = std::numeric_limits<double>::infinity();
  bool level_mode = false;
  double spacing = 0;
  std::optional<LevelTracking> track;
};

struct WalkOutcome {
  Site exit;
  BoundaryClass exit_class = BoundaryClass::Lateral;
  int64_t steps = 0;
  std::vector<std::pair<int64_t, int64_t>> excursions;  // (level, count), tracked levels only
  uint64_t stream = 0;
};

// One quenched trajectory; deterministic in (seed, stream) via counter-based
// draws, so replicas schedule-independently reproduce.
WalkOutcome simulate_walk(const TransitionField& field, const Site& start, const StopSpec& stop,
                          uint64_t seed, uint64_t stream, int64_t budget = kDefaultStepBudget);

}  // namespace rwre
