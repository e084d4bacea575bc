#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "masklift/optimize.h"
#include "masklift/pipeline.h"

namespace masklift {

// all_lifted, top_k(1), top_k(5), top_k(10), dp.
std::vector<RefineStrategy> ablation_strategies();

// Objective reached by each strategy on one lifted track.
struct SharedTrackObjectives {
  int seed_superpoint = -1;
  std::vector<std::int64_t> objective;  // parallel to the strategy list
};

// Samples the first round's seeds once, obtains their tracks once, and
// refines every lifted track with every strategy, so rows differ only in the
// solver. Seeds that fail before lifting are skipped.
std::vector<SharedTrackObjectives> shared_track_objectives(
    const PreparedScene& prepared, const TrackProvider& provider,
    const PipelineConfig& config, std::span<const RefineStrategy> strategies);

}  // namespace masklift
