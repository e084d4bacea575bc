#include "masklift/ablation.h"

#include "masklift/parallel.h"

namespace masklift {

std::vector<RefineStrategy> ablation_strategies() {
  return {RefineStrategy::parse("all_lifted"), RefineStrategy::parse("top_k(1)"),
          RefineStrategy::parse("top_k(5)"), RefineStrategy::parse("top_k(10)"),
          RefineStrategy::parse("dp")};
}

std::vector<SharedTrackObjectives> shared_track_objectives(
    const PreparedScene& prepared, const TrackProvider& provider,
    const PipelineConfig& config, std::span<const RefineStrategy> strategies) {
  std::vector<SeedOutcome> outcomes;
  if (const auto* fixed = provider.fixed_tracks()) {
    for (const MaskTrack& t : *fixed) {
      outcomes.push_back(process_track(prepared, t, config, 0));
    }
  } else {
    PipelineState state(prepared.partition().count());
    run_round(state, prepared, provider, config, &outcomes);
  }

  std::vector<const VisibilityMatrix*> lifted;
  std::vector<int> seeds;
  for (const SeedOutcome& o : outcomes) {
    if (!o.visibility) continue;
    lifted.push_back(&*o.visibility);
    seeds.push_back(o.seed_superpoint);
  }
  std::vector<SharedTrackObjectives> rows(lifted.size());
  parallel_for(static_cast<int>(lifted.size()), config.threads, [&](int i) {
    rows[i].seed_superpoint = seeds[i];
    for (const RefineStrategy& s : strategies) {
      rows[i].objective.push_back(refine(*lifted[i], s).objective);
    }
  });
  return rows;
}

}  // namespace masklift
