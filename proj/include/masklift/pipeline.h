#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "masklift/config.h"
#include "masklift/optimize.h"
#include "masklift/projection_table.h"
#include "masklift/scene.h"
#include "masklift/superpoints.h"
#include "masklift/tracks.h"

namespace masklift {

struct Proposal {
  std::vector<bool> point_mask;
  std::vector<int> superpoint_ids;  // ascending, nonempty
  double score = 0.0;
  int seed_superpoint = -1;
  int pivot_view = -1;
  int round = 0;
  std::int64_t objective = 0;
  int track_id = -1;

  int point_count() const;
};

// Frames 0, stride, 2*stride, ... of a sequence of `frame_count`.
std::vector<int> subsample_views(int frame_count, int stride);

// Per-scene state every round reads: normals, superpoints, the working
// views with their projections, and superpoint neighbors.
struct PreparedScene {
  const Scene* scene = nullptr;
  std::vector<Vec3> normals;
  std::vector<int> views;
  std::unique_ptr<ProjectionTable> table;
  std::vector<std::vector<int>> neighbors;

  const SuperpointPartition& partition() const { return table->partition(); }
  TrackContext context() const {
    return TrackContext{table.get(), scene->renders};
  }
};

// Validates the scene against the config before any work. `partition`
// overrides superpoint computation when given.
PreparedScene prepare_scene(
    const Scene& scene, const PipelineConfig& config,
    std::optional<SuperpointPartition> partition = std::nullopt);

// Everything produced for one track.
struct SeedOutcome {
  int seed_superpoint = -1;
  std::optional<MaskTrack> track;
  std::optional<VisibilityMatrix> visibility;
  std::optional<Solution> solution;
  std::optional<Proposal> proposal;
  std::string failure;  // why no proposal came out
};

// Pivot, query, track, lift and refine for one seed superpoint. Seed-level
// failures land in `failure`; other errors propagate.
SeedOutcome process_seed(const PreparedScene& prepared, int superpoint,
                         const TrackProvider& provider,
                         const PipelineConfig& config, int round);

// Lift and refine an existing track.
SeedOutcome process_track(const PreparedScene& prepared, MaskTrack track,
                          const PipelineConfig& config, int round);

struct PipelineState {
  std::vector<bool> covered;   // member of an accepted proposal
  std::vector<bool> consumed;  // already used as a seed
  int round = 0;
  std::vector<Proposal> accepted;
  int next_track_id = 0;

  explicit PipelineState(int superpoints)
      : covered(superpoints, false), consumed(superpoints, false) {}
  std::vector<bool> free_mask() const;
  int free_count() const;
};

struct RoundReport {
  int round = 0;
  int seeds = 0;
  int proposals = 0;
  int unliftable = 0;
};

// One round: farthest point sampling over free superpoints, then every seed
// through process_seed. Accepted proposals extend `state`.
RoundReport run_round(PipelineState& state, const PreparedScene& prepared,
                      const TrackProvider& provider,
                      const PipelineConfig& config,
                      std::vector<SeedOutcome>* outcomes = nullptr);

// Keeps the first of every group of proposals whose point IoU exceeds
// `threshold`, scanning by (score desc, round, seed). The result stays in
// that order.
std::vector<Proposal> deduplicate(std::vector<Proposal> proposals,
                                  const SuperpointPartition& partition,
                                  double threshold);

struct StageTimings {
  double prepare_s = 0.0;
  double rounds_s = 0.0;
  double dedup_s = 0.0;
};

struct PipelineResult {
  std::vector<Proposal> proposals;  // deduplicated, score descending
  std::vector<RoundReport> rounds;
  int raw_proposals = 0;
  bool round_cap_hit = false;  // stopped with free superpoints left
  int free_left = 0;
  StageTimings timings;
};

PipelineResult run_pipeline(const PreparedScene& prepared,
                            const TrackProvider& provider,
                            const PipelineConfig& config);
PipelineResult run_pipeline(const Scene& scene, const TrackProvider& provider,
                            const PipelineConfig& config);

}  // namespace masklift
