#include "masklift/pipeline.h"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "masklift/errors.h"
#include "masklift/parallel.h"
#include "masklift/view_select.h"

namespace masklift {
namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

Proposal make_proposal(const SuperpointPartition& part, const Solution& sol,
                       const MaskTrack& track, int round) {
  Proposal p;
  p.point_mask.assign(part.assignment.size(), false);
  p.superpoint_ids = sol.selected();
  for (int l : p.superpoint_ids) {
    for (int i : part.members[l]) p.point_mask[i] = true;
  }
  p.score = track.score;
  p.seed_superpoint = track.seed_superpoint;
  p.pivot_view = track.pivot_view;
  p.round = round;
  p.objective = sol.objective;
  return p;
}

}  // namespace

int Proposal::point_count() const {
  return static_cast<int>(std::count(point_mask.begin(), point_mask.end(), true));
}

std::vector<int> subsample_views(int frame_count, int stride) {
  if (stride < 1) throw std::invalid_argument("view stride must be >= 1");
  std::vector<int> views;
  for (int t = 0; t < frame_count; t += stride) views.push_back(t);
  return views;
}

PreparedScene prepare_scene(const Scene& scene, const PipelineConfig& config,
                            std::optional<SuperpointPartition> partition) {
  config.validate();
  scene.validate();
  PreparedScene prepared;
  prepared.scene = &scene;
  if (!partition) {
    if (static_cast<int>(scene.cloud.size()) > config.normal_k) {
      prepared.normals = estimate_normals(scene.cloud, config.normal_k);
    } else {
      prepared.normals.assign(scene.cloud.size(), Vec3::UnitZ());
    }
    partition = partition_superpoints(scene.cloud, prepared.normals,
                                      config.superpoints);
  } else if (partition->assignment.size() != scene.cloud.size()) {
    throw DataError("superpoint partition does not cover the point cloud");
  }
  prepared.neighbors = knn_centroids(partition->centroids, config.kappa);
  prepared.views =
      subsample_views(static_cast<int>(scene.frames.size()), config.view_stride);
  prepared.table = std::make_unique<ProjectionTable>(
      scene.cloud, std::move(*partition), scene.frames, prepared.views,
      config.depth_tolerance, config.threads);
  return prepared;
}

SeedOutcome process_track(const PreparedScene& prepared, MaskTrack track,
                          const PipelineConfig& config, int round) {
  SeedOutcome out;
  out.seed_superpoint = track.seed_superpoint;
  out.visibility = visibility_matrix(track, *prepared.table, config.tau,
                                     config.overlap_mode);
  out.solution = refine(*out.visibility, config.refine_strategy);
  if (out.solution->selected().empty()) {
    out.failure = "empty refined mask";
  } else {
    out.proposal =
        make_proposal(prepared.partition(), *out.solution, track, round);
  }
  out.track = std::move(track);
  return out;
}

SeedOutcome process_seed(const PreparedScene& prepared, int superpoint,
                         const TrackProvider& provider,
                         const PipelineConfig& config, int round) {
  try {
    const PivotChoice pivot =
        pivot_view(superpoint, prepared.neighbors, *prepared.table);
    const TrackerQuery query = build_tracker_query(
        superpoint, *prepared.table, pivot.view, config.noise.memory_window);
    MaskTrack track = provider.track(query, prepared.context());
    track.seed_superpoint = superpoint;
    return process_track(prepared, std::move(track), config, round);
  } catch (const LiftError& e) {
    SeedOutcome out;
    out.seed_superpoint = superpoint;
    out.failure = e.what();
    return out;
  }
}

std::vector<bool> PipelineState::free_mask() const {
  std::vector<bool> out(covered.size());
  for (std::size_t i = 0; i < covered.size(); ++i) {
    out[i] = !covered[i] && !consumed[i];
  }
  return out;
}

int PipelineState::free_count() const {
  const auto m = free_mask();
  return static_cast<int>(std::count(m.begin(), m.end(), true));
}

RoundReport run_round(PipelineState& state, const PreparedScene& prepared,
                      const TrackProvider& provider,
                      const PipelineConfig& config,
                      std::vector<SeedOutcome>* outcomes) {
  RoundReport report;
  report.round = state.round;
  const std::vector<bool> free = state.free_mask();
  if (std::find(free.begin(), free.end(), true) == free.end()) {
    ++state.round;
    return report;
  }
  const std::vector<int> seeds = fps_sample(
      prepared.partition().centroids, config.samples_per_round, free);

  std::vector<SeedOutcome> results(seeds.size());
  parallel_for(static_cast<int>(seeds.size()), config.threads, [&](int i) {
    results[i] =
        process_seed(prepared, seeds[i], provider, config, state.round);
  });

  report.seeds = static_cast<int>(seeds.size());
  for (SeedOutcome& r : results) {
    state.consumed[r.seed_superpoint] = true;
    if (!r.proposal) {
      ++report.unliftable;
      continue;
    }
    r.proposal->track_id = state.next_track_id++;
    if (r.track) r.track->track_id = r.proposal->track_id;
    for (int l : r.proposal->superpoint_ids) state.covered[l] = true;
    state.accepted.push_back(*r.proposal);
    ++report.proposals;
  }
  ++state.round;
  if (outcomes) *outcomes = std::move(results);
  return report;
}

std::vector<Proposal> deduplicate(std::vector<Proposal> proposals,
                                  const SuperpointPartition& partition,
                                  double threshold) {
  std::stable_sort(proposals.begin(), proposals.end(),
                   [](const Proposal& a, const Proposal& b) {
                     return std::make_tuple(-a.score, a.round, a.seed_superpoint) <
                            std::make_tuple(-b.score, b.round, b.seed_superpoint);
                   });
  std::vector<Proposal> kept;
  std::vector<int> kept_sizes;
  for (Proposal& p : proposals) {
    int size = 0;
    for (int l : p.superpoint_ids) size += partition.size_of(l);
    bool duplicate = false;
    for (std::size_t k = 0; k < kept.size() && !duplicate; ++k) {
      const auto& a = p.superpoint_ids;
      const auto& b = kept[k].superpoint_ids;
      int inter = 0;
      for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
        if (a[i] < b[j]) {
          ++i;
        } else if (b[j] < a[i]) {
          ++j;
        } else {
          inter += partition.size_of(a[i]);
          ++i;
          ++j;
        }
      }
      const int uni = size + kept_sizes[k] - inter;
      duplicate = uni > 0 && static_cast<double>(inter) / uni > threshold;
    }
    if (!duplicate) {
      kept.push_back(std::move(p));
      kept_sizes.push_back(size);
    }
  }
  return kept;
}

PipelineResult run_pipeline(const PreparedScene& prepared,
                            const TrackProvider& provider,
                            const PipelineConfig& config) {
  config.validate();
  PipelineResult result;
  const auto rounds_start = std::chrono::steady_clock::now();
  PipelineState state(prepared.partition().count());

  if (const auto* fixed = provider.fixed_tracks()) {
    std::vector<SeedOutcome> results(fixed->size());
    parallel_for(static_cast<int>(fixed->size()), config.threads, [&](int i) {
      results[i] = process_track(prepared, (*fixed)[i], config, 0);
    });
    RoundReport report;
    report.seeds = static_cast<int>(results.size());
    for (SeedOutcome& r : results) {
      if (!r.proposal) {
        ++report.unliftable;
        continue;
      }
      r.proposal->track_id = r.track->track_id;
      state.accepted.push_back(*r.proposal);
      ++report.proposals;
    }
    result.rounds.push_back(report);
  } else {
    while (state.round < config.max_rounds && state.free_count() > 0) {
      result.rounds.push_back(run_round(state, prepared, provider, config));
    }
    result.free_left = state.free_count();
    result.round_cap_hit = result.free_left > 0;
  }
  result.timings.rounds_s = seconds_since(rounds_start);

  const auto dedup_start = std::chrono::steady_clock::now();
  result.raw_proposals = static_cast<int>(state.accepted.size());
  result.proposals = deduplicate(std::move(state.accepted),
                                 prepared.partition(), config.dedup_iou);
  result.timings.dedup_s = seconds_since(dedup_start);
  return result;
}

PipelineResult run_pipeline(const Scene& scene, const TrackProvider& provider,
                            const PipelineConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const PreparedScene prepared = prepare_scene(scene, config);
  const double prepare_s = seconds_since(start);
  PipelineResult result = run_pipeline(prepared, provider, config);
  result.timings.prepare_s = prepare_s;
  return result;
}

}  // namespace masklift
