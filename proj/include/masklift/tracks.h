#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "masklift/geometry.h"
#include "masklift/projection_table.h"

namespace masklift {

inline constexpr int kDefaultMemoryWindow = 7;
inline constexpr int kDefaultPromptCount = 3;

struct Mask2D {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // row-major, 0 or 1

  Mask2D() = default;
  Mask2D(int w, int h) : width(w), height(h), bits(std::size_t(w) * h, 0) {}

  bool at(int row, int col) const {
    return bits[std::size_t(row) * width + col] != 0;
  }
  void set(int row, int col, bool value = true) {
    bits[std::size_t(row) * width + col] = value ? 1 : 0;
  }
  std::size_t popcount() const;

  bool operator==(const Mask2D&) const = default;
};

// Per-pixel ground-truth object ids of one frame, -1 for background.
struct InstanceRender {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> ids;

  int at(int row, int col) const { return ids[std::size_t(row) * width + col]; }
  bool operator==(const InstanceRender&) const = default;
};

// One object's masks keyed by scene frame index. Views without an entry are
// views where the object is not tracked.
struct MaskTrack {
  int track_id = 0;
  double score = 0.0;
  std::map<int, Mask2D> masks;
  int pivot_view = -1;       // scene frame index, always a key of `masks`
  int seed_superpoint = -1;  // -1 when unknown (external tracks)

  bool operator==(const MaskTrack&) const = default;
};

struct TrackerQuery {
  int pivot_view = -1;  // scene frame index
  std::vector<Pixel> point_prompts;
  std::map<int, Pixel> reprompt_points;  // scene frame index -> pixel
  int seed_superpoint = -1;
};

// Prompt pixels chosen by 2D farthest point sampling over the superpoint's
// projection in the pivot (`prompt_count` distinct pixels, fewer if the
// projection is smaller), plus one re-prompt pixel at every view where the
// superpoint reappears after more than `memory_window` invisible views,
// walking outward from the pivot in both directions.
// Throws LiftError("superpoint invisible in pivot").
TrackerQuery build_tracker_query(int superpoint, const ProjectionTable& table,
                                 int pivot_view_position,
                                 int memory_window = kDefaultMemoryWindow,
                                 int prompt_count = kDefaultPromptCount);

// Re-prompt views from a per-view visibility pattern over working positions.
std::vector<int> reprompt_positions(const std::vector<bool>& visible,
                                    int pivot, int memory_window);

struct NoiseSpec {
  double p_drop = 0.0;  // per-view probability of losing the mask
  int r_morph = 0;      // dilation/erosion radius in pixels
  double p_flip = 0.0;  // flip probability inside the boundary band
  int memory_window = kDefaultMemoryWindow;

  bool is_identity() const {
    return p_drop == 0.0 && r_morph == 0 && p_flip == 0.0;
  }
  void validate() const;
};

// Ground truth a tracker may consult.
struct TrackContext {
  const ProjectionTable* table = nullptr;
  std::span<const InstanceRender> renders;  // indexed by scene frame
};

class TrackProvider {
 public:
  virtual ~TrackProvider() = default;
  virtual MaskTrack track(const TrackerQuery& query,
                          const TrackContext& context) const = 0;
  // Providers backed by a fixed set of tracks expose it here; the pipeline
  // then lifts those tracks directly instead of seeding queries.
  virtual const std::vector<MaskTrack>* fixed_tracks() const { return nullptr; }
};

// Exact instance renders of the object under the majority of prompts.
// Throws LiftError("prompts hit no instance").
MaskTrack oracle_track(const TrackerQuery& query, const TrackContext& context);

// oracle_track degraded by drops, morphology, boundary flips and memory
// loss, reproducible for a given rng_seed.
MaskTrack noisy_track(const TrackerQuery& query, const TrackContext& context,
                      const NoiseSpec& noise, std::uint64_t rng_seed);

class OracleTracker final : public TrackProvider {
 public:
  MaskTrack track(const TrackerQuery& query,
                  const TrackContext& context) const override {
    return oracle_track(query, context);
  }
};

class NoisyTracker final : public TrackProvider {
 public:
  NoisyTracker(NoiseSpec noise, std::uint64_t seed)
      : noise_(noise), seed_(seed) {}
  MaskTrack track(const TrackerQuery& query,
                  const TrackContext& context) const override;

 private:
  NoiseSpec noise_;
  std::uint64_t seed_;
};

class FileTracker final : public TrackProvider {
 public:
  explicit FileTracker(std::vector<MaskTrack> tracks)
      : tracks_(std::move(tracks)) {}
  static FileTracker load(const std::string& path);

  // Track with the query's seed superpoint, else the first one pivoted at
  // the query's pivot view.
  MaskTrack track(const TrackerQuery& query,
                  const TrackContext& context) const override;
  const std::vector<MaskTrack>* fixed_tracks() const override {
    return &tracks_;
  }

 private:
  std::vector<MaskTrack> tracks_;
};

// Run lengths alternating zeros and ones, starting with zeros.
std::vector<std::int64_t> rle_encode(const Mask2D& mask);
Mask2D rle_decode(std::span<const std::int64_t> runs, int width, int height);

// Track file: a header line "masklift-tracks 1 <W> <H>", then one
// tab-separated line per track: track_id, score, pivot_view, "t:RLE" per
// view, and an optional trailing "seed=<superpoint>".
void write_tracks(const std::vector<MaskTrack>& tracks, int width, int height,
                  const std::string& path);
std::vector<MaskTrack> read_tracks(const std::string& path);
std::string format_tracks(const std::vector<MaskTrack>& tracks, int width,
                          int height);
std::vector<MaskTrack> parse_tracks(const std::string& text);

}  // namespace masklift
