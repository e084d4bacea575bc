#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "masklift/optimize.h"
#include "masklift/superpoints.h"
#include "masklift/tracks.h"
#include "masklift/view_select.h"

namespace masklift {

// Every knob of a segmentation run. Superpoint defaults are tuned for
// desk-scale rooms.
struct PipelineConfig {
  double tau = kDefaultTau;
  double depth_tolerance = kDefaultDepthTolerance;
  int view_stride = 10;
  int kappa = kDefaultKappa;
  int samples_per_round = 30;
  int max_rounds = 100;
  double dedup_iou = 0.9;
  RefineStrategy refine_strategy;
  OverlapMode overlap_mode = OverlapMode::kContainment;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  int normal_k = 10;
  SuperpointParams superpoints;
  int threads = 1;  // never changes results

  void validate() const;

  // Applies one `key = value` setting. Throws ConfigError on unknown keys or
  // unparsable values.
  void set(const std::string& key, const std::string& value);

  // All settings as (key, value) text, in a fixed order; feeding them back
  // through set() reproduces the config.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

// Reads a flat `key = value` file. Blank lines and '#' comments are skipped.
std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::string& path);
std::vector<std::pair<std::string, std::string>> parse_config_text(
    const std::string& text);

std::string overlap_mode_name(OverlapMode mode);
OverlapMode parse_overlap_mode(const std::string& text);

}  // namespace masklift
