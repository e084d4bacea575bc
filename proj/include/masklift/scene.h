#pragma once

#include <string>
#include <vector>

#include "masklift/geometry.h"
#include "masklift/tracks.h"

namespace masklift {

// Posed RGB-D sequence with its reconstructed cloud. All frames share one
// set of intrinsics and one image size.
struct Scene {
  PointCloud cloud;
  std::vector<CameraFrame> frames;
  std::vector<InstanceRender> renders;  // per frame, or empty

  bool has_renders() const { return !renders.empty(); }
  // Throws DataError on inconsistent frame sizes, intrinsics or renders.
  void validate() const;
};

// Directory layout:
//   cloud.txt            x y z r g b gt_instance   (one point per line)
//   intrinsics.txt       fx fy cx cy W H
//   frames/%04d.pose     16 reals, row-major world-to-camera
//   frames/%04d.depth    little-endian float32, row-major H*W
//   frames/%04d.inst     little-endian int32, row-major H*W (optional)
void save_scene(const Scene& scene, const std::string& dir);
Scene load_scene(const std::string& dir);

}  // namespace masklift
