#pragma once

#include <span>
#include <vector>

#include "masklift/geometry.h"
#include "masklift/superpoints.h"

namespace masklift {

// Occlusion-tested projection of every point into every working view,
// computed once per scene. Views are addressed by position in the working
// list; frame_of() maps a position back to the scene frame index.
class ProjectionTable {
 public:
  ProjectionTable(const PointCloud& cloud, SuperpointPartition partition,
                  std::span<const CameraFrame> frames, std::vector<int> views,
                  double depth_tolerance, int threads = 1);

  int view_count() const { return static_cast<int>(views_.size()); }
  int frame_of(int view) const { return views_[view]; }
  const std::vector<int>& frames() const { return views_; }
  // Working position of a scene frame index, or -1.
  int view_of_frame(int frame) const;

  const CameraFrame& frame(int view) const { return frames_[views_[view]]; }
  double depth_tolerance() const { return depth_tolerance_; }

  // Linear pixel index (row * W + col) of a point in a view, or -1.
  int pixel(int view, int point) const {
    return pixels_[static_cast<std::size_t>(view) * point_count_ + point];
  }
  // |rho| of a superpoint in a view.
  int count(int view, int superpoint) const {
    return counts_[static_cast<std::size_t>(view) * superpoint_count_ +
                   superpoint];
  }
  // rho of a superpoint in a view.
  PixelSet projection(int view, int superpoint) const;

  const SuperpointPartition& partition() const { return partition_; }

 private:
  std::span<const CameraFrame> frames_;
  SuperpointPartition partition_;
  std::vector<int> views_;
  double depth_tolerance_;
  int point_count_;
  int superpoint_count_;
  std::vector<int> pixels_;
  std::vector<int> counts_;
};

}  // namespace masklift
