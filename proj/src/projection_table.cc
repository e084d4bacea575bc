#include "masklift/projection_table.h"

#include <cmath>
#include <stdexcept>

#include "masklift/parallel.h"

namespace masklift {

ProjectionTable::ProjectionTable(const PointCloud& cloud,
                                 SuperpointPartition partition,
                                 std::span<const CameraFrame> frames,
                                 std::vector<int> views,
                                 double depth_tolerance, int threads)
    : frames_(frames),
      partition_(std::move(partition)),
      views_(std::move(views)),
      depth_tolerance_(depth_tolerance),
      point_count_(static_cast<int>(cloud.size())),
      superpoint_count_(partition_.count()) {
  if (!(depth_tolerance > 0.0)) {
    throw std::invalid_argument("depth tolerance must be > 0");
  }
  for (int f : views_) {
    if (f < 0 || f >= static_cast<int>(frames.size())) {
      throw std::out_of_range("working view refers to a missing frame");
    }
  }
  const int v_count = view_count();
  pixels_.assign(static_cast<std::size_t>(v_count) * point_count_, -1);
  counts_.assign(static_cast<std::size_t>(v_count) * superpoint_count_, 0);
  parallel_for(v_count, threads, [&](int v) {
    const CameraFrame& frame = frames_[views_[v]];
    int* row = &pixels_[static_cast<std::size_t>(v) * point_count_];
    for (const ProjectedPoint& p :
         project_points(cloud.positions, frame, depth_tolerance_)) {
      row[p.point_index] = p.row * frame.width + p.col;
    }
    int* counts = &counts_[static_cast<std::size_t>(v) * superpoint_count_];
    for (int i = 0; i < point_count_; ++i) {
      if (row[i] >= 0) ++counts[partition_.assignment[i]];
    }
  });
}

int ProjectionTable::view_of_frame(int frame) const {
  for (int v = 0; v < view_count(); ++v) {
    if (views_[v] == frame) return v;
  }
  return -1;
}

PixelSet ProjectionTable::projection(int view, int superpoint) const {
  const int width = frame(view).width;
  PixelSet out;
  for (int i : partition_.members[superpoint]) {
    const int px = pixel(view, i);
    if (px >= 0) out.push_back({px / width, px % width, i});
  }
  return out;
}

}  // namespace masklift
