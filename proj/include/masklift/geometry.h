#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace masklift {

using Vec3 = Eigen::Vector3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kDefaultDepthTolerance = 0.1;

struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Vec3> colors;     // in [0,1], same length as positions
  std::vector<int> gt_instance;  // empty when unlabeled; -1 = background

  std::size_t size() const { return positions.size(); }
  bool has_labels() const { return !gt_instance.empty(); }

  // Throws DataError when a field length, coordinate or label is invalid.
  void validate() const;
};

struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  bool operator==(const Intrinsics&) const = default;
};

struct Pixel {
  int row = 0;
  int col = 0;

  bool operator==(const Pixel&) const = default;
  auto operator<=>(const Pixel&) const = default;
};

// One posed depth view. Depth is row-major H*W in meters, 0 = invalid.
struct CameraFrame {
  Intrinsics intrinsics;
  Mat4 world_to_camera = Mat4::Identity();
  int width = 0;
  int height = 0;
  std::vector<float> depth;

  float depth_at(int row, int col) const {
    return depth[static_cast<std::size_t>(row) * width + col];
  }
  bool in_bounds(int row, int col) const {
    return row >= 0 && row < height && col >= 0 && col < width;
  }
  Vec3 to_camera(const Vec3& world) const {
    return world_to_camera.topLeftCorner<3, 3>() * world +
           world_to_camera.topRightCorner<3, 1>();
  }
  Vec3 camera_center() const;

  // Checks intrinsics, rigidity of the pose and the depth buffer size.
  void validate() const;
};

struct ProjectedPoint {
  int row = 0;
  int col = 0;
  int point_index = 0;

  bool operator==(const ProjectedPoint&) const = default;
};

// Ordered by strictly increasing point_index.
using PixelSet = std::vector<ProjectedPoint>;

// Pixel a camera-space point falls on, before bounds checks. Rounds half away
// from zero. Only meaningful for z > 0.
Pixel pixel_of(const Vec3& camera_point, const Intrinsics& intrinsics);

// World point seen at (row, col) with camera-space depth `depth`.
Vec3 backproject(const CameraFrame& frame, int row, int col, double depth);

// Projects the subset of `positions` given by `subset` into `frame`, keeping
// points in front of the camera whose rounded pixel is in bounds, has a valid
// depth, and agrees with the depth map within `depth_tolerance`.
PixelSet project_points(std::span<const Vec3> positions,
                        std::span<const int> subset, const CameraFrame& frame,
                        double depth_tolerance = kDefaultDepthTolerance);

// Same, over every point.
PixelSet project_points(std::span<const Vec3> positions,
                        const CameraFrame& frame,
                        double depth_tolerance = kDefaultDepthTolerance);

// Greedy farthest point sampling. Starts from the lowest eligible index; each
// later pick maximizes the minimum distance to the picks so far, ties to the
// lowest index. Throws std::invalid_argument("empty sample pool").
std::vector<int> fps_sample(std::span<const Vec3> centroids, int count,
                            const std::vector<bool>& eligible);

// For each centroid, its min(k, L-1) nearest other centroids, ties to the
// lowest index.
std::vector<std::vector<int>> knn_centroids(std::span<const Vec3> centroids,
                                            int k);

// PCA normals over k nearest neighbors (the point itself included). The
// component with the largest magnitude is made positive. Rank-deficient
// neighborhoods get (0,0,1).
std::vector<Vec3> estimate_normals(const PointCloud& cloud, int k);

}  // namespace masklift
