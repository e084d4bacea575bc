#include "masklift/geometry.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "masklift/errors.h"
#include "masklift/spatial_grid.h"

namespace masklift {

void PointCloud::validate() const {
  if (positions.empty()) throw DataError("point cloud is empty");
  if (colors.size() != positions.size()) {
    throw DataError("point cloud: colors/positions length mismatch");
  }
  if (!gt_instance.empty() && gt_instance.size() != positions.size()) {
    throw DataError("point cloud: gt_instance/positions length mismatch");
  }
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!positions[i].allFinite()) {
      throw DataError("point cloud: non-finite coordinate at point " +
                      std::to_string(i));
    }
  }
  for (int id : gt_instance) {
    if (id < -1) throw DataError("point cloud: gt_instance below -1");
  }
}

Vec3 CameraFrame::camera_center() const {
  const Eigen::Matrix3d r = world_to_camera.topLeftCorner<3, 3>();
  return -r.transpose() * world_to_camera.topRightCorner<3, 1>();
}

void CameraFrame::validate() const {
  if (!(intrinsics.fx > 0.0) || !(intrinsics.fy > 0.0)) {
    throw DataError("camera frame: fx and fy must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw DataError("camera frame: image size must be positive");
  }
  if (depth.size() != static_cast<std::size_t>(width) * height) {
    throw DataError("camera frame: depth buffer is " +
                    std::to_string(depth.size()) + " values, expected " +
                    std::to_string(static_cast<std::size_t>(width) * height));
  }
  const Eigen::Matrix3d r = world_to_camera.topLeftCorner<3, 3>();
  if (!world_to_camera.allFinite() ||
      (r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() >
          1e-6 ||
      std::abs(r.determinant() - 1.0) > 1e-6) {
    throw DataError("camera frame: extrinsics are not a rigid transform");
  }
  for (float d : depth) {
    if (!(d >= 0.0f) || !std::isfinite(d)) {
      throw DataError("camera frame: depth values must be finite and >= 0");
    }
  }
}

Pixel pixel_of(const Vec3& p, const Intrinsics& k) {
  // std::lround rounds half away from zero.
  const double u = k.fx * p.x() / p.z() + k.cx;
  const double v = k.fy * p.y() / p.z() + k.cy;
  return Pixel{static_cast<int>(std::lround(v)),
               static_cast<int>(std::lround(u))};
}

Vec3 backproject(const CameraFrame& frame, int row, int col, double depth) {
  const Intrinsics& k = frame.intrinsics;
  const Vec3 cam((col - k.cx) * depth / k.fx, (row - k.cy) * depth / k.fy,
                 depth);
  const Eigen::Matrix3d r = frame.world_to_camera.topLeftCorner<3, 3>();
  const Vec3 t = frame.world_to_camera.topRightCorner<3, 1>();
  return r.transpose() * (cam - t);
}

namespace {

bool project_one(const Vec3& world, const CameraFrame& frame,
                 double depth_tolerance, Pixel* out) {
  const Vec3 cam = frame.to_camera(world);
  if (!(cam.z() > 0.0)) return false;
  const Pixel px = pixel_of(cam, frame.intrinsics);
  if (!frame.in_bounds(px.row, px.col)) return false;
  const double d = frame.depth_at(px.row, px.col);
  if (!(d > 0.0)) return false;
  if (std::abs(cam.z() - d) > depth_tolerance) return false;
  *out = px;
  return true;
}

void check_projection_args(const CameraFrame& frame, double depth_tolerance) {
  if (!(frame.intrinsics.fx > 0.0) || !(frame.intrinsics.fy > 0.0)) {
    throw std::invalid_argument("project_points: fx and fy must be positive");
  }
  if (!(depth_tolerance > 0.0)) {
    throw std::invalid_argument("project_points: depth tolerance must be > 0");
  }
}

}  // namespace

PixelSet project_points(std::span<const Vec3> positions,
                        std::span<const int> subset, const CameraFrame& frame,
                        double depth_tolerance) {
  check_projection_args(frame, depth_tolerance);
  std::vector<int> sorted;
  if (!std::is_sorted(subset.begin(), subset.end())) {
    sorted.assign(subset.begin(), subset.end());
    std::sort(sorted.begin(), sorted.end());
    subset = sorted;
  }
  PixelSet out;
  int last = -1;
  for (int idx : subset) {
    if (idx == last) continue;
    last = idx;
    if (idx < 0 || idx >= static_cast<int>(positions.size())) {
      throw std::out_of_range("project_points: point index out of range");
    }
    Pixel px;
    if (project_one(positions[idx], frame, depth_tolerance, &px)) {
      out.push_back({px.row, px.col, idx});
    }
  }
  return out;
}

PixelSet project_points(std::span<const Vec3> positions,
                        const CameraFrame& frame, double depth_tolerance) {
  check_projection_args(frame, depth_tolerance);
  PixelSet out;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    Pixel px;
    if (project_one(positions[i], frame, depth_tolerance, &px)) {
      out.push_back({px.row, px.col, static_cast<int>(i)});
    }
  }
  return out;
}

std::vector<int> fps_sample(std::span<const Vec3> centroids, int count,
                            const std::vector<bool>& eligible) {
  if (count < 1) throw std::invalid_argument("fps_sample: count must be >= 1");
  if (eligible.size() != centroids.size()) {
    throw std::invalid_argument("fps_sample: eligibility mask size mismatch");
  }
  std::vector<int> pool;
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    if (eligible[i]) pool.push_back(static_cast<int>(i));
  }
  if (pool.empty()) throw std::invalid_argument("empty sample pool");

  const std::size_t want = std::min<std::size_t>(count, pool.size());
  std::vector<int> picks{pool.front()};
  std::vector<double> min_dist(pool.size(),
                               std::numeric_limits<double>::infinity());
  std::vector<bool> taken(pool.size(), false);
  taken[0] = true;
  while (picks.size() < want) {
    const Vec3& last = centroids[picks.back()];
    std::size_t best = pool.size();
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (taken[j]) continue;
      min_dist[j] = std::min(min_dist[j], (centroids[pool[j]] - last).norm());
      if (best == pool.size() || min_dist[j] > min_dist[best]) best = j;
    }
    taken[best] = true;
    picks.push_back(pool[best]);
  }
  return picks;
}

std::vector<std::vector<int>> knn_centroids(std::span<const Vec3> centroids,
                                            int k) {
  if (k < 1) throw std::invalid_argument("knn_centroids: k must be >= 1");
  const int n = static_cast<int>(centroids.size());
  std::vector<std::vector<int>> out(n);
  const int take = std::min(k, std::max(n - 1, 0));
  std::vector<std::pair<double, int>> dist;
  for (int i = 0; i < n; ++i) {
    dist.clear();
    for (int j = 0; j < n; ++j) {
      if (j != i) dist.emplace_back((centroids[j] - centroids[i]).squaredNorm(), j);
    }
    std::partial_sort(dist.begin(), dist.begin() + take, dist.end());
    out[i].reserve(take);
    for (int m = 0; m < take; ++m) out[i].push_back(dist[m].second);
  }
  return out;
}

std::vector<Vec3> estimate_normals(const PointCloud& cloud, int k) {
  if (k < 3) throw std::invalid_argument("estimate_normals: k must be >= 3");
  const std::size_t n = cloud.size();
  if (n <= static_cast<std::size_t>(k)) {
    throw std::invalid_argument("estimate_normals: need more than k points");
  }
  const SpatialGrid grid(cloud.positions,
                         SpatialGrid::suggest_cell_size(cloud.positions));
  std::vector<Vec3> normals(n, Vec3::UnitZ());
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<int> nb = grid.knn(cloud.positions[i], k + 1);
    Vec3 mean = Vec3::Zero();
    for (int j : nb) mean += cloud.positions[j];
    mean /= static_cast<double>(nb.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int j : nb) {
      const Vec3 d = cloud.positions[j] - mean;
      cov += d * d.transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    const Vec3 ev = eig.eigenvalues();  // ascending
    if (!(ev[2] > 0.0) || ev[1] <= 1e-9 * ev[2]) continue;  // rank < 2
    Vec3 normal = eig.eigenvectors().col(0).normalized();
    int dominant = 0;
    normal.cwiseAbs().maxCoeff(&dominant);
    if (normal[dominant] < 0.0) normal = -normal;
    normals[i] = normal;
  }
  return normals;
}

}  // namespace masklift
