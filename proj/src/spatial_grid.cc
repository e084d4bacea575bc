#include "masklift/spatial_grid.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace masklift {

std::size_t SpatialGrid::CellHash::operator()(
    const Eigen::Vector3i& c) const noexcept {
  std::size_t h = static_cast<std::size_t>(c.x()) * 73856093u;
  h ^= static_cast<std::size_t>(c.y()) * 19349663u;
  h ^= static_cast<std::size_t>(c.z()) * 83492791u;
  return h;
}

SpatialGrid::SpatialGrid(std::span<const Vec3> points, double cell_size)
    : points_(points), cell_size_(cell_size) {
  if (!(cell_size > 0.0)) {
    throw std::invalid_argument("SpatialGrid: cell size must be positive");
  }
  min_cell_.setConstant(std::numeric_limits<int>::max());
  max_cell_.setConstant(std::numeric_limits<int>::min());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Eigen::Vector3i c = cell_of(points[i]);
    min_cell_ = min_cell_.cwiseMin(c);
    max_cell_ = max_cell_.cwiseMax(c);
    cells_[c].push_back(static_cast<int>(i));
  }
}

double SpatialGrid::suggest_cell_size(std::span<const Vec3> points,
                                      double points_per_cell) {
  if (points.size() < 2) return 1.0;
  Vec3 lo = points[0];
  Vec3 hi = points[0];
  for (const Vec3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 ext = (hi - lo).cwiseMax(Vec3::Constant(1e-6));
  // Treat the cloud as a surface spanning the two largest extents.
  double e[3] = {ext.x(), ext.y(), ext.z()};
  std::sort(e, e + 3);
  const double area = e[1] * e[2] * 2.0;
  // A thin line-like cloud would otherwise get needle-sized cells.
  const double spacing =
      std::max(std::sqrt(area / static_cast<double>(points.size())),
               e[2] / static_cast<double>(points.size()));
  return std::max(spacing * std::sqrt(points_per_cell), 1e-6);
}

Eigen::Vector3i SpatialGrid::cell_of(const Vec3& p) const {
  return Eigen::Vector3i(static_cast<int>(std::floor(p.x() / cell_size_)),
                         static_cast<int>(std::floor(p.y() / cell_size_)),
                         static_cast<int>(std::floor(p.z() / cell_size_)));
}

std::vector<int> SpatialGrid::knn(const Vec3& query, int k,
                                  int exclude) const {
  std::vector<int> out;
  if (k <= 0 || points_.empty()) return out;
  const int available =
      static_cast<int>(points_.size()) -
      (exclude >= 0 && exclude < static_cast<int>(points_.size()) ? 1 : 0);
  const int want = std::min(k, available);
  if (want <= 0) return out;

  using Entry = std::pair<double, int>;
  std::vector<Entry> best;
  best.reserve(static_cast<std::size_t>(want) + 1);
  const auto consider = [&](int idx) {
    if (idx == exclude) return;
    const Entry e{(points_[idx] - query).squaredNorm(), idx};
    if (static_cast<int>(best.size()) < want) {
      best.insert(std::upper_bound(best.begin(), best.end(), e), e);
    } else if (e < best.back()) {
      best.pop_back();
      best.insert(std::upper_bound(best.begin(), best.end(), e), e);
    }
  };

  const Eigen::Vector3i center = cell_of(query);
  const int max_ring = (max_cell_ - min_cell_).cwiseAbs().maxCoeff() +
                       (center - min_cell_).cwiseAbs().maxCoeff() + 2;
  for (int ring = 0; ring <= max_ring; ++ring) {
    // Once a shell has more cells than the grid holds, scan everything.
    const double shell = std::pow(2.0 * ring + 1.0, 3) - std::pow(2.0 * ring - 1.0, 3);
    if (ring > 0 && shell > static_cast<double>(cells_.size())) {
      best.clear();
      for (int idx = 0; idx < static_cast<int>(points_.size()); ++idx) consider(idx);
      break;
    }
    for (int dx = -ring; dx <= ring; ++dx) {
      for (int dy = -ring; dy <= ring; ++dy) {
        for (int dz = -ring; dz <= ring; ++dz) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) {
            continue;
          }
          const auto it = cells_.find(center + Eigen::Vector3i(dx, dy, dz));
          if (it == cells_.end()) continue;
          for (int idx : it->second) consider(idx);
        }
      }
    }
    if (static_cast<int>(best.size()) == want) {
      // Everything outside the searched block is at least this far away.
      const Vec3 local = query / cell_size_ - center.cast<double>();
      double margin = std::numeric_limits<double>::max();
      for (int a = 0; a < 3; ++a) {
        margin = std::min(margin, local[a] + ring);
        margin = std::min(margin, ring + 1.0 - local[a]);
      }
      margin *= cell_size_;
      if (best.back().first < margin * margin) break;
    }
  }
  out.reserve(best.size());
  for (const Entry& e : best) out.push_back(e.second);
  return out;
}

}  // namespace masklift
