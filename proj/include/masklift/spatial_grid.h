#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "masklift/geometry.h"

namespace masklift {

// Uniform hash grid over a fixed point set for exact k-nearest-neighbor
// queries. Results are ordered by (distance, index).
class SpatialGrid {
 public:
  SpatialGrid(std::span<const Vec3> points, double cell_size);

  // Cell size giving roughly `points_per_cell` points per occupied cell for a
  // surface-like cloud.
  static double suggest_cell_size(std::span<const Vec3> points,
                                  double points_per_cell = 4.0);

  // k nearest points to `query`, optionally skipping index `exclude`.
  std::vector<int> knn(const Vec3& query, int k, int exclude = -1) const;

 private:
  struct CellHash {
    std::size_t operator()(const Eigen::Vector3i& c) const noexcept;
  };
  struct CellEq {
    bool operator()(const Eigen::Vector3i& a,
                    const Eigen::Vector3i& b) const noexcept {
      return a == b;
    }
  };

  Eigen::Vector3i cell_of(const Vec3& p) const;

  std::span<const Vec3> points_;
  double cell_size_;
  Eigen::Vector3i min_cell_;
  Eigen::Vector3i max_cell_;
  std::unordered_map<Eigen::Vector3i, std::vector<int>, CellHash, CellEq>
      cells_;
};

}  // namespace masklift
