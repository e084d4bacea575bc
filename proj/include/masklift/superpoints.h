#pragma once

#include <vector>

#include "masklift/geometry.h"

namespace masklift {

struct SuperpointParams {
  int knn_k = 10;
  double merge_threshold = 0.05;
  int min_size = 20;
};

// Disjoint superpoints covering every point. Ids are dense and ordered by
// each superpoint's lowest member index.
struct SuperpointPartition {
  std::vector<int> assignment;            // point -> superpoint
  std::vector<std::vector<int>> members;  // superpoint -> ascending points
  std::vector<Vec3> centroids;

  int count() const { return static_cast<int>(members.size()); }
  int size_of(int superpoint) const {
    return static_cast<int>(members[superpoint].size());
  }

  // Rebuilds members and centroids from an assignment, relabeling densely by
  // first member index.
  static SuperpointPartition from_assignment(const std::vector<int>& labels,
                                             std::span<const Vec3> positions);
};

// Normal-based graph segmentation: k-NN edges weighted 1 - |n_i . n_j|,
// Felzenszwalb merging with threshold merge_threshold / |component|, then
// components below min_size are absorbed by their cheapest neighbor.
SuperpointPartition partition_superpoints(const PointCloud& cloud,
                                          std::span<const Vec3> normals,
                                          const SuperpointParams& params);

}  // namespace masklift
