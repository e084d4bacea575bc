#include "masklift/superpoints.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "masklift/spatial_grid.h"

namespace masklift {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n), size_(n, 1), internal_(n, 0.0) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // Joins two roots; the lower root id survives so results do not depend on
  // union order within a tie.
  int join(int a, int b, double weight) {
    if (a > b) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    internal_[a] = std::max({internal_[a], internal_[b], weight});
    return a;
  }

  int size(int root) const { return size_[root]; }
  double internal(int root) const { return internal_[root]; }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
  std::vector<double> internal_;
};

struct Edge {
  double weight;
  int a;
  int b;
  bool operator<(const Edge& o) const {
    return std::tie(weight, a, b) < std::tie(o.weight, o.a, o.b);
  }
};

}  // namespace

SuperpointPartition SuperpointPartition::from_assignment(
    const std::vector<int>& labels, std::span<const Vec3> positions) {
  if (labels.size() != positions.size()) {
    throw std::invalid_argument("superpoint labels/positions size mismatch");
  }
  SuperpointPartition out;
  out.assignment.assign(labels.size(), -1);
  std::vector<int> remap;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int label = labels[i];
    if (label < 0) throw std::invalid_argument("negative superpoint label");
    if (static_cast<std::size_t>(label) >= remap.size()) {
      remap.resize(label + 1, -1);
    }
    if (remap[label] < 0) {
      remap[label] = static_cast<int>(out.members.size());
      out.members.emplace_back();
    }
    out.assignment[i] = remap[label];
    out.members[remap[label]].push_back(static_cast<int>(i));
  }
  out.centroids.reserve(out.members.size());
  for (const auto& m : out.members) {
    Vec3 c = Vec3::Zero();
    for (int i : m) c += positions[i];
    out.centroids.push_back(c / static_cast<double>(m.size()));
  }
  return out;
}

SuperpointPartition partition_superpoints(const PointCloud& cloud,
                                          std::span<const Vec3> normals,
                                          const SuperpointParams& params) {
  if (params.knn_k < 1 || !(params.merge_threshold > 0.0) ||
      params.min_size < 1) {
    throw std::invalid_argument("partition_superpoints: invalid parameters");
  }
  const int n = static_cast<int>(cloud.size());
  if (normals.size() != cloud.size()) {
    throw std::invalid_argument("partition_superpoints: normals size mismatch");
  }
  if (n < params.knn_k + 1) {
    return SuperpointPartition::from_assignment(std::vector<int>(n, 0),
                                                cloud.positions);
  }

  const SpatialGrid grid(cloud.positions,
                         SpatialGrid::suggest_cell_size(cloud.positions));
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) * params.knn_k);
  for (int i = 0; i < n; ++i) {
    for (int j : grid.knn(cloud.positions[i], params.knn_k, i)) {
      const double w =
          std::max(0.0, 1.0 - std::abs(normals[i].dot(normals[j])));
      edges.push_back({w, std::min(i, j), std::max(i, j)});
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const Edge& x, const Edge& y) {
                            return x.a == y.a && x.b == y.b;
                          }),
              edges.end());

  DisjointSets sets(n);
  const double k = params.merge_threshold;
  for (const Edge& e : edges) {
    const int ra = sets.find(e.a);
    const int rb = sets.find(e.b);
    if (ra == rb) continue;
    const double ta = sets.internal(ra) + k / sets.size(ra);
    const double tb = sets.internal(rb) + k / sets.size(rb);
    if (e.weight <= std::min(ta, tb)) sets.join(ra, rb, e.weight);
  }

  // Small components merge into their lowest-weight neighbor.
  for (const Edge& e : edges) {
    const int ra = sets.find(e.a);
    const int rb = sets.find(e.b);
    if (ra == rb) continue;
    if (sets.size(ra) < params.min_size || sets.size(rb) < params.min_size) {
      sets.join(ra, rb, e.weight);
    }
  }

  // Components the k-NN graph never connected to anything else: attach each
  // undersized one to the component holding its nearest outside point.
  if (params.min_size > 1 && n >= params.min_size) {
    bool changed = true;
    while (changed) {
      changed = false;
      std::vector<std::vector<int>> groups(n);
      for (int i = 0; i < n; ++i) groups[sets.find(i)].push_back(i);
      for (int root = 0; root < n; ++root) {
        const auto& g = groups[root];
        if (g.empty() || static_cast<int>(g.size()) >= params.min_size) continue;
        double best = std::numeric_limits<double>::infinity();
        int target = -1;
        for (int i : g) {
          for (int j = 0; j < n; ++j) {
            if (sets.find(j) == root) continue;
            const double d = (cloud.positions[i] - cloud.positions[j]).squaredNorm();
            if (d < best) {
              best = d;
              target = j;
            }
          }
        }
        if (target >= 0) {
          sets.join(root, sets.find(target), 1.0);
          changed = true;
          break;
        }
      }
    }
  }

  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = sets.find(i);
  return SuperpointPartition::from_assignment(labels, cloud.positions);
}

}  // namespace masklift
