#include "masklift/view_select.h"

#include <stdexcept>

#include "masklift/errors.h"

namespace masklift {

double scale_factor(int superpoint, int view,
                    const std::vector<std::vector<int>>& neighbors,
                    const ProjectionTable& table) {
  const std::vector<int>& nb = neighbors.at(superpoint);
  if (nb.empty()) {
    throw std::invalid_argument("scale_factor: superpoint has no neighbors");
  }
  const SuperpointPartition& part = table.partition();
  double sum = 0.0;
  for (int k : nb) {
    sum += static_cast<double>(table.count(view, k)) / part.size_of(k);
  }
  return sum / static_cast<double>(nb.size());
}

ViewHistogram view_histogram(int superpoint,
                             const std::vector<std::vector<int>>& neighbors,
                             const ProjectionTable& table) {
  ViewHistogram h;
  const int n = table.view_count();
  h.values.resize(n);
  h.raw_counts.resize(n);
  h.scales.resize(n);
  for (int v = 0; v < n; ++v) {
    h.raw_counts[v] = table.count(v, superpoint);
    // Single-superpoint scenes have no neighbors; visibility alone decides.
    h.scales[v] = neighbors.at(superpoint).empty()
                      ? 1.0
                      : scale_factor(superpoint, v, neighbors, table);
    h.values[v] = h.raw_counts[v] * h.scales[v];
  }
  return h;
}

PivotChoice pivot_view(int superpoint,
                       const std::vector<std::vector<int>>& neighbors,
                       const ProjectionTable& table) {
  if (table.view_count() < 1) {
    throw std::invalid_argument("pivot_view: no working views");
  }
  PivotChoice choice;
  choice.histogram = view_histogram(superpoint, neighbors, table);
  const auto& values = choice.histogram.values;
  int best = 0;
  for (int v = 1; v < static_cast<int>(values.size()); ++v) {
    if (values[v] > values[best]) best = v;
  }
  if (!(values[best] > 0.0)) throw LiftError("no pivot view");
  choice.view = best;
  choice.frame = table.frame_of(best);
  return choice;
}

}  // namespace masklift
