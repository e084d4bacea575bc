#pragma once

#include <vector>

#include "masklift/projection_table.h"

namespace masklift {

inline constexpr int kDefaultKappa = 8;

// Neighbor-weighted visibility histogram of one superpoint over the working
// views: values[v] = raw_counts[v] * scales[v].
struct ViewHistogram {
  std::vector<double> values;
  std::vector<int> raw_counts;
  std::vector<double> scales;
};

// Mean visible fraction |rho_v^k| / |S_k| over the neighbors of a superpoint.
double scale_factor(int superpoint, int view,
                    const std::vector<std::vector<int>>& neighbors,
                    const ProjectionTable& table);

ViewHistogram view_histogram(int superpoint,
                             const std::vector<std::vector<int>>& neighbors,
                             const ProjectionTable& table);

struct PivotChoice {
  int view = -1;   // working position
  int frame = -1;  // scene frame index
  ViewHistogram histogram;
};

// Argmax of the histogram, lowest view on ties. Throws LiftError("no pivot
// view") when the histogram is zero everywhere.
PivotChoice pivot_view(int superpoint,
                       const std::vector<std::vector<int>>& neighbors,
                       const ProjectionTable& table);

}  // namespace masklift
