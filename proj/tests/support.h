#pragma once

// Shared fixtures and independent reference implementations for the tests.
// Nothing here calls into the code under test unless the name says so.

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "masklift/geometry.h"
#include "masklift/optimize.h"
#include "masklift/projection_table.h"
#include "masklift/superpoints.h"
#include "masklift/scene.h"
#include "masklift/synth.h"

namespace testutil {

using masklift::CameraFrame;
using masklift::Intrinsics;
using masklift::Mat4;
using masklift::Vec3;
using masklift::VisibilityMatrix;

inline CameraFrame flat_frame(int width, int height, double f, double cx,
                              double cy, float depth) {
  CameraFrame frame;
  frame.intrinsics = Intrinsics{f, f, cx, cy};
  frame.width = width;
  frame.height = height;
  frame.depth.assign(static_cast<std::size_t>(width) * height, depth);
  return frame;
}

inline Mat4 random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  std::uniform_real_distribution<double> shift(-3.0, 3.0);
  const Eigen::Matrix3d r =
      (Eigen::AngleAxisd(angle(rng), Vec3::UnitZ()) *
       Eigen::AngleAxisd(angle(rng) / 2, Vec3::UnitY()) *
       Eigen::AngleAxisd(angle(rng), Vec3::UnitX()))
          .toRotationMatrix();
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = r;
  m.topRightCorner<3, 1>() = Vec3(shift(rng), shift(rng), shift(rng));
  return m;
}

// Reference pixel rule: round half away from zero on both axes.
inline std::pair<int, int> reference_pixel(const Vec3& c, const Intrinsics& k) {
  return {static_cast<int>(std::lround(k.fy * c.y() / c.z() + k.cy)),
          static_cast<int>(std::lround(k.fx * c.x() / c.z() + k.cx))};
}

// Small room scene that builds in well under a second.
inline masklift::SceneSpec small_spec(int objects, std::uint64_t seed,
                                      int frames = 12) {
  masklift::SceneSpec spec;
  spec.object_count = objects;
  spec.seed = seed;
  spec.frame_count = frames;
  spec.width = 48;
  spec.height = 48;
  spec.density = 500.0;
  return spec;
}

// Random lifted instance: each candidate appears in at least one row and
// carries inside/outside counts in every view, visible or not.
inline VisibilityMatrix random_instance(std::mt19937_64& rng, int max_views,
                                        int max_candidates, int extra = 3) {
  std::uniform_int_distribution<int> view_n(1, max_views);
  std::uniform_int_distribution<int> cand_n(1, max_candidates);
  const int v_count = view_n(rng);
  const int c_count = cand_n(rng);
  VisibilityMatrix vis;
  vis.superpoint_count = c_count + extra;

  std::vector<int> ids(vis.superpoint_count);
  for (int i = 0; i < vis.superpoint_count; ++i) ids[i] = i;
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<int> cands(ids.begin(), ids.begin() + c_count);
  std::sort(cands.begin(), cands.end());

  std::bernoulli_distribution member(0.45);
  std::vector<std::set<int>> rows(v_count);
  for (int v = 0; v < v_count; ++v) {
    vis.views.push_back(3 * v + 1);
    for (int c : cands) {
      if (member(rng)) rows[v].insert(c);
    }
  }
  std::uniform_int_distribution<int> any_view(0, v_count - 1);
  for (int c : cands) {
    bool seen = false;
    for (const auto& r : rows) seen = seen || r.count(c);
    if (!seen) rows[any_view(rng)].insert(c);
  }
  for (const auto& r : rows) vis.rows.emplace_back(r.begin(), r.end());

  std::uniform_int_distribution<int> small(0, 12);
  std::uniform_int_distribution<int> large(5, 40);
  vis.counts.resize(v_count);
  for (int v = 0; v < v_count; ++v) {
    for (int c : cands) {
      const bool visible = std::count(vis.rows[v].begin(), vis.rows[v].end(), c);
      masklift::ViewCounts vc;
      vc.inside = visible ? large(rng) : small(rng);
      vc.outside = visible ? small(rng) : large(rng);
      vis.counts[v].push_back(vc);
    }
  }
  vis.finalize_candidates();
  return vis;
}

// Objective from cached counts, recomputed view by view.
inline std::int64_t reference_objective(const std::vector<bool>& theta,
                                        const VisibilityMatrix& vis) {
  std::int64_t total = 0;
  for (int v = 0; v < vis.view_count(); ++v) {
    std::int64_t in = 0;
    std::int64_t out = 0;
    for (std::size_t c = 0; c < vis.candidates.size(); ++c) {
      if (!theta[vis.candidates[c]]) continue;
      in += vis.counts[v][c].inside;
      out += vis.counts[v][c].outside;
    }
    total += in - out;
  }
  return total;
}

struct ReferenceStep {
  bool added = false;
  std::int64_t objective = 0;
  std::int64_t add_objective = 0;
};

// Retain-or-add-all sweep, simulated step by step.
inline std::vector<ReferenceStep> reference_dp(const VisibilityMatrix& vis,
                                               std::vector<bool>* final_theta) {
  std::vector<bool> theta(vis.superpoint_count, false);
  std::int64_t c = 0;
  std::vector<ReferenceStep> steps;
  for (int t = 0; t < vis.view_count(); ++t) {
    std::vector<bool> option2 = theta;
    for (int l : vis.rows[t]) option2[l] = true;
    const std::int64_t c1 = c;
    const std::int64_t c2 = reference_objective(option2, vis);
    ReferenceStep step;
    step.add_objective = c2;
    if (c1 >= c2) {
      step.added = false;
    } else {
      theta = option2;
      c = c2;
      step.added = true;
    }
    step.objective = c;
    steps.push_back(step);
  }
  if (final_theta) *final_theta = theta;
  return steps;
}

// Recursive enumeration of view subsets.
inline void enumerate_views(const VisibilityMatrix& vis, int t,
                            std::vector<bool>& theta, std::int64_t& best) {
  if (t == vis.view_count()) {
    best = std::max(best, reference_objective(theta, vis));
    return;
  }
  enumerate_views(vis, t + 1, theta, best);
  std::vector<bool> with = theta;
  for (int l : vis.rows[t]) with[l] = true;
  enumerate_views(vis, t + 1, with, best);
}

inline std::int64_t reference_best_views(const VisibilityMatrix& vis) {
  std::vector<bool> theta(vis.superpoint_count, false);
  std::int64_t best = 0;
  enumerate_views(vis, 0, theta, best);
  return best;
}

// Per-candidate net contribution; the exact optimum keeps the positive ones.
inline std::int64_t reference_best_superpoints(const VisibilityMatrix& vis) {
  std::int64_t best = 0;
  for (std::size_t c = 0; c < vis.candidates.size(); ++c) {
    std::int64_t net = 0;
    for (int v = 0; v < vis.view_count(); ++v) {
      net += vis.counts[v][c].inside - vis.counts[v][c].outside;
    }
    best += std::max<std::int64_t>(net, 0);
  }
  return best;
}

// Points laid out on distinct pixels of identity-pose frames at depth 1, one
// superpoint per block of consecutive points. Every pixel starts invalid, so
// nothing is visible until show() writes depth under a point.
struct Layout {
  int width = 32;
  int height = 32;
  masklift::PointCloud cloud;
  std::vector<CameraFrame> frames;
  std::vector<int> labels;
  std::vector<std::vector<int>> members;

  Layout(const std::vector<int>& sizes, int views, int w = 32, int h = 32)
      : width(w), height(h) {
    const double f = 20.0;
    const double c = (w - 1) / 2.0;
    int next = 0;
    for (std::size_t l = 0; l < sizes.size(); ++l) {
      members.emplace_back();
      for (int i = 0; i < sizes[l]; ++i) {
        const int row = next / w;
        const int col = next % w;
        ++next;
        cloud.positions.emplace_back((col - c) / f, (row - c) / f, 1.0);
        cloud.colors.push_back(Vec3::Constant(0.5));
        labels.push_back(static_cast<int>(l));
        members.back().push_back(static_cast<int>(cloud.positions.size()) - 1);
      }
    }
    for (int v = 0; v < views; ++v) frames.push_back(flat_frame(w, h, f, c, c, 0.0f));
  }

  // Pixel of point i.
  std::pair<int, int> pixel(int i) const { return {i / width, i % width}; }

  // Makes the first `count` points of superpoint l visible in view v.
  void show(int v, int l, int count) {
    for (int k = 0; k < count && k < static_cast<int>(members[l].size()); ++k) {
      const int i = members[l][k];
      frames[v].depth[i] = 1.0f;
    }
  }
  void show_all(int v, int l) { show(v, l, static_cast<int>(members[l].size())); }

  masklift::SuperpointPartition partition() const {
    return masklift::SuperpointPartition::from_assignment(labels, cloud.positions);
  }
  masklift::ProjectionTable table() const {
    std::vector<int> views(frames.size());
    for (std::size_t v = 0; v < frames.size(); ++v) views[v] = static_cast<int>(v);
    return masklift::ProjectionTable(cloud, partition(), frames, views, 0.1);
  }
};

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("masklift_test_" + name + "_" +
                    std::to_string(std::random_device{}()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil
