#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "masklift/projection_table.h"
#include "masklift/tracks.h"

namespace masklift {

inline constexpr double kDefaultTau = 0.5;
inline constexpr int kMaxEnumeratedViews = 20;
inline constexpr int kMaxEnumeratedCandidates = 20;

enum class OverlapMode {
  kContainment,  // |rho ∩ m| / |rho| over projected points
  kIou,          // |P ∩ m| / |P ∪ m| over the unique pixels P of rho
};

// Projected points of one superpoint inside / outside a view's mask.
struct ViewCounts {
  std::int64_t inside = 0;
  std::int64_t outside = 0;

  bool operator==(const ViewCounts&) const = default;
};

// Per-view visible superpoint sets of one track, plus the inside/outside
// counts of every candidate (superpoint visible in some view) in every track
// view. Everything the refinement objective needs.
struct VisibilityMatrix {
  int superpoint_count = 0;
  std::vector<int> views;                  // scene frame indices, ascending
  std::vector<std::vector<int>> rows;      // per view: ascending superpoints
  std::vector<int> candidates;             // ascending union of rows
  std::vector<std::vector<ViewCounts>> counts;  // [view][candidate position]

  int view_count() const { return static_cast<int>(views.size()); }
  int candidate_position(int superpoint) const;  // -1 when not a candidate
  // Rebuilds `candidates` from `rows` and checks the shape of `counts`.
  void finalize_candidates();
  void validate() const;
};

struct Solution {
  std::vector<bool> theta;  // over all L superpoints
  std::int64_t objective = 0;

  std::vector<int> selected() const;
  bool operator==(const Solution&) const = default;
};

// Per-step record of the sweep: chosen option and running objective.
struct DpTrace {
  std::vector<bool> added;                 // option 2 taken at step t
  std::vector<std::int64_t> objective;     // C_t
  std::vector<std::int64_t> add_objective; // C_t^2
};

enum class StrategyKind { kDp, kBruteViews, kBruteSuperpoints, kTopK, kAllLifted };

struct RefineStrategy {
  StrategyKind kind = StrategyKind::kDp;
  int k = 0;  // kTopK only

  static RefineStrategy parse(const std::string& text);
  std::string name() const;
  bool operator==(const RefineStrategy&) const = default;
};

// Requires every track view to be a working view of `table`.
VisibilityMatrix visibility_matrix(const MaskTrack& track,
                                   const ProjectionTable& table,
                                   double tau = kDefaultTau,
                                   OverlapMode mode = OverlapMode::kContainment);

// Inside-minus-outside count of the projected points of the union of the
// selected superpoints, summed over the track views, evaluated directly from
// projections and masks.
std::int64_t objective_value(const std::vector<bool>& theta,
                             const MaskTrack& track,
                             const ProjectionTable& table);

// The same objective from the cached counts of a visibility matrix. Selected
// superpoints outside the candidate set contribute nothing.
std::int64_t objective_value(const std::vector<bool>& theta,
                             const VisibilityMatrix& vis);

// Per-view retain-or-add-all sweep in ascending view order; a tie keeps the
// current solution.
Solution dp_refine(const VisibilityMatrix& vis, DpTrace* trace = nullptr);

// Best union of visible sets over all view subsets; ties to the smaller
// view bitmask. Throws ConfigError above max_views.
Solution brute_force_views(const VisibilityMatrix& vis,
                           int max_views = kMaxEnumeratedViews);

// Best subset of candidate superpoints; ties to the smaller bitmask.
// Throws ConfigError above max_candidates.
Solution brute_force_superpoints(const VisibilityMatrix& vis,
                                 int max_candidates = kMaxEnumeratedCandidates);

// brute_force_views over the k views whose own visible sets score highest.
Solution top_k_views_refine(const VisibilityMatrix& vis, int k);

// Union of every visible set.
Solution all_lifted(const VisibilityMatrix& vis);

Solution refine(const VisibilityMatrix& vis, const RefineStrategy& strategy);

}  // namespace masklift
