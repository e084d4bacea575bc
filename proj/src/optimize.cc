#include "masklift/optimize.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "masklift/errors.h"

namespace masklift {

int VisibilityMatrix::candidate_position(int superpoint) const {
  const auto it =
      std::lower_bound(candidates.begin(), candidates.end(), superpoint);
  if (it == candidates.end() || *it != superpoint) return -1;
  return static_cast<int>(it - candidates.begin());
}

void VisibilityMatrix::finalize_candidates() {
  candidates.clear();
  for (const auto& row : rows) {
    candidates.insert(candidates.end(), row.begin(), row.end());
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  validate();
}

void VisibilityMatrix::validate() const {
  if (rows.size() != views.size() || counts.size() != views.size()) {
    throw InvariantError("visibility matrix: per-view arrays disagree");
  }
  if (!std::is_sorted(views.begin(), views.end())) {
    throw InvariantError("visibility matrix: views not ascending");
  }
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (counts[v].size() != candidates.size()) {
      throw InvariantError("visibility matrix: counts do not cover candidates");
    }
    for (int l : rows[v]) {
      if (l < 0 || l >= superpoint_count || candidate_position(l) < 0) {
        throw InvariantError("visibility matrix: row entry is not a candidate");
      }
    }
  }
}

std::vector<int> Solution::selected() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (theta[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

RefineStrategy RefineStrategy::parse(const std::string& text) {
  if (text == "dp") return {StrategyKind::kDp, 0};
  if (text == "brute_views") return {StrategyKind::kBruteViews, 0};
  if (text == "brute_superpoints") return {StrategyKind::kBruteSuperpoints, 0};
  if (text == "all_lifted") return {StrategyKind::kAllLifted, 0};
  std::string digits;
  if (text.starts_with("top_k(") && text.ends_with(")")) {
    digits = text.substr(6, text.size() - 7);
  } else if (text.starts_with("top_k:")) {
    digits = text.substr(6);
  } else if (text.starts_with("top")) {
    digits = text.substr(3);
  }
  if (!digits.empty() &&
      std::all_of(digits.begin(), digits.end(),
                  [](unsigned char c) { return std::isdigit(c); })) {
    const int k = std::stoi(digits);
    if (k >= 1) return {StrategyKind::kTopK, k};
  }
  throw ConfigError("unknown refine strategy \"" + text +
                    "\" (dp | brute_views | brute_superpoints | top_k(K) | "
                    "all_lifted)");
}

std::string RefineStrategy::name() const {
  switch (kind) {
    case StrategyKind::kDp: return "dp";
    case StrategyKind::kBruteViews: return "brute_views";
    case StrategyKind::kBruteSuperpoints: return "brute_superpoints";
    case StrategyKind::kTopK: return "top_k(" + std::to_string(k) + ")";
    case StrategyKind::kAllLifted: return "all_lifted";
  }
  return "?";
}

VisibilityMatrix visibility_matrix(const MaskTrack& track,
                                   const ProjectionTable& table, double tau,
                                   OverlapMode mode) {
  if (!(tau > 0.0) || tau > 1.0) {
    throw std::invalid_argument("visibility_matrix: tau must be in (0,1]");
  }
  const SuperpointPartition& part = table.partition();
  const int L = part.count();
  VisibilityMatrix vis;
  vis.superpoint_count = L;

  std::vector<int> positions;
  for (const auto& [frame, mask] : track.masks) {
    const int v = table.view_of_frame(frame);
    if (v < 0) {
      throw DataError("track " + std::to_string(track.track_id) + " view " +
                      std::to_string(frame) + ": not a working view");
    }
    const CameraFrame& cam = table.frame(v);
    if (mask.width != cam.width || mask.height != cam.height) {
      throw DataError("track " + std::to_string(track.track_id) + " view " +
                      std::to_string(frame) + ": mask is " +
                      std::to_string(mask.width) + "x" +
                      std::to_string(mask.height) + ", frame is " +
                      std::to_string(cam.width) + "x" +
                      std::to_string(cam.height));
    }
    vis.views.push_back(frame);
    positions.push_back(v);
  }

  const int n = static_cast<int>(part.assignment.size());
  std::vector<std::vector<ViewCounts>> per_view(vis.views.size());
  for (std::size_t t = 0; t < vis.views.size(); ++t) {
    const Mask2D& mask = track.masks.at(vis.views[t]);
    auto& acc = per_view[t];
    acc.assign(L, ViewCounts{});
    for (int i = 0; i < n; ++i) {
      const int px = table.pixel(positions[t], i);
      if (px < 0) continue;
      ViewCounts& c = acc[part.assignment[i]];
      if (mask.bits[px]) {
        ++c.inside;
      } else {
        ++c.outside;
      }
    }

    std::vector<int> row;
    for (int l = 0; l < L; ++l) {
      const ViewCounts& c = acc[l];
      if (c.inside == 0) continue;  // overlap 0 never reaches tau > 0
      double overlap = 0.0;
      if (mode == OverlapMode::kContainment) {
        overlap = static_cast<double>(c.inside) /
                  static_cast<double>(c.inside + c.outside);
      } else {
        std::vector<int> pixels;
        for (int i : part.members[l]) {
          const int px = table.pixel(positions[t], i);
          if (px >= 0) pixels.push_back(px);
        }
        std::sort(pixels.begin(), pixels.end());
        pixels.erase(std::unique(pixels.begin(), pixels.end()), pixels.end());
        std::int64_t inter = 0;
        for (int px : pixels) inter += mask.bits[px];
        const std::int64_t uni =
            static_cast<std::int64_t>(mask.popcount()) +
            static_cast<std::int64_t>(pixels.size()) - inter;
        overlap = static_cast<double>(inter) / static_cast<double>(uni);
      }
      if (overlap >= tau) row.push_back(l);
    }
    vis.rows.push_back(std::move(row));
  }
  for (const auto& row : vis.rows) {
    vis.candidates.insert(vis.candidates.end(), row.begin(), row.end());
  }
  std::sort(vis.candidates.begin(), vis.candidates.end());
  vis.candidates.erase(
      std::unique(vis.candidates.begin(), vis.candidates.end()),
      vis.candidates.end());
  vis.counts.resize(vis.views.size());
  for (std::size_t t = 0; t < vis.views.size(); ++t) {
    for (int l : vis.candidates) vis.counts[t].push_back(per_view[t][l]);
  }
  return vis;
}

std::int64_t objective_value(const std::vector<bool>& theta,
                             const MaskTrack& track,
                             const ProjectionTable& table) {
  const SuperpointPartition& part = table.partition();
  if (theta.size() != static_cast<std::size_t>(part.count())) {
    throw std::invalid_argument("objective_value: theta has wrong dimension");
  }
  std::int64_t total = 0;
  for (const auto& [frame, mask] : track.masks) {
    const int v = table.view_of_frame(frame);
    if (v < 0) {
      throw DataError("track " + std::to_string(track.track_id) + " view " +
                      std::to_string(frame) + ": not a working view");
    }
    for (int l = 0; l < part.count(); ++l) {
      if (!theta[l]) continue;
      for (int i : part.members[l]) {
        const int px = table.pixel(v, i);
        if (px < 0) continue;
        total += mask.bits[px] ? 1 : -1;
      }
    }
  }
  return total;
}

namespace {

// Sum over views of inside - outside for each candidate. The objective is
// additive over disjoint superpoints.
std::vector<std::int64_t> candidate_scores(const VisibilityMatrix& vis) {
  std::vector<std::int64_t> score(vis.candidates.size(), 0);
  for (const auto& per_view : vis.counts) {
    for (std::size_t c = 0; c < per_view.size(); ++c) {
      score[c] += per_view[c].inside - per_view[c].outside;
    }
  }
  return score;
}

using Bits = std::vector<std::uint64_t>;

Bits row_bits(const VisibilityMatrix& vis, int view) {
  Bits b((vis.candidates.size() + 63) / 64, 0);
  for (int l : vis.rows[view]) {
    const int c = vis.candidate_position(l);
    b[c / 64] |= std::uint64_t{1} << (c % 64);
  }
  return b;
}

std::int64_t bits_score(const Bits& b, const std::vector<std::int64_t>& score) {
  std::int64_t total = 0;
  for (std::size_t w = 0; w < b.size(); ++w) {
    std::uint64_t word = b[w];
    while (word) {
      const int bit = __builtin_ctzll(word);
      total += score[w * 64 + bit];
      word &= word - 1;
    }
  }
  return total;
}

Solution solution_from_bits(const VisibilityMatrix& vis, const Bits& b) {
  Solution s;
  s.theta.assign(vis.superpoint_count, false);
  for (std::size_t c = 0; c < vis.candidates.size(); ++c) {
    if (b[c / 64] >> (c % 64) & 1) s.theta[vis.candidates[c]] = true;
  }
  s.objective = objective_value(s.theta, vis);
  return s;
}

// Best union over subsets of the given views (positions, ascending).
Solution enumerate_view_subsets(const VisibilityMatrix& vis,
                                const std::vector<int>& views) {
  const auto score = candidate_scores(vis);
  std::vector<Bits> rows;
  for (int v : views) rows.push_back(row_bits(vis, v));
  const std::size_t words = (vis.candidates.size() + 63) / 64;
  const std::uint64_t subsets = std::uint64_t{1} << views.size();
  Bits best(words, 0);
  std::int64_t best_score = 0;
  Bits cur(words);
  for (std::uint64_t mask = 1; mask < subsets; ++mask) {
    std::fill(cur.begin(), cur.end(), 0);
    for (std::size_t v = 0; v < views.size(); ++v) {
      if (mask >> v & 1) {
        for (std::size_t w = 0; w < words; ++w) cur[w] |= rows[v][w];
      }
    }
    const std::int64_t s = bits_score(cur, score);
    if (s > best_score) {
      best_score = s;
      best = cur;
    }
  }
  return solution_from_bits(vis, best);
}

}  // namespace

std::int64_t objective_value(const std::vector<bool>& theta,
                             const VisibilityMatrix& vis) {
  if (theta.size() != static_cast<std::size_t>(vis.superpoint_count)) {
    throw std::invalid_argument("objective_value: theta has wrong dimension");
  }
  std::int64_t total = 0;
  for (const auto& per_view : vis.counts) {
    for (std::size_t c = 0; c < vis.candidates.size(); ++c) {
      if (theta[vis.candidates[c]]) {
        total += per_view[c].inside - per_view[c].outside;
      }
    }
  }
  return total;
}

Solution dp_refine(const VisibilityMatrix& vis, DpTrace* trace) {
  Solution current;
  current.theta.assign(vis.superpoint_count, false);
  current.objective = 0;
  if (trace) *trace = DpTrace{};
  for (int t = 0; t < vis.view_count(); ++t) {
    std::vector<bool> grown = current.theta;
    for (int l : vis.rows[t]) grown[l] = true;
    const std::int64_t grown_objective = objective_value(grown, vis);
    const bool add = grown_objective > current.objective;
    if (add) {
      current.theta = std::move(grown);
      current.objective = grown_objective;
    }
    if (trace) {
      trace->added.push_back(add);
      trace->objective.push_back(current.objective);
      trace->add_objective.push_back(grown_objective);
    }
  }
  return current;
}

Solution brute_force_views(const VisibilityMatrix& vis, int max_views) {
  if (vis.view_count() > max_views) {
    throw ConfigError("brute_force_views: " + std::to_string(vis.view_count()) +
                      " views exceed the enumeration cap of " +
                      std::to_string(max_views) +
                      "; use the dp or top_k strategy");
  }
  std::vector<int> all(vis.view_count());
  std::iota(all.begin(), all.end(), 0);
  return enumerate_view_subsets(vis, all);
}

Solution brute_force_superpoints(const VisibilityMatrix& vis,
                                 int max_candidates) {
  const int c_count = static_cast<int>(vis.candidates.size());
  if (c_count > max_candidates) {
    throw ConfigError("brute_force_superpoints: " + std::to_string(c_count) +
                      " candidates exceed the enumeration cap of " +
                      std::to_string(max_candidates) +
                      "; use the dp or top_k strategy");
  }
  const auto score = candidate_scores(vis);
  std::uint64_t best = 0;
  std::int64_t best_score = 0;
  const std::uint64_t subsets = std::uint64_t{1} << c_count;
  for (std::uint64_t mask = 1; mask < subsets; ++mask) {
    std::int64_t s = 0;
    for (std::uint64_t m = mask; m; m &= m - 1) s += score[__builtin_ctzll(m)];
    if (s > best_score) {
      best_score = s;
      best = mask;
    }
  }
  return solution_from_bits(vis, Bits{best});
}

Solution top_k_views_refine(const VisibilityMatrix& vis, int k) {
  if (k < 1) throw std::invalid_argument("top_k_views_refine: k must be >= 1");
  const auto score = candidate_scores(vis);
  std::vector<std::pair<std::int64_t, int>> ranked;
  for (int v = 0; v < vis.view_count(); ++v) {
    ranked.emplace_back(-bits_score(row_bits(vis, v), score), v);
  }
  std::sort(ranked.begin(), ranked.end());
  const int keep = std::min<int>(k, static_cast<int>(ranked.size()));
  std::vector<int> views;
  for (int i = 0; i < keep; ++i) views.push_back(ranked[i].second);
  std::sort(views.begin(), views.end());
  if (static_cast<int>(views.size()) > kMaxEnumeratedViews) {
    throw ConfigError("top_k_views_refine: k exceeds the enumeration cap");
  }
  return enumerate_view_subsets(vis, views);
}

Solution all_lifted(const VisibilityMatrix& vis) {
  Solution s;
  s.theta.assign(vis.superpoint_count, false);
  for (const auto& row : vis.rows) {
    for (int l : row) s.theta[l] = true;
  }
  s.objective = objective_value(s.theta, vis);
  return s;
}

Solution refine(const VisibilityMatrix& vis, const RefineStrategy& strategy) {
  switch (strategy.kind) {
    case StrategyKind::kDp: return dp_refine(vis);
    case StrategyKind::kBruteViews: return brute_force_views(vis);
    case StrategyKind::kBruteSuperpoints: return brute_force_superpoints(vis);
    case StrategyKind::kTopK: return top_k_views_refine(vis, strategy.k);
    case StrategyKind::kAllLifted: return all_lifted(vis);
  }
  throw InvariantError("unknown refine strategy");
}

}  // namespace masklift
