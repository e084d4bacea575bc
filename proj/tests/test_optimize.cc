#include <random>
#include <set>

#include "doctest.h"
#include "masklift/errors.h"
#include "masklift/optimize.h"
#include "masklift/pipeline.h"
#include "support.h"

using namespace masklift;

namespace {

// Instance with every count in view 0, so each superpoint's net is explicit.
VisibilityMatrix from_nets(int views, const std::vector<std::vector<int>>& rows,
                           const std::vector<int>& nets) {
  VisibilityMatrix vis;
  vis.superpoint_count = static_cast<int>(nets.size());
  for (int v = 0; v < views; ++v) vis.views.push_back(v);
  vis.rows = rows;
  std::set<int> cands;
  for (const auto& r : rows) cands.insert(r.begin(), r.end());
  vis.counts.assign(views, std::vector<ViewCounts>(cands.size()));
  int c = 0;
  for (int l : cands) {
    const int net = nets[l];
    vis.counts[0][c++] = net >= 0 ? ViewCounts{net, 0} : ViewCounts{0, -net};
  }
  vis.finalize_candidates();
  return vis;
}

std::vector<bool> theta_of(int n, std::initializer_list<int> on) {
  std::vector<bool> t(n, false);
  for (int l : on) t[l] = true;
  return t;
}

// One superpoint of `inside + outside` pixels, `inside` of them under the
// mask, in a single working view.
struct SingleView {
  testutil::Layout lay;
  ProjectionTable table;
  MaskTrack track;

  SingleView(int inside, int outside, int extra_mask = 0)
      : lay({inside + outside}, 1), table(make_table()) {
    Mask2D m(lay.width, lay.height);
    for (int k = 0; k < inside; ++k) {
      const auto [r, c] = lay.pixel(lay.members[0][k]);
      m.set(r, c);
    }
    for (int k = 0; k < extra_mask; ++k) m.set(lay.height - 1, k);
    track.masks[0] = m;
    track.pivot_view = 0;
  }

  ProjectionTable make_table() {
    lay.show_all(0, 0);
    return lay.table();
  }
};

// Noisy tracks on a small synthetic scene, lifted at the default tau.
struct SceneTracks {
  Scene scene = make_scene(testutil::small_spec(3, 404));
  PreparedScene prepared;
  std::vector<SeedOutcome> outcomes;

  SceneTracks() {
    PipelineConfig cfg;
    cfg.view_stride = 2;
    prepared = prepare_scene(scene, cfg);
    NoiseSpec noise;
    noise.r_morph = 1;
    noise.p_flip = 0.2;
    const NoisyTracker tracker(noise, 3);
    for (int l = 0; l < prepared.partition().count(); ++l) {
      SeedOutcome o = process_seed(prepared, l, tracker, cfg, 0);
      if (o.visibility) outcomes.push_back(std::move(o));
    }
  }
};

const SceneTracks& scene_tracks() {
  static const SceneTracks tracks;
  return tracks;
}

}  // namespace

TEST_SUITE("optimize") {

TEST_CASE("containment threshold: 6 of 10 in, 4 of 10 out") {
  SingleView six(6, 4);
  CHECK(visibility_matrix(six.track, six.table, 0.5).rows[0] ==
        std::vector<int>{0});
  SingleView four(4, 6);
  CHECK(visibility_matrix(four.track, four.table, 0.5).rows[0].empty());
}

TEST_CASE("tau 1.0 rejects one stray pixel, 0.9 accepts it") {
  SingleView sv(9, 1);
  CHECK(visibility_matrix(sv.track, sv.table, 1.0).rows[0].empty());
  CHECK(visibility_matrix(sv.track, sv.table, 0.9).rows[0].size() == 1);
}

TEST_CASE("iou mode divides by the union with the mask") {
  SingleView sv(10, 0, 10);
  CHECK(visibility_matrix(sv.track, sv.table, 0.5, OverlapMode::kIou)
            .rows[0]
            .size() == 1);
  CHECK(visibility_matrix(sv.track, sv.table, 0.51, OverlapMode::kIou)
            .rows[0]
            .empty());
  CHECK(visibility_matrix(sv.track, sv.table, 1.0, OverlapMode::kContainment)
            .rows[0]
            .size() == 1);
}

TEST_CASE("a track with no masks lifts to an empty matrix") {
  SingleView sv(5, 5);
  MaskTrack empty;
  const VisibilityMatrix vis = visibility_matrix(empty, sv.table);
  CHECK(vis.views.empty());
  CHECK(vis.candidates.empty());
  const Solution s = dp_refine(vis);
  CHECK(s.selected().empty());
  CHECK(s.objective == 0);
}

TEST_CASE("bad track views are data errors naming track and view") {
  SingleView sv(5, 5);
  MaskTrack t = sv.track;
  t.track_id = 4;
  t.masks[7] = t.masks[0];
  CHECK_THROWS_WITH_AS(visibility_matrix(t, sv.table),
                       doctest::Contains("track 4 view 7"), DataError);
  MaskTrack small;
  small.track_id = 2;
  small.masks[0] = Mask2D(3, 3);
  CHECK_THROWS_WITH_AS(visibility_matrix(small, sv.table),
                       doctest::Contains("track 2 view 0"), DataError);
}

TEST_CASE("objective examples") {
  SingleView sv(7, 3);
  CHECK(objective_value(theta_of(1, {}), sv.track, sv.table) == 0);
  CHECK(objective_value(theta_of(1, {0}), sv.track, sv.table) == 4);
  const VisibilityMatrix vis = visibility_matrix(sv.track, sv.table);
  CHECK(objective_value(theta_of(1, {0}), vis) == 4);

  // Two views contributing +4 and -1.
  testutil::Layout lay({10}, 2);
  lay.show_all(0, 0);
  lay.show(1, 0, 9);
  const ProjectionTable table = lay.table();
  MaskTrack t;
  t.pivot_view = 0;
  for (int v = 0; v < 2; ++v) {
    Mask2D m(lay.width, lay.height);
    const int in = v == 0 ? 7 : 4;
    for (int k = 0; k < in; ++k) {
      const auto [r, c] = lay.pixel(lay.members[0][k]);
      m.set(r, c);
    }
    t.masks[v] = m;
  }
  CHECK(objective_value(theta_of(1, {0}), t, table) == 3);
}

TEST_CASE("count route, geometric route and an independent recount agree") {
  const auto& outcomes = scene_tracks().outcomes;
  const ProjectionTable& table = *scene_tracks().prepared.table;
  REQUIRE(!outcomes.empty());
  std::mt19937_64 rng(12);
  std::bernoulli_distribution coin(0.5);
  int checked = 0;
  for (const SeedOutcome& o : outcomes) {
    const VisibilityMatrix& vis = *o.visibility;
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<bool> theta(vis.superpoint_count, false);
      for (int l : vis.candidates) theta[l] = coin(rng);
      const std::int64_t counts = objective_value(theta, vis);
      CHECK(counts == testutil::reference_objective(theta, vis));
      CHECK(counts == objective_value(theta, *o.track, table));

      std::vector<int> members;
      for (int l = 0; l < vis.superpoint_count; ++l) {
        if (!theta[l]) continue;
        for (int i : table.partition().members[l]) members.push_back(i);
      }
      std::int64_t recount = 0;
      for (const auto& [frame, mask] : o.track->masks) {
        const int view = table.view_of_frame(frame);
        for (int i : members) {
          const int px = table.pixel(view, i);
          if (px >= 0) recount += mask.bits[px] ? 1 : -1;
        }
      }
      CHECK(counts == recount);
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("dp: single view with positive and negative sets") {
  const VisibilityMatrix pos = from_nets(1, {{0, 1}}, {3, 2});
  const Solution a = dp_refine(pos);
  CHECK(a.objective == 5);
  CHECK(a.selected() == std::vector<int>{0, 1});
  const VisibilityMatrix neg = from_nets(1, {{0}}, {-2});
  const Solution b = dp_refine(neg);
  CHECK(b.objective == 0);
  CHECK(b.selected().empty());
}

TEST_CASE("dp: hand trace on a crafted 3-view, 4-superpoint instance") {
  // Rows {A,B}, {A}, {C,D}; nets A=+3, B=-2, C=+4, D=-1.
  const VisibilityMatrix vis = from_nets(3, {{0, 1}, {0}, {2, 3}}, {3, -2, 4, -1});
  DpTrace trace;
  const Solution s = dp_refine(vis, &trace);
  CHECK(trace.added == std::vector<bool>{true, false, true});
  CHECK(trace.objective == std::vector<std::int64_t>{1, 1, 4});
  CHECK(trace.add_objective == std::vector<std::int64_t>{1, 1, 4});
  CHECK(s.selected() == std::vector<int>{0, 1, 2, 3});
  CHECK(s.objective == 4);
  // The optimum is elsewhere on both larger search families.
  const Solution views = brute_force_views(vis);
  CHECK(views.objective == 6);
  CHECK(views.selected() == std::vector<int>{0, 2, 3});
  const Solution sps = brute_force_superpoints(vis);
  CHECK(sps.objective == 7);
  CHECK(sps.selected() == std::vector<int>{0, 2});
}

TEST_CASE("dp equals the step-by-step reference on random instances") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const VisibilityMatrix vis = testutil::random_instance(rng, 8, 12);
    DpTrace trace;
    const Solution s = dp_refine(vis, &trace);
    std::vector<bool> theta;
    const auto steps = testutil::reference_dp(vis, &theta);
    REQUIRE(trace.added.size() == steps.size());
    for (std::size_t t = 0; t < steps.size(); ++t) {
      CHECK(trace.added[t] == steps[t].added);
      CHECK(trace.objective[t] == steps[t].objective);
      CHECK(trace.add_objective[t] == steps[t].add_objective);
      if (t > 0) CHECK(trace.objective[t] >= trace.objective[t - 1]);
    }
    CHECK(s.theta == theta);
    CHECK(s.objective >= 0);
    CHECK(s.objective == objective_value(s.theta, vis));
    std::vector<bool> first(vis.superpoint_count, false);
    for (int l : vis.rows[0]) first[l] = true;
    CHECK(s.objective >= std::max<std::int64_t>(0, objective_value(first, vis)));
  }
}

TEST_CASE("brute force solvers match independent enumerators") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const VisibilityMatrix vis = testutil::random_instance(rng, 6, 10);
    const Solution bv = brute_force_views(vis);
    const Solution bs = brute_force_superpoints(vis);
    const Solution dp = dp_refine(vis);
    CHECK(bv.objective == testutil::reference_best_views(vis));
    CHECK(bs.objective == testutil::reference_best_superpoints(vis));
    CHECK(bv.objective == objective_value(bv.theta, vis));
    CHECK(bs.objective == objective_value(bs.theta, vis));
    CHECK(bs.objective >= bv.objective);
    CHECK(bv.objective >= dp.objective);
  }
}

TEST_CASE("single-view and single-candidate degenerate cases") {
  const VisibilityMatrix neg = from_nets(1, {{0, 1}}, {2, -5});
  CHECK(brute_force_views(neg).objective == 0);
  const VisibilityMatrix pos = from_nets(1, {{0, 1}}, {2, 5});
  CHECK(brute_force_views(pos).objective == 7);
  CHECK(brute_force_superpoints(from_nets(1, {{0}}, {3})).selected() ==
        std::vector<int>{0});
  CHECK(brute_force_superpoints(from_nets(1, {{0}}, {0})).selected().empty());
  CHECK(brute_force_superpoints(from_nets(1, {{0}}, {-1})).selected().empty());
}

TEST_CASE("enumeration caps raise configuration errors") {
  std::vector<std::vector<int>> rows;
  std::vector<int> nets;
  for (int v = 0; v < 21; ++v) {
    rows.push_back({v});
    nets.push_back(1);
  }
  const VisibilityMatrix vis = from_nets(21, rows, nets);
  CHECK_THROWS_AS(brute_force_views(vis), ConfigError);
  CHECK_THROWS_AS(brute_force_superpoints(vis), ConfigError);
  CHECK(dp_refine(vis).objective == 21);
  CHECK(top_k_views_refine(vis, 10).objective == 10);
}

TEST_CASE("top-k: clamp, k = 1 and strict improvement with k") {
  // Disjoint positive rows with different nets.
  std::vector<std::vector<int>> rows;
  std::vector<int> nets;
  for (int v = 0; v < 6; ++v) {
    rows.push_back({v});
    nets.push_back(v + 1);
  }
  const VisibilityMatrix vis = from_nets(6, rows, nets);
  const Solution k1 = top_k_views_refine(vis, 1);
  const Solution k5 = top_k_views_refine(vis, 5);
  const Solution all = brute_force_views(vis);
  CHECK(k1.selected() == std::vector<int>{5});
  CHECK(k1.objective < k5.objective);
  CHECK(k5.objective < all.objective);
  CHECK(top_k_views_refine(vis, 6) == all);
  CHECK(top_k_views_refine(vis, 60) == all);
  CHECK_THROWS(top_k_views_refine(vis, 0));

  const VisibilityMatrix neg = from_nets(2, {{0}, {1}}, {-1, -3});
  CHECK(top_k_views_refine(neg, 1).selected().empty());
}

TEST_CASE("top-k with k = view count equals brute force on random instances") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const VisibilityMatrix vis = testutil::random_instance(rng, 8, 12);
    CHECK(top_k_views_refine(vis, vis.view_count()) == brute_force_views(vis));
    const Solution k1 = top_k_views_refine(vis, 1);
    std::int64_t best_single = 0;
    for (int v = 0; v < vis.view_count(); ++v) {
      std::vector<bool> t(vis.superpoint_count, false);
      for (int l : vis.rows[v]) t[l] = true;
      best_single = std::max(best_single, objective_value(t, vis));
    }
    CHECK(k1.objective == best_single);
  }
}

TEST_CASE("all lifted is the union of rows and contains dp") {
  VisibilityMatrix empty;
  CHECK(all_lifted(empty).selected().empty());
  const VisibilityMatrix ab_bc = from_nets(2, {{0, 1}, {1, 2}}, {1, 1, 1});
  CHECK(all_lifted(ab_bc).selected() == std::vector<int>{0, 1, 2});
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const VisibilityMatrix vis = testutil::random_instance(rng, 8, 12);
    const Solution all = all_lifted(vis);
    const Solution dp = dp_refine(vis);
    for (int l = 0; l < vis.superpoint_count; ++l) {
      if (dp.theta[l]) {
        CHECK(all.theta[l]);
        CHECK(vis.candidate_position(l) >= 0);
      }
    }
    CHECK(all.objective <= brute_force_views(vis).objective);
  }
}

TEST_CASE("visibility is antitone in tau on real tracks") {
  const auto& outcomes = scene_tracks().outcomes;
  const ProjectionTable& table = *scene_tracks().prepared.table;
  for (const SeedOutcome& o : outcomes) {
    std::vector<std::vector<int>> prev;
    for (int step = 1; step <= 10; ++step) {
      const VisibilityMatrix vis =
          visibility_matrix(*o.track, table, step / 10.0);
      if (!prev.empty()) {
        for (std::size_t v = 0; v < vis.rows.size(); ++v) {
          for (int l : vis.rows[v]) {
            CHECK(std::binary_search(prev[v].begin(), prev[v].end(), l));
          }
        }
      }
      prev = vis.rows;
    }
  }
}

TEST_CASE("strategy names parse and print") {
  for (const char* s : {"dp", "brute_views", "brute_superpoints", "all_lifted",
                        "top_k(1)", "top_k(10)"}) {
    CHECK(RefineStrategy::parse(s).name() == s);
  }
  CHECK(RefineStrategy::parse("top_k:5") == RefineStrategy::parse("top_k(5)"));
  CHECK_THROWS_AS(RefineStrategy::parse("greedy"), ConfigError);
  CHECK_THROWS_AS(RefineStrategy::parse("top_k(0)"), ConfigError);
}

TEST_CASE("objective of the empty selection is exactly zero") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const VisibilityMatrix vis = testutil::random_instance(rng, 8, 12);
    CHECK(objective_value(std::vector<bool>(vis.superpoint_count, false), vis) == 0);
  }
}

}  // TEST_SUITE
