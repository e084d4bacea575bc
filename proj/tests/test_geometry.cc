#include <random>

#include "doctest.h"
#include "masklift/errors.h"
#include "masklift/geometry.h"
#include "masklift/spatial_grid.h"
#include "support.h"

using namespace masklift;

TEST_SUITE("geometry") {

TEST_CASE("optical-axis point lands on the principal point") {
  CameraFrame f = testutil::flat_frame(64, 64, 100.0, 32.0, 32.0, 1.0f);
  const std::vector<Vec3> pts = {Vec3(0, 0, 1)};
  const PixelSet ps = project_points(pts, f, 0.1);
  REQUIRE(ps.size() == 1);
  CHECK(ps[0].row == 32);
  CHECK(ps[0].col == 32);
  CHECK(ps[0].point_index == 0);
}

TEST_CASE("occluded and behind-camera points are dropped") {
  CameraFrame f = testutil::flat_frame(64, 64, 100.0, 32.0, 32.0, 1.0f);
  const std::vector<Vec3> pts = {Vec3(0, 0, 2), Vec3(0, 0, -1)};
  CHECK(project_points(pts, f, 0.1).empty());
}

TEST_CASE("zero depth is invalid and out-of-bounds pixels are dropped") {
  CameraFrame f = testutil::flat_frame(8, 8, 10.0, 4.0, 4.0, 0.0f);
  CHECK(project_points(std::vector<Vec3>{Vec3(0, 0, 1)}, f, 0.5).empty());
  f.depth.assign(64, 1.0f);
  CHECK(project_points(std::vector<Vec3>{Vec3(5, 0, 1)}, f, 0.5).empty());
}

TEST_CASE("nonpositive focal length is rejected") {
  CameraFrame f = testutil::flat_frame(8, 8, 10.0, 4.0, 4.0, 1.0f);
  f.intrinsics.fx = 0.0;
  CHECK_THROWS(project_points(std::vector<Vec3>{Vec3(0, 0, 1)}, f, 0.1));
}

TEST_CASE("empty input projects to nothing") {
  CameraFrame f = testutil::flat_frame(8, 8, 10.0, 4.0, 4.0, 1.0f);
  CHECK(project_points(std::vector<Vec3>{}, f, 0.1).empty());
}

TEST_CASE("pixel rounding is half away from zero") {
  const Intrinsics k{1.0, 1.0, 0.0, 0.0};
  CHECK(pixel_of(Vec3(2.5, -2.5, 1.0), k) == Pixel{-3, 3});
  CHECK(pixel_of(Vec3(0.49, 1.5, 1.0), k) == Pixel{2, 0});
}

TEST_CASE("back-projection round-trips on random poses") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> r(0, 47);
  std::uniform_real_distribution<double> d(0.2, 8.0);
  for (int trial = 0; trial < 500; ++trial) {
    CameraFrame f = testutil::flat_frame(48, 48, 40.0, 23.5, 23.5, 0.0f);
    f.world_to_camera = testutil::random_pose(rng);
    const int row = r(rng);
    const int col = r(rng);
    const double depth = d(rng);
    f.depth[static_cast<std::size_t>(row) * 48 + col] = static_cast<float>(depth);
    const Vec3 p = backproject(f, row, col, depth);
    const PixelSet ps = project_points(std::vector<Vec3>{p}, f, 0.01);
    REQUIRE(ps.size() == 1);
    CHECK(ps[0].row == row);
    CHECK(ps[0].col == col);
  }
}

TEST_CASE("projection matches an independent per-point reference") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<float> dep(0.0f, 4.0f);
  CameraFrame f = testutil::flat_frame(32, 24, 20.0, 15.5, 11.5, 0.0f);
  f.world_to_camera = testutil::random_pose(rng);
  for (float& v : f.depth) v = dep(rng);
  std::vector<Vec3> pts;
  for (int i = 0; i < 3000; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  const double tol = 0.3;
  const PixelSet got = project_points(pts, f, tol);
  PixelSet want;
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    const Vec3 c = f.world_to_camera.topLeftCorner<3, 3>() * pts[i] +
                   f.world_to_camera.topRightCorner<3, 1>();
    if (c.z() <= 0) continue;
    const auto [row, col] = testutil::reference_pixel(c, f.intrinsics);
    if (row < 0 || row >= 24 || col < 0 || col >= 32) continue;
    const double dm = f.depth[row * 32 + col];
    if (dm <= 0 || std::abs(c.z() - dm) > tol) continue;
    want.push_back({row, col, i});
  }
  CHECK(got == want);
}

TEST_CASE("larger depth tolerance never shrinks the pixel set") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  CameraFrame f = testutil::flat_frame(32, 32, 25.0, 15.5, 15.5, 2.0f);
  std::vector<Vec3> pts;
  for (int i = 0; i < 2000; ++i) pts.emplace_back(u(rng), u(rng), 2.0 + u(rng));
  std::size_t prev = 0;
  for (double tol : {0.01, 0.05, 0.1, 0.3, 1.0, 2.0}) {
    const PixelSet ps = project_points(pts, f, tol);
    CHECK(ps.size() >= prev);
    prev = ps.size();
  }
}

TEST_CASE("subset projection keeps indices inside the subset, ascending") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  CameraFrame f = testutil::flat_frame(32, 32, 25.0, 15.5, 15.5, 2.0f);
  std::vector<Vec3> pts;
  for (int i = 0; i < 200; ++i) pts.emplace_back(u(rng), u(rng), 2.0);
  const std::vector<int> subset = {150, 3, 77, 3, 42};
  const PixelSet ps = project_points(pts, subset, f, 0.1);
  CHECK(ps.size() <= 4);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    CHECK(std::count(subset.begin(), subset.end(), ps[i].point_index) > 0);
    if (i > 0) CHECK(ps[i].point_index > ps[i - 1].point_index);
  }
}

TEST_CASE("frame validation rejects a non-rigid pose") {
  CameraFrame f = testutil::flat_frame(4, 4, 2.0, 1.5, 1.5, 1.0f);
  CHECK_NOTHROW(f.validate());
  f.world_to_camera(0, 0) = 2.0;
  CHECK_THROWS_AS(f.validate(), DataError);
}

TEST_CASE("fps: farthest point on a line") {
  const std::vector<Vec3> c = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(10, 0, 0)};
  CHECK(fps_sample(c, 2, {true, true, true}) == std::vector<int>{0, 2});
  CHECK(fps_sample(c, 5, {true, true, true}) == std::vector<int>{0, 2, 1});
  CHECK(fps_sample(c, 2, {false, true, true}) == std::vector<int>{1, 2});
}

TEST_CASE("fps: empty pool is an error") {
  const std::vector<Vec3> c = {Vec3(0, 0, 0)};
  CHECK_THROWS_WITH(fps_sample(c, 1, {false}), "empty sample pool");
}

TEST_CASE("fps matches a brute-force greedy reference") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution keep(0.8);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 5 + trial % 20;
    std::vector<Vec3> c;
    std::vector<bool> e;
    for (int i = 0; i < n; ++i) {
      c.emplace_back(u(rng), u(rng), u(rng));
      e.push_back(keep(rng));
    }
    e[n / 2] = true;
    const int q = 1 + trial % 6;
    std::vector<int> want;
    for (int i = 0; i < n; ++i) {
      if (e[i]) {
        want.push_back(i);
        break;
      }
    }
    while (static_cast<int>(want.size()) < q) {
      int best = -1;
      double best_d = -1;
      for (int i = 0; i < n; ++i) {
        if (!e[i] || std::count(want.begin(), want.end(), i)) continue;
        double d = 1e300;
        for (int p : want) d = std::min(d, (c[i] - c[p]).norm());
        if (d > best_d) {
          best_d = d;
          best = i;
        }
      }
      if (best < 0) break;
      want.push_back(best);
    }
    CHECK(fps_sample(c, q, e) == want);
  }
}

TEST_CASE("knn: collinear neighbors with low-index ties") {
  const std::vector<Vec3> c = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)};
  const auto nn = knn_centroids(c, 1);
  CHECK(nn[0] == std::vector<int>{1});
  CHECK(nn[1] == std::vector<int>{0});
  CHECK(nn[2] == std::vector<int>{1});
  const auto all = knn_centroids(c, 5);
  CHECK(all[1] == std::vector<int>{0, 2});
  CHECK(knn_centroids(std::vector<Vec3>{Vec3(0, 0, 0)}, 3)[0].empty());
}

TEST_CASE("knn matches a full pairwise sort") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> c;
  for (int i = 0; i < 20; ++i) c.emplace_back(u(rng), u(rng), u(rng));
  const auto nn = knn_centroids(c, 4);
  for (int i = 0; i < 20; ++i) {
    std::vector<std::pair<double, int>> d;
    for (int j = 0; j < 20; ++j) {
      if (j != i) d.emplace_back((c[i] - c[j]).norm(), j);
    }
    std::sort(d.begin(), d.end());
    std::vector<int> want;
    for (int k = 0; k < 4; ++k) want.push_back(d[k].second);
    CHECK(nn[i] == want);
  }
}

namespace {

PointCloud grid_plane(int axis, double offset, int n, double noise,
                      std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, noise);
  PointCloud cloud;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Vec3 p;
      const double a = static_cast<double>(i) / (n - 1);
      const double b = static_cast<double>(j) / (n - 1);
      p[axis] = offset + (noise > 0 ? g(rng) : 0.0);
      p[(axis + 1) % 3] = a;
      p[(axis + 2) % 3] = b;
      cloud.positions.push_back(p);
      cloud.colors.push_back(Vec3::Constant(0.5));
    }
  }
  return cloud;
}

}  // namespace

TEST_CASE("normals of axis planes") {
  std::mt19937_64 rng(1);
  const PointCloud z0 = grid_plane(2, 0.0, 15, 0.0, rng);
  for (const Vec3& n : estimate_normals(z0, 8)) {
    CHECK(n.isApprox(Vec3::UnitZ(), 1e-9));
  }
  const PointCloud x5 = grid_plane(0, 5.0, 15, 0.0, rng);
  for (const Vec3& n : estimate_normals(x5, 8)) {
    CHECK(n.isApprox(Vec3::UnitX(), 1e-9));
  }
}

TEST_CASE("noisy plane normals stay within 5 degrees") {
  std::mt19937_64 rng(3);
  // Unit extent, sigma 0.01, 12 x 12 samples.
  const PointCloud cloud = grid_plane(2, 0.0, 12, 0.01, rng);
  const auto normals = estimate_normals(cloud, 20);
  int bad = 0;
  for (const Vec3& n : normals) {
    bad += std::acos(std::min(1.0, std::abs(n.z()))) > 5.0 * M_PI / 180.0;
    CHECK(std::abs(n.norm() - 1.0) < 1e-9);
  }
  CHECK(bad == 0);
}

TEST_CASE("collinear neighborhoods fall back to +z") {
  PointCloud cloud;
  for (int i = 0; i < 12; ++i) {
    cloud.positions.emplace_back(0.1 * i, 0, 0);
    cloud.colors.push_back(Vec3::Zero());
  }
  for (const Vec3& n : estimate_normals(cloud, 4)) CHECK(n == Vec3::UnitZ());
}

TEST_CASE("spatial grid knn agrees with brute force") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::vector<Vec3> pts;
  for (int i = 0; i < 600; ++i) pts.emplace_back(u(rng), u(rng), 0.1 * u(rng));
  const SpatialGrid grid(pts, SpatialGrid::suggest_cell_size(pts, 8));
  for (int q = 0; q < 600; q += 37) {
    const auto got = grid.knn(pts[q], 8, q);
    std::vector<std::pair<double, int>> d;
    for (int j = 0; j < 600; ++j) {
      if (j != q) d.emplace_back((pts[q] - pts[j]).squaredNorm(), j);
    }
    std::sort(d.begin(), d.end());
    REQUIRE(got.size() == 8);
    for (int k = 0; k < 8; ++k) CHECK(got[k] == d[k].second);
  }
}

TEST_CASE("cloud validation") {
  PointCloud cloud;
  cloud.positions = {Vec3(0, 0, 0)};
  cloud.colors = {Vec3(0.1, 0.2, 0.3)};
  CHECK_NOTHROW(cloud.validate());
  cloud.gt_instance = {-2};
  CHECK_THROWS_AS(cloud.validate(), DataError);
  cloud.gt_instance = {};
  cloud.positions[0].x() = std::nan("");
  CHECK_THROWS_AS(cloud.validate(), DataError);
}

}  // TEST_SUITE
