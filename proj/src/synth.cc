#include "masklift/synth.h"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "masklift/errors.h"
#include "masklift/parallel.h"
#include "masklift/random.h"

namespace masklift {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = 1e-9;

Eigen::Matrix3d yaw_rotation(double yaw) {
  return Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
}

std::optional<double> nearest(std::optional<double> a, std::optional<double> b) {
  if (!a) return b;
  if (!b) return a;
  return std::min(*a, *b);
}

std::optional<double> positive(double t) {
  if (t > kEps) return t;
  return std::nullopt;
}

std::optional<double> intersect_box(const Vec3& o, const Vec3& d,
                                    const Vec3& h) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-15) {
      if (o[a] < -h[a] || o[a] > h[a]) return std::nullopt;
      continue;
    }
    double t0 = (-h[a] - o[a]) / d[a];
    double t1 = (h[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_near > t_far) return std::nullopt;
  if (auto t = positive(t_near)) return t;
  return positive(t_far);
}

std::optional<double> intersect_sphere(const Vec3& o, const Vec3& d, double r) {
  const double a = d.squaredNorm();
  const double b = o.dot(d);
  const double c = o.squaredNorm() - r * r;
  const double disc = b * b - a * c;
  if (disc < 0.0) return std::nullopt;
  const double s = std::sqrt(disc);
  if (auto t = positive((-b - s) / a)) return t;
  return positive((-b + s) / a);
}

std::optional<double> intersect_cylinder(const Vec3& o, const Vec3& d, double r,
                                         double hh) {
  std::optional<double> best;
  const double a = d.x() * d.x() + d.y() * d.y();
  if (a > 1e-15) {
    const double b = o.x() * d.x() + o.y() * d.y();
    const double c = o.x() * o.x() + o.y() * o.y() - r * r;
    const double disc = b * b - a * c;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      for (double t : {(-b - s) / a, (-b + s) / a}) {
        const double z = o.z() + t * d.z();
        if (t > kEps && z >= -hh && z <= hh) best = nearest(best, t);
      }
    }
  }
  if (std::abs(d.z()) > 1e-15) {
    for (double zc : {-hh, hh}) {
      const double t = (zc - o.z()) / d.z();
      const double x = o.x() + t * d.x();
      const double y = o.y() + t * d.y();
      if (t > kEps && x * x + y * y <= r * r) best = nearest(best, t);
    }
  }
  return best;
}

// Room shell: floor z = 0 over [-a, a]^2 and four walls of height h.
std::optional<double> intersect_room(const Vec3& o, const Vec3& d, double a,
                                     double h) {
  std::optional<double> best;
  if (std::abs(d.z()) > 1e-15) {
    const double t = -o.z() / d.z();
    const Vec3 p = o + t * d;
    if (t > kEps && std::abs(p.x()) <= a && std::abs(p.y()) <= a) {
      best = nearest(best, t);
    }
  }
  for (int axis = 0; axis < 2; ++axis) {
    if (std::abs(d[axis]) < 1e-15) continue;
    for (double side : {-a, a}) {
      const double t = (side - o[axis]) / d[axis];
      const Vec3 p = o + t * d;
      if (t > kEps && std::abs(p[1 - axis]) <= a && p.z() >= 0.0 &&
          p.z() <= h) {
        best = nearest(best, t);
      }
    }
  }
  return best;
}

Vec3 random_unit(std::mt19937_64& rng) {
  while (true) {
    const Vec3 v(gaussian(rng), gaussian(rng), gaussian(rng));
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

int sample_count(double area, double density) {
  return static_cast<int>(std::lround(area * density));
}

void add_point(PointCloud& cloud, const Vec3& p, const Vec3& color, int label) {
  cloud.positions.push_back(p);
  cloud.colors.push_back(color);
  cloud.gt_instance.push_back(label);
}

// Uniform samples on a rectangle centered at `c` spanned by half vectors u, v.
void sample_rect(PointCloud& cloud, std::mt19937_64& rng, const Vec3& c,
                 const Vec3& u, const Vec3& v, double density,
                 const Vec3& color, int label) {
  const double area = 4.0 * u.norm() * v.norm();
  const int n = sample_count(area, density);
  for (int i = 0; i < n; ++i) {
    const double s = uniform(rng, -1.0, 1.0);
    const double t = uniform(rng, -1.0, 1.0);
    add_point(cloud, c + s * u + t * v, color, label);
  }
}

void sample_primitive(PointCloud& cloud, std::mt19937_64& rng,
                      const Primitive& p, double density, const Vec3& color) {
  const Eigen::Matrix3d r = yaw_rotation(p.yaw);
  const Vec3& h = p.half_extents;
  switch (p.kind) {
    case ShapeKind::kBox:
      for (int axis = 0; axis < 3; ++axis) {
        const int ua = (axis + 1) % 3;
        const int va = (axis + 2) % 3;
        for (double side : {-1.0, 1.0}) {
          Vec3 n = Vec3::Zero();
          n[axis] = side * h[axis];
          Vec3 u = Vec3::Zero();
          u[ua] = h[ua];
          Vec3 v = Vec3::Zero();
          v[va] = h[va];
          sample_rect(cloud, rng, p.center + r * n, r * u, r * v, density,
                      color, p.id);
        }
      }
      break;
    case ShapeKind::kSphere: {
      const int n = sample_count(p.surface_area(), density);
      for (int i = 0; i < n; ++i) {
        add_point(cloud, p.center + h.x() * random_unit(rng), color, p.id);
      }
      break;
    }
    case ShapeKind::kCylinder: {
      const double rad = h.x();
      const double hh = h.z();
      const int side = sample_count(2.0 * kPi * rad * 2.0 * hh, density);
      for (int i = 0; i < side; ++i) {
        const double phi = uniform(rng, 0.0, 2.0 * kPi);
        const double z = uniform(rng, -hh, hh);
        add_point(cloud,
                  p.center + Vec3(rad * std::cos(phi), rad * std::sin(phi), z),
                  color, p.id);
      }
      const int cap = sample_count(kPi * rad * rad, density);
      for (double zc : {-hh, hh}) {
        for (int i = 0; i < cap; ++i) {
          const double phi = uniform(rng, 0.0, 2.0 * kPi);
          const double rr = rad * std::sqrt(unit(rng));
          add_point(cloud,
                    p.center + Vec3(rr * std::cos(phi), rr * std::sin(phi), zc),
                    color, p.id);
        }
      }
      break;
    }
  }
}

}  // namespace

double Primitive::surface_area() const {
  const Vec3& h = half_extents;
  switch (kind) {
    case ShapeKind::kBox:
      return 8.0 * (h.x() * h.y() + h.y() * h.z() + h.x() * h.z());
    case ShapeKind::kSphere:
      return 4.0 * kPi * h.x() * h.x();
    case ShapeKind::kCylinder:
      return 2.0 * kPi * h.x() * 2.0 * h.z() + 2.0 * kPi * h.x() * h.x();
  }
  return 0.0;
}

double Primitive::footprint_radius() const {
  if (kind == ShapeKind::kBox) return std::hypot(half_extents.x(), half_extents.y());
  return half_extents.x();
}

std::optional<double> Primitive::intersect(const Vec3& origin,
                                           const Vec3& dir) const {
  const Eigen::Matrix3d rt = yaw_rotation(yaw).transpose();
  const Vec3 o = rt * (origin - center);
  const Vec3 d = rt * dir;
  switch (kind) {
    case ShapeKind::kBox: return intersect_box(o, d, half_extents);
    case ShapeKind::kSphere: return intersect_sphere(o, d, half_extents.x());
    case ShapeKind::kCylinder:
      return intersect_cylinder(o, d, half_extents.x(), half_extents.z());
  }
  return std::nullopt;
}

void SceneSpec::validate() const {
  if (!(room_half_extent > 0.0) || !(wall_height >= 0.0) ||
      !(placement_half_extent > 0.0)) {
    throw ConfigError("scene spec: room extents must be positive");
  }
  if (object_count < 0) throw ConfigError("scene spec: negative object count");
  if (object_count > 0 && palette.empty()) {
    throw ConfigError("scene spec: empty shape palette");
  }
  if (!(size_min > 0.0) || size_max < size_min) {
    throw ConfigError("scene spec: invalid object size range");
  }
  // Widest footprint: a yawed box reaches half its diagonal.
  if (placement_half_extent + size_max * std::numbers::sqrt2 / 2.0 >
      room_half_extent) {
    throw ConfigError("scene spec: objects do not fit inside the room");
  }
  if (!(density > 0.0)) throw ConfigError("scene spec: density must be > 0");
  if (frame_count < 1) throw ConfigError("scene spec: need at least one frame");
  if (width < 1 || height < 1) throw ConfigError("scene spec: bad image size");
  if (!(fov_degrees > 0.0 && fov_degrees < 180.0)) {
    throw ConfigError("scene spec: fov must be in (0, 180)");
  }
}

SynthScene generate_scene(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(splitmix64(spec.seed));
  SynthScene scene;
  scene.room_half_extent = spec.room_half_extent;
  scene.wall_height = spec.wall_height;

  constexpr int kMaxAttempts = 2000;
  for (int id = 0; id < spec.object_count; ++id) {
    Primitive p;
    p.id = id;
    p.kind = spec.palette[static_cast<std::size_t>(
        unit(rng) * static_cast<double>(spec.palette.size()))];
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      const double sx = uniform(rng, spec.size_min, spec.size_max);
      const double sy = uniform(rng, spec.size_min, spec.size_max);
      const double sz = uniform(rng, spec.size_min, spec.size_max);
      switch (p.kind) {
        case ShapeKind::kBox:
          p.half_extents = Vec3(sx, sy, sz) / 2.0;
          p.yaw = uniform(rng, 0.0, kPi / 2.0);
          break;
        case ShapeKind::kSphere:
          p.half_extents = Vec3::Constant(sx / 2.0);
          p.yaw = 0.0;
          break;
        case ShapeKind::kCylinder:
          p.half_extents = Vec3(sx / 2.0, sx / 2.0, sz / 2.0);
          p.yaw = 0.0;
          break;
      }
      const double reach = spec.placement_half_extent;
      p.center = Vec3(uniform(rng, -reach, reach), uniform(rng, -reach, reach),
                      spec.float_height + p.half_extents.z());
      placed = std::all_of(
          scene.objects.begin(), scene.objects.end(), [&](const Primitive& q) {
            const double d = (p.center - q.center).head<2>().norm();
            return d >= p.footprint_radius() + q.footprint_radius() + spec.min_gap;
          });
    }
    if (!placed) {
      throw ConfigError("scene spec: could not place object " +
                        std::to_string(id) + " without overlap");
    }
    scene.objects.push_back(p);
  }

  const Vec3 room_color(0.6, 0.6, 0.6);
  const double a = spec.room_half_extent;
  const double h = spec.wall_height;
  sample_rect(scene.cloud, rng, Vec3::Zero(), Vec3(a, 0, 0), Vec3(0, a, 0),
              spec.density, room_color, -1);
  if (h > 0.0) {
    for (int axis = 0; axis < 2; ++axis) {
      for (double side : {-a, a}) {
        Vec3 c(0, 0, h / 2.0);
        c[axis] = side;
        Vec3 u = Vec3::Zero();
        u[1 - axis] = a;
        sample_rect(scene.cloud, rng, c, u, Vec3(0, 0, h / 2.0), spec.density,
                    room_color, -1);
      }
    }
  }
  for (const Primitive& p : scene.objects) {
    const Vec3 color(uniform(rng, 0.1, 1.0), uniform(rng, 0.1, 1.0),
                     uniform(rng, 0.1, 1.0));
    sample_primitive(scene.cloud, rng, p, spec.density, color);
  }
  return scene;
}

Mat4 look_at(const Vec3& eye, const Vec3& target) {
  const Vec3 f = target - eye;
  if (!(f.norm() > 1e-12)) {
    throw std::invalid_argument("degenerate camera pose: zero view direction");
  }
  const Vec3 forward = f.normalized();
  const Vec3 r = forward.cross(Vec3::UnitZ());
  if (!(r.norm() > 1e-9)) {
    throw std::invalid_argument(
        "degenerate camera pose: view direction parallel to up");
  }
  const Vec3 right = r.normalized();
  const Vec3 down = forward.cross(right);
  Eigen::Matrix3d rot;
  rot.row(0) = right;
  rot.row(1) = down;
  rot.row(2) = forward;
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rot;
  m.topRightCorner<3, 1>() = -rot * eye;
  return m;
}

std::vector<Mat4> camera_poses(const SceneSpec& spec) {
  std::vector<Mat4> poses;
  const CameraPath& path = spec.path;
  const int t_count = spec.frame_count;
  if (path.waypoints.empty()) {
    for (int i = 0; i < t_count; ++i) {
      const double phi = path.phase + 2.0 * kPi * i / t_count;
      const Vec3 eye(path.orbit_radius * std::cos(phi),
                     path.orbit_radius * std::sin(phi), path.orbit_height);
      poses.push_back(look_at(eye, Vec3(0, 0, path.target_height)));
    }
    return poses;
  }
  const auto& wp = path.waypoints;
  for (int i = 0; i < t_count; ++i) {
    if (wp.size() == 1 || t_count == 1) {
      poses.push_back(look_at(wp[0].eye, wp[0].target));
      continue;
    }
    const double s = static_cast<double>(i) * (wp.size() - 1) / (t_count - 1);
    const std::size_t seg = std::min<std::size_t>(static_cast<std::size_t>(s),
                                                  wp.size() - 2);
    const double w = s - static_cast<double>(seg);
    const Vec3 eye = (1 - w) * wp[seg].eye + w * wp[seg + 1].eye;
    const Vec3 target = (1 - w) * wp[seg].target + w * wp[seg + 1].target;
    poses.push_back(look_at(eye, target));
  }
  return poses;
}

Intrinsics default_intrinsics(const SceneSpec& spec) {
  const double f = (spec.width / 2.0) / std::tan(spec.fov_degrees * kPi / 360.0);
  return Intrinsics{f, f, (spec.width - 1) / 2.0, (spec.height - 1) / 2.0};
}

std::vector<RenderedFrame> render_frames(const SynthScene& scene,
                                         const SceneSpec& spec, int threads) {
  const std::vector<Mat4> poses = camera_poses(spec);
  const Intrinsics k = default_intrinsics(spec);
  std::vector<RenderedFrame> frames(poses.size());
  parallel_for(static_cast<int>(poses.size()), threads, [&](int f) {
    RenderedFrame& out = frames[f];
    CameraFrame& cam = out.camera;
    cam.intrinsics = k;
    cam.world_to_camera = poses[f];
    cam.width = spec.width;
    cam.height = spec.height;
    cam.depth.assign(static_cast<std::size_t>(spec.width) * spec.height, 0.0f);
    out.instances.width = spec.width;
    out.instances.height = spec.height;
    out.instances.ids.assign(cam.depth.size(), -1);

    const Eigen::Matrix3d rt = poses[f].topLeftCorner<3, 3>().transpose();
    const Vec3 eye = cam.camera_center();
    for (int r = 0; r < spec.height; ++r) {
      for (int c = 0; c < spec.width; ++c) {
        // Camera-space direction with unit z, so t is the optical depth.
        const Vec3 dir = rt * Vec3((c - k.cx) / k.fx, (r - k.cy) / k.fy, 1.0);
        std::optional<double> best =
            intersect_room(eye, dir, scene.room_half_extent, scene.wall_height);
        int id = -1;
        for (const Primitive& p : scene.objects) {
          const auto t = p.intersect(eye, dir);
          if (t && (!best || *t < *best)) {
            best = t;
            id = p.id;
          }
        }
        if (!best) continue;
        const std::size_t idx = static_cast<std::size_t>(r) * spec.width + c;
        cam.depth[idx] = static_cast<float>(*best);
        out.instances.ids[idx] = id;
      }
    }
  });
  return frames;
}

std::vector<int> observed_points(const PointCloud& cloud,
                                 std::span<const CameraFrame> frames,
                                 double depth_tolerance) {
  std::vector<bool> seen(cloud.size(), false);
  for (const CameraFrame& f : frames) {
    for (const ProjectedPoint& p :
         project_points(cloud.positions, f, depth_tolerance)) {
      seen[p.point_index] = true;
    }
  }
  std::vector<int> out;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (seen[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

Scene make_scene(const SceneSpec& spec, int threads) {
  const SynthScene synth = generate_scene(spec);
  std::vector<RenderedFrame> rendered = render_frames(synth, spec, threads);
  Scene scene;
  for (RenderedFrame& f : rendered) {
    scene.frames.push_back(std::move(f.camera));
    scene.renders.push_back(std::move(f.instances));
  }
  if (spec.cull_unobserved) {
    const std::vector<int> keep =
        observed_points(synth.cloud, scene.frames, kDefaultDepthTolerance);
    for (int i : keep) {
      scene.cloud.positions.push_back(synth.cloud.positions[i]);
      scene.cloud.colors.push_back(synth.cloud.colors[i]);
      scene.cloud.gt_instance.push_back(synth.cloud.gt_instance[i]);
    }
  } else {
    scene.cloud = synth.cloud;
  }
  return scene;
}

std::vector<SceneSpec> default_suite() {
  std::vector<SceneSpec> suite;
  for (int i = 0; i < 5; ++i) {
    SceneSpec s;
    s.object_count = 4 + i;
    s.seed = 1001 + static_cast<std::uint64_t>(i);
    s.path.phase = 0.3 * i;
    suite.push_back(s);
  }
  return suite;
}

}  // namespace masklift
