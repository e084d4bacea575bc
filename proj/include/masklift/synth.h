#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "masklift/scene.h"

namespace masklift {

enum class ShapeKind { kBox, kSphere, kCylinder };

// Analytic scene primitive. Boxes use half_extents and a yaw about +z;
// spheres use half_extents.x() as radius; cylinders are upright with radius
// half_extents.x() and half height half_extents.z().
struct Primitive {
  ShapeKind kind = ShapeKind::kBox;
  int id = 0;
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Constant(0.5);
  double yaw = 0.0;

  double surface_area() const;
  // Radius of the footprint in the xy plane.
  double footprint_radius() const;
  // Nearest ray parameter t > 0 with origin + t * dir on the surface.
  std::optional<double> intersect(const Vec3& origin, const Vec3& dir) const;
};

struct Waypoint {
  Vec3 eye;
  Vec3 target;
};

struct CameraPath {
  // Orbit around the vertical axis when `waypoints` is empty, otherwise a
  // piecewise-linear path through the waypoints.
  double orbit_radius = 2.4;
  double orbit_height = 1.6;
  double target_height = 0.2;
  double phase = 0.0;
  std::vector<Waypoint> waypoints;
};

struct SceneSpec {
  double room_half_extent = 1.6;  // floor spans [-a, a]^2
  double wall_height = 0.35;
  int object_count = 5;
  std::vector<ShapeKind> palette = {ShapeKind::kBox, ShapeKind::kSphere,
                                    ShapeKind::kCylinder};
  double size_min = 0.4;
  double size_max = 0.7;
  double placement_half_extent = 1.0;
  double float_height = 0.15;  // gap between objects and the floor
  double min_gap = 0.15;       // between object footprints
  double density = 800.0;      // points per square meter
  int frame_count = 60;
  int width = 64;
  int height = 64;
  double fov_degrees = 60.0;
  CameraPath path;
  std::uint64_t seed = 1;
  // Drop points no frame observes, as a fused scan would.
  bool cull_unobserved = true;

  void validate() const;
};

struct SynthScene {
  PointCloud cloud;
  std::vector<Primitive> objects;
  double room_half_extent = 0.0;
  double wall_height = 0.0;
};

struct RenderedFrame {
  CameraFrame camera;
  InstanceRender instances;
};

// Points sampled uniformly on the floor, the walls and every object surface.
// Labels are object ids, -1 for the room.
SynthScene generate_scene(const SceneSpec& spec);

// World-to-camera pose looking from `eye` at `target` (x right, y down,
// z forward). Throws std::invalid_argument for degenerate directions.
Mat4 look_at(const Vec3& eye, const Vec3& target);

std::vector<Mat4> camera_poses(const SceneSpec& spec);
Intrinsics default_intrinsics(const SceneSpec& spec);

// Ray cast per pixel center: depth is the camera-space z of the nearest hit
// (0 on a miss), the instance render the nearest object id (-1 otherwise).
std::vector<RenderedFrame> render_frames(const SynthScene& scene,
                                         const SceneSpec& spec,
                                         int threads = 1);

// Points passing the occlusion test in at least one frame.
std::vector<int> observed_points(const PointCloud& cloud,
                                 std::span<const CameraFrame> frames,
                                 double depth_tolerance);

// generate_scene + render_frames (+ culling when requested).
Scene make_scene(const SceneSpec& spec, int threads = 1);

// Five scenes with 4 to 8 objects, 60 frames of 64x64.
std::vector<SceneSpec> default_suite();

}  // namespace masklift
