#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "masklift/errors.h"
#include "masklift/scene.h"

namespace fs = std::filesystem;

namespace masklift {

static_assert(std::endian::native == std::endian::little,
              "scene binaries are written in native little-endian order");

void Scene::validate() const {
  cloud.validate();
  if (frames.empty()) throw DataError("scene has no frames");
  const CameraFrame& first = frames.front();
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const CameraFrame& f = frames[t];
    try {
      f.validate();
    } catch (const DataError& e) {
      throw DataError("frame " + std::to_string(t) + ": " + e.what());
    }
    if (f.width != first.width || f.height != first.height ||
        !(f.intrinsics == first.intrinsics)) {
      throw DataError("frame " + std::to_string(t) +
                      ": image size or intrinsics differ from frame 0");
    }
  }
  if (!renders.empty()) {
    if (renders.size() != frames.size()) {
      throw DataError("scene: instance renders do not match frame count");
    }
    for (std::size_t t = 0; t < renders.size(); ++t) {
      const InstanceRender& r = renders[t];
      if (r.width != first.width || r.height != first.height ||
          r.ids.size() != static_cast<std::size_t>(r.width) * r.height) {
        throw DataError("frame " + std::to_string(t) +
                        ": instance render size mismatch");
      }
    }
  }
}

namespace {

std::string frame_path(const fs::path& dir, int t, const char* ext) {
  char name[32];
  std::snprintf(name, sizeof(name), "%04d.%s", t, ext);
  return (dir / "frames" / name).string();
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
void write_binary(const std::string& path, const std::vector<T>& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(T)));
  if (!out) throw DataError("error writing " + path);
}

template <typename T>
std::vector<T> read_binary(const std::string& path, std::size_t expected) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("cannot read " + path);
  const std::streamsize bytes = in.tellg();
  if (bytes != static_cast<std::streamsize>(expected * sizeof(T))) {
    throw DataError(path + ": " + std::to_string(bytes) + " bytes, expected " +
                    std::to_string(expected * sizeof(T)) +
                    " for the image size in intrinsics.txt");
  }
  in.seekg(0);
  std::vector<T> data(expected);
  in.read(reinterpret_cast<char*>(data.data()), bytes);
  return data;
}

}  // namespace

void save_scene(const Scene& scene, const std::string& dir_str) {
  scene.validate();
  const fs::path dir(dir_str);
  fs::create_directories(dir / "frames");
  {
    std::ofstream out(dir / "cloud.txt");
    if (!out) throw DataError("cannot write cloud.txt in " + dir_str);
    for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
      const Vec3& p = scene.cloud.positions[i];
      const Vec3& c = scene.cloud.colors[i];
      out << format_real(p.x()) << ' ' << format_real(p.y()) << ' '
          << format_real(p.z()) << ' ' << format_real(c.x()) << ' '
          << format_real(c.y()) << ' ' << format_real(c.z()) << ' '
          << (scene.cloud.has_labels() ? scene.cloud.gt_instance[i] : -1)
          << '\n';
    }
  }
  const CameraFrame& f0 = scene.frames.front();
  {
    std::ofstream out(dir / "intrinsics.txt");
    out << format_real(f0.intrinsics.fx) << ' ' << format_real(f0.intrinsics.fy)
        << ' ' << format_real(f0.intrinsics.cx) << ' '
        << format_real(f0.intrinsics.cy) << ' ' << f0.width << ' '
        << f0.height << '\n';
  }
  for (std::size_t t = 0; t < scene.frames.size(); ++t) {
    const CameraFrame& f = scene.frames[t];
    std::ofstream pose(frame_path(dir, static_cast<int>(t), "pose"));
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        pose << format_real(f.world_to_camera(r, c)) << (c == 3 ? '\n' : ' ');
      }
    }
    write_binary(frame_path(dir, static_cast<int>(t), "depth"), f.depth);
    if (scene.has_renders()) {
      write_binary(frame_path(dir, static_cast<int>(t), "inst"),
                   scene.renders[t].ids);
    }
  }
}

Scene load_scene(const std::string& dir_str) {
  const fs::path dir(dir_str);
  if (!fs::is_directory(dir)) throw DataError("no scene directory " + dir_str);
  Scene scene;
  bool labeled = false;
  {
    std::ifstream in(dir / "cloud.txt");
    if (!in) throw DataError("cannot read " + (dir / "cloud.txt").string());
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      Vec3 p;
      Vec3 c;
      int label = -1;
      if (!(ls >> p.x() >> p.y() >> p.z() >> c.x() >> c.y() >> c.z())) {
        throw DataError("cloud.txt line " + std::to_string(line_no) +
                        ": expected x y z r g b [gt_instance]");
      }
      if (ls >> label) labeled = labeled || label >= 0;
      scene.cloud.positions.push_back(p);
      scene.cloud.colors.push_back(c);
      scene.cloud.gt_instance.push_back(label);
    }
  }
  if (!labeled) scene.cloud.gt_instance.clear();

  Intrinsics k;
  int width = 0;
  int height = 0;
  {
    std::ifstream in(dir / "intrinsics.txt");
    if (!(in >> k.fx >> k.fy >> k.cx >> k.cy >> width >> height)) {
      throw DataError("intrinsics.txt: expected fx fy cx cy W H");
    }
    if (width <= 0 || height <= 0) {
      throw DataError("intrinsics.txt: image size must be positive");
    }
  }
  const std::size_t pixels = static_cast<std::size_t>(width) * height;
  for (int t = 0;; ++t) {
    const std::string pose_path = frame_path(dir, t, "pose");
    if (!fs::exists(pose_path)) break;
    CameraFrame f;
    f.intrinsics = k;
    f.width = width;
    f.height = height;
    std::ifstream pose(pose_path);
    for (int i = 0; i < 16; ++i) {
      if (!(pose >> f.world_to_camera(i / 4, i % 4))) {
        throw DataError(pose_path + ": expected 16 reals");
      }
    }
    f.depth = read_binary<float>(frame_path(dir, t, "depth"), pixels);
    scene.frames.push_back(std::move(f));
    const std::string inst = frame_path(dir, t, "inst");
    if (fs::exists(inst)) {
      InstanceRender r;
      r.width = width;
      r.height = height;
      r.ids = read_binary<std::int32_t>(inst, pixels);
      scene.renders.push_back(std::move(r));
    }
  }
  if (!scene.renders.empty() && scene.renders.size() != scene.frames.size()) {
    throw DataError("scene: some frames lack instance renders");
  }
  scene.validate();
  return scene;
}

}  // namespace masklift
