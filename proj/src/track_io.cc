#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "masklift/errors.h"
#include "masklift/tracks.h"

namespace masklift {

std::vector<std::int64_t> rle_encode(const Mask2D& mask) {
  std::vector<std::int64_t> runs;
  std::uint8_t current = 0;
  std::int64_t length = 0;
  for (std::uint8_t b : mask.bits) {
    if (b != current) {
      runs.push_back(length);
      current = b;
      length = 0;
    }
    ++length;
  }
  runs.push_back(length);
  return runs;
}

Mask2D rle_decode(std::span<const std::int64_t> runs, int width, int height) {
  Mask2D m(width, height);
  std::int64_t pos = 0;
  const std::int64_t total = static_cast<std::int64_t>(width) * height;
  std::uint8_t value = 0;
  for (std::int64_t run : runs) {
    if (run < 0) throw DataError("negative run length");
    if (pos + run > total) {
      throw DataError("runs exceed " + std::to_string(total) + " pixels");
    }
    std::fill_n(m.bits.begin() + pos, run, value);
    pos += run;
    value ^= 1;
  }
  if (pos != total) {
    throw DataError("runs sum to " + std::to_string(pos) + ", expected " +
                    std::to_string(total));
  }
  return m;
}

namespace {

constexpr std::string_view kMagic = "masklift-tracks";

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T* out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), *out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_real(std::string_view s, double* out) {
  // from_chars for double is missing from older libstdc++.
  std::string tmp(s);
  char* end = nullptr;
  *out = std::strtod(tmp.c_str(), &end);
  return !tmp.empty() && end == tmp.c_str() + tmp.size();
}

}  // namespace

std::string format_tracks(const std::vector<MaskTrack>& tracks, int width,
                          int height) {
  std::ostringstream out;
  out << kMagic << " 1 " << width << ' ' << height << '\n';
  for (const MaskTrack& t : tracks) {
    out << t.track_id << '\t' << format_double(t.score) << '\t'
        << t.pivot_view;
    for (const auto& [view, mask] : t.masks) {
      if (mask.width != width || mask.height != height) {
        throw DataError("track " + std::to_string(t.track_id) + " view " +
                        std::to_string(view) + ": mask is " +
                        std::to_string(mask.width) + "x" +
                        std::to_string(mask.height) + ", file is " +
                        std::to_string(width) + "x" + std::to_string(height));
      }
      out << '\t' << view << ':';
      const auto runs = rle_encode(mask);
      for (std::size_t i = 0; i < runs.size(); ++i) {
        if (i) out << ' ';
        out << runs[i];
      }
    }
    if (t.seed_superpoint >= 0) out << "\tseed=" << t.seed_superpoint;
    out << '\n';
  }
  return out.str();
}

std::vector<MaskTrack> parse_tracks(const std::string& text) {
  std::vector<MaskTrack> tracks;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  const auto fail = [&](const std::string& what) -> DataError {
    return DataError("track file line " + std::to_string(line_no) + ": " +
                     what);
  };

  if (!std::getline(in, line)) {
    line_no = 1;
    throw fail("missing header");
  }
  ++line_no;
  int width = 0;
  int height = 0;
  {
    const auto f = split(line, ' ');
    int version = 0;
    if (f.size() != 4 || f[0] != kMagic || !parse_number(f[1], &version) ||
        version != 1 || !parse_number(f[2], &width) ||
        !parse_number(f[3], &height) || width <= 0 || height <= 0) {
      throw fail("bad header, expected \"masklift-tracks 1 <W> <H>\"");
    }
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto f = split(line, '\t');
    if (f.size() < 3) throw fail("expected track_id, score, pivot_view");
    MaskTrack t;
    if (!parse_number(f[0], &t.track_id)) throw fail("bad track_id");
    if (!parse_real(f[1], &t.score) || !std::isfinite(t.score)) {
      throw fail("bad score");
    }
    if (!parse_number(f[2], &t.pivot_view)) throw fail("bad pivot_view");
    for (std::size_t i = 3; i < f.size(); ++i) {
      const std::string_view entry = f[i];
      if (entry.starts_with("seed=")) {
        if (i + 1 != f.size() ||
            !parse_number(entry.substr(5), &t.seed_superpoint)) {
          throw fail("bad seed field");
        }
        continue;
      }
      const std::size_t colon = entry.find(':');
      int view = 0;
      if (colon == std::string_view::npos ||
          !parse_number(entry.substr(0, colon), &view)) {
        throw fail("bad view entry \"" + std::string(entry.substr(0, 16)) +
                   "\"");
      }
      std::vector<std::int64_t> runs;
      for (std::string_view tok : split(entry.substr(colon + 1), ' ')) {
        if (tok.empty()) continue;
        std::int64_t r = 0;
        if (!parse_number(tok, &r)) throw fail("bad run length");
        runs.push_back(r);
      }
      try {
        if (!t.masks.emplace(view, rle_decode(runs, width, height)).second) {
          throw fail("duplicate view " + std::to_string(view));
        }
      } catch (const DataError& e) {
        if (std::string_view(e.what()).starts_with("track file line")) throw;
        throw fail("view " + std::to_string(view) + ": malformed RLE, " +
                   e.what());
      }
    }
    if (t.masks.count(t.pivot_view) == 0) {
      throw fail("pivot view " + std::to_string(t.pivot_view) +
                 " has no mask");
    }
    tracks.push_back(std::move(t));
  }
  return tracks;
}

void write_tracks(const std::vector<MaskTrack>& tracks, int width, int height,
                  const std::string& path) {
  const std::string text = format_tracks(tracks, width, height);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write track file " + path);
  out << text;
  if (!out) throw DataError("error writing track file " + path);
}

std::vector<MaskTrack> read_tracks(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read track file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_tracks(buf.str());
}

FileTracker FileTracker::load(const std::string& path) {
  return FileTracker(read_tracks(path));
}

}  // namespace masklift
