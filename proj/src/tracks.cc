#include "masklift/tracks.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

#include "masklift/errors.h"
#include "masklift/random.h"

namespace masklift {

std::size_t Mask2D::popcount() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1));
}

namespace {

struct UniquePixel {
  Pixel px;
  double dist = std::numeric_limits<double>::infinity();
};

std::vector<Pixel> unique_pixels(const PixelSet& rho) {
  std::set<Pixel> seen;
  for (const ProjectedPoint& p : rho) seen.insert({p.row, p.col});
  return {seen.begin(), seen.end()};
}

// Pixel closest to the mean of `pixels`; ties resolve to the smaller pixel.
Pixel central_pixel(const std::vector<Pixel>& pixels) {
  double mr = 0.0;
  double mc = 0.0;
  for (const Pixel& p : pixels) {
    mr += p.row;
    mc += p.col;
  }
  mr /= pixels.size();
  mc /= pixels.size();
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const double d = (pixels[i].row - mr) * (pixels[i].row - mr) +
                     (pixels[i].col - mc) * (pixels[i].col - mc);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return pixels[best];
}

std::vector<Pixel> fps_pixels(const std::vector<Pixel>& pixels, int count) {
  std::vector<UniquePixel> pool;
  pool.reserve(pixels.size());
  for (const Pixel& p : pixels) pool.push_back({p});
  const Pixel start = central_pixel(pixels);
  std::vector<Pixel> picks{start};
  std::vector<bool> taken(pool.size(), false);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].px == start) taken[i] = true;
  }
  const std::size_t want = std::min<std::size_t>(count, pool.size());
  while (picks.size() < want) {
    const Pixel last = picks.back();
    std::size_t best = pool.size();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (taken[i]) continue;
      const double dr = pool[i].px.row - last.row;
      const double dc = pool[i].px.col - last.col;
      pool[i].dist = std::min(pool[i].dist, std::sqrt(dr * dr + dc * dc));
      if (best == pool.size() || pool[i].dist > pool[best].dist) best = i;
    }
    taken[best] = true;
    picks.push_back(pool[best].px);
  }
  return picks;
}

}  // namespace

std::vector<int> reprompt_positions(const std::vector<bool>& visible,
                                    int pivot, int memory_window) {
  std::vector<int> out;
  const int n = static_cast<int>(visible.size());
  int gap = 0;
  for (int p = pivot - 1; p >= 0; --p) {
    if (visible[p]) {
      if (gap > memory_window) out.push_back(p);
      gap = 0;
    } else {
      ++gap;
    }
  }
  gap = 0;
  for (int p = pivot + 1; p < n; ++p) {
    if (visible[p]) {
      if (gap > memory_window) out.push_back(p);
      gap = 0;
    } else {
      ++gap;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

TrackerQuery build_tracker_query(int superpoint, const ProjectionTable& table,
                                 int pivot_view_position, int memory_window,
                                 int prompt_count) {
  if (pivot_view_position < 0 || pivot_view_position >= table.view_count()) {
    throw std::out_of_range("build_tracker_query: pivot outside working views");
  }
  const PixelSet rho = table.projection(pivot_view_position, superpoint);
  if (rho.empty()) throw LiftError("superpoint invisible in pivot");

  TrackerQuery q;
  q.pivot_view = table.frame_of(pivot_view_position);
  q.seed_superpoint = superpoint;
  q.point_prompts = fps_pixels(unique_pixels(rho), prompt_count);

  std::vector<bool> visible(table.view_count());
  for (int v = 0; v < table.view_count(); ++v) {
    visible[v] = table.count(v, superpoint) > 0;
  }
  for (int v : reprompt_positions(visible, pivot_view_position, memory_window)) {
    q.reprompt_points[table.frame_of(v)] =
        central_pixel(unique_pixels(table.projection(v, superpoint)));
  }
  return q;
}

void NoiseSpec::validate() const {
  const auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_unit(p_drop) || !in_unit(p_flip)) {
    throw ConfigError("noise probabilities must lie in [0,1]");
  }
  if (r_morph < 0) throw ConfigError("noise r_morph must be >= 0");
  if (memory_window < 0) throw ConfigError("memory_window must be >= 0");
}

MaskTrack oracle_track(const TrackerQuery& query, const TrackContext& context) {
  if (context.table == nullptr) {
    throw std::invalid_argument("oracle_track: missing projection table");
  }
  if (query.pivot_view < 0 ||
      query.pivot_view >= static_cast<int>(context.renders.size())) {
    throw DataError("oracle_track: no instance render for pivot view");
  }
  const InstanceRender& pivot = context.renders[query.pivot_view];
  std::map<int, int> votes;
  for (const Pixel& p : query.point_prompts) {
    const int id = pivot.at(p.row, p.col);
    if (id >= 0) ++votes[id];
  }
  if (votes.empty()) throw LiftError("prompts hit no instance");
  int object = votes.begin()->first;
  for (const auto& [id, n] : votes) {
    if (n > votes[object]) object = id;
  }

  MaskTrack track;
  track.score = 1.0;
  track.pivot_view = query.pivot_view;
  track.seed_superpoint = query.seed_superpoint;
  for (int frame : context.table->frames()) {
    if (frame >= static_cast<int>(context.renders.size())) {
      throw DataError("oracle_track: no instance render for frame " +
                      std::to_string(frame));
    }
    const InstanceRender& r = context.renders[frame];
    Mask2D m(r.width, r.height);
    bool any = false;
    for (std::size_t i = 0; i < r.ids.size(); ++i) {
      if (r.ids[i] == object) {
        m.bits[i] = 1;
        any = true;
      }
    }
    if (any) track.masks.emplace(frame, std::move(m));
  }
  return track;
}

namespace {

Mask2D morph(const Mask2D& m, int radius, bool dilate) {
  Mask2D out(m.width, m.height);
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      bool hit = !dilate;
      for (int dr = -radius; dr <= radius && hit != dilate; ++dr) {
        for (int dc = -radius; dc <= radius; ++dc) {
          if (dr * dr + dc * dc > radius * radius) continue;
          const int rr = r + dr;
          const int cc = c + dc;
          const bool v = rr >= 0 && rr < m.height && cc >= 0 && cc < m.width &&
                         m.at(rr, cc);
          if (dilate && v) {
            hit = true;
            break;
          }
          if (!dilate && !v) {
            hit = false;
            break;
          }
        }
      }
      out.set(r, c, hit);
    }
  }
  return out;
}

}  // namespace

MaskTrack noisy_track(const TrackerQuery& query, const TrackContext& context,
                      const NoiseSpec& noise, std::uint64_t rng_seed) {
  noise.validate();
  MaskTrack track = oracle_track(query, context);
  if (noise.is_identity()) return track;
  const std::size_t oracle_views = track.masks.size();
  const ProjectionTable& table = *context.table;

  for (int v = 0; v < table.view_count(); ++v) {
    const int frame = table.frame_of(v);
    auto it = track.masks.find(frame);
    if (it == track.masks.end()) continue;
    std::mt19937_64 rng(splitmix64(rng_seed ^ splitmix64(frame + 1)));
    if (frame != track.pivot_view && unit(rng) < noise.p_drop) {
      track.masks.erase(it);
      continue;
    }
    Mask2D m = it->second;
    if (noise.r_morph > 0) {
      m = morph(m, noise.r_morph, unit(rng) < 0.5);
    }
    if (noise.p_flip > 0.0) {
      const int band = std::max(1, noise.r_morph);
      const Mask2D outer = morph(m, band, true);
      const Mask2D inner = morph(m, band, false);
      for (std::size_t i = 0; i < m.bits.size(); ++i) {
        if (outer.bits[i] != inner.bits[i] && unit(rng) < noise.p_flip) {
          m.bits[i] ^= 1;
        }
      }
    }
    if (m.popcount() == 0 && frame != track.pivot_view) {
      track.masks.erase(it);
    } else {
      it->second = std::move(m);
    }
  }

  // Memory loss: after more than memory_window consecutive views without a
  // mask the tracker drops the object until the next re-prompt.
  const int pivot = table.view_of_frame(track.pivot_view);
  const auto sweep = [&](int step) {
    int gap = 0;
    bool forgotten = false;
    for (int v = pivot + step; v >= 0 && v < table.view_count(); v += step) {
      const int frame = table.frame_of(v);
      if (query.reprompt_points.count(frame) != 0) {
        forgotten = false;
        gap = 0;
      }
      auto it = track.masks.find(frame);
      if (forgotten) {
        if (it != track.masks.end()) track.masks.erase(it);
        continue;
      }
      if (it != track.masks.end()) {
        gap = 0;
      } else if (++gap > noise.memory_window) {
        forgotten = true;
      }
    }
  };
  sweep(+1);
  sweep(-1);

  track.score = oracle_views == 0 ? 0.0
                                  : static_cast<double>(track.masks.size()) /
                                        static_cast<double>(oracle_views);
  return track;
}

MaskTrack NoisyTracker::track(const TrackerQuery& query,
                              const TrackContext& context) const {
  const std::uint64_t seed =
      splitmix64(seed_ ^ splitmix64(static_cast<std::uint64_t>(
                             query.seed_superpoint + 1) * 0x100000001b3ull));
  return noisy_track(query, context, noise_, seed);
}

MaskTrack FileTracker::track(const TrackerQuery& query,
                             const TrackContext&) const {
  for (const MaskTrack& t : tracks_) {
    if (t.seed_superpoint >= 0 && t.seed_superpoint == query.seed_superpoint) {
      return t;
    }
  }
  for (const MaskTrack& t : tracks_) {
    if (t.pivot_view == query.pivot_view) return t;
  }
  throw LiftError("no file track for pivot view " +
                  std::to_string(query.pivot_view));
}

}  // namespace masklift
