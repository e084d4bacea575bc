#include "cli.h"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "masklift/ablation.h"
#include "masklift/config.h"
#include "masklift/errors.h"
#include "masklift/evaluation.h"
#include "masklift/pipeline.h"
#include "masklift/proposal_io.h"
#include "masklift/scene.h"
#include "masklift/synth.h"
#include "masklift/tracks.h"

namespace masklift::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr const char* kProposalsFile = "proposals.jsonl";
constexpr const char* kPointsFile = "proposals.points.jsonl";
constexpr const char* kSuperpointsFile = "superpoints.txt";
constexpr const char* kManifestFile = "manifest.json";

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Flags that shadow config keys. Values stay text so config parsing is the
// single place that interprets them.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::vector<std::pair<CLI::Option*, std::string>> options;

  void add(CLI::App* app, const std::string& flag, const std::string& key,
           const std::string& help) {
    options.emplace_back(app->add_option(flag, values[key], help), key);
  }

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "flat key = value config file");
    add(app, "--tau", "tau", "visibility threshold in [0, 1]");
    add(app, "--depth-tol", "depth_tolerance", "occlusion depth tolerance");
    add(app, "--stride", "view_stride", "working view interval");
    add(app, "--kappa", "kappa", "neighbor count for view scaling");
    add(app, "--strategy", "refine_strategy",
        "dp | brute_views | brute_superpoints | top_k(K) | all_lifted");
    add(app, "--samples-per-round", "samples_per_round", "seeds per round");
    add(app, "--max-rounds", "max_rounds", "round cap");
    add(app, "--dedup-iou", "dedup_iou", "duplicate point-IoU threshold");
    add(app, "--overlap-mode", "overlap_mode", "containment | iou");
    add(app, "--seed", "seed", "rng seed");
    add(app, "--threads", "threads", "worker cap");
    add(app, "--p-drop", "p_drop", "noisy tracker: mask drop probability");
    add(app, "--r-morph", "r_morph", "noisy tracker: morphology radius");
    add(app, "--p-flip", "p_flip", "noisy tracker: boundary flip probability");
    add(app, "--memory-window", "memory_window", "tracker memory in views");
  }

  // Default, then `base` (a replayed snapshot), then the config file, then
  // flags given on the command line.
  PipelineConfig resolve(
      const std::vector<std::pair<std::string, std::string>>& base = {}) const {
    PipelineConfig config;
    for (const auto& [k, v] : base) config.set(k, v);
    if (!config_file.empty()) {
      for (const auto& [k, v] : read_config_file(config_file)) config.set(k, v);
    }
    for (const auto& [opt, key] : options) {
      if (opt->count() > 0) config.set(key, values.at(key));
    }
    config.validate();
    return config;
  }
};

std::unique_ptr<TrackProvider> make_provider(const std::string& spec,
                                             const PipelineConfig& config,
                                             const Scene& scene) {
  if (spec.rfind("file:", 0) == 0) {
    return std::make_unique<FileTracker>(FileTracker::load(spec.substr(5)));
  }
  if (spec != "oracle" && spec != "noisy") {
    throw ConfigError("unknown tracker \"" + spec +
                      "\" (expected oracle, noisy or file:PATH)");
  }
  if (!scene.has_renders()) {
    throw DataError(spec + " tracker needs instance renders in the scene");
  }
  if (spec == "oracle") return std::make_unique<OracleTracker>();
  return std::make_unique<NoisyTracker>(config.noise, config.seed);
}

// Absolute form of a file: tracker spec, so a manifest replays from any cwd.
std::string absolute_tracker(const std::string& spec) {
  if (spec.rfind("file:", 0) != 0) return spec;
  return "file:" + fs::absolute(spec.substr(5)).lexically_normal().string();
}

std::vector<ScoredMask> to_predictions(const std::vector<Proposal>& proposals) {
  std::vector<ScoredMask> preds;
  preds.reserve(proposals.size());
  for (const Proposal& p : proposals) preds.push_back({p.point_mask, p.score});
  return preds;
}

GroundTruth require_gt(const Scene& scene) {
  GroundTruth gt = GroundTruth::from_labels(scene.cloud.gt_instance);
  if (gt.size() == 0) {
    throw DataError("scene has no ground-truth instance labels");
  }
  return gt;
}

// ---- generate ----

struct GenerateArgs {
  std::string out;
  int suite = -1;
  int objects = 0;
  int frames = 0;
  std::uint64_t seed = 0;
  int width = 0;
  int height = 0;
  double density = 0.0;
  int threads = 1;
  bool force = false;
  CLI::Option* objects_opt = nullptr;
  CLI::Option* frames_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* width_opt = nullptr;
  CLI::Option* height_opt = nullptr;
  CLI::Option* density_opt = nullptr;
};

void attach_generate(CLI::App* app, GenerateArgs& a) {
  app->add_option("--out", a.out, "scene directory")->required();
  app->add_option("--suite", a.suite, "start from default suite scene 0-4");
  a.objects_opt = app->add_option("--objects", a.objects, "object count");
  a.frames_opt = app->add_option("--frames", a.frames, "frame count");
  a.seed_opt = app->add_option("--seed", a.seed, "rng seed");
  a.width_opt = app->add_option("--width", a.width, "image width");
  a.height_opt = app->add_option("--height", a.height, "image height");
  a.density_opt =
      app->add_option("--density", a.density, "surface points per m^2");
  app->add_option("--threads", a.threads, "render workers");
  app->add_flag("--force", a.force, "write into a non-empty directory");
}

ordered_json spec_json(const SceneSpec& s) {
  return ordered_json{{"room_half_extent", s.room_half_extent},
                      {"wall_height", s.wall_height},
                      {"object_count", s.object_count},
                      {"size_min", s.size_min},
                      {"size_max", s.size_max},
                      {"density", s.density},
                      {"frame_count", s.frame_count},
                      {"width", s.width},
                      {"height", s.height},
                      {"fov_degrees", s.fov_degrees},
                      {"orbit_radius", s.path.orbit_radius},
                      {"orbit_height", s.path.orbit_height},
                      {"phase", s.path.phase},
                      {"seed", s.seed},
                      {"cull_unobserved", s.cull_unobserved}};
}

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  SceneSpec spec;
  if (a.suite >= 0) {
    const auto suite = default_suite();
    if (a.suite >= static_cast<int>(suite.size())) {
      throw ConfigError("--suite must be below " + std::to_string(suite.size()));
    }
    spec = suite[a.suite];
  }
  if (a.objects_opt->count()) spec.object_count = a.objects;
  if (a.frames_opt->count()) spec.frame_count = a.frames;
  if (a.seed_opt->count()) spec.seed = a.seed;
  if (a.width_opt->count()) spec.width = a.width;
  if (a.height_opt->count()) spec.height = a.height;
  if (a.density_opt->count()) spec.density = a.density;
  spec.validate();

  const fs::path dir(a.out);
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) {
      throw ConfigError(a.out + " exists and is not a directory");
    }
    if (!fs::is_empty(dir)) {
      if (!a.force) {
        throw ConfigError(a.out + " is not empty (use --force to overwrite)");
      }
      // Only the scene layout is replaced; other files are left alone.
      fs::remove_all(dir / "frames");
      fs::remove(dir / "cloud.txt");
      fs::remove(dir / "intrinsics.txt");
      fs::remove(dir / kManifestFile);
    }
  }
  const Scene scene = make_scene(spec, a.threads);
  save_scene(scene, a.out);

  ordered_json manifest;
  manifest["command"] = "generate";
  manifest["spec"] = spec_json(spec);
  manifest["points"] = scene.cloud.positions.size();
  write_text_file(dir / kManifestFile, manifest.dump(2) + "\n");

  out << "objects " << spec.object_count << '\n';
  out << "frames " << scene.frames.size() << '\n';
  out << "points " << scene.cloud.positions.size() << '\n';
  return kOk;
}

// ---- segment ----

struct SegmentArgs {
  std::string scene;
  std::string tracker = "oracle";
  std::string out;
  std::string replay;
  ConfigFlags flags;
  CLI::Option* scene_opt = nullptr;
  CLI::Option* tracker_opt = nullptr;
};

void attach_segment(CLI::App* app, SegmentArgs& a) {
  a.scene_opt = app->add_option("--scene", a.scene, "scene directory");
  a.tracker_opt = app->add_option("--tracker", a.tracker,
                                  "oracle | noisy | file:PATH");
  app->add_option("--out", a.out, "output directory")->required();
  app->add_option("--replay", a.replay,
                  "rerun from a manifest; other flags override it");
  a.flags.attach(app);
}

int cmd_segment(SegmentArgs a, std::ostream& out, std::ostream& err) {
  std::vector<std::pair<std::string, std::string>> base;
  if (!a.replay.empty()) {
    ordered_json m;
    try {
      m = ordered_json::parse(read_text_file(a.replay));
      if (!a.scene_opt->count()) a.scene = m.at("inputs").at("scene");
      if (!a.tracker_opt->count()) a.tracker = m.at("inputs").at("tracker");
      for (const auto& [k, v] : m.at("config").items()) {
        base.emplace_back(k, v.get<std::string>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError("manifest " + a.replay + ": " + e.what());
    }
  }
  if (a.scene.empty()) throw ConfigError("segment needs --scene or --replay");
  const PipelineConfig config = a.flags.resolve(base);

  auto start = Clock::now();
  const Scene scene = load_scene(a.scene);
  const double load_s = seconds_since(start);
  const auto provider = make_provider(a.tracker, config, scene);

  const PreparedScene prepared = prepare_scene(scene, config);
  const PipelineResult result = run_pipeline(prepared, *provider, config);

  start = Clock::now();
  const fs::path dir(a.out);
  fs::create_directories(dir);
  write_text_file(dir / kProposalsFile, format_proposals(result.proposals));
  write_text_file(dir / kPointsFile, format_proposal_points(result.proposals));
  write_text_file(dir / kSuperpointsFile,
                  format_superpoints(prepared.partition()));
  const double write_s = seconds_since(start);

  ordered_json manifest;
  manifest["command"] = "segment";
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : config.entries()) cfg[k] = v;
  manifest["config"] = cfg;
  manifest["seed"] = config.seed;
  manifest["inputs"] = {
      {"scene", fs::absolute(a.scene).lexically_normal().string()},
      {"tracker", absolute_tracker(a.tracker)}};
  manifest["outputs"] = {{"proposals", kProposalsFile},
                         {"points", kPointsFile},
                         {"superpoints", kSuperpointsFile}};
  ordered_json rounds = ordered_json::array();
  for (const RoundReport& r : result.rounds) {
    rounds.push_back({{"round", r.round},
                      {"seeds", r.seeds},
                      {"proposals", r.proposals},
                      {"unliftable", r.unliftable}});
  }
  manifest["rounds"] = rounds;
  manifest["superpoints"] = prepared.partition().count();
  manifest["raw_proposals"] = result.raw_proposals;
  manifest["proposals"] = result.proposals.size();
  manifest["round_cap_hit"] = result.round_cap_hit;
  manifest["free_superpoints_left"] = result.free_left;
  manifest["timings_s"] = {{"load", load_s},
                           {"prepare", result.timings.prepare_s},
                           {"rounds", result.timings.rounds_s},
                           {"dedup", result.timings.dedup_s},
                           {"write", write_s}};
  write_text_file(dir / kManifestFile, manifest.dump(2) + "\n");

  if (result.round_cap_hit) {
    err << "warning: round cap reached with " << result.free_left
        << " free superpoints left\n";
  }
  out << "superpoints " << prepared.partition().count() << '\n';
  out << "rounds " << result.rounds.size() << '\n';
  out << "proposals " << result.proposals.size() << '\n';
  return kOk;
}

// ---- eval ----

struct EvalArgs {
  std::string scene;
  std::string proposals;
  std::string out;
};

void attach_eval(CLI::App* app, EvalArgs& a) {
  app->add_option("--scene", a.scene, "scene directory with labels")
      ->required();
  app->add_option("--proposals", a.proposals,
                  "segment output directory or proposal file")
      ->required();
  app->add_option("--out", a.out, "write the report here too");
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const Scene scene = load_scene(a.scene);
  const GroundTruth gt = require_gt(scene);
  const int n = static_cast<int>(scene.cloud.positions.size());

  fs::path file(a.proposals);
  if (fs::is_directory(file)) file /= kProposalsFile;
  const std::vector<ProposalRecord> records =
      parse_proposals(read_text_file(file));

  // Prefer explicit point lists; fall back to the partition.
  fs::path points = file;
  const std::string name = file.filename().string();
  const std::string stem = name.size() > 6 &&
                                   name.compare(name.size() - 6, 6, ".jsonl") == 0
                               ? name.substr(0, name.size() - 6)
                               : name;
  points.replace_filename(stem + ".points.jsonl");
  std::vector<std::vector<bool>> masks;
  if (fs::exists(points)) {
    masks = masks_from_points(
        parse_proposal_points(read_text_file(points), records), n);
  } else if (fs::exists(file.parent_path() / kSuperpointsFile)) {
    const std::vector<int> assignment =
        parse_superpoints(read_text_file(file.parent_path() / kSuperpointsFile));
    if (static_cast<int>(assignment.size()) != n) {
      throw DataError("superpoint file covers " +
                      std::to_string(assignment.size()) +
                      " points, scene has " + std::to_string(n));
    }
    masks = masks_from_superpoints(records, assignment);
  } else {
    throw DataError("no point indices for " + file.string() + ": need " +
                    points.filename().string() + " or " + kSuperpointsFile);
  }

  std::vector<int> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return records[x].score > records[y].score;
  });
  std::vector<ScoredMask> preds;
  for (int i : order) preds.push_back({std::move(masks[i]), records[i].score});

  const std::string text = evaluate(preds, gt).to_text();
  out << text;
  if (!a.out.empty()) write_text_file(a.out, text);
  return kOk;
}

// ---- ablate ----

struct AblateArgs {
  std::vector<std::string> scenes;
  bool suite = false;
  std::string tracker = "oracle";
  std::string out;
  ConfigFlags flags;
};

void attach_ablate(CLI::App* app, AblateArgs& a) {
  app->add_option("--scene", a.scenes, "scene directory (repeatable)");
  app->add_flag("--suite", a.suite, "use the default synthetic suite");
  app->add_option("--tracker", a.tracker, "oracle | noisy | file:PATH");
  app->add_option("--out", a.out, "write the table here too");
  a.flags.attach(app);
}

int cmd_ablate(const AblateArgs& a, std::ostream& out) {
  if (a.scenes.empty() && !a.suite) {
    throw ConfigError("ablate needs --scene or --suite");
  }
  const PipelineConfig config = a.flags.resolve();
  const std::vector<RefineStrategy> strategies = ablation_strategies();
  const std::size_t s_count = strategies.size();

  std::vector<Scene> scenes;
  for (const std::string& dir : a.scenes) scenes.push_back(load_scene(dir));
  if (a.suite) {
    for (const SceneSpec& spec : default_suite()) {
      scenes.push_back(make_scene(spec, config.threads));
    }
  }

  std::vector<std::array<double, 6>> metrics(s_count, {0, 0, 0, 0, 0, 0});
  std::vector<double> objective_sum(s_count, 0.0);
  std::vector<SharedTrackObjectives> all_tracks;
  for (const Scene& scene : scenes) {
    const GroundTruth gt = require_gt(scene);
    const auto provider = make_provider(a.tracker, config, scene);
    const PreparedScene prepared = prepare_scene(scene, config);
    for (std::size_t s = 0; s < s_count; ++s) {
      PipelineConfig c = config;
      c.refine_strategy = strategies[s];
      const PipelineResult r = run_pipeline(prepared, *provider, c);
      const EvalReport rep = evaluate(to_predictions(r.proposals), gt);
      const std::array<double, 6> row = {rep.ap, rep.ap50, rep.ap25,
                                         rep.rc, rep.rc50, rep.rc25};
      for (int m = 0; m < 6; ++m) metrics[s][m] += row[m] / scenes.size();
    }
    auto rows = shared_track_objectives(prepared, *provider, config, strategies);
    all_tracks.insert(all_tracks.end(), rows.begin(), rows.end());
  }
  for (const SharedTrackObjectives& t : all_tracks) {
    for (std::size_t s = 0; s < s_count; ++s) objective_sum[s] += t.objective[s];
  }

  std::ostringstream table;
  table << "strategy\tseed\tap\tap50\tap25\trc\trc50\trc25\tmean_objective\n";
  for (std::size_t s = 0; s < s_count; ++s) {
    table << strategies[s].name() << '\t' << config.seed;
    for (double v : metrics[s]) table << '\t' << fixed6(v);
    const double mean =
        all_tracks.empty() ? 0.0 : objective_sum[s] / all_tracks.size();
    table << '\t' << fixed6(mean) << '\n';
  }
  table << "shared_tracks\t" << all_tracks.size() << '\n';
  // Pairwise ordering along dp, top_k(10), top_k(5), top_k(1).
  for (std::size_t s = s_count - 1; s >= 2; --s) {
    int violations = 0;
    for (const SharedTrackObjectives& t : all_tracks) {
      violations += t.objective[s] < t.objective[s - 1];
    }
    table << "violations\t" << strategies[s].name() << " < "
          << strategies[s - 1].name() << '\t' << violations << '\n';
  }

  out << table.str();
  if (!a.out.empty()) write_text_file(a.out, table.str());
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Class-agnostic 3D instance proposals from posed RGB-D frames "
               "and 2D mask tracks."};
  app.name("masklift");
  app.require_subcommand(1);

  GenerateArgs gen;
  SegmentArgs seg;
  EvalArgs ev;
  AblateArgs abl;
  auto* gen_cmd = app.add_subcommand("generate", "write a synthetic scene");
  auto* seg_cmd = app.add_subcommand("segment", "build a proposal bank");
  auto* eval_cmd = app.add_subcommand("eval", "score proposals against labels");
  auto* abl_cmd = app.add_subcommand("ablate", "compare refinement strategies");
  attach_generate(gen_cmd, gen);
  attach_segment(seg_cmd, seg);
  attach_eval(eval_cmd, ev);
  attach_ablate(abl_cmd, abl);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen_cmd) return cmd_generate(gen, out);
    if (*seg_cmd) return cmd_segment(seg, out, err);
    if (*eval_cmd) return cmd_eval(ev, out);
    if (*abl_cmd) return cmd_ablate(abl, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const LiftError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInvariant;
  }
  return kUsage;
}

}  // namespace masklift::cli
