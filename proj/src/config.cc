#include "masklift/config.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "masklift/errors.h"

namespace masklift {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d)) {
    throw ConfigError("config " + key + ": \"" + v + "\" is not a number");
  }
  return d;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw ConfigError("config " + key + ": \"" + v + "\" is not an integer");
  }
  return out;
}

std::string real_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string overlap_mode_name(OverlapMode mode) {
  return mode == OverlapMode::kContainment ? "containment" : "iou";
}

OverlapMode parse_overlap_mode(const std::string& text) {
  if (text == "containment") return OverlapMode::kContainment;
  if (text == "iou") return OverlapMode::kIou;
  throw ConfigError("unknown overlap mode \"" + text +
                    "\" (containment | iou)");
}

void PipelineConfig::validate() const {
  if (!(tau > 0.0) || tau > 1.0) throw ConfigError("tau must be in (0,1]");
  if (!(depth_tolerance > 0.0)) throw ConfigError("depth_tolerance must be > 0");
  if (view_stride < 1) throw ConfigError("view_stride must be >= 1");
  if (kappa < 1) throw ConfigError("kappa must be >= 1");
  if (samples_per_round < 1) throw ConfigError("samples_per_round must be >= 1");
  if (max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
  if (!(dedup_iou >= 0.0 && dedup_iou <= 1.0)) {
    throw ConfigError("dedup_iou must be in [0,1]");
  }
  if (refine_strategy.kind == StrategyKind::kTopK && refine_strategy.k < 1) {
    throw ConfigError("top_k strategy needs k >= 1");
  }
  noise.validate();
  if (normal_k < 3) throw ConfigError("normal_k must be >= 3");
  if (superpoints.knn_k < 1 || !(superpoints.merge_threshold > 0.0) ||
      superpoints.min_size < 1) {
    throw ConfigError("invalid superpoint parameters");
  }
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

void PipelineConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "tau") tau = to_real(key, v);
  else if (key == "depth_tolerance") depth_tolerance = to_real(key, v);
  else if (key == "view_stride") view_stride = to_int<int>(key, v);
  else if (key == "kappa") kappa = to_int<int>(key, v);
  else if (key == "samples_per_round") samples_per_round = to_int<int>(key, v);
  else if (key == "max_rounds") max_rounds = to_int<int>(key, v);
  else if (key == "dedup_iou") dedup_iou = to_real(key, v);
  else if (key == "refine_strategy") refine_strategy = RefineStrategy::parse(v);
  else if (key == "overlap_mode") overlap_mode = parse_overlap_mode(v);
  else if (key == "p_drop") noise.p_drop = to_real(key, v);
  else if (key == "r_morph") noise.r_morph = to_int<int>(key, v);
  else if (key == "p_flip") noise.p_flip = to_real(key, v);
  else if (key == "memory_window") noise.memory_window = to_int<int>(key, v);
  else if (key == "seed") seed = to_int<std::uint64_t>(key, v);
  else if (key == "normal_k") normal_k = to_int<int>(key, v);
  else if (key == "superpoint_knn_k") superpoints.knn_k = to_int<int>(key, v);
  else if (key == "superpoint_merge_threshold")
    superpoints.merge_threshold = to_real(key, v);
  else if (key == "superpoint_min_size")
    superpoints.min_size = to_int<int>(key, v);
  else if (key == "threads") threads = to_int<int>(key, v);
  else throw ConfigError("unknown config key \"" + key + "\"");
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::entries()
    const {
  return {
      {"tau", real_text(tau)},
      {"depth_tolerance", real_text(depth_tolerance)},
      {"view_stride", std::to_string(view_stride)},
      {"kappa", std::to_string(kappa)},
      {"samples_per_round", std::to_string(samples_per_round)},
      {"max_rounds", std::to_string(max_rounds)},
      {"dedup_iou", real_text(dedup_iou)},
      {"refine_strategy", refine_strategy.name()},
      {"overlap_mode", overlap_mode_name(overlap_mode)},
      {"p_drop", real_text(noise.p_drop)},
      {"r_morph", std::to_string(noise.r_morph)},
      {"p_flip", real_text(noise.p_flip)},
      {"memory_window", std::to_string(noise.memory_window)},
      {"seed", std::to_string(seed)},
      {"normal_k", std::to_string(normal_k)},
      {"superpoint_knn_k", std::to_string(superpoints.knn_k)},
      {"superpoint_merge_threshold", real_text(superpoints.merge_threshold)},
      {"superpoint_min_size", std::to_string(superpoints.min_size)},
      {"threads", std::to_string(threads)},
  };
}

std::vector<std::pair<std::string, std::string>> parse_config_text(
    const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace masklift
