#include "masklift/proposal_io.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "masklift/errors.h"

namespace masklift {

using nlohmann::json;

ProposalRecord to_record(const Proposal& proposal, int proposal_id) {
  ProposalRecord r;
  r.proposal_id = proposal_id;
  r.score = proposal.score;
  r.superpoint_ids = proposal.superpoint_ids;
  r.point_count = proposal.point_count();
  r.seed_superpoint = proposal.seed_superpoint;
  r.pivot_view = proposal.pivot_view;
  r.round = proposal.round;
  r.objective = proposal.objective;
  return r;
}

std::string format_proposals(const std::vector<Proposal>& proposals) {
  std::string out;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const ProposalRecord r = to_record(proposals[i], static_cast<int>(i));
    // ordered_json keeps the field order stable in the file.
    nlohmann::ordered_json line;
    line["proposal_id"] = r.proposal_id;
    line["score"] = r.score;
    line["superpoint_ids"] = r.superpoint_ids;
    line["point_count"] = r.point_count;
    line["provenance"] = {{"seed_superpoint", r.seed_superpoint},
                          {"pivot_view", r.pivot_view},
                          {"round", r.round},
                          {"objective", r.objective}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::string format_proposal_points(const std::vector<Proposal>& proposals) {
  std::string out;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    std::vector<int> points;
    const auto& mask = proposals[i].point_mask;
    for (std::size_t p = 0; p < mask.size(); ++p) {
      if (mask[p]) points.push_back(static_cast<int>(p));
    }
    nlohmann::ordered_json line;
    line["proposal_id"] = static_cast<int>(i);
    line["points"] = points;
    out += line.dump();
    out += '\n';
  }
  return out;
}

namespace {

template <typename Fn>
void for_each_line(const std::string& text, const char* what, Fn&& fn) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw DataError(std::string(what) + " line " + std::to_string(number) +
                      ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(std::string(what) + " line " + std::to_string(number) +
                      ": " + e.what());
    }
  }
}

}  // namespace

std::vector<ProposalRecord> parse_proposals(const std::string& text) {
  std::vector<ProposalRecord> records;
  for_each_line(text, "proposal file", [&](const json& j) {
    ProposalRecord r;
    r.proposal_id = j.at("proposal_id").get<int>();
    r.score = j.at("score").get<double>();
    r.superpoint_ids = j.at("superpoint_ids").get<std::vector<int>>();
    r.point_count = j.at("point_count").get<int>();
    const json& prov = j.at("provenance");
    r.seed_superpoint = prov.at("seed_superpoint").get<int>();
    r.pivot_view = prov.at("pivot_view").get<int>();
    r.round = prov.at("round").get<int>();
    r.objective = prov.at("objective").get<std::int64_t>();
    if (r.superpoint_ids.empty()) throw DataError("empty superpoint_ids");
    records.push_back(std::move(r));
  });
  return records;
}

std::vector<std::vector<int>> parse_proposal_points(
    const std::string& text, const std::vector<ProposalRecord>& records) {
  std::vector<std::vector<int>> points;
  for_each_line(text, "points file", [&](const json& j) {
    const int id = j.at("proposal_id").get<int>();
    const std::size_t at = points.size();
    if (at >= records.size() || records[at].proposal_id != id) {
      throw DataError("proposal_id " + std::to_string(id) +
                      " does not match the proposal file");
    }
    points.push_back(j.at("points").get<std::vector<int>>());
    if (static_cast<int>(points.back().size()) != records[at].point_count) {
      throw DataError("proposal " + std::to_string(id) +
                      " point count differs from the proposal file");
    }
  });
  if (points.size() != records.size()) {
    throw DataError("points file has " + std::to_string(points.size()) +
                    " records, proposal file has " +
                    std::to_string(records.size()));
  }
  return points;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_superpoints(const SuperpointPartition& partition) {
  std::string out = "masklift-superpoints 1 " +
                    std::to_string(partition.assignment.size()) + " " +
                    std::to_string(partition.count()) + "\n";
  for (int label : partition.assignment) {
    out += std::to_string(label);
    out += '\n';
  }
  return out;
}

std::vector<int> parse_superpoints(const std::string& text) {
  std::istringstream in(text);
  std::string magic;
  int version = 0;
  long long n = -1;
  long long count = -1;
  if (!(in >> magic >> version >> n >> count) ||
      magic != "masklift-superpoints" || version != 1 || n < 0 || count < 0) {
    throw DataError("superpoint file: bad header");
  }
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    if (!(in >> labels[i]) || labels[i] < 0 || labels[i] >= count) {
      throw DataError("superpoint file: bad label for point " +
                      std::to_string(i));
    }
  }
  std::string extra;
  if (in >> extra) throw DataError("superpoint file: trailing data");
  return labels;
}

std::vector<std::vector<bool>> masks_from_superpoints(
    const std::vector<ProposalRecord>& records,
    const std::vector<int>& assignment) {
  int count = 0;
  for (int label : assignment) count = std::max(count, label + 1);
  std::vector<std::vector<bool>> masks;
  for (const ProposalRecord& r : records) {
    std::vector<bool> member(count, false);
    for (int id : r.superpoint_ids) {
      if (id < 0 || id >= count) {
        throw DataError("proposal " + std::to_string(r.proposal_id) +
                        " references superpoint " + std::to_string(id) +
                        " outside the partition");
      }
      member[id] = true;
    }
    std::vector<bool> mask(assignment.size(), false);
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      mask[i] = member[assignment[i]];
    }
    masks.push_back(std::move(mask));
  }
  return masks;
}

std::vector<std::vector<bool>> masks_from_points(
    const std::vector<std::vector<int>>& points, int n) {
  std::vector<std::vector<bool>> masks;
  for (const auto& list : points) {
    std::vector<bool> mask(n, false);
    for (int p : list) {
      if (p < 0 || p >= n) {
        throw DataError("point index " + std::to_string(p) +
                        " outside the cloud");
      }
      mask[p] = true;
    }
    masks.push_back(std::move(mask));
  }
  return masks;
}

}  // namespace masklift
