#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "masklift/pipeline.h"
#include "masklift/superpoints.h"

namespace masklift {

// One line of a proposal file, as read back.
struct ProposalRecord {
  int proposal_id = 0;
  double score = 0.0;
  std::vector<int> superpoint_ids;
  int point_count = 0;
  int seed_superpoint = -1;
  int pivot_view = -1;
  int round = 0;
  std::int64_t objective = 0;
};

ProposalRecord to_record(const Proposal& proposal, int proposal_id);

// JSON lines: {proposal_id, score, superpoint_ids, point_count, provenance}.
std::string format_proposals(const std::vector<Proposal>& proposals);
// JSON lines: {proposal_id, points} with ascending point indices.
std::string format_proposal_points(const std::vector<Proposal>& proposals);

std::vector<ProposalRecord> parse_proposals(const std::string& text);
// Returns point index lists keyed by line order; ids must match `records`.
std::vector<std::vector<int>> parse_proposal_points(
    const std::string& text, const std::vector<ProposalRecord>& records);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

// Superpoint assignment: header "masklift-superpoints 1 N L" then one label
// per line.
std::string format_superpoints(const SuperpointPartition& partition);
std::vector<int> parse_superpoints(const std::string& text);

// Rebuilds point masks of `records` over `n` points from the assignment.
std::vector<std::vector<bool>> masks_from_superpoints(
    const std::vector<ProposalRecord>& records,
    const std::vector<int>& assignment);
std::vector<std::vector<bool>> masks_from_points(
    const std::vector<std::vector<int>>& points, int n);

}  // namespace masklift
