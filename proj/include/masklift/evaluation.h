#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace masklift {

// Ground-truth instances as point masks, ordered by instance id.
struct GroundTruth {
  std::vector<int> ids;
  std::vector<std::vector<bool>> masks;

  // Every nonnegative label with at least one point becomes an instance.
  static GroundTruth from_labels(const std::vector<int>& labels);
  std::size_t size() const { return masks.size(); }
};

struct ScoredMask {
  std::vector<bool> mask;
  double score = 0.0;
};

// |a ∩ b| / |a ∪ b|; 0 when both are empty. Throws std::invalid_argument on
// a length mismatch.
double mask_iou(const std::vector<bool>& a, const std::vector<bool>& b);

struct ThresholdResult {
  double threshold = 0.0;
  double ap = 0.0;
  double recall = 0.0;
  std::vector<double> precision_curve;
  std::vector<double> recall_curve;
  std::vector<std::pair<int, int>> matches;  // (prediction, gt position)
};

struct EvalReport {
  double ap = 0.0;  // mean over IoU 0.50:0.05:0.95
  double ap50 = 0.0;
  double ap25 = 0.0;
  double rc = 0.0;
  double rc50 = 0.0;
  double rc25 = 0.0;
  std::vector<ThresholdResult> per_threshold;  // 0.50 ... 0.95, then 0.25
  int predictions = 0;
  int ground_truth = 0;

  // (metric, value) rows in a fixed order.
  std::vector<std::pair<std::string, double>> table() const;
  std::string to_text() const;
};

// AP thresholds 0.50, 0.55, ..., 0.95.
std::vector<double> ap_thresholds();

ThresholdResult evaluate_at(std::span<const ScoredMask> predictions,
                            const GroundTruth& gt, double threshold);

// Greedy score-ordered matching per threshold: each prediction takes the
// unmatched ground truth of highest IoU at or above the threshold (lower id
// on ties). AP is the area under the interpolated precision-recall curve.
// Predictions must be sorted by descending score. Throws
// std::invalid_argument("nothing to evaluate") on empty ground truth.
EvalReport evaluate(std::span<const ScoredMask> predictions,
                    const GroundTruth& gt);

}  // namespace masklift
