#include "masklift/evaluation.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace masklift {

GroundTruth GroundTruth::from_labels(const std::vector<int>& labels) {
  std::map<int, std::vector<bool>> by_id;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    auto& m = by_id[labels[i]];
    if (m.empty()) m.assign(labels.size(), false);
    m[i] = true;
  }
  GroundTruth gt;
  for (auto& [id, mask] : by_id) {
    gt.ids.push_back(id);
    gt.masks.push_back(std::move(mask));
  }
  return gt;
}

double mask_iou(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("mask_iou: masks have different lengths");
  }
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += a[i] && b[i];
    uni += a[i] || b[i];
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<double> ap_thresholds() {
  std::vector<double> t;
  for (int p = 50; p <= 95; p += 5) t.push_back(p / 100.0);
  return t;
}

namespace {

std::vector<std::vector<double>> iou_matrix(
    std::span<const ScoredMask> predictions, const GroundTruth& gt) {
  // Sparse point lists keep this linear in the number of member points.
  std::vector<std::vector<int>> gt_points(gt.size());
  std::vector<int> owner;
  if (!gt.masks.empty()) owner.assign(gt.masks.front().size(), -1);
  for (std::size_t g = 0; g < gt.size(); ++g) {
    for (std::size_t i = 0; i < gt.masks[g].size(); ++i) {
      if (gt.masks[g][i]) {
        gt_points[g].push_back(static_cast<int>(i));
        owner[i] = static_cast<int>(g);
      }
    }
  }
  std::vector<std::vector<double>> iou(predictions.size(),
                                       std::vector<double>(gt.size(), 0.0));
  for (std::size_t p = 0; p < predictions.size(); ++p) {
    const auto& mask = predictions[p].mask;
    if (mask.size() != owner.size()) {
      throw std::invalid_argument(
          "evaluate: prediction and ground truth lengths differ");
    }
    std::vector<std::size_t> inter(gt.size(), 0);
    std::size_t size = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (!mask[i]) continue;
      ++size;
      if (owner[i] >= 0) ++inter[owner[i]];
    }
    for (std::size_t g = 0; g < gt.size(); ++g) {
      const std::size_t uni = size + gt_points[g].size() - inter[g];
      iou[p][g] = uni == 0 ? 0.0 : static_cast<double>(inter[g]) / uni;
    }
  }
  return iou;
}

ThresholdResult match_at(const std::vector<std::vector<double>>& iou,
                         std::size_t gt_count, double threshold) {
  ThresholdResult r;
  r.threshold = threshold;
  std::vector<bool> taken(gt_count, false);
  int tp = 0;
  for (std::size_t p = 0; p < iou.size(); ++p) {
    int best = -1;
    for (std::size_t g = 0; g < gt_count; ++g) {
      if (taken[g] || iou[p][g] < threshold) continue;
      if (best < 0 || iou[p][g] > iou[p][best]) best = static_cast<int>(g);
    }
    if (best >= 0) {
      taken[best] = true;
      ++tp;
      r.matches.emplace_back(static_cast<int>(p), best);
    }
    r.precision_curve.push_back(static_cast<double>(tp) / (p + 1));
    r.recall_curve.push_back(static_cast<double>(tp) / gt_count);
  }
  std::vector<double> envelope = r.precision_curve;
  for (int i = static_cast<int>(envelope.size()) - 2; i >= 0; --i) {
    envelope[i] = std::max(envelope[i], envelope[i + 1]);
  }
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < envelope.size(); ++i) {
    r.ap += (r.recall_curve[i] - prev_recall) * envelope[i];
    prev_recall = r.recall_curve[i];
  }
  r.recall = static_cast<double>(tp) / gt_count;
  return r;
}

void check_inputs(std::span<const ScoredMask> predictions,
                  const GroundTruth& gt) {
  if (gt.size() == 0) throw std::invalid_argument("nothing to evaluate");
  for (std::size_t i = 1; i < predictions.size(); ++i) {
    if (predictions[i].score > predictions[i - 1].score) {
      throw std::invalid_argument("evaluate: predictions not sorted by score");
    }
  }
}

}  // namespace

ThresholdResult evaluate_at(std::span<const ScoredMask> predictions,
                            const GroundTruth& gt, double threshold) {
  check_inputs(predictions, gt);
  return match_at(iou_matrix(predictions, gt), gt.size(), threshold);
}

EvalReport evaluate(std::span<const ScoredMask> predictions,
                    const GroundTruth& gt) {
  check_inputs(predictions, gt);
  const auto iou = iou_matrix(predictions, gt);
  EvalReport report;
  report.predictions = static_cast<int>(predictions.size());
  report.ground_truth = static_cast<int>(gt.size());
  const std::vector<double> thresholds = ap_thresholds();
  for (double t : thresholds) {
    report.per_threshold.push_back(match_at(iou, gt.size(), t));
    report.ap += report.per_threshold.back().ap;
    report.rc += report.per_threshold.back().recall;
  }
  report.ap /= thresholds.size();
  report.rc /= thresholds.size();
  report.ap50 = report.per_threshold.front().ap;
  report.rc50 = report.per_threshold.front().recall;
  report.per_threshold.push_back(match_at(iou, gt.size(), 0.25));
  report.ap25 = report.per_threshold.back().ap;
  report.rc25 = report.per_threshold.back().recall;
  return report;
}

std::vector<std::pair<std::string, double>> EvalReport::table() const {
  return {{"AP", ap}, {"AP50", ap50}, {"AP25", ap25},
          {"RC", rc}, {"RC50", rc50}, {"RC25", rc25}};
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  char buf[64];
  out << "predictions " << predictions << '\n';
  out << "ground_truth " << ground_truth << '\n';
  for (const auto& [name, value] : table()) {
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    out << name << ' ' << buf << '\n';
  }
  for (const ThresholdResult& t : per_threshold) {
    std::snprintf(buf, sizeof(buf), "iou@%.2f ap %.6f recall %.6f", t.threshold,
                  t.ap, t.recall);
    out << buf << " matched " << t.matches.size() << '\n';
  }
  return out.str();
}

}  // namespace masklift
