#pragma once

#include <algorithm>
#include <cstdlib>
#include <map>
#include <vector>

namespace submodes {

struct SegmentationScore {
  double recall = 0.0;     // true boundaries matched by a detected one within tolerance
  double precision = 0.0;  // detected boundaries matched by a true one within tolerance
  double purity = 0.0;     // step-weighted share of each model's dominant label
  int models = 0;          // distinct model ids among assigned steps
};

inline bool near_any(long t, const std::vector<long>& ts, long tol) {
  return std::any_of(ts.begin(), ts.end(), [&](long s) { return std::labs(s - t) <= tol; });
}

//! Compares detected boundary times and per-step model ids against ground truth.
//! Steps with a negative model id are unassigned and do not count toward purity.
inline SegmentationScore evaluate_segmentation(const std::vector<long>& detected, const std::vector<long>& truth,
                                               const std::vector<int>& model_ids, const std::vector<int>& labels,
                                               long tolerance) {
  SegmentationScore s;
  if (!truth.empty()) {
    int hit = 0;
    for (long t : truth) hit += near_any(t, detected, tolerance);
    s.recall = static_cast<double>(hit) / truth.size();
  } else {
    s.recall = 1.0;
  }
  if (!detected.empty()) {
    int hit = 0;
    for (long t : detected) hit += near_any(t, truth, tolerance);
    s.precision = static_cast<double>(hit) / detected.size();
  } else {
    s.precision = truth.empty() ? 1.0 : 0.0;
  }
  std::map<int, std::map<int, long>> counts;
  long total = 0;
  const std::size_t n = std::min(model_ids.size(), labels.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (model_ids[i] < 0) continue;
    ++counts[model_ids[i]][labels[i]];
    ++total;
  }
  long dominant = 0;
  for (const auto& [id, by_label] : counts) {
    long best = 0;
    for (const auto& [label, c] : by_label) best = std::max(best, c);
    dominant += best;
  }
  s.purity = total > 0 ? static_cast<double>(dominant) / total : 0.0;
  s.models = static_cast<int>(counts.size());
  return s;
}

}  // namespace submodes
