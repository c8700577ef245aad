#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "bladetrack/types.hpp"

namespace bladetrack {

using PerClass = std::array<std::optional<double>, kAllClasses.size()>;

struct Verdict {
  std::size_t prediction = 0;  // index into the prediction list
  bool correct = false;
  std::optional<std::size_t> ground_truth;  // assigned ground truth, if correct
  double iou = 0.0;                         // IoU with the best candidate found
};

struct ClassMatch {
  std::vector<Verdict> verdicts;  // descending confidence, ties by input order
  std::size_t ground_truths = 0;
  std::size_t false_negatives = 0;
};

struct MatchRecord {
  double iou_threshold = 0.5;
  std::array<ClassMatch, kAllClasses.size()> classes;
};

// Greedy per-class matching: each prediction, in descending confidence,
// takes the unassigned same-class ground truth with the highest IoU if that
// IoU is strictly above the threshold. Throws DimensionError on mixed extents.
MatchRecord match_predictions(std::span<const Detection> preds, std::span<const Detection> truths,
                              double iou_threshold);

// Area under the interpolated precision-recall curve, integrated exactly.
// nullopt when the class has neither predictions nor ground truth.
std::optional<double> average_precision(const ClassMatch& match);

// Mean of the defined entries; nullopt when none are defined.
std::optional<double> mean_defined(std::span<const std::optional<double>> values);

inline std::optional<double> mean_ap(std::span<const std::optional<double>> aps) {
  return mean_defined(aps);
}

struct MatchedIou {
  PerClass per_class;
  std::optional<double> overall;
};

// Mean IoU of correct predictions with their ground truth, per class and
// averaged over classes that have any.
MatchedIou matched_iou(const MatchRecord& record);

struct EvalReport {
  double iou_threshold = 0.5;
  PerClass ap;
  PerClass matched_iou;
  std::optional<double> map;
  std::optional<double> mean_matched_iou;
  std::vector<ClassLabel> excluded;  // classes with no defined AP
};

EvalReport evaluate_image(std::span<const Detection> preds, std::span<const Detection> truths,
                          double iou_threshold);

struct ImagePair {
  std::vector<Detection> predictions;
  std::vector<Detection> ground_truth;
};

struct SetReport {
  EvalReport aggregate;
  std::vector<EvalReport> images;
};

// Evaluates each image, then averages per-image mAP and matched IoU over the
// images where they are defined. Per-class entries average the same way.
// Throws EmptyInputError for an empty set.
SetReport evaluate_set(std::span<const ImagePair> images, double iou_threshold);

// The averaging step of evaluate_set over reports computed elsewhere.
SetReport summarize_set(std::vector<EvalReport> images, double iou_threshold);

}  // namespace bladetrack
