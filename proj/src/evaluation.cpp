#include "bladetrack/evaluation.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "bladetrack/error.hpp"
#include "bladetrack/geometry.hpp"

namespace bladetrack {

namespace {

void check_extents(std::span<const Detection> preds, std::span<const Detection> truths) {
  const Detection* first = !preds.empty() ? &preds.front() : (!truths.empty() ? &truths.front() : nullptr);
  if (!first) return;
  auto same = [&](const Detection& d) {
    return d.mask.height() == first->mask.height() && d.mask.width() == first->mask.width();
  };
  if (!std::all_of(preds.begin(), preds.end(), same) ||
      !std::all_of(truths.begin(), truths.end(), same)) {
    throw DimensionError("match_predictions: masks do not share one extent");
  }
}

}  // namespace

MatchRecord match_predictions(std::span<const Detection> preds, std::span<const Detection> truths,
                              double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw ConfigError("IoU threshold must lie in (0, 1)");
  }
  check_extents(preds, truths);
  MatchRecord record;
  record.iou_threshold = iou_threshold;

  for (ClassLabel c : kAllClasses) {
    ClassMatch& match = record.classes[class_index(c)];
    std::vector<std::size_t> gt;
    for (std::size_t i = 0; i < truths.size(); ++i) {
      if (truths[i].label == c) gt.push_back(i);
    }
    match.ground_truths = gt.size();
    std::vector<char> assigned(gt.size(), 0);
    std::size_t unassigned = gt.size();

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (preds[i].label == c) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return preds[a].confidence > preds[b].confidence;
    });

    for (std::size_t p : order) {
      Verdict v;
      v.prediction = p;
      if (unassigned > 0) {
        std::optional<std::size_t> best;
        double best_iou = -1.0;
        for (std::size_t g = 0; g < gt.size(); ++g) {
          if (assigned[g]) continue;
          const double o = iou(preds[p].mask, truths[gt[g]].mask);
          if (o > best_iou) {
            best_iou = o;
            best = g;
          }
        }
        v.iou = best_iou;
        if (best_iou > iou_threshold) {
          v.correct = true;
          v.ground_truth = gt[*best];
          assigned[*best] = 1;
          --unassigned;
        }
      }
      match.verdicts.push_back(v);
    }
    match.false_negatives = unassigned;
  }
  return record;
}

std::optional<double> average_precision(const ClassMatch& match) {
  const std::size_t n = match.verdicts.size();
  if (n == 0 && match.ground_truths == 0) return std::nullopt;
  if (n == 0) return 0.0;
  std::size_t true_total = 0;
  for (const Verdict& v : match.verdicts) true_total += v.correct ? 1 : 0;
  const std::size_t denom = true_total + match.false_negatives;
  if (denom == 0) return 0.0;

  std::vector<double> precision(n), recall(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tp += match.verdicts[i].correct ? 1 : 0;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(denom);
  }
  // Envelope from the right gives max precision over all points at or beyond
  // each recall; recall is non-decreasing along the list.
  for (std::size_t i = n - 1; i-- > 0;) precision[i] = std::max(precision[i], precision[i + 1]);

  double ap = 0.0;
  double previous_recall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (recall[i] > previous_recall) {
      ap += (recall[i] - previous_recall) * precision[i];
      previous_recall = recall[i];
    }
  }
  return ap;
}

std::optional<double> mean_defined(std::span<const std::optional<double>> values) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& v : values) {
    if (!v) continue;
    sum += *v;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

MatchedIou matched_iou(const MatchRecord& record) {
  MatchedIou out;
  for (ClassLabel c : kAllClasses) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const Verdict& v : record.classes[class_index(c)].verdicts) {
      if (!v.correct) continue;
      sum += v.iou;
      ++count;
    }
    if (count > 0) out.per_class[class_index(c)] = sum / static_cast<double>(count);
  }
  out.overall = mean_defined(out.per_class);
  return out;
}

EvalReport evaluate_image(std::span<const Detection> preds, std::span<const Detection> truths,
                          double iou_threshold) {
  const MatchRecord record = match_predictions(preds, truths, iou_threshold);
  EvalReport report;
  report.iou_threshold = iou_threshold;
  for (ClassLabel c : kAllClasses) {
    report.ap[class_index(c)] = average_precision(record.classes[class_index(c)]);
    if (!report.ap[class_index(c)]) report.excluded.push_back(c);
  }
  report.map = mean_ap(report.ap);
  const MatchedIou m = matched_iou(record);
  report.matched_iou = m.per_class;
  report.mean_matched_iou = m.overall;
  return report;
}

SetReport summarize_set(std::vector<EvalReport> images, double iou_threshold) {
  if (images.empty()) throw EmptyInputError("evaluate_set: no images");
  SetReport out;
  out.images = std::move(images);

  EvalReport& agg = out.aggregate;
  agg.iou_threshold = iou_threshold;
  std::vector<std::optional<double>> column(out.images.size());
  auto average = [&](auto field) {
    for (std::size_t i = 0; i < out.images.size(); ++i) column[i] = field(out.images[i]);
    return mean_defined(column);
  };
  for (ClassLabel c : kAllClasses) {
    const std::size_t k = class_index(c);
    agg.ap[k] = average([k](const EvalReport& r) { return r.ap[k]; });
    agg.matched_iou[k] = average([k](const EvalReport& r) { return r.matched_iou[k]; });
    if (!agg.ap[k]) agg.excluded.push_back(c);
  }
  agg.map = average([](const EvalReport& r) { return r.map; });
  agg.mean_matched_iou = average([](const EvalReport& r) { return r.mean_matched_iou; });
  return out;
}

SetReport evaluate_set(std::span<const ImagePair> images, double iou_threshold) {
  if (images.empty()) throw EmptyInputError("evaluate_set: no images");
  std::vector<EvalReport> reports;
  reports.reserve(images.size());
  for (const ImagePair& img : images) {
    reports.push_back(evaluate_image(img.predictions, img.ground_truth, iou_threshold));
  }
  return summarize_set(std::move(reports), iou_threshold);
}

}  // namespace bladetrack
