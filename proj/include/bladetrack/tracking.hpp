#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "bladetrack/types.hpp"

namespace bladetrack {

struct TrackingConfig {
  double distance_threshold = 20.0;  // pixels, strict upper bound on a match
  double area_threshold = 0.0;       // pixels, blades must exceed it
  double confidence_threshold = 0.5;
  int lookback = 1;
  // Width that splits the frame into left/right halves; 0 takes it from the
  // frames.
  int image_width = 0;
  // Leaving-list IDs whose blade was seen within the lookback window are held
  // back from re-entry assignment; the lookback can still recover them.
  bool hold_recent_leavers = true;

  // Throws ConfigError when a field is out of range.
  void validate() const;
};

// IDs for one frame, aligned with FrameDetections::detections. Detections
// that are not valid blades stay unassigned.
struct FrameTrack {
  std::int64_t frame_index = 0;
  std::vector<std::optional<int>> blade_ids;
  // Leaving-list state after this frame, oldest entry first.
  std::vector<int> left_leaving;
  std::vector<int> right_leaving;

  friend bool operator==(const FrameTrack&, const FrameTrack&) = default;
};

struct TrackedSequence {
  std::vector<FrameTrack> frames;
  std::vector<int> left_leaving;
  std::vector<int> right_leaving;
  int next_fresh_id = 0;

  friend bool operator==(const TrackedSequence&, const TrackedSequence&) = default;
};

// Indices of rotor detections with area above the area threshold and
// confidence above the confidence threshold.
std::vector<std::size_t> validate(const FrameDetections& frame, const TrackingConfig& cfg);

// Assigns persistent blade IDs across `frames`. Current blades are matched in
// descending confidence (ties by ascending bbox x) to the nearest unclaimed
// valid blade 1..L frames back; leftovers reuse the most recent leaving-list
// ID on their side of the frame, else take a fresh ID.
TrackedSequence track(std::span<const FrameDetections> frames, const TrackingConfig& cfg);

// Per frame, per detection ground-truth blade identity.
using TruthIds = std::vector<std::vector<std::optional<int>>>;

struct IdAlignment {
  double accuracy = 1.0;
  std::size_t matched = 0;
  std::size_t total = 0;  // assigned detections
  std::map<int, int> pred_to_truth;
};

// Best bijective relabeling of predicted IDs onto truth IDs, maximizing the
// number of assigned detections that agree.
IdAlignment align_ids(const TrackedSequence& pred, const TruthIds& truth);

// matched / total from align_ids; 1 when nothing was assigned.
double association_accuracy(const TrackedSequence& pred, const TruthIds& truth);

// Optimal assignment maximizing total weight; result[row] is the matched
// column or -1. Rows and columns may differ in count.
std::vector<int> max_weight_assignment(const std::vector<std::vector<std::int64_t>>& weight);

}  // namespace bladetrack
