#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bladetrack/synth.hpp"
#include "bladetrack/tracking.hpp"
#include "bladetrack/types.hpp"

namespace bladetrack {

inline constexpr std::string_view kSchemaVersion = "1.0";

// JSON document shared by predictions, ground truth and synthetic output.
//
//   { "schema_version": "1.0", "image_width": W, "image_height": H,
//     "frames": [ { "frame_index": i,
//                   "detections": [ { "class": "CompressorRotor",
//                                     "confidence": 0.93,
//                                     "bbox": [x, y, width, height],
//                                     "mask": { "type": "rle", "counts": [...] } } ] } ] }
//
// Masks may also be { "type": "polygon", "points": [x1, y1, x2, y2, ...] };
// polygons are rasterized on load and always written back as RLE.
struct InterchangeDocument {
  std::string schema_version{kSchemaVersion};
  int image_width = 0;
  int image_height = 0;
  std::vector<FrameDetections> frames;

  friend bool operator==(const InterchangeDocument&, const InterchangeDocument&) = default;
};

// Structural problems throw FormatError naming the JSON path; invariant
// violations (RLE totals, box containment, frame order) throw
// ValidationError listing every offending frame/detection.
InterchangeDocument parse_interchange(std::string_view text);
std::vector<FrameDetections> parse_detections(std::string_view text);

// Canonical form: frames in stored order, RLE masks, fixed key order.
std::string write_interchange(const InterchangeDocument& doc);
std::string write_detections(std::span<const FrameDetections> frames, int image_width,
                             int image_height);

// Per-frame blade IDs (null for untracked detections) and leaving lists.
std::string write_tracked(const TrackedSequence& tracked);
TrackedSequence parse_tracked(std::string_view text);

// Synthetic ground truth: blade IDs aligned with the emitted detections plus
// the exact damage fractions per rendered blade.
std::string write_truth(const synth::GroundTruth& truth, const TruthIds& ids);
TruthIds parse_truth_ids(std::string_view text);

// Synthetic sequence settings as a JSON object whose keys mirror SynthConfig
// fields; omitted keys keep their defaults, unknown keys are a ConfigError.
struct SynthConfigFile {
  synth::SynthConfig config;
  bool has_seed = false;
};
SynthConfigFile parse_synth_config(std::string_view text);
// Every field, including defaults.
std::string write_synth_config(const synth::SynthConfig& cfg);

}  // namespace bladetrack
