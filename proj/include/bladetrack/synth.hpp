#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bladetrack/image.hpp"
#include "bladetrack/tracking.hpp"
#include "bladetrack/types.hpp"

namespace bladetrack::synth {

// Damage painted onto one blade: the first round(fraction * blade area) blade
// pixels in row-major order, starting at the row `span_start` of the way down
// the blade.
struct DamageInjection {
  int blade = 0;
  ClassLabel label = ClassLabel::SurfaceDamage;
  double fraction = 0.05;
  double span_start = 0.25;
  double amplitude = 0.3;  // intensity offset over the blade in rendered images
};

struct SynthConfig {
  int image_width = 384;
  int image_height = 288;
  int blade_count = 97;
  double fps = 25.0;
  int displacement = 5;     // pixels per frame
  int direction = 1;        // +1 rightward, -1 leftward at frame 0
  int blade_spacing = 40;   // pixels between neighbouring blades
  int blade_width = 28;     // horizontal width of each parallelogram row
  int blade_height = 200;
  int blade_slant = 16;     // horizontal shift from top edge to bottom edge
  int blade_top = 44;       // top row of every blade
  int frame_count = 0;      // 0: until the last blade has left the view
  std::vector<int> reversals;  // frames from which the direction flips
  std::vector<DamageInjection> damage;
  double dropout = 0.0;
  double jitter_std = 0.0;
  double confidence_noise_std = 0.0;
  std::uint64_t seed = 0;
  double background = 0.15;
  double blade_intensity = 0.5;

  // Throws ConfigError on inconsistent settings.
  void validate() const;
  int resolved_frame_count() const;
};

struct DamageTruth {
  ClassLabel label = ClassLabel::SurfaceDamage;
  BinaryMask mask;
  std::int64_t pixels = 0;
  double fraction = 0.0;  // pixels / blade pixels in this frame
  double amplitude = 0.0;
  std::size_t detection = 0;
};

struct BladeTruth {
  int blade_id = 0;
  std::size_t detection = 0;
  BinaryMask mask;
  std::vector<DamageTruth> damage;
};

struct FrameTruth {
  std::int64_t frame_index = 0;
  int offset = 0;  // horizontal row displacement of this frame
  std::vector<BladeTruth> blades;
};

struct GroundTruth {
  std::vector<FrameTruth> frames;
};

class Sequence {
 public:
  Sequence(SynthConfig cfg, std::vector<FrameDetections> frames, GroundTruth truth);

  const SynthConfig& config() const { return cfg_; }
  const std::vector<FrameDetections>& frames() const { return frames_; }
  const GroundTruth& truth() const { return truth_; }
  // Rendered on demand so long sequences stay small in memory.
  GrayImage image(std::size_t frame) const;

 private:
  SynthConfig cfg_;
  std::vector<FrameDetections> frames_;
  GroundTruth truth_;
};

// Deterministic in `cfg`. Detections carry confidence 1 and exact masks;
// per frame each visible blade is followed by its damage detections.
Sequence generate(const SynthConfig& cfg);

struct Perturbed {
  std::vector<FrameDetections> frames;
  // For each kept detection, its index in the clean frame.
  std::vector<std::vector<std::size_t>> source;
};

// Dropout, integer jitter and confidence noise, drawn per detection from
// substreams keyed on (seed, frame, detection).
Perturbed perturb(const std::vector<FrameDetections>& frames, const SynthConfig& cfg);

// Ground-truth blade IDs aligned with the clean detections.
TruthIds truth_ids(const GroundTruth& truth, const std::vector<FrameDetections>& clean);
// Ground-truth blade IDs aligned with perturbed detections.
TruthIds truth_ids(const GroundTruth& truth, const std::vector<FrameDetections>& clean,
                   const Perturbed& perturbed);

struct OracleReport {
  double accuracy = 0.0;
  std::vector<std::string> diff;  // one line per disagreeing detection
};

OracleReport oracle_check(const TrackedSequence& pred, const TruthIds& truth);

}  // namespace bladetrack::synth
