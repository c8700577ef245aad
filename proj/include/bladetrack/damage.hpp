#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bladetrack/tracking.hpp"
#include "bladetrack/types.hpp"

namespace bladetrack {

inline constexpr std::size_t kSpanRegions = 4;

using DamageVector = std::array<double, kDamageClasses.size()>;
using RegionExtents = std::array<std::array<double, kSpanRegions>, kDamageClasses.size()>;

struct DamageSample {
  std::int64_t frame_index = 0;
  double blade_area_fraction = 0.0;  // blade pixels / image pixels
  DamageVector damage_fraction{};    // per kDamageClasses, damage pixels / blade pixels
};

struct DamageTimeSeries {
  int blade_id = 0;
  std::vector<DamageSample> samples;  // ascending frame_index
};

// For each detection in the frame: the blade ID a damage detection belongs
// to (largest mask overlap, ties to the lower ID), nullopt otherwise.
std::vector<std::optional<int>> assign_damage(const FrameDetections& frame,
                                              const FrameTrack& ids);

// One series per blade ID, ordered by ID. A blade contributes a sample only
// in frames where it is assigned.
std::vector<DamageTimeSeries> time_series(const TrackedSequence& tracked,
                                          std::span<const FrameDetections> frames);

// Splits the blade into four disjoint regions along the principal axis of
// its pixel coordinates, at the 25/50/75% ranks of the projections. Throws
// EmptyInputError for an empty mask.
std::array<BinaryMask, kSpanRegions> spanwise_partition(const BinaryMask& blade);

struct BladeSummary {
  int blade_id = 0;
  std::int64_t max_area_frame_index = 0;
  std::size_t frames_observed = 0;
  RegionExtents regions{};  // per kDamageClasses, per spanwise region
  DamageVector totals{};    // whole-blade extent per class
};

struct RowSummary {
  std::vector<BladeSummary> blades;  // ascending blade_id
};

// Separation and deformation come from the blade's maximum-area frame
// (earliest on ties); surface damage is averaged over all its frames.
RowSummary row_summary(std::span<const DamageTimeSeries> series, const TrackedSequence& tracked,
                       std::span<const FrameDetections> frames);

struct ImpactWeights {
  DamageVector class_weight{};
  std::array<double, kSpanRegions> region_multiplier{1.0, 1.0, 1.0, 1.0};

  // Throws ConfigError on negative entries or when every weight is zero.
  void validate() const;
};

struct BladeImpact {
  int blade_id = 0;
  double delta_f = 0.0;
};

// delta_f = sum over classes and regions of weight * multiplier * extent.
std::vector<BladeImpact> performance_impact(const RowSummary& summary, const ImpactWeights& w);

}  // namespace bladetrack
