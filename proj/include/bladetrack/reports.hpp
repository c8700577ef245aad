#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "bladetrack/damage.hpp"
#include "bladetrack/evaluation.hpp"

namespace bladetrack {

// Fixed-point with `digits` decimals and a '.' separator regardless of locale.
std::string format_fixed(double value, int digits = 6);

// blade_id,frame_index,blade_area_fraction,surface_fraction,
// separation_fraction,deformation_fraction; rows by (blade_id, frame_index).
std::string write_time_series(std::span<const DamageTimeSeries> series);

// Per blade: max-area frame, frame count, region extents per damage class,
// whole-blade totals and delta_f when `impacts` covers the blade.
std::string write_row_summary(const RowSummary& summary, std::span<const BladeImpact> impacts);

// blade_id,delta_f
std::string write_impact_table(std::span<const BladeImpact> impacts);

// Line-based `key = value` with '#' comments. Keys are damage class names
// (SurfaceDamage, MaterialSeparation, MaterialDeformation) and region.1 to
// region.4. Classes left out weigh 0, regions left out multiply by 1.
// Throws ConfigError on unknown or repeated keys and bad numbers.
ImpactWeights parse_impact_weights(std::string_view text);

// Aggregate plus one entry per image; `image_keys` labels the images (frame
// indices in practice) and must match report.images in length.
std::string write_eval_json(const SetReport& report, std::span<const std::int64_t> image_keys);

// class,AP,matched_iou with one row per class and a final "mean" row; empty
// cells where a value is undefined.
std::string write_eval_csv(const EvalReport& report);

}  // namespace bladetrack
