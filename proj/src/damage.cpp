#include "bladetrack/damage.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "bladetrack/error.hpp"
#include "bladetrack/geometry.hpp"

namespace bladetrack {

namespace {

struct BladeRef {
  int id;
  std::size_t detection;
};

std::vector<BladeRef> assigned_blades(const FrameTrack& ids) {
  std::vector<BladeRef> out;
  for (std::size_t d = 0; d < ids.blade_ids.size(); ++d) {
    if (ids.blade_ids[d]) out.push_back({*ids.blade_ids[d], d});
  }
  std::sort(out.begin(), out.end(), [](const BladeRef& a, const BladeRef& b) { return a.id < b.id; });
  return out;
}

void require_aligned(const TrackedSequence& tracked, std::span<const FrameDetections> frames) {
  if (tracked.frames.size() != frames.size()) {
    throw ValidationError("tracked IDs cover " + std::to_string(tracked.frames.size()) +
                          " frames, detections " + std::to_string(frames.size()));
  }
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (tracked.frames[f].frame_index != frames[f].frame_index ||
        tracked.frames[f].blade_ids.size() != frames[f].detections.size()) {
      throw ValidationError("tracked IDs do not line up with detections at frame " +
                            std::to_string(frames[f].frame_index));
    }
  }
}

// Damage pixel counts on one blade in one frame, per class and region.
struct FrameDamage {
  std::array<std::array<std::int64_t, kSpanRegions>, kDamageClasses.size()> region_pixels{};
  std::int64_t blade_pixels = 0;
};

FrameDamage damage_by_region(const FrameDetections& frame,
                             const std::vector<std::optional<int>>& owners, std::size_t blade_det,
                             int blade_id) {
  FrameDamage out;
  const BinaryMask& blade = frame.detections[blade_det].mask;
  out.blade_pixels = blade.area();
  std::optional<MaskArray> labels;  // 1..4 inside the blade, 0 outside
  for (std::size_t d = 0; d < frame.detections.size(); ++d) {
    if (owners[d] != blade_id) continue;
    if (!labels) {
      const auto regions = spanwise_partition(blade);
      labels = MaskArray::Zero(blade.height(), blade.width());
      for (std::size_t r = 0; r < kSpanRegions; ++r) {
        *labels += regions[r].dense() * static_cast<std::uint8_t>(r + 1);
      }
    }
    const Detection& dmg = frame.detections[d];
    const MaskArray damage = dmg.mask.dense();
    for (std::size_t r = 0; r < kSpanRegions; ++r) {
      out.region_pixels[damage_index(dmg.label)][r] +=
          ((damage != 0) && (*labels == static_cast<std::uint8_t>(r + 1))).count();
    }
  }
  return out;
}

}  // namespace

std::vector<std::optional<int>> assign_damage(const FrameDetections& frame, const FrameTrack& ids) {
  std::vector<std::optional<int>> out(frame.detections.size());
  const std::vector<BladeRef> blades = assigned_blades(ids);
  for (std::size_t d = 0; d < frame.detections.size(); ++d) {
    const Detection& dmg = frame.detections[d];
    if (!is_damage(dmg.label)) continue;
    std::int64_t best = 0;
    for (const BladeRef& b : blades) {
      const std::int64_t ov = overlap_area(dmg.mask, frame.detections[b.detection].mask);
      if (ov > best) {
        best = ov;
        out[d] = b.id;
      }
    }
  }
  return out;
}

std::vector<DamageTimeSeries> time_series(const TrackedSequence& tracked,
                                          std::span<const FrameDetections> frames) {
  require_aligned(tracked, frames);
  std::map<int, DamageTimeSeries> by_id;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const FrameDetections& frame = frames[f];
    const std::vector<std::optional<int>> owners = assign_damage(frame, tracked.frames[f]);
    const double image_pixels =
        static_cast<double>(frame.image_width) * static_cast<double>(frame.image_height);
    for (const BladeRef& b : assigned_blades(tracked.frames[f])) {
      const BinaryMask& blade = frame.detections[b.detection].mask;
      const std::int64_t blade_pixels = blade.area();
      std::array<std::int64_t, kDamageClasses.size()> damage_pixels{};
      for (std::size_t d = 0; d < frame.detections.size(); ++d) {
        if (owners[d] != b.id) continue;
        damage_pixels[damage_index(frame.detections[d].label)] +=
            overlap_area(frame.detections[d].mask, blade);
      }
      DamageSample s;
      s.frame_index = frame.frame_index;
      s.blade_area_fraction = static_cast<double>(blade_pixels) / image_pixels;
      for (std::size_t c = 0; c < kDamageClasses.size(); ++c) {
        s.damage_fraction[c] =
            static_cast<double>(damage_pixels[c]) / static_cast<double>(blade_pixels);
      }
      auto& series = by_id[b.id];
      series.blade_id = b.id;
      series.samples.push_back(s);
    }
  }
  std::vector<DamageTimeSeries> out;
  out.reserve(by_id.size());
  for (auto& [id, s] : by_id) out.push_back(std::move(s));
  return out;
}

std::array<BinaryMask, kSpanRegions> spanwise_partition(const BinaryMask& blade) {
  const std::int64_t n = blade.area();
  if (n == 0) throw EmptyInputError("spanwise_partition: empty blade mask");
  const MaskArray dense = blade.dense();

  // Pixel coordinates (x = col, y = row), row-major order.
  Eigen::Matrix2Xd points(2, n);
  std::vector<std::int64_t> linear(static_cast<std::size_t>(n));
  std::int64_t k = 0;
  for (Eigen::Index r = 0; r < dense.rows(); ++r) {
    for (Eigen::Index c = 0; c < dense.cols(); ++c) {
      if (!dense(r, c)) continue;
      points.col(k) << static_cast<double>(c), static_cast<double>(r);
      linear[static_cast<std::size_t>(k)] = r * dense.cols() + c;
      ++k;
    }
  }
  const Eigen::Vector2d mean = points.rowwise().mean();
  const Eigen::Matrix2Xd centered = points.colwise() - mean;
  const Eigen::Matrix2d cov = centered * centered.transpose() / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(cov);
  // Eigenvalues ascend, so the last column is the principal axis.
  Eigen::Vector2d axis = solver.eigenvectors().col(1);
  const Eigen::Index dominant = std::abs(axis.x()) >= std::abs(axis.y()) ? 0 : 1;
  if (axis(dominant) < 0.0) axis = -axis;

  const Eigen::VectorXd projection = (axis.transpose() * centered).transpose();
  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::int64_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    return projection(a) < projection(b);
  });

  std::array<MaskArray, kSpanRegions> regions;
  for (auto& r : regions) r = MaskArray::Zero(dense.rows(), dense.cols());
  for (std::int64_t rank = 0; rank < n; ++rank) {
    const std::size_t region = static_cast<std::size_t>(rank * static_cast<std::int64_t>(kSpanRegions) / n);
    const std::int64_t pixel = linear[static_cast<std::size_t>(order[static_cast<std::size_t>(rank)])];
    regions[region].data()[pixel] = 1;
  }
  std::array<BinaryMask, kSpanRegions> out;
  for (std::size_t r = 0; r < kSpanRegions; ++r) out[r] = BinaryMask(regions[r]);
  return out;
}

RowSummary row_summary(std::span<const DamageTimeSeries> series, const TrackedSequence& tracked,
                       std::span<const FrameDetections> frames) {
  require_aligned(tracked, frames);
  std::map<std::int64_t, std::size_t> frame_position;
  for (std::size_t f = 0; f < frames.size(); ++f) frame_position[frames[f].frame_index] = f;

  RowSummary out;
  for (const DamageTimeSeries& s : series) {
    if (s.samples.empty()) continue;
    BladeSummary summary;
    summary.blade_id = s.blade_id;
    summary.frames_observed = s.samples.size();

    std::int64_t max_area = -1;
    FrameDamage at_max;
    std::array<double, kSpanRegions> surface_sum{};
    for (const DamageSample& sample : s.samples) {
      const std::size_t f = frame_position.at(sample.frame_index);
      const FrameTrack& ids = tracked.frames[f];
      std::optional<std::size_t> det;
      for (std::size_t d = 0; d < ids.blade_ids.size(); ++d) {
        if (ids.blade_ids[d] == s.blade_id) det = d;
      }
      if (!det) throw ValidationError("blade " + std::to_string(s.blade_id) + " not tracked in frame " +
                                      std::to_string(sample.frame_index));
      const std::vector<std::optional<int>> owners = assign_damage(frames[f], ids);
      const FrameDamage fd = damage_by_region(frames[f], owners, *det, s.blade_id);
      const double blade_pixels = static_cast<double>(fd.blade_pixels);
      const std::size_t surface = damage_index(ClassLabel::SurfaceDamage);
      for (std::size_t r = 0; r < kSpanRegions; ++r) {
        surface_sum[r] += static_cast<double>(fd.region_pixels[surface][r]) / blade_pixels;
      }
      if (fd.blade_pixels > max_area) {
        max_area = fd.blade_pixels;
        at_max = fd;
        summary.max_area_frame_index = sample.frame_index;
      }
    }

    const double frames_seen = static_cast<double>(s.samples.size());
    for (ClassLabel c : kDamageClasses) {
      const std::size_t ci = damage_index(c);
      double total = 0.0;
      for (std::size_t r = 0; r < kSpanRegions; ++r) {
        double extent = 0.0;
        if (c == ClassLabel::SurfaceDamage) {
          extent = surface_sum[r] / frames_seen;
        } else {
          extent = static_cast<double>(at_max.region_pixels[ci][r]) /
                   static_cast<double>(at_max.blade_pixels);
        }
        summary.regions[ci][r] = extent;
      }
      if (c == ClassLabel::SurfaceDamage) {
        for (const DamageSample& sample : s.samples) total += sample.damage_fraction[ci];
        total /= frames_seen;
      } else {
        std::int64_t pixels = 0;
        for (std::int64_t p : at_max.region_pixels[ci]) pixels += p;
        total = static_cast<double>(pixels) / static_cast<double>(at_max.blade_pixels);
      }
      summary.totals[ci] = total;
    }
    out.blades.push_back(summary);
  }
  std::sort(out.blades.begin(), out.blades.end(),
            [](const BladeSummary& a, const BladeSummary& b) { return a.blade_id < b.blade_id; });
  return out;
}

void ImpactWeights::validate() const {
  bool any = false;
  for (double w : class_weight) {
    if (!(w >= 0.0)) throw ConfigError("impact weights must be >= 0");
    any = any || w > 0.0;
  }
  for (double m : region_multiplier) {
    if (!(m >= 0.0)) throw ConfigError("region multipliers must be >= 0");
  }
  if (!any) throw ConfigError("at least one impact weight must be > 0");
}

std::vector<BladeImpact> performance_impact(const RowSummary& summary, const ImpactWeights& w) {
  w.validate();
  std::vector<BladeImpact> out;
  out.reserve(summary.blades.size());
  for (const BladeSummary& b : summary.blades) {
    double total = 0.0;
    for (std::size_t c = 0; c < kDamageClasses.size(); ++c) {
      for (std::size_t r = 0; r < kSpanRegions; ++r) {
        total += w.class_weight[c] * w.region_multiplier[r] * b.regions[c][r];
      }
    }
    out.push_back({b.blade_id, total});
  }
  return out;
}

}  // namespace bladetrack
