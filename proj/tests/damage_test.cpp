#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "bladetrack/damage.hpp"
#include "bladetrack/error.hpp"
#include "fixtures.hpp"

namespace bladetrack {
namespace {

constexpr int kH = 60;
constexpr int kW = 200;
constexpr auto kRotor = ClassLabel::CompressorRotor;
constexpr auto kSurface = ClassLabel::SurfaceDamage;
constexpr auto kSeparation = ClassLabel::MaterialSeparation;
constexpr auto kDeformation = ClassLabel::MaterialDeformation;

Detection box(ClassLabel label, int row0, int col0, int rows, int cols) {
  return fixture::box(label, 0.9, kH, kW, row0, col0, rows, cols);
}

FrameTrack ids(std::int64_t index, std::vector<std::optional<int>> blade_ids) {
  FrameTrack ft;
  ft.frame_index = index;
  ft.blade_ids = std::move(blade_ids);
  return ft;
}

TrackedSequence sequence(std::vector<FrameTrack> frames) {
  TrackedSequence seq;
  seq.frames = std::move(frames);
  return seq;
}

double sum(const std::array<double, kSpanRegions>& a) {
  double s = 0.0;
  for (double v : a) s += v;
  return s;
}

TEST(AssignDamage, InsideOneBlade) {
  const FrameDetections f = fixture::frame(
      0, kH, kW, {box(kRotor, 0, 0, 20, 50), box(kRotor, 0, 100, 20, 50), box(kSurface, 5, 110, 3, 3)});
  const auto owners = assign_damage(f, ids(0, {4, 9, std::nullopt}));
  EXPECT_EQ(owners, (std::vector<std::optional<int>>{std::nullopt, std::nullopt, 9}));
}

TEST(AssignDamage, LargestOverlapWins) {
  // Blades touch at column 50; the damage covers 30 px of A and 10 px of B.
  const FrameDetections f = fixture::frame(
      0, kH, kW, {box(kRotor, 0, 0, 20, 50), box(kRotor, 0, 50, 20, 50), box(kSeparation, 0, 47, 10, 4)});
  EXPECT_EQ(assign_damage(f, ids(0, {1, 2, std::nullopt}))[2], 1);
}

TEST(AssignDamage, TieGoesToLowerId) {
  const FrameDetections f = fixture::frame(
      0, kH, kW, {box(kRotor, 0, 0, 20, 50), box(kRotor, 0, 50, 20, 50), box(kSurface, 0, 48, 5, 4)});
  EXPECT_EQ(assign_damage(f, ids(0, {8, 3, std::nullopt}))[2], 3);
}

TEST(AssignDamage, NoOverlapOrUntrackedBladeIsUnassigned) {
  const FrameDetections f = fixture::frame(
      0, kH, kW, {box(kRotor, 0, 0, 20, 50), box(kSurface, 40, 150, 5, 5), box(kRotor, 30, 100, 20, 50),
                  box(kSurface, 35, 110, 5, 5)});
  const auto owners = assign_damage(f, ids(0, {1, std::nullopt, std::nullopt, std::nullopt}));
  EXPECT_FALSE(owners[1]);
  EXPECT_FALSE(owners[3]);
}

TEST(TimeSeries, SurfaceFraction) {
  // 20 x 50 = 1000 px blade with a 5 x 10 = 50 px patch.
  const std::vector<FrameDetections> frames = {
      fixture::frame(3, kH, kW, {box(kRotor, 0, 0, 20, 50), box(kSurface, 5, 5, 5, 10)})};
  const auto series = time_series(sequence({ids(3, {0, std::nullopt})}), frames);
  ASSERT_EQ(series.size(), 1u);
  ASSERT_EQ(series[0].samples.size(), 1u);
  const DamageSample& s = series[0].samples[0];
  EXPECT_EQ(s.frame_index, 3);
  EXPECT_EQ(s.damage_fraction[damage_index(kSurface)], 0.05);
  EXPECT_EQ(s.damage_fraction[damage_index(kSeparation)], 0.0);
  EXPECT_EQ(s.blade_area_fraction, 1000.0 / (kH * kW));
}

TEST(TimeSeries, UndamagedBladeIsZero) {
  const std::vector<FrameDetections> frames = {fixture::frame(0, kH, kW, {box(kRotor, 0, 0, 20, 50)})};
  const auto series = time_series(sequence({ids(0, {0})}), frames);
  for (double v : series[0].samples[0].damage_fraction) EXPECT_EQ(v, 0.0);
}

TEST(TimeSeries, PatchesOfOneClassAdd) {
  // 10 x 50 = 500 px blade, patches of 20 and 30 px.
  const std::vector<FrameDetections> frames = {fixture::frame(
      0, kH, kW, {box(kRotor, 0, 0, 10, 50), box(kSeparation, 0, 0, 2, 10), box(kSeparation, 5, 20, 3, 10)})};
  const auto series = time_series(sequence({ids(0, {0, std::nullopt, std::nullopt})}), frames);
  EXPECT_EQ(series[0].samples[0].damage_fraction[damage_index(kSeparation)], 0.1);
}

TEST(TimeSeries, OnlyOverlapWithBladeCounts) {
  // Half the 10 x 10 patch hangs off the blade.
  const std::vector<FrameDetections> frames = {
      fixture::frame(0, kH, kW, {box(kRotor, 0, 0, 20, 50), box(kDeformation, 15, 20, 10, 10)})};
  const auto series = time_series(sequence({ids(0, {0, std::nullopt})}), frames);
  EXPECT_EQ(series[0].samples[0].damage_fraction[damage_index(kDeformation)], 50.0 / 1000.0);
}

TEST(TimeSeries, SamplesOnlyWhereAssigned) {
  const std::vector<FrameDetections> frames = {fixture::frame(0, kH, kW, {box(kRotor, 0, 0, 20, 50)}),
                                               fixture::frame(1, kH, kW, {box(kRotor, 0, 0, 20, 50)}),
                                               fixture::frame(2, kH, kW, {box(kRotor, 0, 0, 20, 50)})};
  const auto series = time_series(sequence({ids(0, {5}), ids(1, {std::nullopt}), ids(2, {5})}), frames);
  ASSERT_EQ(series.size(), 1u);
  EXPECT_EQ(series[0].blade_id, 5);
  ASSERT_EQ(series[0].samples.size(), 2u);
  EXPECT_EQ(series[0].samples[1].frame_index, 2);
}

TEST(TimeSeries, MisalignedIdsThrow) {
  const std::vector<FrameDetections> frames = {fixture::frame(0, kH, kW, {box(kRotor, 0, 0, 20, 50)})};
  EXPECT_THROW(time_series(sequence({}), frames), ValidationError);
  EXPECT_THROW(time_series(sequence({ids(0, {0, 1})}), frames), ValidationError);
}

std::vector<PixelRect> bounds(const std::array<BinaryMask, kSpanRegions>& parts) {
  std::vector<PixelRect> out;
  for (const auto& p : parts) out.push_back(p.tight_bounds().value_or(PixelRect{}));
  return out;
}

TEST(SpanwisePartition, HorizontalStrip) {
  const auto parts = spanwise_partition(BinaryMask(fixture::rect(10, 120, 3, 10, 4, 100)));
  for (const auto& p : parts) EXPECT_EQ(p.area(), 100);
  EXPECT_EQ(bounds(parts), (std::vector<PixelRect>{
                               {3, 10, 6, 34}, {3, 35, 6, 59}, {3, 60, 6, 84}, {3, 85, 6, 109}}));
}

TEST(SpanwisePartition, VerticalStrip) {
  const auto parts = spanwise_partition(BinaryMask(fixture::rect(120, 10, 10, 3, 100, 4)));
  EXPECT_EQ(bounds(parts), (std::vector<PixelRect>{
                               {10, 3, 34, 6}, {35, 3, 59, 6}, {60, 3, 84, 6}, {85, 3, 109, 6}}));
}

TEST(SpanwisePartition, FourPointsOnALine) {
  MaskArray m = MaskArray::Zero(8, 8);
  for (int i = 0; i < 4; ++i) m(i * 2, i * 2) = 1;
  const auto parts = spanwise_partition(BinaryMask(m));
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(parts[static_cast<std::size_t>(i)].area(), 1);
    EXPECT_TRUE(parts[static_cast<std::size_t>(i)].test(i * 2, i * 2));
  }
}

TEST(SpanwisePartition, EmptyMaskThrows) {
  EXPECT_THROW(spanwise_partition(BinaryMask(5, 5)), EmptyInputError);
}

TEST(SpanwisePartition, DisjointCoverOfRandomBlobs) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 200; ++i) {
    const int h = fixture::uniform_int(rng, 1, 30), w = fixture::uniform_int(rng, 1, 30);
    MaskArray m = fixture::random_mask(rng, h, w);
    m(fixture::uniform_int(rng, 0, h - 1), fixture::uniform_int(rng, 0, w - 1)) = 1;
    const auto parts = spanwise_partition(BinaryMask(m));
    MaskArray cover = MaskArray::Zero(h, w);
    std::int64_t biggest = 0, smallest = m.size();
    for (const auto& p : parts) {
      cover += p.dense();
      biggest = std::max(biggest, p.area());
      smallest = std::min(smallest, p.area());
    }
    ASSERT_TRUE((cover == (m != 0).cast<std::uint8_t>()).all()) << "case " << i;
    ASSERT_LE(biggest - smallest, 1);
  }
}

TEST(RowSummary, SurfaceAveragedOverFrames) {
  // The 10 x 100 blade's first region spans columns 0-24; every patch sits in it.
  std::vector<FrameDetections> frames;
  std::vector<FrameTrack> tracks;
  for (int f = 0; f < 3; ++f) {
    frames.push_back(fixture::frame(f, kH, kW, {box(kRotor, 0, 0, 10, 100), box(kSurface, 0, 0, 2 * (f + 1), 10)}));
    tracks.push_back(ids(f, {0, std::nullopt}));
  }
  const TrackedSequence seq = sequence(tracks);
  const auto series = time_series(seq, frames);
  const RowSummary summary = row_summary(series, seq, frames);
  ASSERT_EQ(summary.blades.size(), 1u);
  const BladeSummary& b = summary.blades[0];
  EXPECT_EQ(b.frames_observed, 3u);
  const auto& surface = b.regions[damage_index(kSurface)];
  EXPECT_NEAR(surface[0], 0.04, 1e-12);
  EXPECT_EQ(surface[1], 0.0);
  EXPECT_EQ(surface[2], 0.0);
  EXPECT_EQ(surface[3], 0.0);
  EXPECT_NEAR(b.totals[damage_index(kSurface)], 0.04, 1e-12);
}

TEST(RowSummary, SeparationFromMaxAreaFrame) {
  // Frame 0: 1000 px blade with 80 px (0.08). Frame 1: 500 px blade with 60 px (0.12).
  const std::vector<FrameDetections> frames = {
      fixture::frame(0, kH, kW, {box(kRotor, 0, 0, 10, 100), box(kSeparation, 0, 0, 8, 10)}),
      fixture::frame(1, kH, kW, {box(kRotor, 0, 0, 10, 50), box(kSeparation, 0, 0, 6, 10)})};
  const TrackedSequence seq = sequence({ids(0, {2, std::nullopt}), ids(1, {2, std::nullopt})});
  const RowSummary summary = row_summary(time_series(seq, frames), seq, frames);
  const BladeSummary& b = summary.blades[0];
  EXPECT_EQ(b.max_area_frame_index, 0);
  EXPECT_NEAR(b.totals[damage_index(kSeparation)], 0.08, 1e-12);
  EXPECT_NEAR(sum(b.regions[damage_index(kSeparation)]), 0.08, 1e-12);
}

TEST(RowSummary, MaxAreaTieTakesEarliestFrame) {
  const std::vector<FrameDetections> frames = {
      fixture::frame(4, kH, kW, {box(kRotor, 0, 0, 10, 100), box(kDeformation, 0, 0, 1, 10)}),
      fixture::frame(9, kH, kW, {box(kRotor, 0, 0, 10, 100), box(kDeformation, 0, 0, 3, 10)})};
  const TrackedSequence seq = sequence({ids(4, {0, std::nullopt}), ids(9, {0, std::nullopt})});
  const BladeSummary b = row_summary(time_series(seq, frames), seq, frames).blades[0];
  EXPECT_EQ(b.max_area_frame_index, 4);
  EXPECT_NEAR(b.totals[damage_index(kDeformation)], 0.01, 1e-12);
}

TEST(RowSummary, UndamagedBladeIsZero) {
  const std::vector<FrameDetections> frames = {fixture::frame(0, kH, kW, {box(kRotor, 0, 0, 10, 100)})};
  const TrackedSequence seq = sequence({ids(0, {0})});
  const BladeSummary b = row_summary(time_series(seq, frames), seq, frames).blades[0];
  for (const auto& cls : b.regions)
    for (double v : cls) EXPECT_EQ(v, 0.0);
  for (double v : b.totals) EXPECT_EQ(v, 0.0);
}

// Several blades drifting right, each with random patches of every class.
struct RandomRow {
  std::vector<FrameDetections> frames;
  TrackedSequence seq;
};

RandomRow random_row(std::mt19937_64& rng) {
  RandomRow row;
  std::vector<FrameTrack> tracks;
  for (int f = 0; f < 6; ++f) {
    FrameDetections frame = fixture::frame(f, kH, kW);
    std::vector<std::optional<int>> blade_ids;
    std::vector<Detection> damage;
    for (int b = 0; b < 3; ++b) {
      const int col0 = 10 + 60 * b + f, rows = 20 + fixture::uniform_int(rng, 0, 20);
      frame.detections.push_back(box(kRotor, 5, col0, rows, 40));
      blade_ids.push_back(b);
      for (int k = 0; k < 4; ++k) {
        const ClassLabel c = kDamageClasses[static_cast<std::size_t>(fixture::uniform_int(rng, 0, 2))];
        damage.push_back(box(c, fixture::uniform_int(rng, 5, 30), col0 + fixture::uniform_int(rng, 0, 30),
                             fixture::uniform_int(rng, 1, 8), fixture::uniform_int(rng, 1, 8)));
      }
    }
    for (auto& d : damage) {
      frame.detections.push_back(std::move(d));
      blade_ids.push_back(std::nullopt);
    }
    row.frames.push_back(std::move(frame));
    tracks.push_back(ids(f, blade_ids));
  }
  row.seq = sequence(tracks);
  return row;
}

TEST(RowSummary, RegionsSumToWholeBlade) {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 20; ++i) {
    const RandomRow row = random_row(rng);
    const RowSummary summary = row_summary(time_series(row.seq, row.frames), row.seq, row.frames);
    for (const BladeSummary& b : summary.blades)
      for (ClassLabel c : kDamageClasses)
        ASSERT_NEAR(sum(b.regions[damage_index(c)]), b.totals[damage_index(c)], 1e-9);
  }
}

TEST(RowSummary, InvariantToDamageOrder) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 a(seed), b(seed);
    const RandomRow plain = random_row(a);
    RandomRow shuffled = random_row(b);
    // Same geometry, damage detections reversed within each frame.
    for (auto& f : shuffled.frames) std::reverse(f.detections.begin() + 3, f.detections.end());
    const RowSummary x = row_summary(time_series(plain.seq, plain.frames), plain.seq, plain.frames);
    const RowSummary y =
        row_summary(time_series(shuffled.seq, shuffled.frames), shuffled.seq, shuffled.frames);
    ASSERT_EQ(x.blades.size(), y.blades.size());
    for (std::size_t k = 0; k < x.blades.size(); ++k) {
      for (ClassLabel c : kDamageClasses) {
        for (std::size_t r = 0; r < kSpanRegions; ++r)
          ASSERT_NEAR(x.blades[k].regions[damage_index(c)][r], y.blades[k].regions[damage_index(c)][r], 1e-12);
      }
    }
  }
}

ImpactWeights unit_weights() {
  ImpactWeights w;
  w.class_weight = {1.0, 1.0, 1.0};
  return w;
}

TEST(PerformanceImpact, ZeroExtentIsZero) {
  RowSummary s;
  s.blades.push_back({});
  EXPECT_EQ(performance_impact(s, unit_weights())[0].delta_f, 0.0);
}

TEST(PerformanceImpact, SingleTerm) {
  RowSummary s;
  BladeSummary b;
  b.blade_id = 6;
  b.regions[damage_index(kSeparation)][2] = 0.1;
  s.blades.push_back(b);
  ImpactWeights w;
  w.class_weight[damage_index(kSeparation)] = 2.0;
  const auto impact = performance_impact(s, w);
  EXPECT_EQ(impact[0].blade_id, 6);
  EXPECT_DOUBLE_EQ(impact[0].delta_f, 0.2);
  w.region_multiplier[2] = 3.0;
  EXPECT_DOUBLE_EQ(performance_impact(s, w)[0].delta_f, 0.6);
}

TEST(PerformanceImpact, HomogeneousInWeights) {
  std::mt19937_64 rng(41);
  const RandomRow row = random_row(rng);
  const RowSummary summary = row_summary(time_series(row.seq, row.frames), row.seq, row.frames);
  ImpactWeights w;
  w.class_weight = {0.5, 2.0, 1.25};
  w.region_multiplier = {1.0, 0.5, 2.0, 1.5};
  ImpactWeights doubled = w;
  for (double& v : doubled.class_weight) v *= 2.0;
  const auto a = performance_impact(summary, w), b = performance_impact(summary, doubled);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b[i].delta_f, 2.0 * a[i].delta_f, 1e-12);
}

TEST(ImpactWeights, Validation) {
  ImpactWeights w;
  EXPECT_THROW(w.validate(), ConfigError);
  w = unit_weights();
  EXPECT_NO_THROW(w.validate());
  w.class_weight[1] = -1.0;
  EXPECT_THROW(w.validate(), ConfigError);
  w = unit_weights();
  w.region_multiplier[0] = -0.5;
  EXPECT_THROW(w.validate(), ConfigError);
}

}  // namespace
}  // namespace bladetrack
