#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "bladetrack/error.hpp"
#include "bladetrack/geometry.hpp"
#include "bladetrack/surface_filter.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace bladetrack {
namespace {

GrayImage random_image(std::mt19937_64& rng, int h, int w) {
  GrayImage img(h, w);
  for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = fixture::uniform(rng, 0.0, 1.0);
  return img;
}

TEST(Crop, FullBoxIsIdentity) {
  std::mt19937_64 rng(61);
  const GrayImage img = random_image(rng, 7, 9);
  EXPECT_TRUE((crop_to_bbox(img, {0, 0, 9, 7}) == img).all());
}

TEST(Crop, GradientWindow) {
  GrayImage img(10, 10);
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 10; ++c) img(r, c) = r * 10 + c;
  const GrayImage crop = crop_to_bbox(img, {3, 2, 4, 4});
  ASSERT_EQ(crop.rows(), 4);
  ASSERT_EQ(crop.cols(), 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) EXPECT_EQ(crop(r, c), (r + 2) * 10 + (c + 3));
}

TEST(Crop, FractionalBoxCoversTouchedPixels) {
  EXPECT_EQ(bbox_pixels({1.5, 2.25, 2.0, 1.5}, 10, 10), (PixelRect{2, 1, 3, 3}));
}

TEST(Crop, ClipsAndRejectsOutside) {
  const GrayImage img = GrayImage::Ones(5, 5);
  EXPECT_EQ(crop_to_bbox(img, {3, 3, 10, 10}).size(), 4);
  EXPECT_THROW(crop_to_bbox(img, {6, 0, 2, 2}), EmptyInputError);
}

TEST(Crop, GrayColourBecomesConstant) {
  const GrayImage v = GrayImage::Constant(4, 4, 0.37);
  const GrayImage crop = crop_to_bbox(RgbImage{v, v, v}, {0, 0, 4, 4});
  for (Eigen::Index i = 0; i < crop.size(); ++i) EXPECT_NEAR(crop.data()[i], 0.37, 1e-15);
}

TEST(GaussianKernel, SumsToOne) {
  for (double sigma : {0.1, 0.5, 1.0, 2.0, 3.3, 7.0}) {
    const GrayImage k = gaussian_kernel(sigma);
    EXPECT_EQ(k.rows(), 2 * static_cast<int>(std::ceil(3 * sigma)) + 1);
    EXPECT_NEAR(k.sum(), 1.0, 1e-12) << sigma;
    EXPECT_NEAR(gaussian_kernel_1d(sigma).sum(), 1.0, 1e-12) << sigma;
  }
}

TEST(GaussianKernel, Symmetric) {
  const GrayImage k = gaussian_kernel(1.7);
  EXPECT_TRUE((k == k.colwise().reverse()).all());
  EXPECT_TRUE((k == k.rowwise().reverse()).all());
  EXPECT_TRUE((k == k.transpose()).all());
}

TEST(GaussianKernel, NarrowSigmaApproachesDelta) {
  const GrayImage k = gaussian_kernel(0.1);
  ASSERT_EQ(k.rows(), 3);
  EXPECT_NEAR(k(1, 1), 1.0, 1e-12);
  EXPECT_NEAR(k.sum() - k(1, 1), 0.0, 1e-12);
}

TEST(GaussianKernel, OuterProductOfTaps) {
  const auto taps = gaussian_kernel_1d(2.0);
  const GrayImage k = gaussian_kernel(2.0);
  for (Eigen::Index r = 0; r < k.rows(); ++r)
    for (Eigen::Index c = 0; c < k.cols(); ++c) EXPECT_NEAR(k(r, c), taps(r) * taps(c), 1e-15);
}

TEST(Convolve, ReflectIndexMirrorsAboutEdges) {
  EXPECT_EQ(reflect_index(-1, 5), 0);
  EXPECT_EQ(reflect_index(-2, 5), 1);
  EXPECT_EQ(reflect_index(5, 5), 4);
  EXPECT_EQ(reflect_index(6, 5), 3);
  EXPECT_EQ(reflect_index(-7, 1), 0);
  EXPECT_EQ(reflect_index(12, 5), 2);
}

TEST(Convolve, SeparableDirectAndReferenceAgree) {
  std::mt19937_64 rng(67);
  for (int i = 0; i < 30; ++i) {
    // Small images force the kernel to reflect more than once.
    const GrayImage img = random_image(rng, fixture::uniform_int(rng, 1, 24), fixture::uniform_int(rng, 1, 24));
    const double sigma = fixture::uniform(rng, 0.3, 4.0);
    const GrayImage sep = convolve_separable(img, gaussian_kernel_1d(sigma));
    const GrayImage direct = convolve_direct(img, gaussian_kernel(sigma));
    const GrayImage ref = oracle::convolve(img, gaussian_kernel(sigma));
    ASSERT_LE((sep - direct).abs().maxCoeff(), 1e-10);
    ASSERT_LE((direct - ref).abs().maxCoeff(), 1e-12);
  }
}

TEST(Convolve, AsymmetricKernelIsFlipped) {
  // A kernel with its only weight to the right of centre shifts the image right.
  GrayImage k = GrayImage::Zero(1, 3);
  k(0, 2) = 1.0;
  GrayImage img = GrayImage::Zero(1, 5);
  img(0, 2) = 1.0;
  const GrayImage out = convolve_direct(img, k);
  EXPECT_EQ(out(0, 3), 1.0);
  EXPECT_TRUE((out == oracle::convolve(img, k)).all());
}

TEST(HighPass, ConstantImageGivesZero) {
  for (double v : {0.0, 0.1, 0.5, 0.73, 1.0, 250.0}) {
    const GrayImage out = high_pass(GrayImage(GrayImage::Constant(17, 23, v)), 2.0);
    EXPECT_EQ(out.abs().maxCoeff(), 0.0) << v;
  }
}

TEST(HighPass, ImpulseKeepsOneMinusCentreWeight) {
  GrayImage img = GrayImage::Zero(31, 31);
  img(15, 15) = 0.8;
  const double sigma = 2.0;
  const GrayImage out = high_pass(img, sigma);
  const GrayImage k = gaussian_kernel(sigma);
  EXPECT_NEAR(out(15, 15), 0.8 * (1.0 - k(6, 6)), 1e-12);
  EXPECT_EQ((out > 0.0).count(), 1);
}

TEST(HighPass, BoundedByInputAndNonNegative) {
  std::mt19937_64 rng(71);
  for (int i = 0; i < 20; ++i) {
    const GrayImage img = random_image(rng, 20, 20);
    const GrayImage out = high_pass(img, fixture::uniform(rng, 0.5, 3.0));
    ASSERT_GE(out.minCoeff(), 0.0);
    ASSERT_TRUE((out <= img).all());
  }
}

TEST(HighPass, IgnoresAddedConstant) {
  std::mt19937_64 rng(73);
  const GrayImage img = random_image(rng, 25, 19);
  const GrayImage shifted = img + 0.3;
  EXPECT_LE((high_pass(img, 1.5) - high_pass(shifted, 1.5)).abs().maxCoeff(), 1e-12);
}

TEST(ErodedMask, LargeRadiusClearsEverything) {
  const GrayImage img = GrayImage::Ones(10, 10);
  const BinaryMask m(fixture::rect(10, 10, 2, 2, 6, 6));
  EXPECT_EQ(apply_eroded_mask(img, m, 3).abs().maxCoeff(), 0.0);
}

TEST(ErodedMask, InteriorKeptExactlyEdgesCleared) {
  std::mt19937_64 rng(79);
  const GrayImage img = random_image(rng, 12, 12);
  const BinaryMask m(fixture::rect(12, 12, 1, 1, 10, 10));
  const GrayImage out = apply_eroded_mask(img, m, 2);
  for (int r = 0; r < 12; ++r) {
    for (int c = 0; c < 12; ++c) {
      const bool inside = r >= 3 && r <= 8 && c >= 3 && c <= 8;
      EXPECT_EQ(out(r, c), inside ? img(r, c) : 0.0) << r << "," << c;
    }
  }
}

TEST(ErodedMask, ExtentMismatchThrows) {
  EXPECT_THROW(apply_eroded_mask(GrayImage::Ones(4, 4), BinaryMask(4, 5), 1), DimensionError);
}

TEST(ThresholdEnhance, Examples) {
  GrayImage low(1, 3);
  low << 0.05, 0.1, 0.0;
  EXPECT_EQ(threshold_enhance(low, 0.1, true).abs().maxCoeff(), 0.0);
  GrayImage in(1, 3);
  in << 0.0, 0.2, 0.5;
  const GrayImage out = threshold_enhance(in, 0.1, true);
  EXPECT_EQ(out(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(out(0, 1), 0.4);
  EXPECT_EQ(out(0, 2), 1.0);
  EXPECT_TRUE((threshold_enhance(in, 0.0, false) == in).all());
}

TEST(FilterParams, Validation) {
  FilterParams p;
  EXPECT_NO_THROW(p.validate());
  p.sigma = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.tau = -0.1;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.erosion_radius = 0;
  EXPECT_THROW(p.validate(), ConfigError);
}

// 80 x 120 frame, black background, a flat 60 x 80 blade at 0.5 and an
// optional two-pixel-wide vertical scratch.
constexpr int kRow0 = 10, kCol0 = 20, kScratchCol = 58, kScratchRow0 = 25, kScratchRows = 30;

struct Scene {
  GrayImage frame;
  Detection blade;
};

Scene scratched_blade(double amplitude) {
  Scene s;
  s.frame = GrayImage::Zero(80, 120);
  s.frame.block(kRow0, kCol0, 60, 80).setConstant(0.5);
  s.frame.block(kScratchRow0, kScratchCol, kScratchRows, 2).array() += amplitude;
  s.blade = fixture::detection(ClassLabel::CompressorRotor, 0.9, fixture::rect(80, 120, kRow0, kCol0, 60, 80));
  return s;
}

TEST(Pipeline, FlawlessBladeHasNoHighlights) {
  const Scene s = scratched_blade(0.0);
  const SurfaceResult r = surface_pipeline(s.frame, s.blade, FilterParams{});
  EXPECT_EQ(r.highlighted, 0);
  EXPECT_EQ(r.crop, (PixelRect{kRow0, kCol0, kRow0 + 59, kCol0 + 79}));
}

TEST(Pipeline, ScratchAboveTauIsHighlightedInPlace) {
  const Scene s = scratched_blade(0.3);
  const SurfaceResult r = surface_pipeline(s.frame, s.blade, FilterParams{});
  EXPECT_GT(r.highlighted, 0);
  EXPECT_EQ(r.image.maxCoeff(), 1.0);
  for (Eigen::Index y = 0; y < r.image.rows(); ++y) {
    for (Eigen::Index x = 0; x < r.image.cols(); ++x) {
      if (r.image(y, x) == 0.0) continue;
      const Eigen::Index fy = y + kRow0, fx = x + kCol0;
      EXPECT_TRUE(fy >= kScratchRow0 && fy < kScratchRow0 + kScratchRows && fx >= kScratchCol &&
                  fx < kScratchCol + 2)
          << "highlight off the scratch at " << fy << "," << fx;
    }
  }
}

TEST(Pipeline, ScratchBelowTauIsRejected) {
  const Scene s = scratched_blade(0.1);
  EXPECT_EQ(surface_pipeline(s.frame, s.blade, FilterParams{}).highlighted, 0);
}

TEST(Pipeline, ColourFrameMatchesGray) {
  const Scene s = scratched_blade(0.3);
  const SurfaceResult gray = surface_pipeline(s.frame, s.blade, FilterParams{});
  const SurfaceResult rgb = surface_pipeline(RgbImage{s.frame, s.frame, s.frame}, s.blade, FilterParams{});
  EXPECT_EQ(gray.highlighted, rgb.highlighted);
}

TEST(Pipeline, UpscaleMultipliesExtent) {
  const Scene s = scratched_blade(0.3);
  FilterParams p;
  p.upscale = 2;
  const SurfaceResult r = surface_pipeline(s.frame, s.blade, p);
  EXPECT_EQ(r.image.rows(), 120);
  EXPECT_EQ(r.image.cols(), 160);
  EXPECT_GT(r.highlighted, 0);
}

TEST(Pipeline, ZeroOutsideErodedMaskAndMonotoneInTau) {
  std::mt19937_64 rng(83);
  for (int i = 0; i < 20; ++i) {
    const int h = 40, w = 50;
    const GrayImage frame = random_image(rng, h, w);
    MaskArray m = fixture::blob_mask(rng, h, w, 3);
    m(20, 25) = 1;
    const Detection blade = fixture::detection(ClassLabel::CompressorRotor, 0.9, m);
    FilterParams p;
    p.erosion_radius = fixture::uniform_int(rng, 1, 3);
    p.tau = 0.0;
    p.enhance = false;
    const SurfaceResult r = surface_pipeline(frame, blade, p);
    const MaskArray keep = erode(BinaryMask(m).crop(r.crop), p.erosion_radius).dense();
    ASSERT_TRUE(((keep == 0) && (r.image != 0.0)).count() == 0) << "case " << i;
    std::int64_t previous = r.highlighted;
    for (double tau : {0.01, 0.05, 0.1, 0.2, 0.4}) {
      p.tau = tau;
      const std::int64_t n = surface_pipeline(frame, blade, p).highlighted;
      ASSERT_LE(n, previous);
      previous = n;
    }
  }
}

TEST(Pipeline, MaskExtentMismatchThrows) {
  const Scene s = scratched_blade(0.0);
  Detection small = s.blade;
  small.mask = BinaryMask(10, 10);
  EXPECT_THROW(surface_pipeline(s.frame, small, FilterParams{}), DimensionError);
}

}  // namespace
}  // namespace bladetrack
