#include "bladetrack/surface_filter.hpp"

#include <algorithm>
#include <string>

#include "bladetrack/error.hpp"
#include "bladetrack/geometry.hpp"

namespace bladetrack {

namespace {

template <typename Scalar>
Image<Scalar> upscale_nearest(const Image<Scalar>& in, int factor) {
  if (factor == 1) return in;
  Image<Scalar> out(in.rows() * factor, in.cols() * factor);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.cols(); ++c) out(r, c) = in(r / factor, c / factor);
  }
  return out;
}

template <typename Frame>
SurfaceResult run_pipeline(const Frame& frame, const Detection& blade, const FilterParams& p) {
  p.validate();
  if (blade.mask.height() != frame.rows() || blade.mask.width() != frame.cols()) {
    throw DimensionError("surface_pipeline: blade mask extent differs from the frame");
  }
  SurfaceResult out;
  out.crop = bbox_pixels(blade.bbox, static_cast<int>(frame.rows()), static_cast<int>(frame.cols()));
  const GrayImage cropped = upscale_nearest(crop_to_bbox(frame, blade.bbox), p.upscale);
  const MaskArray mask = upscale_nearest(blade.mask.crop(out.crop).dense(), p.upscale);

  const GrayImage filtered = high_pass(cropped, p);
  const GrayImage masked = apply_eroded_mask(filtered, BinaryMask(mask), p.erosion_radius * p.upscale);
  out.image = threshold_enhance(masked, p.tau, p.enhance);
  out.highlighted = (out.image > 0.0).count();
  return out;
}

}  // namespace

void FilterParams::validate() const {
  if (!(sigma > 0.0)) throw ConfigError("sigma must be > 0");
  if (erosion_radius < 1) throw ConfigError("erosion radius must be >= 1");
  if (!(tau >= 0.0)) throw ConfigError("tau must be >= 0");
  if (upscale < 1) throw ConfigError("upscale factor must be >= 1");
}

PixelRect bbox_pixels(const BoundingBox& bbox, int height, int width) {
  PixelRect rect;
  rect.col0 = std::max(0, static_cast<int>(std::floor(bbox.x)));
  rect.row0 = std::max(0, static_cast<int>(std::floor(bbox.y)));
  rect.col1 = std::min(width - 1, static_cast<int>(std::ceil(bbox.x + bbox.width)) - 1);
  rect.row1 = std::min(height - 1, static_cast<int>(std::ceil(bbox.y + bbox.height)) - 1);
  if (rect.empty()) throw EmptyInputError("bounding box lies entirely outside the image");
  return rect;
}

GrayImage crop_to_bbox(const GrayImage& image, const BoundingBox& bbox) {
  const PixelRect r = bbox_pixels(bbox, static_cast<int>(image.rows()), static_cast<int>(image.cols()));
  return image.block(r.row0, r.col0, r.height(), r.width());
}

GrayImage crop_to_bbox(const RgbImage& image, const BoundingBox& bbox) {
  const PixelRect r = bbox_pixels(bbox, static_cast<int>(image.rows()), static_cast<int>(image.cols()));
  auto block = [&](const Image<double>& ch) -> Image<double> {
    return ch.block(r.row0, r.col0, r.height(), r.width());
  };
  return to_gray(RgbImage{block(image.r), block(image.g), block(image.b)});
}

GrayImage apply_eroded_mask(const GrayImage& image, const BinaryMask& mask, int erosion_radius) {
  if (mask.height() != image.rows() || mask.width() != image.cols()) {
    throw DimensionError("apply_eroded_mask: mask is " + std::to_string(mask.height()) + "x" +
                         std::to_string(mask.width()) + ", image is " +
                         std::to_string(image.rows()) + "x" + std::to_string(image.cols()));
  }
  const MaskArray keep = erode(mask, erosion_radius).dense();
  return (keep != 0).select(image, 0.0);
}

GrayImage threshold_enhance(const GrayImage& image, double tau, bool enhance) {
  GrayImage out = (image > tau).select(image, 0.0);
  if (enhance && out.size() > 0) {
    const double peak = out.maxCoeff();
    if (peak > 0.0) out /= peak;
  }
  return out;
}

SurfaceResult surface_pipeline(const GrayImage& frame, const Detection& blade, const FilterParams& p) {
  return run_pipeline(frame, blade, p);
}

SurfaceResult surface_pipeline(const RgbImage& frame, const Detection& blade, const FilterParams& p) {
  return run_pipeline(frame, blade, p);
}

}  // namespace bladetrack
