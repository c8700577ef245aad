#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

#include "bladetrack/image.hpp"
#include "bladetrack/types.hpp"

namespace bladetrack {

struct FilterParams {
  double sigma = 2.0;      // Gaussian standard deviation, pixels
  int erosion_radius = 3;  // square structuring element half-width
  double tau = 0.1;        // intensities at or below this are dropped
  bool enhance = true;     // rescale survivors so the maximum becomes 1
  int upscale = 1;         // nearest-neighbour upscale of the crop

  int kernel_radius() const { return static_cast<int>(std::ceil(3.0 * sigma)); }
  // Throws ConfigError on out-of-range fields.
  void validate() const;
};

// Pixel rectangle covered by `bbox`, clipped to the image. Throws
// EmptyInputError when nothing of the box lies inside.
PixelRect bbox_pixels(const BoundingBox& bbox, int height, int width);

GrayImage crop_to_bbox(const GrayImage& image, const BoundingBox& bbox);
GrayImage crop_to_bbox(const RgbImage& image, const BoundingBox& bbox);

// Mirror index into [0, n): ... 2 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
inline Eigen::Index reflect_index(Eigen::Index i, Eigen::Index n) {
  const Eigen::Index period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

// Normalized 1D Gaussian taps of length 2 * ceil(3 sigma) + 1.
template <typename Scalar = double>
Eigen::Array<Scalar, Eigen::Dynamic, 1> gaussian_kernel_1d(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  Eigen::Array<Scalar, Eigen::Dynamic, 1> k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) {
    k(i + radius) = static_cast<Scalar>(std::exp(-(i * i) / (2.0 * sigma * sigma)));
  }
  return k / k.sum();
}

// Square 2D kernel evaluated directly from the isotropic Gaussian and
// normalized to unit sum.
template <typename Scalar = double>
Image<Scalar> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  const int side = 2 * radius + 1;
  Image<Scalar> k(side, side);
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      k(dy + radius, dx + radius) =
          static_cast<Scalar>(std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma)));
    }
  }
  return k / k.sum();
}

// Convolution with an odd-sized kernel and mirror boundary handling.
template <typename Scalar>
Image<Scalar> convolve_direct(const Image<Scalar>& image, const Image<Scalar>& kernel) {
  const Eigen::Index rows = image.rows(), cols = image.cols();
  const Eigen::Index ry = kernel.rows() / 2, rx = kernel.cols() / 2;
  Image<Scalar> out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      Scalar acc = 0;
      for (Eigen::Index dy = -ry; dy <= ry; ++dy) {
        const Eigen::Index rr = reflect_index(r - dy, rows);
        for (Eigen::Index dx = -rx; dx <= rx; ++dx) {
          acc += kernel(dy + ry, dx + rx) * image(rr, reflect_index(c - dx, cols));
        }
      }
      out(r, c) = acc;
    }
  }
  return out;
}

// Row pass then column pass with the same symmetric 1D kernel.
template <typename Scalar>
Image<Scalar> convolve_separable(const Image<Scalar>& image,
                                 const Eigen::Array<Scalar, Eigen::Dynamic, 1>& taps) {
  const Eigen::Index rows = image.rows(), cols = image.cols();
  const Eigen::Index radius = taps.size() / 2;
  Image<Scalar> tmp(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      Scalar acc = 0;
      for (Eigen::Index d = -radius; d <= radius; ++d) {
        acc += taps(d + radius) * image(r, reflect_index(c - d, cols));
      }
      tmp(r, c) = acc;
    }
  }
  Image<Scalar> out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      Scalar acc = 0;
      for (Eigen::Index d = -radius; d <= radius; ++d) {
        acc += taps(d + radius) * tmp(reflect_index(r - d, rows), c);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

// max(0, I - I * G_sigma), elementwise.
//
// Evaluated as weighted differences, using sum(taps) == 1:
//   I - Gy(Gx I) = sum_d kx(d) (I - I shifted by d) + sum_d ky(d) (J - J shifted by d),
// with J = Gx I. Each difference of equal samples is exactly zero, so flat
// regions stay at 0 instead of picking up rounding from the tap sum.
template <typename Scalar>
Image<Scalar> high_pass(const Image<Scalar>& image, double sigma) {
  const auto taps = gaussian_kernel_1d<Scalar>(sigma);
  const Eigen::Index rows = image.rows(), cols = image.cols();
  const Eigen::Index radius = taps.size() / 2;
  Image<Scalar> row_blur(rows, cols), out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      Scalar blur = 0, diff = 0;
      for (Eigen::Index d = -radius; d <= radius; ++d) {
        const Scalar v = image(r, reflect_index(c - d, cols));
        blur += taps(d + radius) * v;
        diff += taps(d + radius) * (image(r, c) - v);
      }
      row_blur(r, c) = blur;
      out(r, c) = diff;
    }
  }
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      Scalar diff = 0;
      for (Eigen::Index d = -radius; d <= radius; ++d) {
        diff += taps(d + radius) * (row_blur(r, c) - row_blur(reflect_index(r - d, rows), c));
      }
      out(r, c) += diff;
    }
  }
  return out.max(Scalar(0));
}

inline GrayImage high_pass(const GrayImage& image, const FilterParams& p) {
  return high_pass(image, p.sigma);
}

// Zeroes every pixel outside erode(mask, radius). Throws DimensionError when
// the mask and image extents differ.
GrayImage apply_eroded_mask(const GrayImage& image, const BinaryMask& mask, int erosion_radius);

// Values <= tau become 0; with `enhance`, survivors are scaled so the
// maximum is 1.
GrayImage threshold_enhance(const GrayImage& image, double tau, bool enhance);

struct SurfaceResult {
  GrayImage image;
  std::int64_t highlighted = 0;  // nonzero output pixels
  PixelRect crop;                // frame pixels the output covers
};

// crop -> high-pass -> eroded blade mask -> threshold/enhance.
SurfaceResult surface_pipeline(const GrayImage& frame, const Detection& blade, const FilterParams& p);
SurfaceResult surface_pipeline(const RgbImage& frame, const Detection& blade, const FilterParams& p);

}  // namespace bladetrack
