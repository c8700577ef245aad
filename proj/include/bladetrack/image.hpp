#pragma once

#include <Eigen/Core>

#include "bladetrack/mask.hpp"

namespace bladetrack {

template <typename Scalar>
using Image = Grid<Scalar>;

// Intensities are non-negative; 8-bit inputs map to [0, 1].
using GrayImage = Image<double>;

struct RgbImage {
  Image<double> r;
  Image<double> g;
  Image<double> b;

  Eigen::Index rows() const { return r.rows(); }
  Eigen::Index cols() const { return r.cols(); }
};

// Luma with weights 0.299 / 0.587 / 0.114.
inline GrayImage to_gray(const RgbImage& rgb) {
  return 0.299 * rgb.r + 0.587 * rgb.g + 0.114 * rgb.b;
}

}  // namespace bladetrack
