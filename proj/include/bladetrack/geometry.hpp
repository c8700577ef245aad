#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "bladetrack/mask.hpp"
#include "bladetrack/types.hpp"

namespace bladetrack {

// Closed polygon with at least three finite vertices, stored column-wise.
class Polygon {
 public:
  // Throws ValidationError for fewer than three vertices or non-finite input.
  explicit Polygon(Eigen::Matrix2Xd vertices);

  const Eigen::Matrix2Xd& vertices() const { return vertices_; }
  Eigen::Index size() const { return vertices_.cols(); }

 private:
  Eigen::Matrix2Xd vertices_;
};

// Pixels are 1 iff their center (col + 0.5, row + 0.5) is inside `poly`
// under the even-odd rule. Degenerate polygons give an empty mask.
BinaryMask rasterize_polygon(const Polygon& poly, int height, int width);

// |a ∩ b|. Throws DimensionError on extent mismatch.
std::int64_t overlap_area(const BinaryMask& a, const BinaryMask& b);
std::int64_t union_area(const BinaryMask& a, const BinaryMask& b);

// Intersection over union; 0 when both masks are empty.
double iou(const BinaryMask& a, const BinaryMask& b);

inline Point2 bbox_center(const BoundingBox& b) {
  return {b.x + b.width / 2.0, b.y + b.height / 2.0};
}

inline double center_distance(const BoundingBox& a, const BoundingBox& b) {
  return (bbox_center(a) - bbox_center(b)).norm();
}

// Erosion by a (2r+1)x(2r+1) square. Pixels outside the image count as
// background, so objects touching the border shrink there too.
BinaryMask erode(const BinaryMask& mask, int radius);

}  // namespace bladetrack
