#include "bladetrack/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bladetrack/error.hpp"

namespace bladetrack {

namespace {

void require_same_extent(const BinaryMask& a, const BinaryMask& b, const char* what) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw DimensionError(std::string(what) + ": mask extents differ (" +
                         std::to_string(a.height()) + "x" + std::to_string(a.width()) + " vs " +
                         std::to_string(b.height()) + "x" + std::to_string(b.width()) + ")");
  }
}

struct Interval {
  std::int64_t begin;
  std::int64_t end;
};

std::vector<Interval> one_runs(const Rle& rle) {
  std::vector<Interval> out;
  out.reserve(rle.counts.size() / 2);
  std::int64_t pos = 0;
  bool value = false;
  for (std::uint32_t c : rle.counts) {
    if (value && c > 0) out.push_back({pos, pos + c});
    pos += c;
    value = !value;
  }
  return out;
}

std::int64_t run_overlap(const Rle& a, const Rle& b) {
  const std::vector<Interval> ra = one_runs(a);
  const std::vector<Interval> rb = one_runs(b);
  std::int64_t total = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < ra.size() && j < rb.size()) {
    const std::int64_t lo = std::max(ra[i].begin, rb[j].begin);
    const std::int64_t hi = std::min(ra[i].end, rb[j].end);
    if (hi > lo) total += hi - lo;
    if (ra[i].end < rb[j].end) {
      ++i;
    } else {
      ++j;
    }
  }
  return total;
}

// One pass of 1D erosion along rows of `in`.
MaskArray erode_rows(const MaskArray& in, int radius) {
  const Eigen::Index rows = in.rows();
  const Eigen::Index cols = in.cols();
  MaskArray out = MaskArray::Zero(rows, cols);
  const Eigen::Index window = 2 * static_cast<Eigen::Index>(radius) + 1;
  std::vector<Eigen::Index> prefix(static_cast<std::size_t>(cols) + 1);
  for (Eigen::Index r = 0; r < rows; ++r) {
    prefix[0] = 0;
    for (Eigen::Index c = 0; c < cols; ++c) prefix[c + 1] = prefix[c] + (in(r, c) ? 1 : 0);
    for (Eigen::Index c = radius; c + radius < cols; ++c) {
      if (prefix[c + radius + 1] - prefix[c - radius] == window) out(r, c) = 1;
    }
  }
  return out;
}

// Smallest column c in [0, width] with c + 0.5 >= x.
int first_center_at_or_after(double x, int width) {
  if (x <= 0.5) return 0;
  if (x > width - 0.5) return width;
  int c = static_cast<int>(std::ceil(x - 0.5));
  while (c > 0 && c - 1 + 0.5 >= x) --c;
  while (c + 0.5 < x) ++c;
  return c;
}

}  // namespace

Polygon::Polygon(Eigen::Matrix2Xd vertices) : vertices_(std::move(vertices)) {
  if (vertices_.cols() < 3) throw ValidationError("polygon needs at least 3 vertices");
  if (!vertices_.allFinite()) throw ValidationError("polygon has non-finite coordinates");
}

BinaryMask rasterize_polygon(const Polygon& poly, int height, int width) {
  const Eigen::Matrix2Xd& v = poly.vertices();
  const Eigen::Index n = v.cols();
  std::vector<RowSpan> spans;
  std::vector<double> crossings;
  for (int row = 0; row < height; ++row) {
    const double y = row + 0.5;
    crossings.clear();
    for (Eigen::Index i = 0, j = n - 1; i < n; j = i++) {
      const double xi = v(0, i), yi = v(1, i);
      const double xj = v(0, j), yj = v(1, j);
      if ((yi > y) != (yj > y)) crossings.push_back((xj - xi) * (y - yi) / (yj - yi) + xi);
    }
    std::sort(crossings.begin(), crossings.end());
    // A center px is inside iff an odd number of crossings lie strictly to its
    // right, i.e. px in [crossings[2k], crossings[2k+1]).
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
      const int c0 = first_center_at_or_after(crossings[k], width);
      const int c1 = first_center_at_or_after(crossings[k + 1], width);
      if (c1 > c0) spans.push_back({row, c0, c1});
    }
  }
  return BinaryMask(Rle::from_spans(height, width, spans));
}

std::int64_t overlap_area(const BinaryMask& a, const BinaryMask& b) {
  require_same_extent(a, b, "overlap_area");
  if (a.is_rle() && b.is_rle()) return run_overlap(*a.rle_if(), *b.rle_if());
  return (a.dense() * b.dense()).cast<std::int64_t>().sum();
}

std::int64_t union_area(const BinaryMask& a, const BinaryMask& b) {
  return a.area() + b.area() - overlap_area(a, b);
}

double iou(const BinaryMask& a, const BinaryMask& b) {
  const std::int64_t inter = overlap_area(a, b);
  const std::int64_t uni = a.area() + b.area() - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryMask erode(const BinaryMask& mask, int radius) {
  if (radius < 0) throw ConfigError("erosion radius must be non-negative");
  if (radius == 0) return mask;
  const MaskArray horizontal = erode_rows(mask.dense(), radius);
  const MaskArray transposed = horizontal.transpose();
  return BinaryMask(MaskArray(erode_rows(transposed, radius).transpose()));
}

}  // namespace bladetrack
