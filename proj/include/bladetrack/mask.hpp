#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace bladetrack {

template <typename Scalar>
using Grid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using MaskArray = Grid<std::uint8_t>;

// Inclusive pixel rectangle, rows [row0, row1], cols [col0, col1].
struct PixelRect {
  int row0 = 0;
  int col0 = 0;
  int row1 = -1;
  int col1 = -1;

  int height() const { return row1 - row0 + 1; }
  int width() const { return col1 - col0 + 1; }
  bool empty() const { return row1 < row0 || col1 < col0; }
  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

// Half-open run of 1-pixels [col_begin, col_end) in one row.
struct RowSpan {
  int row = 0;
  int col_begin = 0;
  int col_end = 0;
};

// Row-major run-length encoding. Runs alternate 0s and 1s and always start
// with a (possibly empty) run of 0s.
struct Rle {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;

  static Rle encode(const MaskArray& dense);
  // Spans must be sorted row-major and non-overlapping; they are clipped to
  // the extent.
  static Rle from_spans(int height, int width, std::span<const RowSpan> spans);

  // Throws FormatError if the runs do not sum to height * width.
  void validate() const;
  MaskArray decode() const;
  std::int64_t area() const;
  // Merges interior zero-length runs so equal masks have equal counts.
  Rle canonical() const;

  friend bool operator==(const Rle&, const Rle&) = default;
};

// Pixel membership grid for one object instance. Stored either dense or
// run-length encoded; every query gives the same answer for both forms.
class BinaryMask {
 public:
  BinaryMask() : BinaryMask(0, 0) {}
  BinaryMask(int height, int width);
  // Any nonzero entry counts as a member pixel.
  explicit BinaryMask(const MaskArray& dense);
  explicit BinaryMask(Rle rle);

  int height() const { return height_; }
  int width() const { return width_; }
  bool is_rle() const { return std::holds_alternative<Rle>(data_); }

  std::int64_t area() const;
  bool empty() const { return area() == 0; }
  bool test(int row, int col) const;

  MaskArray dense() const;
  Rle rle() const;
  const MaskArray* dense_if() const { return std::get_if<MaskArray>(&data_); }
  const Rle* rle_if() const { return std::get_if<Rle>(&data_); }

  BinaryMask as_dense() const { return BinaryMask(dense()); }
  BinaryMask as_rle() const { return BinaryMask(rle()); }

  // Tight rectangle around the 1-pixels; nullopt for an empty mask.
  std::optional<PixelRect> tight_bounds() const;

  // Sub-mask over `rect` (clipped to the extent).
  BinaryMask crop(const PixelRect& rect) const;
  // Shift by (dx, dy) pixels, dropping pixels that leave the extent.
  BinaryMask translated(int dx, int dy) const;

  friend bool operator==(const BinaryMask& a, const BinaryMask& b);

 private:
  int height_ = 0;
  int width_ = 0;
  std::variant<MaskArray, Rle> data_;
};

}  // namespace bladetrack
