#include "bladetrack/mask.hpp"

#include <algorithm>
#include <string>

#include "bladetrack/error.hpp"

namespace bladetrack {

namespace {

std::int64_t pixel_count(int height, int width) {
  return static_cast<std::int64_t>(height) * static_cast<std::int64_t>(width);
}

// Appends a run of `value` pixels, extending the previous run when it has the
// same value.
class RunBuilder {
 public:
  void push(bool value, std::uint32_t length) {
    if (length == 0) return;
    if (counts_.empty()) {
      if (value) counts_.push_back(0);
      counts_.push_back(length);
      current_ = value;
      return;
    }
    if (value == current_) {
      counts_.back() += length;
    } else {
      counts_.push_back(length);
      current_ = value;
    }
  }

  std::vector<std::uint32_t> finish() && {
    if (counts_.empty()) counts_.push_back(0);
    return std::move(counts_);
  }

 private:
  std::vector<std::uint32_t> counts_;
  bool current_ = false;
};

}  // namespace

Rle Rle::encode(const MaskArray& dense) {
  Rle out;
  out.height = static_cast<int>(dense.rows());
  out.width = static_cast<int>(dense.cols());
  RunBuilder builder;
  const std::uint8_t* p = dense.data();
  const std::int64_t n = dense.size();
  std::int64_t i = 0;
  while (i < n) {
    const bool v = p[i] != 0;
    std::int64_t j = i + 1;
    while (j < n && (p[j] != 0) == v) ++j;
    builder.push(v, static_cast<std::uint32_t>(j - i));
    i = j;
  }
  out.counts = std::move(builder).finish();
  return out;
}

Rle Rle::from_spans(int height, int width, std::span<const RowSpan> spans) {
  Rle out;
  out.height = height;
  out.width = width;
  RunBuilder builder;
  std::int64_t cursor = 0;
  for (const RowSpan& s : spans) {
    if (s.row < 0 || s.row >= height) continue;
    const int c0 = std::max(s.col_begin, 0);
    const int c1 = std::min(s.col_end, width);
    if (c1 <= c0) continue;
    const std::int64_t begin = static_cast<std::int64_t>(s.row) * width + c0;
    const std::int64_t end = static_cast<std::int64_t>(s.row) * width + c1;
    if (begin < cursor) throw FormatError("Rle::from_spans: spans overlap or are unsorted");
    builder.push(false, static_cast<std::uint32_t>(begin - cursor));
    builder.push(true, static_cast<std::uint32_t>(end - begin));
    cursor = end;
  }
  builder.push(false, static_cast<std::uint32_t>(pixel_count(height, width) - cursor));
  out.counts = std::move(builder).finish();
  return out;
}

void Rle::validate() const {
  if (height < 0 || width < 0) throw FormatError("RLE has negative extent");
  std::int64_t total = 0;
  for (std::uint32_t c : counts) total += c;
  if (total != pixel_count(height, width)) {
    throw FormatError("RLE run lengths sum to " + std::to_string(total) + ", expected " +
                      std::to_string(pixel_count(height, width)) + " (" +
                      std::to_string(height) + "x" + std::to_string(width) + ")");
  }
}

MaskArray Rle::decode() const {
  validate();
  MaskArray dense = MaskArray::Zero(height, width);
  std::uint8_t* p = dense.data();
  std::int64_t pos = 0;
  bool value = false;
  for (std::uint32_t c : counts) {
    if (value) std::fill(p + pos, p + pos + c, std::uint8_t{1});
    pos += c;
    value = !value;
  }
  return dense;
}

std::int64_t Rle::area() const {
  std::int64_t total = 0;
  for (std::size_t i = 1; i < counts.size(); i += 2) total += counts[i];
  return total;
}

Rle Rle::canonical() const {
  Rle out;
  out.height = height;
  out.width = width;
  RunBuilder builder;
  bool value = false;
  for (std::uint32_t c : counts) {
    builder.push(value, c);
    value = !value;
  }
  out.counts = std::move(builder).finish();
  return out;
}

BinaryMask::BinaryMask(int height, int width)
    : height_(height), width_(width), data_(MaskArray::Zero(height, width)) {
  if (height < 0 || width < 0) throw DimensionError("BinaryMask: negative extent");
}

BinaryMask::BinaryMask(const MaskArray& dense)
    : height_(static_cast<int>(dense.rows())),
      width_(static_cast<int>(dense.cols())),
      data_((dense != 0).cast<std::uint8_t>().eval()) {}

BinaryMask::BinaryMask(Rle rle) : height_(rle.height), width_(rle.width) {
  rle.validate();
  data_ = rle.canonical();
}

std::int64_t BinaryMask::area() const {
  if (const Rle* r = rle_if()) return r->area();
  return std::get<MaskArray>(data_).cast<std::int64_t>().sum();
}

bool BinaryMask::test(int row, int col) const {
  if (row < 0 || row >= height_ || col < 0 || col >= width_) return false;
  if (const MaskArray* d = dense_if()) return (*d)(row, col) != 0;
  const Rle& r = std::get<Rle>(data_);
  const std::int64_t target = static_cast<std::int64_t>(row) * width_ + col;
  std::int64_t pos = 0;
  bool value = false;
  for (std::uint32_t c : r.counts) {
    if (target < pos + c) return value;
    pos += c;
    value = !value;
  }
  return false;
}

MaskArray BinaryMask::dense() const {
  if (const MaskArray* d = dense_if()) return *d;
  return std::get<Rle>(data_).decode();
}

Rle BinaryMask::rle() const {
  if (const Rle* r = rle_if()) return *r;
  return Rle::encode(std::get<MaskArray>(data_));
}

std::optional<PixelRect> BinaryMask::tight_bounds() const {
  PixelRect box{height_, width_, -1, -1};
  bool any = false;
  auto include = [&](int r0, int c0, int r1, int c1) {
    box.row0 = std::min(box.row0, r0);
    box.col0 = std::min(box.col0, c0);
    box.row1 = std::max(box.row1, r1);
    box.col1 = std::max(box.col1, c1);
    any = true;
  };
  if (const Rle* r = rle_if()) {
    std::int64_t pos = 0;
    bool value = false;
    for (std::uint32_t c : r->counts) {
      if (value && c > 0) {
        const std::int64_t last = pos + c - 1;
        const int row_a = static_cast<int>(pos / width_);
        const int row_b = static_cast<int>(last / width_);
        if (row_a == row_b) {
          include(row_a, static_cast<int>(pos % width_), row_b, static_cast<int>(last % width_));
        } else {
          include(row_a, 0, row_b, width_ - 1);
        }
      }
      pos += c;
      value = !value;
    }
  } else {
    const MaskArray& d = std::get<MaskArray>(data_);
    for (int row = 0; row < height_; ++row) {
      for (int col = 0; col < width_; ++col) {
        if (d(row, col)) include(row, col, row, col);
      }
    }
  }
  if (!any) return std::nullopt;
  return box;
}

BinaryMask BinaryMask::crop(const PixelRect& rect) const {
  const int r0 = std::max(rect.row0, 0);
  const int c0 = std::max(rect.col0, 0);
  const int r1 = std::min(rect.row1, height_ - 1);
  const int c1 = std::min(rect.col1, width_ - 1);
  if (r1 < r0 || c1 < c0) return BinaryMask(0, 0);
  return BinaryMask(MaskArray(dense().block(r0, c0, r1 - r0 + 1, c1 - c0 + 1)));
}

BinaryMask BinaryMask::translated(int dx, int dy) const {
  const Rle src = rle();
  std::vector<RowSpan> spans;
  std::int64_t pos = 0;
  bool value = false;
  for (std::uint32_t c : src.counts) {
    if (value && c > 0) {
      std::int64_t begin = pos;
      const std::int64_t end = pos + c;
      while (begin < end) {
        const int row = static_cast<int>(begin / width_);
        const std::int64_t row_end = std::min<std::int64_t>(end, static_cast<std::int64_t>(row + 1) * width_);
        const int cb = static_cast<int>(begin - static_cast<std::int64_t>(row) * width_);
        const int ce = static_cast<int>(row_end - static_cast<std::int64_t>(row) * width_);
        spans.push_back({row + dy, cb + dx, ce + dx});
        begin = row_end;
      }
    }
    pos += c;
    value = !value;
  }
  // Rows shift uniformly so spans stay sorted; out-of-range rows are skipped.
  return BinaryMask(Rle::from_spans(height_, width_, spans));
}

bool operator==(const BinaryMask& a, const BinaryMask& b) {
  if (a.height_ != b.height_ || a.width_ != b.width_) return false;
  if (a.is_rle() && b.is_rle()) return *a.rle_if() == *b.rle_if();
  return (a.dense() == b.dense()).all();
}

}  // namespace bladetrack
