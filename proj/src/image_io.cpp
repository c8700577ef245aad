#include "bladetrack/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <png.h>

#include "bladetrack/error.hpp"

namespace bladetrack {

namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

RgbImage allocate(int height, int width) {
  return {Image<double>(height, width), Image<double>(height, width), Image<double>(height, width)};
}

// Minimal PNM header reader: magic, width, height, maxval, then one
// whitespace byte before the raster.
class PnmHeader {
 public:
  explicit PnmHeader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  int next_int() {
    skip_space();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) throw FormatError("PNM: bad header");
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > 1 << 20) throw FormatError("PNM: header value too large");
    }
    return static_cast<int>(v);
  }

  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw FormatError("PNM: bad header");
    return pos_ + 1;
  }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

RgbImage decode_pnm(std::span<const std::uint8_t> bytes) {
  const bool color = bytes[1] == '6';
  PnmHeader header(bytes);
  const int width = header.next_int();
  const int height = header.next_int();
  const int maxval = header.next_int();
  if (width <= 0 || height <= 0) throw FormatError("PNM: empty image");
  if (maxval <= 0 || maxval > 255) throw FormatError("PNM: only 8-bit rasters are supported");
  const std::size_t start = header.raster_start();
  const std::size_t channels = color ? 3 : 1;
  const std::size_t need = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - start < need) throw FormatError("PNM: truncated raster");

  RgbImage out = allocate(height, width);
  const double levels = maxval;
  const std::uint8_t* p = bytes.data() + start;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      out.r(r, c) = *p / levels;
      out.g(r, c) = (color ? *++p : *p) / levels;
      out.b(r, c) = (color ? *++p : *p) / levels;
      ++p;
    }
  }
  return out;
}

RgbImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw FormatError(std::string("PNG: ") + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> raster(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, raster.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw FormatError("PNG: " + msg);
  }
  const int height = static_cast<int>(img.height);
  const int width = static_cast<int>(img.width);
  RgbImage out = allocate(height, width);
  const std::uint8_t* p = raster.data();
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c, p += 3) {
      out.r(r, c) = p[0] / 255.0;
      out.g(r, c) = p[1] / 255.0;
      out.b(r, c) = p[2] / 255.0;
    }
  }
  return out;
}

}  // namespace

ImageFormat format_for(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") return ImageFormat::Png;
  if (ext == ".ppm" || ext == ".pgm") return ImageFormat::Ppm;
  throw ConfigError("unsupported image extension '" + ext + "'");
}

RgbImage decode_image(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(bytes.begin(), bytes.begin() + 8, kPngMagic)) {
    return decode_png(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
    return decode_pnm(bytes);
  }
  throw FormatError("unrecognized image format");
}

RgbImage read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("cannot read " + path.string());
  try {
    return decode_image(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Bytes encode_png(const GrayImage& image) {
  if (image.size() == 0) throw DimensionError("cannot encode an empty image");
  std::vector<std::uint8_t> raster(static_cast<std::size_t>(image.size()));
  for (Eigen::Index i = 0; i < image.size(); ++i) raster[static_cast<std::size_t>(i)] = to_byte(image(i));

  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.cols());
  img.height = static_cast<png_uint_32>(image.rows());
  img.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, raster.data(), 0, nullptr)) {
    throw FormatError(std::string("PNG: ") + img.message);
  }
  Bytes out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, raster.data(), 0, nullptr)) {
    throw FormatError(std::string("PNG: ") + img.message);
  }
  out.resize(size);
  return out;
}

Bytes encode_ppm(const GrayImage& image) {
  if (image.size() == 0) throw DimensionError("cannot encode an empty image");
  const std::string header =
      "P6\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.reserve(header.size() + static_cast<std::size_t>(image.size()) * 3);
  for (Eigen::Index i = 0; i < image.size(); ++i) {
    const std::uint8_t v = to_byte(image(i));
    out.insert(out.end(), {v, v, v});
  }
  return out;
}

Bytes encode_image(const GrayImage& image, ImageFormat format) {
  return format == ImageFormat::Png ? encode_png(image) : encode_ppm(image);
}

}  // namespace bladetrack
