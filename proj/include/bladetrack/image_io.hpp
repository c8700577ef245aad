#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bladetrack/image.hpp"

namespace bladetrack {

using Bytes = std::vector<std::uint8_t>;

enum class ImageFormat { Png, Ppm };

// Chosen from the file extension (.png, .ppm, .pgm); ConfigError otherwise.
ImageFormat format_for(const std::filesystem::path& path);

// PNG (any bit depth, reduced to 8-bit) or binary PNM (P5 gray, P6 colour,
// maxval up to 255). Channels scale to [0, 1]. Throws FormatError.
RgbImage decode_image(std::span<const std::uint8_t> bytes);
// Throws IoError when the file cannot be read.
RgbImage read_image(const std::filesystem::path& path);

// Values are clamped to [0, 1] and rounded to 8 bits. PPM output is P6 with
// the gray level in all three channels.
Bytes encode_png(const GrayImage& image);
Bytes encode_ppm(const GrayImage& image);
Bytes encode_image(const GrayImage& image, ImageFormat format);

}  // namespace bladetrack
