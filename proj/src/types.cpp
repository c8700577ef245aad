#include "bladetrack/types.hpp"

#include <string>

#include "bladetrack/error.hpp"

namespace bladetrack {

namespace {

constexpr std::array<std::string_view, 5> kClassNames = {
    "Casing", "CompressorRotor", "SurfaceDamage", "MaterialSeparation", "MaterialDeformation"};

}  // namespace

std::string_view to_string(ClassLabel c) { return kClassNames[class_index(c)]; }

std::optional<ClassLabel> try_parse_class_label(std::string_view name) {
  for (ClassLabel c : kAllClasses) {
    if (kClassNames[class_index(c)] == name) return c;
  }
  return std::nullopt;
}

ClassLabel parse_class_label(std::string_view name) {
  if (auto c = try_parse_class_label(name)) return *c;
  throw FormatError("unknown class label '" + std::string(name) + "'");
}

bool BoundingBox::contains(const PixelRect& rect) const {
  if (rect.empty()) return true;
  return x <= rect.col0 && y <= rect.row0 && x + width >= rect.col1 + 1.0 &&
         y + height >= rect.row1 + 1.0;
}

BoundingBox BoundingBox::from_rect(const PixelRect& rect) {
  return {static_cast<double>(rect.col0), static_cast<double>(rect.row0),
          static_cast<double>(rect.width()), static_cast<double>(rect.height())};
}

Detection Detection::from_mask(ClassLabel label, double confidence, BinaryMask mask) {
  Detection d;
  d.label = label;
  d.confidence = confidence;
  if (auto rect = mask.tight_bounds()) d.bbox = BoundingBox::from_rect(*rect);
  d.mask = std::move(mask);
  return d;
}

void check_sequence(std::span<const FrameDetections> frames) {
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const FrameDetections& frame = frames[f];
    if (f > 0 && frame.frame_index <= frames[f - 1].frame_index) {
      throw ValidationError("frame indices must be strictly increasing (frame " +
                            std::to_string(frame.frame_index) + " follows " +
                            std::to_string(frames[f - 1].frame_index) + ")");
    }
    if (frame.image_width != frames.front().image_width ||
        frame.image_height != frames.front().image_height) {
      throw DimensionError("frame " + std::to_string(frame.frame_index) +
                           " extent differs from the first frame");
    }
    for (std::size_t d = 0; d < frame.detections.size(); ++d) {
      const BinaryMask& m = frame.detections[d].mask;
      if (m.height() != frame.image_height || m.width() != frame.image_width) {
        throw DimensionError("frame " + std::to_string(frame.frame_index) + " detection " +
                             std::to_string(d) + ": mask extent " + std::to_string(m.height()) +
                             "x" + std::to_string(m.width()) + " differs from image extent");
      }
    }
  }
}

}  // namespace bladetrack
