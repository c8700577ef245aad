#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "bladetrack/mask.hpp"

namespace bladetrack {

enum class ClassLabel : std::uint8_t {
  Casing,
  CompressorRotor,
  SurfaceDamage,
  MaterialSeparation,
  MaterialDeformation,
};

inline constexpr std::array<ClassLabel, 5> kAllClasses = {
    ClassLabel::Casing, ClassLabel::CompressorRotor, ClassLabel::SurfaceDamage,
    ClassLabel::MaterialSeparation, ClassLabel::MaterialDeformation};

inline constexpr std::array<ClassLabel, 3> kDamageClasses = {
    ClassLabel::SurfaceDamage, ClassLabel::MaterialSeparation,
    ClassLabel::MaterialDeformation};

constexpr bool is_damage(ClassLabel c) {
  return c == ClassLabel::SurfaceDamage || c == ClassLabel::MaterialSeparation ||
         c == ClassLabel::MaterialDeformation;
}

constexpr bool is_blade(ClassLabel c) { return c == ClassLabel::CompressorRotor; }

constexpr std::size_t class_index(ClassLabel c) { return static_cast<std::size_t>(c); }

// Position of a damage class within kDamageClasses.
constexpr std::size_t damage_index(ClassLabel c) {
  return static_cast<std::size_t>(c) - static_cast<std::size_t>(ClassLabel::SurfaceDamage);
}

std::string_view to_string(ClassLabel c);
// Throws FormatError for unknown names.
ClassLabel parse_class_label(std::string_view name);
std::optional<ClassLabel> try_parse_class_label(std::string_view name);

using Point2 = Eigen::Vector2d;

// Top-left corner plus size, in pixels; x grows rightward, y downward.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;

  bool valid() const { return width > 0.0 && height > 0.0; }
  double area() const { return width * height; }
  // True when every pixel of `rect` lies inside the box.
  bool contains(const PixelRect& rect) const;
  static BoundingBox from_rect(const PixelRect& rect);

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Detection {
  ClassLabel label = ClassLabel::CompressorRotor;
  double confidence = 1.0;
  BoundingBox bbox;
  BinaryMask mask;

  // Builds a detection whose box is the mask's tight bounds.
  static Detection from_mask(ClassLabel label, double confidence, BinaryMask mask);

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct FrameDetections {
  std::int64_t frame_index = 0;
  int image_width = 0;
  int image_height = 0;
  std::vector<Detection> detections;

  friend bool operator==(const FrameDetections&, const FrameDetections&) = default;
};

// Throws DimensionError on mask extents that disagree with the frame, and
// ValidationError on non-increasing frame indices.
void check_sequence(std::span<const FrameDetections> frames);

}  // namespace bladetrack
