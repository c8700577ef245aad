#include "bladetrack/interchange.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "bladetrack/error.hpp"
#include "bladetrack/geometry.hpp"

namespace bladetrack {

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

// Walks a parsed document while tracking the JSON path for error messages.
class Reader {
 public:
  explicit Reader(std::string path) : path_(std::move(path)) {}

  Reader at(std::string_view key) const { return Reader(path_ + "." + std::string(key)); }
  Reader at(std::size_t index) const { return Reader(path_ + "[" + std::to_string(index) + "]"); }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(std::string_view what) const {
    throw FormatError(path_ + ": " + std::string(what));
  }

  const Json& field(const Json& obj, std::string_view key) const {
    if (!obj.is_object()) fail("expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail("missing field '" + std::string(key) + "'");
    return *it;
  }

  const Json& array(const Json& v) const {
    if (!v.is_array()) fail("expected an array");
    return v;
  }

  double number(const Json& v) const {
    if (!v.is_number()) fail("expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail("expected a finite number");
    return x;
  }

  std::int64_t integer(const Json& v) const {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double x = v.get<double>();
      if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9e15) {
        return static_cast<std::int64_t>(x);
      }
    }
    fail("expected an integer");
  }

  int extent(const Json& v) const {
    const std::int64_t x = integer(v);
    if (x < 0 || x > std::numeric_limits<int>::max()) fail("extent out of range");
    return static_cast<int>(x);
  }

  std::string string(const Json& v) const {
    if (!v.is_string()) fail("expected a string");
    return v.get<std::string>();
  }

 private:
  std::string path_;
};

Json load(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("malformed JSON: ") + e.what());
  }
}

void check_version(const Json& root, const Reader& r) {
  const std::string v = r.at("schema_version").string(r.field(root, "schema_version"));
  if (v != kSchemaVersion) {
    r.at("schema_version").fail("unsupported schema version '" + v + "'");
  }
}

BinaryMask read_mask(const Json& v, const Reader& r, int height, int width,
                     std::vector<std::string>& bad) {
  const Reader type_r = r.at("type");
  const std::string type = type_r.string(r.field(v, "type"));
  if (type == "rle") {
    const Reader cr = r.at("counts");
    const Json& counts = cr.array(r.field(v, "counts"));
    Rle rle{height, width, {}};
    rle.counts.reserve(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const std::int64_t c = cr.at(i).integer(counts[i]);
      if (c < 0 || c > std::numeric_limits<std::uint32_t>::max()) cr.at(i).fail("run out of range");
      rle.counts.push_back(static_cast<std::uint32_t>(c));
    }
    try {
      rle.validate();
    } catch (const FormatError& e) {
      bad.push_back(cr.path() + ": " + e.what());
      return BinaryMask(height, width);
    }
    return BinaryMask(std::move(rle));
  }
  if (type == "polygon") {
    const Reader pr = r.at("points");
    const Json& points = pr.array(r.field(v, "points"));
    if (points.size() % 2 != 0 || points.size() < 6) {
      bad.push_back(pr.path() + ": polygon needs an even count of at least 6 coordinates");
      return BinaryMask(height, width);
    }
    Eigen::Matrix2Xd vertices(2, static_cast<Eigen::Index>(points.size() / 2));
    for (std::size_t i = 0; i < points.size(); ++i) {
      vertices(static_cast<Eigen::Index>(i % 2), static_cast<Eigen::Index>(i / 2)) =
          pr.at(i).number(points[i]);
    }
    return rasterize_polygon(Polygon(vertices), height, width).as_rle();
  }
  type_r.fail("unknown mask type '" + type + "'");
}

std::string where(std::size_t frame, std::int64_t frame_index, std::size_t det) {
  return "frames[" + std::to_string(frame) + "] (frame_index " + std::to_string(frame_index) +
         ") detection " + std::to_string(det);
}

// Appends every invariant violation in the document, one line each.
void collect_violations(const InterchangeDocument& doc, std::vector<std::string>& out) {
  for (std::size_t f = 0; f < doc.frames.size(); ++f) {
    const FrameDetections& fd = doc.frames[f];
    if (f > 0 && fd.frame_index <= doc.frames[f - 1].frame_index) {
      out.push_back("frames[" + std::to_string(f) + "]: frame_index " +
                    std::to_string(fd.frame_index) + " does not increase");
    }
    for (std::size_t d = 0; d < fd.detections.size(); ++d) {
      const Detection& det = fd.detections[d];
      if (!det.bbox.valid()) {
        out.push_back(where(f, fd.frame_index, d) + ": bbox has non-positive size");
        continue;
      }
      if (const auto bounds = det.mask.tight_bounds(); bounds && !det.bbox.contains(*bounds)) {
        out.push_back(where(f, fd.frame_index, d) + ": mask extends outside bbox");
      }
    }
  }
}

OrderedJson mask_json(const BinaryMask& mask) {
  OrderedJson m;
  m["type"] = "rle";
  m["counts"] = mask.rle().canonical().counts;
  return m;
}

OrderedJson ids_json(const std::vector<int>& ids) { return OrderedJson(ids); }

std::vector<int> read_ids(const Json& v, const Reader& r) {
  r.array(v);
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(static_cast<int>(r.at(i).integer(v[i])));
  return out;
}

std::vector<std::optional<int>> read_optional_ids(const Json& v, const Reader& r) {
  r.array(v);
  std::vector<std::optional<int>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i].is_null()) {
      out.emplace_back();
    } else {
      out.emplace_back(static_cast<int>(r.at(i).integer(v[i])));
    }
  }
  return out;
}

OrderedJson optional_ids_json(const std::vector<std::optional<int>>& ids) {
  OrderedJson out = OrderedJson::array();
  for (const auto& id : ids) out.push_back(id ? OrderedJson(*id) : OrderedJson(nullptr));
  return out;
}

std::string finish(const OrderedJson& doc) { return doc.dump() + "\n"; }

}  // namespace

InterchangeDocument parse_interchange(std::string_view text) {
  const Json root = load(text);
  const Reader r("$");
  check_version(root, r);

  InterchangeDocument doc;
  doc.image_width = r.at("image_width").extent(r.field(root, "image_width"));
  doc.image_height = r.at("image_height").extent(r.field(root, "image_height"));
  const Reader frames_r = r.at("frames");
  const Json& frames = frames_r.array(r.field(root, "frames"));

  std::vector<std::string> bad;
  doc.frames.reserve(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const Reader fr = frames_r.at(f);
    FrameDetections fd;
    fd.frame_index = fr.at("frame_index").integer(fr.field(frames[f], "frame_index"));
    fd.image_width = doc.image_width;
    fd.image_height = doc.image_height;
    const Reader dets_r = fr.at("detections");
    const Json& dets = dets_r.array(fr.field(frames[f], "detections"));
    fd.detections.reserve(dets.size());
    for (std::size_t d = 0; d < dets.size(); ++d) {
      const Reader dr = dets_r.at(d);
      const Json& dj = dets[d];
      Detection det;
      const std::string name = dr.at("class").string(dr.field(dj, "class"));
      const auto label = try_parse_class_label(name);
      if (!label) dr.at("class").fail("unknown class '" + name + "'");
      det.label = *label;
      det.confidence = std::clamp(dr.at("confidence").number(dr.field(dj, "confidence")), 0.0, 1.0);
      const Reader br = dr.at("bbox");
      const Json& bbox = br.array(dr.field(dj, "bbox"));
      if (bbox.size() != 4) br.fail("expected [x, y, width, height]");
      det.bbox = {br.at(0).number(bbox[0]), br.at(1).number(bbox[1]), br.at(2).number(bbox[2]),
                  br.at(3).number(bbox[3])};
      det.mask = read_mask(dr.field(dj, "mask"), dr.at("mask"), doc.image_height, doc.image_width,
                           bad);
      fd.detections.push_back(std::move(det));
    }
    doc.frames.push_back(std::move(fd));
  }

  collect_violations(doc, bad);
  if (!bad.empty()) {
    std::string msg = std::to_string(bad.size()) + " invalid detection(s):";
    for (const std::string& line : bad) msg += "\n  " + line;
    throw ValidationError(msg);
  }
  return doc;
}

std::vector<FrameDetections> parse_detections(std::string_view text) {
  return parse_interchange(text).frames;
}

std::string write_interchange(const InterchangeDocument& doc) {
  OrderedJson root;
  root["schema_version"] = doc.schema_version;
  root["image_width"] = doc.image_width;
  root["image_height"] = doc.image_height;
  OrderedJson frames = OrderedJson::array();
  for (const FrameDetections& fd : doc.frames) {
    OrderedJson dets = OrderedJson::array();
    for (const Detection& d : fd.detections) {
      OrderedJson dj;
      dj["class"] = std::string(to_string(d.label));
      dj["confidence"] = d.confidence;
      dj["bbox"] = {d.bbox.x, d.bbox.y, d.bbox.width, d.bbox.height};
      dj["mask"] = mask_json(d.mask);
      dets.push_back(std::move(dj));
    }
    OrderedJson fj;
    fj["frame_index"] = fd.frame_index;
    fj["detections"] = std::move(dets);
    frames.push_back(std::move(fj));
  }
  root["frames"] = std::move(frames);
  return finish(root);
}

std::string write_detections(std::span<const FrameDetections> frames, int image_width,
                             int image_height) {
  InterchangeDocument doc;
  doc.image_width = image_width;
  doc.image_height = image_height;
  doc.frames.assign(frames.begin(), frames.end());
  return write_interchange(doc);
}

std::string write_tracked(const TrackedSequence& tracked) {
  OrderedJson root;
  root["schema_version"] = std::string(kSchemaVersion);
  root["next_fresh_id"] = tracked.next_fresh_id;
  root["left_leaving"] = ids_json(tracked.left_leaving);
  root["right_leaving"] = ids_json(tracked.right_leaving);
  OrderedJson frames = OrderedJson::array();
  for (const FrameTrack& ft : tracked.frames) {
    OrderedJson fj;
    fj["frame_index"] = ft.frame_index;
    fj["blade_ids"] = optional_ids_json(ft.blade_ids);
    fj["left_leaving"] = ids_json(ft.left_leaving);
    fj["right_leaving"] = ids_json(ft.right_leaving);
    frames.push_back(std::move(fj));
  }
  root["frames"] = std::move(frames);
  return finish(root);
}

TrackedSequence parse_tracked(std::string_view text) {
  const Json root = load(text);
  const Reader r("$");
  check_version(root, r);
  TrackedSequence out;
  out.next_fresh_id = static_cast<int>(r.at("next_fresh_id").integer(r.field(root, "next_fresh_id")));
  out.left_leaving = read_ids(r.field(root, "left_leaving"), r.at("left_leaving"));
  out.right_leaving = read_ids(r.field(root, "right_leaving"), r.at("right_leaving"));
  const Reader frames_r = r.at("frames");
  const Json& frames = frames_r.array(r.field(root, "frames"));
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const Reader fr = frames_r.at(f);
    FrameTrack ft;
    ft.frame_index = fr.at("frame_index").integer(fr.field(frames[f], "frame_index"));
    ft.blade_ids = read_optional_ids(fr.field(frames[f], "blade_ids"), fr.at("blade_ids"));
    ft.left_leaving = read_ids(fr.field(frames[f], "left_leaving"), fr.at("left_leaving"));
    ft.right_leaving = read_ids(fr.field(frames[f], "right_leaving"), fr.at("right_leaving"));
    out.frames.push_back(std::move(ft));
  }
  return out;
}

std::string write_truth(const synth::GroundTruth& truth, const TruthIds& ids) {
  if (ids.size() != truth.frames.size()) {
    throw DimensionError("truth IDs cover " + std::to_string(ids.size()) + " frames, truth has " +
                         std::to_string(truth.frames.size()));
  }
  OrderedJson root;
  root["schema_version"] = std::string(kSchemaVersion);
  OrderedJson frames = OrderedJson::array();
  for (std::size_t f = 0; f < truth.frames.size(); ++f) {
    const synth::FrameTruth& ft = truth.frames[f];
    OrderedJson blades = OrderedJson::array();
    for (const synth::BladeTruth& b : ft.blades) {
      OrderedJson damage = OrderedJson::array();
      for (const synth::DamageTruth& dt : b.damage) {
        OrderedJson dj;
        dj["class"] = std::string(to_string(dt.label));
        dj["pixels"] = dt.pixels;
        dj["fraction"] = dt.fraction;
        damage.push_back(std::move(dj));
      }
      OrderedJson bj;
      bj["blade_id"] = b.blade_id;
      bj["area"] = b.mask.area();
      bj["damage"] = std::move(damage);
      blades.push_back(std::move(bj));
    }
    OrderedJson fj;
    fj["frame_index"] = ft.frame_index;
    fj["offset"] = ft.offset;
    fj["blade_ids"] = optional_ids_json(ids[f]);
    fj["blades"] = std::move(blades);
    frames.push_back(std::move(fj));
  }
  root["frames"] = std::move(frames);
  return finish(root);
}

TruthIds parse_truth_ids(std::string_view text) {
  const Json root = load(text);
  const Reader r("$");
  check_version(root, r);
  const Reader frames_r = r.at("frames");
  const Json& frames = frames_r.array(r.field(root, "frames"));
  TruthIds out;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const Reader fr = frames_r.at(f);
    out.push_back(read_optional_ids(fr.field(frames[f], "blade_ids"), fr.at("blade_ids")));
  }
  return out;
}

SynthConfigFile parse_synth_config(std::string_view text) {
  Json root;
  try {
    root = load(text);
  } catch (const FormatError& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("synth config: expected a JSON object");

  SynthConfigFile out;
  synth::SynthConfig& c = out.config;
  const Reader r("$");
  auto as_int = [&](const Json& v, std::string_view key) {
    const std::int64_t x = r.at(key).integer(v);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
      r.at(key).fail("out of range");
    }
    return static_cast<int>(x);
  };
  try {
    for (const auto& [key, v] : root.items()) {
      if (key == "image_width") c.image_width = as_int(v, key);
      else if (key == "image_height") c.image_height = as_int(v, key);
      else if (key == "blade_count") c.blade_count = as_int(v, key);
      else if (key == "fps") c.fps = r.at(key).number(v);
      else if (key == "displacement") c.displacement = as_int(v, key);
      else if (key == "direction") c.direction = as_int(v, key);
      else if (key == "blade_spacing") c.blade_spacing = as_int(v, key);
      else if (key == "blade_width") c.blade_width = as_int(v, key);
      else if (key == "blade_height") c.blade_height = as_int(v, key);
      else if (key == "blade_slant") c.blade_slant = as_int(v, key);
      else if (key == "blade_top") c.blade_top = as_int(v, key);
      else if (key == "frame_count") c.frame_count = as_int(v, key);
      else if (key == "dropout") c.dropout = r.at(key).number(v);
      else if (key == "jitter_std") c.jitter_std = r.at(key).number(v);
      else if (key == "confidence_noise_std") c.confidence_noise_std = r.at(key).number(v);
      else if (key == "background") c.background = r.at(key).number(v);
      else if (key == "blade_intensity") c.blade_intensity = r.at(key).number(v);
      else if (key == "seed") {
        if (!v.is_number_unsigned()) r.at(key).fail("expected a non-negative integer");
        c.seed = v.get<std::uint64_t>();
        out.has_seed = true;
      } else if (key == "reversals") {
        const Reader rr = r.at(key);
        rr.array(v);
        c.reversals.clear();
        for (std::size_t i = 0; i < v.size(); ++i) c.reversals.push_back(as_int(v[i], key));
      } else if (key == "damage") {
        const Reader dr = r.at(key);
        dr.array(v);
        c.damage.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
          const Reader ir = dr.at(i);
          if (!v[i].is_object()) ir.fail("expected an object");
          synth::DamageInjection inj;
          for (const auto& [k, x] : v[i].items()) {
            if (k == "blade") inj.blade = static_cast<int>(ir.at(k).integer(x));
            else if (k == "class") {
              const auto label = try_parse_class_label(ir.at(k).string(x));
              if (!label || !is_damage(*label)) ir.at(k).fail("expected a damage class");
              inj.label = *label;
            } else if (k == "fraction") inj.fraction = ir.at(k).number(x);
            else if (k == "span_start") inj.span_start = ir.at(k).number(x);
            else if (k == "amplitude") inj.amplitude = ir.at(k).number(x);
            else ir.at(k).fail("unknown key");
          }
          c.damage.push_back(inj);
        }
      } else {
        r.at(key).fail("unknown key");
      }
    }
  } catch (const FormatError& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
  c.validate();
  return out;
}

std::string write_synth_config(const synth::SynthConfig& c) {
  OrderedJson root;
  root["image_width"] = c.image_width;
  root["image_height"] = c.image_height;
  root["blade_count"] = c.blade_count;
  root["fps"] = c.fps;
  root["displacement"] = c.displacement;
  root["direction"] = c.direction;
  root["blade_spacing"] = c.blade_spacing;
  root["blade_width"] = c.blade_width;
  root["blade_height"] = c.blade_height;
  root["blade_slant"] = c.blade_slant;
  root["blade_top"] = c.blade_top;
  root["frame_count"] = c.frame_count;
  root["reversals"] = c.reversals;
  OrderedJson damage = OrderedJson::array();
  for (const synth::DamageInjection& d : c.damage) {
    OrderedJson dj;
    dj["blade"] = d.blade;
    dj["class"] = std::string(to_string(d.label));
    dj["fraction"] = d.fraction;
    dj["span_start"] = d.span_start;
    dj["amplitude"] = d.amplitude;
    damage.push_back(std::move(dj));
  }
  root["damage"] = std::move(damage);
  root["dropout"] = c.dropout;
  root["jitter_std"] = c.jitter_std;
  root["confidence_noise_std"] = c.confidence_noise_std;
  root["seed"] = c.seed;
  root["background"] = c.background;
  root["blade_intensity"] = c.blade_intensity;
  return finish(root);
}

}  // namespace bladetrack
