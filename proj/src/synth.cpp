#include "bladetrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "bladetrack/error.hpp"
#include "bladetrack/geometry.hpp"

namespace bladetrack::synth {

namespace {

struct LocalSpan {
  int row;
  int col_begin;
  int col_end;
};

struct BladeTemplate {
  std::vector<LocalSpan> body;
  std::int64_t area = 0;
};

int extent_x(const SynthConfig& cfg) { return cfg.blade_width + cfg.blade_slant; }

std::vector<LocalSpan> blade_body(const SynthConfig& cfg) {
  const double w = cfg.blade_width, s = cfg.blade_slant, h = cfg.blade_height;
  Eigen::Matrix2Xd v(2, 4);
  v << 0.0, w, w + s, s,
       0.0, 0.0, h, h;
  const MaskArray m = rasterize_polygon(Polygon(v), cfg.blade_height, extent_x(cfg)).dense();
  std::vector<LocalSpan> spans;
  for (int r = 0; r < m.rows(); ++r) {
    int c = 0;
    while (c < m.cols()) {
      if (!m(r, c)) {
        ++c;
        continue;
      }
      const int begin = c;
      while (c < m.cols() && m(r, c)) ++c;
      spans.push_back({r, begin, c});
    }
  }
  return spans;
}

std::vector<LocalSpan> damage_spans(const std::vector<LocalSpan>& body, std::int64_t area,
                                    const DamageInjection& inj, int blade_height) {
  const std::int64_t wanted = std::llround(inj.fraction * static_cast<double>(area));
  const int start_row = static_cast<int>(std::floor(inj.span_start * blade_height));
  std::vector<LocalSpan> out;
  std::int64_t taken = 0;
  for (const LocalSpan& s : body) {
    if (s.row < start_row || taken >= wanted) continue;
    const std::int64_t take = std::min<std::int64_t>(s.col_end - s.col_begin, wanted - taken);
    out.push_back({s.row, s.col_begin, s.col_begin + static_cast<int>(take)});
    taken += take;
  }
  if (taken < wanted) {
    throw ConfigError("damage on blade " + std::to_string(inj.blade) + " needs " +
                      std::to_string(wanted) + " pixels but only " + std::to_string(taken) +
                      " lie below span_start");
  }
  return out;
}

BinaryMask place(const std::vector<LocalSpan>& local, int ox, int oy, int height, int width) {
  std::vector<RowSpan> spans;
  spans.reserve(local.size());
  for (const LocalSpan& s : local) spans.push_back({s.row + oy, s.col_begin + ox, s.col_end + ox});
  return BinaryMask(Rle::from_spans(height, width, spans));
}

std::vector<int> offsets(const SynthConfig& cfg, int frames) {
  std::vector<int> out(static_cast<std::size_t>(frames), 0);
  int direction = cfg.direction;
  for (int t = 1; t < frames; ++t) {
    if (std::find(cfg.reversals.begin(), cfg.reversals.end(), t) != cfg.reversals.end()) {
      direction = -direction;
    }
    out[static_cast<std::size_t>(t)] = out[static_cast<std::size_t>(t) - 1] + direction * cfg.displacement;
  }
  return out;
}

// Left edge of blade i's bounding parallelogram at zero offset. The leading
// blade starts flush with the edge it travels toward.
int home_x(const SynthConfig& cfg, int blade) {
  if (cfg.direction > 0) return cfg.image_width - extent_x(cfg) - blade * cfg.blade_spacing;
  return blade * cfg.blade_spacing;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void SynthConfig::validate() const {
  if (image_width <= 0 || image_height <= 0) throw ConfigError("image extent must be positive");
  if (blade_count < 1) throw ConfigError("blade count must be >= 1");
  if (blade_width < 1 || blade_height < 1 || blade_slant < 0) {
    throw ConfigError("blade shape must have positive width and height");
  }
  if (blade_width + blade_slant > image_width || blade_top < 0 ||
      blade_top + blade_height > image_height) {
    throw ConfigError("blade shape does not fit inside the image");
  }
  if (blade_spacing < 1) throw ConfigError("blade spacing must be >= 1");
  if (displacement < 0) throw ConfigError("displacement must be >= 0");
  if (direction != 1 && direction != -1) throw ConfigError("direction must be +1 or -1");
  if (frame_count < 0) throw ConfigError("frame count must be >= 0");
  if (frame_count == 0 && displacement == 0) {
    throw ConfigError("frame count is required when displacement is 0");
  }
  if (!(dropout >= 0.0 && dropout <= 1.0)) throw ConfigError("dropout must lie in [0, 1]");
  if (!(jitter_std >= 0.0) || !(confidence_noise_std >= 0.0)) {
    throw ConfigError("noise standard deviations must be >= 0");
  }
  if (!(fps > 0.0)) throw ConfigError("fps must be > 0");
  for (const DamageInjection& d : damage) {
    if (d.blade < 0 || d.blade >= blade_count) {
      throw ConfigError("damage refers to blade " + std::to_string(d.blade) + " of " +
                        std::to_string(blade_count));
    }
    if (!is_damage(d.label)) throw ConfigError("damage injection needs a damage class");
    if (!(d.fraction > 0.0 && d.fraction <= 1.0)) throw ConfigError("damage fraction must lie in (0, 1]");
    if (!(d.span_start >= 0.0 && d.span_start < 1.0)) throw ConfigError("span_start must lie in [0, 1)");
  }
}

int SynthConfig::resolved_frame_count() const {
  if (frame_count > 0) return frame_count;
  // Steps until the trailing blade has fully crossed the opposite edge.
  const int last = home_x(*this, blade_count - 1);
  const int distance = direction > 0 ? image_width - last : last + extent_x(*this);
  return distance / displacement + 2;
}

Sequence::Sequence(SynthConfig cfg, std::vector<FrameDetections> frames, GroundTruth truth)
    : cfg_(std::move(cfg)), frames_(std::move(frames)), truth_(std::move(truth)) {}

GrayImage Sequence::image(std::size_t frame) const {
  GrayImage img = GrayImage::Constant(cfg_.image_height, cfg_.image_width, cfg_.background);
  const FrameTruth& ft = truth_.frames.at(frame);
  for (const BladeTruth& b : ft.blades) {
    img = (b.mask.dense() != 0).select(GrayImage::Constant(img.rows(), img.cols(), cfg_.blade_intensity), img);
  }
  for (const BladeTruth& b : ft.blades) {
    for (const DamageTruth& d : b.damage) {
      img = (d.mask.dense() != 0).select((img + d.amplitude).max(0.0).min(1.0), img);
    }
  }
  return img;
}

Sequence generate(const SynthConfig& cfg) {
  cfg.validate();
  const int frames = cfg.resolved_frame_count();
  const std::vector<int> shift = offsets(cfg, frames);

  BladeTemplate tmpl;
  tmpl.body = blade_body(cfg);
  for (const LocalSpan& s : tmpl.body) tmpl.area += s.col_end - s.col_begin;

  std::vector<std::vector<std::pair<const DamageInjection*, std::vector<LocalSpan>>>> damage(
      static_cast<std::size_t>(cfg.blade_count));
  for (const DamageInjection& inj : cfg.damage) {
    damage[static_cast<std::size_t>(inj.blade)].emplace_back(
        &inj, damage_spans(tmpl.body, tmpl.area, inj, cfg.blade_height));
  }

  std::vector<FrameDetections> out_frames;
  GroundTruth truth;
  out_frames.reserve(static_cast<std::size_t>(frames));
  const int extent = extent_x(cfg);
  for (int t = 0; t < frames; ++t) {
    FrameDetections fd;
    fd.frame_index = t;
    fd.image_width = cfg.image_width;
    fd.image_height = cfg.image_height;
    FrameTruth ft;
    ft.frame_index = t;
    ft.offset = shift[static_cast<std::size_t>(t)];
    for (int i = 0; i < cfg.blade_count; ++i) {
      const int ox = home_x(cfg, i) + ft.offset;
      if (ox + extent <= 0 || ox >= cfg.image_width) continue;
      BinaryMask body = place(tmpl.body, ox, cfg.blade_top, cfg.image_height, cfg.image_width);
      const std::int64_t body_pixels = body.area();
      if (body_pixels == 0) continue;

      BladeTruth bt;
      bt.blade_id = i;
      bt.detection = fd.detections.size();
      bt.mask = body;
      fd.detections.push_back(Detection::from_mask(ClassLabel::CompressorRotor, 1.0, std::move(body)));
      for (const auto& [inj, spans] : damage[static_cast<std::size_t>(i)]) {
        BinaryMask m = place(spans, ox, cfg.blade_top, cfg.image_height, cfg.image_width);
        const std::int64_t pixels = m.area();
        if (pixels == 0) continue;
        DamageTruth dt;
        dt.label = inj->label;
        dt.amplitude = inj->amplitude;
        dt.pixels = pixels;
        dt.fraction = static_cast<double>(pixels) / static_cast<double>(body_pixels);
        dt.detection = fd.detections.size();
        dt.mask = m;
        fd.detections.push_back(Detection::from_mask(inj->label, 1.0, std::move(m)));
        bt.damage.push_back(std::move(dt));
      }
      ft.blades.push_back(std::move(bt));
    }
    out_frames.push_back(std::move(fd));
    truth.frames.push_back(std::move(ft));
  }
  return Sequence(cfg, std::move(out_frames), std::move(truth));
}

Perturbed perturb(const std::vector<FrameDetections>& frames, const SynthConfig& cfg) {
  Perturbed out;
  out.frames.reserve(frames.size());
  out.source.reserve(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const FrameDetections& in = frames[f];
    FrameDetections fd{in.frame_index, in.image_width, in.image_height, {}};
    std::vector<std::size_t> source;
    for (std::size_t d = 0; d < in.detections.size(); ++d) {
      std::mt19937_64 rng(splitmix64(splitmix64(splitmix64(cfg.seed) ^ f) ^ d));
      std::uniform_real_distribution<double> uniform(0.0, 1.0);
      std::normal_distribution<double> normal(0.0, 1.0);
      if (uniform(rng) < cfg.dropout) continue;

      Detection det = in.detections[d];
      if (cfg.jitter_std > 0.0) {
        const int dx = static_cast<int>(std::lround(normal(rng) * cfg.jitter_std));
        const int dy = static_cast<int>(std::lround(normal(rng) * cfg.jitter_std));
        if (dx != 0 || dy != 0) {
          det.mask = det.mask.translated(dx, dy);
          if (det.mask.empty()) continue;
          const double x0 = std::max(0.0, det.bbox.x + dx);
          const double y0 = std::max(0.0, det.bbox.y + dy);
          const double x1 = std::min<double>(in.image_width, det.bbox.x + det.bbox.width + dx);
          const double y1 = std::min<double>(in.image_height, det.bbox.y + det.bbox.height + dy);
          det.bbox = {x0, y0, x1 - x0, y1 - y0};
        }
      }
      if (cfg.confidence_noise_std > 0.0) {
        det.confidence = std::clamp(det.confidence + normal(rng) * cfg.confidence_noise_std, 0.0, 1.0);
      }
      fd.detections.push_back(std::move(det));
      source.push_back(d);
    }
    out.frames.push_back(std::move(fd));
    out.source.push_back(std::move(source));
  }
  return out;
}

TruthIds truth_ids(const GroundTruth& truth, const std::vector<FrameDetections>& clean) {
  TruthIds out(clean.size());
  for (std::size_t f = 0; f < clean.size(); ++f) {
    out[f].resize(clean[f].detections.size());
    for (const BladeTruth& b : truth.frames.at(f).blades) out[f].at(b.detection) = b.blade_id;
  }
  return out;
}

TruthIds truth_ids(const GroundTruth& truth, const std::vector<FrameDetections>& clean,
                   const Perturbed& perturbed) {
  const TruthIds full = truth_ids(truth, clean);
  TruthIds out(perturbed.frames.size());
  for (std::size_t f = 0; f < perturbed.frames.size(); ++f) {
    for (std::size_t src : perturbed.source[f]) out[f].push_back(full[f].at(src));
  }
  return out;
}

OracleReport oracle_check(const TrackedSequence& pred, const TruthIds& truth) {
  const IdAlignment align = align_ids(pred, truth);
  OracleReport report;
  report.accuracy = align.accuracy;
  for (std::size_t f = 0; f < pred.frames.size(); ++f) {
    const FrameTrack& ft = pred.frames[f];
    for (std::size_t d = 0; d < ft.blade_ids.size(); ++d) {
      if (!ft.blade_ids[d]) continue;
      const std::optional<int> expected =
          f < truth.size() && d < truth[f].size() ? truth[f][d] : std::nullopt;
      const auto mapped = align.pred_to_truth.find(*ft.blade_ids[d]);
      const bool agrees = expected && mapped != align.pred_to_truth.end() && mapped->second == *expected;
      if (agrees) continue;
      std::string line = "frame " + std::to_string(ft.frame_index) + " detection " +
                         std::to_string(d) + ": predicted " + std::to_string(*ft.blade_ids[d]);
      line += mapped != align.pred_to_truth.end() ? " (relabeled " + std::to_string(mapped->second) + ")"
                                                   : " (unmatched)";
      line += ", truth " + (expected ? std::to_string(*expected) : std::string("none"));
      report.diff.push_back(std::move(line));
    }
  }
  return report;
}

}  // namespace bladetrack::synth
