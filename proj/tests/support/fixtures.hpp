#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "bladetrack/evaluation.hpp"
#include "bladetrack/interchange.hpp"
#include "bladetrack/mask.hpp"
#include "bladetrack/types.hpp"

namespace fixture {

using bladetrack::BinaryMask;
using bladetrack::MaskArray;

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Salt-and-pepper at a random density.
inline MaskArray noise_mask(std::mt19937_64& rng, int h, int w) {
  const double p = uniform(rng, 0.0, 1.0);
  MaskArray m(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) m(r, c) = uniform(rng, 0.0, 1.0) < p;
  return m;
}

// Union of a few random rectangles, so overlaps are large enough to matter.
inline MaskArray blob_mask(std::mt19937_64& rng, int h, int w, int max_rects = 3) {
  MaskArray m = MaskArray::Zero(h, w);
  if (m.size() == 0) return m;
  const int n = uniform_int(rng, 0, max_rects);
  for (int i = 0; i < n; ++i) {
    const int r0 = uniform_int(rng, 0, h - 1), c0 = uniform_int(rng, 0, w - 1);
    const int r1 = uniform_int(rng, r0, h - 1), c1 = uniform_int(rng, c0, w - 1);
    m.block(r0, c0, r1 - r0 + 1, c1 - c0 + 1).setOnes();
  }
  return m;
}

inline MaskArray random_mask(std::mt19937_64& rng, int h, int w) {
  return uniform_int(rng, 0, 1) ? noise_mask(rng, h, w) : blob_mask(rng, h, w);
}

inline MaskArray rect(int h, int w, int row0, int col0, int rows, int cols) {
  MaskArray m = MaskArray::Zero(h, w);
  m.block(row0, col0, rows, cols).setOnes();
  return m;
}

inline bladetrack::Detection detection(bladetrack::ClassLabel label, double confidence,
                                       const MaskArray& m) {
  return bladetrack::Detection::from_mask(label, confidence, BinaryMask(m));
}

// Rectangular detection of `rows` x `cols` pixels at (row0, col0).
inline bladetrack::Detection box(bladetrack::ClassLabel label, double confidence, int h, int w,
                                 int row0, int col0, int rows, int cols) {
  return detection(label, confidence, rect(h, w, row0, col0, rows, cols));
}

inline bladetrack::FrameDetections frame(std::int64_t index, int h, int w,
                                         std::vector<bladetrack::Detection> dets = {}) {
  bladetrack::FrameDetections f;
  f.frame_index = index;
  f.image_height = h;
  f.image_width = w;
  f.detections = std::move(dets);
  return f;
}

// Up to 10 ground truths and 10 predictions over up to 5 classes. Most
// predictions are noisy copies of a ground truth so matches happen at many
// IoU levels; confidences are coarse so ties occur.
inline bladetrack::ImagePair random_image_pair(std::mt19937_64& rng, int h, int w) {
  bladetrack::ImagePair pair;
  const int classes = uniform_int(rng, 1, 5);
  auto label = [&] {
    return bladetrack::kAllClasses[static_cast<std::size_t>(uniform_int(rng, 0, classes - 1))];
  };
  const int gts = uniform_int(rng, 0, 10), preds = uniform_int(rng, 0, 10);
  for (int i = 0; i < gts; ++i) pair.ground_truth.push_back(detection(label(), 1.0, blob_mask(rng, h, w, 2)));
  for (int i = 0; i < preds; ++i) {
    const double conf = uniform_int(rng, 0, 10) / 10.0;
    if (!pair.ground_truth.empty() && uniform_int(rng, 0, 3) != 0) {
      const auto& g = pair.ground_truth[static_cast<std::size_t>(uniform_int(rng, 0, gts - 1))];
      MaskArray m = g.mask.dense();
      const int flips = uniform_int(rng, 0, h * w / 4);
      for (int k = 0; k < flips; ++k) {
        auto& px = m(uniform_int(rng, 0, h - 1), uniform_int(rng, 0, w - 1));
        px = !px;
      }
      const auto lbl = uniform_int(rng, 0, 4) == 0 ? label() : g.label;
      pair.predictions.push_back(detection(lbl, conf, m));
    } else {
      pair.predictions.push_back(detection(label(), conf, blob_mask(rng, h, w, 2)));
    }
  }
  return pair;
}

// A document with random labels, confidences and masks; boxes enclose their
// masks with random slack, and some masks are stored dense.
inline bladetrack::InterchangeDocument random_document(std::mt19937_64& rng) {
  bladetrack::InterchangeDocument doc;
  doc.image_width = uniform_int(rng, 1, 24);
  doc.image_height = uniform_int(rng, 1, 24);
  std::int64_t index = uniform_int(rng, -5, 5);
  const int frames = uniform_int(rng, 0, 4);
  for (int f = 0; f < frames; ++f) {
    bladetrack::FrameDetections fd;
    fd.frame_index = index;
    index += uniform_int(rng, 1, 3);
    fd.image_width = doc.image_width;
    fd.image_height = doc.image_height;
    const int dets = uniform_int(rng, 0, 4);
    for (int d = 0; d < dets; ++d) {
      bladetrack::Detection det;
      det.label = bladetrack::kAllClasses[static_cast<std::size_t>(uniform_int(rng, 0, 4))];
      det.confidence = uniform(rng, 0.0, 1.0);
      const MaskArray m = random_mask(rng, doc.image_height, doc.image_width);
      det.mask = uniform_int(rng, 0, 1) ? BinaryMask(m) : BinaryMask(bladetrack::Rle::encode(m));
      if (const auto b = det.mask.tight_bounds()) {
        det.bbox = bladetrack::BoundingBox::from_rect(*b);
        det.bbox.x -= uniform(rng, 0.0, 2.0);
        det.bbox.y -= uniform(rng, 0.0, 2.0);
        det.bbox.width += uniform(rng, 2.0, 4.0);
        det.bbox.height += uniform(rng, 2.0, 4.0);
      } else {
        det.bbox = {uniform(rng, 0.0, 5.0), uniform(rng, 0.0, 5.0), uniform(rng, 0.5, 5.0),
                    uniform(rng, 0.5, 5.0)};
      }
      fd.detections.push_back(std::move(det));
    }
    doc.frames.push_back(std::move(fd));
  }
  return doc;
}

}  // namespace fixture
