#include "bladetrack/tracking.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "bladetrack/error.hpp"
#include "bladetrack/geometry.hpp"

namespace bladetrack {

namespace {

struct TrackedBlade {
  int id;
  Point2 center;
};

void erase_id(std::vector<int>& list, int id) {
  list.erase(std::remove(list.begin(), list.end(), id), list.end());
}

}  // namespace

void TrackingConfig::validate() const {
  if (!(distance_threshold > 0.0)) throw ConfigError("distance threshold must be > 0");
  if (!(area_threshold >= 0.0)) throw ConfigError("area threshold must be >= 0");
  if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0)) {
    throw ConfigError("confidence threshold must lie in [0, 1]");
  }
  if (lookback < 1) throw ConfigError("lookback must be >= 1");
  if (image_width < 0) throw ConfigError("image width must be >= 0");
}

std::vector<std::size_t> validate(const FrameDetections& frame, const TrackingConfig& cfg) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < frame.detections.size(); ++i) {
    const Detection& d = frame.detections[i];
    if (!is_blade(d.label)) continue;
    if (static_cast<double>(d.mask.area()) > cfg.area_threshold &&
        d.confidence > cfg.confidence_threshold) {
      out.push_back(i);
    }
  }
  return out;
}

TrackedSequence track(std::span<const FrameDetections> frames, const TrackingConfig& cfg) {
  if (frames.empty()) throw EmptyInputError("track: no frames");
  cfg.validate();
  check_sequence(frames);

  const int width = cfg.image_width > 0 ? cfg.image_width : frames.front().image_width;
  const double half = width / 2.0;
  const std::size_t lookback = static_cast<std::size_t>(cfg.lookback);

  TrackedSequence out;
  std::vector<std::vector<TrackedBlade>> history;
  history.reserve(frames.size());
  std::map<int, std::size_t> last_seen;

  for (std::size_t t = 0; t < frames.size(); ++t) {
    const FrameDetections& frame = frames[t];
    std::vector<std::size_t> order = validate(frame, cfg);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const Detection& da = frame.detections[a];
      const Detection& db = frame.detections[b];
      if (da.confidence != db.confidence) return da.confidence > db.confidence;
      return da.bbox.x < db.bbox.x;
    });

    std::vector<std::optional<int>> ids(frame.detections.size());
    std::set<int> claimed;
    auto claim = [&](std::size_t det, int id) {
      ids[det] = id;
      claimed.insert(id);
    };

    if (t > 0) {
      for (std::size_t k = 1; k <= lookback && k <= t; ++k) {
        const std::vector<TrackedBlade>& previous = history[t - k];
        for (std::size_t det : order) {
          if (ids[det]) continue;
          const Point2 center = bbox_center(frame.detections[det].bbox);
          double best = std::numeric_limits<double>::infinity();
          std::optional<int> best_id;
          for (const TrackedBlade& p : previous) {
            if (claimed.count(p.id)) continue;
            const double d = (center - p.center).norm();
            if (d < best) {
              best = d;
              best_id = p.id;
            }
          }
          if (best_id && best < cfg.distance_threshold) claim(det, *best_id);
        }
      }
      for (int id : claimed) {
        erase_id(out.left_leaving, id);
        erase_id(out.right_leaving, id);
      }
    }

    for (std::size_t det : order) {
      if (ids[det]) continue;
      const bool left = bbox_center(frame.detections[det].bbox).x() < half;
      std::vector<int>& list = left ? out.left_leaving : out.right_leaving;
      auto reusable = std::find_if(list.rbegin(), list.rend(), [&](int id) {
        return !cfg.hold_recent_leavers || last_seen.at(id) + lookback < t;
      });
      if (reusable != list.rend()) {
        const int id = *reusable;
        list.erase(std::next(reusable).base());
        claim(det, id);
      } else {
        claim(det, out.next_fresh_id++);
      }
    }

    if (t > 0) {
      // Blades nearest the frame centre go last so they are reused first.
      std::vector<TrackedBlade> gone;
      for (const TrackedBlade& p : history[t - 1]) {
        if (!claimed.count(p.id)) gone.push_back(p);
      }
      std::stable_sort(gone.begin(), gone.end(), [&](const TrackedBlade& a, const TrackedBlade& b) {
        return std::abs(a.center.x() - half) > std::abs(b.center.x() - half);
      });
      for (const TrackedBlade& p : gone) {
        erase_id(out.left_leaving, p.id);
        erase_id(out.right_leaving, p.id);
        (p.center.x() < half ? out.left_leaving : out.right_leaving).push_back(p.id);
      }
    }

    std::vector<TrackedBlade> current;
    for (std::size_t det : order) {
      current.push_back({*ids[det], bbox_center(frame.detections[det].bbox)});
      last_seen[*ids[det]] = t;
    }
    history.push_back(std::move(current));
    out.frames.push_back({frame.frame_index, std::move(ids), out.left_leaving, out.right_leaving});
  }
  return out;
}

std::vector<int> max_weight_assignment(const std::vector<std::vector<std::int64_t>>& weight) {
  const std::size_t rows = weight.size();
  const std::size_t cols = rows == 0 ? 0 : weight.front().size();
  if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);
  const bool transposed = rows > cols;
  const std::size_t n = transposed ? cols : rows;
  const std::size_t m = transposed ? rows : cols;
  std::int64_t max_w = 0;
  for (const auto& row : weight) {
    for (std::int64_t w : row) max_w = std::max(max_w, w);
  }
  auto cost = [&](std::size_t i, std::size_t j) {
    return max_w - (transposed ? weight[j][i] : weight[i][j]);
  };

  // Shortest augmenting path Hungarian method, 1-based with sentinel 0.
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> u(n + 1, 0), v(m + 1, 0), minv(m + 1);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      std::int64_t delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const std::int64_t cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> result(rows, -1);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] == 0) continue;
    const std::size_t i = p[j] - 1;
    if (transposed) {
      result[j - 1] = static_cast<int>(i);
    } else {
      result[i] = static_cast<int>(j - 1);
    }
  }
  return result;
}

IdAlignment align_ids(const TrackedSequence& pred, const TruthIds& truth) {
  std::map<int, std::size_t> pred_index;
  std::map<int, std::size_t> truth_index;
  std::map<std::pair<std::size_t, std::size_t>, std::int64_t> counts;
  IdAlignment out;
  for (std::size_t f = 0; f < pred.frames.size(); ++f) {
    const auto& ids = pred.frames[f].blade_ids;
    for (std::size_t d = 0; d < ids.size(); ++d) {
      if (!ids[d]) continue;
      ++out.total;
      if (f >= truth.size() || d >= truth[f].size() || !truth[f][d]) continue;
      const std::size_t pi = pred_index.try_emplace(*ids[d], pred_index.size()).first->second;
      const std::size_t ti = truth_index.try_emplace(*truth[f][d], truth_index.size()).first->second;
      ++counts[{pi, ti}];
    }
  }
  if (out.total == 0) return out;
  std::vector<std::vector<std::int64_t>> weight(pred_index.size(),
                                                std::vector<std::int64_t>(truth_index.size(), 0));
  for (const auto& [key, c] : counts) weight[key.first][key.second] = c;
  const std::vector<int> match = max_weight_assignment(weight);

  std::vector<int> pred_ids(pred_index.size()), truth_ids(truth_index.size());
  for (const auto& [id, i] : pred_index) pred_ids[i] = id;
  for (const auto& [id, i] : truth_index) truth_ids[i] = id;
  for (std::size_t i = 0; i < match.size(); ++i) {
    if (match[i] < 0) continue;
    const std::size_t j = static_cast<std::size_t>(match[i]);
    out.matched += static_cast<std::size_t>(weight[i][j]);
    out.pred_to_truth[pred_ids[i]] = truth_ids[j];
  }
  out.accuracy = static_cast<double>(out.matched) / static_cast<double>(out.total);
  return out;
}

double association_accuracy(const TrackedSequence& pred, const TruthIds& truth) {
  return align_ids(pred, truth).accuracy;
}

}  // namespace bladetrack
