#include "bladetrack/reports.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "bladetrack/error.hpp"

namespace bladetrack {

namespace {

using OrderedJson = nlohmann::ordered_json;

OrderedJson optional_json(const std::optional<double>& v) {
  return v ? OrderedJson(*v) : OrderedJson(nullptr);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

OrderedJson report_json(const EvalReport& r) {
  OrderedJson classes;
  for (ClassLabel c : kAllClasses) {
    OrderedJson cj;
    cj["ap"] = optional_json(r.ap[class_index(c)]);
    cj["matched_iou"] = optional_json(r.matched_iou[class_index(c)]);
    classes[std::string(to_string(c))] = std::move(cj);
  }
  OrderedJson excluded = OrderedJson::array();
  for (ClassLabel c : r.excluded) excluded.push_back(std::string(to_string(c)));

  OrderedJson out;
  out["map"] = optional_json(r.map);
  out["mean_matched_iou"] = optional_json(r.mean_matched_iou);
  out["classes"] = std::move(classes);
  out["excluded"] = std::move(excluded);
  return out;
}

std::string cell(const std::optional<double>& v) { return v ? format_fixed(*v) : std::string(); }

}  // namespace

std::string format_fixed(double value, int digits) {
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, digits);
  if (res.ec != std::errc()) throw FormatError("number too large to format");
  std::string out(buf, res.ptr);
  if (out.find_first_not_of("-0.") == std::string::npos && out.front() == '-') out.erase(0, 1);
  return out;
}

std::string write_time_series(std::span<const DamageTimeSeries> series) {
  struct Row {
    int blade_id;
    const DamageSample* sample;
  };
  std::vector<Row> rows;
  for (const DamageTimeSeries& s : series) {
    for (const DamageSample& d : s.samples) rows.push_back({s.blade_id, &d});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.blade_id != b.blade_id) return a.blade_id < b.blade_id;
    return a.sample->frame_index < b.sample->frame_index;
  });

  std::string out =
      "blade_id,frame_index,blade_area_fraction,surface_fraction,separation_fraction,"
      "deformation_fraction\n";
  for (const Row& r : rows) {
    out += std::to_string(r.blade_id);
    out += ',';
    out += std::to_string(r.sample->frame_index);
    out += ',';
    out += format_fixed(r.sample->blade_area_fraction);
    for (double f : r.sample->damage_fraction) {
      out += ',';
      out += format_fixed(f);
    }
    out += '\n';
  }
  return out;
}

std::string write_row_summary(const RowSummary& summary, std::span<const BladeImpact> impacts) {
  std::map<int, double> delta;
  for (const BladeImpact& b : impacts) delta[b.blade_id] = b.delta_f;

  OrderedJson blades = OrderedJson::array();
  for (const BladeSummary& b : summary.blades) {
    OrderedJson damage;
    for (ClassLabel c : kDamageClasses) {
      const std::size_t k = damage_index(c);
      OrderedJson cj;
      cj["regions"] = b.regions[k];
      cj["total"] = b.totals[k];
      damage[std::string(to_string(c))] = std::move(cj);
    }
    OrderedJson bj;
    bj["blade_id"] = b.blade_id;
    bj["max_area_frame_index"] = b.max_area_frame_index;
    bj["frames_observed"] = b.frames_observed;
    bj["damage"] = std::move(damage);
    auto it = delta.find(b.blade_id);
    bj["delta_f"] = it == delta.end() ? OrderedJson(nullptr) : OrderedJson(it->second);
    blades.push_back(std::move(bj));
  }
  OrderedJson root;
  root["regions"] = kSpanRegions;
  root["blades"] = std::move(blades);
  return root.dump(2) + "\n";
}

std::string write_impact_table(std::span<const BladeImpact> impacts) {
  std::string out = "blade_id,delta_f\n";
  for (const BladeImpact& b : impacts) {
    out += std::to_string(b.blade_id) + "," + format_fixed(b.delta_f) + "\n";
  }
  return out;
}

ImpactWeights parse_impact_weights(std::string_view text) {
  ImpactWeights w;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::string where = "weights line " + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(where + ": repeated key '" + key + "'");

    double x = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), x);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size() || !std::isfinite(x)) {
      throw ConfigError(where + ": bad number '" + std::string(value) + "'");
    }

    if (key.rfind("region.", 0) == 0) {
      const std::string_view idx = std::string_view(key).substr(7);
      if (idx.size() != 1 || idx[0] < '1' || idx[0] > '0' + static_cast<int>(kSpanRegions)) {
        throw ConfigError(where + ": unknown region '" + key + "'");
      }
      w.region_multiplier[static_cast<std::size_t>(idx[0] - '1')] = x;
      continue;
    }
    const auto label = try_parse_class_label(key);
    if (!label || !is_damage(*label)) throw ConfigError(where + ": unknown key '" + key + "'");
    w.class_weight[damage_index(*label)] = x;
  }
  w.validate();
  return w;
}

std::string write_eval_json(const SetReport& report, std::span<const std::int64_t> image_keys) {
  if (image_keys.size() != report.images.size()) {
    throw DimensionError("eval report: image key count does not match image count");
  }
  OrderedJson images = OrderedJson::array();
  for (std::size_t i = 0; i < report.images.size(); ++i) {
    OrderedJson ij = report_json(report.images[i]);
    OrderedJson keyed;
    keyed["frame_index"] = image_keys[i];
    for (auto& [k, v] : ij.items()) keyed[k] = v;
    images.push_back(std::move(keyed));
  }
  OrderedJson root;
  root["iou_threshold"] = report.aggregate.iou_threshold;
  root["aggregate"] = report_json(report.aggregate);
  root["images"] = std::move(images);
  return root.dump(2) + "\n";
}

std::string write_eval_csv(const EvalReport& report) {
  std::string out = "class,AP,matched_iou\n";
  for (ClassLabel c : kAllClasses) {
    out += std::string(to_string(c)) + "," + cell(report.ap[class_index(c)]) + "," +
           cell(report.matched_iou[class_index(c)]) + "\n";
  }
  out += "mean," + cell(report.map) + "," + cell(report.mean_matched_iou) + "\n";
  return out;
}

}  // namespace bladetrack
