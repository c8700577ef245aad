#include "cli.hpp"

#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "bladetrack/damage.hpp"
#include "bladetrack/error.hpp"
#include "bladetrack/evaluation.hpp"
#include "bladetrack/image_io.hpp"
#include "bladetrack/interchange.hpp"
#include "bladetrack/reports.hpp"
#include "bladetrack/surface_filter.hpp"
#include "bladetrack/synth.hpp"
#include "bladetrack/tracking.hpp"

namespace bladetrack::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr)) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xf];
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("cannot read " + path.string());
  return bytes;
}

// Modification time in UTC, ISO 8601. Input mtimes stand in for run
// timestamps so reruns stay byte-identical.
std::string mtime_utc(const fs::path& path) {
  struct stat st {};
  if (::stat(path.c_str(), &st) != 0) throw IoError("cannot stat " + path.string());
  std::tm tm{};
  gmtime_r(&st.st_mtime, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Input {
  std::string role;
  fs::path path;
  std::string bytes;
};

Input load_input(std::string role, const fs::path& path) {
  return {std::move(role), path, read_file(path)};
}

// Output files are held in memory until every computation has succeeded,
// written to a staging directory, then renamed into place.
class Staged {
 public:
  void add(std::string name, std::string bytes) {
    files_.emplace_back(std::move(name), std::move(bytes));
  }
  void add(std::string name, const Bytes& bytes) {
    add(std::move(name), std::string(bytes.begin(), bytes.end()));
  }

  void commit(const fs::path& dir, Json manifest) {
    std::sort(files_.begin(), files_.end());
    Json outputs = Json::array();
    for (const auto& [name, bytes] : files_) {
      Json o;
      o["file"] = name;
      o["sha256"] = sha256_hex(bytes);
      outputs.push_back(std::move(o));
    }
    manifest["outputs"] = std::move(outputs);
    add("manifest.json", manifest.dump(2) + "\n");

    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    const fs::path staging = dir / (".staging-" + std::to_string(::getpid()));
    fs::remove_all(staging, ec);
    if (!fs::create_directory(staging, ec) || ec) {
      throw IoError("cannot create " + staging.string());
    }
    try {
      for (const auto& [name, bytes] : files_) {
        std::ofstream out(staging / name, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.close();
        if (!out) throw IoError("cannot write " + (staging / name).string());
      }
      for (const auto& [name, bytes] : files_) {
        fs::rename(staging / name, dir / name, ec);
        if (ec) throw IoError("cannot move " + name + " into " + dir.string() + ": " + ec.message());
      }
    } catch (...) {
      fs::remove_all(staging, ec);
      throw;
    }
    fs::remove_all(staging, ec);
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

Json manifest(std::string_view subcommand, Json parameters, const std::vector<Input>& inputs) {
  Json in = Json::array();
  for (const Input& i : inputs) {
    Json j;
    j["role"] = i.role;
    j["path"] = i.path.string();
    j["sha256"] = sha256_hex(i.bytes);
    j["modified"] = mtime_utc(i.path);
    in.push_back(std::move(j));
  }
  Json m;
  m["tool"] = "bladetrack";
  m["version"] = std::string(kToolVersion);
  m["subcommand"] = std::string(subcommand);
  m["parameters"] = std::move(parameters);
  m["inputs"] = std::move(in);
  return m;
}

// Tracked IDs must line up frame by frame and detection by detection.
void check_alignment(const TrackedSequence& tracked, std::span<const FrameDetections> frames) {
  if (tracked.frames.size() != frames.size()) {
    throw ValidationError("tracked IDs cover " + std::to_string(tracked.frames.size()) +
                          " frames, detections have " + std::to_string(frames.size()));
  }
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (tracked.frames[f].frame_index != frames[f].frame_index) {
      throw ValidationError("frame-index mismatch at position " + std::to_string(f) + ": tracked " +
                            std::to_string(tracked.frames[f].frame_index) + ", detections " +
                            std::to_string(frames[f].frame_index));
    }
    if (tracked.frames[f].blade_ids.size() != frames[f].detections.size()) {
      throw ValidationError("frame_index " + std::to_string(frames[f].frame_index) +
                            ": tracked ID count differs from detection count");
    }
  }
}

std::string frame_name(std::int64_t frame_index, std::string_view ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "frame_%06lld.", static_cast<long long>(frame_index));
  return buf + std::string(ext);
}

std::string crop_name(int blade_id, std::int64_t frame_index, std::string_view ext) {
  char buf[80];
  std::snprintf(buf, sizeof buf, "blade_%04d_frame_%06lld.", blade_id,
                static_cast<long long>(frame_index));
  return buf + std::string(ext);
}

std::string_view extension(ImageFormat f) { return f == ImageFormat::Png ? "png" : "ppm"; }

ImageFormat parse_format(const std::string& name) {
  if (name == "png") return ImageFormat::Png;
  if (name == "ppm") return ImageFormat::Ppm;
  throw ConfigError("unknown image format '" + name + "'");
}

// ---- track ---------------------------------------------------------------

struct TrackArgs {
  std::string detections;
  std::string out_dir;
  TrackingConfig cfg;
  bool no_hold = false;
};

void cmd_track(const TrackArgs& a, std::ostream& out) {
  const Input in = load_input("detections", a.detections);
  TrackingConfig cfg = a.cfg;
  cfg.hold_recent_leavers = !a.no_hold;
  const InterchangeDocument doc = parse_interchange(in.bytes);
  if (cfg.image_width == 0) cfg.image_width = doc.image_width;
  const TrackedSequence tracked = track(doc.frames, cfg);

  Json params;
  params["distance_threshold"] = cfg.distance_threshold;
  params["area_threshold"] = cfg.area_threshold;
  params["confidence_threshold"] = cfg.confidence_threshold;
  params["lookback"] = cfg.lookback;
  params["image_width"] = cfg.image_width;
  params["hold_recent_leavers"] = cfg.hold_recent_leavers;

  Staged staged;
  staged.add("tracked.json", write_tracked(tracked));
  staged.commit(a.out_dir, manifest("track", std::move(params), {in}));
  out << "tracked " << doc.frames.size() << " frames, " << tracked.next_fresh_id << " blade IDs\n";
}

// ---- stats ---------------------------------------------------------------

struct StatsArgs {
  std::string detections;
  std::string tracked;
  std::string weights;
  std::string out_dir;
};

void cmd_stats(const StatsArgs& a, std::ostream& out) {
  const Input det_in = load_input("detections", a.detections);
  const Input ids_in = load_input("tracked", a.tracked);
  Input w_in;
  try {
    w_in = load_input("weights", a.weights);
  } catch (const IoError& e) {
    throw ConfigError(std::string("weights: ") + e.what());
  }

  const std::vector<FrameDetections> frames = parse_detections(det_in.bytes);
  const TrackedSequence tracked = parse_tracked(ids_in.bytes);
  check_alignment(tracked, frames);
  const ImpactWeights weights = parse_impact_weights(w_in.bytes);

  const std::vector<DamageTimeSeries> series = time_series(tracked, frames);
  const RowSummary summary = row_summary(series, tracked, frames);
  const std::vector<BladeImpact> impact = performance_impact(summary, weights);

  Json params;
  Json cw;
  for (ClassLabel c : kDamageClasses) cw[std::string(to_string(c))] = weights.class_weight[damage_index(c)];
  params["class_weight"] = std::move(cw);
  params["region_multiplier"] = weights.region_multiplier;

  Staged staged;
  staged.add("time_series.csv", write_time_series(series));
  staged.add("row_summary.json", write_row_summary(summary, impact));
  staged.add("impact.csv", write_impact_table(impact));
  staged.commit(a.out_dir, manifest("stats", std::move(params), {det_in, ids_in, w_in}));
  out << "summarized " << summary.blades.size() << " blades\n";
}

// ---- eval ----------------------------------------------------------------

struct EvalArgs {
  std::string predictions;
  std::string truth;
  std::string out_dir;
  double iou_threshold = 0.5;
};

void cmd_eval(const EvalArgs& a, std::ostream& out) {
  const Input pred_in = load_input("predictions", a.predictions);
  const Input truth_in = load_input("ground_truth", a.truth);
  const InterchangeDocument pred = parse_interchange(pred_in.bytes);
  const InterchangeDocument truth = parse_interchange(truth_in.bytes);
  if (pred.image_width != truth.image_width || pred.image_height != truth.image_height) {
    throw DimensionError("prediction extent " + std::to_string(pred.image_width) + "x" +
                         std::to_string(pred.image_height) + " differs from ground truth " +
                         std::to_string(truth.image_width) + "x" +
                         std::to_string(truth.image_height));
  }

  // Frames missing from one side count as empty there.
  std::map<std::int64_t, ImagePair> by_frame;
  for (const FrameDetections& f : pred.frames) by_frame[f.frame_index].predictions = f.detections;
  for (const FrameDetections& f : truth.frames) by_frame[f.frame_index].ground_truth = f.detections;
  if (by_frame.empty()) throw EmptyInputError("no frames to evaluate");

  std::vector<std::int64_t> keys;
  std::vector<const ImagePair*> pairs;
  for (const auto& [k, p] : by_frame) {
    keys.push_back(k);
    pairs.push_back(&p);
  }
  std::vector<EvalReport> reports(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    reports[i] = evaluate_image(pairs[i]->predictions, pairs[i]->ground_truth, a.iou_threshold);
  });
  const SetReport report = summarize_set(std::move(reports), a.iou_threshold);

  Json params;
  params["iou_threshold"] = a.iou_threshold;
  Staged staged;
  staged.add("eval.json", write_eval_json(report, keys));
  staged.add("eval.csv", write_eval_csv(report.aggregate));
  staged.commit(a.out_dir, manifest("eval", std::move(params), {pred_in, truth_in}));
  out << "mAP " << (report.aggregate.map ? format_fixed(*report.aggregate.map) : "undefined")
      << " over " << keys.size() << " images\n";
}

// ---- filter --------------------------------------------------------------

struct FilterArgs {
  std::string frames_dir;
  std::string detections;
  std::string tracked;
  std::string out_dir;
  FilterParams params;
  bool no_enhance = false;
  bool max_area_only = false;
  std::string format = "png";
};

struct FilterJob {
  int blade_id;
  std::size_t detection;
};

struct FilterOutcome {
  int blade_id;
  std::int64_t frame_index;
  std::string file;
  std::int64_t highlighted;
  PixelRect crop;
  Bytes bytes;
};

void cmd_filter(const FilterArgs& a, std::ostream& out) {
  FilterParams params = a.params;
  params.enhance = !a.no_enhance;
  params.validate();
  const ImageFormat out_format = parse_format(a.format);

  const fs::path dir(a.frames_dir);
  if (!fs::is_directory(dir)) throw IoError("frames directory not found: " + dir.string());
  const Input det_in = load_input("detections", a.detections);
  const Input ids_in = load_input("tracked", a.tracked);
  const InterchangeDocument doc = parse_interchange(det_in.bytes);
  const TrackedSequence tracked = parse_tracked(ids_in.bytes);
  check_alignment(tracked, doc.frames);

  // Per frame position, the blades to filter.
  std::vector<std::vector<FilterJob>> jobs(doc.frames.size());
  if (a.max_area_only) {
    std::map<int, std::pair<std::int64_t, std::pair<std::size_t, std::size_t>>> best;
    for (std::size_t f = 0; f < doc.frames.size(); ++f) {
      for (std::size_t d = 0; d < doc.frames[f].detections.size(); ++d) {
        const auto& id = tracked.frames[f].blade_ids[d];
        if (!id) continue;
        const std::int64_t area = doc.frames[f].detections[d].mask.area();
        auto it = best.find(*id);
        if (it == best.end() || area > it->second.first) best[*id] = {area, {f, d}};
      }
    }
    for (const auto& [id, v] : best) jobs[v.second.first].push_back({id, v.second.second});
  } else {
    for (std::size_t f = 0; f < doc.frames.size(); ++f) {
      for (std::size_t d = 0; d < doc.frames[f].detections.size(); ++d) {
        if (const auto& id = tracked.frames[f].blade_ids[d]) jobs[f].push_back({*id, d});
      }
    }
  }

  std::vector<std::size_t> work;
  std::vector<fs::path> image_paths(doc.frames.size());
  for (std::size_t f = 0; f < doc.frames.size(); ++f) {
    if (jobs[f].empty()) continue;
    work.push_back(f);
    for (std::string_view ext : {"png", "ppm"}) {
      const fs::path p = dir / frame_name(doc.frames[f].frame_index, ext);
      if (fs::exists(p)) {
        image_paths[f] = p;
        break;
      }
    }
    if (image_paths[f].empty()) {
      throw ValidationError("no image for frame_index " + std::to_string(doc.frames[f].frame_index) +
                            " in " + dir.string());
    }
  }

  std::vector<std::vector<FilterOutcome>> results(work.size());
  parallel_for(work.size(), [&](std::size_t w) {
    const std::size_t f = work[w];
    const FrameDetections& frame = doc.frames[f];
    const RgbImage image = read_image(image_paths[f]);
    if (image.rows() != doc.image_height || image.cols() != doc.image_width) {
      throw DimensionError(image_paths[f].string() + " is " + std::to_string(image.cols()) + "x" +
                           std::to_string(image.rows()) + ", detections are " +
                           std::to_string(doc.image_width) + "x" +
                           std::to_string(doc.image_height));
    }
    for (const FilterJob& job : jobs[f]) {
      const SurfaceResult r = surface_pipeline(image, frame.detections[job.detection], params);
      const std::string name = crop_name(job.blade_id, frame.frame_index, extension(out_format));
      results[w].push_back({job.blade_id, frame.frame_index, name, r.highlighted, r.crop,
                            encode_image(r.image, out_format)});
    }
  });

  std::vector<FilterOutcome> all;
  for (auto& v : results) {
    for (auto& r : v) all.push_back(std::move(r));
  }
  std::sort(all.begin(), all.end(), [](const FilterOutcome& x, const FilterOutcome& y) {
    return std::tie(x.blade_id, x.frame_index) < std::tie(y.blade_id, y.frame_index);
  });

  Json p;
  p["sigma"] = params.sigma;
  p["erosion_radius"] = params.erosion_radius;
  p["tau"] = params.tau;
  p["enhance"] = params.enhance;
  p["upscale"] = params.upscale;
  p["max_area_only"] = a.max_area_only;
  p["format"] = a.format;

  Json rows = Json::array();
  Staged staged;
  std::int64_t total = 0;
  for (FilterOutcome& r : all) {
    Json j;
    j["blade_id"] = r.blade_id;
    j["frame_index"] = r.frame_index;
    j["file"] = r.file;
    j["highlighted"] = r.highlighted;
    j["crop"] = {r.crop.row0, r.crop.col0, r.crop.row1, r.crop.col1};
    rows.push_back(std::move(j));
    total += r.highlighted;
    staged.add(r.file, r.bytes);
  }
  Json sidecar;
  sidecar["params"] = p;
  sidecar["results"] = std::move(rows);
  staged.add("filter.json", sidecar.dump(2) + "\n");

  Json mp = p;
  mp["frames_dir"] = dir.string();
  std::vector<Input> inputs = {det_in, ids_in};
  staged.commit(a.out_dir, manifest("filter", std::move(mp), inputs));
  out << "filtered " << all.size() << " blade crops, " << total << " highlighted pixels\n";
}

// ---- synth ---------------------------------------------------------------

struct SynthArgs {
  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool no_images = false;
  std::string format = "png";
};

std::uint64_t digest_seed(std::string_view bytes) {
  const std::string hex = sha256_hex(bytes);
  return std::stoull(hex.substr(0, 16), nullptr, 16);
}

void cmd_synth(const SynthArgs& a, std::ostream& out) {
  std::vector<Input> inputs;
  SynthConfigFile file;
  std::string config_bytes;
  if (!a.config.empty()) {
    inputs.push_back(load_input("config", a.config));
    config_bytes = inputs.back().bytes;
    file = parse_synth_config(config_bytes);
  }
  synth::SynthConfig cfg = file.config;
  if (a.seed_given) {
    cfg.seed = a.seed;
  } else if (!file.has_seed) {
    cfg.seed = digest_seed(config_bytes);
  }
  cfg.validate();
  const ImageFormat format = parse_format(a.format);

  const synth::Sequence seq = synth::generate(cfg);
  const synth::Perturbed noisy = synth::perturb(seq.frames(), cfg);
  const TruthIds ids = synth::truth_ids(seq.truth(), seq.frames(), noisy);

  Staged staged;
  staged.add("detections.json", write_detections(noisy.frames, cfg.image_width, cfg.image_height));
  staged.add("truth_detections.json",
             write_detections(seq.frames(), cfg.image_width, cfg.image_height));
  staged.add("truth.json", write_truth(seq.truth(), ids));
  if (!a.no_images) {
    std::vector<Bytes> images(seq.frames().size());
    parallel_for(images.size(), [&](std::size_t f) { images[f] = encode_image(seq.image(f), format); });
    for (std::size_t f = 0; f < images.size(); ++f) {
      staged.add(frame_name(seq.frames()[f].frame_index, extension(format)), images[f]);
    }
  }

  Json params = Json::parse(write_synth_config(cfg));
  params["images"] = !a.no_images;
  params["format"] = a.format;
  staged.commit(a.out_dir, manifest("synth", std::move(params), inputs));
  out << "generated " << seq.frames().size() << " frames of " << cfg.blade_count << " blades (seed "
      << cfg.seed << ")\n";
}

}  // namespace

unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BLADETRACK_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), n);
  std::vector<std::exception_ptr> errors(n);
  auto body = [&](std::atomic<std::size_t>& next) {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::atomic<std::size_t> next{0};
  if (workers <= 1) {
    body(next);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body, std::ref(next));
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Borescope blade tracking and damage statistics", "bladetrack"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  TrackArgs ta;
  auto* track_cmd = app.add_subcommand("track", "Assign persistent blade IDs across frames");
  track_cmd->add_option("detections", ta.detections, "Detection interchange file")->required();
  track_cmd->add_option("--out-dir", ta.out_dir, "Output directory")->required();
  track_cmd->add_option("--distance-threshold", ta.cfg.distance_threshold,
                        "Maximum centre distance for a match, pixels (strict)");
  track_cmd->add_option("--area-threshold", ta.cfg.area_threshold,
                        "Blades need a mask area above this, pixels");
  track_cmd->add_option("--confidence-threshold", ta.cfg.confidence_threshold,
                        "Blades need a confidence above this");
  track_cmd->add_option("--lookback", ta.cfg.lookback, "Frames searched back for a match");
  track_cmd->add_option("--image-width", ta.cfg.image_width,
                        "Width splitting left/right halves; 0 uses the document width");
  track_cmd->add_flag("--no-hold-recent-leavers", ta.no_hold,
                      "Let unmatched blades reuse IDs seen within the lookback window");

  StatsArgs sa;
  auto* stats_cmd = app.add_subcommand("stats", "Per-blade damage time series and row summary");
  stats_cmd->add_option("detections", sa.detections, "Detection interchange file")->required();
  stats_cmd->add_option("tracked", sa.tracked, "Tracked-IDs file from `track`")->required();
  stats_cmd->add_option("--weights", sa.weights, "Impact weights file (key = value)")->required();
  stats_cmd->add_option("--out-dir", sa.out_dir, "Output directory")->required();

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "mAP and matched IoU against ground truth");
  eval_cmd->add_option("predictions", ea.predictions, "Predicted detections")->required();
  eval_cmd->add_option("ground_truth", ea.truth, "Ground-truth detections")->required();
  eval_cmd->add_option("--iou-threshold", ea.iou_threshold, "IoU a match must exceed");
  eval_cmd->add_option("--out-dir", ea.out_dir, "Output directory")->required();

  FilterArgs fa;
  auto* filter_cmd = app.add_subcommand("filter", "High-pass surface filter on blade crops");
  filter_cmd->add_option("frames_dir", fa.frames_dir, "Directory of frame_NNNNNN.png/.ppm")->required();
  filter_cmd->add_option("detections", fa.detections, "Detection interchange file")->required();
  filter_cmd->add_option("tracked", fa.tracked, "Tracked-IDs file from `track`")->required();
  filter_cmd->add_option("--out-dir", fa.out_dir, "Output directory")->required();
  filter_cmd->add_option("--sigma", fa.params.sigma, "Gaussian blur standard deviation, pixels");
  filter_cmd->add_option("--erosion-radius", fa.params.erosion_radius,
                         "Half-width of the square mask erosion, pixels");
  filter_cmd->add_option("--tau", fa.params.tau, "Intensities at or below this are dropped");
  filter_cmd->add_option("--upscale", fa.params.upscale, "Nearest-neighbour upscale of crops");
  filter_cmd->add_flag("--no-enhance", fa.no_enhance, "Skip rescaling survivors to [0, 1]");
  filter_cmd->add_flag("--max-area-only", fa.max_area_only,
                       "Only each blade's maximum-area frame");
  filter_cmd->add_option("--format", fa.format, "Output image format")
      ->check(CLI::IsMember({"png", "ppm"}));

  SynthArgs ya;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic blade-row sequence");
  synth_cmd->add_option("config", ya.config, "Synthetic config JSON (optional)");
  synth_cmd->add_option("--out-dir", ya.out_dir, "Output directory")->required();
  auto* seed_opt = synth_cmd->add_option("--seed", ya.seed, "Noise seed")
                       ->default_str("config seed, else config digest");
  synth_cmd->add_flag("--no-images", ya.no_images, "Skip rendering frame images");
  synth_cmd->add_option("--format", ya.format, "Frame image format")
      ->check(CLI::IsMember({"png", "ppm"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*track_cmd) cmd_track(ta, out);
    if (*stats_cmd) cmd_stats(sa, out);
    if (*eval_cmd) cmd_eval(ea, out);
    if (*filter_cmd) cmd_filter(fa, out);
    if (*synth_cmd) {
      ya.seed_given = seed_opt->count() > 0;
      cmd_synth(ya, out);
    }
  } catch (const IoError& e) {
    err << "bladetrack: " << e.what() << "\n";
    return kIoFailure;
  } catch (const Error& e) {
    err << "bladetrack: " << e.what() << "\n";
    return kInvalid;
  } catch (const fs::filesystem_error& e) {
    err << "bladetrack: " << e.what() << "\n";
    return kIoFailure;
  } catch (const std::exception& e) {
    err << "bladetrack: " << e.what() << "\n";
    return kIoFailure;
  }
  return kOk;
}

}  // namespace bladetrack::cli
