#include "curvox/dataset.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "curvox/util.hpp"
#include "curvox/vxg_io.hpp"

namespace curvox {

void DatasetConfig::validate() const {
  if (grid_n < 3) throw ConfigError("dataset grid_n must be >= 3");
  if (extent <= 0.0) throw ConfigError("dataset extent must be positive");
  if (train_scenes < 1 || val_scenes < 1 || test_scenes < 1) {
    throw ConfigError("dataset needs at least one scene per split");
  }
  if (image_width < 1 || image_height < 1) throw ConfigError("image size must be positive");
  if (!(focal > 0.0)) throw ConfigError("focal length must be positive");
  if (!(sample_rate > 0.0 && sample_rate <= 1.0)) {
    throw ConfigError("sample_rate must be in (0,1]; a rate of 0 yields an untrainable dataset");
  }
  if (!(camera_distance_min > 0.0 && camera_distance_max >= camera_distance_min)) {
    throw ConfigError("camera distance range invalid");
  }
}

KeyValueFile DatasetConfig::to_key_values() const {
  KeyValueFile kv;
  kv.set_int("grid_n", grid_n);
  kv.set_double("extent", extent);
  kv.set_int("train_scenes", train_scenes);
  kv.set_int("val_scenes", val_scenes);
  kv.set_int("test_scenes", test_scenes);
  kv.set_int("image_width", image_width);
  kv.set_int("image_height", image_height);
  kv.set_double("focal", focal);
  kv.set_double("sample_rate", sample_rate);
  kv.set_u64("seed", seed);
  kv.set_int("min_primitives", scenes.min_primitives);
  kv.set_int("max_primitives", scenes.max_primitives);
  kv.set_double("min_sphere_radius", scenes.min_sphere_radius);
  kv.set_double("max_sphere_radius", scenes.max_sphere_radius);
  kv.set_double("min_box_extent", scenes.min_box_extent);
  kv.set_double("max_box_extent", scenes.max_box_extent);
  kv.set_double("floor_probability", scenes.floor_probability);
  kv.set_double("floor_thickness", scenes.floor_thickness);
  kv.set_double("camera_distance_min", camera_distance_min);
  kv.set_double("camera_distance_max", camera_distance_max);
  kv.set_int("min_valid_pixels", min_valid_pixels);
  kv.set_int("max_scene_attempts", max_scene_attempts);
  return kv;
}

std::vector<std::string> DatasetConfig::known_keys() {
  return {"grid_n",          "extent",           "train_scenes",      "val_scenes",
          "test_scenes",     "image_width",      "image_height",      "focal",
          "sample_rate",     "seed",             "min_primitives",    "max_primitives",
          "min_sphere_radius", "max_sphere_radius", "min_box_extent",  "max_box_extent",
          "floor_probability", "floor_thickness", "camera_distance_min",
          "camera_distance_max", "min_valid_pixels", "max_scene_attempts"};
}

DatasetConfig DatasetConfig::from_key_values(const KeyValueFile& kv) {
  kv.require_known_keys(known_keys());
  DatasetConfig c;
  c.grid_n = kv.get_int_or("grid_n", c.grid_n);
  c.extent = kv.get_double_or("extent", c.extent);
  c.train_scenes = kv.get_int_or("train_scenes", c.train_scenes);
  c.val_scenes = kv.get_int_or("val_scenes", c.val_scenes);
  c.test_scenes = kv.get_int_or("test_scenes", c.test_scenes);
  c.image_width = kv.get_int_or("image_width", c.image_width);
  c.image_height = kv.get_int_or("image_height", c.image_height);
  c.focal = kv.get_double_or("focal", c.focal);
  c.sample_rate = kv.get_double_or("sample_rate", c.sample_rate);
  c.seed = kv.get_u64_or("seed", c.seed);
  c.scenes.min_primitives = kv.get_int_or("min_primitives", c.scenes.min_primitives);
  c.scenes.max_primitives = kv.get_int_or("max_primitives", c.scenes.max_primitives);
  c.scenes.min_sphere_radius = kv.get_double_or("min_sphere_radius", c.scenes.min_sphere_radius);
  c.scenes.max_sphere_radius = kv.get_double_or("max_sphere_radius", c.scenes.max_sphere_radius);
  c.scenes.min_box_extent = kv.get_double_or("min_box_extent", c.scenes.min_box_extent);
  c.scenes.max_box_extent = kv.get_double_or("max_box_extent", c.scenes.max_box_extent);
  c.scenes.floor_probability = kv.get_double_or("floor_probability", c.scenes.floor_probability);
  c.scenes.floor_thickness = kv.get_double_or("floor_thickness", c.scenes.floor_thickness);
  c.camera_distance_min = kv.get_double_or("camera_distance_min", c.camera_distance_min);
  c.camera_distance_max = kv.get_double_or("camera_distance_max", c.camera_distance_max);
  c.min_valid_pixels = kv.get_int_or("min_valid_pixels", c.min_valid_pixels);
  c.max_scene_attempts = kv.get_int_or("max_scene_attempts", c.max_scene_attempts);
  c.validate();
  return c;
}

std::string DatasetConfig::config_hash() const {
  return hex64(fnv1a64(to_key_values().serialize()));
}

void write_manifest(const std::filesystem::path& split_dir, const DatasetManifest& m) {
  std::string text;
  text += "split = " + m.split + "\n";
  text += "seed = " + std::to_string(m.seed) + "\n";
  text += "config_hash = " + m.config_hash + "\n";
  text += "grid_n = " + std::to_string(m.grid_n) + "\n";
  text += "extent = " + format_double(m.extent) + "\n";
  text += "scene_count = " + std::to_string(m.scene_names.size()) + "\n";
  for (const auto& name : m.scene_names) {
    text += name + "\n";
  }
  write_text_file(split_dir / "manifest.txt", text);
}

DatasetManifest read_manifest(const std::filesystem::path& split_dir) {
  const std::string text = read_text_file(split_dir / "manifest.txt");
  DatasetManifest m;
  for (const std::string& raw : split(text, '\n')) {
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      m.scene_names.push_back(line);
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "split") m.split = value;
    else if (key == "seed") m.seed = std::stoull(value);
    else if (key == "config_hash") m.config_hash = value;
    else if (key == "grid_n") m.grid_n = std::stoi(value);
    else if (key == "extent") m.extent = std::stod(value);
    else if (key == "scene_count") { /* redundant with the list */ }
    else throw IoError("unknown manifest key: " + key);
  }
  if (m.split.empty() || m.grid_n < 3) {
    throw IoError("malformed manifest in " + split_dir.string());
  }
  return m;
}

// ---- Observation files (OBS1) ---------------------------------------------

namespace {

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>((v >> s) & 0xff));
}

void put_f64le(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int s = 0; s < 64; s += 8) out.push_back(static_cast<std::uint8_t>((bits >> s) & 0xff));
}

struct Reader {
  const std::vector<std::uint8_t>& buf;
  std::size_t pos = 0;
  std::string path;

  void need(std::size_t count) {
    if (pos + count > buf.size()) throw IoError("truncated observation file: " + path);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int s = 0; s < 32; s += 8) v |= static_cast<std::uint32_t>(buf[pos++]) << s;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int s = 0; s < 64; s += 8) v |= static_cast<std::uint64_t>(buf[pos++]) << s;
    return std::bit_cast<double>(v);
  }
};

}  // namespace

void write_observation(const std::filesystem::path& path, const SparseDepthObservation& obs) {
  std::vector<std::uint8_t> buf;
  buf.insert(buf.end(), {'O', 'B', 'S', '1'});
  const Camera& c = obs.camera;
  for (double v : {c.fx, c.fy, c.cx, c.cy}) put_f64le(buf, v);
  put_u32le(buf, static_cast<std::uint32_t>(c.width));
  put_u32le(buf, static_cast<std::uint32_t>(c.height));
  for (double v : c.position) put_f64le(buf, v);
  for (double v : c.look_at) put_f64le(buf, v);
  for (double v : c.up) put_f64le(buf, v);
  put_u32le(buf, static_cast<std::uint32_t>(obs.total_pixels));
  put_u32le(buf, static_cast<std::uint32_t>(obs.valid_pixels));
  put_u32le(buf, static_cast<std::uint32_t>(obs.samples.size()));
  for (const auto& s : obs.samples) {
    put_u32le(buf, static_cast<std::uint32_t>(s.u));
    put_u32le(buf, static_cast<std::uint32_t>(s.v));
    put_f64le(buf, s.depth);
  }
  write_binary_file(path, buf.data(), buf.size());
}

SparseDepthObservation read_observation(const std::filesystem::path& path) {
  const auto buf = read_binary_file(path);
  if (buf.size() < 4 || std::memcmp(buf.data(), "OBS1", 4) != 0) {
    throw IoError("not an OBS1 file: " + path.string());
  }
  Reader r{buf, 4, path.string()};
  SparseDepthObservation obs;
  obs.camera.fx = r.f64();
  obs.camera.fy = r.f64();
  obs.camera.cx = r.f64();
  obs.camera.cy = r.f64();
  obs.camera.width = static_cast<int>(r.u32());
  obs.camera.height = static_cast<int>(r.u32());
  for (double& v : obs.camera.position) v = r.f64();
  for (double& v : obs.camera.look_at) v = r.f64();
  for (double& v : obs.camera.up) v = r.f64();
  obs.total_pixels = static_cast<int>(r.u32());
  obs.valid_pixels = static_cast<int>(r.u32());
  const std::uint32_t count = r.u32();
  obs.samples.resize(count);
  for (auto& s : obs.samples) {
    s.u = static_cast<int>(r.u32());
    s.v = static_cast<int>(r.u32());
    s.depth = r.f64();
  }
  if (r.pos != buf.size()) {
    throw IoError("trailing bytes in observation file: " + path.string());
  }
  return obs;
}

TrainingSample load_sample(const std::filesystem::path& split_dir, const std::string& name,
                           double extent) {
  TrainingSample s;
  ScalarGrid gt = read_vxg(split_dir / (name + ".gt.vxg"));
  ScalarGrid ev = read_vxg(split_dir / (name + ".evidence.vxg"));
  ScalarGrid mk = read_vxg(split_dir / (name + ".mask.vxg"));
  s.gt = OccupancyGrid(gt.n(), std::move(gt).take_values(), extent);
  s.evidence = OccupancyGrid(ev.n(), std::move(ev).take_values(), extent);
  s.mask = OccupancyGrid(mk.n(), std::move(mk).take_values(), extent);
  s.obs = read_observation(split_dir / (name + ".obs"));
  return s;
}

// ---- Generation -------------------------------------------------------------

namespace {

Camera random_camera(const DatasetConfig& cfg, Rng& rng) {
  Camera cam;
  cam.fx = cfg.focal;
  cam.fy = cfg.focal;
  cam.cx = 0.5 * cfg.image_width;
  cam.cy = 0.5 * cfg.image_height;
  cam.width = cfg.image_width;
  cam.height = cfg.image_height;
  const double half = 0.5 * cfg.extent;
  const double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  const double elevation = rng.uniform(0.15, 0.75);  // radians above the horizontal
  const double dist = rng.uniform(cfg.camera_distance_min, cfg.camera_distance_max);
  cam.position = {half + dist * std::cos(elevation) * std::cos(theta),
                  half + dist * std::cos(elevation) * std::sin(theta),
                  half + dist * std::sin(elevation)};
  cam.look_at = {half + rng.uniform(-0.4, 0.4), half + rng.uniform(-0.4, 0.4),
                 half + rng.uniform(-0.4, 0.4)};
  return cam;
}

}  // namespace

std::vector<SplitSummary> generate_dataset(const DatasetConfig& config,
                                           const std::filesystem::path& out_dir) {
  config.validate();
  std::filesystem::create_directories(out_dir);
  config.to_key_values().save(out_dir / "config.snapshot");

  const struct {
    const char* name;
    int count;
    int index_base;
  } splits[] = {
      {"train", config.train_scenes, 0},
      {"val", config.val_scenes, config.train_scenes},
      {"test", config.test_scenes, config.train_scenes + config.val_scenes},
  };

  std::vector<SplitSummary> summaries;
  for (const auto& sp : splits) {
    const std::filesystem::path split_dir = out_dir / sp.name;
    std::filesystem::create_directories(split_dir);
    SplitSummary summary;
    summary.split = sp.name;
    summary.scenes = sp.count;
    DatasetManifest manifest;
    manifest.split = sp.name;
    manifest.seed = config.seed;
    manifest.config_hash = config.config_hash();
    manifest.grid_n = config.grid_n;
    manifest.extent = config.extent;

    long long valid_total = 0;
    for (int s = 0; s < sp.count; ++s) {
      const auto scene_index = static_cast<std::uint64_t>(sp.index_base + s);
      Rng rng(mix_seed(config.seed, scene_index));

      OccupancyGrid gt;
      DepthMap depth;
      Camera camera;
      for (int attempt = 0; attempt < config.max_scene_attempts; ++attempt) {
        const SceneSpec spec =
            random_scene_spec(config.scenes, config.extent, config.grid_n, rng);
        gt = generate_scene(spec);
        camera = random_camera(config, rng);
        depth = render_depth(gt, camera);
        if (depth.valid_count() >= config.min_valid_pixels) break;
      }

      const SparseDepthObservation obs = sparsify(depth, camera, config.sample_rate, rng);
      const ObservationGrids grids = voxelize_observation(obs, config.grid_n, config.extent);

      char name[32];
      std::snprintf(name, sizeof(name), "scene_%06d", sp.index_base + s);
      write_vxg(split_dir / (std::string(name) + ".gt.vxg"), gt);
      write_vxg(split_dir / (std::string(name) + ".evidence.vxg"), grids.evidence);
      write_vxg(split_dir / (std::string(name) + ".mask.vxg"), grids.mask);
      write_observation(split_dir / (std::string(name) + ".obs"), obs);
      manifest.scene_names.push_back(name);

      summary.depth_samples += static_cast<long long>(obs.samples.size());
      summary.dropped_samples += grids.dropped;
      valid_total += obs.valid_pixels;
      for (double v : grids.evidence.values()) summary.evidence_voxels += v > 0.5;
    }
    summary.mean_valid_pixels = sp.count > 0 ? static_cast<double>(valid_total) / sp.count : 0.0;
    write_manifest(split_dir, manifest);
    summaries.push_back(summary);
  }
  return summaries;
}

// ---- Augmentation -------------------------------------------------------------

OccupancyGrid flip_x(const OccupancyGrid& grid) {
  const int n = grid.n();
  OccupancyGrid out(n, 0.0, grid.extent());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        out.at(i, j, k) = grid.at(n - 1 - i, j, k);
      }
    }
  }
  return out;
}

TrainingSample scale_depth(const TrainingSample& sample, double factor) {
  TrainingSample out = sample;
  for (auto& s : out.obs.samples) s.depth *= factor;
  const ObservationGrids grids =
      voxelize_observation(out.obs, sample.gt.n(), sample.gt.extent());
  out.evidence = grids.evidence;
  out.mask = grids.mask;
  return out;
}

TrainingSample augment(const TrainingSample& sample, const AugmentConfig& config, Rng& rng) {
  TrainingSample out = sample;
  if (config.depth_scaling) {
    const double factor =
        rng.uniform(1.0 - config.depth_scale_range, 1.0 + config.depth_scale_range);
    out = scale_depth(out, factor);
  }
  if (config.horizontal_flip && rng.uniform01() < 0.5) {
    out.gt = flip_x(out.gt);
    out.evidence = flip_x(out.evidence);
    out.mask = flip_x(out.mask);
  }
  return out;
}

}  // namespace curvox
