// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/scenes/scenes.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "streamrope/numerics/errors.hpp"
#include "streamrope/numerics/random.hpp"

namespace streamrope::scenes {

namespace {

enum Stream : std::uint64_t {
  kObjects = 1,
  kNoise = 2,
};

double quantize(double v) { return std::round(v / kCoordinateQuantum) * kCoordinateQuantum; }

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

void SceneConfig::validate() const {
  if (!(extent > 0.0)) throw ConfigurationError("extent must be positive");
  if (grid_n < 2) throw ConfigurationError("grid_n must be >= 2");
  if (n_objects < 1 || n_objects > 8) throw ConfigurationError("n_objects must lie in [1, 8]");
  if (frames < 2) throw ConfigurationError("frames must be >= 2");
  if (!(speed_min >= 0.0) || !(speed_max >= speed_min)) {
    throw ConfigurationError("speed range must satisfy 0 <= speed_min <= speed_max");
  }
  if (!(speed_max * static_cast<double>(frames) < extent)) {
    throw ConfigurationError("speed_max * frames must stay below extent");
  }
  if (!(noise_sigma >= 0.0)) throw ConfigurationError("noise_sigma must be non-negative");
  if (token_feature_dim < 1) throw ConfigurationError("token_feature_dim must be >= 1");
}

std::vector<BevPoint> cell_centers(const SceneConfig& config) {
  const double w = config.cell_width();
  std::vector<BevPoint> out;
  out.reserve(config.grid_n * config.grid_n);
  for (std::size_t iy = 0; iy < config.grid_n; ++iy)
    for (std::size_t ix = 0; ix < config.grid_n; ++ix)
      out.push_back({-config.extent + (static_cast<double>(ix) + 0.5) * w,
                     -config.extent + (static_cast<double>(iy) + 0.5) * w});
  return out;
}

TokenRaster rasterize_tokens(const std::vector<GtObject>& objects, const SceneConfig& config,
                             std::int64_t frame_id) {
  TokenRaster r;
  r.coords = cell_centers(config);
  const std::size_t n = r.coords.size();
  r.tokens = numerics::DenseMatrix(n, config.token_feature_dim);
  const double sigma = config.cell_width();
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  for (std::size_t i = 0; i < n; ++i) {
    double occupancy = 0.0;
    for (const GtObject& o : objects) {
      const double dx = r.coords[i].x - o.center.x;
      const double dy = r.coords[i].y - o.center.y;
      occupancy += std::exp(-(dx * dx + dy * dy) * inv_two_var);
    }
    r.tokens(i, 0) = occupancy;
  }
  if (config.token_feature_dim > 1 && config.noise_sigma > 0.0) {
    numerics::CounterRng rng(config.seed, {kNoise, static_cast<std::uint64_t>(frame_id)});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 1; c < config.token_feature_dim; ++c)
        r.tokens(i, c) = config.noise_sigma * rng.normal();
  }
  return r;
}

Episode make_episode(const SceneConfig& config, const std::vector<GtObject>& initial) {
  config.validate();
  Episode episode;
  episode.reserve(config.frames);
  for (std::size_t k = 0; k < config.frames; ++k) {
    EpisodeFrame frame;
    frame.frame_id = static_cast<std::int64_t>(k);
    const double kd = static_cast<double>(k);
    for (const GtObject& o : initial) {
      frame.objects.push_back({{o.center.x + kd * o.velocity.x, o.center.y + kd * o.velocity.y},
                               o.velocity,
                               o.cls});
    }
    TokenRaster raster = rasterize_tokens(frame.objects, config, frame.frame_id);
    frame.tokens = std::move(raster.tokens);
    frame.token_coords = std::move(raster.coords);
    episode.push_back(std::move(frame));
  }
  return episode;
}

Episode generate_episode(const SceneConfig& config) {
  config.validate();
  numerics::CounterRng rng(config.seed, {kObjects});
  const double half = config.extent / 2.0;
  std::vector<GtObject> objects;
  for (std::size_t i = 0; i < config.n_objects; ++i) {
    const double cx = rng.uniform(-half, half);
    const double cy = rng.uniform(-half, half);
    const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double speed = rng.uniform(config.speed_min, config.speed_max);
    objects.push_back({{quantize(cx), quantize(cy)},
                       {quantize(speed * std::cos(heading)), quantize(speed * std::sin(heading))},
                       1});
  }
  return make_episode(config, objects);
}

void write_episode(std::ostream& out, const SceneConfig& config, const Episode& episode) {
  out << "episode extent=" << fmt(config.extent) << " grid_n=" << config.grid_n
      << " n_objects=" << config.n_objects << " frames=" << config.frames
      << " speed_min=" << fmt(config.speed_min) << " speed_max=" << fmt(config.speed_max)
      << " noise_sigma=" << fmt(config.noise_sigma)
      << " token_feature_dim=" << config.token_feature_dim << " seed=" << config.seed << "\n";
  for (const EpisodeFrame& f : episode) {
    for (std::size_t i = 0; i < f.tokens.rows(); ++i) {
      out << "token " << f.frame_id << ' ' << i << ' ' << fmt(f.token_coords[i].x) << ' '
          << fmt(f.token_coords[i].y);
      for (double v : f.tokens.row(i)) out << ' ' << fmt(v);
      out << '\n';
    }
    for (std::size_t j = 0; j < f.objects.size(); ++j) {
      const GtObject& o = f.objects[j];
      out << "object " << f.frame_id << ' ' << j << ' ' << fmt(o.center.x) << ' '
          << fmt(o.center.y) << ' ' << fmt(o.velocity.x) << ' ' << fmt(o.velocity.y) << ' '
          << o.cls << '\n';
    }
  }
}

Episode read_episode(std::istream& in, SceneConfig* config_out) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigurationError("read_episode: empty input");
  std::istringstream header(line);
  std::string word;
  header >> word;
  if (word != "episode") throw ConfigurationError("read_episode: missing header");
  std::map<std::string, std::string> kv;
  while (header >> word) {
    const auto eq = word.find('=');
    if (eq == std::string::npos) throw ConfigurationError("read_episode: bad header field");
    kv[word.substr(0, eq)] = word.substr(eq + 1);
  }
  SceneConfig cfg;
  try {
    cfg.extent = std::stod(kv.at("extent"));
    cfg.grid_n = std::stoul(kv.at("grid_n"));
    cfg.n_objects = std::stoul(kv.at("n_objects"));
    cfg.frames = std::stoul(kv.at("frames"));
    cfg.speed_min = std::stod(kv.at("speed_min"));
    cfg.speed_max = std::stod(kv.at("speed_max"));
    cfg.noise_sigma = std::stod(kv.at("noise_sigma"));
    cfg.token_feature_dim = std::stoul(kv.at("token_feature_dim"));
    cfg.seed = std::stoull(kv.at("seed"));
  } catch (const std::exception&) {
    throw ConfigurationError("read_episode: incomplete header");
  }

  const std::size_t n_tokens = cfg.grid_n * cfg.grid_n;
  Episode episode(cfg.frames);
  for (std::size_t k = 0; k < cfg.frames; ++k) {
    episode[k].frame_id = static_cast<std::int64_t>(k);
    episode[k].tokens = numerics::DenseMatrix(n_tokens, cfg.token_feature_dim);
    episode[k].token_coords.resize(n_tokens);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string kind;
    std::size_t frame = 0, index = 0;
    row >> kind >> frame >> index;
    if (!row || frame >= cfg.frames) throw ConfigurationError("read_episode: bad line: " + line);
    EpisodeFrame& f = episode[frame];
    if (kind == "token") {
      if (index >= n_tokens) throw ConfigurationError("read_episode: token index out of range");
      row >> f.token_coords[index].x >> f.token_coords[index].y;
      for (double& v : f.tokens.row(index)) row >> v;
    } else if (kind == "object") {
      if (index != f.objects.size()) throw ConfigurationError("read_episode: objects out of order");
      GtObject o;
      row >> o.center.x >> o.center.y >> o.velocity.x >> o.velocity.y >> o.cls;
      f.objects.push_back(o);
    } else {
      throw ConfigurationError("read_episode: unknown record '" + kind + "'");
    }
    if (row.fail()) throw ConfigurationError("read_episode: truncated line: " + line);
  }
  if (config_out != nullptr) *config_out = cfg;
  return episode;
}

}  // namespace streamrope::scenes
