#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "submodes/dep.hpp"
#include "submodes/engine.hpp"
#include "submodes/envs/planar_sphere.hpp"
#include "submodes/envs/synth_regime.hpp"

namespace submodes {

using json = nlohmann::json;

enum class Ablation { Full, NoTransitionModels, RandomSegmentation, RandomControllers };

inline const char* ablation_name(Ablation a) {
  switch (a) {
    case Ablation::Full: return "full";
    case Ablation::NoTransitionModels: return "no_transition_models";
    case Ablation::RandomSegmentation: return "random_segmentation";
    case Ablation::RandomControllers: return "random_controllers";
  }
  return "?";
}

inline Ablation ablation_from_name(const std::string& s) {
  for (Ablation a : {Ablation::Full, Ablation::NoTransitionModels, Ablation::RandomSegmentation,
                     Ablation::RandomControllers})
    if (s == ablation_name(a)) return a;
  throw std::invalid_argument("unknown ablation: " + s);
}

enum class EnvKind { PlanarSphere, SynthRegime, TerrainCourse };

inline const char* env_name(EnvKind e) {
  switch (e) {
    case EnvKind::PlanarSphere: return "planar_sphere";
    case EnvKind::SynthRegime: return "synth_regime";
    case EnvKind::TerrainCourse: return "terrain_course";
  }
  return "?";
}

inline EnvKind env_from_name(const std::string& s) {
  for (EnvKind e : {EnvKind::PlanarSphere, EnvKind::SynthRegime, EnvKind::TerrainCourse})
    if (s == env_name(e)) return e;
  throw std::invalid_argument("unknown env: " + s);
}

struct ProtocolConfig {
  int episodes = 10;
  long exploration_steps = 15000;
  int training_goals = 3;
  int testing_goals = 5;
  long goal_timeout = 7000;
  double goal_distance = 60.0;
  double goal_radius = 1.0;
  double cruise_speed = 1.0;
  int pool_size = 30;  // fixed model pool of the random-pool ablations
};

struct TerrainConfig {
  long exploration_steps_per_zone = 15000;
  double zone_arena = 150.0;  // side of the single-terrain exploration arenas
  long course_timeout = 20000;
  int training_runs = 3;
  int testing_runs = 5;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  EnvKind env = EnvKind::PlanarSphere;
  Ablation ablation = Ablation::Full;
  SphereParams sphere;
  SynthRegimeParams synth;
  long synth_steps = 40000;
  SensorConfig sensors;
  DepParams dep;
  EngineParams engine;
  LearningParams learning;
  ProtocolConfig protocol;
  TerrainConfig terrain;
};

//! Sensor layout and scaling for the rolling sphere: 3 axis projections, sin/cos heading, speed.
inline SensorConfig sphere_sensors() {
  SensorConfig s;
  s.proprio_dim = 3;
  s.pose = true;
  s.noise_sd = 0.05;
  s.delta_scale = Vec(6);
  s.delta_scale << 0.18, 0.18, 0.18, 4.0, 4.0, 1.5;
  return s;
}

inline SensorConfig synth_sensors(int dim) {
  SensorConfig s;
  s.proprio_dim = dim;
  s.pose = false;
  s.noise_sd = 0.0;
  s.delta_scale = Vec::Constant(dim, 0.5);
  return s;
}

inline ExperimentConfig default_config(EnvKind env) {
  ExperimentConfig c;
  c.env = env;
  if (env == EnvKind::SynthRegime) {
    c.synth.regimes = default_regimes();
    c.sensors = synth_sensors(c.synth.regimes.front().A.rows());
    c.dep.in_dim = c.sensors.proprio_dim;
    c.dep.out_dim = static_cast<int>(c.synth.regimes.front().B.cols());
    c.dep.tau_h = 0;
    c.learning.eps_b = 0.03;
    c.learning.l1 = 0.0005;
  } else {
    c.sensors = sphere_sensors();
    c.learning.motor_inputs = c.sensors.proprio_dim;
    c.engine.search_window = 25;
    if (env == EnvKind::TerrainCourse) c.sphere = terrain_course_params();
  }
  c.engine.planner.default_duration = c.engine.search_min;
  return c;
}

namespace detail {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline Mat read_matrix(const json& j) {
  const std::size_t rows = j.size();
  if (rows == 0) return Mat();
  const std::size_t cols = j.at(0).size();
  Mat m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j.at(r).size() != cols) throw std::invalid_argument("ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

inline json write_matrix(const Mat& m) {
  json a = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(row);
  }
  return a;
}

inline Vec read_vector(const json& j) {
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j.at(i).get<double>();
  return v;
}

inline json write_vector(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Rect read_rect(const json& j) {
  if (!j.is_array() || j.size() != 4) throw std::invalid_argument("rectangle must be [xmin, xmax, ymin, ymax]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace detail

//! Overlays a JSON document on the defaults for its env kind.
inline ExperimentConfig config_from_json(const json& j) {
  using detail::read;
  EnvKind env = EnvKind::PlanarSphere;
  if (j.contains("env")) env = env_from_name(j.at("env").get<std::string>());
  ExperimentConfig c = default_config(env);
  read(j, "seed", c.seed);
  if (j.contains("ablation")) c.ablation = ablation_from_name(j.at("ablation").get<std::string>());

  if (j.contains("sphere")) {
    const json& s = j.at("sphere");
    if (s.contains("arena")) {
      const json& a = s.at("arena");
      if (a.is_number()) {
        const double h = a.get<double>() / 2;
        c.sphere.arena = {-h, h, -h, h};
      } else {
        c.sphere.arena = detail::read_rect(a);
      }
    }
    read(s, "lag", c.sphere.lag);
    read(s, "gravity", c.sphere.gravity);
    read(s, "damping", c.sphere.damping);
    read(s, "radius", c.sphere.radius);
    read(s, "lateral", c.sphere.lateral);
    read(s, "omega_max", c.sphere.omega_max);
    read(s, "motor_noise", c.sphere.motor_noise);
    read(s, "speed_ref", c.sphere.speed_ref);
    read(s, "wall_kick", c.sphere.wall_kick);
    if (s.contains("terrain")) {
      c.sphere.terrain.clear();
      for (const json& t : s.at("terrain")) {
        TerrainPatch p;
        p.name = t.at("name").get<std::string>();
        p.area = detail::read_rect(t.at("area"));
        read(t, "speed_factor", p.speed_factor);
        read(t, "lag_factor", p.lag_factor);
        read(t, "mass_limit", p.mass_limit);
        c.sphere.terrain.push_back(p);
      }
    }
  }

  if (j.contains("synth")) {
    const json& s = j.at("synth");
    read(s, "switch_every", c.synth.switch_every);
    read(s, "noise_sd", c.synth.noise_sd);
    read(s, "steps", c.synth_steps);
    if (s.contains("rotation")) {
      const json& r = s.at("rotation");
      c.synth.regimes = rotation_regimes(r.at("count").get<int>(), r.at("dim").get<int>(), r.at("radius").get<double>(),
                                         r.at("angles").get<std::vector<double>>());
      c.sensors = synth_sensors(static_cast<int>(c.synth.regimes.front().A.rows()));
      c.dep.in_dim = c.sensors.proprio_dim;
      c.dep.out_dim = static_cast<int>(c.synth.regimes.front().B.cols());
    }
    if (s.contains("regimes")) {
      c.synth.regimes.clear();
      for (const json& r : s.at("regimes"))
        c.synth.regimes.push_back({detail::read_matrix(r.at("A")), detail::read_matrix(r.at("B"))});
      c.sensors = synth_sensors(static_cast<int>(c.synth.regimes.front().A.rows()));
      c.dep.in_dim = c.sensors.proprio_dim;
      c.dep.out_dim = static_cast<int>(c.synth.regimes.front().B.cols());
    }
  }

  if (j.contains("sensors")) {
    const json& s = j.at("sensors");
    read(s, "delay", c.sensors.delay);
    read(s, "delta_window", c.sensors.delta_window);
    read(s, "noise_sd", c.sensors.noise_sd);
    if (s.contains("delta_scale")) c.sensors.delta_scale = detail::read_vector(s.at("delta_scale"));
  }

  if (j.contains("dep")) {
    const json& d = j.at("dep");
    read(d, "eps_w", c.dep.eps_w);
    read(d, "kappa", c.dep.kappa);
    read(d, "tau_h", c.dep.tau_h);
    read(d, "bias_mag", c.dep.bias_mag);
    read(d, "reg_p", c.dep.reg_p);
    if (d.contains("norm_mode")) c.dep.norm = norm_mode_from_name(d.at("norm_mode").get<std::string>());
    if (d.contains("M")) c.dep.M = detail::read_matrix(d.at("M"));
    if (d.contains("bias_groups")) {
      c.dep.groups.clear();
      for (const json& g : d.at("bias_groups"))
        c.dep.groups.push_back({g.at("motors").get<std::vector<int>>(), g.at("signs").get<std::vector<double>>()});
    }
  }

  if (j.contains("engine")) {
    const json& e = j.at("engine");
    read(e, "theta", c.engine.theta);
    read(e, "search_min", c.engine.search_min);
    read(e, "search_max", c.engine.search_max);
    read(e, "search_window", c.engine.search_window);
    read(e, "window", c.engine.window);
    read(e, "timer_period", c.engine.timer_period);
    read(e, "replan_interval", c.engine.replan_interval);
    read(e, "horizon", c.engine.planner.horizon);
    c.engine.planner.default_duration = c.engine.search_min;
  }

  if (j.contains("learning")) {
    const json& l = j.at("learning");
    read(l, "eps_b", c.learning.eps_b);
    read(l, "eps_f", c.learning.eps_f);
    read(l, "eps_p", c.learning.eps_p);
    read(l, "l1", c.learning.l1);
    read(l, "eps_e", c.learning.eps_e);
    read(l, "error_init", c.learning.error_init);
    read(l, "buffer", c.learning.buffer);
    read(l, "replay_draws", c.learning.replay_draws);
    read(l, "motor_inputs", c.learning.motor_inputs);
  }

  if (j.contains("protocol")) {
    const json& p = j.at("protocol");
    read(p, "episodes", c.protocol.episodes);
    read(p, "exploration_steps", c.protocol.exploration_steps);
    read(p, "training_goals", c.protocol.training_goals);
    read(p, "testing_goals", c.protocol.testing_goals);
    read(p, "goal_timeout", c.protocol.goal_timeout);
    read(p, "goal_distance", c.protocol.goal_distance);
    read(p, "goal_radius", c.protocol.goal_radius);
    read(p, "cruise_speed", c.protocol.cruise_speed);
    read(p, "pool_size", c.protocol.pool_size);
  }

  if (j.contains("terrain")) {
    const json& t = j.at("terrain");
    read(t, "exploration_steps_per_zone", c.terrain.exploration_steps_per_zone);
    read(t, "zone_arena", c.terrain.zone_arena);
    read(t, "course_timeout", c.terrain.course_timeout);
    read(t, "training_runs", c.terrain.training_runs);
    read(t, "testing_runs", c.terrain.testing_runs);
  }

  c.sensors.validate();
  c.dep.validate();
  if (c.sensors.delta_scale.size() != c.sensors.obs_dim())
    throw std::invalid_argument("sensors.delta_scale must have one entry per observation channel");
  if (c.protocol.episodes < 1) throw std::invalid_argument("protocol.episodes must be positive");
  if (c.engine.planner.horizon < 1) throw std::invalid_argument("engine.horizon must be positive");
  return c;
}

inline json config_to_json(const ExperimentConfig& c) {
  json j;
  j["env"] = env_name(c.env);
  j["seed"] = c.seed;
  j["ablation"] = ablation_name(c.ablation);
  j["sensors"] = {{"delay", c.sensors.delay},
                  {"delta_window", c.sensors.delta_window},
                  {"noise_sd", c.sensors.noise_sd},
                  {"delta_scale", detail::write_vector(c.sensors.scale())}};
  j["dep"] = {{"eps_w", c.dep.eps_w},   {"kappa", c.dep.kappa},       {"tau_h", c.dep.tau_h},
              {"bias_mag", c.dep.bias_mag}, {"reg_p", c.dep.reg_p},
              {"norm_mode", norm_mode_name(c.dep.norm)}};
  if (c.dep.M.size()) j["dep"]["M"] = detail::write_matrix(c.dep.M);
  j["engine"] = {{"theta", c.engine.theta},
                 {"search_min", c.engine.search_min},
                 {"search_max", c.engine.search_max},
                 {"search_window", c.engine.search_window},
                 {"window", c.engine.window},
                 {"timer_period", c.engine.timer_period},
                 {"replan_interval", c.engine.replan_interval},
                 {"horizon", c.engine.planner.horizon}};
  j["learning"] = {{"eps_b", c.learning.eps_b},   {"eps_f", c.learning.eps_f},
                   {"eps_p", c.learning.eps_p},   {"l1", c.learning.l1},
                   {"eps_e", c.learning.eps_e},   {"error_init", c.learning.error_init},
                   {"buffer", c.learning.buffer}, {"replay_draws", c.learning.replay_draws},
                   {"motor_inputs", c.learning.motor_inputs}};
  j["protocol"] = {{"episodes", c.protocol.episodes},
                   {"exploration_steps", c.protocol.exploration_steps},
                   {"training_goals", c.protocol.training_goals},
                   {"testing_goals", c.protocol.testing_goals},
                   {"goal_timeout", c.protocol.goal_timeout},
                   {"goal_distance", c.protocol.goal_distance},
                   {"goal_radius", c.protocol.goal_radius},
                   {"cruise_speed", c.protocol.cruise_speed},
                   {"pool_size", c.protocol.pool_size}};
  return j;
}

//! Reads a config file; errors carry the file path.
inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open config");
  try {
    json j = json::parse(in);
    return config_from_json(j);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace submodes
