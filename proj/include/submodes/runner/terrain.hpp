#pragma once

#include <map>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "submodes/runner/experiment.hpp"

namespace submodes {

struct TerrainResult {
  int models = 0;
  std::vector<bool> completed;  // testing runs over the course
  std::map<std::string, ZoneUsage> usage;
  std::vector<std::string> model_zones;

  double completion_rate() const {
    if (completed.empty()) return 0.0;
    int n = 0;
    for (bool c : completed) n += c;
    return static_cast<double>(n) / completed.size();
  }
};

//! Square arena covered entirely by one patch of the named zone.
inline SphereParams zone_arena(const ExperimentConfig& cfg, const TerrainPatch& zone) {
  SphereParams p = cfg.sphere;
  const double h = cfg.terrain.zone_arena / 2;
  p.arena = {-h, h, -h, h};
  TerrainPatch z = zone;
  z.area = p.arena;
  p.terrain = {z};
  return p;
}

//! One pass over the course: first goal at the cave exit, second inside the snow field.
inline bool course_run(Runner& r, PlanarSphereEnv& course, Rng& rng, const std::string& phase) {
  const ExperimentConfig& cfg = r.config();
  const TerrainPatch& cave = cfg.sphere.terrain.at(0);
  const TerrainPatch& snow = cfg.sphere.terrain.at(2);
  std::uniform_real_distribution<double> u(0.25, 0.75);
  const double sx = snow.area.xmin + u(rng) * (snow.area.xmax - snow.area.xmin);
  const double sy = snow.area.ymin + u(rng) * (snow.area.ymax - snow.area.ymin);
  course.reset(rng, cave.area.cx(), cave.area.cy());
  r.agent().reset_stream();
  const double radius = 3.0;
  GoalOutcome g1 = r.reach(course, cave.area.xmax - radius, cave.area.cy(), cfg.terrain.course_timeout, radius, phase,
                           false);
  if (!g1.reached) return false;
  GoalOutcome g2 = r.reach(course, sx, sy, cfg.terrain.course_timeout - g1.steps, radius, phase, false);
  return g2.reached;
}

//! Explores each zone in its own arena, then trains and tests on the combined course.
inline TerrainResult run_terrain(const ExperimentConfig& cfg, RunSinks sinks = {}) {
  Runner r(cfg, sinks);
  Rng rng(cfg.seed * 7919ULL + 3);
  for (const TerrainPatch& zone : cfg.sphere.terrain) {
    PlanarSphereEnv env(zone_arena(cfg, zone));
    r.explore(env, cfg.terrain.exploration_steps_per_zone, "exploration");
  }
  PlanarSphereEnv course(cfg.sphere);
  for (int k = 0; k < cfg.terrain.training_runs; ++k) course_run(r, course, rng, "training");
  r.clear_zone_usage();
  const Engine saved = r.agent().engine();
  r.agent().engine().set_learning(false);
  TerrainResult res;
  for (int k = 0; k < cfg.terrain.testing_runs; ++k) res.completed.push_back(course_run(r, course, rng, "testing"));
  r.agent().engine() = saved;
  r.agent().engine().set_learning(true);
  res.models = r.agent().engine().graph().size();
  res.usage = r.zone_usage();
  res.model_zones = r.model_zones();
  return res;
}

inline void write_terrain_metrics(std::ostream& os, const TerrainResult& res) {
  os << "# submodes terrain v" << kMetricsVersion << "\n";
  os << "zone,planning_steps,native_steps,native_share\n";
  for (const auto& [zone, u] : res.usage)
    os << zone << ',' << u.planning_steps << ',' << u.native_steps << ',' << fmt(u.share()) << '\n';
  os << "completion_rate," << fmt(res.completion_rate()) << ",models," << res.models << '\n';
}

}  // namespace submodes
