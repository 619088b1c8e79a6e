// Command-line front end: exploration runs, full protocol, ablation sweeps,
// segmentation on the synthetic regimes, and planner traces.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "submodes/runner/config.hpp"
#include "submodes/runner/experiment.hpp"
#include "submodes/runner/logs.hpp"
#include "submodes/runner/terrain.hpp"

namespace fs = std::filesystem;
using namespace submodes;

namespace {

struct Common {
  std::string config;
  std::string out = "out";
  long seed = -1;
  int episodes = -1;
};

ExperimentConfig load(const Common& c, EnvKind fallback) {
  ExperimentConfig cfg = c.config.empty() ? default_config(fallback) : load_config(c.config);
  if (c.seed >= 0) cfg.seed = static_cast<std::uint64_t>(c.seed);
  if (c.episodes > 0) cfg.protocol.episodes = c.episodes;
  return cfg;
}

fs::path out_dir(const Common& c) {
  fs::path p(c.out);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw std::runtime_error(p.string() + ": " + ec.message());
  return p;
}

void write_snapshot(const fs::path& dir, const Engine& eng, const ExperimentConfig& cfg) {
  std::ofstream os = open_output((dir / "snapshot.json").string());
  os << snapshot_json(eng, cfg).dump(1) << '\n';
}

double mean(const std::vector<double>& v) { return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
}

int cmd_explore(const Common& c, long steps) {
  ExperimentConfig cfg = load(c, EnvKind::PlanarSphere);
  const fs::path dir = out_dir(c);
  std::ofstream events = open_output((dir / "events.jsonl").string());
  std::ofstream stepsf = open_output((dir / "steps.csv").string());
  std::ofstream traj = open_output((dir / "trajectory.csv").string());
  Runner r(cfg, {&events, &stepsf, &traj, nullptr});
  PlanarSphereEnv env(cfg.sphere);
  r.explore(env, steps > 0 ? steps : cfg.protocol.exploration_steps);
  write_snapshot(dir, r.agent().engine(), cfg);
  std::cout << "models " << r.agent().engine().graph().size() << "\n";
  return 0;
}

int cmd_run(const Common& c, bool traces) {
  ExperimentConfig cfg = load(c, EnvKind::PlanarSphere);
  const fs::path dir = out_dir(c);
  std::ofstream events = open_output((dir / "events.jsonl").string());
  std::ofstream metrics = open_output((dir / "metrics.csv").string());
  std::ofstream traj, stepsf, plans;
  RunSinks sinks{&events, nullptr, nullptr, nullptr};
  if (traces) {
    traj = open_output((dir / "trajectory.csv").string());
    stepsf = open_output((dir / "steps.csv").string());
    sinks.trajectory = &traj;
    sinks.steps = &stepsf;
  }
  Runner r(cfg, sinks);
  for (const EpisodeResult& e : r.run_protocol(&metrics))
    std::cout << "episode " << e.episode << " models " << e.models_end << " reach " << e.reach_rate() << " time "
              << e.mean_time_s() << "s\n";
  write_snapshot(dir, r.agent().engine(), cfg);
  return 0;
}

int cmd_plan_trace(const Common& c) {
  ExperimentConfig cfg = load(c, EnvKind::PlanarSphere);
  const fs::path dir = out_dir(c);
  std::ofstream events = open_output((dir / "events.jsonl").string());
  std::ofstream plans = open_output((dir / "plans.jsonl").string());
  std::ofstream metrics = open_output((dir / "metrics.csv").string());
  Runner r(cfg, {&events, nullptr, nullptr, &plans});
  r.run_protocol(&metrics);
  return 0;
}

int cmd_ablate(const Common& c, int seeds) {
  ExperimentConfig base = load(c, EnvKind::PlanarSphere);
  const fs::path dir = out_dir(c);
  std::ofstream metrics = open_output((dir / "metrics.csv").string());
  write_metrics_header(metrics);
  std::ofstream summary = open_output((dir / "summary.csv").string());
  summary << "# submodes ablation summary v" << kMetricsVersion << "\n";
  summary << "ablation,seeds,mean_reach_rate,se_reach_rate,mean_time_s\n";
  for (Ablation a : {Ablation::Full, Ablation::NoTransitionModels, Ablation::RandomSegmentation,
                     Ablation::RandomControllers}) {
    std::vector<double> rates, times;
    for (int s = 0; s < seeds; ++s) {
      ExperimentConfig cfg = base;
      cfg.ablation = a;
      cfg.seed = base.seed + s;
      Runner r(cfg);
      std::vector<double> er, et;
      for (const EpisodeResult& e : r.run_protocol()) {
        r.write_metrics_row(metrics, e);
        er.push_back(e.reach_rate());
        et.push_back(e.mean_time_s());
      }
      rates.push_back(mean(er));
      times.push_back(mean(et));
    }
    summary << ablation_name(a) << ',' << seeds << ',' << fmt(mean(rates)) << ',' << fmt(standard_error(rates)) << ','
            << fmt(mean(times)) << '\n';
    std::cout << ablation_name(a) << " reach " << mean(rates) << " +- " << standard_error(rates) << " time "
              << mean(times) << "s\n";
  }
  return 0;
}

int cmd_segment(const Common& c) {
  ExperimentConfig cfg = load(c, EnvKind::SynthRegime);
  if (cfg.env != EnvKind::SynthRegime) throw std::runtime_error("segment needs a synth_regime config");
  const fs::path dir = out_dir(c);
  std::ofstream events = open_output((dir / "events.jsonl").string());
  std::ofstream stepsf = open_output((dir / "steps.csv").string());
  const SegmentationRun run = run_segmentation(cfg, {&events, &stepsf, nullptr, nullptr});
  std::ofstream metrics = open_output((dir / "metrics.csv").string());
  metrics << "# submodes segmentation v" << kMetricsVersion << "\n";
  metrics << "recall,precision,purity,models,boundaries,detected\n";
  metrics << fmt(run.score.recall) << ',' << fmt(run.score.precision) << ',' << fmt(run.score.purity) << ','
          << run.models << ',' << run.truth.size() << ',' << run.detected.size() << '\n';
  std::cout << "recall " << run.score.recall << " precision " << run.score.precision << " purity "
            << run.score.purity << " models " << run.models << "\n";
  return 0;
}

int cmd_terrain(const Common& c, Ablation a) {
  ExperimentConfig cfg = load(c, EnvKind::TerrainCourse);
  cfg.ablation = a;
  const fs::path dir = out_dir(c);
  std::ofstream events = open_output((dir / "events.jsonl").string());
  std::ofstream traj = open_output((dir / "trajectory.csv").string());
  const TerrainResult res = run_terrain(cfg, {&events, nullptr, &traj, nullptr});
  std::ofstream metrics = open_output((dir / "metrics.csv").string());
  write_terrain_metrics(metrics, res);
  std::cout << "completion " << res.completion_rate() << " models " << res.models << "\n";
  for (const auto& [zone, u] : res.usage)
    std::cout << zone << " native share " << u.share() << " over " << u.planning_steps << " planning steps\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Behavior segmentation, transition learning and planning on simulated bodies"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "Override the config seed");
    sub->add_option("--out", common.out, "Output directory");
    sub->add_option("--episodes", common.episodes, "Override the episode count");
  };

  long steps = 0;
  auto* explore = app.add_subcommand("explore", "Exploration only; writes events, steps, trajectory, snapshot");
  add_common(explore);
  explore->add_option("--steps", steps, "Exploration steps");

  bool traces = false;
  auto* run = app.add_subcommand("run", "Full protocol on the rolling sphere");
  add_common(run);
  run->add_flag("--traces", traces, "Also write per-step and trajectory CSVs");

  int seeds = 5;
  auto* ablate = app.add_subcommand("ablate", "All ablations over several seeds");
  add_common(ablate);
  ablate->add_option("--seeds", seeds, "Number of seeds");

  auto* segment = app.add_subcommand("segment", "Segmentation of the synthetic regime system");
  add_common(segment);

  auto* plan = app.add_subcommand("plan-trace", "Full protocol with one JSON line per planning decision");
  add_common(plan);

  std::string ablation = "full";
  auto* terrain = app.add_subcommand("terrain", "Zone exploration followed by the terrain course");
  add_common(terrain);
  terrain->add_option("--ablation", ablation, "full or no_transition_models");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*explore) return cmd_explore(common, steps);
    if (*run) return cmd_run(common, traces);
    if (*ablate) return cmd_ablate(common, seeds);
    if (*segment) return cmd_segment(common);
    if (*plan) return cmd_plan_trace(common);
    if (*terrain) return cmd_terrain(common, ablation_from_name(ablation));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
