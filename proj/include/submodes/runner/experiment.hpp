#pragma once

#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "submodes/agent.hpp"
#include "submodes/envs/planar_sphere.hpp"
#include "submodes/envs/synth_regime.hpp"
#include "submodes/runner/config.hpp"
#include "submodes/runner/logs.hpp"
#include "submodes/runner/segmentation.hpp"

namespace submodes {

struct RunSinks {
  std::ostream* events = nullptr;
  std::ostream* steps = nullptr;
  std::ostream* trajectory = nullptr;
  std::ostream* plans = nullptr;
};

//! Builds the agent for the configured ablation.
inline Agent make_agent(const ExperimentConfig& c, Rng& rng) {
  EngineParams ep = c.engine;
  ep.planner.delta_scale = c.sensors.scale();
  ep.planner.default_duration = ep.search_min;
  if (c.env != EnvKind::SynthRegime && c.sensors.pose) {
    // Axis projections and heading components are unit bounded; speed lies in [0, v_max].
    const int n = c.sensors.obs_dim();
    const int o = c.sensors.pose_offset();
    ep.planner.state_min = Vec::Constant(n, -1.0);
    ep.planner.state_max = Vec::Constant(n, 1.0);
    ep.planner.state_min[o + 2] = 0.0;
    ep.planner.state_max[o + 2] = c.sphere.v_max();
  }
  BehaviorGraph g(c.sensors.obs_dim(), c.dep.out_dim, c.learning);
  auto fill_pool = [&](bool random_motor) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < c.protocol.pool_size; ++k) {
      const int id = g.create_model(rng, 0);
      if (!random_motor) continue;
      BehavioralModel& m = g.models[id];
      for (int r = 0; r < m.motor_dim; ++r)
        for (int col = 0; col < m.obs_dim; ++col)
          if (!m.net.weight_masked(r, col)) m.net.weights()(r, col) = u(rng);
      m.freeze_motor();
    }
  };
  switch (c.ablation) {
    case Ablation::Full:
      break;
    case Ablation::NoTransitionModels:
      ep.planner.use_transitions = false;
      ep.record_transitions = false;
      break;
    case Ablation::RandomSegmentation:
      fill_pool(false);
      ep.segmentation = Segmentation::Timer;
      ep.allow_creation = false;
      break;
    case Ablation::RandomControllers:
      fill_pool(true);
      ep.segmentation = Segmentation::Timer;
      ep.policy = ExplorationPolicy::ActiveModel;
      ep.allow_creation = false;
      break;
  }
  Engine eng(std::move(g), DepController(c.dep), ep, rng);
  return Agent(c.sensors, std::move(eng));
}

struct GoalOutcome {
  bool reached = false;
  long steps = 0;
};

struct EpisodeResult {
  int episode = 0;
  int models_start = 0;
  int models_after_exploration = 0;
  int models_end = 0;
  std::vector<GoalOutcome> training;
  std::vector<GoalOutcome> testing;

  double reach_rate() const {
    if (testing.empty()) return 0.0;
    int n = 0;
    for (const auto& g : testing) n += g.reached;
    return static_cast<double>(n) / testing.size();
  }
  //! Mean testing time in seconds; unreached goals count as the timeout.
  double mean_time_s() const {
    if (testing.empty()) return 0.0;
    double s = 0.0;
    for (const auto& g : testing) s += g.steps * 0.02;
    return s / testing.size();
  }
  int discovered() const { return models_after_exploration - models_start; }
};

struct ZoneUsage {
  long planning_steps = 0;
  long native_steps = 0;  // active model was first created in this zone
  double share() const { return planning_steps ? static_cast<double>(native_steps) / planning_steps : 0.0; }
};

inline void write_metrics_header(std::ostream& os) {
  os << "# submodes metrics v" << kMetricsVersion << "\n";
  os << "ablation,seed,episode,models,discovered,train_reached,test_reached,test_goals,reach_rate,mean_time_s\n";
}

//! Runs agents through the rolling-sphere protocols while writing logs.
class Runner {
 public:
  explicit Runner(ExperimentConfig cfg, RunSinks sinks = {})
      : cfg_(std::move(cfg)), sinks_(sinks), agent_rng_(cfg_.seed * 2654435761ULL + 17),
        env_rng_(cfg_.seed * 40503ULL + 911) {
    agent_ = make_agent(cfg_, agent_rng_);
    model_zone_.assign(agent_.engine().graph().size(), "");
    if (sinks_.steps) write_step_header(*sinks_.steps);
    if (sinks_.trajectory) write_trajectory_header(*sinks_.trajectory);
  }

  Agent& agent() { return agent_; }
  const ExperimentConfig& config() const { return cfg_; }
  long time() const { return t_; }
  const std::map<std::string, ZoneUsage>& zone_usage() const { return zone_usage_; }
  const std::vector<std::string>& model_zones() const { return model_zone_; }
  void clear_zone_usage() { zone_usage_.clear(); }

  //! Exploration phase; returns the number of steps taken.
  long explore(PlanarSphereEnv& env, long steps, const std::string& phase = "exploration") {
    env.reset(env_rng_);
    agent_.reset_stream();
    agent_.engine().set_mode(Mode::Exploration);
    for (long k = 0; k < steps; ++k) step(env, nullptr, phase);
    return steps;
  }

  //! Drives toward (gx, gy) with planning until within radius or timeout.
  GoalOutcome reach(PlanarSphereEnv& env, double gx, double gy, long timeout, double radius,
                    const std::string& phase, bool reset = true) {
    if (reset) {
      env.reset(env_rng_);
      agent_.reset_stream();
    }
    agent_.engine().set_mode(Mode::Planning);
    GoalOutcome out;
    for (long k = 0; k < timeout; ++k) {
      const GoalSpec goal = env.goal_toward(gx, gy, agent_.sensors(), cfg_.protocol.cruise_speed);
      step(env, &goal, phase);
      out.steps = k + 1;
      if (env.distance_to(gx, gy) <= radius) {
        out.reached = true;
        return out;
      }
    }
    return out;
  }

  GoalOutcome reach_random_goal(PlanarSphereEnv& env, const std::string& phase) {
    std::uniform_real_distribution<double> ang(-M_PI, M_PI);
    const double a = ang(env_rng_);
    const Rect& ar = cfg_.sphere.arena;
    const double gx = ar.cx() + cfg_.protocol.goal_distance * std::cos(a);
    const double gy = ar.cy() + cfg_.protocol.goal_distance * std::sin(a);
    return reach(env, gx, gy, cfg_.protocol.goal_timeout, cfg_.protocol.goal_radius, phase);
  }

  //! Exploration, training goals with learning, testing goals with frozen learning.
  EpisodeResult run_episode(PlanarSphereEnv& env, int k) {
    EpisodeResult r;
    r.episode = k;
    episode_ = k;
    r.models_start = agent_.engine().graph().size();
    agent_.engine().set_learning(true);
    explore(env, cfg_.protocol.exploration_steps);
    r.models_after_exploration = agent_.engine().graph().size();
    for (int g = 0; g < cfg_.protocol.training_goals; ++g) r.training.push_back(reach_random_goal(env, "training"));
    const Engine saved = agent_.engine();
    agent_.engine().set_learning(false);
    for (int g = 0; g < cfg_.protocol.testing_goals; ++g) r.testing.push_back(reach_random_goal(env, "testing"));
    agent_.engine() = saved;
    agent_.engine().set_learning(true);
    r.models_end = agent_.engine().graph().size();
    return r;
  }

  std::vector<EpisodeResult> run_protocol(std::ostream* metrics = nullptr) {
    PlanarSphereEnv env(cfg_.sphere);
    std::vector<EpisodeResult> out;
    if (metrics) write_metrics_header(*metrics);
    for (int k = 0; k < cfg_.protocol.episodes; ++k) {
      out.push_back(run_episode(env, k));
      if (metrics) write_metrics_row(*metrics, out.back());
    }
    return out;
  }

  void write_metrics_row(std::ostream& os, const EpisodeResult& r) const {
    int tr = 0, te = 0;
    for (const auto& g : r.training) tr += g.reached;
    for (const auto& g : r.testing) te += g.reached;
    os << ablation_name(cfg_.ablation) << ',' << cfg_.seed << ',' << r.episode << ',' << r.models_end << ','
       << r.discovered() << ',' << tr << ',' << te << ',' << r.testing.size() << ',' << fmt(r.reach_rate()) << ','
       << fmt(r.mean_time_s()) << '\n';
  }

 private:
  void step(PlanarSphereEnv& env, const GoalSpec* goal, const std::string& phase) {
    const Vec y = agent_.step(env.sense(), t_, agent_rng_, goal);
    Engine& eng = agent_.engine();
    const std::string zone = env.zone();
    while (static_cast<int>(model_zone_.size()) < eng.graph().size()) model_zone_.push_back(zone);
    if (t_ == 0 && !model_zone_.empty() && model_zone_[0].empty()) model_zone_[0] = zone;
    const StepInfo& info = eng.info();
    if (info.mode == Mode::Planning && !zone.empty()) {
      ZoneUsage& u = zone_usage_[zone];
      ++u.planning_steps;
      if (model_zone_[info.active] == zone) ++u.native_steps;
    }
    if (sinks_.events)
      for (const Event& e : eng.events()) *sinks_.events << event_json(e, phase, episode_).dump() << '\n';
    if (sinks_.steps) write_step_row(*sinks_.steps, info);
    if (sinks_.trajectory)
      *sinks_.trajectory << t_ << ',' << fmt(env.x()) << ',' << fmt(env.y()) << ',' << fmt(env.heading()) << ','
                         << fmt(env.speed()) << ',' << zone << ',' << info.active << '\n';
    if (sinks_.plans && eng.last_plan()) write_plan(*eng.last_plan(), info);
    env.step(y, env_rng_);
    ++t_;
  }

  void write_plan(const PlanResult& p, const StepInfo& info) {
    json scores = json::array();
    for (const auto& c : p.scores)
      scores.push_back({{"id", c.id}, {"duration", c.duration}, {"end", c.best_end},
                        {"score", std::isfinite(c.score) ? json(c.score) : json(nullptr)}});
    *sinks_.plans << json{{"t", info.t}, {"from", info.active}, {"chosen", p.chosen}, {"applicable", p.applicable},
                          {"scores", scores}}
                         .dump()
                  << '\n';
  }

  ExperimentConfig cfg_;
  RunSinks sinks_;
  Rng agent_rng_;
  Rng env_rng_;
  Agent agent_;
  long t_ = 0;
  int episode_ = 0;
  std::vector<std::string> model_zone_;
  std::map<std::string, ZoneUsage> zone_usage_;
};

struct SegmentationRun {
  SegmentationScore score;
  int models = 0;
  std::vector<long> detected;
  std::vector<long> truth;
};

//! Exploration on the synthetic regime system, scored against its labels.
//! Boundaries are the start times of searches that ended on a different model;
//! steps spent searching are unassigned.
inline SegmentationRun run_segmentation(const ExperimentConfig& cfg, RunSinks sinks = {}) {
  Rng agent_rng(cfg.seed * 2654435761ULL + 17);
  Rng env_rng(cfg.seed * 40503ULL + 911);
  SynthRegimeEnv env(cfg.synth);
  env.reset(env_rng);
  Agent agent = make_agent(cfg, agent_rng);
  agent.engine().set_mode(Mode::Exploration);
  if (sinks.steps) write_step_header(*sinks.steps);
  SegmentationRun run;
  std::vector<int> ids, labels;
  ids.reserve(cfg.synth_steps);
  labels.reserve(cfg.synth_steps);
  int label = env.label();
  for (long t = 0; t < cfg.synth_steps; ++t) {
    const Vec y = agent.step(env.sense(), t, agent_rng);
    const Engine& eng = agent.engine();
    for (const Event& e : eng.events()) {
      if (sinks.events) *sinks.events << event_json(e, "exploration", 0).dump() << '\n';
      if (e.kind == EventKind::SearchResolved && e.from != e.to) run.detected.push_back(eng.last_search_start());
    }
    if (sinks.steps) write_step_row(*sinks.steps, eng.info());
    ids.push_back(eng.searching() ? -1 : eng.active());
    labels.push_back(env.label());
    env.step(y, env_rng);
    if (env.label() != label) {
      if (t + 1 < cfg.synth_steps) run.truth.push_back(t + 1);
      label = env.label();
    }
  }
  run.score = evaluate_segmentation(run.detected, run.truth, ids, labels, cfg.engine.search_max);
  run.models = agent.engine().graph().size();
  return run;
}

}  // namespace submodes
