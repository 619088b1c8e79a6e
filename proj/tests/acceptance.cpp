// Acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero if any fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "submodes/runner/experiment.hpp"
#include "submodes/runner/logs.hpp"
#include "submodes/runner/terrain.hpp"

using namespace submodes;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double mean(const std::vector<double>& v) { return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1) / v.size());
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome surprise_gate() {
  const auto t0 = std::chrono::steady_clock::now();
  ErrorModel em{0.05, 0.01 * 0.01, 0.001};
  const double theta = 2.0;
  bool ok = std::abs(em.threshold(theta) - 0.07) < 1e-15;
  int checked = 0;
  for (int k = 0; k <= 14000; ++k) {
    const double e = k * 1e-5;
    if (std::abs(e - 0.07) < 1e-12) continue;
    ok &= is_surprise(e, em, theta) == (e > 0.07);
    ++checked;
  }
  const double th = em.threshold(theta);
  ok &= !is_surprise(th, em, theta);
  ok &= is_surprise(std::nextafter(th, 1.0), em, theta);
  ok &= !is_surprise(std::nextafter(th, 0.0), em, theta);
  const double dt = seconds_since(t0);
  ok &= dt < 1.0;
  return {ok, std::to_string(checked) + " errors plus the boundary, " + num(dt) + " s"};
}

Outcome dep_normalization() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (double kappa : {1.5, 2.2})
    for (NormMode mode : {NormMode::Global, NormMode::Individual}) {
      DepParams p;
      p.kappa = kappa;
      p.norm = mode;
      DepController dep(p);
      Rng rng(static_cast<unsigned>(kappa * 100));
      std::normal_distribution<double> n(0.0, 0.5);
      // Consecutive sensor velocities are correlated, as on a moving body.
      Vec prev(3);
      prev << n(rng), n(rng), n(rng);
      for (int k = 0; k < 1000; ++k) {
        Vec now(3);
        now << n(rng), n(rng), n(rng);
        now += 0.9 * prev;
        dep.learn(now, prev);
        prev = now;
        if (mode == NormMode::Global) {
          worst = std::max(worst, std::abs(dep.weights().norm() - kappa));
        } else {
          for (int r = 0; r < 3; ++r) worst = std::max(worst, std::abs(dep.weights().row(r).norm() - kappa));
        }
      }
    }
  const double dt = seconds_since(t0);
  return {worst <= 1e-9 && dt < 5.0, "max deviation " + num(worst) + ", " + num(dt) + " s"};
}

Outcome error_model_ema() {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  std::vector<double> e(1000);
  for (double& v : e) v = u(rng);
  const LearningParams lp;
  ErrorModel em{lp.error_init, 0.0, lp.eps_e};
  const auto ref = oracle::ema_closed_form(e, lp.error_init, 0.0, lp.eps_e);
  double worst = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    em.update(e[k]);
    worst = std::max(worst, std::abs(em.mean - static_cast<double>(ref.mean[k])));
    worst = std::max(worst, std::abs(em.var - static_cast<double>(ref.var[k])));
  }
  return {worst <= 1e-12, "max deviation " + num(worst)};
}

Outcome planner_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(2024);
  int agree = 0;
  const int n = 200;
  for (int trial = 0; trial < n; ++trial) {
    BehaviorGraph g = oracle::random_graph(gen, 6, 3);
    const int i = std::uniform_int_distribution<int>(0, g.size() - 1)(gen);
    const Vec x = Vec::Random(6);
    PlannerParams pp;
    pp.horizon = 500;
    pp.delta_scale = default_config(EnvKind::PlanarSphere).sensors.scale();
    GoalSpec goal{Vec::Zero(6), {3, 4, 5}};
    goal.target[3] = std::sin(0.3 * trial);
    goal.target[4] = std::cos(0.3 * trial);
    goal.target[5] = 1.0;
    Rng rng(trial);
    const auto ref = oracle::plan_exhaustive(g, i, x, goal, pp, rng);
    const PlanResult got = plan_next(g, i, x, goal, pp, rng);
    agree += got.chosen == ref.chosen;
  }
  const double dt = seconds_since(t0);
  return {agree == n && dt < 30.0, std::to_string(agree) + "/" + std::to_string(n) + " agree, " + num(dt) + " s"};
}

Outcome gradient_checks() {
  Rng rng(7);
  std::normal_distribution<double> nd(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int in = 2 + k % 6, out = 1 + k % 5;
    Vec x(in);
    for (int c = 0; c < in; ++c) x[c] = nd(rng);
    LinearNet reg(in, out, NetParams{Head::Tanh, 0.005, 0.005}, rng);
    reg.weights() = Mat::Random(out, in);
    reg.bias() = Vec::Random(out) * 0.5;
    const Vec t = Vec::Random(out) * 0.9;
    const auto g = reg.regression_gradient(x, t);
    const auto n = oracle::central_difference(reg.weights(), reg.bias(), [&] { return reg.regression_loss(x, t); });
    worst = std::max({worst, oracle::relative_error(g.dW, n.dW), oracle::relative_error(g.db, n.db)});

    LinearNet prob(in, 1, NetParams{Head::Sigmoid, 0.05}, rng);
    prob.weights() = Mat::Random(1, in);
    prob.bias() = Vec::Random(1);
    const Vec target = Vec::Constant(1, k % 2);
    const double w = 0.5 + 0.01 * k;
    const auto gp = prob.probability_gradient(x, target, w);
    const auto np =
        oracle::central_difference(prob.weights(), prob.bias(), [&] { return prob.probability_loss(x, target, w); });
    worst = std::max({worst, oracle::relative_error(gp.dW, np.dW), oracle::relative_error(gp.db, np.db)});
  }
  return {worst <= 1e-6, "max relative error " + num(worst)};
}

Outcome segmentation() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string d;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ExperimentConfig cfg = default_config(EnvKind::SynthRegime);
    cfg.seed = seed;
    const SegmentationRun run = run_segmentation(cfg);
    ok &= run.score.recall >= 0.9 && run.score.purity >= 0.8 && run.models >= 4 && run.models <= 8;
    d += "seed " + std::to_string(seed) + " recall " + num(run.score.recall) + " purity " + num(run.score.purity) +
         " models " + std::to_string(run.models) + "; ";
  }
  const double dt = seconds_since(t0);
  ok &= dt < 120.0;
  return {ok, d + num(dt) + " s"};
}

Outcome search_contracts() {
  const EngineParams defaults = default_config(EnvKind::PlanarSphere).engine;
  auto scenario = [&](bool matching) {
    Rng rng(1);
    LearningParams lp;
    lp.eps_b = 0.0;
    BehaviorGraph g(2, 1, lp);
    for (int k = 0; k < (matching ? 2 : 1); ++k) {
      g.create_model(rng);
      g.models[k].net.weights().setZero();
      g.errors[k] = ErrorModel{0.001, 1e-8, 0.0};
    }
    if (matching) g.errors[1] = ErrorModel{1.0, 0.01, 0.0};
    DepParams dp;
    dp.in_dim = 2;
    dp.out_dim = 1;
    EngineParams p = defaults;
    p.planner.delta_scale = Vec::Ones(2);
    Engine eng(std::move(g), DepController(dp), p, rng);
    SensorHistory h;
    const Vec x = Vec::Zero(2), dx = Vec::Constant(2, 0.5);
    int decided = -1, created = -1, early = 0;
    for (long t = 0; t < 2000 && decided < 0; ++t) {
      SensorState s{x, t, true};
      h.push(s);
      eng.step(s, SensoryDelta{dx, true}, h, rng);
      for (const Event& e : eng.events()) {
        if (e.kind == EventKind::ModelCreated) created = eng.search_steps();
        if (e.kind == EventKind::SearchResolved) {
          decided = eng.search_steps();
          if (decided <= defaults.search_min) ++early;
        }
      }
    }
    return std::array<int, 3>{decided, created, early};
  };
  const auto none = scenario(false);
  const auto match = scenario(true);
  const bool ok = none[0] == defaults.search_max + 1 && none[1] == defaults.search_max + 1 && none[2] == 0 &&
                  match[0] == defaults.search_min + 1 && match[1] < 0 && match[2] == 0;
  return {ok, "creation at t_s=" + std::to_string(none[1]) + ", earliest switch at t_s=" + std::to_string(match[0])};
}

struct AblationRuns {
  std::vector<std::vector<EpisodeResult>> full;
  std::vector<double> rate[4];
  double seconds = 0.0;
};

AblationRuns run_ablations() {
  AblationRuns out;
  const auto t0 = std::chrono::steady_clock::now();
  const Ablation all[4] = {Ablation::Full, Ablation::NoTransitionModels, Ablation::RandomSegmentation,
                           Ablation::RandomControllers};
  for (int a = 0; a < 4; ++a)
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      ExperimentConfig cfg = default_config(EnvKind::PlanarSphere);
      cfg.seed = seed;
      cfg.ablation = all[a];
      Runner r(cfg);
      const auto eps = r.run_protocol();
      std::vector<double> rates;
      for (const auto& e : eps) rates.push_back(e.reach_rate());
      out.rate[a].push_back(mean(rates));
      if (a == 0) out.full.push_back(eps);
    }
  out.seconds = seconds_since(t0);
  return out;
}

Outcome ablation_ordering(const AblationRuns& runs) {
  const char* names[4] = {"full", "no_transition_models", "random_segmentation", "random_controllers"};
  const double full = mean(runs.rate[0]);
  bool ok = runs.seconds < 600.0;
  std::string d = std::string(names[0]) + " " + num(full) + " +- " + num(standard_error(runs.rate[0]));
  for (int a = 1; a < 4; ++a) {
    const double m = mean(runs.rate[a]);
    const double se = std::max(standard_error(runs.rate[0]), standard_error(runs.rate[a]));
    ok &= full - m > se;
    d += "; " + std::string(names[a]) + " " + num(m) + " +- " + num(standard_error(runs.rate[a]));
  }
  return {ok, d + "; " + num(runs.seconds) + " s"};
}

Outcome learning_curve(const AblationRuns& runs) {
  std::vector<double> reach_gain, discovery_drop;
  for (const auto& eps : runs.full) {
    double early = 0, late = 0, d_early = 0, d_late = 0;
    for (int k = 0; k < 5; ++k) {
      early += eps[k].reach_rate() / 5;
      late += eps[k + 5].reach_rate() / 5;
      d_early += eps[k].discovered() / 5.0;
      d_late += eps[k + 5].discovered() / 5.0;
    }
    reach_gain.push_back(late - early);
    discovery_drop.push_back(d_early - d_late);
  }
  const bool ok = mean(reach_gain) > 0 && mean(discovery_drop) > 0;
  return {ok, "paired reach gain " + num(mean(reach_gain)) + ", discovery drop " + num(mean(discovery_drop)) +
                  " models per episode"};
}

Outcome determinism() {
  const ExperimentConfig cfg = default_config(EnvKind::PlanarSphere);
  auto run = [&] {
    std::ostringstream ev;
    Runner r(cfg, {&ev, nullptr, nullptr, nullptr});
    r.run_protocol();
    return ev.str();
  };
  const std::string a = run(), b = run();
  return {!a.empty() && a == b, std::to_string(a.size()) + " bytes of events, identical " + (a == b ? "yes" : "no")};
}

Outcome terrain_gating() {
  std::map<std::string, ZoneUsage> usage;
  std::vector<double> full, ablated;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    ExperimentConfig cfg = default_config(EnvKind::TerrainCourse);
    cfg.seed = seed;
    const TerrainResult res = run_terrain(cfg);
    for (const auto& [zone, u] : res.usage) {
      usage[zone].planning_steps += u.planning_steps;
      usage[zone].native_steps += u.native_steps;
    }
    full.push_back(res.completion_rate());
    cfg.ablation = Ablation::NoTransitionModels;
    ablated.push_back(run_terrain(cfg).completion_rate());
  }
  bool ok = usage.size() == 3 && mean(full) > mean(ablated);
  std::string d;
  for (const auto& [zone, u] : usage) {
    ok &= u.share() >= 0.6;
    d += zone + " native share " + num(u.share()) + "; ";
  }
  return {ok, d + "completion full " + num(mean(full)) + " vs no_transition_models " + num(mean(ablated))};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("criterion %2d %-28s %s  %s\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  };
  report(1, "surprise gate", surprise_gate());
  report(2, "dep normalization", dep_normalization());
  report(3, "error model recurrence", error_model_ema());
  report(4, "planner oracle", planner_oracle());
  report(5, "gradient checks", gradient_checks());
  report(6, "segmentation", segmentation());
  report(7, "searching period", search_contracts());
  const AblationRuns runs = run_ablations();
  report(8, "ablation ordering", ablation_ordering(runs));
  report(9, "learning curve", learning_curve(runs));
  report(10, "determinism", determinism());
  report(11, "terrain gating", terrain_gating());
  std::printf("%d of 11 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
