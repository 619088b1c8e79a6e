#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "submodes/transition.hpp"

namespace submodes {

//! Desired values on a subset of observation channels.
struct GoalSpec {
  Vec target;             // full observation length; only masked channels matter
  std::vector<int> mask;  // channel indices
};

inline double goal_distance(const Vec& x, const GoalSpec& g) {
  double d = 0.0;
  for (int k : g.mask) {
    const double e = g.target[k] - x[k];
    d += e * e;
  }
  return d;
}

struct PlannerParams {
  int horizon = 500;
  bool use_transitions = true;  // false: every edge applicable, zero jump, default duration
  double default_duration = 50.0;
  Vec delta_scale;              // converts predicted scaled changes back to observation units
  Vec state_min;                // optional per-channel bounds on rolled-out states
  Vec state_max;
};

//! Keeps a rolled-out state inside the configured channel bounds.
inline void clamp_state(Vec& s, const PlannerParams& pp) {
  if (pp.state_min.size() == s.size()) s = s.cwiseMax(pp.state_min);
  if (pp.state_max.size() == s.size()) s = s.cwiseMin(pp.state_max);
}

inline constexpr double kInvalidScore = std::numeric_limits<double>::infinity();

struct CandidateScore {
  int id = 0;
  int duration = 0;   // rounded expected switch duration
  int best_end = -1;  // rollout step where the best window ends
  double score = kInvalidScore;
};

struct PlanResult {
  int chosen = 0;
  std::vector<int> applicable;
  std::vector<CandidateScore> scores;
};

//! Rounded expected duration for switching i -> j (0 for staying).
inline int switch_duration(const BehaviorGraph& g, int i, int j, const PlannerParams& pp) {
  if (i == j) return 0;
  if (!pp.use_transitions) return static_cast<int>(std::lround(pp.default_duration));
  return static_cast<int>(std::lround(g.edge(i, j).mean_duration(pp.default_duration)));
}

//! Predicted states x'(u) for u = duration..horizon after committing to j; empty if duration >= horizon.
inline std::vector<Vec> rollout(const BehaviorGraph& g, int i, int j, const Vec& x, const PlannerParams& pp) {
  std::vector<Vec> traj;
  const int tbar = switch_duration(g, i, j, pp);
  if (tbar >= pp.horizon) return traj;
  Vec s = x;
  if (i != j && pp.use_transitions) s += g.edge(i, j).jump(x);
  clamp_state(s, pp);
  const BehavioralModel& m = g.models[j];
  const Mat W = m.net.weights().bottomRows(m.obs_dim);
  const Vec b = m.net.bias().tail(m.obs_dim);
  const Vec inv_scale = pp.delta_scale.size() ? Vec(pp.delta_scale.cwiseInverse()) : Vec::Ones(m.obs_dim);
  traj.reserve(pp.horizon - tbar + 1);
  traj.push_back(s);
  for (int u = tbar; u < pp.horizon; ++u) {
    Vec d = (W * s + b).array().tanh().matrix();
    s += d.cwiseProduct(inv_scale);
    clamp_state(s, pp);
    traj.push_back(s);
  }
  return traj;
}

//! min over window ends tau in (duration, horizon] of sum_{u=duration..tau} D(u) / (tau - duration).
inline CandidateScore score_trajectory(const std::vector<Vec>& traj, int duration, const GoalSpec& goal) {
  CandidateScore c;
  c.duration = duration;
  if (traj.size() < 2) return c;
  double sum = goal_distance(traj[0], goal);
  for (std::size_t k = 1; k < traj.size(); ++k) {
    sum += goal_distance(traj[k], goal);
    const double v = sum / static_cast<double>(k);
    if (v < c.score) {
      c.score = v;
      c.best_end = duration + static_cast<int>(k);
    }
  }
  return c;
}

//! Streaming version of rollout + score_trajectory with no per-step allocation.
inline CandidateScore score_candidate(const BehaviorGraph& g, int i, int j, const Vec& x, const GoalSpec& goal,
                                      const PlannerParams& pp) {
  CandidateScore c;
  c.id = j;
  const int tbar = switch_duration(g, i, j, pp);
  c.duration = tbar;
  if (tbar >= pp.horizon) return c;
  Vec s = x;
  if (i != j && pp.use_transitions) s += g.edge(i, j).jump(x);
  clamp_state(s, pp);
  const BehavioralModel& m = g.models[j];
  const auto W = m.net.weights().bottomRows(m.obs_dim);
  const auto b = m.net.bias().tail(m.obs_dim);
  const Vec inv_scale = pp.delta_scale.size() ? Vec(pp.delta_scale.cwiseInverse()) : Vec::Ones(m.obs_dim);
  Vec z(m.obs_dim);
  double sum = goal_distance(s, goal);
  for (int k = 1; k <= pp.horizon - tbar; ++k) {
    z.noalias() = W * s;
    z += b;
    s.array() += z.array().tanh() * inv_scale.array();
    clamp_state(s, pp);
    sum += goal_distance(s, goal);
    const double v = sum / static_cast<double>(k);
    if (v < c.score) {
      c.score = v;
      c.best_end = tbar + k;
    }
  }
  return c;
}

//! Current model plus every other model whose switch probability passes a Bernoulli draw.
inline std::vector<int> applicable_behaviors(const BehaviorGraph& g, int i, const Vec& x, const PlannerParams& pp,
                                             Rng& rng) {
  std::vector<int> out{i};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int j = 0; j < g.size(); ++j) {
    if (j == i) continue;
    if (!pp.use_transitions) {
      out.push_back(j);
      continue;
    }
    if (u(rng) < g.edge(i, j).probability(x)) out.push_back(j);
  }
  return out;
}

//! Picks the applicable model whose predicted future best approaches the goal; ties go to the lowest id.
inline PlanResult plan_next(const BehaviorGraph& g, int i, const Vec& x, const GoalSpec& goal, const PlannerParams& pp,
                            Rng& rng) {
  if (i < 0 || i >= g.size()) throw std::out_of_range("planner: current model id");
  PlanResult r;
  r.chosen = i;
  if (g.size() == 1) {
    r.applicable = {i};
    return r;
  }
  r.applicable = applicable_behaviors(g, i, x, pp, rng);
  double best = kInvalidScore;
  int best_id = -1;
  for (int j : r.applicable) {
    CandidateScore c = score_candidate(g, i, j, x, goal, pp);
    if (c.score < best || (c.score == best && best_id >= 0 && j < best_id)) {
      best = c.score;
      best_id = j;
    }
    r.scores.push_back(c);
  }
  if (best_id >= 0) r.chosen = best_id;
  return r;
}

}  // namespace submodes
