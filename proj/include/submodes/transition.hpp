#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "submodes/behavior.hpp"
#include "submodes/linear_net.hpp"

namespace submodes {

// The effect network's tanh head covers (-1, 1); observed jumps reach magnitude 2 (sin/cos flips).
inline constexpr double kEffectScale = 0.5;

//! Learned statistics of switching from one behavioral model to another.
struct TransitionModel {
  int from = 0;
  int to = 0;
  LinearNet prob;    // P: applicability of the switch given x
  LinearNet effect;  // F: sensory jump accumulated over the switch, scaled by kEffectScale
  long duration_sum = 0;
  long count = 0;

  TransitionModel() = default;
  TransitionModel(int from_, int to_, int obs_dim, const LearningParams& lp, Rng& rng)
      : from(from_), to(to_),
        prob(obs_dim, 1, NetParams{Head::Sigmoid, lp.eps_p, 0.0, lp.buffer, lp.replay_draws}, rng),
        effect(obs_dim, obs_dim, NetParams{Head::Tanh, lp.eps_f, lp.l1, lp.buffer, lp.replay_draws}, rng) {}

  double probability(const Vec& x) const { return prob.forward(x)[0]; }

  double mean_duration(double default_duration) const {
    return count > 0 ? static_cast<double>(duration_sum) / static_cast<double>(count) : default_duration;
  }

  //! Predicted jump in raw observation units.
  Vec jump(const Vec& x) const { return effect.forward(x) / kEffectScale; }
};

//! Search opened at t_init from model `from`; `intended` is set when a plan caused it.
struct PendingTransition {
  int from = 0;
  std::optional<int> intended;
  Vec x_init;
  long t_init = 0;
};

//! Models, their error statistics, and transition edges between every ordered pair.
struct BehaviorGraph {
  int obs_dim = 0;
  int motor_dim = 0;
  LearningParams lp;
  std::vector<BehavioralModel> models;
  std::vector<ErrorModel> errors;
  std::map<std::pair<int, int>, TransitionModel> edges;

  BehaviorGraph() = default;
  BehaviorGraph(int obs, int motor, LearningParams p) : obs_dim(obs), motor_dim(motor), lp(p) {}

  int size() const { return static_cast<int>(models.size()); }

  TransitionModel& edge(int i, int j) {
    auto it = edges.find({i, j});
    if (it == edges.end()) throw std::out_of_range("no transition edge");
    return it->second;
  }
  const TransitionModel& edge(int i, int j) const {
    auto it = edges.find({i, j});
    if (it == edges.end()) throw std::out_of_range("no transition edge");
    return it->second;
  }

  //! Appends a fresh model and error model and registers edges to and from all existing models.
  int create_model(Rng& rng, long t = 0) {
    const int id = size();
    models.emplace_back(id, obs_dim, motor_dim, lp, rng, t);
    errors.push_back(ErrorModel{lp.error_init, 0.0, lp.eps_e});
    for (int j = 0; j < id; ++j) {
      edges.emplace(std::make_pair(id, j), TransitionModel(id, j, obs_dim, lp, rng));
      edges.emplace(std::make_pair(j, id), TransitionModel(j, id, obs_dim, lp, rng));
    }
    return id;
  }
};

struct TransitionUpdate {
  std::optional<int> negative;  // intended target that was not reached
  bool positive = false;        // from -> actual recorded
};

//! Records the outcome of a resolved search that started from pending.from and ended at actual.
inline TransitionUpdate record_transition(BehaviorGraph& g, const PendingTransition& pending, int actual, long t_now,
                                          const Vec& x_now, Rng& rng) {
  TransitionUpdate u;
  if (pending.intended && *pending.intended != actual && *pending.intended != pending.from) {
    g.edge(pending.from, *pending.intended).prob.train_probability(pending.x_init, 0.0, rng);
    u.negative = *pending.intended;
  }
  if (actual == pending.from) return u;
  TransitionModel& tm = g.edge(pending.from, actual);
  tm.prob.train_probability(pending.x_init, 1.0, rng);
  tm.effect.train_regression(pending.x_init, kEffectScale * (x_now - pending.x_init), rng);
  tm.duration_sum += t_now - pending.t_init;
  tm.count += 1;
  u.positive = true;
  return u;
}

}  // namespace submodes
