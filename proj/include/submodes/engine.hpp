#pragma once

#include <deque>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "submodes/behavior.hpp"
#include "submodes/dep.hpp"
#include "submodes/planner.hpp"
#include "submodes/sensorium.hpp"
#include "submodes/transition.hpp"

namespace submodes {

enum class Mode { Exploration, Planning };
inline const char* mode_name(Mode m) { return m == Mode::Exploration ? "exploration" : "planning"; }

enum class EventKind { SurpriseDetected, ModelSwitched, ModelCreated, SearchResolved, TransitionRecorded, TransitionRejected };

inline const char* event_name(EventKind k) {
  switch (k) {
    case EventKind::SurpriseDetected: return "surprise";
    case EventKind::ModelSwitched: return "switch";
    case EventKind::ModelCreated: return "create";
    case EventKind::SearchResolved: return "resolve";
    case EventKind::TransitionRecorded: return "transition";
    case EventKind::TransitionRejected: return "transition_rejected";
  }
  return "?";
}

//! Events that change learned state.
inline bool is_training_event(EventKind k) {
  return k == EventKind::ModelCreated || k == EventKind::TransitionRecorded || k == EventKind::TransitionRejected;
}

struct Event {
  long t = 0;
  EventKind kind = EventKind::SurpriseDetected;
  int from = -1;
  int to = -1;
  double e = 0.0;
  double mean = 0.0;
  double sd = 0.0;
};

// How behavior boundaries are found while exploring.
enum class Segmentation { Surprise, Timer };
// What drives the motors while exploring.
enum class ExplorationPolicy { Dep, ActiveModel };

struct EngineParams {
  double theta = 2.0;
  int search_min = 50;
  int search_max = 700;
  int search_window = 0;  // trailing steps compared during a search; 0 uses every step since it opened
  int window = 25;
  Segmentation segmentation = Segmentation::Surprise;
  ExplorationPolicy policy = ExplorationPolicy::Dep;
  int timer_period = 250;
  int replan_interval = 1;
  bool record_transitions = true;
  bool allow_creation = true;
  PlannerParams planner;
};

//! Per-step bookkeeping exposed for logging.
struct StepInfo {
  long t = 0;
  int active = 0;
  double e = 0.0;
  double mean = 0.0;
  double threshold = 0.0;
  Mode mode = Mode::Exploration;
  bool searching = false;
  bool planned = false;
};

//! The online loop: surprise detection, searching, model training, exploration and planning.
class Engine {
 public:
  Engine() = default;
  Engine(BehaviorGraph graph, DepController dep, EngineParams p, Rng& rng)
      : graph_(std::move(graph)), dep_(std::move(dep)), p_(std::move(p)), window_(static_cast<std::size_t>(p_.window)) {
    if (p_.search_min < 0 || p_.search_max < p_.search_min) throw std::invalid_argument("invalid searching durations");
    if (p_.search_window < 0) throw std::invalid_argument("search_window must be non-negative");
    if (p_.replan_interval < 1) throw std::invalid_argument("replan_interval must be at least 1");
    if (graph_.size() == 0) {
      graph_.create_model(rng, 0);
      settle_ = p_.search_max;
    }
  }

  const BehaviorGraph& graph() const { return graph_; }
  BehaviorGraph& graph() { return graph_; }
  const DepController& dep() const { return dep_; }
  DepController& dep() { return dep_; }
  const EngineParams& params() const { return p_; }
  EngineParams& params() { return p_; }

  int active() const { return active_; }
  bool searching() const { return searching_; }
  int search_steps() const { return t_s_; }
  const std::optional<PendingTransition>& pending() const { return pending_; }
  Mode mode() const { return mode_; }
  bool learning() const { return learning_; }
  const std::vector<Event>& events() const { return events_; }
  const StepInfo& info() const { return info_; }
  const std::optional<PlanResult>& last_plan() const { return last_plan_; }
  //! Start time of the most recently resolved search.
  long last_search_start() const { return last_search_start_; }

  void set_mode(Mode m) { mode_ = m; }
  void set_learning(bool on) { learning_ = on; }

  //! Forces the active model (used by fixed-pool exploration and tests).
  void set_active(int id) {
    if (id < 0 || id >= graph_.size()) throw std::out_of_range("engine: model id");
    active_ = id;
    window_.reset();
  }

  //! Forgets the sensor stream after an environment reset; an open search is abandoned.
  void reset_stream() {
    have_prev_ = false;
    have_pred_ = false;
    window_.reset();
    searching_ = false;
    pending_.reset();
    t_s_ = 0;
    since_switch_ = 0;
    replan_count_ = 0;
  }

  //! One control step. `history` must already contain obs as its newest entry.
  Vec step(const SensorState& obs, const SensoryDelta& delta, const SensorHistory& history, Rng& rng,
           const GoalSpec* goal = nullptr) {
    events_.clear();
    last_plan_.reset();
    t_ = obs.t;
    const bool err_ok = have_prev_ && have_pred_ && delta.valid;
    if (err_ok) window_.push(step_error(pred_delta_, delta.dx));
    const double e = window_.mean();

    if (settle_ > 0 && window_.full() && !is_surprise(e, graph_.errors[active_], p_.theta)) settle_ = 0;
    if (mode_ == Mode::Planning || p_.segmentation == Segmentation::Surprise) {
      if (!searching_ && settle_ == 0 && window_.full() && is_surprise(e, graph_.errors[active_], p_.theta)) {
        emit(EventKind::SurpriseDetected, active_, active_);
        open_search(std::nullopt, obs.x);
      }
      if (searching_) {
        search_tick(obs.x, delta, err_ok, rng);
      } else if (learning_ && err_ok) {
        train_active(delta, rng);
      }
    } else {
      if (learning_ && err_ok) train_active(delta, rng);
      if (++since_switch_ >= p_.timer_period && graph_.size() > 1) {
        std::uniform_int_distribution<int> pick(0, graph_.size() - 2);
        int next = pick(rng);
        if (next >= active_) ++next;
        emit(EventKind::ModelSwitched, active_, next);
        active_ = next;
        window_.reset();
        since_switch_ = 0;
      }
    }

    bool planned = false;
    Vec y;
    if (mode_ == Mode::Exploration) {
      if (p_.policy == ExplorationPolicy::Dep) {
        if (learning_) dep_.learn(history);
        dep_.bias_tick(rng);
        y = dep_.act(obs.x);
      } else {
        y = graph_.models[active_].predict(obs.x).motor;
      }
    } else {
      if (!goal) throw std::invalid_argument("planning mode needs a goal");
      if (!searching_ && settle_ == 0 && (replan_count_++ % p_.replan_interval == 0)) {
        last_plan_ = plan_next(graph_, active_, obs.x, *goal, p_.planner, rng);
        planned = true;
        const int j = last_plan_->chosen;
        if (j != active_) {
          emit(EventKind::ModelSwitched, active_, j);
          open_search(j, obs.x);
          active_ = j;
          window_.reset();
        }
      }
      y = graph_.models[active_].predict(obs.x).motor;
    }

    pred_delta_ = graph_.models[active_].predict(obs.x).delta;
    have_pred_ = true;
    prev_x_ = obs.x;
    prev_y_ = y;
    have_prev_ = true;

    const ErrorModel& em = graph_.errors[active_];
    info_ = {t_, active_, e, em.mean, em.threshold(p_.theta), mode_, searching_, planned};
    return y;
  }

 private:
  void emit(EventKind k, int from, int to) {
    const ErrorModel& em = graph_.errors[active_];
    events_.push_back({t_, k, from, to, window_.mean(), em.mean, em.sd()});
  }

  void open_search(std::optional<int> intended, const Vec& x) {
    searching_ = true;
    t_s_ = 0;
    pending_ = PendingTransition{active_, intended, x, t_};
    search_sum_.assign(graph_.size(), 0.0);
    search_n_.assign(graph_.size(), 0);
    search_recent_.assign(graph_.size(), {});
    replan_count_ = 0;
  }

  void train_active(const SensoryDelta& delta, Rng& rng) {
    graph_.models[active_].train(prev_x_, prev_y_, delta.dx, rng);
    if (settle_ > 0) --settle_;
    if (window_.full()) graph_.errors[active_].update(window_.mean());
  }

  void search_tick(const Vec& x_now, const SensoryDelta& delta, bool err_ok, Rng& rng) {
    ++t_s_;
    if (err_ok) {
      for (int i = 0; i < graph_.size(); ++i) {
        const double err = step_error(graph_.models[i].predict(prev_x_).delta, delta.dx);
        search_sum_[i] += err;
        search_n_[i] += 1;
        if (p_.search_window > 0) {
          std::deque<double>& r = search_recent_[i];
          r.push_back(err);
          if (static_cast<int>(r.size()) > p_.search_window) {
            search_sum_[i] -= r.front();
            search_n_[i] -= 1;
            r.pop_front();
          }
        }
      }
    }
    if (t_s_ <= p_.search_min) return;
    int best = -1;
    double best_mean = 0.0;
    for (int i = 0; i < graph_.size(); ++i) {
      if (search_n_[i] == 0) continue;
      const double m = search_sum_[i] / search_n_[i];
      if (is_surprise(m, graph_.errors[i], p_.theta)) continue;
      if (best < 0 || m < best_mean) {
        best = i;
        best_mean = m;
      }
    }
    if (best >= 0) {
      resolve(best, x_now, rng, true);
    } else if (t_s_ > p_.search_max) {
      if (learning_ && p_.allow_creation) {
        const int id = graph_.create_model(rng, t_);
        // Under planning the driving model keeps producing the motor commands of the new behavior.
        if (mode_ == Mode::Planning) graph_.models[id].copy_motor(graph_.models[active_]);
        emit(EventKind::ModelCreated, active_, id);
        settle_ = p_.search_max;
        resolve(id, x_now, rng, true);
      } else {
        resolve(active_, x_now, rng, false);
      }
    }
  }

  void resolve(int next, const Vec& x_now, Rng& rng, bool record) {
    const PendingTransition pend = *pending_;
    last_search_start_ = pend.t_init;
    if (record && learning_ && p_.record_transitions) {
      TransitionUpdate u = record_transition(graph_, pend, next, t_, x_now, rng);
      if (u.negative) emit(EventKind::TransitionRejected, pend.from, *u.negative);
      if (u.positive) emit(EventKind::TransitionRecorded, pend.from, next);
    }
    searching_ = false;
    pending_.reset();
    if (next != active_) {
      emit(EventKind::ModelSwitched, active_, next);
      active_ = next;
    }
    window_.reset();
    emit(EventKind::SearchResolved, pend.from, next);
    replan_count_ = 0;
  }

  BehaviorGraph graph_;
  DepController dep_;
  EngineParams p_;
  ErrorWindow window_{25};
  Mode mode_ = Mode::Exploration;
  bool learning_ = true;
  int active_ = 0;
  bool searching_ = false;
  int t_s_ = 0;
  std::vector<double> search_sum_;
  std::vector<int> search_n_;
  std::vector<std::deque<double>> search_recent_;
  std::optional<PendingTransition> pending_;
  long t_ = 0;
  long last_search_start_ = -1;
  bool have_prev_ = false;
  bool have_pred_ = false;
  Vec prev_x_;
  Vec prev_y_;
  Vec pred_delta_;
  int settle_ = 0;  // training steps left before a new model may signal surprise; ends once its error is ordinary
  int since_switch_ = 0;
  long replan_count_ = 0;
  std::vector<Event> events_;
  std::optional<PlanResult> last_plan_;
  StepInfo info_;
};

}  // namespace submodes
