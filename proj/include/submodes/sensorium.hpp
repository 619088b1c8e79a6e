#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "submodes/linear_net.hpp"

namespace submodes {

//! Uncorrupted sensor readings produced by an environment for one step.
struct RawSensors {
  Vec proprio;                    // proprioceptive channels
  std::optional<double> heading;  // radians, world frame
  std::optional<double> speed;    // normalized translational speed
};

struct SensorConfig {
  int proprio_dim = 3;
  int delay = 0;            // 0 disables the delayed copy
  int delta_window = 1;     // 1: one-step difference, >1: mean of the last window differences
  double noise_sd = 0.05;   // added once to proprio channels at observation time
  bool pose = true;         // append sin(heading), cos(heading), speed
  Vec delta_scale;          // per observation channel; empty means all ones

  int obs_dim() const { return proprio_dim * (delay > 0 ? 2 : 1) + (pose ? 3 : 0); }
  int history_length() const { return std::max({delay, delta_window, 25}) + 1; }

  //! Index of the first pose channel (sin heading).
  int pose_offset() const { return proprio_dim * (delay > 0 ? 2 : 1); }

  void validate() const {
    if (proprio_dim <= 0) throw std::invalid_argument("sensor proprio_dim must be positive");
    if (delay < 0) throw std::invalid_argument("sensor delay must be non-negative");
    if (delta_window < 1) throw std::invalid_argument("sensor delta_window must be at least 1");
    if (noise_sd < 0) throw std::invalid_argument("sensor noise_sd must be non-negative");
    if (delta_scale.size() != 0 && delta_scale.size() != obs_dim())
      throw std::invalid_argument("sensor delta_scale has " + std::to_string(delta_scale.size()) +
                                  " entries, observation has " + std::to_string(obs_dim()));
  }

  Vec scale() const { return delta_scale.size() == 0 ? Vec::Ones(obs_dim()) : delta_scale; }
};

struct SensorState {
  Vec x;
  long t = 0;
  bool warm = false;  // every delayed channel refers to a real past observation
};

//! Ring of recent observations; oldest entries drop off once full.
class SensorHistory {
 public:
  explicit SensorHistory(std::size_t capacity = 26) : capacity_(capacity) {}

  void push(SensorState s) {
    items_.push_back(std::move(s));
    if (items_.size() > capacity_) items_.pop_front();
  }
  void clear() { items_.clear(); }
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }

  //! k steps back from the newest entry (k = 0 is the newest).
  const SensorState& back(std::size_t k) const {
    if (k >= items_.size()) throw std::out_of_range("sensor history lookback");
    return items_[items_.size() - 1 - k];
  }

 private:
  std::size_t capacity_;
  std::deque<SensorState> items_;
};

//! Builds x(t); history holds previous observations, newest last. The result is not pushed.
inline SensorState make_observation(const RawSensors& raw, const SensorConfig& cfg, const SensorHistory& history,
                                    long t, Rng& rng) {
  if (raw.proprio.size() != cfg.proprio_dim)
    throw std::invalid_argument("raw proprio has " + std::to_string(raw.proprio.size()) + " channels, expected " +
                                std::to_string(cfg.proprio_dim));
  if (cfg.pose && (!raw.heading || !raw.speed)) throw std::invalid_argument("pose channels configured but missing");
  const int p = cfg.proprio_dim;
  SensorState s;
  s.t = t;
  s.x = Vec::Zero(cfg.obs_dim());
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int i = 0; i < p; ++i) s.x[i] = raw.proprio[i] + (cfg.noise_sd > 0 ? cfg.noise_sd * noise(rng) : 0.0);
  s.warm = true;
  if (cfg.delay > 0) {
    // x(t - delay) is history.back(delay - 1) because x(t) is not yet stored.
    const std::size_t k = static_cast<std::size_t>(cfg.delay - 1);
    if (k < history.size()) {
      s.x.segment(p, p) = history.back(k).x.head(p);
    } else {
      s.warm = false;
    }
  }
  if (cfg.pose) {
    const int o = cfg.pose_offset();
    s.x[o] = std::sin(*raw.heading);
    s.x[o + 1] = std::cos(*raw.heading);
    s.x[o + 2] = *raw.speed;
  }
  return s;
}

struct SensoryDelta {
  Vec dx;
  bool valid = false;  // false during warm-up; dx is then all zeros
};

//! Scaled sensory change at the newest history entry.
inline SensoryDelta sensory_delta(const SensorHistory& history, const SensorConfig& cfg) {
  SensoryDelta d{Vec::Zero(cfg.obs_dim()), false};
  const std::size_t w = static_cast<std::size_t>(cfg.delta_window);
  if (history.size() < w + 1) return d;
  const SensorState& now = history.back(0);
  const SensorState& then = history.back(w);
  if (!now.warm || !then.warm) return d;
  d.dx = cfg.scale().cwiseProduct(now.x - then.x) / static_cast<double>(w);
  d.valid = true;
  return d;
}

}  // namespace submodes
