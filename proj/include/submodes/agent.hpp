#pragma once

#include "submodes/engine.hpp"
#include "submodes/sensorium.hpp"

namespace submodes {

//! Couples the sensor pipeline with the engine: raw readings in, motor command out.
class Agent {
 public:
  Agent() = default;
  Agent(SensorConfig sc, Engine engine)
      : sensors_(std::move(sc)), history_(static_cast<std::size_t>(sensors_.history_length())), engine_(std::move(engine)) {
    sensors_.validate();
  }

  Vec step(const RawSensors& raw, long t, Rng& rng, const GoalSpec* goal = nullptr) {
    SensorState s = make_observation(raw, sensors_, history_, t, rng);
    history_.push(s);
    const SensoryDelta d = sensory_delta(history_, sensors_);
    last_ = history_.back(0);
    last_delta_ = d;
    return engine_.step(last_, d, history_, rng, goal);
  }

  void reset_stream() {
    history_.clear();
    engine_.reset_stream();
  }

  const SensorConfig& sensors() const { return sensors_; }
  const SensorHistory& history() const { return history_; }
  const SensorState& last_observation() const { return last_; }
  const SensoryDelta& last_delta() const { return last_delta_; }
  Engine& engine() { return engine_; }
  const Engine& engine() const { return engine_; }

 private:
  SensorConfig sensors_;
  SensorHistory history_{26};
  Engine engine_;
  SensorState last_;
  SensoryDelta last_delta_;
};

}  // namespace submodes
