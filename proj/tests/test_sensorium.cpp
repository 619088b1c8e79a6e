#include <gtest/gtest.h>

#include <cmath>

#include "submodes/sensorium.hpp"

using namespace submodes;

namespace {

RawSensors raw(double a, double b, double heading, double speed) {
  Vec p(2);
  p << a, b;
  return RawSensors{p, heading, speed};
}

SensorConfig quiet(int delay = 0) {
  SensorConfig c;
  c.proprio_dim = 2;
  c.delay = delay;
  c.noise_sd = 0.0;
  return c;
}

}  // namespace

TEST(Sensorium, LayoutWithPoseAndDelay) {
  SensorConfig c = quiet(3);
  EXPECT_EQ(c.obs_dim(), 7);
  EXPECT_EQ(c.pose_offset(), 4);
  c.pose = false;
  EXPECT_EQ(c.obs_dim(), 4);
  c.delay = 0;
  EXPECT_EQ(c.obs_dim(), 2);
}

TEST(Sensorium, PoseChannelsAreSinCosSpeed) {
  Rng rng(1);
  SensorHistory h;
  const SensorState s = make_observation(raw(0.1, -0.2, 0.7, 0.4), quiet(), h, 0, rng);
  ASSERT_EQ(s.x.size(), 5);
  EXPECT_EQ(s.x[0], 0.1);
  EXPECT_EQ(s.x[1], -0.2);
  EXPECT_DOUBLE_EQ(s.x[2], std::sin(0.7));
  EXPECT_DOUBLE_EQ(s.x[3], std::cos(0.7));
  EXPECT_EQ(s.x[4], 0.4);
  EXPECT_TRUE(s.warm);
}

TEST(Sensorium, DelayedChannelsCopyPastNoisyProprio) {
  Rng rng(2);
  SensorConfig c = quiet(2);
  c.noise_sd = 0.05;
  SensorHistory h;
  std::vector<SensorState> seen;
  for (int t = 0; t < 5; ++t) {
    SensorState s = make_observation(raw(t, -t, 0.0, 0.0), c, h, t, rng);
    EXPECT_EQ(s.warm, t >= 2);
    if (t >= 2) {
      EXPECT_EQ(s.x[2], seen[t - 2].x[0]);
      EXPECT_EQ(s.x[3], seen[t - 2].x[1]);
    } else {
      EXPECT_EQ(s.x[2], 0.0);
    }
    seen.push_back(s);
    h.push(s);
  }
}

TEST(Sensorium, NoiseHasConfiguredSpread) {
  Rng rng(3);
  SensorConfig c = quiet();
  c.noise_sd = 0.05;
  SensorHistory h;
  double s2 = 0.0;
  const int n = 20000;
  for (int k = 0; k < n; ++k) {
    const double v = make_observation(raw(0.0, 0.0, 0.0, 0.0), c, h, k, rng).x[0];
    s2 += v * v;
  }
  EXPECT_NEAR(std::sqrt(s2 / n), 0.05, 0.002);
}

TEST(Sensorium, DeltaIsScaledDifference) {
  Rng rng(4);
  SensorConfig c = quiet();
  c.delta_scale = Vec(5);
  c.delta_scale << 2, 3, 1, 1, 0.5;
  SensorHistory h;
  h.push(make_observation(raw(0.1, 0.2, 0.0, 1.0), c, h, 0, rng));
  EXPECT_FALSE(sensory_delta(h, c).valid);
  h.push(make_observation(raw(0.4, 0.1, 0.0, 0.2), c, h, 1, rng));
  const SensoryDelta d = sensory_delta(h, c);
  ASSERT_TRUE(d.valid);
  EXPECT_NEAR(d.dx[0], 0.6, 1e-15);
  EXPECT_NEAR(d.dx[1], -0.3, 1e-15);
  EXPECT_NEAR(d.dx[4], -0.4, 1e-15);
}

TEST(Sensorium, WindowedDeltaAveragesDifferences) {
  Rng rng(5);
  SensorConfig c = quiet();
  c.delta_window = 3;
  SensorHistory h;
  for (int t = 0; t < 4; ++t) h.push(make_observation(raw(t * t, 0.0, 0.0, 0.0), c, h, t, rng));
  const SensoryDelta d = sensory_delta(h, c);
  ASSERT_TRUE(d.valid);
  EXPECT_DOUBLE_EQ(d.dx[0], (9.0 - 0.0) / 3.0);
}

TEST(Sensorium, DeltaWaitsForWarmDelayedChannels) {
  Rng rng(6);
  SensorConfig c = quiet(3);
  SensorHistory h(c.history_length());
  for (int t = 0; t < 4; ++t) {
    h.push(make_observation(raw(t, t, 0.0, 0.0), c, h, t, rng));
    EXPECT_EQ(sensory_delta(h, c).valid, t >= 4);
  }
  h.push(make_observation(raw(4, 4, 0.0, 0.0), c, h, 4, rng));
  EXPECT_TRUE(sensory_delta(h, c).valid);
}

TEST(Sensorium, RejectsInconsistentInput) {
  Rng rng(7);
  SensorHistory h;
  SensorConfig c = quiet();
  EXPECT_THROW(make_observation(RawSensors{Vec::Zero(3), 0.0, 0.0}, c, h, 0, rng), std::invalid_argument);
  EXPECT_THROW(make_observation(RawSensors{Vec::Zero(2), std::nullopt, 0.0}, c, h, 0, rng), std::invalid_argument);
  c.delta_scale = Vec::Ones(2);
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_THROW(h.back(0), std::out_of_range);
}
