#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "submodes/linear_net.hpp"

namespace submodes {

struct LearningParams {
  double eps_b = 0.005;   // behavioral models
  double eps_f = 0.01;    // transition effect models
  double eps_p = 0.05;    // transition probability models
  double l1 = 0.005;      // tanh-head networks
  double eps_e = 0.001;   // error model
  double error_init = 0.05;
  std::size_t buffer = 10000;
  std::size_t replay_draws = 2;
  int motor_inputs = -1;  // leading observation channels visible to motor rows; -1 for all
};

struct Prediction {
  Vec motor;  // y'
  Vec delta;  // scaled sensory change
};

//! Behavioral primitive: from x predicts the motor command and the next sensory change.
struct BehavioralModel {
  int id = 0;
  int obs_dim = 0;
  int motor_dim = 0;
  long created_at = 0;
  LinearNet net;

  BehavioralModel() = default;
  BehavioralModel(int id_, int obs_dim_, int motor_dim_, const LearningParams& lp, Rng& rng, long t = 0)
      : id(id_), obs_dim(obs_dim_), motor_dim(motor_dim_), created_at(t),
        net(obs_dim_, motor_dim_ + obs_dim_, NetParams{Head::Tanh, lp.eps_b, lp.l1, lp.buffer, lp.replay_draws}, rng) {
    if (lp.motor_inputs >= 0 && lp.motor_inputs < obs_dim_) net.limit_row_inputs(0, motor_dim_, lp.motor_inputs);
  }

  Prediction predict(const Vec& x) const {
    Vec out = net.forward(x);
    return {out.head(motor_dim), out.tail(obs_dim)};
  }

  void train(const Vec& x, const Vec& motor, const Vec& delta, Rng& rng) {
    if (motor.size() != motor_dim || delta.size() != obs_dim)
      throw std::invalid_argument("behavioral model target has wrong dimension");
    Vec t(motor_dim + obs_dim);
    t << motor, delta;
    net.train_regression(x, t, rng);
  }

  void copy_motor(const BehavioralModel& other) {
    net.weights().topRows(motor_dim) = other.net.weights().topRows(motor_dim);
    net.bias().head(motor_dim) = other.net.bias().head(motor_dim);
  }

  //! Motor rows stop learning; sensory prediction keeps training.
  void freeze_motor() { net.freeze_rows(0, motor_dim); }
};

//! Sensory prediction error; the motor part is excluded.
inline double step_error(const Vec& predicted_delta, const Vec& observed_delta) {
  if (predicted_delta.size() != observed_delta.size())
    throw std::invalid_argument("prediction and observation differ in dimension");
  return (predicted_delta - observed_delta).norm();
}

//! Mean of the most recent per-step errors.
class ErrorWindow {
 public:
  explicit ErrorWindow(std::size_t length = 25) : len_(length), buf_(length, 0.0) {
    if (length == 0) throw std::invalid_argument("error window length must be positive");
  }
  void push(double e) {
    if (count_ < len_) ++count_;
    buf_[pos_] = e;
    pos_ = (pos_ + 1) % len_;
  }
  void reset() {
    count_ = 0;
    pos_ = 0;
  }
  double mean() const {
    if (count_ == 0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < count_; ++i) s += buf_[(pos_ + len_ - 1 - i) % len_];
    return s / static_cast<double>(count_);
  }
  std::size_t count() const { return count_; }
  std::size_t length() const { return len_; }
  bool full() const { return count_ == len_; }

 private:
  std::size_t len_;
  std::vector<double> buf_;
  std::size_t count_ = 0;
  std::size_t pos_ = 0;
};

//! Running normal model of a behavioral model's windowed error.
struct ErrorModel {
  double mean = 0.05;
  double var = 0.0;
  double eps = 0.001;

  double sd() const { return std::sqrt(var); }
  double threshold(double theta) const { return mean + theta * sd(); }

  void update(double e) {
    mean = (1.0 - eps) * mean + eps * e;
    const double d = e - mean;
    var = (1.0 - eps) * var + eps * d * d;
  }
};

//! Strict test: surprising iff e exceeds mean + theta * sd.
inline bool is_surprise(double e, const ErrorModel& em, double theta) { return e > em.threshold(theta); }

}  // namespace submodes
