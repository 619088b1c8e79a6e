#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "submodes/linear_net.hpp"
#include "submodes/sensorium.hpp"

namespace submodes {

enum class NormMode { Global, Individual };

inline NormMode norm_mode_from_name(const std::string& s) {
  if (s == "global") return NormMode::Global;
  if (s == "individual") return NormMode::Individual;
  throw std::invalid_argument("unknown normalization mode: " + s);
}
inline const char* norm_mode_name(NormMode m) { return m == NormMode::Global ? "global" : "individual"; }

//! One bias neuron: the motors it drives and the sign of each connection.
struct BiasGroup {
  std::vector<int> motors;
  std::vector<double> signs;
};

struct DepParams {
  int in_dim = 3;
  int out_dim = 3;
  double eps_w = 0.1;
  double kappa = 1.5;
  NormMode norm = NormMode::Global;
  double reg_p = 1e-12;
  long tau_h = 5000;  // 0 disables bias dynamics
  double bias_mag = 1.5;
  Mat M;                          // empty: identity
  std::vector<BiasGroup> groups;  // empty: one group per motor

  void validate() const {
    if (in_dim <= 0 || out_dim <= 0) throw std::invalid_argument("dep dimensions must be positive");
    if (M.size() != 0 && (M.rows() != out_dim || M.cols() != in_dim))
      throw std::invalid_argument("dep inverse model must be " + std::to_string(out_dim) + "x" + std::to_string(in_dim));
    if (tau_h < 0) throw std::invalid_argument("dep tau_h must be non-negative");
    for (const auto& g : groups) {
      if (g.motors.size() != g.signs.size()) throw std::invalid_argument("dep bias group motors/signs mismatch");
      for (int m : g.motors)
        if (m < 0 || m >= out_dim) throw std::invalid_argument("dep bias group motor index out of range");
    }
  }
};

//! Global: kappa * W / (|W|_F + p). Individual: each row scaled by kappa / (|W_i| + p).
inline Mat normalize_weights(const Mat& W, double kappa, NormMode mode, double p) {
  if (mode == NormMode::Global) return kappa * W / (W.norm() + p);
  Mat out = W;
  for (int i = 0; i < W.rows(); ++i) out.row(i) = kappa * W.row(i) / (W.row(i).norm() + p);
  return out;
}

//! Self-organizing exploration controller y = tanh(W x + h).
//!
//! The correlation matrix C carries the plasticity dynamics; the motor weights are its normalized
//! image W = normalize(C), recomputed after every learning step.
class DepController {
 public:
  DepController() = default;
  explicit DepController(DepParams p) : p_(std::move(p)) {
    p_.validate();
    if (p_.M.size() == 0) p_.M = Mat::Identity(p_.out_dim, p_.in_dim);
    if (p_.groups.empty())
      for (int i = 0; i < p_.out_dim; ++i) p_.groups.push_back({{i}, {1.0}});
    C_ = Mat::Zero(p_.out_dim, p_.in_dim);
    W_ = Mat::Zero(p_.out_dim, p_.in_dim);
    h_ = Vec::Zero(p_.out_dim);
    accum_ = Vec::Zero(p_.out_dim);
  }

  const DepParams& params() const { return p_; }
  const Mat& weights() const { return W_; }
  const Mat& correlation() const { return C_; }
  const Vec& bias() const { return h_; }
  const Vec& change_accum() const { return accum_; }
  int active_group() const { return active_group_; }
  long steps() const { return steps_; }

  void set_correlation(const Mat& C) {
    C_ = C;
    W_ = normalize_weights(C_, p_.kappa, p_.norm, p_.reg_p);
  }
  void set_bias(const Vec& h) { h_ = h; }

  Vec act(const Vec& x) const {
    if (x.size() < p_.in_dim) throw std::invalid_argument("dep input too short");
    return (W_ * x.head(p_.in_dim) + h_).array().tanh().matrix();
  }

  //! One plasticity step from the recent derivative xd_now and the lagged derivative xd_prev.
  void learn(const Vec& xd_now, const Vec& xd_prev) {
    const Vec ydot = p_.M * xd_now.head(p_.in_dim);
    C_ += p_.eps_w * (ydot * xd_prev.head(p_.in_dim).transpose() - C_);
    Mat next = normalize_weights(C_, p_.kappa, p_.norm, p_.reg_p);
    accum_ += (next - W_).cwiseAbs().rowwise().sum();
    W_ = std::move(next);
  }

  //! Derivatives from the three newest observations; no-op with insufficient history.
  bool learn(const SensorHistory& history) {
    if (history.size() < 3) return false;
    const Vec& x0 = history.back(0).x;
    const Vec& x1 = history.back(1).x;
    const Vec& x2 = history.back(2).x;
    learn(x0 - x1, x1 - x2);
    return true;
  }

  //! Advances the bias clock by one step; toggles activation every tau_h steps.
  void bias_tick(Rng& rng) {
    ++steps_;
    if (p_.tau_h <= 0 || steps_ % p_.tau_h != 0) return;
    if (active_group_ >= 0) {
      h_.setZero();
      active_group_ = -1;
      accum_.setZero();
      return;
    }
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int g = 0; g < static_cast<int>(p_.groups.size()); ++g) {
      double v = 0.0;
      for (int m : p_.groups[g].motors) v += accum_[m];
      if (v < best_val) {
        best_val = v;
        best = g;
      }
    }
    std::bernoulli_distribution coin(0.5);
    const double mag = coin(rng) ? p_.bias_mag : -p_.bias_mag;
    h_.setZero();
    const BiasGroup& g = p_.groups[best];
    for (std::size_t k = 0; k < g.motors.size(); ++k) h_[g.motors[k]] = mag * g.signs[k];
    active_group_ = best;
    accum_.setZero();
  }

 private:
  DepParams p_;
  Mat C_;
  Mat W_;
  Vec h_;
  Vec accum_;
  int active_group_ = -1;
  long steps_ = 0;
};

}  // namespace submodes
