#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "submodes/sensorium.hpp"

namespace submodes {

//! x(t+1) = x + A x + B y + noise
struct Regime {
  Mat A;
  Mat B;
};

struct SynthRegimeParams {
  std::vector<Regime> regimes;
  int switch_every = 2000;
  double noise_sd = 0.05;
  double min_separation = 0.3;
};

inline double operator_norm(const Mat& M) {
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues()(0);
}

//! Damped rotations in consecutive 2-D planes; motors have no effect.
inline std::vector<Regime> rotation_regimes(int count, int dim, double radius, const std::vector<double>& angles) {
  if (dim % 2 != 0) throw std::invalid_argument("rotation regimes need an even dimension");
  if (static_cast<int>(angles.size()) < count) throw std::invalid_argument("not enough regime angles");
  std::vector<Regime> out;
  for (int k = 0; k < count; ++k) {
    Mat T = Mat::Zero(dim, dim);
    for (int b = 0; b < dim; b += 2) {
      const double a = angles[k] * (b % 4 == 0 ? 1.0 : 0.5);
      T(b, b) = radius * std::cos(a);
      T(b, b + 1) = -radius * std::sin(a);
      T(b + 1, b) = radius * std::sin(a);
      T(b + 1, b + 1) = radius * std::cos(a);
    }
    out.push_back({T - Mat::Identity(dim, dim), Mat::Zero(dim, dim)});
  }
  return out;
}

inline std::vector<Regime> default_regimes() { return rotation_regimes(4, 2, 0.99, {0.16, -0.16, 0.48, -0.48}); }

//! Piecewise-linear system that switches regime on a fixed period and exposes the ground-truth label.
class SynthRegimeEnv {
 public:
  explicit SynthRegimeEnv(SynthRegimeParams p) : p_(std::move(p)) { validate(); }

  int state_dim() const { return static_cast<int>(p_.regimes.front().A.rows()); }
  int motor_dim() const { return static_cast<int>(p_.regimes.front().B.cols()); }
  int label() const { return regime_; }
  long t() const { return t_; }
  const Vec& state() const { return x_; }
  const SynthRegimeParams& params() const { return p_; }

  void reset(Rng& rng) {
    x_ = Vec::Zero(state_dim());
    t_ = 0;
    std::uniform_int_distribution<int> pick(0, static_cast<int>(p_.regimes.size()) - 1);
    regime_ = pick(rng);
  }

  RawSensors sense() const { return RawSensors{x_, std::nullopt, std::nullopt}; }

  void step(const Vec& y, Rng& rng) {
    if (y.size() != motor_dim()) throw std::invalid_argument("synthetic env: motor dimension");
    const Regime& r = p_.regimes[regime_];
    std::normal_distribution<double> n(0.0, 1.0);
    Vec noise(state_dim());
    for (int i = 0; i < noise.size(); ++i) noise[i] = p_.noise_sd * n(rng);
    x_ = x_ + r.A * x_ + r.B * y + noise;
    ++t_;
    if (p_.switch_every > 0 && t_ % p_.switch_every == 0 && p_.regimes.size() > 1) {
      std::uniform_int_distribution<int> pick(0, static_cast<int>(p_.regimes.size()) - 2);
      int next = pick(rng);
      if (next >= regime_) ++next;
      regime_ = next;
    }
  }

 private:
  void validate() const {
    if (p_.regimes.empty()) throw std::invalid_argument("synthetic env needs at least one regime");
    const int n = static_cast<int>(p_.regimes.front().A.rows());
    const int m = static_cast<int>(p_.regimes.front().B.cols());
    for (std::size_t k = 0; k < p_.regimes.size(); ++k) {
      const Regime& r = p_.regimes[k];
      if (r.A.rows() != n || r.A.cols() != n || r.B.rows() != n || r.B.cols() != m)
        throw std::invalid_argument("synthetic env: regime " + std::to_string(k) + " has inconsistent shape");
      Eigen::EigenSolver<Mat> es(Mat::Identity(n, n) + r.A);
      if (es.eigenvalues().cwiseAbs().maxCoeff() >= 1.0)
        throw std::invalid_argument("synthetic env: regime " + std::to_string(k) + " is not contractive");
    }
    for (std::size_t i = 0; i < p_.regimes.size(); ++i)
      for (std::size_t j = i + 1; j < p_.regimes.size(); ++j) {
        Mat Pi(n, n + m), Pj(n, n + m);
        Pi << p_.regimes[i].A, p_.regimes[i].B;
        Pj << p_.regimes[j].A, p_.regimes[j].B;
        if (operator_norm(Pi - Pj) < p_.min_separation)
          throw std::invalid_argument("synthetic env: regimes " + std::to_string(i) + " and " + std::to_string(j) +
                                      " are not distinguishable");
      }
  }

  SynthRegimeParams p_;
  Vec x_;
  long t_ = 0;
  int regime_ = 0;
};

}  // namespace submodes
