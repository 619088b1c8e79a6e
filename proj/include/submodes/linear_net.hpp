#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace submodes {

using Rng = std::mt19937_64;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Head { Tanh, Sigmoid };

inline const char* head_name(Head h) { return h == Head::Tanh ? "tanh" : "sigmoid"; }

inline Head head_from_name(const std::string& s) {
  if (s == "tanh") return Head::Tanh;
  if (s == "sigmoid") return Head::Sigmoid;
  throw std::invalid_argument("unknown head: " + s);
}

struct Sample {
  Vec input;
  Vec target;
};

//! Fixed-capacity FIFO of training pairs with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  //! i-th oldest stored sample.
  const Sample& at(std::size_t i) const {
    if (i >= items_.size()) throw std::out_of_range("replay buffer index");
    return items_[(head_ + i) % items_.size()];
  }

  //! Stores s; returns the evicted oldest sample when the buffer was full.
  std::optional<Sample> push(Sample s) {
    std::optional<Sample> evicted;
    if (items_.size() < capacity_) {
      items_.push_back(std::move(s));
    } else {
      evicted = std::move(items_[head_]);
      items_[head_] = std::move(s);
      head_ = (head_ + 1) % capacity_;
    }
    ++pushed_;
    return evicted;
  }

  //! Up to k distinct stored samples, drawn uniformly without replacement.
  std::vector<std::size_t> sample_indices(std::size_t k, Rng& rng) const {
    const std::size_t n = items_.size();
    k = std::min(k, n);
    std::vector<std::size_t> out;
    out.reserve(k);
    if (k == 0) return out;
    if (2 * k >= n) {
      std::vector<std::size_t> all(n);
      for (std::size_t i = 0; i < n; ++i) all[i] = i;
      for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> d(i, n - 1);
        std::swap(all[i], all[d(rng)]);
        out.push_back(all[i]);
      }
      return out;
    }
    std::uniform_int_distribution<std::size_t> d(0, n - 1);
    while (out.size() < k) {
      std::size_t c = d(rng);
      if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
    return out;
  }

  std::vector<Sample> sample(std::size_t k, Rng& rng) const {
    std::vector<Sample> out;
    for (std::size_t i : sample_indices(k, rng)) out.push_back(at(i));
    return out;
  }

  std::size_t total_pushed() const { return pushed_; }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::size_t pushed_ = 0;
  std::vector<Sample> items_;
};

struct NetParams {
  Head head = Head::Tanh;
  double learning_rate = 0.005;
  double l1 = 0.0;                  // tanh head only; applies to weights, not biases
  std::size_t replay_capacity = 10000;
  std::size_t replay_draws = 2;
};

//! Single-layer network y = head(W x + b) trained online with replay.
class LinearNet {
 public:
  LinearNet() = default;

  LinearNet(int in_dim, int out_dim, const NetParams& p, Rng& rng)
      : W_(out_dim, in_dim), b_(Vec::Zero(out_dim)), params_(p), buffer_(p.replay_capacity) {
    if (in_dim <= 0 || out_dim <= 0) throw std::invalid_argument("network dimensions must be positive");
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    for (int r = 0; r < out_dim; ++r)
      for (int c = 0; c < in_dim; ++c) W_(r, c) = u(rng);
  }

  int in_dim() const { return static_cast<int>(W_.cols()); }
  int out_dim() const { return static_cast<int>(W_.rows()); }
  Head head() const { return params_.head; }
  const NetParams& params() const { return params_; }
  NetParams& params() { return params_; }

  const Mat& weights() const { return W_; }
  const Vec& bias() const { return b_; }
  Mat& weights() { return W_; }
  Vec& bias() { return b_; }
  const ReplayBuffer& buffer() const { return buffer_; }

  //! Rows excluded from all updates (data and L1 terms).
  void freeze_rows(int first, int count) {
    frozen_.assign(out_dim(), 0);
    for (int r = first; r < first + count && r < out_dim(); ++r) frozen_[r] = 1;
  }
  bool row_frozen(int r) const { return !frozen_.empty() && frozen_[r]; }

  //! Rows [first, first + count) read only the leading `inputs` columns; other weights stay zero.
  void limit_row_inputs(int first, int count, int inputs) {
    if (mask_.size() == 0) mask_ = Mat::Ones(out_dim(), in_dim());
    for (int r = first; r < first + count && r < out_dim(); ++r)
      for (int c = std::max(inputs, 0); c < in_dim(); ++c) mask_(r, c) = 0.0;
    W_ = W_.cwiseProduct(mask_);
  }
  bool weight_masked(int r, int c) const { return mask_.size() != 0 && mask_(r, c) == 0.0; }

  void check_input(const Vec& x) const {
    if (x.size() != in_dim())
      throw std::invalid_argument("input has dimension " + std::to_string(x.size()) + ", expected " +
                                  std::to_string(in_dim()));
  }

  Vec forward(const Vec& x) const {
    check_input(x);
    Vec z = W_ * x + b_;
    return activate(z);
  }

  //! Allocation-free forward pass into a preallocated output.
  void forward_into(const Vec& x, Vec& out) const {
    out.noalias() = W_ * x;
    out += b_;
    out = activate(out);
  }

  Vec activate(const Vec& z) const {
    if (params_.head == Head::Tanh) return z.array().tanh().matrix();
    return (1.0 / (1.0 + (-z.array()).exp())).matrix();
  }

  // Loss definitions used by the update rules. Regression: 0.5*|out - t|^2 + l1*|W|_1.
  // Probability: -w * (t log p + (1 - t) log(1 - p)) with class weight w.
  double regression_loss(const Vec& x, const Vec& t) const {
    Vec out = forward(x);
    return 0.5 * (out - t).squaredNorm() + params_.l1 * W_.cwiseAbs().sum();
  }

  double probability_loss(const Vec& x, const Vec& t, double weight) const {
    Vec p = forward(x);
    double l = 0.0;
    for (int i = 0; i < p.size(); ++i) l -= t[i] * std::log(p[i]) + (1.0 - t[i]) * std::log(1.0 - p[i]);
    return weight * l;
  }

  struct Gradient {
    Mat dW;
    Vec db;
  };

  Gradient regression_gradient(const Vec& x, const Vec& t) const {
    Vec out = forward(x);
    Vec delta = ((out - t).array() * (1.0 - out.array().square())).matrix();
    Gradient g{delta * x.transpose(), delta};
    if (params_.l1 > 0.0) g.dW += params_.l1 * W_.unaryExpr([](double w) { return double((w > 0) - (w < 0)); });
    return g;
  }

  Gradient probability_gradient(const Vec& x, const Vec& t, double weight) const {
    Vec p = forward(x);
    Vec delta = weight * (p - t);
    return {delta * x.transpose(), delta};
  }

  //! One regression step on (x, t), then stores the pair and replays stored pairs.
  void train_regression(const Vec& x, const Vec& t, Rng& rng) {
    require_head(Head::Tanh);
    check_target(t);
    apply(regression_gradient(x, t));
    buffer_.push({x, t});
    for (std::size_t i : buffer_.sample_indices(params_.replay_draws, rng)) {
      const Sample& s = buffer_.at(i);
      apply(regression_gradient(s.input, s.target));
    }
  }

  //! One balanced cross-entropy step on a scalar 0/1 target, then replay.
  void train_probability(const Vec& x, double target, Rng& rng) {
    require_head(Head::Sigmoid);
    Vec t = Vec::Constant(1, target);
    check_target(t);
    if (auto old = buffer_.push({x, t})) {
      if (old->target[0] > 0.5) --positives_; else --negatives_;
    }
    if (target > 0.5) ++positives_; else ++negatives_;
    apply(probability_gradient(x, t, class_weight(target)));
    for (std::size_t i : buffer_.sample_indices(params_.replay_draws, rng)) {
      const Sample& s = buffer_.at(i);
      apply(probability_gradient(s.input, s.target, class_weight(s.target[0])));
    }
  }

  //! Inverse class-frequency weight over buffer contents, normalized to mean 1.
  double class_weight(double target) const {
    const double n = static_cast<double>(positives_ + negatives_);
    if (positives_ == 0 || negatives_ == 0) return 1.0;
    const double count = target > 0.5 ? double(positives_) : double(negatives_);
    return n / (2.0 * count);
  }

  std::size_t positives() const { return positives_; }
  std::size_t negatives() const { return negatives_; }

 private:
  void require_head(Head h) const {
    if (params_.head != h) throw std::logic_error(std::string("training rule needs a ") + head_name(h) + " head");
  }

  void check_target(const Vec& t) const {
    if (t.size() != out_dim())
      throw std::invalid_argument("target has dimension " + std::to_string(t.size()) + ", expected " +
                                  std::to_string(out_dim()));
  }

  void apply(const Gradient& g) {
    if (mask_.size() != 0) {
      apply_rows(g.dW.cwiseProduct(mask_), g.db);
      return;
    }
    apply_rows(g.dW, g.db);
  }

  void apply_rows(const Mat& dW, const Vec& db) {
    const double lr = params_.learning_rate;
    if (frozen_.empty()) {
      W_.noalias() -= lr * dW;
      b_.noalias() -= lr * db;
      return;
    }
    for (int r = 0; r < out_dim(); ++r) {
      if (frozen_[r]) continue;
      W_.row(r) -= lr * dW.row(r);
      b_[r] -= lr * db[r];
    }
  }

  Mat W_;
  Vec b_;
  NetParams params_;
  ReplayBuffer buffer_{1};
  std::vector<char> frozen_;
  Mat mask_;
  std::size_t positives_ = 0;
  std::size_t negatives_ = 0;
};

}  // namespace submodes
