#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "submodes/planner.hpp"
#include "submodes/sensorium.hpp"

namespace submodes {

struct Rect {
  double xmin = -150, xmax = 150, ymin = -150, ymax = 150;
  bool contains(double x, double y) const { return x >= xmin && x < xmax && y >= ymin && y < ymax; }
  double cx() const { return 0.5 * (xmin + xmax); }
  double cy() const { return 0.5 * (ymin + ymax); }
};

//! Region with modified locomotion physics.
struct TerrainPatch {
  std::string name;
  Rect area;
  double speed_factor = 1.0;  // scales the rolling rate
  double lag_factor = 1.0;    // scales how fast the masses follow commands
  double mass_limit = 1.0;    // bound on the mass along the most upward body axis
};

struct SphereParams {
  Rect arena;
  double lag = 0.5;           // mass actuation low-pass per step
  double gravity = 0.1;       // torque per unit mass offset
  double damping = 0.02;      // angular velocity decay per step
  double radius = 0.15;       // translation per radian
  double lateral = 0.1;       // torque gain perpendicular to the rolling axis
  double omega_max = 0.4;     // rad per step
  double motor_noise = 0.05;
  double speed_ref = 0.05;    // translation per step that reads as speed 1
  double wall_kick = 0.05;
  std::vector<TerrainPatch> terrain;

  double v_max() const { return radius * omega_max / speed_ref; }
};

//! Spherical body rolled by three internal masses on orthogonal body axes (50 Hz steps).
class PlanarSphereEnv {
 public:
  explicit PlanarSphereEnv(SphereParams p = {}) : p_(std::move(p)) {
    if (p_.arena.xmax <= p_.arena.xmin || p_.arena.ymax <= p_.arena.ymin)
      throw std::invalid_argument("sphere env: empty arena");
  }

  static constexpr int kMotors = 3;
  const SphereParams& params() const { return p_; }

  void reset(Rng& rng, double x, double y) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Vector3d w(n(rng), n(rng), n(rng));
    R_ = rotation(w);
    m_.setZero();
    omega_.setZero();
    pos_ = {x, y};
    heading_ = std::uniform_real_distribution<double>(-M_PI, M_PI)(rng);
    speed_ = 0.0;
    hit_ = false;
    t_ = 0;
  }
  void reset(Rng& rng) { reset(rng, p_.arena.cx(), p_.arena.cy()); }

  RawSensors sense() const {
    Vec pr(3);
    pr << -R_(2, 0), -R_(2, 1), -R_(2, 2);
    return RawSensors{pr, heading_, speed_};
  }

  void step(const Vec& y, Rng& rng) {
    if (y.size() != kMotors) throw std::invalid_argument("sphere env: expects 3 motor commands");
    const TerrainPatch* patch = terrain_at(pos_[0], pos_[1]);
    const double sf = patch ? patch->speed_factor : 1.0;
    const double lf = patch ? patch->lag_factor : 1.0;
    std::normal_distribution<double> n(0.0, 1.0);
    for (int k = 0; k < 3; ++k) {
      const double u = std::clamp(y[k] + p_.motor_noise * n(rng), -1.0, 1.0);
      m_[k] += p_.lag * lf * (u - m_[k]);
    }
    if (patch && patch->mass_limit < 1.0) {
      int up = 0;
      for (int k = 1; k < 3; ++k)
        if (std::abs(R_(2, k)) > std::abs(R_(2, up))) up = k;
      m_[up] = std::clamp(m_[up], -patch->mass_limit, patch->mass_limit);
    }
    const Eigen::Vector3d c = R_ * m_;
    Eigen::Vector3d tau(-p_.gravity * c.y(), p_.gravity * c.x(), 0.0);
    const double wn = omega_.norm();
    if (wn > 1e-6) {
      const Eigen::Vector3d k = omega_ / wn;
      const Eigen::Vector3d par = tau.dot(k) * k;
      tau = par + p_.lateral * (tau - par);
    }
    omega_ = omega_ * (1.0 - p_.damping) + tau;
    const double on = omega_.norm();
    if (on > p_.omega_max) omega_ *= p_.omega_max / on;
    const Eigen::Vector3d w_eff = sf * omega_;
    std::array<double, 2> v{p_.radius * w_eff.y(), -p_.radius * w_eff.x()};
    pos_[0] += v[0];
    pos_[1] += v[1];
    R_ = rotation(w_eff) * R_;
    hit_ = false;
    const double lo[2] = {p_.arena.xmin, p_.arena.ymin};
    const double hi[2] = {p_.arena.xmax, p_.arena.ymax};
    for (int i = 0; i < 2; ++i) {
      if (pos_[i] < lo[i] || pos_[i] > hi[i]) {
        pos_[i] = std::clamp(pos_[i], lo[i], hi[i]);
        hit_ = true;
        // Turning the whole body about the vertical mirrors the heading at the wall
        // and leaves the axis projections untouched.
        const double a = std::atan2(v[1], v[0]);
        const double reflected = i == 0 ? M_PI - a : -a;
        const Eigen::Matrix3d turn = Eigen::AngleAxisd(reflected - a, Eigen::Vector3d::UnitZ()).toRotationMatrix();
        R_ = turn * R_;
        omega_ = turn * omega_;
        v[i] = -v[i];
        omega_[0] += p_.wall_kick * n(rng);
        omega_[1] += p_.wall_kick * n(rng);
      }
    }
    const double sp = std::hypot(v[0], v[1]);
    if (sp > 1e-9) heading_ = std::atan2(v[1], v[0]);
    speed_ = sp / p_.speed_ref;
    ++t_;
  }

  double x() const { return pos_[0]; }
  double y() const { return pos_[1]; }
  double heading() const { return heading_; }
  double speed() const { return speed_; }
  bool wall_hit() const { return hit_; }
  long t() const { return t_; }
  const Eigen::Matrix3d& orientation() const { return R_; }
  const Eigen::Vector3d& masses() const { return m_; }

  const TerrainPatch* terrain_at(double x, double y) const {
    for (const auto& patch : p_.terrain)
      if (patch.area.contains(x, y)) return &patch;
    return nullptr;
  }
  std::string zone() const {
    const TerrainPatch* patch = terrain_at(pos_[0], pos_[1]);
    return patch ? patch->name : "";
  }

  //! Heading toward (gx, gy) at cruise speed, on the pose channels of an observation laid out by cfg.
  GoalSpec goal_toward(double gx, double gy, const SensorConfig& cfg, double cruise = 1.0) const {
    GoalSpec g;
    g.target = Vec::Zero(cfg.obs_dim());
    const int o = cfg.pose_offset();
    const double a = std::atan2(gy - pos_[1], gx - pos_[0]);
    g.target[o] = std::sin(a);
    g.target[o + 1] = std::cos(a);
    g.target[o + 2] = cruise;
    g.mask = {o, o + 1, o + 2};
    return g;
  }

  double distance_to(double gx, double gy) const { return std::hypot(gx - pos_[0], gy - pos_[1]); }

 private:
  static Eigen::Matrix3d rotation(const Eigen::Vector3d& w) {
    const double a = w.norm();
    if (a < 1e-12) return Eigen::Matrix3d::Identity();
    return Eigen::AngleAxisd(a, w / a).toRotationMatrix();
  }

  SphereParams p_;
  Eigen::Matrix3d R_ = Eigen::Matrix3d::Identity();
  Eigen::Vector3d m_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d omega_ = Eigen::Vector3d::Zero();
  std::array<double, 2> pos_{0.0, 0.0};
  double heading_ = 0.0;
  double speed_ = 0.0;
  bool hit_ = false;
  long t_ = 0;
};

//! Cave, open field, and snow side by side; the cave is entered at its center.
inline SphereParams terrain_course_params() {
  SphereParams p;
  p.arena = {0, 180, 0, 60};
  p.terrain = {{"cave", {0, 60, 0, 60}, 1.0, 1.0, 0.3},
               {"field", {60, 120, 0, 60}, 1.0, 1.0, 1.0},
               {"snow", {120, 180, 0, 60}, 0.2, 0.5, 1.0}};
  return p;
}

}  // namespace submodes
