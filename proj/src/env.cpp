// Copyright 2026 The peghole Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "peghole/env.hpp"

#include <cmath>
#include <sstream>

namespace peghole {

void RewardCoeffs::validate() const {
  if (h_z < 0 || h_f < 0 || h_m < 0) throw Error("reward coefficients must be nonnegative");
  if (h_z == 0 && h_f == 0 && h_m == 0) throw Error("at least one reward coefficient must be positive");
}

double reward_value(const RewardCoeffs& c, double remaining, const Eigen::Vector3d& force,
                    const Eigen::Vector3d& moment) {
  return -c.h_z * remaining - c.h_f * force.norm() - c.h_m * moment.norm();
}

void ObservationScales::validate() const {
  const bool ok = (position_mm.array() > 0).all() && (angle_rad.array() > 0).all() &&
                  (force_n.array() > 0).all() && (moment_nm.array() > 0).all();
  if (!ok) throw Error("observation scales must be positive");
}

void EnvConfig::validate() const {
  plant.validate();
  gains.validate();
  reward.validate();
  scales.validate();
  if (max_steps < 1) throw Error("env: max_steps must be at least 1");
  if (!(feed_speed > 0)) throw Error("env: feed_speed must be positive");
  if (feed_tilt < 0 || lateral_error_mm < 0 || angular_error_rad < 0)
    throw Error("env: feed tilt and error ranges must be nonnegative");
  if (!(capture_fraction > 0 && capture_fraction <= 1)) throw Error("env: capture_fraction must lie in (0, 1]");
  if (!(tcp_height > 0) || !(sensor_height > 0)) throw Error("env: TCP and sensor heights must be positive");
  if (!(force_limit > 0) || !(moment_limit > 0)) throw Error("env: safety limits must be positive");
  if (failure_penalty < 0 || wrench_noise_n < 0) throw Error("env: penalty and noise must be nonnegative");
  if (!(caps.translation > 0) || !(caps.rotation > 0)) throw Error("env: motion caps must be positive");
}

AssemblyEnv::AssemblyEnv(EnvConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  model_ = std::make_shared<const ContactModel>(cfg_.plant, cfg_.grid);
}

void AssemblyEnv::set_gains(const ComplianceGains& k) {
  k.validate();
  cfg_.gains = k;
}

Observation AssemblyEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double lat = cfg_.lateral_error_mm * 1e-3;
  const double capture = cfg_.capture_fraction * cfg_.plant.clearance_mm * 1e-3;
  double dx = 0.0, dy = 0.0;
  do {
    dx = lat * unit(rng_);
    dy = lat * unit(rng_);
  } while (std::hypot(dx, dy) > capture);
  const double ang = cfg_.angular_error_rad;
  const double alpha = ang * unit(rng_);
  const double beta = ang * unit(rng_);
  const double gamma = ang * unit(rng_);
  feed_azimuth_ = kPi * (1.0 + unit(rng_));

  pose_ = {dx, dy, 0.0, alpha, beta, gamma};
  refresh_robot();
  start_tcp_ = Eigen::Vector3d(0.0, 0.0, cfg_.tcp_height);
  depth_.reset();
  depth_.record_contact(robot_.position.z());
  sensor_ = Wrench{{0, 0, 0}, {0, 0, 0}, Frame::Sensor};
  steps_ = 0;
  active_ = true;
  return observation();
}

void AssemblyEnv::refresh_robot() {
  const PegPlacement pl = placement_of(pose_);
  tip_ = pl.tip;
  peg_rotation_ = pl.rotation;
  robot_.position = tip_ + peg_rotation_ * Eigen::Vector3d(0.0, 0.0, cfg_.tcp_height);
  robot_.orientation = rpy_from_matrix(peg_rotation_);
}

FrameOffset AssemblyEnv::offset_ra() const {
  const Eigen::Matrix3d r = rpy_matrix(robot_.orientation.x(), robot_.orientation.y(), robot_.orientation.z());
  const Eigen::Vector3d origin(0.0, 0.0, -0.5 * depth_.estimate(robot_.position.z()));
  return {r.transpose(), r.transpose() * (origin - robot_.position)};
}

FrameOffset AssemblyEnv::offset_sa() const {
  const Eigen::Matrix3d r = rpy_matrix(robot_.orientation.x(), robot_.orientation.y(), robot_.orientation.z());
  const Eigen::Matrix3d rs = r * rot_z(cfg_.sensor_yaw);
  const Eigen::Vector3d sensor = robot_.position - r * Eigen::Vector3d(0.0, 0.0, cfg_.tcp_height - cfg_.sensor_height);
  const Eigen::Vector3d origin(0.0, 0.0, -0.5 * depth_.estimate(robot_.position.z()));
  return {rs.transpose(), rs.transpose() * (origin - sensor)};
}

Observation AssemblyEnv::observation() const {
  Observation s;
  const Eigen::Vector3d pos = (robot_.position - start_tcp_) * 1e3;
  s.segment<3>(0) = pos.cwiseQuotient(cfg_.scales.position_mm);
  s.segment<3>(3) = robot_.orientation.cwiseQuotient(cfg_.scales.angle_rad);
  s.segment<3>(6) = sensor_.force.cwiseQuotient(cfg_.scales.force_n);
  s.segment<3>(9) = sensor_.moment.cwiseQuotient(cfg_.scales.moment_nm);
  return s;
}

StepResult AssemblyEnv::step(const Vector6d& action) {
  if (!active_) throw Error("env: step called on a finished episode; call reset first");
  StepResult out;
  const Vector6d a = clamp_revision(action);
  const ComplianceGains k = effective_gains(cfg_.gains, a);

  const Wrench f_dec = decouple_output(sensor_, offset_sa());
  PoseIncrement dp = compliance_law(f_dec, cfg_.reference, k);
  const double st = std::sin(cfg_.feed_tilt);
  dp.translation += cfg_.feed_speed * Eigen::Vector3d(st * std::cos(feed_azimuth_), st * std::sin(feed_azimuth_),
                                                       -std::cos(cfg_.feed_tilt));
  const FrameOffset ra = offset_ra();
  const DecoupledMotion dm = decouple_state(dp, ra, cfg_.caps);
  const StateUpdate upd = state_equation(pose_, dm.motion, ra, cfg_.plant.hole_depth);
  pose_ = upd.pose;
  refresh_robot();

  const ContactResult contact = model_->evaluate(pose_, &rng_);
  sensor_ = couple_output(contact.wrench, offset_sa());
  if (cfg_.wrench_noise_n > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg_.wrench_noise_n);
    for (int i = 0; i < 3; ++i) sensor_.force[i] += noise(rng_);
    for (int i = 0; i < 3; ++i) sensor_.moment[i] += noise(rng_) / 20.0;
  }
  ++steps_;

  StepInfo& info = out.info;
  info.pose = pose_;
  info.depth_estimate = depth_.estimate(robot_.position.z());
  info.effective = k;
  info.action = a;
  info.clipped = dm.clipped;
  info.clamped = upd.clamped;
  info.jammed = contact.jammed;
  info.breach = sensor_.force.norm() > cfg_.force_limit || sensor_.moment.norm() > cfg_.moment_limit;
  info.success = pose_.l >= cfg_.plant.hole_depth;
  info.step = steps_;

  const double remaining = std::max(0.0, cfg_.plant.hole_depth - info.depth_estimate);
  out.reward = reward_value(cfg_.reward, remaining, sensor_.force, sensor_.moment);
  const bool failure = info.jammed || info.breach;
  if (failure) out.reward -= cfg_.failure_penalty;
  out.terminal = failure || info.success;
  out.done = out.terminal || steps_ >= cfg_.max_steps;
  active_ = !out.done;
  out.state = observation();
  out.robot = robot_;
  out.sensor = sensor_;
  return out;
}

std::vector<StepResult> rollout_zero_action(AssemblyEnv env, int horizon) {
  std::vector<StepResult> out;
  for (int t = 0; t < horizon && env.active(); ++t) out.push_back(env.step(Vector6d::Zero()));
  return out;
}

std::string trajectory_csv(const std::vector<StepResult>& steps) {
  std::ostringstream os;
  os.precision(9);
  os << "step,x,y,z,roll,pitch,yaw,Fx,Fy,Fz,Mx,My,Mz,a1,a2,a3,a4,a5,a6,"
        "K_x,K_y,K_z,K_alpha,K_beta,K_gamma,reward,done\n";
  for (const auto& s : steps) {
    os << s.info.step;
    const Vector6d r = s.robot.vector(), f = s.sensor.vector(), k = s.info.effective.vector();
    for (int i = 0; i < 6; ++i) os << ',' << r[i];
    for (int i = 0; i < 6; ++i) os << ',' << f[i];
    for (int i = 0; i < 6; ++i) os << ',' << s.info.action[i];
    for (int i = 0; i < 6; ++i) os << ',' << k[i];
    os << ',' << s.reward << ',' << (s.done ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace peghole
