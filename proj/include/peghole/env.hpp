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

/**
 * @file env.hpp
 * @brief Insertion episode as a Markov decision process.
 *
 * One step: sensor wrench -> decouple_output -> adaptive compliance law plus
 * a constant nominal feed -> decouple_state (capped) -> plant -> new sensor
 * wrench. The action is the six revision factors a in [-1, 1].
 *
 * The nominal feed moves the peg along -Z of {A} at `feed_speed` per step,
 * tipped by `feed_tilt` toward an azimuth drawn at reset. That tilt models
 * the imperfect feed direction of a real robot and keeps the peg pressed
 * against the wall, so lateral gains matter over the whole insertion.
 *
 * The robot frame {R} has its origin at the TCP, `tcp_height` above the peg
 * tip along the peg axis, and the peg's axes. The sensor frame {S} sits at
 * `sensor_height` on the same axis, turned by `sensor_yaw` about it. Both
 * offsets to {A} are recomputed every step from the TCP pose and the depth
 * estimate, never from the true relative pose.
 *
 * Observation (12): TCP position relative to the nominal start in mm,
 * TCP roll/pitch/yaw, sensor force and moment, each divided by a fixed
 * scale from ObservationScales.
 */

#pragma once

#include "peghole/controller.hpp"
#include "peghole/plant.hpp"

#include <memory>
#include <random>
#include <string>
#include <vector>

namespace peghole {

struct RewardCoeffs {
  double h_z = 100.0;  // per m of remaining depth
  double h_f = 0.1;    // per N
  double h_m = 1.0;    // per N m
  void validate() const;
};

/// -h_z * remaining - h_F |f| - h_M |m|
double reward_value(const RewardCoeffs& c, double remaining_depth, const Eigen::Vector3d& force,
                    const Eigen::Vector3d& moment);

struct ObservationScales {
  Eigen::Vector3d position_mm{0.2, 0.2, 30.0};
  Eigen::Vector3d angle_rad{0.005, 0.005, 0.005};
  Eigen::Vector3d force_n{20.0, 20.0, 20.0};
  Eigen::Vector3d moment_nm{0.5, 0.5, 0.5};
  void validate() const;
};

struct EnvConfig {
  explicit EnvConfig(PlantParams p) : plant(std::move(p)) {}

  PlantParams plant;
  Grid grid{};
  ComplianceGains gains;
  ReferenceWrench reference;
  MotionCaps caps;
  RewardCoeffs reward;
  ObservationScales scales;

  int max_steps = 150;
  double feed_speed = 3e-4;          // m per step
  double feed_tilt = 0.1;            // rad
  double lateral_error_mm = 0.08;    // per-axis uniform range at reset
  double angular_error_rad = 0.002;  // per-axis uniform range at reset
  double capture_fraction = 0.9;     // start only within this fraction of the clearance
  double tcp_height = 0.10;          // m above the peg tip
  double sensor_height = 0.08;       // m above the peg tip
  double sensor_yaw = 0.3;           // rad
  double force_limit = 150.0;        // N, safety stop
  double moment_limit = 5.0;         // N m, safety stop
  double failure_penalty = 50.0;
  double wrench_noise_n = 0.0;       // std of additive force noise, moments scaled by 1/20 m

  void validate() const;
};

using Observation = Vector12d;

struct StepInfo {
  PoseState pose;          // true relative pose, diagnostics only
  double depth_estimate = 0.0;
  ComplianceGains effective;
  Vector6d action = Vector6d::Zero();
  bool clipped = false;
  bool clamped = false;
  bool jammed = false;
  bool breach = false;
  bool success = false;
  int step = 0;
};

struct StepResult {
  Observation state;
  double reward = 0.0;
  bool done = false;
  /// True when the episode ended by success or failure, not by the step limit.
  bool terminal = false;
  StepInfo info;
  RobotPose robot;
  Wrench sensor;
};

/// Copyable: a copy continues the same episode with the same random stream,
/// which is how paired rollouts are made.
class AssemblyEnv {
 public:
  explicit AssemblyEnv(EnvConfig cfg);

  const EnvConfig& config() const { return cfg_; }
  const ContactModel& model() const { return *model_; }

  Observation reset(std::uint64_t seed);
  StepResult step(const Vector6d& action);

  bool active() const { return active_; }
  int steps() const { return steps_; }
  const PoseState& pose() const { return pose_; }
  const RobotPose& robot() const { return robot_; }
  const Wrench& sensor() const { return sensor_; }
  Observation observation() const;

  /// Offsets used by the controller for the current TCP pose and depth estimate.
  FrameOffset offset_sa() const;
  FrameOffset offset_ra() const;

  /// Replaces the compliance gains; the episode state is untouched.
  void set_gains(const ComplianceGains& k);

 private:
  void refresh_robot();

  EnvConfig cfg_;
  std::shared_ptr<const ContactModel> model_;
  std::mt19937_64 rng_;
  PoseState pose_;
  RobotPose robot_;
  Eigen::Matrix3d peg_rotation_ = Eigen::Matrix3d::Identity();
  Eigen::Vector3d tip_ = Eigen::Vector3d::Zero();
  Wrench sensor_;
  DepthEstimator depth_;
  double feed_azimuth_ = 0.0;
  Eigen::Vector3d start_tcp_ = Eigen::Vector3d::Zero();
  int steps_ = 0;
  bool active_ = false;
};

/// Runs `horizon` zero-action steps on a copy of `env`.
std::vector<StepResult> rollout_zero_action(AssemblyEnv env, int horizon);

/// step,x,y,z,roll,pitch,yaw,Fx,Fy,Fz,Mx,My,Mz,a1..a6,K1..K6,reward,done
std::string trajectory_csv(const std::vector<StepResult>& steps);

}  // namespace peghole
