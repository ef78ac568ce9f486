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
 * @file controller.hpp
 * @brief Model-based part of the hybrid compliance controller.
 *
 * decouple_output and decouple_state invert the plant's frame couplings
 * exactly. The compliance laws map the decoupled wrench onto a pose
 * correction in {A}; the adaptive law scales each gain by (1 + a_i).
 *
 * Axis convention: {A} and the robot frame {R} are related only through the
 * FrameOffset; with an identity offset a correction along +x of {A} is a
 * motion along +x of {R}. No axis flip is applied anywhere.
 */

#pragma once

#include "peghole/plant.hpp"

#include <optional>
#include <vector>

namespace peghole {

/// Per-component compliance: m/N for x, y, z and rad/(N m) for the angles.
struct ComplianceGains {
  double x = 0, y = 0, z = 0, alpha = 0, beta = 0, gamma = 0;

  Vector6d vector() const {
    Vector6d v;
    v << x, y, z, alpha, beta, gamma;
    return v;
  }
  static ComplianceGains from_vector(const Vector6d& v) { return {v[0], v[1], v[2], v[3], v[4], v[5]}; }
  void validate() const;
};

/// Only the axial force reference may be nonzero.
struct ReferenceWrench {
  double f_z = 0.0;

  Wrench wrench() const { return {{0.0, 0.0, f_z}, Eigen::Vector3d::Zero(), Frame::Assembly}; }
};

inline constexpr double kRevisionLower = -1.0;
inline constexpr double kRevisionUpper = 1.0;

/// Componentwise clamp to [lb, ub]; non-finite entries become 0.
Vector6d clamp_revision(const Vector6d& a);

struct MotionCaps {
  double translation = 5e-4;  // m per step
  double rotation = 5e-4;     // rad per step
};

struct DecoupledMotion {
  MotionIncrement motion;
  bool clipped = false;
};

/// Sensor wrench back into {A}; inverse of couple_output.
Wrench decouple_output(const Wrench& sensor_wrench, const FrameOffset& offset_sa);

/// {A}-frame correction into a robot-frame increment; inverse of couple_state.
/// Translation and rotation are each scaled down to their cap when exceeded.
DecoupledMotion decouple_state(const PoseIncrement& dp, const FrameOffset& offset_ra,
                               const MotionCaps& caps);
/// Exact inverse, no caps.
MotionIncrement decouple_state(const PoseIncrement& dp, const FrameOffset& offset_ra);

PoseIncrement compliance_law(const Wrench& f_dec, const ReferenceWrench& f_rfr, const ComplianceGains& k);

/// K + a o K, with `a` clamped to the revision bounds.
ComplianceGains effective_gains(const ComplianceGains& k, const Vector6d& a);

PoseIncrement adaptive_compliance_law(const Wrench& f_dec, const ReferenceWrench& f_rfr,
                                      const ComplianceGains& k, const Vector6d& a);

/// l = max(0, z_contact - z) for each TCP height in the trajectory.
std::vector<double> estimate_depth(const std::vector<double>& z_trajectory, double z_contact);

/// Per-episode depth estimator: records the TCP height at first contact.
class DepthEstimator {
 public:
  void reset() { z_contact_.reset(); }
  void record_contact(double z_tcp) {
    if (!z_contact_) z_contact_ = z_tcp;
  }
  bool has_contact() const { return z_contact_.has_value(); }
  double z_contact() const { return z_contact_.value_or(0.0); }
  double estimate(double z_tcp) const;

 private:
  std::optional<double> z_contact_;
};

}  // namespace peghole
