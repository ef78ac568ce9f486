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

#pragma once

#include "peghole/types.hpp"

namespace peghole {

/// Pose of the assembly frame {A} expressed in another frame ({S} or {R}):
/// x_other = rotation * x_A + translation.
struct FrameOffset {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static FrameOffset identity() { return {}; }

  /// Throws unless the rotation is orthonormal with determinant +1.
  void validate(double tol = 1e-10) const;
};

/// Roll-pitch-yaw: Rz(yaw) * Ry(pitch) * Rx(roll).
Eigen::Matrix3d rpy_matrix(double roll, double pitch, double yaw);
Eigen::Vector3d rpy_from_matrix(const Eigen::Matrix3d& r);

inline Eigen::Matrix3d rot_z(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

}  // namespace peghole
