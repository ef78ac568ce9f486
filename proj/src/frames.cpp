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

#include "peghole/frames.hpp"

#include <algorithm>
#include <cmath>

namespace peghole {

void FrameOffset::validate(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) throw Error("frame offset: non-finite entries");
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).norm();
  if (ortho > tol || std::abs(rotation.determinant() - 1.0) > tol)
    throw Error("frame offset: rotation is not a proper orthonormal matrix");
}

Eigen::Matrix3d rpy_matrix(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

Eigen::Vector3d rpy_from_matrix(const Eigen::Matrix3d& r) {
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  return {roll, pitch, yaw};
}

}  // namespace peghole
