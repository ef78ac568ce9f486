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

#include "peghole/controller.hpp"

#include <algorithm>
#include <cmath>

namespace peghole {

void ComplianceGains::validate() const {
  const Vector6d v = vector();
  for (int i = 0; i < 6; ++i)
    if (!(v[i] > 0.0) || !std::isfinite(v[i]))
      throw Error("compliance gains must be positive and finite (component " + std::to_string(i) + ")");
}

Vector6d clamp_revision(const Vector6d& a) {
  Vector6d out;
  for (int i = 0; i < 6; ++i)
    out[i] = std::isfinite(a[i]) ? std::clamp(a[i], kRevisionLower, kRevisionUpper) : 0.0;
  return out;
}

Wrench decouple_output(const Wrench& w, const FrameOffset& offset_sa) {
  const Eigen::Matrix3d& r = offset_sa.rotation;
  const Eigen::Vector3d f = r.transpose() * w.force;
  const Eigen::Vector3d m = r.transpose() * (w.moment - offset_sa.translation.cross(w.force));
  return {f, m, Frame::Assembly};
}

MotionIncrement decouple_state(const PoseIncrement& dp, const FrameOffset& offset_ra) {
  const Eigen::Matrix3d& r = offset_ra.rotation;
  const Eigen::Vector3d w = r * dp.rotation;
  return {r * dp.translation - w.cross(offset_ra.translation), w};
}

DecoupledMotion decouple_state(const PoseIncrement& dp, const FrameOffset& offset_ra,
                               const MotionCaps& caps) {
  DecoupledMotion out{decouple_state(dp, offset_ra), false};
  const double tn = out.motion.translation.norm();
  if (tn > caps.translation) {
    out.motion.translation *= caps.translation / tn;
    out.clipped = true;
  }
  const double rn = out.motion.rotation.norm();
  if (rn > caps.rotation) {
    out.motion.rotation *= caps.rotation / rn;
    out.clipped = true;
  }
  return out;
}

PoseIncrement compliance_law(const Wrench& f_dec, const ReferenceWrench& f_rfr, const ComplianceGains& k) {
  const Vector6d e = f_dec.vector() - f_rfr.wrench().vector();
  return PoseIncrement::from_vector(k.vector().cwiseProduct(e));
}

ComplianceGains effective_gains(const ComplianceGains& k, const Vector6d& a) {
  const Vector6d kv = k.vector();
  return ComplianceGains::from_vector(kv + clamp_revision(a).cwiseProduct(kv));
}

PoseIncrement adaptive_compliance_law(const Wrench& f_dec, const ReferenceWrench& f_rfr,
                                      const ComplianceGains& k, const Vector6d& a) {
  return compliance_law(f_dec, f_rfr, effective_gains(k, a));
}

std::vector<double> estimate_depth(const std::vector<double>& z_trajectory, double z_contact) {
  std::vector<double> out;
  out.reserve(z_trajectory.size());
  for (double z : z_trajectory) out.push_back(std::max(0.0, z_contact - z));
  return out;
}

double DepthEstimator::estimate(double z_tcp) const {
  if (!z_contact_) return 0.0;
  return std::max(0.0, *z_contact_ - z_tcp);
}

}  // namespace peghole
