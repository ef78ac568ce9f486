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
 * @file plant.hpp
 * @brief Quasi-static peg-in-hole plant.
 *
 * Frames: the hole frame {W} has its origin at the centroid of the hole
 * mouth and +Z pointing out of the hole. The assembly frame {A} shares the
 * hole axes and sits on the hole axis at the middle of the inserted band,
 * i.e. at height -l/2. Insertion is motion along -Z.
 *
 * Sign convention: every Wrench produced here is the load the hole exerts
 * on the peg (what a wrist sensor reads). A peg pushed toward +x therefore
 * sees a negative F_x, and friction while inserting points along +Z.
 *
 * Contact: the hole section is the peg section grown outward by the
 * clearance. A peg surface point that lies outside the hole section by a
 * depth e carries a normal pressure E_c * e along the peg's outward normal,
 * an axial friction mu times that pressure, and (optionally) a bounded
 * random tangential traction that only enters M_z.
 *
 * Quadrature: one cell per (theta node, s slice) with area element
 * R(theta) dtheta ds. Along s the penetration of a slice is taken as linear
 * in s with the exact local slope, so its positive part has a closed form
 * (near a hole corner the distance to the corner point is integrated
 * instead). Along theta, cells in full contact on a single hole feature use
 * Gauss-Legendre points. Other cells are bracketed on a sub-grid and split
 * by bisection wherever the nearest hole feature changes or either end of
 * the slice's penetration range crosses zero; each smooth piece then gets
 * its own Gauss points. Thin corner contacts therefore converge at the
 * coarse grid instead of flickering between nodes.
 */

#pragma once

#include "peghole/frames.hpp"
#include "peghole/geometry.hpp"

#include <cstdint>
#include <optional>
#include <random>

namespace peghole {

enum class Frame { Assembly, Sensor, World };

struct Wrench {
  Eigen::Vector3d force = Eigen::Vector3d::Zero();
  Eigen::Vector3d moment = Eigen::Vector3d::Zero();
  Frame frame = Frame::Assembly;

  Vector6d vector() const {
    Vector6d v;
    v << force, moment;
    return v;
  }
  static Wrench from_vector(const Vector6d& v, Frame frame) {
    return {v.head<3>(), v.tail<3>(), frame};
  }
};

/// Relative peg/hole pose [d_x, d_y, l, alpha, beta, gamma] (m, rad).
struct PoseState {
  double d_x = 0.0;
  double d_y = 0.0;
  double l = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  Vector6d vector() const {
    Vector6d v;
    v << d_x, d_y, l, alpha, beta, gamma;
    return v;
  }
  static PoseState from_vector(const Vector6d& v) { return {v[0], v[1], v[2], v[3], v[4], v[5]}; }
};

/// TCP pose of the robot in {W}; angles are roll/pitch/yaw wrapped to (-pi, pi].
struct RobotPose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d orientation = Eigen::Vector3d::Zero();

  Vector6d vector() const {
    Vector6d v;
    v << position, orientation;
    return v;
  }
};

/// Small rigid increment: a translation of the frame origin and a rotation
/// vector, both expressed in the owning frame. MotionIncrement lives in the
/// robot frame {R}; PoseIncrement lives in {A}.
struct MotionIncrement {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Vector3d rotation = Eigen::Vector3d::Zero();

  Vector6d vector() const {
    Vector6d v;
    v << translation, rotation;
    return v;
  }
  static MotionIncrement from_vector(const Vector6d& v) { return {v.head<3>(), v.tail<3>()}; }
};

struct PoseIncrement {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Vector3d rotation = Eigen::Vector3d::Zero();

  Vector6d vector() const {
    Vector6d v;
    v << translation, rotation;
    return v;
  }
  static PoseIncrement from_vector(const Vector6d& v) { return {v.head<3>(), v.tail<3>()}; }
};

enum class TauModel { Zero, BoundedRandom };

struct PlantParams {
  CrossSection section;                     // peg cross-section, mm
  double clearance_mm = 0.1;                // radial gap hole - peg
  double hole_depth = 0.03;                 // L, m
  double contact_stiffness = 1e9;           // E_c, N/m^3 (pressure per unit penetration)
  double friction = 0.1;                    // mu
  TauModel tau_model = TauModel::Zero;
  double tau_scale = 0.0;                   // kappa: |tau| <= kappa * pressure
  double penetration_cap = 1e-3;            // jamming fault above this depth, m

  void validate() const;
};

struct Grid {
  int n_theta = 64;
  int n_s = 16;
};

struct ContactResult {
  Wrench wrench;               // in {A}
  double max_penetration = 0;  // m
  bool jammed = false;
};

/// One pressure element of the contact quadrature (normal + axial friction only).
struct ContactElement {
  Eigen::Vector3d position;  // pressure centroid in {A}, m
  Eigen::Vector3d force;     // on the peg, N
  double penetration = 0.0;  // mean positive penetration over the element, m
  double area = 0.0;         // R dtheta ds of the element
  double tau_arm = 0.0;      // R cos(chi - theta): lever of a tangential traction about z
  std::size_t node = 0;      // owning theta cell
};

/// Force-pose mapping over a fixed quadrature grid. Immutable after
/// construction; evaluate() is safe to call concurrently (given separate RNGs).
class ContactModel {
 public:
  ContactModel(PlantParams params, Grid grid = {});

  const PlantParams& params() const { return params_; }
  const Grid& grid() const { return grid_; }
  /// Peg section translated to its centroid and converted to meters.
  const CrossSection& section_m() const { return section_m_; }
  const std::vector<QuadratureNode>& nodes() const { return nodes_; }

  /// Depth (m) by which the peg surface point at polar node `node` (meters,
  /// about the centroid) and axial coordinate s lies outside the hole.
  double penetration(const PoseState& p, const BoundaryPoint& node, double s) const;

  /// Integrated wrench on the peg. `tau_rng` is required for the
  /// bounded-random tangential model and ignored otherwise.
  ContactResult evaluate(const PoseState& p, std::mt19937_64* tau_rng = nullptr) const;

  /// The individual pressure elements behind evaluate() (tau excluded).
  std::vector<ContactElement> elements(const PoseState& p) const;

 private:
  struct NodeGeom {
    Eigen::Vector3d point;   // body frame, z = 0
    Eigen::Vector3d normal;  // body frame
    double radius = 0.0;
    double weight = 0.0;     // angular measure (rad)
  };

  NodeGeom geometry_at(std::size_t segment, double theta, double weight) const;
  std::vector<ContactElement> collect(const PoseState& p, double* max_penetration) const;

  PlantParams params_;
  Grid grid_;
  CrossSection section_m_;
  DistanceField field_;
  std::vector<QuadratureNode> nodes_;
  std::vector<Eigen::Vector3d> centers_;  // body frame, per node
  std::vector<Eigen::Vector3d> edges_;    // theta edges; node k spans edges k_left, k_left + 1
  std::vector<int> left_edge_;
  std::vector<Eigen::Vector3d> probes_;   // bracketing sub-grid per node
  std::vector<NodeGeom> gauss_;           // Gauss points per node
  double clearance_m_;
};

/// Penetration for a node taken from the peg section in mm.
double penetration(const PlantParams& params, const PoseState& p, const BoundaryPoint& node_mm,
                   double s);

ContactResult fpm(const PlantParams& params, const PoseState& p, Grid grid = {},
                  std::mt19937_64* tau_rng = nullptr);

/// Rigid wrench transfer from {A} into the frame described by `offset_sa`.
Wrench couple_output(const Wrench& assembly_wrench, const FrameOffset& offset_sa);

/// Sensor reading produced by pose p: CO(FPM(p)).
Wrench output_equation(const ContactModel& model, const PoseState& p, const FrameOffset& offset_sa,
                       std::mt19937_64* tau_rng = nullptr);
Wrench output_equation(const PlantParams& params, const PoseState& p, const FrameOffset& offset_sa);

/// Maps a robot-frame increment onto the same rigid motion seen in {A}.
PoseIncrement couple_state(const MotionIncrement& dr, const FrameOffset& offset_ra);

/// Rigid composition of the peg pose with an {A}-frame increment.
PoseState compose(const PoseState& p, const PoseIncrement& dp);

struct StateUpdate {
  PoseState pose;
  bool clamped = false;  // l left [0, L] and was clamped
};

StateUpdate state_equation(const PoseState& p, const MotionIncrement& dr,
                           const FrameOffset& offset_ra, double hole_depth);

/// Peg rigid placement in {W}: tip point on the axis and body rotation.
struct PegPlacement {
  Eigen::Vector3d tip;
  Eigen::Matrix3d rotation;
};

PegPlacement placement_of(const PoseState& p);
PoseState pose_of(const PegPlacement& placement);

}  // namespace peghole
