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

#include "peghole/plant.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace peghole {

void PlantParams::validate() const {
  if (!(clearance_mm > 0.0)) throw Error("plant: clearance must be positive");
  if (!(hole_depth > 0.0)) throw Error("plant: hole depth must be positive");
  if (!(contact_stiffness > 0.0)) throw Error("plant: contact stiffness must be positive");
  if (!(friction >= 0.0 && friction < 1.0)) throw Error("plant: friction must lie in [0, 1)");
  if (!(penetration_cap > 0.0)) throw Error("plant: penetration cap must be positive");
  if (tau_scale < 0.0) throw Error("plant: tau scale must be nonnegative");
  if (!section.star_shaped())
    throw Error("plant: section '" + section.name() + "' is not star-shaped about its centroid");
}

namespace {

// Bracketing samples per cut cell, Gauss points per smooth piece, and
// bisection steps when locating a break inside a cell.
constexpr int kProbes = 16;
constexpr int kGauss = 4;
constexpr int kBisections = 16;

// 4-point Gauss-Legendre on [-1/2, 1/2].
constexpr double kGaussX[kGauss] = {-0.4305681557970263, -0.1699905217924281, 0.1699905217924281,
                                    0.4305681557970263};
constexpr double kGaussW[kGauss] = {0.1739274225687269, 0.3260725774312731, 0.3260725774312731,
                                    0.1739274225687269};

// Mean over v in [-1/2, 1/2] of max(0, a + c v) and of v times it.
void positive_part_1d(double a, double c, double& j0, double& j1) {
  if (c == 0.0) {
    j0 = a > 0.0 ? a : 0.0;
    j1 = 0.0;
    return;
  }
  const double v0 = std::clamp(-a / c, -0.5, 0.5);
  const double lo = c > 0.0 ? v0 : -0.5, hi = c > 0.0 ? 0.5 : v0;
  j0 = a * (hi - lo) + 0.5 * c * (hi * hi - lo * lo);
  j1 = 0.5 * a * (hi * hi - lo * lo) + c / 3.0 * (hi * hi * hi - lo * lo * lo);
}

}  // namespace

ContactModel::NodeGeom ContactModel::geometry_at(std::size_t segment, double theta, double weight) const {
  const BoundaryPoint bp = boundary_sample(section_m_, segment, theta);
  NodeGeom g;
  g.radius = bp.radius;
  g.weight = weight;
  g.point = Eigen::Vector3d(bp.radius * std::cos(theta), bp.radius * std::sin(theta), 0.0);
  g.normal = Eigen::Vector3d(std::cos(bp.normal_angle), std::sin(bp.normal_angle), 0.0);
  return g;
}

ContactModel::ContactModel(PlantParams params, Grid grid)
    : params_(std::move(params)),
      grid_(grid),
      section_m_(scaled(centered(params_.section), 1e-3)),
      field_(section_m_),
      clearance_m_(params_.clearance_mm * 1e-3) {
  params_.validate();
  if (grid_.n_theta < 1 || grid_.n_s < 1) throw Error("plant: grid sizes must be positive");
  nodes_ = discretize(section_m_, grid_.n_theta);
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const QuadratureNode& node = nodes_[k];
    const double theta = node.point.theta, h = node.weight;
    centers_.emplace_back(node.point.radius * std::cos(theta), node.point.radius * std::sin(theta), 0.0);
    if (k == 0 || nodes_[k - 1].segment != node.segment) edges_.push_back(geometry_at(node.segment, theta - 0.5 * h, 0.0).point);
    left_edge_.push_back(static_cast<int>(edges_.size()) - 1);
    edges_.push_back(geometry_at(node.segment, theta + 0.5 * h, 0.0).point);
    for (int i = 0; i < kProbes; ++i)
      probes_.push_back(geometry_at(node.segment, theta + ((i + 0.5) / kProbes - 0.5) * h, 0.0).point);
    for (int i = 0; i < kGauss; ++i) gauss_.push_back(geometry_at(node.segment, theta + kGaussX[i] * h, kGaussW[i] * h));
  }
}

double ContactModel::penetration(const PoseState& p, const BoundaryPoint& node, double s) const {
  const Eigen::Matrix3d rot = rpy_matrix(p.alpha, p.beta, p.gamma);
  const Eigen::Vector3d body(node.radius * std::cos(node.theta), node.radius * std::sin(node.theta), s);
  const Eigen::Vector3d q = Eigen::Vector3d(p.d_x, p.d_y, 0.0) + rot * body;
  return std::max(0.0, signed_distance(section_m_, q.head<2>()) - clearance_m_);
}

std::vector<ContactElement> ContactModel::collect(const PoseState& p, double* max_penetration) const {
  std::vector<ContactElement> out;
  if (max_penetration) *max_penetration = 0.0;
  if (p.l <= 0.0) return out;
  const Eigen::Matrix3d rot = rpy_matrix(p.alpha, p.beta, p.gamma);
  const Eigen::Vector3d offset(p.d_x, p.d_y, 0.0);
  const double ds = p.l / grid_.n_s;
  const int nk = static_cast<int>(nodes_.size()), ns = grid_.n_s, ne = static_cast<int>(edges_.size());
  auto axial_at = [&](int j) { return Eigen::Vector3d(0.0, 0.0, -0.5 * p.l + (j + 0.5) * ds); };
  auto pen_at = [&](const Eigen::Vector3d& body, const Eigen::Vector3d& axial, int* feature) {
    const Eigen::Vector3d q = offset + rot * (body + axial);
    const DistanceField::Sample fs = field_.query(q.head<2>());
    if (feature) *feature = fs.feature;
    return fs.distance - clearance_m_;
  };
  const Eigen::Vector3d axial_step = rot * Eigen::Vector3d(0.0, 0.0, ds);
  const Eigen::Vector2d drift = axial_step.head<2>();  // motion of a surface point across one slice
  // Mean over a slice (v in [-1/2, 1/2]) of the positive penetration and of
  // v times it, for the surface point at `q` mid-slice.
  auto slice_integral = [&](const Eigen::Vector3d& q, double& j0, double& j1) {
    const DistanceField::Sample fs = field_.query(q.head<2>());
    if (fs.feature % 2 == 0) {
      // Nearest to an edge: linear in v.
      positive_part_1d(fs.distance - clearance_m_, fs.gradient.dot(drift), j0, j1);
      return;
    }
    // Nearest to a hole vertex: |r0 + v w| - clearance, positive outside the
    // roots of a quadratic.
    j0 = j1 = 0.0;
    if (fs.distance <= 0.0) return;
    const Eigen::Vector2d r0 = q.head<2>() - fs.closest;
    const double qa = drift.squaredNorm(), qb = r0.dot(drift), qc = r0.squaredNorm() - clearance_m_ * clearance_m_;
    std::array<std::pair<double, double>, 2> spans{{{-0.5, 0.5}, {0.5, 0.5}}};
    const double disc = qb * qb - qa * qc;
    if (qa > 0.0 && disc > 0.0) {
      const double root = std::sqrt(disc);
      spans = {{{-0.5, std::min(0.5, (-qb - root) / qa)}, {std::max(-0.5, (-qb + root) / qa), 0.5}}};
    }
    for (const auto& [va, vb] : spans) {
      if (vb <= va) continue;
      for (int g = 0; g < kGauss; ++g) {
        const double v = 0.5 * (va + vb) + kGaussX[g] * (vb - va);
        const double e = std::max(0.0, (r0 + v * drift).norm() - clearance_m_);
        j0 += kGaussW[g] * (vb - va) * e;
        j1 += kGaussW[g] * (vb - va) * v * e;
      }
    }
  };

  // Signed penetration and nearest hole feature at cell centers and theta
  // edges, per slice.
  const std::size_t n_centers = static_cast<std::size_t>(nk) * ns, n_edges = static_cast<std::size_t>(ne) * ns;
  std::vector<double> pen(n_centers), edge(n_edges);
  std::vector<int> pen_feature(n_centers), edge_feature(n_edges);
  double deepest = 0.0;
  for (int j = 0; j < ns; ++j) {
    const Eigen::Vector3d axial = axial_at(j);
    for (int k = 0; k < nk; ++k) {
      const std::size_t i = static_cast<std::size_t>(j) * nk + k;
      pen[i] = pen_at(centers_[k], axial, &pen_feature[i]);
      deepest = std::max(deepest, pen[i]);
    }
    for (int e = 0; e < ne; ++e) {
      const std::size_t i = static_cast<std::size_t>(j) * ne + e;
      edge[i] = pen_at(edges_[e], axial, &edge_feature[i]);
      deepest = std::max(deepest, edge[i]);
    }
  }
  if (max_penetration) *max_penetration = deepest;

  const double stiffness = params_.contact_stiffness;
  const double mu = params_.friction;
  std::vector<double> cuts;
  for (int j = 0; j < ns; ++j) {
    const Eigen::Vector3d axial = axial_at(j);
    for (int k = 0; k < nk; ++k) {
      const std::size_t ic = static_cast<std::size_t>(j) * nk + k;
      const std::size_t il = static_cast<std::size_t>(j) * ne + left_edge_[k], ih = il + 1;
      const double a = pen[ic], lo = edge[il], hi = edge[ih];
      // Largest change of penetration across the slice, over the center and
      // both theta edges (differences to the neighbouring slices).
      double reach = 0.0;
      if (ns > 1) {
        auto half_step = [&](const std::vector<double>& v, std::size_t stride, std::size_t i) {
          if (j == 0) return 0.5 * std::abs(v[i + stride] - v[i]);
          if (j == ns - 1) return 0.5 * std::abs(v[i] - v[i - stride]);
          return 0.25 * std::abs(v[i + stride] - v[i - stride]);
        };
        reach = std::max({half_step(pen, nk, ic), half_step(edge, ne, il), half_step(edge, ne, ih)});
      }
      if (std::max({a, lo, hi}) + reach <= 0.0) continue;

      auto emit = [&](const NodeGeom& g) {
        const Eigen::Vector3d mid = offset + rot * (g.point + axial);
        double j0 = 0.0, j1 = 0.0;
        slice_integral(mid, j0, j1);
        if (j0 <= 0.0) return;
        ContactElement e;
        e.node = static_cast<std::size_t>(k);
        e.area = g.radius * g.weight * ds;
        e.penetration = j0;
        e.tau_arm = g.point.dot(g.normal);
        e.position = mid + (j1 / j0) * axial_step;
        const Eigen::Vector3d n = rot * g.normal;
        const double press = stiffness * j0 * e.area;
        // Element force on the peg: inward normal pressure plus axial friction.
        e.force = Eigen::Vector3d(-press * n.x(), -press * n.y(), mu * press);
        out.push_back(e);
      };
      const bool full = std::min({a, lo, hi}) - reach >= 0.0;
      const bool one_feature = pen_feature[ic] == edge_feature[il] && pen_feature[ic] == edge_feature[ih];
      if (full && one_feature) {
        for (int i = 0; i < kGauss; ++i) emit(gauss_[static_cast<std::size_t>(k) * kGauss + i]);
        continue;
      }

      // Split the cell where the nearest hole feature changes (the
      // penetration kinks there) and where some part of the slice starts
      // to penetrate; every piece is then smooth.
      const std::size_t seg = nodes_[k].segment;
      const double h = nodes_[k].weight, t0 = nodes_[k].point.theta - 0.5 * h;
      // Each probe carries the penetration range over the slice; the slice
      // mean of the positive part bends where either end crosses zero.
      struct Probe {
        double u, lower, upper;
        int feature;
      };
      auto probe_of = [&](double u, const Eigen::Vector3d& body) {
        const Eigen::Vector3d q = offset + rot * (body + axial);
        const DistanceField::Sample fs = field_.query(q.head<2>());
        const double half = 0.5 * std::abs(fs.gradient.dot(drift));
        const double e = fs.distance - clearance_m_;
        return Probe{u, e - half, e + half, fs.feature};
      };
      auto probe_at = [&](double u) { return probe_of(u, geometry_at(seg, t0 + u * h, 0.0).point); };
      auto differ = [](const Probe& x, const Probe& y) {
        return x.feature != y.feature || (x.lower > 0.0) != (y.lower > 0.0) || (x.upper > 0.0) != (y.upper > 0.0);
      };
      auto split = [&](auto&& self, const Probe& x, const Probe& y, int depth) -> void {
        if (!differ(x, y)) return;
        if (depth == kBisections) {
          cuts.push_back(0.5 * (x.u + y.u));
          return;
        }
        const Probe m = probe_at(0.5 * (x.u + y.u));
        self(self, x, m, depth + 1);
        self(self, m, y, depth + 1);
      };
      std::vector<Probe> samples{probe_of(0.0, edges_[left_edge_[k]])};
      if (!full) {
        // A sub-grid catches contact that starts and ends inside the cell.
        for (int i = 0; i < kProbes; ++i) {
          if (i == kProbes / 2) samples.push_back(probe_of(0.5, centers_[k]));
          samples.push_back(probe_of((i + 0.5) / kProbes, probes_[static_cast<std::size_t>(k) * kProbes + i]));
        }
      } else {
        samples.push_back(probe_of(0.5, centers_[k]));
      }
      samples.push_back(probe_of(1.0, edges_[left_edge_[k] + 1]));
      cuts.assign({0.0, 1.0});
      for (std::size_t i = 0; i + 1 < samples.size(); ++i) split(split, samples[i], samples[i + 1], 0);
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double ua = cuts[i], ub = cuts[i + 1];
        if (ub <= ua) continue;
        if (!full && probe_at(0.5 * (ua + ub)).upper <= 0.0) continue;
        for (int g = 0; g < kGauss; ++g)
          emit(geometry_at(seg, t0 + (0.5 * (ua + ub) + kGaussX[g] * (ub - ua)) * h, kGaussW[g] * (ub - ua) * h));
      }
    }
  }
  return out;
}

ContactResult ContactModel::evaluate(const PoseState& p, std::mt19937_64* tau_rng) const {
  const bool random_tau = params_.tau_model == TauModel::BoundedRandom && params_.tau_scale > 0.0;
  if (random_tau && tau_rng == nullptr) throw Error("plant: bounded-random tau model needs an RNG");
  ContactResult out;
  const auto elems = collect(p, &out.max_penetration);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::Vector3d f = Eigen::Vector3d::Zero(), m = Eigen::Vector3d::Zero();
  for (const auto& e : elems) {
    f += e.force;
    m += e.position.cross(e.force);
    if (random_tau) {
      const double tau = params_.tau_scale * params_.contact_stiffness * e.penetration * unit(*tau_rng);
      m.z() += tau * e.tau_arm * e.area;
    }
  }
  out.wrench = {f, m, Frame::Assembly};
  out.jammed = out.max_penetration > params_.penetration_cap;
  return out;
}

std::vector<ContactElement> ContactModel::elements(const PoseState& p) const { return collect(p, nullptr); }

double penetration(const PlantParams& params, const PoseState& p, const BoundaryPoint& node_mm,
                   double s) {
  const ContactModel model(params, Grid{1, 1});
  const BoundaryPoint node_m{node_mm.theta, node_mm.radius * 1e-3, node_mm.normal_angle};
  return model.penetration(p, node_m, s);
}

ContactResult fpm(const PlantParams& params, const PoseState& p, Grid grid,
                  std::mt19937_64* tau_rng) {
  return ContactModel(params, grid).evaluate(p, tau_rng);
}

Wrench couple_output(const Wrench& w, const FrameOffset& offset_sa) {
  const Eigen::Vector3d f = offset_sa.rotation * w.force;
  const Eigen::Vector3d m = offset_sa.rotation * w.moment + offset_sa.translation.cross(f);
  return {f, m, Frame::Sensor};
}

Wrench output_equation(const ContactModel& model, const PoseState& p, const FrameOffset& offset_sa,
                       std::mt19937_64* tau_rng) {
  return couple_output(model.evaluate(p, tau_rng).wrench, offset_sa);
}

Wrench output_equation(const PlantParams& params, const PoseState& p, const FrameOffset& offset_sa) {
  return couple_output(fpm(params, p).wrench, offset_sa);
}

PoseIncrement couple_state(const MotionIncrement& dr, const FrameOffset& offset_ra) {
  const Eigen::Matrix3d& r = offset_ra.rotation;
  const Eigen::Vector3d origin_velocity = dr.translation + dr.rotation.cross(offset_ra.translation);
  return {r.transpose() * origin_velocity, r.transpose() * dr.rotation};
}

PegPlacement placement_of(const PoseState& p) {
  const Eigen::Matrix3d rot = rpy_matrix(p.alpha, p.beta, p.gamma);
  const Eigen::Vector3d axis = rot.col(2);
  const Eigen::Vector3d mid(p.d_x, p.d_y, -0.5 * p.l);
  return {mid - axis * (0.5 * p.l / axis.z()), rot};
}

PoseState pose_of(const PegPlacement& placement) {
  const Eigen::Vector3d axis = placement.rotation.col(2);
  const double l = -placement.tip.z();
  const Eigen::Vector3d mid = placement.tip + axis * (0.5 * l / axis.z());
  const Eigen::Vector3d rpy = rpy_from_matrix(placement.rotation);
  return {mid.x(), mid.y(), l, rpy.x(), rpy.y(), rpy.z()};
}

PoseState compose(const PoseState& p, const PoseIncrement& dp) {
  const PegPlacement before = placement_of(p);
  const Eigen::Vector3d origin(0.0, 0.0, -0.5 * p.l);
  const Eigen::Matrix3d turn = rpy_matrix(dp.rotation.x(), dp.rotation.y(), dp.rotation.z());
  PegPlacement after;
  after.tip = origin + turn * (before.tip - origin) + dp.translation;
  after.rotation = turn * before.rotation;
  return pose_of(after);
}

StateUpdate state_equation(const PoseState& p, const MotionIncrement& dr,
                           const FrameOffset& offset_ra, double hole_depth) {
  StateUpdate out{compose(p, couple_state(dr, offset_ra)), false};
  if (out.pose.l < 0.0 || out.pose.l > hole_depth) {
    out.pose.l = std::clamp(out.pose.l, 0.0, hole_depth);
    out.clamped = true;
  }
  return out;
}

}  // namespace peghole
