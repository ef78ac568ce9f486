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
#include "peghole/plant.hpp"

#include <doctest.h>

#include <random>

using namespace peghole;
using Eigen::Vector3d;

namespace {

FrameOffset random_offset(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ang(-kPi, kPi), pos(-0.2, 0.2);
  return {rpy_matrix(ang(rng), 0.5 * ang(rng), ang(rng)), Vector3d(pos(rng), pos(rng), pos(rng))};
}

PlantParams cylinder(double r_mm = 7.5, double depth = 0.03) {
  PlantParams p{make_circle("cyl", r_mm)};
  p.hole_depth = depth;
  return p;
}

}  // namespace

TEST_CASE("rpy matrix composes as Rz Ry Rx and inverts") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.4, 1.4);
  for (int k = 0; k < 100; ++k) {
    const double r = u(rng), p = u(rng), y = 2 * u(rng);
    const Eigen::Matrix3d m = rpy_matrix(r, p, y);
    const Eigen::Matrix3d ref = (Eigen::AngleAxisd(y, Vector3d::UnitZ()) * Eigen::AngleAxisd(p, Vector3d::UnitY()) *
                                 Eigen::AngleAxisd(r, Vector3d::UnitX()))
                                    .toRotationMatrix();
    CHECK((m - ref).norm() < 1e-14);
    CHECK((rpy_from_matrix(m) - Vector3d(r, p, y)).norm() < 1e-12);
  }
}

TEST_CASE("frame offsets reject non-rotations") {
  FrameOffset f;
  CHECK_NOTHROW(f.validate());
  f.rotation(0, 0) = -1.0;
  CHECK_THROWS_AS(f.validate(), Error);
  f.rotation = 1.01 * Eigen::Matrix3d::Identity();
  CHECK_THROWS_AS(f.validate(), Error);
}

TEST_CASE("couple_output is a rigid wrench transfer") {
  // pure force applied at the {A} origin, sensor 0.1 m above it
  FrameOffset off;
  off.translation = Vector3d(0, 0, -0.1);  // {A} origin seen from {S}
  const Wrench w{{2.0, 0, 0}, Vector3d::Zero(), Frame::Assembly};
  const Wrench s = couple_output(w, off);
  CHECK(s.frame == Frame::Sensor);
  CHECK((s.force - Vector3d(2, 0, 0)).norm() < 1e-15);
  CHECK((s.moment - Vector3d(0, -0.2, 0)).norm() < 1e-15);
}

TEST_CASE("decoupling inverts coupling") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 10.0);
  for (int k = 0; k < 1000; ++k) {
    const FrameOffset off = random_offset(rng);
    const Wrench w{{n(rng), n(rng), n(rng)}, {n(rng), n(rng), n(rng)}, Frame::Assembly};
    CHECK((decouple_output(couple_output(w, off), off).vector() - w.vector()).norm() <= 1e-10);
    const PoseIncrement dp{{n(rng) * 1e-4, n(rng) * 1e-4, n(rng) * 1e-4}, {n(rng) * 1e-4, n(rng) * 1e-4, n(rng) * 1e-4}};
    CHECK((couple_state(decouple_state(dp, off), off).vector() - dp.vector()).norm() <= 1e-10);
  }
}

TEST_CASE("decouple_state caps each part separately") {
  const PoseIncrement dp{{1e-2, 0, 0}, {0, 1e-4, 0}};
  const auto out = decouple_state(dp, FrameOffset::identity(), MotionCaps{5e-4, 5e-4});
  CHECK(out.clipped);
  CHECK(out.motion.translation.norm() == doctest::Approx(5e-4));
  CHECK((out.motion.rotation - Vector3d(0, 1e-4, 0)).norm() < 1e-18);
}

TEST_CASE("pose placement round trip and composition") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 200; ++k) {
    const PoseState p{1e-4 * u(rng), 1e-4 * u(rng), 0.015 + 0.01 * u(rng), 0.01 * u(rng), 0.01 * u(rng), 0.5 * u(rng)};
    CHECK((pose_of(placement_of(p)).vector() - p.vector()).norm() < 1e-12);
    CHECK((compose(p, PoseIncrement{}).vector() - p.vector()).norm() < 1e-12);
  }
  // pure insertion: moving the peg 1 mm along -Z deepens l by 1 mm
  const PoseState p0{0, 0, 0.01, 0, 0, 0};
  const auto up = state_equation(p0, MotionIncrement{{0, 0, -1e-3}, Vector3d::Zero()}, FrameOffset::identity(), 0.03);
  CHECK(up.pose.l == doctest::Approx(0.011).epsilon(1e-12));
  CHECK_FALSE(up.clamped);
  const auto deep = state_equation(p0, MotionIncrement{{0, 0, -0.05}, Vector3d::Zero()}, FrameOffset::identity(), 0.03);
  CHECK(deep.clamped);
  CHECK(deep.pose.l == 0.03);
}

TEST_CASE("centered peg sees no contact") {
  const auto r = fpm(cylinder(), PoseState{0, 0, 0.02, 0, 0, 0});
  CHECK(r.wrench.vector().norm() == 0.0);
  CHECK(r.max_penetration == 0.0);
  CHECK(fpm(cylinder(), PoseState{5e-5, 0, 0.02, 0, 0, 0}).wrench.vector().norm() == 0.0);
}

TEST_CASE("shifted cylinder matches a brute-force wall integral") {
  const double r = 7.5e-3, c = 0.1e-3, d = 0.2e-3, l = 0.02, e = 1e9, mu = 0.1;
  // oracle: exact penetration |q| - r - c over a fine ring, uniform along s
  const int n = 200000;
  double fx = 0, fz = 0;
  for (int i = 0; i < n; ++i) {
    const double th = (i + 0.5) * kTwoPi / n;
    const double qx = r * std::cos(th) + d, qy = r * std::sin(th);
    const double pen = std::hypot(qx, qy) - r - c;
    if (pen <= 0) continue;
    const double press = e * pen * r * (kTwoPi / n) * l;
    fx -= press * std::cos(th);
    fz += mu * press;
  }
  auto params = cylinder();
  const auto w = fpm(params, PoseState{d, 0, l, 0, 0, 0}, Grid{4096, 1}).wrench;
  CHECK(w.force.x() == doctest::Approx(fx).epsilon(1e-3));
  CHECK(w.force.z() == doctest::Approx(fz).epsilon(1e-3));
  CHECK(fx < 0.0);  // the wall pushes the peg back
  CHECK(std::abs(w.force.y()) < 1e-9 * std::abs(fx));
  CHECK(std::abs(w.moment.z()) < 1e-9 * std::abs(fx));
  // friction at +x wall, mid-depth band centered on {A}: M_y = -x F_z
  CHECK(w.moment.y() == doctest::Approx(-(r + d) * fz).epsilon(2e-2));
}

TEST_CASE("mirror symmetry of the wrench for a square peg") {
  PlantParams params{make_rectangle("sq", 15, 15)};
  const PoseState p{1.5e-4, 0, 0.02, 0, 4e-3, 0};
  const PoseState q{-1.5e-4, 0, 0.02, 0, -4e-3, 0};
  const Vector6d a = fpm(params, p).wrench.vector();
  const Vector6d b = fpm(params, q).wrench.vector();
  // reflection x -> -x flips F_x, M_y, M_z
  Vector6d flip;
  flip << -1, 1, 1, 1, -1, -1;
  CHECK((a - flip.cwiseProduct(b)).norm() <= 1e-9 * a.norm());
}

TEST_CASE("jamming above the penetration cap") {
  const auto r = fpm(cylinder(), PoseState{1.2e-3, 0, 0.02, 0, 0, 0});
  CHECK(r.jammed);
  CHECK(r.max_penetration > 1e-3);
}

TEST_CASE("bounded random tangential load only touches M_z") {
  auto params = cylinder();
  params.tau_model = TauModel::BoundedRandom;
  params.tau_scale = 0.2;
  const PoseState p{2e-4, 0, 0.02, 0, 0, 0};
  std::mt19937_64 rng(4);
  const auto a = fpm(params, p, Grid{}, &rng).wrench.vector();
  params.tau_model = TauModel::Zero;
  const auto b = fpm(params, p).wrench.vector();
  CHECK((a.head<5>() - b.head<5>()).norm() == 0.0);
  CHECK(a[5] != b[5]);
  params.tau_model = TauModel::BoundedRandom;
  CHECK_THROWS_AS(fpm(params, p), Error);
}

TEST_CASE("compliance law and revision factors") {
  const ComplianceGains k{1e-5, 2e-5, 3e-7, 1e-2, 2e-2, 5e-2};
  const Wrench f{{1, -2, 3}, {0.1, 0.2, -0.3}, Frame::Assembly};
  const ReferenceWrench ref{2.0};
  const auto dp = compliance_law(f, ref, k);
  CHECK(dp.translation.x() == doctest::Approx(1e-5));
  CHECK(dp.translation.z() == doctest::Approx(3e-7));
  CHECK(dp.rotation.z() == doctest::Approx(-0.3 * 5e-2));
  Vector6d a;
  a << 0.5, -0.5, 2.0, -3.0, std::nan(""), 0.0;
  const auto keff = effective_gains(k, a);
  CHECK(keff.x == doctest::Approx(1.5e-5));
  CHECK(keff.y == doctest::Approx(1e-5));
  CHECK(keff.z == doctest::Approx(6e-7));
  CHECK(keff.alpha == 0.0);
  CHECK(keff.beta == doctest::Approx(2e-2));
  CHECK((adaptive_compliance_law(f, ref, k, Vector6d::Zero()).vector() - dp.vector()).norm() == 0.0);
  CHECK_THROWS_AS((ComplianceGains{0, 1, 1, 1, 1, 1}.validate()), Error);
}

TEST_CASE("depth estimate from the contact height") {
  const auto l = estimate_depth({0.1, 0.099, 0.095, 0.101}, 0.1);
  CHECK(l[0] == 0.0);
  CHECK(l[1] == doctest::Approx(0.001));
  CHECK(l[2] == doctest::Approx(0.005));
  CHECK(l[3] == 0.0);
  DepthEstimator est;
  CHECK(est.estimate(0.05) == 0.0);
  est.record_contact(0.1);
  est.record_contact(0.2);
  CHECK(est.z_contact() == 0.1);
  CHECK(est.estimate(0.097) == doctest::Approx(0.003));
}
