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
#include "peghole/etcl.hpp"

#include <doctest.h>

using namespace peghole;

namespace {

EnvConfig cylinder_env() {
  PlantParams p{make_circle("cyl", 7.5)};
  p.hole_depth = 0.02;
  EnvConfig cfg(p);
  cfg.gains = tune_reference(p, 2.0, 5.55e-2);
  return cfg;
}

}  // namespace

TEST_CASE("reward value") {
  const RewardCoeffs c;
  CHECK(reward_value(c, 0.01, {3, 4, 0}, {0, 0, 0.5}) == doctest::Approx(-1.0 - 0.5 - 0.5));
  CHECK_THROWS_AS((RewardCoeffs{-1, 0, 0}.validate()), Error);
}

TEST_CASE("reset is deterministic and starts inside the capture radius") {
  AssemblyEnv a(cylinder_env()), b(cylinder_env());
  for (std::uint64_t s : {1u, 2u, 99u}) {
    const auto oa = a.reset(s), ob = b.reset(s);
    CHECK((oa - ob).norm() == 0.0);
    CHECK(std::hypot(a.pose().d_x, a.pose().d_y) <= 0.9 * 1e-4);
    CHECK(a.pose().l == 0.0);
    CHECK(a.active());
  }
  a.reset(1);
  b.reset(2);
  CHECK((a.observation() - b.observation()).norm() > 0.0);
}

TEST_CASE("a copied env continues the same episode") {
  AssemblyEnv env(cylinder_env());
  env.reset(7);
  for (int i = 0; i < 5; ++i) env.step(Vector6d::Zero());
  AssemblyEnv copy = env;
  Vector6d a;
  a << 0.3, -0.2, 0.1, 0.0, 0.5, -0.4;
  for (int i = 0; i < 10; ++i) {
    const auto x = env.step(a), y = copy.step(a);
    CHECK((x.state - y.state).norm() == 0.0);
    CHECK(x.reward == y.reward);
  }
}

TEST_CASE("zero action inserts the peg to the bottom") {
  AssemblyEnv env(cylinder_env());
  env.reset(3);
  const auto traj = rollout_zero_action(env, 150);
  REQUIRE(!traj.empty());
  CHECK(traj.back().info.success);
  CHECK(traj.back().terminal);
  CHECK(traj.back().done);
  // depth estimate is monotone in expectation and never exceeds L by much
  CHECK(traj.back().info.depth_estimate == doctest::Approx(0.02).epsilon(0.05));
  for (const auto& s : traj) {
    CHECK_FALSE(s.info.jammed);
    CHECK(s.reward <= 0.0);
  }
  CHECK(traj.size() < 150);
}

TEST_CASE("the step limit ends an episode without terminal flag") {
  auto cfg = cylinder_env();
  cfg.max_steps = 5;
  AssemblyEnv env(cfg);
  env.reset(1);
  StepResult last;
  for (int i = 0; i < 5; ++i) last = env.step(Vector6d::Zero());
  CHECK(last.done);
  CHECK_FALSE(last.terminal);
  CHECK_THROWS_AS(env.step(Vector6d::Zero()), Error);
}

TEST_CASE("action -1 removes the compliance correction") {
  AssemblyEnv env(cylinder_env());
  env.reset(4);
  const auto r = env.step(-Vector6d::Ones());
  CHECK(r.info.effective.vector().norm() == 0.0);
  const auto big = env.step(Vector6d::Constant(5.0));
  CHECK((big.info.action - Vector6d::Ones()).norm() == 0.0);
}

TEST_CASE("offsets are proper rigid transforms") {
  AssemblyEnv env(cylinder_env());
  env.reset(9);
  for (int i = 0; i < 20; ++i) env.step(Vector6d::Zero());
  CHECK_NOTHROW(env.offset_sa().validate());
  CHECK_NOTHROW(env.offset_ra().validate());
}

TEST_CASE("set_gains validates") {
  AssemblyEnv env(cylinder_env());
  CHECK_THROWS_AS(env.set_gains(ComplianceGains{}), Error);
}

TEST_CASE("trajectory csv has one row per step") {
  AssemblyEnv env(cylinder_env());
  env.reset(5);
  const auto traj = rollout_zero_action(env, 8);
  const std::string csv = trajectory_csv(traj);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(traj.size()) + 1);
  CHECK(csv.rfind("step,", 0) == 0);
}
