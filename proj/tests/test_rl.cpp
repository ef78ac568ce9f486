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

#include "peghole/rl.hpp"

#include <doctest.h>

#include <random>

using namespace peghole;
using AgentD = Agent<double>;

namespace {

DdpgHyper small_hyper() {
  DdpgHyper h;
  h.hidden = {16, 16};
  h.actor_final_range = 0.1;
  h.batch_size = 8;
  return h;
}

std::vector<Transition> random_transitions(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Transition> out(static_cast<std::size_t>(n));
  for (auto& t : out) {
    for (int i = 0; i < kStateDim; ++i) {
      t.s[i] = g(rng);
      t.s2[i] = g(rng);
    }
    for (int i = 0; i < kActionDim; ++i) t.a[i] = u(rng);
    t.r = -std::abs(g(rng));
    t.done = u(rng) > 0.7;
  }
  return out;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(a) + std::abs(b), 1e-7); }

}  // namespace

TEST_CASE("mlp backward matches finite differences") {
  std::mt19937_64 rng(1);
  Mlp<double> net({5, 7, 3}, Activation::Tanh, Activation::Tanh);
  net.initialize(rng, 0.5);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 4);
  Eigen::MatrixXd w = Eigen::MatrixXd::Random(3, 4);  // loss = sum(w o y)
  Mlp<double>::Tape tape;
  net.forward(x, tape);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(net.num_params());
  const Eigen::MatrixXd dx = net.backward(tape, w, g);
  auto loss = [&](const Mlp<double>& m, const Eigen::MatrixXd& in) { return (m.forward(in).array() * w.array()).sum(); };
  for (Eigen::Index k = 0; k < net.num_params(); ++k) {
    Mlp<double> p = net, q = net;
    p.params()[k] += 1e-6;
    q.params()[k] -= 1e-6;
    CHECK(rel_err(g[k], (loss(p, x) - loss(q, x)) / 2e-6) < 1e-6);
  }
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Eigen::MatrixXd xp = x, xm = x;
    xp.data()[k] += 1e-6;
    xm.data()[k] -= 1e-6;
    CHECK(rel_err(dx.data()[k], (loss(net, xp) - loss(net, xm)) / 2e-6) < 1e-6);
  }
}

TEST_CASE("adam first step moves by the learning rate") {
  Adam<double> opt;
  opt.lr = 0.01;
  opt.reset(3);
  Eigen::VectorXd p(3), g(3);
  p << 1, 2, 3;
  g << 0.5, -2, 0;
  opt.step(p, g);
  CHECK(p[0] == doctest::Approx(1 - 0.01).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(2 + 0.01).epsilon(1e-6));
  CHECK(p[2] == 3.0);
}

TEST_CASE("soft update is a convex blend") {
  std::mt19937_64 rng(2);
  Mlp<double> a({3, 4, 2}, Activation::Tanh, Activation::Linear), b = a;
  a.initialize(rng, 0.1);
  b.initialize(rng, 0.1);
  const Eigen::VectorXd expect = 0.9 * b.params() + 0.1 * a.params();
  soft_update(b, a, 0.1);
  CHECK((b.params() - expect).norm() < 1e-14);
}

TEST_CASE("replay buffer overwrites the oldest entry") {
  ReplayBuffer buf(3);
  for (int i = 0; i < 5; ++i) {
    Transition t;
    t.r = i;
    buf.add(t);
  }
  CHECK(buf.size() == 3);
  std::vector<double> r;
  for (std::size_t i = 0; i < 3; ++i) r.push_back(buf.at(i).r);
  std::sort(r.begin(), r.end());
  CHECK(r == std::vector<double>{2, 3, 4});
  std::mt19937_64 rng(3);
  for (auto i : buf.sample(100, rng)) CHECK(i < 3);
}

TEST_CASE("td target masks terminal transitions") {
  std::mt19937_64 rng(4);
  const auto h = small_hyper();
  AgentD agent(h, rng);
  auto tr = random_transitions(rng, 6);
  tr[0].done = true;
  tr[1].done = false;
  const auto b = make_batch<double>(tr);
  const auto y = td_target(agent, b, h);
  CHECK(y(0, 0) == tr[0].r * h.reward_scale);
  CHECK(y(0, 1) != tr[1].r * h.reward_scale);
}

TEST_CASE("actor and critic gradients match finite differences") {
  std::mt19937_64 rng(5);
  const auto h = small_hyper();
  AgentD agent(h, rng);
  AgentD teacher(h, rng);
  const auto b = make_batch<double>(random_transitions(rng, 16));
  Distillation<double> d;
  d.sources = {&teacher};
  d.weights = Eigen::MatrixXd::Constant(1, 6, 0.3);
  const Distillation<double>* none = nullptr;
  for (const Distillation<double>* dist : {none, static_cast<const Distillation<double>*>(&d)}) {
    Eigen::VectorXd gc, ga;
    critic_loss(agent, b, h, dist, &gc);
    actor_loss(agent, b, dist, &ga);
    std::uniform_int_distribution<Eigen::Index> pc(0, agent.critic.num_params() - 1), pa(0, agent.actor.num_params() - 1);
    for (int k = 0; k < 20; ++k) {
      const auto i = pc(rng);
      AgentD p = agent, m = agent;
      p.critic.params()[i] += 1e-5;
      m.critic.params()[i] -= 1e-5;
      CHECK(rel_err(gc[i], (critic_loss(p, b, h, dist) - critic_loss(m, b, h, dist)) / 2e-5) < 1e-4);
      const auto j = pa(rng);
      p = agent;
      m = agent;
      p.actor.params()[j] += 1e-5;
      m.actor.params()[j] -= 1e-5;
      CHECK(rel_err(ga[j], (actor_loss(p, b, dist) - actor_loss(m, b, dist)) / 2e-5) < 1e-4);
    }
  }
}

TEST_CASE("zero distillation weights reduce to plain ddpg bitwise") {
  std::mt19937_64 rng(6);
  const auto h = small_hyper();
  Agent<float> agent(h, rng), teacher(h, rng);
  const auto b = make_batch<float>(random_transitions(rng, 32));
  Distillation<float> d;
  d.sources = {&teacher};
  d.weights = Eigen::MatrixXd::Zero(1, 6);
  const Distillation<float>* none = nullptr;
  Eigen::VectorXf g0, g1;
  CHECK(critic_loss(agent, b, h, none, &g0) == critic_loss(agent, b, h, &d, &g1));
  CHECK(g0 == g1);
  CHECK(actor_loss(agent, b, none, &g0) == actor_loss(agent, b, &d, &g1));
  CHECK(g0 == g1);
}

TEST_CASE("a teacher equal to the student adds nothing to the actor loss") {
  std::mt19937_64 rng(7);
  const auto h = small_hyper();
  AgentD agent(h, rng);
  const auto b = make_batch<double>(random_transitions(rng, 8));
  Distillation<double> d;
  d.sources = {&agent};
  d.weights = Eigen::MatrixXd::Ones(1, 6);
  CHECK(actor_loss(agent, b, &d) == doctest::Approx(actor_loss(agent, b)).epsilon(1e-15));
  CHECK(critic_loss(agent, b, h, &d) == doctest::Approx(critic_loss(agent, b, h)).epsilon(1e-15));
}

TEST_CASE("distillation rejects malformed weights") {
  std::mt19937_64 rng(8);
  const auto h = small_hyper();
  AgentD agent(h, rng);
  Distillation<double> d;
  d.sources = {&agent};
  d.weights = Eigen::MatrixXd::Ones(2, 6);
  CHECK_THROWS_AS(d.validate(), Error);
  d.weights = -Eigen::MatrixXd::Ones(1, 6);
  CHECK_THROWS_AS(d.validate(), Error);
}

TEST_CASE("noise schedule") {
  DdpgHyper h;
  h.warmup_episodes = 10;
  h.noise_decay_episodes = 100;
  CHECK(h.noise_std(0) == doctest::Approx(h.noise_start));
  CHECK(h.noise_std(10) == doctest::Approx(h.noise_start));
  CHECK(h.noise_std(60) == doctest::Approx(0.5 * (h.noise_start + h.noise_end)));
  CHECK(h.noise_std(1000) == doctest::Approx(h.noise_end));
  h.batch_size = 0;
  CHECK_THROWS_AS(h.validate(), Error);
}

TEST_CASE("checkpoints round-trip exactly") {
  std::mt19937_64 rng(9);
  const auto h = small_hyper();
  Agent<float> a(h, rng);
  a.config_hash = "abc";
  const std::string text = checkpoint_to_text(a);
  const auto b = checkpoint_from_text<float>(text);
  CHECK(checkpoint_to_text(b) == text);
  CHECK(b.actor.params() == a.actor.params());
  CHECK(b.critic_target.params() == a.critic_target.params());
  CHECK(b.config_hash == "abc");
  CHECK_THROWS_AS(checkpoint_from_text<float>("{\"version\":\"other\"}"), Error);
}

TEST_CASE("training is deterministic and zero-weight distillation changes nothing") {
  PlantParams p{make_circle("cyl", 7.5)};
  p.hole_depth = 0.01;
  EnvConfig cfg(p);
  cfg.gains = {2e-5, 2e-5, 2e-7, 2e-2, 2e-2, 5.55e-2};
  cfg.max_steps = 40;
  auto h = small_hyper();
  h.warmup_episodes = 1;
  h.batch_size = 16;
  const auto a = train<float>(AssemblyEnv(cfg), h, 3, 42);
  const auto b = train<float>(AssemblyEnv(cfg), h, 3, 42);
  std::mt19937_64 rng(1);
  Agent<float> teacher(h, rng);
  Distillation<float> d;
  d.sources = {&teacher};
  d.weights = Eigen::MatrixXd::Zero(1, 6);
  const auto c = train<float>(AssemblyEnv(cfg), h, 3, 42, &d);
  REQUIRE(a.curve.size() == 3);
  CHECK(a.updates > 0);
  CHECK(curve_csv(a.curve) == curve_csv(b.curve));
  CHECK(checkpoint_to_text(a.agent) == checkpoint_to_text(b.agent));
  CHECK(checkpoint_to_text(a.agent) == checkpoint_to_text(c.agent));
  CHECK(a.best_episode == -1);
}
