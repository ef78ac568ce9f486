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
 * @file rl.hpp
 * @brief Deterministic actor-critic (DDPG) for the insertion environment.
 *
 * Actor: 12 -> hidden -> 6, tanh everywhere, so actions lie in [-1, 1].
 * Critic: 18 ([s; a]) -> hidden -> 1, tanh hidden, linear output.
 * Optimizer: Adam for both. Targets: Polyak averaging with rate tau.
 *
 * The optional Distillation block adds the weighted per-dimension actor
 * term and per-source critic term used for policy transfer. With every
 * weight zero the losses and gradients are exactly those of plain DDPG.
 *
 * One std::mt19937_64 seeded from the run seed drives initialization,
 * exploration noise, replay sampling and environment reset seeds.
 */

#pragma once

#include "peghole/env.hpp"
#include "peghole/nn.hpp"

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace peghole {

inline constexpr int kStateDim = 12;
inline constexpr int kActionDim = 6;
inline constexpr const char* kCheckpointVersion = "peghole-agent-1";

struct DdpgHyper {
  std::vector<int> hidden{64, 64};
  double gamma = 0.99;
  double actor_lr = 3e-5;
  double critic_lr = 1e-3;
  double tau = 0.005;
  int batch_size = 128;
  int buffer_capacity = 100000;
  int warmup_episodes = 100;
  int updates_per_step = 1;
  double noise_start = 0.3;
  double noise_end = 0.05;
  int noise_decay_episodes = 200;  // counted from the end of warmup
  double reward_scale = 1.0;
  double actor_final_range = 0.0;  // 0: the untrained actor outputs a = 0
  double critic_final_range = 3e-3;
  // Greedy evaluation every eval_interval episodes (0: off) on eval_episodes
  // fixed reset seeds starting at eval_seed; keeps the best-scoring agent.
  // Evaluation draws nothing from the training generator.
  int eval_interval = 0;
  int eval_episodes = 5;
  std::uint64_t eval_seed = 1000000;

  void validate() const;
  /// Exploration standard deviation for a given episode index.
  double noise_std(int episode) const;
};

struct Transition {
  Observation s;
  Vector6d a;
  double r = 0.0;
  Observation s2;
  bool done = false;  // terminal: no bootstrap
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 100000);

  void add(const Transition& t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return data_.at(i); }
  /// Uniform sampling with replacement.
  std::vector<std::size_t> sample(std::size_t n, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> data_;
};

template <typename Scalar>
struct Batch {
  MatrixX<Scalar> s, a, r, s2, done;  // columns are samples; r and done are 1 x B
  Eigen::Index size() const { return s.cols(); }
};

template <typename Scalar>
Batch<Scalar> make_batch(const ReplayBuffer& buffer, const std::vector<std::size_t>& idx);
template <typename Scalar>
Batch<Scalar> make_batch(const std::vector<Transition>& transitions);

template <typename Scalar>
struct Agent {
  Mlp<Scalar> actor, critic, actor_target, critic_target;
  Adam<Scalar> actor_opt, critic_opt;
  ObservationScales scales;
  std::string config_hash;

  Agent() = default;
  Agent(const DdpgHyper& h, std::mt19937_64& rng);

  /// Deterministic policy output, each component in [-1, 1].
  Vector6d act(const Observation& s) const;
  MatrixX<Scalar> actor_forward(const MatrixX<Scalar>& s) const { return actor.forward(s); }
  MatrixX<Scalar> critic_forward(const MatrixX<Scalar>& s, const MatrixX<Scalar>& a) const;
};

/// Extra loss terms for policy distillation from source agents.
/// weights(i, j): weight of source i on action dimension j.
template <typename Scalar>
struct Distillation {
  std::vector<const Agent<Scalar>*> sources;
  Eigen::MatrixXd weights;
  double omega_a = 2.0;
  double omega_c = 5.0;

  bool active() const { return !sources.empty() && (weights.array() != 0.0).any(); }
  void validate() const;
};

/// TD target r * scale + gamma * (1 - done) * Q'(s2, pi'(s2)), 1 x B.
template <typename Scalar>
MatrixX<Scalar> td_target(const Agent<Scalar>& agent, const Batch<Scalar>& b, const DdpgHyper& h);

/// Critic loss; when `grad` is given it receives dL/dtheta_Q (overwritten).
template <typename Scalar>
double critic_loss(const Agent<Scalar>& agent, const Batch<Scalar>& b, const DdpgHyper& h,
                   const Distillation<Scalar>* distill = nullptr, VectorX<Scalar>* grad = nullptr);

/// Actor loss -mean Q(s, pi(s)) plus the distillation term.
template <typename Scalar>
double actor_loss(const Agent<Scalar>& agent, const Batch<Scalar>& b,
                  const Distillation<Scalar>* distill = nullptr, VectorX<Scalar>* grad = nullptr);

struct UpdateStats {
  double actor_loss = 0.0;
  double critic_loss = 0.0;
};

/// One critic step, one actor step, then soft target updates.
template <typename Scalar>
UpdateStats ddpg_update(Agent<Scalar>& agent, const Batch<Scalar>& b, const DdpgHyper& h,
                        const Distillation<Scalar>* distill = nullptr);

struct EpisodeStats {
  int episode = 0;
  double avg_reward = 0.0;  // return / max_steps
  double total_reward = 0.0;
  int steps = 0;
  bool success = false;
  bool failure = false;
};

template <typename Scalar>
struct TrainResult {
  Agent<Scalar> agent;
  std::vector<EpisodeStats> curve;
  long long updates = 0;
  // Filled when eval_interval > 0; best_episode is -1 otherwise.
  Agent<Scalar> best_agent;
  double best_eval = 0.0;
  int best_episode = -1;
};

/// Called after each episode; the trainer owns all state.
using EpisodeHook = std::function<void(const EpisodeStats&)>;

template <typename Scalar>
TrainResult<Scalar> train(AssemblyEnv env, const DdpgHyper& h, int episodes, std::uint64_t seed,
                          const Distillation<Scalar>* distill = nullptr, const EpisodeHook& hook = {});

/// Same, continuing from a given agent and a pre-filled replay buffer.
template <typename Scalar>
TrainResult<Scalar> train_from(AssemblyEnv env, const DdpgHyper& h, int episodes, std::mt19937_64& rng,
                               Agent<Scalar> agent, ReplayBuffer buffer,
                               const Distillation<Scalar>* distill = nullptr, const EpisodeHook& hook = {});

/// Greedy (noise-free) episode.
template <typename Scalar>
std::vector<StepResult> run_episode(AssemblyEnv& env, const Agent<Scalar>& agent, std::uint64_t seed);

/// Mean avg_reward of `episodes` greedy episodes reset with seeds seed, seed+1, ...
template <typename Scalar>
double evaluate_greedy(const AssemblyEnv& env, const Agent<Scalar>& agent, int episodes, std::uint64_t seed);

/// Episode under a fixed action (a = 0 gives the constant-gain controller).
std::vector<StepResult> run_constant(AssemblyEnv& env, const Vector6d& action, std::uint64_t seed);

/// CSV: episode,avg_reward,total_reward,steps,success,failure
std::string curve_csv(const std::vector<EpisodeStats>& curve);

// Checkpoints: structured JSON text; every number round-trips exactly.
template <typename Scalar>
std::string checkpoint_to_text(const Agent<Scalar>& agent);
template <typename Scalar>
Agent<Scalar> checkpoint_from_text(const std::string& text);
template <typename Scalar>
void save_checkpoint(const Agent<Scalar>& agent, const std::string& path);
template <typename Scalar>
Agent<Scalar> load_checkpoint(const std::string& path);

}  // namespace peghole
