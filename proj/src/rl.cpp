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

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace peghole {

using nlohmann::json;

void DdpgHyper::validate() const {
  if (hidden.empty()) throw Error("ddpg: at least one hidden layer is required");
  for (int n : hidden)
    if (n < 1) throw Error("ddpg: hidden sizes must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error("ddpg: gamma must lie in [0, 1]");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) throw Error("ddpg: learning rates must be positive");
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error("ddpg: tau must lie in [0, 1]");
  if (batch_size < 1 || buffer_capacity < batch_size) throw Error("ddpg: need 1 <= batch_size <= buffer_capacity");
  if (warmup_episodes < 0 || updates_per_step < 0) throw Error("ddpg: warmup and updates per step must be >= 0");
  if (noise_start < 0.0 || noise_end < 0.0 || noise_decay_episodes < 0) throw Error("ddpg: bad noise schedule");
  if (!(reward_scale > 0.0)) throw Error("ddpg: reward_scale must be positive");
  if (actor_final_range < 0.0 || critic_final_range < 0.0) throw Error("ddpg: init ranges must be >= 0");
  if (eval_interval < 0 || eval_episodes < 1) throw Error("ddpg: eval_interval must be >= 0 and eval_episodes >= 1");
}

double DdpgHyper::noise_std(int episode) const {
  if (episode < warmup_episodes) return noise_start;
  if (noise_decay_episodes == 0) return noise_end;
  const double t = std::min(1.0, static_cast<double>(episode - warmup_episodes) / noise_decay_episodes);
  return noise_start + (noise_end - noise_start) * t;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw Error("replay buffer capacity must be positive");
  data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::add(const Transition& t) {
  if (data_.size() < capacity_) {
    data_.push_back(t);
  } else {
    data_[next_] = t;
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t n, std::mt19937_64& rng) const {
  if (data_.empty()) throw Error("replay buffer is empty");
  std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = pick(rng);
  return out;
}

namespace {

template <typename Scalar>
Batch<Scalar> batch_from(std::size_t n, const std::function<const Transition&(std::size_t)>& get) {
  Batch<Scalar> b;
  const auto cols = static_cast<Eigen::Index>(n);
  b.s.resize(kStateDim, cols);
  b.a.resize(kActionDim, cols);
  b.r.resize(1, cols);
  b.s2.resize(kStateDim, cols);
  b.done.resize(1, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    const Transition& t = get(static_cast<std::size_t>(c));
    b.s.col(c) = t.s.cast<Scalar>();
    b.a.col(c) = t.a.cast<Scalar>();
    b.r(0, c) = static_cast<Scalar>(t.r);
    b.s2.col(c) = t.s2.cast<Scalar>();
    b.done(0, c) = t.done ? Scalar(1) : Scalar(0);
  }
  return b;
}

template <typename Scalar>
MatrixX<Scalar> stack(const MatrixX<Scalar>& s, const MatrixX<Scalar>& a) {
  MatrixX<Scalar> x(s.rows() + a.rows(), s.cols());
  x << s, a;
  return x;
}

template <typename Scalar>
void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(std::string("ddpg: non-finite ") + what + "; aborting update");
}

}  // namespace

template <typename Scalar>
Batch<Scalar> make_batch(const ReplayBuffer& buffer, const std::vector<std::size_t>& idx) {
  return batch_from<Scalar>(idx.size(), [&](std::size_t k) -> const Transition& { return buffer.at(idx[k]); });
}

template <typename Scalar>
Batch<Scalar> make_batch(const std::vector<Transition>& transitions) {
  return batch_from<Scalar>(transitions.size(), [&](std::size_t k) -> const Transition& { return transitions[k]; });
}

template <typename Scalar>
Agent<Scalar>::Agent(const DdpgHyper& h, std::mt19937_64& rng) {
  h.validate();
  std::vector<int> a_sizes{kStateDim}, c_sizes{kStateDim + kActionDim};
  for (int n : h.hidden) {
    a_sizes.push_back(n);
    c_sizes.push_back(n);
  }
  a_sizes.push_back(kActionDim);
  c_sizes.push_back(1);
  actor = Mlp<Scalar>(a_sizes, Activation::Tanh, Activation::Tanh);
  critic = Mlp<Scalar>(c_sizes, Activation::Tanh, Activation::Linear);
  actor.initialize(rng, h.actor_final_range);
  critic.initialize(rng, h.critic_final_range);
  actor_target = actor;
  critic_target = critic;
  actor_opt.lr = h.actor_lr;
  critic_opt.lr = h.critic_lr;
  actor_opt.reset(actor.num_params());
  critic_opt.reset(critic.num_params());
}

template <typename Scalar>
Vector6d Agent<Scalar>::act(const Observation& s) const {
  const MatrixX<Scalar> out = actor.forward(s.cast<Scalar>());
  Vector6d a = out.col(0).template cast<double>();
  return clamp_revision(a);
}

template <typename Scalar>
MatrixX<Scalar> Agent<Scalar>::critic_forward(const MatrixX<Scalar>& s, const MatrixX<Scalar>& a) const {
  return critic.forward(stack<Scalar>(s, a));
}

template <typename Scalar>
void Distillation<Scalar>::validate() const {
  if (weights.rows() != static_cast<Eigen::Index>(sources.size()) || weights.cols() != kActionDim)
    throw Error("distillation: weight matrix must be (sources x 6)");
  for (const auto* s : sources) {
    if (s == nullptr) throw Error("distillation: null source agent");
    if (s->actor.outputs() != kActionDim || s->actor.inputs() != kStateDim)
      throw Error("distillation: source actor dimensions do not match the target");
    if (s->critic.inputs() != kStateDim + kActionDim) throw Error("distillation: source critic dimensions differ");
  }
  if (!(weights.array() >= 0.0).all() || !weights.allFinite()) throw Error("distillation: weights must be >= 0");
  if (omega_a < 0.0 || omega_c < 0.0) throw Error("distillation: omega must be >= 0");
}

template <typename Scalar>
MatrixX<Scalar> td_target(const Agent<Scalar>& agent, const Batch<Scalar>& b, const DdpgHyper& h) {
  const MatrixX<Scalar> a2 = agent.actor_target.forward(b.s2);
  const MatrixX<Scalar> q2 = agent.critic_target.forward(stack<Scalar>(b.s2, a2));
  const Scalar scale = static_cast<Scalar>(h.reward_scale), gamma = static_cast<Scalar>(h.gamma);
  return (scale * b.r.array() + gamma * (Scalar(1) - b.done.array()) * q2.array()).matrix();
}

template <typename Scalar>
double critic_loss(const Agent<Scalar>& agent, const Batch<Scalar>& b, const DdpgHyper& h,
                   const Distillation<Scalar>* distill, VectorX<Scalar>* grad) {
  if (b.size() == 0) throw Error("ddpg: empty batch");
  const Scalar n = static_cast<Scalar>(b.size());
  const MatrixX<Scalar> y = td_target(agent, b, h);
  const MatrixX<Scalar> x = stack<Scalar>(b.s, b.a);
  typename Mlp<Scalar>::Tape tape;
  const MatrixX<Scalar> q = agent.critic.forward(x, tape);
  const MatrixX<Scalar> diff = q - y;
  Scalar loss = diff.array().square().sum() / n;
  MatrixX<Scalar> dq = (Scalar(2) / n) * diff;

  if (distill != nullptr && distill->active()) {
    distill->validate();
    for (std::size_t i = 0; i < distill->sources.size(); ++i) {
      const double w = distill->weights.row(static_cast<Eigen::Index>(i)).sum();
      if (w == 0.0) continue;
      const Scalar cw = static_cast<Scalar>(distill->omega_c * w);
      const MatrixX<Scalar> dqi = q - distill->sources[i]->critic.forward(x);
      loss += cw * dqi.array().square().sum() / n;
      dq += (cw * Scalar(2) / n) * dqi;
    }
  }
  if (grad != nullptr) {
    *grad = VectorX<Scalar>::Zero(agent.critic.num_params());
    agent.critic.backward(tape, dq, *grad);
  }
  return static_cast<double>(loss);
}

template <typename Scalar>
double actor_loss(const Agent<Scalar>& agent, const Batch<Scalar>& b, const Distillation<Scalar>* distill,
                  VectorX<Scalar>* grad) {
  if (b.size() == 0) throw Error("ddpg: empty batch");
  const Scalar n = static_cast<Scalar>(b.size());
  typename Mlp<Scalar>::Tape actor_tape, critic_tape;
  const MatrixX<Scalar> pi = agent.actor.forward(b.s, actor_tape);
  const MatrixX<Scalar> q = agent.critic.forward(stack<Scalar>(b.s, pi), critic_tape);
  Scalar loss = -q.sum() / n;

  MatrixX<Scalar> d_pi;
  if (grad != nullptr) {
    VectorX<Scalar> scratch = VectorX<Scalar>::Zero(agent.critic.num_params());
    const MatrixX<Scalar> dq = MatrixX<Scalar>::Constant(1, b.size(), -Scalar(1) / n);
    d_pi = agent.critic.backward(critic_tape, dq, scratch).bottomRows(kActionDim);
  }
  if (distill != nullptr && distill->active()) {
    distill->validate();
    for (std::size_t i = 0; i < distill->sources.size(); ++i) {
      const auto row = distill->weights.row(static_cast<Eigen::Index>(i));
      if ((row.array() == 0.0).all()) continue;
      const MatrixX<Scalar> pi_i = distill->sources[i]->actor.forward(b.s);
      for (int j = 0; j < kActionDim; ++j) {
        if (row[j] == 0.0) continue;
        const Scalar cw = static_cast<Scalar>(distill->omega_a * row[j]);
        const auto diff = (pi.row(j) - pi_i.row(j)).eval();
        loss += cw * diff.array().square().sum() / n;
        if (grad != nullptr) d_pi.row(j) += (cw * Scalar(2) / n) * diff;
      }
    }
  }
  if (grad != nullptr) {
    *grad = VectorX<Scalar>::Zero(agent.actor.num_params());
    agent.actor.backward(actor_tape, d_pi, *grad);
  }
  return static_cast<double>(loss);
}

template <typename Scalar>
UpdateStats ddpg_update(Agent<Scalar>& agent, const Batch<Scalar>& b, const DdpgHyper& h,
                        const Distillation<Scalar>* distill) {
  UpdateStats st;
  VectorX<Scalar> g;
  st.critic_loss = critic_loss(agent, b, h, distill, &g);
  require_finite<Scalar>(st.critic_loss, "critic loss");
  agent.critic_opt.step(agent.critic.params(), g);
  st.actor_loss = actor_loss(agent, b, distill, &g);
  require_finite<Scalar>(st.actor_loss, "actor loss");
  agent.actor_opt.step(agent.actor.params(), g);
  soft_update(agent.critic_target, agent.critic, h.tau);
  soft_update(agent.actor_target, agent.actor, h.tau);
  return st;
}

template <typename Scalar>
TrainResult<Scalar> train_from(AssemblyEnv env, const DdpgHyper& h, int episodes, std::mt19937_64& rng,
                               Agent<Scalar> agent, ReplayBuffer buffer, const Distillation<Scalar>* distill,
                               const EpisodeHook& hook) {
  h.validate();
  if (episodes < 0) throw Error("train: episode budget must be >= 0");
  if (distill != nullptr) distill->validate();
  TrainResult<Scalar> out;
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int max_steps = env.config().max_steps;
  for (int ep = 0; ep < episodes; ++ep) {
    Observation obs = env.reset(rng());
    const double sigma = h.noise_std(ep);
    EpisodeStats stats;
    stats.episode = ep;
    StepResult r;
    do {
      Vector6d a = agent.act(obs);
      for (int i = 0; i < kActionDim; ++i) a[i] += sigma * gauss(rng);
      a = clamp_revision(a);
      r = env.step(a);
      buffer.add({obs, a, r.reward, r.state, r.terminal});
      stats.total_reward += r.reward;
      ++stats.steps;
      if (ep >= h.warmup_episodes && buffer.size() >= static_cast<std::size_t>(h.batch_size)) {
        for (int u = 0; u < h.updates_per_step; ++u) {
          const auto idx = buffer.sample(static_cast<std::size_t>(h.batch_size), rng);
          ddpg_update(agent, make_batch<Scalar>(buffer, idx), h, distill);
          ++out.updates;
        }
      }
      obs = r.state;
    } while (!r.done);
    stats.avg_reward = stats.total_reward / max_steps;
    stats.success = r.info.success;
    stats.failure = r.info.jammed || r.info.breach;
    out.curve.push_back(stats);
    if (hook) hook(stats);
    if (h.eval_interval > 0 && (ep + 1) % h.eval_interval == 0) {
      const double score = evaluate_greedy(env, agent, h.eval_episodes, h.eval_seed);
      if (out.best_episode < 0 || score > out.best_eval) {
        out.best_eval = score;
        out.best_episode = ep;
        out.best_agent = agent;
      }
    }
  }
  out.agent = std::move(agent);
  return out;
}

template <typename Scalar>
TrainResult<Scalar> train(AssemblyEnv env, const DdpgHyper& h, int episodes, std::uint64_t seed,
                          const Distillation<Scalar>* distill, const EpisodeHook& hook) {
  h.validate();
  std::mt19937_64 rng(seed);
  Agent<Scalar> agent(h, rng);
  agent.scales = env.config().scales;
  return train_from<Scalar>(std::move(env), h, episodes, rng, std::move(agent),
                            ReplayBuffer(static_cast<std::size_t>(h.buffer_capacity)), distill, hook);
}

template <typename Scalar>
std::vector<StepResult> run_episode(AssemblyEnv& env, const Agent<Scalar>& agent, std::uint64_t seed) {
  std::vector<StepResult> out;
  Observation obs = env.reset(seed);
  StepResult r;
  do {
    r = env.step(agent.act(obs));
    out.push_back(r);
    obs = r.state;
  } while (!r.done);
  return out;
}

template <typename Scalar>
double evaluate_greedy(const AssemblyEnv& env, const Agent<Scalar>& agent, int episodes, std::uint64_t seed) {
  if (episodes < 1) throw Error("evaluate_greedy: need at least one episode");
  AssemblyEnv e = env;
  double total = 0.0;
  for (int k = 0; k < episodes; ++k)
    for (const auto& r : run_episode(e, agent, seed + static_cast<std::uint64_t>(k))) total += r.reward;
  return total / (static_cast<double>(episodes) * env.config().max_steps);
}

std::vector<StepResult> run_constant(AssemblyEnv& env, const Vector6d& action, std::uint64_t seed) {
  std::vector<StepResult> out;
  env.reset(seed);
  StepResult r;
  do {
    r = env.step(action);
    out.push_back(r);
  } while (!r.done);
  return out;
}

std::string curve_csv(const std::vector<EpisodeStats>& curve) {
  std::ostringstream os;
  os.precision(10);
  os << "episode,avg_reward,total_reward,steps,success,failure\n";
  for (const auto& e : curve)
    os << e.episode << ',' << e.avg_reward << ',' << e.total_reward << ',' << e.steps << ','
       << (e.success ? 1 : 0) << ',' << (e.failure ? 1 : 0) << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

template <typename Scalar>
json vec_json(const VectorX<Scalar>& v) {
  std::vector<double> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = static_cast<double>(v[i]);
  return out;
}

template <typename Scalar>
VectorX<Scalar> vec_from(const json& j, Eigen::Index expect, const char* what) {
  const auto v = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(v.size()) != expect)
    throw Error(std::string("checkpoint: '") + what + "' has " + std::to_string(v.size()) + " values, expected " +
                std::to_string(expect));
  VectorX<Scalar> out(expect);
  for (Eigen::Index i = 0; i < expect; ++i) out[i] = static_cast<Scalar>(v[static_cast<std::size_t>(i)]);
  return out;
}

const char* act_name(Activation a) { return a == Activation::Tanh ? "tanh" : "linear"; }
Activation act_from(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "linear") return Activation::Linear;
  throw Error("checkpoint: unknown activation '" + s + "'");
}

template <typename Scalar>
json net_json(const Mlp<Scalar>& m) {
  return {{"sizes", m.sizes()},
          {"hidden", act_name(m.hidden_activation())},
          {"output", act_name(m.output_activation())},
          {"params", vec_json<Scalar>(m.params())}};
}

template <typename Scalar>
Mlp<Scalar> net_from(const json& j) {
  Mlp<Scalar> m(j.at("sizes").get<std::vector<int>>(), act_from(j.at("hidden")), act_from(j.at("output")));
  m.params() = vec_from<Scalar>(j.at("params"), m.num_params(), "params");
  return m;
}

template <typename Scalar>
json opt_json(const Adam<Scalar>& o) {
  return {{"lr", o.lr}, {"beta1", o.beta1}, {"beta2", o.beta2}, {"eps", o.eps},
          {"t", o.t},   {"m", vec_json<Scalar>(o.m)}, {"v", vec_json<Scalar>(o.v)}};
}

template <typename Scalar>
Adam<Scalar> opt_from(const json& j, Eigen::Index n) {
  Adam<Scalar> o;
  o.lr = j.at("lr");
  o.beta1 = j.at("beta1");
  o.beta2 = j.at("beta2");
  o.eps = j.at("eps");
  o.t = j.at("t");
  o.m = vec_from<Scalar>(j.at("m"), n, "m");
  o.v = vec_from<Scalar>(j.at("v"), n, "v");
  return o;
}

json vec3(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
Eigen::Vector3d vec3_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw Error("checkpoint: expected a 3-vector");
  return {v[0], v[1], v[2]};
}

template <typename Scalar>
constexpr const char* scalar_name() {
  return sizeof(Scalar) == 4 ? "float32" : "float64";
}

}  // namespace

template <typename Scalar>
std::string checkpoint_to_text(const Agent<Scalar>& a) {
  json j = {{"version", kCheckpointVersion},
            {"scalar", scalar_name<Scalar>()},
            {"config_hash", a.config_hash},
            {"scales",
             {{"position_mm", vec3(a.scales.position_mm)},
              {"angle_rad", vec3(a.scales.angle_rad)},
              {"force_n", vec3(a.scales.force_n)},
              {"moment_nm", vec3(a.scales.moment_nm)}}},
            {"actor", net_json(a.actor)},
            {"critic", net_json(a.critic)},
            {"actor_target", net_json(a.actor_target)},
            {"critic_target", net_json(a.critic_target)},
            {"actor_opt", opt_json(a.actor_opt)},
            {"critic_opt", opt_json(a.critic_opt)}};
  return j.dump() + "\n";
}

template <typename Scalar>
Agent<Scalar> checkpoint_from_text(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("version") != kCheckpointVersion)
      throw Error("checkpoint: unsupported version '" + j.at("version").get<std::string>() + "'");
    if (j.at("scalar") != scalar_name<Scalar>())
      throw Error("checkpoint: stored as " + j.at("scalar").get<std::string>() + ", requested " +
                  scalar_name<Scalar>());
    Agent<Scalar> a;
    a.config_hash = j.at("config_hash");
    const json& s = j.at("scales");
    a.scales.position_mm = vec3_from(s.at("position_mm"));
    a.scales.angle_rad = vec3_from(s.at("angle_rad"));
    a.scales.force_n = vec3_from(s.at("force_n"));
    a.scales.moment_nm = vec3_from(s.at("moment_nm"));
    a.actor = net_from<Scalar>(j.at("actor"));
    a.critic = net_from<Scalar>(j.at("critic"));
    a.actor_target = net_from<Scalar>(j.at("actor_target"));
    a.critic_target = net_from<Scalar>(j.at("critic_target"));
    if (a.actor.inputs() != kStateDim || a.actor.outputs() != kActionDim ||
        a.critic.inputs() != kStateDim + kActionDim || a.critic.outputs() != 1)
      throw Error("checkpoint: network dimensions do not match the environment");
    a.actor_opt = opt_from<Scalar>(j.at("actor_opt"), a.actor.num_params());
    a.critic_opt = opt_from<Scalar>(j.at("critic_opt"), a.critic.num_params());
    return a;
  } catch (const json::exception& e) {
    throw Error(std::string("checkpoint: ") + e.what());
  }
}

template <typename Scalar>
void save_checkpoint(const Agent<Scalar>& agent, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint '" + path + "'");
  out << checkpoint_to_text(agent);
}

template <typename Scalar>
Agent<Scalar> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_text<Scalar>(ss.str());
}

#define PEGHOLE_INSTANTIATE_RL(S)                                                                           \
  template Batch<S> make_batch<S>(const ReplayBuffer&, const std::vector<std::size_t>&);                  \
  template Batch<S> make_batch<S>(const std::vector<Transition>&);                                        \
  template struct Agent<S>;                                                                               \
  template struct Distillation<S>;                                                                        \
  template MatrixX<S> td_target<S>(const Agent<S>&, const Batch<S>&, const DdpgHyper&);                   \
  template double critic_loss<S>(const Agent<S>&, const Batch<S>&, const DdpgHyper&,                      \
                                 const Distillation<S>*, VectorX<S>*);                                    \
  template double actor_loss<S>(const Agent<S>&, const Batch<S>&, const Distillation<S>*, VectorX<S>*);   \
  template UpdateStats ddpg_update<S>(Agent<S>&, const Batch<S>&, const DdpgHyper&, const Distillation<S>*); \
  template TrainResult<S> train<S>(AssemblyEnv, const DdpgHyper&, int, std::uint64_t, const Distillation<S>*, \
                                   const EpisodeHook&);                                                   \
  template TrainResult<S> train_from<S>(AssemblyEnv, const DdpgHyper&, int, std::mt19937_64&, Agent<S>,   \
                                        ReplayBuffer, const Distillation<S>*, const EpisodeHook&);        \
  template std::vector<StepResult> run_episode<S>(AssemblyEnv&, const Agent<S>&, std::uint64_t);          \
  template double evaluate_greedy<S>(const AssemblyEnv&, const Agent<S>&, int, std::uint64_t);            \
  template std::string checkpoint_to_text<S>(const Agent<S>&);                                            \
  template Agent<S> checkpoint_from_text<S>(const std::string&);                                          \
  template void save_checkpoint<S>(const Agent<S>&, const std::string&);                                  \
  template Agent<S> load_checkpoint<S>(const std::string&);

PEGHOLE_INSTANTIATE_RL(float)
PEGHOLE_INSTANTIATE_RL(double)

}  // namespace peghole
