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
 * @file wdpd.hpp
 * @brief Weighted dimensional policy distillation.
 *
 * Similarity of sub-policy j of source i to the target task:
 *
 *   Sim(i, j) = N(i, j) + nu * <G_i(j,:), G_t,i(j,:)> / (|G_i(j,:)| |G_t,i(j,:)|)
 *
 * N(i, j) is the mean n-step return in the target task when only action
 * dimension j of source actor i is applied (other slots zero). G is the
 * column-normalized connection graph built from attribution values
 * phi(j, v): mean |s_v - s'_v| between the next state under that single
 * action and the next state under the zero action from the same state and
 * random stream. G_i is measured with the source actor in its own task and
 * G_t,i with the same actor in the target task, so that identical tasks
 * give a graph term of nu. A row pair where both rows are zero counts as
 * identical (1); one zero row against a nonzero row counts as 0.
 *
 * Weights subtract the minimum along the normalization axis and divide by
 * the sum along it. The default axis runs over sources for each action
 * dimension, so every dimension mixes its teachers with weights summing to
 * one; WeightAxis::Dimensions normalizes within each source instead.
 */

#pragma once

#include "peghole/rl.hpp"

#include <string>
#include <vector>

namespace peghole {

using PhiMatrix = Eigen::Matrix<double, 6, 12>;

enum class WeightAxis { Sources, Dimensions };

enum class TransferMethod { Wdpd, Equal, MostSimilar, LeastSimilar, Direct };

const char* method_name(TransferMethod m);
TransferMethod method_from_name(const std::string& name);

struct SimilarityOptions {
  int rollouts = 20;  // ST
  int horizon = 12;   // n
  double nu = 100.0;
  WeightAxis axis = WeightAxis::Sources;
  void validate() const;
};

/// Mean absolute per-state deviation of the active next states from the
/// zero-action next states. Throws on length mismatch.
Eigen::Matrix<double, 12, 1> attribution(const std::vector<Observation>& active_next,
                                         const std::vector<Observation>& baseline_next);

struct SubPolicyEvaluation {
  double n_step_reward = 0.0;            // mean over rollouts of the summed rewards
  Eigen::Matrix<double, 12, 1> phi = Eigen::Matrix<double, 12, 1>::Zero();
  int truncated_rollouts = 0;            // episodes that ended before n steps
};

/// Runs `opt.rollouts` rollouts of at most `opt.horizon` steps from fresh
/// resets, applying only dimension j of `actor`. Never modifies the agent.
template <typename Scalar>
SubPolicyEvaluation evaluate_subpolicy(const AssemblyEnv& env, const Agent<Scalar>& agent, int dimension,
                                       const SimilarityOptions& opt, std::uint64_t seed);

template <typename Scalar>
double n_step_reward(const AssemblyEnv& env, const Agent<Scalar>& agent, int dimension,
                     const SimilarityOptions& opt, std::uint64_t seed) {
  return evaluate_subpolicy(env, agent, dimension, opt, seed).n_step_reward;
}

struct ConnectionGraph {
  PhiMatrix g = PhiMatrix::Zero();
  std::vector<int> zero_columns;
};

/// Normalizes every column of phi to unit L2 norm; zero columns stay zero.
ConnectionGraph connection_graph(const PhiMatrix& phi);

/// Row-cosine graph term for dimension j, in [0, 1] for nonnegative graphs.
double graph_term(const PhiMatrix& g_source, const PhiMatrix& g_target, int j);

/// Sim = N + nu * graph term; N is (sources x 6).
Eigen::MatrixXd similarity(const Eigen::MatrixXd& n, const std::vector<PhiMatrix>& g_source,
                           const std::vector<PhiMatrix>& g_target, double nu);

Eigen::MatrixXd similarity_weights(const Eigen::MatrixXd& sim, WeightAxis axis);

/// Source whose mean similarity over dimensions is largest / smallest
/// (ties resolve to the lowest index).
int most_similar(const Eigen::MatrixXd& sim);
int least_similar(const Eigen::MatrixXd& sim);

struct SimilarityReport {
  Eigen::MatrixXd n, graph, sim, w;  // (sources x 6)
  std::vector<PhiMatrix> g_source, g_target;
  double nu = 0.0;
  int rollouts = 0;
  int horizon = 0;
  WeightAxis axis = WeightAxis::Sources;
  int truncated = 0;

  /// name,dim1..dim6 rows per source for one of "N", "Sim", "W", "graph".
  std::string matrix_csv(const std::string& which, const std::vector<std::string>& names) const;
  /// matrix,source,dimension,value
  std::string long_csv(const std::vector<std::string>& names) const;
};

template <typename Scalar>
struct TransferSource {
  const Agent<Scalar>* agent = nullptr;
  const AssemblyEnv* env = nullptr;  // the source task, for G_i
  std::string name;
};

/// Evaluates all (source, dimension) pairs; read-only for every network.
template <typename Scalar>
SimilarityReport evaluate_similarity(const AssemblyEnv& target, const std::vector<TransferSource<Scalar>>& sources,
                                     const SimilarityOptions& opt, std::uint64_t seed);

/// Distillation weights used by each method (empty for Direct).
Eigen::MatrixXd method_weights(TransferMethod method, const SimilarityReport& report, int sources);

struct TransferOptions {
  SimilarityOptions similarity;
  double omega_a = 2.0;
  double omega_c = 5.0;
  TransferMethod method = TransferMethod::Wdpd;
};

template <typename Scalar>
struct TransferResult {
  TrainResult<Scalar> training;
  SimilarityReport report;
  Eigen::MatrixXd weights;
};

/// Phase 1: similarity evaluation (skipped for Direct and Equal). Phase 2:
/// DDPG with the distillation terms. With no sources or Direct this is
/// exactly train(target, h, episodes, seed).
template <typename Scalar>
TransferResult<Scalar> transfer_train(const AssemblyEnv& target, const std::vector<TransferSource<Scalar>>& sources,
                                      const DdpgHyper& h, const TransferOptions& opt, int episodes,
                                      std::uint64_t seed, const EpisodeHook& hook = {});

}  // namespace peghole
