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

#include "peghole/wdpd.hpp"

#include <cmath>
#include <sstream>

namespace peghole {
namespace {

constexpr std::uint64_t kSourceStream = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kSimilarityStream = 0xD1B54A32D192ED03ULL;

std::vector<std::uint64_t> rollout_seeds(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> out(static_cast<std::size_t>(n));
  for (auto& s : out) s = rng();
  return out;
}

}  // namespace

const char* method_name(TransferMethod m) {
  switch (m) {
    case TransferMethod::Wdpd: return "wdpd";
    case TransferMethod::Equal: return "equal";
    case TransferMethod::MostSimilar: return "most";
    case TransferMethod::LeastSimilar: return "least";
    case TransferMethod::Direct: return "direct";
  }
  return "?";
}

TransferMethod method_from_name(const std::string& name) {
  for (auto m : {TransferMethod::Wdpd, TransferMethod::Equal, TransferMethod::MostSimilar,
                 TransferMethod::LeastSimilar, TransferMethod::Direct})
    if (name == method_name(m)) return m;
  throw Error("unknown transfer method '" + name + "' (expected wdpd, equal, most, least or direct)");
}

void SimilarityOptions::validate() const {
  if (rollouts < 1) throw Error("similarity: rollouts (ST) must be >= 1");
  if (horizon < 1) throw Error("similarity: horizon must be >= 1");
  if (nu < 0.0) throw Error("similarity: nu must be >= 0");
}

Eigen::Matrix<double, 12, 1> attribution(const std::vector<Observation>& active_next,
                                         const std::vector<Observation>& baseline_next) {
  if (active_next.size() != baseline_next.size())
    throw Error("attribution: trajectories differ in length (" + std::to_string(active_next.size()) + " vs " +
                std::to_string(baseline_next.size()) + ")");
  Eigen::Matrix<double, 12, 1> phi = Eigen::Matrix<double, 12, 1>::Zero();
  if (active_next.empty()) return phi;
  for (std::size_t t = 0; t < active_next.size(); ++t) phi += (active_next[t] - baseline_next[t]).cwiseAbs();
  return phi / static_cast<double>(active_next.size());
}

template <typename Scalar>
SubPolicyEvaluation evaluate_subpolicy(const AssemblyEnv& env_template, const Agent<Scalar>& agent, int dimension,
                                       const SimilarityOptions& opt, std::uint64_t seed) {
  opt.validate();
  if (dimension < 0 || dimension >= kActionDim) throw Error("similarity: dimension out of range");
  SubPolicyEvaluation out;
  std::vector<Observation> active, baseline;
  for (std::uint64_t s : rollout_seeds(seed, opt.rollouts)) {
    AssemblyEnv env = env_template;
    Observation obs = env.reset(s);
    double total = 0.0;
    int t = 0;
    for (; t < opt.horizon && env.active(); ++t) {
      AssemblyEnv paired = env;
      baseline.push_back(paired.step(Vector6d::Zero()).state);
      Vector6d a = Vector6d::Zero();
      a[dimension] = agent.act(obs)[dimension];
      const StepResult r = env.step(a);
      active.push_back(r.state);
      total += r.reward;
      obs = r.state;
    }
    if (t < opt.horizon) ++out.truncated_rollouts;
    out.n_step_reward += total;
  }
  out.n_step_reward /= opt.rollouts;
  out.phi = attribution(active, baseline);
  return out;
}

ConnectionGraph connection_graph(const PhiMatrix& phi) {
  if (!(phi.array() >= 0.0).all() || !phi.allFinite()) throw Error("connection graph: phi must be finite and >= 0");
  ConnectionGraph out;
  for (int v = 0; v < phi.cols(); ++v) {
    const double norm = phi.col(v).norm();
    if (norm > 0.0) {
      out.g.col(v) = phi.col(v) / norm;
    } else {
      out.zero_columns.push_back(v);
    }
  }
  return out;
}

double graph_term(const PhiMatrix& gs, const PhiMatrix& gt, int j) {
  if (j < 0 || j >= kActionDim) throw Error("graph term: dimension out of range");
  const double ns = gs.row(j).norm(), nt = gt.row(j).norm();
  if (ns == 0.0 && nt == 0.0) return 1.0;
  if (ns == 0.0 || nt == 0.0) return 0.0;
  return gs.row(j).dot(gt.row(j)) / (ns * nt);
}

Eigen::MatrixXd similarity(const Eigen::MatrixXd& n, const std::vector<PhiMatrix>& g_source,
                           const std::vector<PhiMatrix>& g_target, double nu) {
  const auto m = static_cast<std::size_t>(n.rows());
  if (n.cols() != kActionDim || g_source.size() != m || g_target.size() != m)
    throw Error("similarity: N must be (sources x 6) with one graph pair per source");
  Eigen::MatrixXd sim(n.rows(), n.cols());
  for (Eigen::Index i = 0; i < n.rows(); ++i)
    for (int j = 0; j < kActionDim; ++j)
      sim(i, j) = n(i, j) + nu * graph_term(g_source[static_cast<std::size_t>(i)],
                                            g_target[static_cast<std::size_t>(i)], j);
  return sim;
}

Eigen::MatrixXd similarity_weights(const Eigen::MatrixXd& sim, WeightAxis axis) {
  if (!sim.allFinite()) throw Error("similarity weights: Sim must be finite");
  Eigen::MatrixXd w(sim.rows(), sim.cols());
  auto normalize = [](const Eigen::VectorXd& v) {
    const Eigen::VectorXd shifted = v.array() - v.minCoeff();
    const double sum = shifted.sum();
    if (!(sum > 0.0)) return Eigen::VectorXd(Eigen::VectorXd::Constant(v.size(), 1.0 / v.size()));
    return Eigen::VectorXd(shifted / sum);
  };
  if (sim.size() == 0) return w;
  if (axis == WeightAxis::Sources) {
    for (Eigen::Index j = 0; j < sim.cols(); ++j) w.col(j) = normalize(sim.col(j));
  } else {
    for (Eigen::Index i = 0; i < sim.rows(); ++i) w.row(i) = normalize(sim.row(i).transpose()).transpose();
  }
  return w;
}

int most_similar(const Eigen::MatrixXd& sim) {
  if (sim.rows() == 0) throw Error("most_similar: no sources");
  Eigen::Index best = 0;
  sim.rowwise().mean().maxCoeff(&best);
  return static_cast<int>(best);
}

int least_similar(const Eigen::MatrixXd& sim) {
  if (sim.rows() == 0) throw Error("least_similar: no sources");
  Eigen::Index worst = 0;
  sim.rowwise().mean().minCoeff(&worst);
  return static_cast<int>(worst);
}

std::string SimilarityReport::matrix_csv(const std::string& which, const std::vector<std::string>& names) const {
  const Eigen::MatrixXd* m = which == "N" ? &n : which == "Sim" ? &sim : which == "W" ? &w : which == "graph" ? &graph : nullptr;
  if (m == nullptr) throw Error("similarity report: unknown matrix '" + which + "'");
  std::ostringstream os;
  os.precision(10);
  os << "source,d1,d2,d3,d4,d5,d6\n";
  for (Eigen::Index i = 0; i < m->rows(); ++i) {
    os << (static_cast<std::size_t>(i) < names.size() ? names[static_cast<std::size_t>(i)] : std::to_string(i));
    for (Eigen::Index j = 0; j < m->cols(); ++j) os << ',' << (*m)(i, j);
    os << '\n';
  }
  return os.str();
}

std::string SimilarityReport::long_csv(const std::vector<std::string>& names) const {
  std::ostringstream os;
  os.precision(10);
  os << "matrix,source,dimension,value\n";
  const std::pair<const char*, const Eigen::MatrixXd*> mats[] = {{"N", &n}, {"graph", &graph}, {"Sim", &sim}, {"W", &w}};
  for (const auto& [label, m] : mats)
    for (Eigen::Index i = 0; i < m->rows(); ++i)
      for (Eigen::Index j = 0; j < m->cols(); ++j)
        os << label << ','
           << (static_cast<std::size_t>(i) < names.size() ? names[static_cast<std::size_t>(i)] : std::to_string(i))
           << ',' << j + 1 << ',' << (*m)(i, j) << '\n';
  return os.str();
}

template <typename Scalar>
SimilarityReport evaluate_similarity(const AssemblyEnv& target, const std::vector<TransferSource<Scalar>>& sources,
                                     const SimilarityOptions& opt, std::uint64_t seed) {
  opt.validate();
  const auto m = static_cast<Eigen::Index>(sources.size());
  SimilarityReport rep;
  rep.nu = opt.nu;
  rep.rollouts = opt.rollouts;
  rep.horizon = opt.horizon;
  rep.axis = opt.axis;
  rep.n = Eigen::MatrixXd::Zero(m, kActionDim);
  rep.graph = Eigen::MatrixXd::Zero(m, kActionDim);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& src = sources[static_cast<std::size_t>(i)];
    if (src.agent == nullptr || src.env == nullptr) throw Error("similarity: source without agent or task");
    PhiMatrix phi_t, phi_s;
    for (int j = 0; j < kActionDim; ++j) {
      const SubPolicyEvaluation t = evaluate_subpolicy(target, *src.agent, j, opt, seed);
      const SubPolicyEvaluation s = evaluate_subpolicy(*src.env, *src.agent, j, opt, seed ^ kSourceStream);
      rep.n(i, j) = t.n_step_reward;
      phi_t.row(j) = t.phi.transpose();
      phi_s.row(j) = s.phi.transpose();
      rep.truncated += t.truncated_rollouts;
    }
    rep.g_source.push_back(connection_graph(phi_s).g);
    rep.g_target.push_back(connection_graph(phi_t).g);
    for (int j = 0; j < kActionDim; ++j) rep.graph(i, j) = graph_term(rep.g_source.back(), rep.g_target.back(), j);
  }
  rep.sim = similarity(rep.n, rep.g_source, rep.g_target, opt.nu);
  rep.w = similarity_weights(rep.sim, opt.axis);
  return rep;
}

Eigen::MatrixXd method_weights(TransferMethod method, const SimilarityReport& report, int sources) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(sources, kActionDim);
  if (sources == 0 || method == TransferMethod::Direct) return Eigen::MatrixXd::Zero(0, kActionDim);
  switch (method) {
    case TransferMethod::Equal:
      w.setConstant(1.0 / sources);
      break;
    case TransferMethod::Wdpd:
      if (report.w.rows() != sources) throw Error("transfer: similarity report does not match the sources");
      w = report.w;
      break;
    case TransferMethod::MostSimilar:
      w.row(most_similar(report.sim)).setOnes();
      break;
    case TransferMethod::LeastSimilar:
      w.row(least_similar(report.sim)).setOnes();
      break;
    case TransferMethod::Direct:
      break;
  }
  return w;
}

template <typename Scalar>
TransferResult<Scalar> transfer_train(const AssemblyEnv& target, const std::vector<TransferSource<Scalar>>& sources,
                                      const DdpgHyper& h, const TransferOptions& opt, int episodes,
                                      std::uint64_t seed, const EpisodeHook& hook) {
  TransferResult<Scalar> out;
  if (sources.empty() || opt.method == TransferMethod::Direct) {
    out.training = train<Scalar>(target, h, episodes, seed, nullptr, hook);
    out.weights = Eigen::MatrixXd::Zero(0, kActionDim);
    return out;
  }
  const bool needs_similarity = opt.method != TransferMethod::Equal;
  if (needs_similarity) out.report = evaluate_similarity(target, sources, opt.similarity, seed ^ kSimilarityStream);
  out.weights = method_weights(opt.method, out.report, static_cast<int>(sources.size()));
  Distillation<Scalar> d;
  for (const auto& s : sources) d.sources.push_back(s.agent);
  d.weights = out.weights;
  d.omega_a = opt.omega_a;
  d.omega_c = opt.omega_c;
  d.validate();
  out.training = train<Scalar>(target, h, episodes, seed, &d, hook);
  return out;
}

#define PEGHOLE_INSTANTIATE_WDPD(S)                                                                              \
  template SubPolicyEvaluation evaluate_subpolicy<S>(const AssemblyEnv&, const Agent<S>&, int,                 \
                                                     const SimilarityOptions&, std::uint64_t);                 \
  template SimilarityReport evaluate_similarity<S>(const AssemblyEnv&, const std::vector<TransferSource<S>>&,  \
                                                   const SimilarityOptions&, std::uint64_t);                   \
  template TransferResult<S> transfer_train<S>(const AssemblyEnv&, const std::vector<TransferSource<S>>&,      \
                                               const DdpgHyper&, const TransferOptions&, int, std::uint64_t, \
                                               const EpisodeHook&);

PEGHOLE_INSTANTIATE_WDPD(float)
PEGHOLE_INSTANTIATE_WDPD(double)

}  // namespace peghole
