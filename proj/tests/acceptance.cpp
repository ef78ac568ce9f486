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

// Acceptance checks. Prints one PASS/FAIL line per criterion; the exit code
// is the number of failed criteria. Usage: peghole_acceptance [fast|learning|all]

#include "peghole/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace peghole;
namespace fs = std::filesystem;

namespace {

// Tolerances, pinned.
constexpr double kTableTol = 0.01;
constexpr double kProductTol = 0.005;
constexpr double kScaleTol = 0.02;
constexpr double kQuadTol = 0.01;
constexpr double kMirrorTol = 1e-9;
constexpr double kRoundTripTol = 1e-10;
constexpr double kGradTol = 1e-4;
constexpr double kUnitNormTol = 1e-10;
constexpr double kSameDomainTol = 0.05;
constexpr double kEpisodeRatio = 0.7;

// Runtime budgets in seconds.
constexpr double kBudget[12] = {0, 1, 1, 60, 300, 10, 60, 10, 600, 7200, 3600, 1800};

const std::string kData = std::string(PEGHOLE_SOURCE_DIR) + "/data";

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failed = 0;

void report(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (secs > kBudget[id]) {
    o.pass = false;
    o.detail += " [over runtime budget " + std::to_string(static_cast<int>(kBudget[id])) + " s]";
  }
  if (!o.pass) ++g_failed;
  std::printf("criterion %2d %s: %s (%.1f s) %s\n", id, o.pass ? "PASS" : "FAIL", title, secs, o.detail.c_str());
  std::fflush(stdout);
}

std::string num(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

std::vector<CrossSection> all_sections() {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(kData + "/sections")) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<CrossSection> out;
  for (const auto& f : files) out.push_back(load_section(f.string()));
  return out;
}

// 1, 2 -----------------------------------------------------------------------

Outcome table_reproduction() {
  double worst = 0.0;
  std::string where;
  for (const char* group : {"gain_table_group_a.json", "gain_table_group_b.json"}) {
    const Workspace ws(load_config(kData + "/configs/" + group));
    const auto rep = run_reconfigure(ws);
    for (const auto& row : rep.rows) {
      const auto& printed = ws.config().task(row.label).printed_gains;
      if (!printed) return {false, "row " + row.label + " has no printed gains"};
      const Vector6d k = row.gains.vector(), p = printed->vector();
      for (int i = 0; i < 5; ++i) {
        const double e = std::abs(k[i] / p[i] - 1.0);
        if (e > worst) {
          worst = e;
          where = row.label + "/" + component_name(static_cast<StiffnessComponent>(i));
        }
      }
    }
  }
  // the worked example, by hand
  const double a1 = 3.39e-5 * (10.61 * 30 * 1) / (7.5 * 30 * 1.12);
  const bool example = std::abs(a1 / 4.29e-5 - 1.0) <= kTableTol;
  return {worst <= kTableTol && example,
          "max rel error " + num(worst) + " at " + where + " (tol " + num(kTableTol) + "), A1 K_x example " + num(a1)};
}

Outcome product_invariance() {
  double worst = 0.0;
  std::string where;
  for (const char* group : {"gain_table_group_a.json", "gain_table_group_b.json"}) {
    const auto cfg = load_config(kData + "/configs/" + group);
    for (int i = 0; i < 5; ++i) {
      std::vector<double> prod;
      for (const auto& t : cfg.tasks) {
        const double s = t.reference ? 1.0 : (*t.relative_scales)[static_cast<std::size_t>(i)];
        prod.push_back(*t.r_hat_mm * t.depth_m * s * t.printed_gains->vector()[i]);
      }
      const auto [lo, hi] = std::minmax_element(prod.begin(), prod.end());
      double mean = 0.0;
      for (double p : prod) mean += p / prod.size();
      const double spread = std::max(*hi / mean - 1.0, 1.0 - *lo / mean);
      if (spread > worst) {
        worst = spread;
        where = cfg.name + "/" + component_name(static_cast<StiffnessComponent>(i));
      }
    }
  }
  return {worst <= kProductTol, "max deviation from the group mean " + num(worst) + " at " + where + " (tol " +
                                    num(kProductTol) + ")"};
}

// 3 --------------------------------------------------------------------------

Outcome scale_invariance() {
  double worst = 0.0;
  std::string where;
  for (const auto& sec : all_sections()) {
    PlantParams a{sec}, b{scaled(sec, 2.0)};
    a.hole_depth = 0.02;
    b.hole_depth = 0.03;
    const auto sa = shape_scale(a), sb = shape_scale(b);
    for (int i = 0; i < 5; ++i) {
      const double e = std::abs(sb[i] / sa[i] - 1.0);
      if (e > worst) {
        worst = e;
        where = sec.name() + "/" + component_name(static_cast<StiffnessComponent>(i));
      }
    }
  }
  return {worst <= kScaleTol, "max rel difference " + num(worst) + " at " + where + " (tol " + num(kScaleTol) + ")"};
}

// 4 --------------------------------------------------------------------------

// Mirror line of a section: 'x' for y -> -y symmetry, 'y' for x -> -x, 0 for none.
char mirror_axis(const CrossSection& sec) {
  const CrossSection c = centered(sec);
  auto symmetric = [&](auto map) {
    for (int k = 0; k < 97; ++k) {
      const double th = -kPi + (k + 0.37) * kTwoPi / 97;
      if (std::abs(boundary_sample(c, th).radius - boundary_sample(c, map(th)).radius) > 1e-9) return false;
    }
    return true;
  };
  if (symmetric([](double t) { return -t; })) return 'x';
  if (symmetric([](double t) { return kPi - t; })) return 'y';
  return 0;
}

Outcome fpm_convergence() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(-1.0, 1.0), phase(-kPi, kPi);
  double worst = 0.0, worst_mirror = 0.0;
  std::string where;
  int poses = 0, mirrored = 0;
  for (const auto& sec : all_sections()) {
    PlantParams p{sec};
    p.hole_depth = 0.02;
    const ContactModel coarse(p, Grid{64, 16}), fine(p, Grid{640, 160});
    const char axis = mirror_axis(sec);
    int n = 0;
    while (n < 20) {
      // lateral push beyond the clearance plus a small tilt, partly inserted
      const double dir = phase(rng);
      const double d = (0.1 + 0.1 * (0.5 + 0.5 * u(rng))) * 1e-3;
      const PoseState pose{d * std::cos(dir), d * std::sin(dir), 0.01 + 0.008 * u(rng), 2e-3 * u(rng), 2e-3 * u(rng),
                           2e-3 * u(rng)};
      const auto rf = fine.evaluate(pose);
      if (rf.max_penetration <= 0.0 || rf.jammed) continue;
      ++n;
      const Vector6d a = coarse.evaluate(pose).wrench.vector(), b = rf.wrench.vector();
      // Components below 1e-3 of their family's magnitude are zero up to
      // quadrature noise; the relative check applies to the rest.
      const double fscale = b.head<3>().norm(), mscale = b.tail<3>().norm();
      for (int i = 0; i < 6; ++i) {
        const double scale = i < 3 ? fscale : mscale;
        if (std::abs(b[i]) <= 1e-3 * scale) continue;
        const double e = std::abs(a[i] / b[i] - 1.0);
        if (e > worst) {
          worst = e;
          where = sec.name() + " component " + std::to_string(i);
        }
      }
      if (axis) {
        PoseState m = pose;
        Vector6d flip;
        if (axis == 'x') {
          m.d_y = -m.d_y;
          m.alpha = -m.alpha;
          m.gamma = -m.gamma;
          flip << 1, -1, 1, -1, 1, -1;
        } else {
          m.d_x = -m.d_x;
          m.beta = -m.beta;
          m.gamma = -m.gamma;
          flip << -1, 1, 1, 1, -1, -1;
        }
        const Vector6d w = coarse.evaluate(pose).wrench.vector(), wm = coarse.evaluate(m).wrench.vector();
        worst_mirror = std::max(worst_mirror, (w - flip.cwiseProduct(wm)).norm() / w.norm());
        ++mirrored;
      }
      ++poses;
    }
  }
  return {worst <= kQuadTol && worst_mirror <= kMirrorTol && mirrored > 0,
          std::to_string(poses) + " poses, max rel grid difference " + num(worst) + " at " + where + " (tol " +
              num(kQuadTol) + "); " + std::to_string(mirrored) + " mirrored, max residual " + num(worst_mirror) +
              " (tol " + num(kMirrorTol) + ")"};
}

// 5 --------------------------------------------------------------------------

Outcome decoupling() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> ang(-kPi, kPi), pos(-0.5, 0.5);
  std::normal_distribution<double> g(0.0, 1.0);
  double wo = 0.0, ws = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const FrameOffset off{rpy_matrix(ang(rng), 0.49 * ang(rng), ang(rng)), {pos(rng), pos(rng), pos(rng)}};
    const Wrench f{{50 * g(rng), 50 * g(rng), 50 * g(rng)}, {g(rng), g(rng), g(rng)}, Frame::Assembly};
    wo = std::max(wo, (decouple_output(couple_output(f, off), off).vector() - f.vector()).norm());
    const PoseIncrement dp{{1e-3 * g(rng), 1e-3 * g(rng), 1e-3 * g(rng)}, {1e-3 * g(rng), 1e-3 * g(rng), 1e-3 * g(rng)}};
    ws = std::max(ws, (couple_state(decouple_state(dp, off), off).vector() - dp.vector()).norm());
  }
  return {wo <= kRoundTripTol && ws <= kRoundTripTol,
          "max |DO(CO(F))-F| " + num(wo) + ", max |CS(DS(dp))-dp| " + num(ws) + " (tol " + num(kRoundTripTol) + ")"};
}

// 6, 7 -----------------------------------------------------------------------

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
    t.done = u(rng) > 0.8;
  }
  return out;
}

Outcome gradients() {
  std::mt19937_64 rng(606);
  DdpgHyper h;
  h.hidden = {16, 16};
  h.actor_final_range = 0.1;
  Agent<double> agent(h, rng), teacher(h, rng);
  const auto b = make_batch<double>(random_transitions(rng, 32));
  Distillation<double> d;
  d.sources = {&teacher};
  d.weights = Eigen::MatrixXd::Constant(1, kActionDim, 0.4);
  Eigen::VectorXd gc, ga;
  critic_loss(agent, b, h, &d, &gc);
  actor_loss(agent, b, &d, &ga);
  std::uniform_int_distribution<Eigen::Index> pc(0, agent.critic.num_params() - 1), pa(0, agent.actor.num_params() - 1);
  const double eps = 1e-5;
  auto rel = [](double x, double y) { return std::abs(x - y) / std::max(std::abs(x) + std::abs(y), 1e-8); };
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto i = pc(rng);
    Agent<double> p = agent, m = agent;
    p.critic.params()[i] += eps;
    m.critic.params()[i] -= eps;
    worst = std::max(worst, rel(gc[i], (critic_loss(p, b, h, &d) - critic_loss(m, b, h, &d)) / (2 * eps)));
    const auto j = pa(rng);
    p = agent;
    m = agent;
    p.actor.params()[j] += eps;
    m.actor.params()[j] -= eps;
    worst = std::max(worst, rel(ga[j], (actor_loss(p, b, &d) - actor_loss(m, b, &d)) / (2 * eps)));
  }
  return {worst <= kGradTol, "100 critic + 100 actor probes, max rel error " + num(worst) + " (tol " + num(kGradTol) + ")"};
}

EnvConfig cylinder_env() {
  PlantParams p{load_section(kData + "/sections/a1_cylinder.json")};
  p.hole_depth = 0.03;
  EnvConfig cfg(p);
  cfg.gains = tune_reference(p, 2.0, 5.55e-2);
  return cfg;
}

Outcome wdpd_identities() {
  std::mt19937_64 rng(707);
  DdpgHyper h;
  Agent<float> agent(h, rng), s0(h, rng), s1(h, rng);
  const auto b = make_batch<float>(random_transitions(rng, 128));
  Distillation<float> d;
  d.sources = {&s0, &s1};
  d.weights = Eigen::MatrixXd::Zero(2, kActionDim);
  const Distillation<float>* none = nullptr;
  Eigen::VectorXf g0, g1, g2, g3;
  const bool critic_same = critic_loss(agent, b, h, none, &g0) == critic_loss(agent, b, h, &d, &g1) && g0 == g1;
  const bool actor_same = actor_loss(agent, b, none, &g2) == actor_loss(agent, b, &d, &g3) && g2 == g3;

  // graphs from real attribution values
  Agent<double> actor(h, rng);
  actor.actor.initialize(rng, 0.5);
  const AssemblyEnv env(cylinder_env());
  SimilarityOptions opt;
  opt.rollouts = 4;
  opt.horizon = 8;
  PhiMatrix phi;
  for (int j = 0; j < kActionDim; ++j) phi.row(j) = evaluate_subpolicy(env, actor, j, opt, 5).phi.transpose();
  const auto g = connection_graph(phi);
  double norm_err = 0.0;
  int nonzero = 0;
  for (int v = 0; v < 12; ++v) {
    const double n = g.g.col(v).norm();
    if (n == 0.0) continue;
    ++nonzero;
    norm_err = std::max(norm_err, std::abs(n - 1.0));
  }
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  Eigen::MatrixXd sim(4, kActionDim);
  for (Eigen::Index k = 0; k < sim.size(); ++k) sim.data()[k] = u(rng);
  double sum_err = 0.0;
  const auto ws = similarity_weights(sim, WeightAxis::Sources), wd = similarity_weights(sim, WeightAxis::Dimensions);
  for (int j = 0; j < kActionDim; ++j) sum_err = std::max(sum_err, std::abs(ws.col(j).sum() - 1.0));
  for (int i = 0; i < 4; ++i) sum_err = std::max(sum_err, std::abs(wd.row(i).sum() - 1.0));
  const bool ok = critic_same && actor_same && nonzero > 0 && norm_err <= kUnitNormTol && sum_err <= 1e-12;
  return {ok, std::string("bitwise critic ") + (critic_same ? "yes" : "no") + ", actor " + (actor_same ? "yes" : "no") +
                  "; " + std::to_string(nonzero) + " nonzero graph columns, max |norm-1| " + num(norm_err) +
                  "; max |axis sum-1| " + num(sum_err)};
}

// 8 --------------------------------------------------------------------------

Outcome same_domain() {
  // a briefly trained source on its own task
  const AssemblyEnv env(cylinder_env());
  DdpgHyper h;
  h.warmup_episodes = 5;
  h.noise_decay_episodes = 10;
  const auto tr = train<float>(env, h, 15, 808);
  SimilarityOptions opt;  // ST = 20, n = 12
  double paired = 0.0, unpaired = 0.0;
  PhiMatrix a, b;
  for (int j = 0; j < kActionDim; ++j) {
    a.row(j) = evaluate_subpolicy(env, tr.agent, j, opt, 4242).phi.transpose();
    b.row(j) = evaluate_subpolicy(env, tr.agent, j, opt, 4242).phi.transpose();
  }
  const auto ga = connection_graph(a).g, gb = connection_graph(b).g;
  for (int j = 0; j < kActionDim; ++j) paired = std::max(paired, std::abs(graph_term(ga, gb, j) - 1.0));
  // independent reset seeds for the two graphs
  const auto rep = evaluate_similarity<float>(env, {{&tr.agent, &env, "self"}}, opt, 4242);
  for (int j = 0; j < kActionDim; ++j) unpaired = std::max(unpaired, std::abs(rep.graph(0, j) - 1.0));
  return {paired <= kSameDomainTol && unpaired <= kSameDomainTol,
          "ST " + std::to_string(opt.rollouts) + ", max |G_i G_t^T - 1| paired " + num(paired) + ", independent seeds " +
              num(unpaired) + " (tol " + num(kSameDomainTol) + ")"};
}

// 9, 10, 11 ------------------------------------------------------------------

struct LearningState {
  std::unique_ptr<Workspace> ws;
  SourceSet sources;
  TransferCampaign campaign;
};

void log_run(const TransferRun& r) {
  std::printf("  %-6s f=%g seed#%d reach %d final %.4f\n", method_name(r.method), r.gain_factor, r.seed_index, r.reach,
              r.final_greedy);
  std::fflush(stdout);
}

Outcome transfer_efficacy(LearningState& st) {
  st.ws = std::make_unique<Workspace>(load_config(kData + "/configs/campaign.json"));
  const auto& cfg = st.ws->config();
  st.sources = prepare_sources(*st.ws, cfg.seed, nullptr);
  for (std::size_t i = 0; i < st.sources.labels.size(); ++i)
    std::printf("  source %s greedy %.4f\n", st.sources.labels[i].c_str(), st.sources.evals[i]);
  st.campaign = run_transfer_campaign(*st.ws, st.sources, cfg.transfer.methods, {1.0}, cfg.seed, nullptr, log_run);
  const auto& c = st.campaign;
  const double wdpd = c.median_reach(TransferMethod::Wdpd), direct = c.median_reach(TransferMethod::Direct);
  const double fw = c.median_final(TransferMethod::Wdpd), fm = c.median_final(TransferMethod::MostSimilar),
               fe = c.median_final(TransferMethod::Equal), fl = c.median_final(TransferMethod::LeastSimilar),
               fd = c.median_final(TransferMethod::Direct);
  const bool episodes = wdpd <= kEpisodeRatio * direct;
  const bool ordering = fw >= fm && fm >= fe && fm >= fl;
  std::ostringstream os;
  os << cfg.campaign.seeds << " seeds, threshold " << c.threshold << ": median episodes wdpd " << wdpd << " direct "
     << direct << " (ratio " << num(wdpd / direct, 3) << ", need <= " << kEpisodeRatio << ") "
     << (episodes ? "ok" : "NOT MET") << "; median final wdpd " << num(fw) << " most " << num(fm) << " equal "
     << num(fe) << " least " << num(fl) << " direct " << num(fd) << ", ordering " << (ordering ? "ok" : "NOT MET");
  return {episodes && ordering, os.str()};
}

Outcome gain_ablation() {
  ExperimentConfig cfg = load_config(kData + "/configs/ablation.json");
  cfg.transfer.allow_unreconfigured = true;
  const Workspace ws(cfg);
  const SourceSet sources = prepare_sources(ws, cfg.seed, nullptr);
  const auto c = run_transfer_campaign(ws, sources, {TransferMethod::Wdpd}, cfg.ablation_factors, cfg.seed, nullptr,
                                       log_run);
  const double base = c.median_final(TransferMethod::Wdpd, 1.0);
  std::ostringstream os;
  os << cfg.campaign.seeds << " seeds, median final x1 " << num(base);
  bool ok = true;
  for (double f : cfg.ablation_factors) {
    if (f == 1.0) continue;
    const double v = c.median_final(TransferMethod::Wdpd, f);
    os << ", x" << f << " " << num(v);
    ok = ok && v < base;
  }
  return {ok, os.str()};
}

Outcome testing_ordering(LearningState& st) {
  if (!st.ws) return {false, "needs the transfer campaign of criterion 9"};
  std::map<std::string, std::vector<const AgentF*>> agents;
  for (const auto& [name, m] : {std::pair{"direct", TransferMethod::Direct}, std::pair{"wdpd", TransferMethod::Wdpd},
                                std::pair{"equal", TransferMethod::Equal}})
    for (const auto* r : st.campaign.of(m)) agents[name].push_back(&r->result.training.agent);
  const auto traces = run_test_variants(*st.ws, agents);
  std::map<std::string, VariantMetrics> med;
  for (const auto& v : test_variant_names()) {
    std::vector<double> mf, pk, ls;
    for (const auto& m : per_seed_metrics(traces, v)) {
      mf.push_back(m.mean_force);
      pk.push_back(m.peak_force);
      ls.push_back(m.late_std);
    }
    med[v] = {median(mf), median(pk), median(ls), 0.0};
  }
  bool peak = true, late = true, mean = true;
  for (const auto& v : test_variant_names()) {
    if (v != "small_k") peak = peak && med["small_k"].peak_force > med[v].peak_force;
    if (v != "large_k") late = late && med["large_k"].late_std > med[v].late_std;
    if (v != "wdpd") mean = mean && med["wdpd"].mean_force < med[v].mean_force;
  }
  std::ostringstream os;
  os << "median over seeds (peak / late std / mean force, N):";
  for (const auto& v : test_variant_names())
    os << ' ' << v << ' ' << num(med[v].peak_force) << '/' << num(med[v].late_std) << '/' << num(med[v].mean_force);
  os << "; small-K highest peak " << (peak ? "ok" : "NOT MET") << ", large-K highest late std "
     << (late ? "ok" : "NOT MET") << ", wdpd lowest mean force " << (mean ? "ok" : "NOT MET");
  return {peak && late && mean, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "all";
  if (mode != "fast" && mode != "learning" && mode != "all") {
    std::fprintf(stderr, "usage: %s [fast|learning|all]\n", argv[0]);
    return 2;
  }
  if (mode != "learning") {
    report(1, "gain table reconfiguration", table_reproduction);
    report(2, "product invariance", product_invariance);
    report(3, "shape-scale invariance", scale_invariance);
    report(4, "FPM quadrature convergence and mirror symmetry", fpm_convergence);
    report(5, "decoupling round trips", decoupling);
    report(6, "gradient correctness", gradients);
    report(7, "WDPD reduction identities", wdpd_identities);
    report(8, "same-domain similarity", same_domain);
  }
  if (mode != "fast") {
    LearningState st;
    report(9, "transfer efficacy", [&] { return transfer_efficacy(st); });
    report(10, "gain-deviation ablation", gain_ablation);
    report(11, "testing-process ordering", [&] { return testing_ordering(st); });
  }
  return g_failed;
}
