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

#include "peghole/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

namespace peghole {
namespace fs = std::filesystem;
using nlohmann::json;

// Workspace ------------------------------------------------------------------

Workspace::Workspace(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.tasks.empty()) throw Error("config: no tasks defined");
  for (const auto& t : cfg_.tasks)
    if (t.section) scales_.emplace(t.label, shape_scale(plant(t.label), geometry(t.label), cfg_.reconfig.probe));
  const TaskSpec& ref = cfg_.reference_task();
  if (ref.gains) {
    ref_gains_ = *ref.gains;
  } else if (ref.section) {
    ref_gains_ = tune_reference(plant(ref.label), cfg_.reconfig.kappa, cfg_.reconfig.k_gamma, cfg_.reconfig.probe);
  } else {
    throw Error("reference task '" + ref.label + "' needs either gains or a section to tune from");
  }
}

TaskGeometry Workspace::geometry(const std::string& label) const {
  const TaskSpec& t = cfg_.task(label);
  return {t.r_hat_mm ? *t.r_hat_mm : max_radius(*t.section), t.depth_m};
}

const ShapeScales& Workspace::scales(const std::string& label) const {
  const auto it = scales_.find(label);
  if (it == scales_.end()) throw Error("task '" + label + "' has no section, so no computed shape scales");
  return it->second;
}

namespace {

// Relative scales of a task against the reference: printed values when both
// rows carry them, computed ones otherwise.
ShapeScales relative_scales(const Workspace& ws, const TaskSpec& t, const TaskSpec& ref) {
  ShapeScales s;
  if (t.relative_scales && ref.relative_scales) {
    for (int i = 0; i < 5; ++i)
      s[i] = (*t.relative_scales)[static_cast<std::size_t>(i)] / (*ref.relative_scales)[static_cast<std::size_t>(i)];
    return s;
  }
  if (t.relative_scales || ref.relative_scales) {
    if (!t.section || !ref.section)
      throw Error("task '" + t.label + "': cannot mix printed and computed shape scales");
  }
  return ws.scales(t.label).relative_to(ws.scales(ref.label));
}

ComplianceGains scale_gains(ComplianceGains k, double f) {
  k.x *= f;
  k.y *= f;
  k.z *= f;
  k.alpha *= f;
  k.beta *= f;
  return k;
}

}  // namespace

ComplianceGains Workspace::gains(const std::string& label) const {
  const TaskSpec& t = cfg_.task(label);
  if (t.gains) return *t.gains;
  const TaskSpec& ref = cfg_.reference_task();
  if (t.reference) return ref_gains_;
  ShapeScales one;
  one.s.fill(1.0);
  return reconfigure(ref_gains_, geometry(ref.label), one, geometry(label), relative_scales(*this, t, ref));
}

PlantParams Workspace::plant(const std::string& label) const {
  const TaskSpec& t = cfg_.task(label);
  if (!t.section) throw Error("task '" + label + "' has no section and cannot be simulated");
  PlantParams p = cfg_.plant;
  p.section = *t.section;
  p.hole_depth = t.depth_m;
  p.clearance_mm = t.clearance_mm;
  return p;
}

EnvConfig Workspace::env_config(const std::string& label, double gain_factor) const {
  if (!(gain_factor > 0.0)) throw Error("gain factor must be positive");
  EnvConfig e = cfg_.env;
  e.plant = plant(label);
  e.gains = scale_gains(gains(label), gain_factor);
  e.validate();
  return e;
}

// Output ---------------------------------------------------------------------

OutputDir::OutputDir(std::string path) : path_(std::move(path)) {
  fs::create_directories(path_);
  const fs::path manifest = fs::path(path_) / "manifest.json";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    json m;
    try {
      m = json::parse(in);
    } catch (const json::exception&) {
      throw Error("output directory '" + path_ + "' holds an unreadable manifest.json");
    }
    for (const auto& f : m.value("files", json::array())) fs::remove(fs::path(path_) / f.at("name").get<std::string>());
    fs::remove(manifest);
  }
  if (!fs::is_empty(path_))
    throw Error("output directory '" + path_ + "' is not empty and has no manifest; refusing to mix runs");
}

std::string OutputDir::file(const std::string& name) const { return (fs::path(path_) / name).string(); }

void OutputDir::write(const std::string& name, const std::string& content) {
  std::ofstream out(file(name), std::ios::binary);
  if (!out) throw Error("cannot write '" + file(name) + "'");
  out << content;
  add(name);
}

void OutputDir::add(const std::string& name) {
  if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
}

void RunManifest::write(const OutputDir& dir) const {
  json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["code_version"] = code_version;
  j["seeds"] = seeds;
  json list = json::array();
  for (const auto& f : files) {
    std::ifstream in(dir.file(f), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    list.push_back({{"name", f}, {"bytes", bytes.size()}, {"fnv1a", hex64(fnv1a(bytes))}});
  }
  j["files"] = list;
  j["wall_clock_s"] = wall_clock_s;
  j["summary"] = summary;
  std::ofstream out(dir.file("manifest.json"));
  if (!out) throw Error("cannot write manifest");
  out << j.dump(2) << '\n';
}

// Reconfiguration ------------------------------------------------------------

ReconfigReport run_reconfigure(const Workspace& ws) {
  const auto& cfg = ws.config();
  const TaskSpec& ref = cfg.reference_task();
  std::vector<ReconfigTask> tasks;
  for (const auto& t : cfg.tasks) {
    ReconfigTask rt;
    rt.label = t.label;
    rt.geometry = ws.geometry(t.label);
    if (t.reference) {
      rt.relative_scales.s.fill(1.0);
    } else {
      rt.relative_scales = relative_scales(ws, t, ref);
    }
    rt.reference = t.reference;
    rt.tuned_gains = ws.reference_gains();
    rt.printed_gains = t.printed_gains;
    tasks.push_back(rt);
  }
  return reconfigure_table(tasks);
}

std::string reconfigure_table_text(const ReconfigReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(8) << "label" << std::setw(9) << "R_hat" << std::setw(7) << "L_mm"
     << std::setw(32) << "s_i / s_ref" << std::setw(14) << "method" << std::setw(44) << "K_x K_y K_z (1e-5 m/N)"
     << "K_a K_b K_g (1e-2 rad/Nm)\n";
  os << std::fixed;
  for (const auto& r : report.rows) {
    std::ostringstream s, k1, k2;
    s << std::fixed << std::setprecision(3);
    for (int i = 0; i < 5; ++i) s << (i ? " " : "") << r.relative_scales[i];
    k1 << std::fixed << std::setprecision(4) << r.gains.x * 1e5 << ' ' << r.gains.y * 1e5 << ' '
       << std::setprecision(6) << r.gains.z * 1e5;
    k2 << std::fixed << std::setprecision(4) << r.gains.alpha * 1e2 << ' ' << r.gains.beta * 1e2 << ' '
       << r.gains.gamma * 1e2;
    os << std::setw(8) << r.label << std::setw(9) << std::setprecision(2) << r.geometry.r_hat_mm << std::setw(7)
       << std::setprecision(0) << r.geometry.depth_m * 1e3 << std::setw(32) << s.str() << std::setw(14) << r.method
       << std::setw(44) << k1.str() << k2.str();
    if (r.printed_gains) os << "   (max dev from printed " << std::setprecision(3) << 100.0 * r.max_rel_error << "%)";
    os << '\n';
  }
  os << "product spread (x y z alpha beta):";
  for (double p : report.product_spread) os << ' ' << std::setprecision(5) << p;
  os << '\n';
  return os.str();
}

// Training -------------------------------------------------------------------

std::vector<TransferSource<float>> SourceSet::view() const {
  std::vector<TransferSource<float>> out;
  for (std::size_t i = 0; i < agents.size(); ++i) out.push_back({&agents[i], &envs[i], labels[i]});
  return out;
}

SourceSet prepare_sources(const Workspace& ws, std::uint64_t master_seed,
                          std::map<std::string, std::uint64_t>* ledger) {
  const auto& cfg = ws.config();
  SourceSet set;
  for (const auto& spec : cfg.transfer.sources) {
    AssemblyEnv env(ws.env_config(spec.task));
    AgentF agent;
    double eval = std::numeric_limits<double>::quiet_NaN();
    if (!spec.checkpoint.empty()) {
      agent = load_checkpoint<float>(cfg.resolve(spec.checkpoint));
    } else if (spec.train_episodes > 0) {
      const std::uint64_t seed = sub_seed(master_seed, "source/" + spec.task);
      if (ledger) (*ledger)["source/" + spec.task] = seed;
      auto r = train<float>(env, cfg.ddpg, spec.train_episodes, seed);
      agent = r.best_episode >= 0 ? r.best_agent : r.agent;
      agent.config_hash = cfg.hash;
      eval = evaluate_greedy(env, agent, cfg.campaign.eval_episodes, cfg.campaign.eval_seed);
    } else {
      throw Error("source '" + spec.task + "' has neither a checkpoint nor train_episodes");
    }
    set.labels.push_back(spec.task);
    set.agents.push_back(std::move(agent));
    set.envs.push_back(std::move(env));
    set.evals.push_back(eval);
  }
  return set;
}

int episodes_to_threshold(const std::vector<EpisodeStats>& curve, double threshold, int window) {
  if (window < 1) throw Error("window must be >= 1");
  double sum = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    sum += curve[i].avg_reward;
    if (i >= static_cast<std::size_t>(window)) sum -= curve[i - static_cast<std::size_t>(window)].avg_reward;
    if (i + 1 >= static_cast<std::size_t>(window) && sum / window >= threshold) return static_cast<int>(i) + 1;
  }
  return static_cast<int>(curve.size()) + 1;
}

double trailing_mean(const std::vector<EpisodeStats>& curve, int window) {
  if (curve.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = std::min(curve.size(), static_cast<std::size_t>(std::max(window, 1)));
  double sum = 0.0;
  for (std::size_t i = curve.size() - n; i < curve.size(); ++i) sum += curve[i].avg_reward;
  return sum / static_cast<double>(n);
}

double median(std::vector<double> v) {
  if (v.empty()) throw Error("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<const TransferRun*> TransferCampaign::of(TransferMethod m, double gain_factor) const {
  std::vector<const TransferRun*> out;
  for (const auto& r : runs)
    if (r.method == m && r.gain_factor == gain_factor) out.push_back(&r);
  return out;
}

double TransferCampaign::median_reach(TransferMethod m, double gain_factor) const {
  std::vector<double> v;
  for (const auto* r : of(m, gain_factor)) v.push_back(r->reach);
  return median(v);
}

double TransferCampaign::median_final(TransferMethod m, double gain_factor) const {
  std::vector<double> v;
  for (const auto* r : of(m, gain_factor)) v.push_back(r->final_greedy);
  return median(v);
}

std::string TransferCampaign::summary_csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "method,gain_factor,seed_index,seed,reach,final_greedy,final_trailing\n";
  for (const auto& r : runs)
    os << method_name(r.method) << ',' << r.gain_factor << ',' << r.seed_index << ',' << r.seed << ',' << r.reach
       << ',' << r.final_greedy << ',' << r.final_trailing << '\n';
  return os.str();
}

TransferCampaign run_transfer_campaign(const Workspace& ws, const SourceSet& sources,
                                       const std::vector<TransferMethod>& methods,
                                       const std::vector<double>& gain_factors, std::uint64_t master_seed,
                                       std::map<std::string, std::uint64_t>* ledger, const RunHook& hook) {
  const auto& cfg = ws.config();
  if (cfg.transfer.target.empty()) throw Error("transfer: no target task configured");
  for (auto m : methods)
    if (m != TransferMethod::Direct && sources.agents.empty())
      throw Error(std::string("transfer: method '") + method_name(m) + "' needs at least one source");
  TransferCampaign out;
  out.source_names = sources.labels;
  out.threshold = cfg.campaign.threshold;
  out.window = cfg.campaign.window;
  DdpgHyper h = cfg.ddpg;
  h.eval_interval = 0;
  const auto view = sources.view();
  for (double f : gain_factors) {
    if (f != 1.0 && !cfg.transfer.allow_unreconfigured)
      throw Error("transfer: target gains deviate from the reconfigured values; set allow_unreconfigured");
    const AssemblyEnv target(ws.env_config(cfg.transfer.target, f));
    for (int k = 0; k < cfg.campaign.seeds; ++k) {
      const std::string name = "transfer/" + std::to_string(k);
      const std::uint64_t seed = sub_seed(master_seed, name);
      if (ledger) (*ledger)[name] = seed;
      for (auto m : methods) {
        TransferRun run;
        run.method = m;
        run.seed_index = k;
        run.seed = seed;
        run.gain_factor = f;
        TransferOptions opt;
        opt.similarity = cfg.transfer.similarity;
        opt.omega_a = cfg.transfer.omega_a;
        opt.omega_c = cfg.transfer.omega_c;
        opt.method = m;
        run.result = transfer_train<float>(target, view, h, opt, cfg.transfer.episodes, seed);
        run.result.training.agent.config_hash = cfg.hash;
        run.reach = episodes_to_threshold(run.result.training.curve, cfg.campaign.threshold, cfg.campaign.window);
        run.final_greedy =
            evaluate_greedy(target, run.result.training.agent, cfg.campaign.eval_episodes, cfg.campaign.eval_seed);
        run.final_trailing = trailing_mean(run.result.training.curve, cfg.campaign.window);
        if (hook) hook(run);
        out.runs.push_back(std::move(run));
      }
    }
  }
  return out;
}

// Testing --------------------------------------------------------------------

VariantMetrics trace_metrics(const std::vector<TestTrace>& traces) {
  VariantMetrics m;
  if (traces.empty()) return m;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& t : traces) {
    std::vector<double> f;
    for (const auto& s : t.steps) f.push_back(s.sensor.force.norm());
    if (f.empty()) continue;
    for (double v : f) sum += v;
    n += f.size();
    m.peak_force += *std::max_element(f.begin(), f.end());
    const std::size_t start = f.size() - std::max<std::size_t>(2, f.size() / 4);
    double mean = 0.0, var = 0.0;
    const double cnt = static_cast<double>(f.size() - start);
    for (std::size_t i = start; i < f.size(); ++i) mean += f[i] / cnt;
    for (std::size_t i = start; i < f.size(); ++i) var += (f[i] - mean) * (f[i] - mean) / cnt;
    m.late_std += std::sqrt(var);
    m.success_rate += t.steps.back().info.success ? 1.0 : 0.0;
  }
  const double k = static_cast<double>(traces.size());
  m.mean_force = n ? sum / static_cast<double>(n) : 0.0;
  m.peak_force /= k;
  m.late_std /= k;
  m.success_rate /= k;
  return m;
}

std::vector<VariantMetrics> per_seed_metrics(const std::vector<TestTrace>& traces, const std::string& variant) {
  std::map<int, std::vector<TestTrace>> by_seed;
  for (const auto& t : traces)
    if (t.variant == variant) by_seed[t.seed_index].push_back(t);
  std::vector<VariantMetrics> out;
  for (const auto& [_, ts] : by_seed) out.push_back(trace_metrics(ts));
  return out;
}

std::string trace_csv(const std::vector<TestTrace>& traces) {
  std::ostringstream os;
  os.precision(8);
  os << "variant,seed_index,episode,step,fx,fy,fz,mx,my,mz,force_norm,K_x,K_y,K_z,K_alpha,K_beta,K_gamma,"
        "tcp_x,tcp_y,tcp_z,depth\n";
  for (const auto& t : traces) {
    for (const auto& s : t.steps) {
      os << t.variant << ',' << t.seed_index << ',' << t.episode << ',' << s.info.step;
      const Vector6d w = s.sensor.vector();
      for (int i = 0; i < 6; ++i) os << ',' << w[i];
      os << ',' << s.sensor.force.norm();
      const Vector6d k = s.info.effective.vector();
      for (int i = 0; i < 6; ++i) os << ',' << k[i];
      for (int i = 0; i < 3; ++i) os << ',' << s.robot.position[i];
      os << ',' << s.info.pose.l << '\n';
    }
  }
  return os.str();
}

std::vector<TestTrace> run_test_variants(const Workspace& ws,
                                         const std::map<std::string, std::vector<const AgentF*>>& agents) {
  const auto& cfg = ws.config();
  if (cfg.transfer.target.empty()) throw Error("test: no target task configured");
  std::size_t seeds = 0;
  for (const auto& [name, list] : agents) {
    if (name != "direct" && name != "wdpd" && name != "equal") throw Error("test: unknown variant '" + name + "'");
    if (seeds != 0 && list.size() != seeds) throw Error("test: every variant needs the same number of agents");
    seeds = list.size();
  }
  if (seeds == 0) throw Error("test: no trained agents given");
  AssemblyEnv nominal(ws.env_config(cfg.transfer.target));
  AssemblyEnv small(ws.env_config(cfg.transfer.target, cfg.test.small_factor));
  AssemblyEnv large(ws.env_config(cfg.transfer.target, cfg.test.large_factor));
  std::vector<TestTrace> out;
  for (std::size_t k = 0; k < seeds; ++k) {
    for (int e = 0; e < cfg.test.episodes; ++e) {
      const std::uint64_t seed = cfg.test.episode_seed + 1000 * k + static_cast<std::uint64_t>(e);
      for (const auto& v : test_variant_names()) {
        TestTrace t{v, static_cast<int>(k), e, {}};
        if (v == "small_k") {
          t.steps = run_constant(small, Vector6d::Zero(), seed);
        } else if (v == "large_k") {
          t.steps = run_constant(large, Vector6d::Zero(), seed);
        } else {
          const auto it = agents.find(v);
          if (it == agents.end()) continue;
          t.steps = run_episode(nominal, *it->second[k], seed);
        }
        out.push_back(std::move(t));
      }
    }
  }
  return out;
}

// Command line verbs ----------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

struct Session {
  ExperimentConfig cfg;
  OutputDir out;
  RunManifest manifest;
  Clock::time_point start = Clock::now();

  Session(const CommandOptions& opt, const std::string& command)
      : cfg(load(opt)), out(opt.out_dir ? *opt.out_dir : cfg.output_dir) {
    manifest.command = command;
    manifest.config_hash = cfg.hash;
    manifest.seeds["master"] = cfg.seed;
  }

  static ExperimentConfig load(const CommandOptions& opt) {
    ExperimentConfig c = load_config(opt.config_path);
    if (opt.seed) set_seed(c, *opt.seed);
    return c;
  }

  void save_agent(const std::string& name, const AgentF& agent) {
    save_checkpoint(agent, out.file(name));
    out.add(name);
  }

  void finish() {
    manifest.files = out.files();
    manifest.wall_clock_s = std::chrono::duration<double>(Clock::now() - start).count();
    manifest.write(out);
    std::cout << "wrote " << out.files().size() << " files and manifest.json to " << out.path() << '\n';
  }
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

std::string factor_tag(double f) {
  std::ostringstream os;
  os << f;
  std::string s = os.str();
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

void write_similarity(OutputDir& out, const SimilarityReport& rep, const std::vector<std::string>& names) {
  out.write("similarity_N.csv", rep.matrix_csv("N", names));
  out.write("similarity_graph.csv", rep.matrix_csv("graph", names));
  out.write("similarity_Sim.csv", rep.matrix_csv("Sim", names));
  out.write("similarity_W.csv", rep.matrix_csv("W", names));
  out.write("similarity_long.csv", rep.long_csv(names));
}

json source_summary(const SourceSet& s) {
  json j = json::array();
  for (std::size_t i = 0; i < s.labels.size(); ++i)
    j.push_back({{"task", s.labels[i]}, {"greedy_eval", std::isnan(s.evals[i]) ? json(nullptr) : json(s.evals[i])}});
  return j;
}

}  // namespace

int cmd_reconfigure(const CommandOptions& opt) {
  Session s(opt, "reconfigure");
  const Workspace ws(s.cfg);
  const ReconfigReport rep = run_reconfigure(ws);
  s.out.write("reconfigure.csv", report_csv(rep));
  const std::string text = reconfigure_table_text(rep);
  s.out.write("reconfigure.txt", text);
  std::cout << text;
  double worst = 0.0;
  for (const auto& r : rep.rows) worst = std::max(worst, r.max_rel_error);
  s.manifest.summary = {{"product_spread", rep.product_spread}, {"max_rel_error_vs_printed", worst}};
  s.finish();
  return 0;
}

int cmd_train(const CommandOptions& opt) {
  Session s(opt, "train");
  if (s.cfg.train_task.empty()) throw Error("train: config has no train.task");
  const Workspace ws(s.cfg);
  const AssemblyEnv env(ws.env_config(s.cfg.train_task));
  const std::uint64_t seed = sub_seed(s.cfg.seed, "train");
  s.manifest.seeds["train"] = seed;
  auto hook = [](const EpisodeStats& e) {
    if ((e.episode + 1) % 10 == 0)
      std::cout << "episode " << e.episode + 1 << " avg_reward " << fmt(e.avg_reward) << '\n' << std::flush;
  };
  TrainResult<float> r;
  if (!opt.resume.empty()) {
    AgentF start = load_checkpoint<float>(opt.resume);
    if (start.config_hash != s.cfg.hash && !opt.force)
      throw Error("train: checkpoint config hash " + start.config_hash + " differs from " + s.cfg.hash +
                  " (use --force to resume anyway)");
    std::mt19937_64 rng(seed);
    r = train_from<float>(env, s.cfg.ddpg, s.cfg.train_episodes, rng, std::move(start),
                          ReplayBuffer(static_cast<std::size_t>(s.cfg.ddpg.buffer_capacity)), nullptr, hook);
  } else {
    r = train<float>(env, s.cfg.ddpg, s.cfg.train_episodes, seed, nullptr, hook);
  }
  AgentF chosen = r.best_episode >= 0 ? r.best_agent : r.agent;
  chosen.config_hash = s.cfg.hash;
  s.out.write("curve.csv", curve_csv(r.curve));
  s.save_agent("agent.json", chosen);
  const double greedy = evaluate_greedy(env, chosen, s.cfg.campaign.eval_episodes, s.cfg.campaign.eval_seed);
  int successes = 0;
  for (const auto& e : r.curve) successes += e.success;
  s.manifest.summary = {{"task", s.cfg.train_task},
                        {"episodes", r.curve.size()},
                        {"best_episode", r.best_episode},
                        {"greedy_eval", greedy},
                        {"success_rate", r.curve.empty() ? 0.0 : static_cast<double>(successes) / r.curve.size()}};
  std::cout << "greedy evaluation " << fmt(greedy) << '\n';
  s.finish();
  return 0;
}

namespace {

std::vector<TransferMethod> chosen_methods(const CommandOptions& opt, const ExperimentConfig& cfg) {
  if (!opt.method) return cfg.transfer.methods;
  if (*opt.method == "all")
    return {TransferMethod::Wdpd, TransferMethod::Equal, TransferMethod::MostSimilar, TransferMethod::LeastSimilar,
            TransferMethod::Direct};
  return {method_from_name(*opt.method)};
}

void print_run(const TransferRun& r) {
  std::cout << method_name(r.method) << " f=" << r.gain_factor << " seed#" << r.seed_index << " reach " << r.reach
            << " final " << fmt(r.final_greedy) << '\n'
            << std::flush;
}

}  // namespace

int cmd_transfer(const CommandOptions& opt) {
  Session s(opt, "transfer");
  const auto methods = chosen_methods(opt, s.cfg);
  const bool needs_sources =
      std::any_of(methods.begin(), methods.end(), [](auto m) { return m != TransferMethod::Direct; });
  if (needs_sources && s.cfg.transfer.sources.empty()) throw Error("transfer: no sources configured");
  const Workspace ws(s.cfg);
  const SourceSet sources = needs_sources ? prepare_sources(ws, s.cfg.seed, &s.manifest.seeds) : SourceSet{};
  const auto campaign = run_transfer_campaign(ws, sources, methods, {s.cfg.transfer.gain_factor}, s.cfg.seed,
                                              &s.manifest.seeds, print_run);
  bool similarity_written = false;
  json per_method = json::object();
  for (const auto& r : campaign.runs) {
    const std::string tag = std::string(method_name(r.method)) + "_s" + std::to_string(r.seed_index);
    s.out.write("curve_" + tag + ".csv", curve_csv(r.result.training.curve));
    s.save_agent("agent_" + tag + ".json", r.result.training.agent);
    if (!similarity_written && r.result.report.sim.size() > 0) {
      write_similarity(s.out, r.result.report, sources.labels);
      similarity_written = true;
    }
  }
  for (auto m : methods)
    per_method[method_name(m)] = {{"median_reach", campaign.median_reach(m)}, {"median_final", campaign.median_final(m)}};
  s.out.write("summary.csv", campaign.summary_csv());
  s.manifest.summary = {{"target", s.cfg.transfer.target},
                        {"threshold", campaign.threshold},
                        {"window", campaign.window},
                        {"sources", source_summary(sources)},
                        {"methods", per_method}};
  for (auto m : methods)
    std::cout << std::left << std::setw(8) << method_name(m) << " median episodes-to-threshold "
              << campaign.median_reach(m) << "  median final " << fmt(campaign.median_final(m)) << '\n';
  s.finish();
  return 0;
}

int cmd_ablate_gains(const CommandOptions& opt) {
  Session s(opt, "ablate-gains");
  if (s.cfg.transfer.sources.size() != 1) throw Error("ablate-gains: exactly one source is required");
  s.cfg.transfer.allow_unreconfigured = true;
  const TransferMethod method = opt.method ? method_from_name(*opt.method) : TransferMethod::Wdpd;
  const Workspace ws(s.cfg);
  const SourceSet sources = prepare_sources(ws, s.cfg.seed, &s.manifest.seeds);
  const auto campaign =
      run_transfer_campaign(ws, sources, {method}, s.cfg.ablation_factors, s.cfg.seed, &s.manifest.seeds, print_run);
  for (const auto& r : campaign.runs)
    s.out.write("curve_f" + factor_tag(r.gain_factor) + "_s" + std::to_string(r.seed_index) + ".csv",
                curve_csv(r.result.training.curve));
  s.out.write("summary.csv", campaign.summary_csv());
  json per_factor = json::object();
  for (double f : s.cfg.ablation_factors) {
    per_factor[factor_tag(f)] = {{"factor", f}, {"median_final", campaign.median_final(method, f)},
                                 {"median_reach", campaign.median_reach(method, f)}};
    std::cout << "factor " << f << " median final " << fmt(campaign.median_final(method, f)) << '\n';
  }
  s.manifest.summary = {{"method", method_name(method)}, {"factors", per_factor}};
  s.finish();
  return 0;
}

int cmd_test(const CommandOptions& opt) {
  Session s(opt, "test");
  const Workspace ws(s.cfg);
  std::vector<AgentF> loaded;
  loaded.reserve(3);
  std::map<std::string, std::vector<const AgentF*>> agents;
  for (const char* v : {"direct", "wdpd", "equal"}) {
    const auto it = s.cfg.test.checkpoints.find(v);
    if (it == s.cfg.test.checkpoints.end()) throw Error(std::string("test: checkpoint for '") + v + "' missing");
    loaded.push_back(load_checkpoint<float>(s.cfg.resolve(it->second)));
  }
  agents["direct"] = {&loaded[0]};
  agents["wdpd"] = {&loaded[1]};
  agents["equal"] = {&loaded[2]};
  const auto traces = run_test_variants(ws, agents);
  s.out.write("trajectories.csv", trace_csv(traces));
  std::ostringstream summary;
  summary << "variant,mean_force,peak_force,late_std,success_rate\n";
  json js = json::object();
  for (const auto& v : test_variant_names()) {
    std::vector<TestTrace> mine;
    for (const auto& t : traces)
      if (t.variant == v) mine.push_back(t);
    const VariantMetrics m = trace_metrics(mine);
    summary << v << ',' << m.mean_force << ',' << m.peak_force << ',' << m.late_std << ',' << m.success_rate << '\n';
    js[v] = {{"mean_force", m.mean_force}, {"peak_force", m.peak_force}, {"late_std", m.late_std},
             {"success_rate", m.success_rate}};
    std::cout << std::left << std::setw(8) << v << " mean|F| " << fmt(m.mean_force, 3) << "  peak " << fmt(m.peak_force, 3)
              << "  late std " << fmt(m.late_std, 3) << "  success " << fmt(m.success_rate, 2) << '\n';
  }
  s.out.write("summary.csv", summary.str());
  s.manifest.summary = js;
  s.finish();
  return 0;
}

int cmd_report(const std::string& dir) {
  const fs::path manifest = fs::path(dir) / "manifest.json";
  std::ifstream in(manifest);
  if (!in) throw Error("report: no manifest.json in '" + dir + "' (run incomplete or wrong directory)");
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(std::string("report: bad manifest: ") + e.what());
  }
  std::cout << "command      " << m.value("command", "?") << '\n'
            << "config hash  " << m.value("config_hash", "?") << '\n'
            << "code version " << m.value("code_version", "?") << '\n'
            << "wall clock   " << fmt(m.value("wall_clock_s", 0.0), 1) << " s\n"
            << "seeds        " << m.at("seeds").dump() << '\n';
  int missing = 0, changed = 0;
  for (const auto& f : m.at("files")) {
    const fs::path p = fs::path(dir) / f.at("name").get<std::string>();
    std::ifstream fin(p, std::ios::binary);
    if (!fin) {
      ++missing;
      std::cout << "  MISSING " << p.string() << '\n';
      continue;
    }
    std::stringstream ss;
    ss << fin.rdbuf();
    if (hex64(fnv1a(ss.str())) != f.at("fnv1a").get<std::string>()) {
      ++changed;
      std::cout << "  CHANGED " << p.string() << '\n';
    }
  }
  std::cout << "files        " << m.at("files").size() << " listed, " << missing << " missing, " << changed
            << " changed\n"
            << "summary\n"
            << m.at("summary").dump(2) << '\n';
  return missing || changed ? 1 : 0;
}

}  // namespace peghole
