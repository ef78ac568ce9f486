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
 * @file experiment.hpp
 * @brief Campaign runners behind the command line verbs.
 *
 * Every runner is a function of (config, seed, input checkpoints). Files go
 * through an OutputDir, which records them for the manifest; the manifest
 * is written last and doubles as a completion marker.
 *
 * Agents are 32-bit throughout this layer.
 */

#pragma once

#include "peghole/config.hpp"

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace peghole {

inline constexpr const char* kCodeVersion = "peghole 0.1.0";

using AgentF = Agent<float>;

/// Resolved tasks: ETCL gains and environment configs per label.
class Workspace {
 public:
  explicit Workspace(ExperimentConfig cfg);

  const ExperimentConfig& config() const { return cfg_; }
  /// Reference gains: given explicitly, else tuned from the simulated plant.
  const ComplianceGains& reference_gains() const { return ref_gains_; }
  TaskGeometry geometry(const std::string& label) const;
  /// Absolute shape scales; only for tasks with a section.
  const ShapeScales& scales(const std::string& label) const;
  /// ETCL gains for a task (explicit task gains win).
  ComplianceGains gains(const std::string& label) const;
  PlantParams plant(const std::string& label) const;
  EnvConfig env_config(const std::string& label, double gain_factor = 1.0) const;

 private:
  ExperimentConfig cfg_;
  ComplianceGains ref_gains_;
  std::map<std::string, ShapeScales> scales_;
};

/// Collects written files for the manifest.
class OutputDir {
 public:
  explicit OutputDir(std::string path);
  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const;
  void write(const std::string& name, const std::string& content);
  /// Registers a file written by someone else (e.g. a checkpoint).
  void add(const std::string& name);
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::string path_;
  std::vector<std::string> files_;
};

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::string code_version = kCodeVersion;
  std::map<std::string, std::uint64_t> seeds;
  std::vector<std::string> files;
  double wall_clock_s = 0.0;
  nlohmann::json summary;

  /// Writes manifest.json into the directory (call last).
  void write(const OutputDir& dir) const;
};

// Reconfiguration -----------------------------------------------------------

ReconfigReport run_reconfigure(const Workspace& ws);
std::string reconfigure_table_text(const ReconfigReport& report);

// Training ------------------------------------------------------------------

struct SourceSet {
  std::vector<std::string> labels;
  std::vector<AgentF> agents;
  std::vector<AssemblyEnv> envs;
  std::vector<double> evals;  // greedy score in the own task, NaN when loaded

  std::vector<TransferSource<float>> view() const;
};

/// Loads or trains every configured source (seed names "source/<label>").
SourceSet prepare_sources(const Workspace& ws, std::uint64_t master_seed, std::map<std::string, std::uint64_t>* ledger);

/// Episodes consumed until the trailing `window` mean first reaches the
/// threshold; curve size + 1 when it never does.
int episodes_to_threshold(const std::vector<EpisodeStats>& curve, double threshold, int window);
double trailing_mean(const std::vector<EpisodeStats>& curve, int window);
double median(std::vector<double> v);

struct TransferRun {
  TransferMethod method = TransferMethod::Direct;
  int seed_index = 0;
  std::uint64_t seed = 0;
  double gain_factor = 1.0;
  TransferResult<float> result;
  int reach = 0;
  double final_greedy = 0.0;    // greedy evaluation of the final agent
  double final_trailing = 0.0;  // trailing-window mean of the training curve
};

struct TransferCampaign {
  std::vector<TransferRun> runs;
  std::vector<std::string> source_names;
  double threshold = 0.0;
  int window = 10;

  std::vector<const TransferRun*> of(TransferMethod m, double gain_factor = 1.0) const;
  double median_reach(TransferMethod m, double gain_factor = 1.0) const;
  double median_final(TransferMethod m, double gain_factor = 1.0) const;
  /// method,gain_factor,seed_index,seed,reach,final_greedy,final_trailing
  std::string summary_csv() const;
};

using RunHook = std::function<void(const TransferRun&)>;

/// Runs methods x seeds (x gain factors) on the configured target with
/// shared per-seed-index seeds "transfer/<k>".
TransferCampaign run_transfer_campaign(const Workspace& ws, const SourceSet& sources,
                                       const std::vector<TransferMethod>& methods,
                                       const std::vector<double>& gain_factors, std::uint64_t master_seed,
                                       std::map<std::string, std::uint64_t>* ledger, const RunHook& hook = {});

// Testing -------------------------------------------------------------------

struct TestTrace {
  std::string variant;
  int seed_index = 0;
  int episode = 0;
  std::vector<StepResult> steps;
};

struct VariantMetrics {
  double mean_force = 0.0;    // mean |F| over all steps and episodes
  double peak_force = 0.0;    // max |F|, averaged over episodes
  double late_std = 0.0;      // std of |F| over the final quartile, averaged over episodes
  double success_rate = 0.0;
};

VariantMetrics trace_metrics(const std::vector<TestTrace>& traces);
/// Metrics of one variant per seed index, in seed order.
std::vector<VariantMetrics> per_seed_metrics(const std::vector<TestTrace>& traces, const std::string& variant);

/// Per-step CSV: variant,seed_index,episode,step,fx..mz,force_norm,K_x..K_gamma,tcp_x..tcp_z,depth
std::string trace_csv(const std::vector<TestTrace>& traces);

/// Greedy runs of the five controller variants. `agents` maps "direct",
/// "wdpd", "equal" to one agent per seed index.
std::vector<TestTrace> run_test_variants(const Workspace& ws, const std::map<std::string, std::vector<const AgentF*>>& agents);

inline const std::vector<std::string>& test_variant_names() {
  static const std::vector<std::string> names{"small_k", "large_k", "direct", "wdpd", "equal"};
  return names;
}

// Command line verbs ---------------------------------------------------------

struct CommandOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> method;
  std::string resume;  // train: continue from this checkpoint
  bool force = false;  // train: accept a config hash mismatch on resume
};

int cmd_reconfigure(const CommandOptions& opt);
int cmd_train(const CommandOptions& opt);
int cmd_transfer(const CommandOptions& opt);
int cmd_ablate_gains(const CommandOptions& opt);
int cmd_test(const CommandOptions& opt);
/// Prints a summary of a finished output directory.
int cmd_report(const std::string& dir);

}  // namespace peghole
