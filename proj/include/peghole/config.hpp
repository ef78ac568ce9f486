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
 * @file config.hpp
 * @brief Experiment configuration: JSON schema, validation, hashing, seeds.
 *
 * The schema is documented in docs/config.md. Every object rejects keys it
 * does not know, so a typo fails loudly instead of silently using a default.
 */

#pragma once

#include "peghole/etcl.hpp"
#include "peghole/wdpd.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace peghole {

struct TaskSpec {
  std::string label;
  std::string section_ref;              // path as written, empty for inline sections
  std::optional<CrossSection> section;  // absent for table-only rows
  double depth_m = 0.03;
  double clearance_mm = 0.1;
  bool reference = false;
  std::optional<ComplianceGains> gains;                  // explicit gains (reference or override)
  std::optional<double> r_hat_mm;                        // printed R_hat; else from the section
  std::optional<std::array<double, 5>> relative_scales;  // printed s_i / s_ref,i; else computed
  std::optional<ComplianceGains> printed_gains;          // for comparison only
};

struct ReconfigSettings {
  double kappa = 2.0;       // reference gains K_i = kappa / stiffness_i when not given
  double k_gamma = 5.55e-2;
  ProbeOptions probe;
};

struct SourceSpec {
  std::string task;
  std::string checkpoint;  // load from here when set
  int train_episodes = 0;  // otherwise train in-process for this many episodes
};

struct TransferSettings {
  std::string target;
  std::vector<SourceSpec> sources;
  std::vector<TransferMethod> methods{TransferMethod::Wdpd};
  int episodes = 100;
  SimilarityOptions similarity;
  double omega_a = 2.0;
  double omega_c = 5.0;
  double gain_factor = 1.0;           // target gains = ETCL gains * factor
  bool allow_unreconfigured = false;  // needed for gain_factor != 1
};

struct CampaignSettings {
  int seeds = 5;
  double threshold = -0.55;  // average reward, trailing-window mean
  int window = 10;
  int eval_episodes = 10;    // greedy evaluation of final agents
  std::uint64_t eval_seed = 900000;
};

struct TestSettings {
  double small_factor = 0.3;
  double large_factor = 1.8;
  int episodes = 3;  // test episodes per variant and seed
  std::uint64_t episode_seed = 800000;
  std::map<std::string, std::string> checkpoints;  // direct / wdpd / equal
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::string base_dir = ".";  // directory of the config file, for relative paths

  PlantParams plant;  // section is a placeholder, replaced per task
  EnvConfig env;      // plant and gains replaced per task
  std::vector<TaskSpec> tasks;
  ReconfigSettings reconfig;
  DdpgHyper ddpg;
  std::string train_task;
  int train_episodes = 100;
  TransferSettings transfer;
  std::vector<double> ablation_factors{1.0, 4.0};
  CampaignSettings campaign;
  TestSettings test;

  nlohmann::json source;  // the parsed input, seed applied
  std::string hash;       // FNV-1a of `source` without output_dir, hex

  ExperimentConfig();
  const TaskSpec& task(const std::string& label) const;
  const TaskSpec& reference_task() const;
  /// Resolves a config-relative path.
  std::string resolve(const std::string& path) const;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);

/// Named sub-seed of a master seed (stable across runs and platforms).
std::uint64_t sub_seed(std::uint64_t master, const std::string& name);

ExperimentConfig parse_config(const nlohmann::json& j, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);
/// Re-applies a new master seed and refreshes the hash.
void set_seed(ExperimentConfig& cfg, std::uint64_t seed);

nlohmann::json gains_to_json(const ComplianceGains& k);
ComplianceGains gains_from_json(const nlohmann::json& j, const std::string& where);

}  // namespace peghole
