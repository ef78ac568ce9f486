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

// peghole: command line front end.
//
//   peghole reconfigure  --config data/configs/gain_table_group_a.json
//   peghole train        --config data/configs/campaign.json --out out/train
//   peghole transfer     --config data/configs/campaign.json --method all
//   peghole ablate-gains --config data/configs/ablation.json
//   peghole test         --config data/configs/test.json
//   peghole report       out/transfer

#include "peghole/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Peg-in-hole compliance control laboratory"};
  app.require_subcommand(1);

  peghole::CommandOptions opt;
  std::uint64_t seed = 0;
  std::string out, method, report_dir;

  auto common = [&](CLI::App* sub, bool with_method) {
    sub->add_option("--config", opt.config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out", out, "output directory (overrides the config)");
    if (with_method) sub->add_option("--method", method, "wdpd, equal, most, least, direct or all");
  };

  auto* reconfigure = app.add_subcommand("reconfigure", "ETCL gain table for the configured tasks");
  common(reconfigure, false);
  auto* train = app.add_subcommand("train", "train an agent on train.task");
  common(train, false);
  train->add_option("--resume", opt.resume, "continue from this checkpoint")->check(CLI::ExistingFile);
  train->add_flag("--force", opt.force, "resume even when the config hash differs");
  auto* transfer = app.add_subcommand("transfer", "transfer sources to the target task");
  common(transfer, true);
  auto* ablate = app.add_subcommand("ablate-gains", "transfer with deviated target gains");
  common(ablate, true);
  auto* test = app.add_subcommand("test", "greedy test runs of the five controller variants");
  common(test, false);
  auto* report = app.add_subcommand("report", "summarize a finished output directory");
  report->add_option("dir", report_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  for (auto* sub : {reconfigure, train, transfer, ablate, test}) {
    if (sub->count("--seed")) opt.seed = seed;
    if (sub->count("--out")) opt.out_dir = out;
    if (sub->get_option_no_throw("--method") && sub->count("--method")) opt.method = method;
  }

  try {
    if (*reconfigure) return peghole::cmd_reconfigure(opt);
    if (*train) return peghole::cmd_train(opt);
    if (*transfer) return peghole::cmd_transfer(opt);
    if (*ablate) return peghole::cmd_ablate_gains(opt);
    if (*test) return peghole::cmd_test(opt);
    if (*report) return peghole::cmd_report(report_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
