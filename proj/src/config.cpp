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

#include "peghole/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace peghole {
namespace {

using nlohmann::json;

// Typed view of one JSON object. Every key read is marked; finish() rejects
// whatever is left over.
class Obj {
 public:
  Obj(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw Error(where_ + ": expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json* find(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const char* key) const { return where_ + "." + key; }

  void number(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw Error(path(key) + ": expected a number");
      out = v->get<double>();
    }
  }
  void integer(const char* key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw Error(path(key) + ": expected an integer");
      out = v->get<int>();
    }
  }
  void seed(const char* key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
        throw Error(path(key) + ": expected a nonnegative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void boolean(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw Error(path(key) + ": expected true or false");
      out = v->get<bool>();
    }
  }
  void string(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw Error(path(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }
  std::string required_string(const char* key) {
    if (!has(key)) throw Error(path(key) + ": required");
    std::string s;
    string(key, s);
    return s;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) throw Error(where_ + ": unknown key '" + key + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::array<double, 5> read_five(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 5) throw Error(where + ": expected 5 numbers (x, y, z, alpha, beta)");
  std::array<double, 5> out{};
  for (std::size_t i = 0; i < 5; ++i) {
    if (!v[i].is_number()) throw Error(where + ": expected numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

void read_grid(Obj o, Grid& g) {
  o.integer("n_theta", g.n_theta);
  o.integer("n_s", g.n_s);
  o.finish();
}

void read_plant(Obj o, PlantParams& p) {
  o.number("contact_stiffness", p.contact_stiffness);
  o.number("friction", p.friction);
  o.number("penetration_cap_m", p.penetration_cap);
  o.number("tau_scale", p.tau_scale);
  std::string tau = "zero";
  o.string("tau_model", tau);
  if (tau == "zero") {
    p.tau_model = TauModel::Zero;
  } else if (tau == "bounded_random") {
    p.tau_model = TauModel::BoundedRandom;
  } else {
    throw Error(o.path("tau_model") + ": expected \"zero\" or \"bounded_random\"");
  }
  o.finish();
}

void read_vec3(Obj& o, const char* key, Eigen::Vector3d& v) {
  if (const json* j = o.find(key)) {
    if (!j->is_array() || j->size() != 3) throw Error(o.path(key) + ": expected 3 numbers");
    for (int i = 0; i < 3; ++i) v[i] = (*j)[static_cast<std::size_t>(i)].get<double>();
  }
}

void read_env(Obj o, EnvConfig& e) {
  o.integer("max_steps", e.max_steps);
  o.number("feed_speed", e.feed_speed);
  o.number("feed_tilt", e.feed_tilt);
  o.number("lateral_error_mm", e.lateral_error_mm);
  o.number("angular_error_rad", e.angular_error_rad);
  o.number("capture_fraction", e.capture_fraction);
  o.number("tcp_height", e.tcp_height);
  o.number("sensor_height", e.sensor_height);
  o.number("sensor_yaw", e.sensor_yaw);
  o.number("force_limit", e.force_limit);
  o.number("moment_limit", e.moment_limit);
  o.number("failure_penalty", e.failure_penalty);
  o.number("wrench_noise_n", e.wrench_noise_n);
  o.number("reference_force", e.reference.f_z);
  o.number("cap_translation", e.caps.translation);
  o.number("cap_rotation", e.caps.rotation);
  if (const json* g = o.find("grid")) read_grid(Obj(*g, o.path("grid")), e.grid);
  if (const json* r = o.find("reward")) {
    Obj ro(*r, o.path("reward"));
    ro.number("h_z", e.reward.h_z);
    ro.number("h_f", e.reward.h_f);
    ro.number("h_m", e.reward.h_m);
    ro.finish();
  }
  if (const json* s = o.find("observation_scales")) {
    Obj so(*s, o.path("observation_scales"));
    read_vec3(so, "position_mm", e.scales.position_mm);
    read_vec3(so, "angle_rad", e.scales.angle_rad);
    read_vec3(so, "force_n", e.scales.force_n);
    read_vec3(so, "moment_nm", e.scales.moment_nm);
    so.finish();
  }
  o.finish();
}

void read_ddpg(Obj o, DdpgHyper& h) {
  if (const json* v = o.find("hidden")) {
    if (!v->is_array() || v->empty()) throw Error(o.path("hidden") + ": expected a nonempty list of sizes");
    h.hidden.clear();
    for (const auto& n : *v) {
      if (!n.is_number_integer()) throw Error(o.path("hidden") + ": expected integers");
      h.hidden.push_back(n.get<int>());
    }
  }
  o.number("gamma", h.gamma);
  o.number("actor_lr", h.actor_lr);
  o.number("critic_lr", h.critic_lr);
  o.number("tau", h.tau);
  o.integer("batch_size", h.batch_size);
  o.integer("buffer_capacity", h.buffer_capacity);
  o.integer("warmup_episodes", h.warmup_episodes);
  o.integer("updates_per_step", h.updates_per_step);
  o.number("noise_start", h.noise_start);
  o.number("noise_end", h.noise_end);
  o.integer("noise_decay_episodes", h.noise_decay_episodes);
  o.number("reward_scale", h.reward_scale);
  o.number("actor_final_range", h.actor_final_range);
  o.number("critic_final_range", h.critic_final_range);
  o.integer("eval_interval", h.eval_interval);
  o.integer("eval_episodes", h.eval_episodes);
  o.seed("eval_seed", h.eval_seed);
  o.finish();
}

void read_reconfig(Obj o, ReconfigSettings& r) {
  o.number("kappa", r.kappa);
  o.number("k_gamma", r.k_gamma);
  o.number("probe_penetration_mm", r.probe.probe_penetration_mm);
  o.number("step_fraction", r.probe.step_fraction);
  o.integer("directions", r.probe.directions);
  if (const json* g = o.find("grid")) read_grid(Obj(*g, o.path("grid")), r.probe.grid);
  o.finish();
}

TaskSpec read_task(Obj o, const std::string& base_dir) {
  TaskSpec t;
  t.label = o.required_string("label");
  if (const json* s = o.find("section")) {
    if (s->is_string()) {
      t.section_ref = s->get<std::string>();
      const std::filesystem::path p(t.section_ref);
      t.section = load_section(p.is_absolute() ? p.string() : (std::filesystem::path(base_dir) / p).string());
    } else {
      t.section = section_from_json_text(s->dump());
    }
  }
  o.number("depth_m", t.depth_m);
  o.number("clearance_mm", t.clearance_mm);
  o.boolean("reference", t.reference);
  if (const json* g = o.find("gains")) t.gains = gains_from_json(*g, o.path("gains"));
  if (const json* g = o.find("printed_gains")) t.printed_gains = gains_from_json(*g, o.path("printed_gains"));
  if (const json* r = o.find("r_hat_mm")) {
    if (!r->is_number()) throw Error(o.path("r_hat_mm") + ": expected a number");
    t.r_hat_mm = r->get<double>();
  }
  if (const json* s = o.find("relative_scales")) t.relative_scales = read_five(*s, o.path("relative_scales"));
  o.finish();
  if (!t.section && !(t.r_hat_mm && t.relative_scales))
    throw Error("task '" + t.label + "': needs a section, or both r_hat_mm and relative_scales");
  if (!(t.depth_m > 0.0)) throw Error("task '" + t.label + "': depth_m must be positive");
  if (!(t.clearance_mm > 0.0)) throw Error("task '" + t.label + "': clearance_mm must be positive");
  return t;
}

void read_similarity(Obj o, SimilarityOptions& s) {
  o.integer("rollouts", s.rollouts);
  o.integer("horizon", s.horizon);
  o.number("nu", s.nu);
  std::string axis = "sources";
  o.string("axis", axis);
  if (axis == "sources") {
    s.axis = WeightAxis::Sources;
  } else if (axis == "dimensions") {
    s.axis = WeightAxis::Dimensions;
  } else {
    throw Error(o.path("axis") + ": expected \"sources\" or \"dimensions\"");
  }
  o.finish();
}

void read_transfer(Obj o, TransferSettings& t) {
  o.string("target", t.target);
  if (const json* srcs = o.find("sources")) {
    if (!srcs->is_array()) throw Error(o.path("sources") + ": expected a list");
    for (const auto& s : *srcs) {
      Obj so(s, o.path("sources[]"));
      SourceSpec spec;
      spec.task = so.required_string("task");
      so.string("checkpoint", spec.checkpoint);
      so.integer("train_episodes", spec.train_episodes);
      so.finish();
      t.sources.push_back(spec);
    }
  }
  if (const json* m = o.find("methods")) {
    if (!m->is_array() || m->empty()) throw Error(o.path("methods") + ": expected a nonempty list");
    t.methods.clear();
    for (const auto& name : *m) {
      if (!name.is_string()) throw Error(o.path("methods") + ": expected method names");
      t.methods.push_back(method_from_name(name.get<std::string>()));
    }
  }
  o.integer("episodes", t.episodes);
  o.number("omega_a", t.omega_a);
  o.number("omega_c", t.omega_c);
  o.number("gain_factor", t.gain_factor);
  o.boolean("allow_unreconfigured", t.allow_unreconfigured);
  if (const json* s = o.find("similarity")) read_similarity(Obj(*s, o.path("similarity")), t.similarity);
  o.finish();
}

void read_campaign(Obj o, CampaignSettings& c) {
  o.integer("seeds", c.seeds);
  o.number("threshold", c.threshold);
  o.integer("window", c.window);
  o.integer("eval_episodes", c.eval_episodes);
  o.seed("eval_seed", c.eval_seed);
  o.finish();
  if (c.seeds < 1 || c.window < 1 || c.eval_episodes < 1)
    throw Error("campaign: seeds, window and eval_episodes must be >= 1");
}

void read_test(Obj o, TestSettings& t) {
  o.number("small_factor", t.small_factor);
  o.number("large_factor", t.large_factor);
  o.integer("episodes", t.episodes);
  o.seed("episode_seed", t.episode_seed);
  if (const json* c = o.find("checkpoints")) {
    Obj co(*c, o.path("checkpoints"));
    for (const char* k : {"direct", "wdpd", "equal"}) {
      std::string path;
      co.string(k, path);
      if (!path.empty()) t.checkpoints[k] = path;
    }
    co.finish();
  }
  o.finish();
  if (!(t.small_factor > 0.0) || !(t.large_factor > 0.0)) throw Error("test: gain factors must be positive");
  if (t.episodes < 1) throw Error("test: episodes must be >= 1");
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

std::uint64_t sub_seed(std::uint64_t master, const std::string& name) {
  // splitmix64 finalizer over the master seed mixed with the name hash
  std::uint64_t z = master ^ fnv1a(name);
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

json gains_to_json(const ComplianceGains& k) {
  return {{"x", k.x}, {"y", k.y}, {"z", k.z}, {"alpha", k.alpha}, {"beta", k.beta}, {"gamma", k.gamma}};
}

ComplianceGains gains_from_json(const json& j, const std::string& where) {
  Obj o(j, where);
  ComplianceGains k;
  for (const char* key : {"x", "y", "z", "alpha", "beta", "gamma"})
    if (!o.has(key)) throw Error(o.path(key) + ": required");
  o.number("x", k.x);
  o.number("y", k.y);
  o.number("z", k.z);
  o.number("alpha", k.alpha);
  o.number("beta", k.beta);
  o.number("gamma", k.gamma);
  o.finish();
  k.validate();
  return k;
}

ExperimentConfig::ExperimentConfig()
    : plant{make_circle("placeholder", 1.0)}, env(plant) {}

const TaskSpec& ExperimentConfig::task(const std::string& label) const {
  for (const auto& t : tasks)
    if (t.label == label) return t;
  throw Error("config: no task labelled '" + label + "'");
}

const TaskSpec& ExperimentConfig::reference_task() const {
  const TaskSpec* ref = nullptr;
  for (const auto& t : tasks) {
    if (!t.reference) continue;
    if (ref != nullptr) throw Error("config: more than one reference task");
    ref = &t;
  }
  if (ref == nullptr) throw Error("config: no reference task designated");
  return *ref;
}

std::string ExperimentConfig::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p.string() : (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

ExperimentConfig parse_config(const json& j, const std::string& base_dir) {
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  Obj o(j, "config");
  o.string("name", cfg.name);
  o.seed("seed", cfg.seed);
  o.string("output_dir", cfg.output_dir);
  if (const json* p = o.find("plant")) read_plant(Obj(*p, "plant"), cfg.plant);
  if (const json* e = o.find("env")) read_env(Obj(*e, "env"), cfg.env);
  if (const json* r = o.find("reconfigure")) read_reconfig(Obj(*r, "reconfigure"), cfg.reconfig);
  if (const json* d = o.find("ddpg")) read_ddpg(Obj(*d, "ddpg"), cfg.ddpg);
  if (const json* t = o.find("tasks")) {
    if (!t->is_array()) throw Error("tasks: expected a list");
    std::set<std::string> labels;
    for (const auto& tj : *t) {
      cfg.tasks.push_back(read_task(Obj(tj, "tasks[]"), base_dir));
      if (!labels.insert(cfg.tasks.back().label).second)
        throw Error("tasks: duplicate label '" + cfg.tasks.back().label + "'");
    }
  }
  if (const json* t = o.find("train")) {
    Obj to(*t, "train");
    to.string("task", cfg.train_task);
    to.integer("episodes", cfg.train_episodes);
    to.finish();
  }
  if (const json* t = o.find("transfer")) read_transfer(Obj(*t, "transfer"), cfg.transfer);
  if (const json* a = o.find("ablation")) {
    Obj ao(*a, "ablation");
    if (const json* f = ao.find("factors")) {
      if (!f->is_array() || f->empty()) throw Error("ablation.factors: expected a nonempty list");
      cfg.ablation_factors.clear();
      for (const auto& v : *f) {
        if (!v.is_number() || !(v.get<double>() > 0.0)) throw Error("ablation.factors: expected positive numbers");
        cfg.ablation_factors.push_back(v.get<double>());
      }
    }
    ao.finish();
  }
  if (const json* c = o.find("campaign")) read_campaign(Obj(*c, "campaign"), cfg.campaign);
  if (const json* t = o.find("test")) read_test(Obj(*t, "test"), cfg.test);
  o.finish();

  cfg.plant.validate();
  cfg.env.plant = cfg.plant;
  cfg.ddpg.validate();
  cfg.transfer.similarity.validate();
  if (cfg.train_episodes < 0 || cfg.transfer.episodes < 0) throw Error("config: episode budgets must be >= 0");
  for (const auto& s : cfg.transfer.sources) cfg.task(s.task);
  if (!cfg.transfer.target.empty()) cfg.task(cfg.transfer.target);
  if (!cfg.train_task.empty()) cfg.task(cfg.train_task);

  cfg.source = j;
  set_seed(cfg, cfg.seed);
  return cfg;
}

void set_seed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.source["seed"] = seed;
  json hashed = cfg.source;
  hashed.erase("output_dir");
  cfg.hash = hex64(fnv1a(hashed.dump()));
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("config '" + path + "': " + e.what());
  }
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(j, dir.empty() ? "." : dir.string());
}

}  // namespace peghole
