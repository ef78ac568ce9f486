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

#include "peghole/etcl.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace peghole {
namespace {

// Probe direction for pair k of n, spread over +-pi/8 around the axis.
double spread_angle(int k, int n) {
  if (n <= 1) return 0.0;
  return -kPi / 8.0 + (k + 0.5) * (kPi / 4.0) / n;
}

PoseState probe_pose(StiffnessComponent c, double amount, double phi, double depth) {
  PoseState p;
  p.l = depth;
  switch (c) {
    case StiffnessComponent::X:
    case StiffnessComponent::Z:
      p.d_x = amount * std::cos(phi);
      p.d_y = amount * std::sin(phi);
      break;
    case StiffnessComponent::Y:
      p.d_x = -amount * std::sin(phi);
      p.d_y = amount * std::cos(phi);
      break;
    case StiffnessComponent::Alpha:
      p.alpha = amount * std::cos(phi);
      p.beta = amount * std::sin(phi);
      break;
    case StiffnessComponent::Beta:
      p.alpha = -amount * std::sin(phi);
      p.beta = amount * std::cos(phi);
      break;
  }
  return p;
}

double probe_one(const ContactModel& model, StiffnessComponent c, int sign, double phi,
                 const ProbeOptions& opt) {
  const PlantParams& pp = model.params();
  const double depth = pp.hole_depth;
  const double clear = pp.clearance_mm * 1e-3;
  const double pen = opt.probe_penetration_mm * 1e-3;
  const bool angular = c == StiffnessComponent::Alpha || c == StiffnessComponent::Beta;
  // Angular probes displace the peg ends by the same c + p as lateral probes.
  const double scale = angular ? 2.0 / depth : 1.0;
  const double h = opt.step_fraction * pen * scale;

  // The probe is pushed until the deepest surface point sits exactly `pen`
  // outside the hole. For a face-on flat or a circle this is c + p; corners,
  // oblique faces and large tilts of wide pegs need a little more.
  auto depth_at = [&](double a) { return model.evaluate(probe_pose(c, sign * a, phi, depth)).max_penetration; };
  double lo = 0.0, hi = (clear + pen) * scale;
  int grow = 0;
  while (depth_at(hi) < pen) {
    lo = hi;
    hi *= 1.5;
    if (++grow > 8)
      throw Error(std::string("stiffness probe for ") + component_name(c) +
                  " finds no contact; the section cannot be probed along this direction");
  }
  for (int it = 0; it < 60 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (depth_at(mid) < pen ? lo : hi) = mid;
  }
  const PoseState center = probe_pose(c, sign * hi, phi, depth);

  PoseState plus = center, minus = center;
  int index = 0;
  double dir = 1.0;
  switch (c) {
    case StiffnessComponent::X:
      plus.d_x += h;
      minus.d_x -= h;
      index = 0;
      break;
    case StiffnessComponent::Y:
      plus.d_y += h;
      minus.d_y -= h;
      index = 1;
      break;
    case StiffnessComponent::Z: {
      // Move further outward along the probe direction.
      const double ux = sign * std::cos(phi), uy = sign * std::sin(phi);
      plus.d_x += h * ux;
      plus.d_y += h * uy;
      minus.d_x -= h * ux;
      minus.d_y -= h * uy;
      index = 2;
      dir = -1.0;
      break;
    }
    case StiffnessComponent::Alpha:
      plus.alpha += h;
      minus.alpha -= h;
      index = 3;
      break;
    case StiffnessComponent::Beta:
      plus.beta += h;
      minus.beta -= h;
      index = 4;
      break;
  }
  const double fp = model.evaluate(plus).wrench.vector()[index];
  const double fm = model.evaluate(minus).wrench.vector()[index];
  return -dir * (fp - fm) / (2.0 * h);
}

double expectation(const ContactModel& model, StiffnessComponent c, const ProbeOptions& opt) {
  const int n = std::max(1, opt.directions);
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double phi = spread_angle(k, n);
    sum += probe_one(model, c, +1, phi, opt) + probe_one(model, c, -1, phi, opt);
  }
  return sum / (2.0 * n);
}

}  // namespace

const char* component_name(StiffnessComponent c) {
  switch (c) {
    case StiffnessComponent::X: return "x";
    case StiffnessComponent::Y: return "y";
    case StiffnessComponent::Z: return "z";
    case StiffnessComponent::Alpha: return "alpha";
    case StiffnessComponent::Beta: return "beta";
  }
  return "?";
}

ShapeScales ShapeScales::relative_to(const ShapeScales& ref) const {
  ShapeScales out;
  for (int i = 0; i < 5; ++i) out[i] = (*this)[i] / ref[i];
  return out;
}

void ShapeScales::validate() const {
  for (int i = 0; i < 5; ++i)
    if (!(s[static_cast<std::size_t>(i)] > 0.0) || !std::isfinite(s[static_cast<std::size_t>(i)]))
      throw Error("shape scales must be positive and finite");
}

double probe_stiffness(const PlantParams& params, StiffnessComponent c, int sign, const ProbeOptions& opt) {
  if (sign != 1 && sign != -1) throw Error("probe sign must be +1 or -1");
  return probe_one(ContactModel(params, opt.grid), c, sign, 0.0, opt);
}

double stiffness_expectation(const PlantParams& params, StiffnessComponent c, const ProbeOptions& opt) {
  if (!(opt.probe_penetration_mm > 0.0) || !(opt.step_fraction > 0.0) || opt.step_fraction >= 1.0)
    throw Error("probe options: penetration must be positive and step fraction in (0, 1)");
  return expectation(ContactModel(params, opt.grid), c, opt);
}

ShapeScales shape_scale(const PlantParams& params, const TaskGeometry& g, const ProbeOptions& opt) {
  if (!(g.r_hat_mm > 0.0) || !(g.depth_m > 0.0)) throw Error("task geometry must be positive");
  const ContactModel model(params, opt.grid);
  const double base = params.contact_stiffness * g.r_hat_mm * 1e-3 * g.depth_m;
  const double arm = 0.5 * g.depth_m;
  ShapeScales out;
  for (auto c : kStiffnessComponents) {
    const int i = static_cast<int>(c);
    const bool angular = c == StiffnessComponent::Alpha || c == StiffnessComponent::Beta;
    out[i] = expectation(model, c, opt) / (angular ? base * arm * arm : base);
  }
  out.validate();
  return out;
}

ShapeScales shape_scale(const PlantParams& params, const ProbeOptions& opt) {
  return shape_scale(params, TaskGeometry::of(params.section, params.hole_depth), opt);
}

ComplianceGains reconfigure(const ComplianceGains& k_src, const TaskGeometry& g_src,
                            const ShapeScales& s_src, const TaskGeometry& g_tgt,
                            const ShapeScales& s_tgt) {
  s_src.validate();
  s_tgt.validate();
  const double ratio = (g_src.r_hat_mm * g_src.depth_m) / (g_tgt.r_hat_mm * g_tgt.depth_m);
  Vector6d k = k_src.vector();
  for (int i = 0; i < 5; ++i) k[i] = k[i] * ratio * (s_src[i] / s_tgt[i]);
  return ComplianceGains::from_vector(k);
}

std::array<double, 5> etcl_product(const ComplianceGains& k, const TaskGeometry& g, const ShapeScales& s) {
  const Vector6d kv = k.vector();
  std::array<double, 5> out{};
  for (int i = 0; i < 5; ++i)
    out[static_cast<std::size_t>(i)] = g.r_hat_mm * g.depth_m * s[i] * kv[i];
  return out;
}

ComplianceGains tune_reference(const PlantParams& params, double kappa, double k_gamma,
                               const ProbeOptions& opt) {
  if (!(kappa > 0.0) || !(k_gamma > 0.0)) throw Error("tune_reference: kappa and K_gamma must be positive");
  const ContactModel model(params, opt.grid);
  Vector6d k;
  for (auto c : kStiffnessComponents) k[static_cast<int>(c)] = kappa / expectation(model, c, opt);
  k[5] = k_gamma;
  return ComplianceGains::from_vector(k);
}

ReconfigReport reconfigure_table(const std::vector<ReconfigTask>& tasks) {
  const auto ref_count = std::count_if(tasks.begin(), tasks.end(), [](const auto& t) { return t.reference; });
  if (ref_count != 1) throw Error("reconfiguration needs exactly one reference task, got " + std::to_string(ref_count));
  const auto& ref = *std::find_if(tasks.begin(), tasks.end(), [](const auto& t) { return t.reference; });
  ref.tuned_gains.validate();

  ReconfigReport report;
  for (const auto& t : tasks) {
    ReconfigRow row;
    row.label = t.label;
    row.geometry = t.geometry;
    row.relative_scales = t.relative_scales;
    row.method = t.reference ? "Tuned" : "Reconfigured";
    row.gains = t.reference ? t.tuned_gains
                            : reconfigure(ref.tuned_gains, ref.geometry, ref.relative_scales, t.geometry,
                                          t.relative_scales);
    row.product = etcl_product(row.gains, t.geometry, t.relative_scales);
    row.printed_gains = t.printed_gains;
    if (t.printed_gains) {
      const Vector6d a = row.gains.vector(), b = t.printed_gains->vector();
      for (int i = 0; i < 6; ++i) row.max_rel_error = std::max(row.max_rel_error, std::abs(a[i] / b[i] - 1.0));
    }
    report.rows.push_back(row);
  }
  for (std::size_t i = 0; i < 5; ++i) {
    double lo = report.rows.front().product[i], hi = lo, sum = 0.0;
    for (const auto& r : report.rows) {
      lo = std::min(lo, r.product[i]);
      hi = std::max(hi, r.product[i]);
      sum += r.product[i];
    }
    report.product_spread[i] = (hi - lo) / (sum / static_cast<double>(report.rows.size()));
  }
  return report;
}

std::string report_csv(const ReconfigReport& report) {
  std::ostringstream os;
  os.precision(6);
  os << "label,R_hat_mm,L_m,s_x,s_y,s_z,s_alpha,s_beta,method,K_x,K_y,K_z,K_alpha,K_beta,K_gamma,"
        "P_x,P_y,P_z,P_alpha,P_beta\n";
  for (const auto& r : report.rows) {
    os << r.label << ',' << r.geometry.r_hat_mm << ',' << r.geometry.depth_m;
    for (int i = 0; i < 5; ++i) os << ',' << r.relative_scales[i];
    os << ',' << r.method;
    const Vector6d k = r.gains.vector();
    for (int i = 0; i < 6; ++i) os << ',' << k[i];
    for (double p : r.product) os << ',' << p;
    os << '\n';
  }
  return os.str();
}

}  // namespace peghole
