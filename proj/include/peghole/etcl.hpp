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
 * @file etcl.hpp
 * @brief Compliance gain reconfiguration across peg geometries.
 *
 * Gains that keep the insertion critically stable scale inversely with the
 * contact stiffness, and the stiffness factors as E * R_hat * L * s_i where
 * s_i depends on the section shape only. Hence R_hat * L * s_i * K_i is
 * preserved between tasks and a tuned gain set can be carried to a new peg.
 *
 * Stiffness probes (all at full insertion l = L, probe lateral offset
 * c + p where c is the clearance and p the probe penetration):
 *   x, y        -dF_x/dd_x, -dF_y/dd_y at d = +-(c + p)
 *   z           |dF_z/dd_x| at d_x = +-(c + p): friction load per unit
 *               lateral penetration, which grows with R and L like the
 *               lateral stiffness does
 *   alpha, beta -dM_x/dalpha, -dM_y/dbeta at tilt +-2(c + p)/L, i.e. the
 *               peg ends displaced by c + p
 * Each is a central difference with step 10% of p, averaged over the two
 * probe signs. Angular scales use E * R_hat * L * (L/2)^2 as denominator
 * so that they are dimensionless and free of L.
 */

#pragma once

#include "peghole/controller.hpp"
#include "peghole/plant.hpp"

#include <array>
#include <string>
#include <vector>

namespace peghole {

enum class StiffnessComponent { X = 0, Y = 1, Z = 2, Alpha = 3, Beta = 4 };

inline constexpr std::array<StiffnessComponent, 5> kStiffnessComponents = {
    StiffnessComponent::X, StiffnessComponent::Y, StiffnessComponent::Z, StiffnessComponent::Alpha,
    StiffnessComponent::Beta};

const char* component_name(StiffnessComponent c);

struct ProbeOptions {
  double probe_penetration_mm = 0.05;
  double step_fraction = 0.1;
  /// 1 probes along the component axis only. n > 1 adds probe directions
  /// spread over +-22.5 degrees around the axis (asymmetric sections).
  int directions = 1;
  Grid grid{};
};

/// Five dimensionless scales, x, y, z, alpha, beta.
struct ShapeScales {
  std::array<double, 5> s{};

  double operator[](int i) const { return s[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return s[static_cast<std::size_t>(i)]; }
  ShapeScales relative_to(const ShapeScales& ref) const;
  void validate() const;
};

struct TaskGeometry {
  double r_hat_mm = 0.0;
  double depth_m = 0.0;

  static TaskGeometry of(const CrossSection& section, double depth_m) {
    return {max_radius(section), depth_m};
  }
};

/// Averaged restoring stiffness at l = L: N/m for x, y, z and N m/rad for
/// the angles. `params.hole_depth` is L. Throws when a probe has no contact.
double stiffness_expectation(const PlantParams& params, StiffnessComponent c,
                             const ProbeOptions& opt = {});

/// Restoring derivative at a single probe sign (+1 or -1).
double probe_stiffness(const PlantParams& params, StiffnessComponent c, int sign,
                       const ProbeOptions& opt = {});

ShapeScales shape_scale(const PlantParams& params, const TaskGeometry& geometry,
                        const ProbeOptions& opt = {});
ShapeScales shape_scale(const PlantParams& params, const ProbeOptions& opt = {});

/// K_tgt,i = K_src,i (R_src L_src s_src,i) / (R_tgt L_tgt s_tgt,i); K_gamma is copied.
ComplianceGains reconfigure(const ComplianceGains& k_src, const TaskGeometry& g_src,
                            const ShapeScales& s_src, const TaskGeometry& g_tgt,
                            const ShapeScales& s_tgt);

/// R_hat * L * s_i * K_i for the five reconfigurable components.
std::array<double, 5> etcl_product(const ComplianceGains& k, const TaskGeometry& g, const ShapeScales& s);

/// Gains kappa / stiffness_i for the five components and the given K_gamma.
ComplianceGains tune_reference(const PlantParams& params, double kappa, double k_gamma,
                               const ProbeOptions& opt = {});

// Table-style report ------------------------------------------------------

struct ReconfigTask {
  std::string label;
  TaskGeometry geometry;
  ShapeScales relative_scales;  // s_i / s_ref,i
  bool reference = false;
  ComplianceGains tuned_gains;  // used for the reference row only
  std::optional<ComplianceGains> printed_gains;
};

struct ReconfigRow {
  std::string label;
  TaskGeometry geometry;
  ShapeScales relative_scales;
  std::string method;  // "Tuned" or "Reconfigured"
  ComplianceGains gains;
  std::array<double, 5> product{};
  std::optional<ComplianceGains> printed_gains;
  double max_rel_error = 0.0;  // vs printed gains, 0 when none given
};

struct ReconfigReport {
  std::vector<ReconfigRow> rows;
  /// Largest relative spread (max - min) / mean of the product per component.
  std::array<double, 5> product_spread{};
};

/// Exactly one task must be marked reference.
ReconfigReport reconfigure_table(const std::vector<ReconfigTask>& tasks);

/// CSV: label,R_hat_mm,L_m,s_x..s_beta,method,K_x..K_gamma,P_x..P_beta
std::string report_csv(const ReconfigReport& report);

}  // namespace peghole
