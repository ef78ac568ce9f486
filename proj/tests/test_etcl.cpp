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

#include <doctest.h>

using namespace peghole;

namespace {

PlantParams plant_of(CrossSection s, double depth) {
  PlantParams p{std::move(s)};
  p.hole_depth = depth;
  return p;
}

ReconfigTask row(const std::string& label, double r, double l_mm, std::array<double, 5> s, bool ref = false) {
  ReconfigTask t;
  t.label = label;
  t.geometry = {r, l_mm * 1e-3};
  t.relative_scales.s = s;
  t.reference = ref;
  return t;
}

}  // namespace

TEST_CASE("lateral cylinder stiffness matches the linearized wall integral") {
  const double r = 7.5e-3, c = 0.1e-3, p = 0.05e-3, l = 0.03, e = 1e9;
  ProbeOptions opt;
  opt.grid = Grid{2048, 2};
  const double k = stiffness_expectation(plant_of(make_circle("c", 7.5), l), StiffnessComponent::X, opt);
  const double th0 = std::acos(c / (c + p));
  const double expect = e * r * l * (th0 + std::sin(th0) * std::cos(th0));
  CHECK(k == doctest::Approx(expect).epsilon(0.02));
  // x and y agree for a circle
  const double ky = stiffness_expectation(plant_of(make_circle("c", 7.5), l), StiffnessComponent::Y, opt);
  CHECK(ky == doctest::Approx(k).epsilon(1e-6));
}

TEST_CASE("shape scales do not depend on size or depth") {
  for (const auto& sec : {make_circle("c", 7.5), make_rectangle("s", 15, 15), make_regular_polygon("p", 5, 7.14, kPi / 2)}) {
    const auto a = shape_scale(plant_of(sec, 0.02));
    const auto b = shape_scale(plant_of(scaled(sec, 2.0), 0.03));
    for (int i = 0; i < 5; ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(0.02));
  }
}

TEST_CASE("reconfigure carries the gain product") {
  const ComplianceGains k{3.39e-5, 3.39e-5, 2.16e-7, 3.33e-2, 3.33e-2, 5.55e-2};
  const TaskGeometry src{10.61, 0.03}, tgt{7.5, 0.03};
  ShapeScales ss, st;
  ss.s = {1, 1, 1, 1, 1};
  st.s = {1.12, 1.12, 1.41, 1.12, 1.12};
  const auto out = reconfigure(k, src, ss, tgt, st);
  // worked example: 3.39e-5 * 10.61 / (7.5 * 1.12)
  CHECK(out.x == doctest::Approx(4.29e-5).epsilon(1e-2));
  CHECK(out.x == doctest::Approx(3.39e-5 * 10.61 / (7.5 * 1.12)).epsilon(1e-14));
  CHECK(out.gamma == k.gamma);
  const auto pa = etcl_product(k, src, ss), pb = etcl_product(out, tgt, st);
  for (std::size_t i = 0; i < 5; ++i) CHECK(pb[i] == doctest::Approx(pa[i]).epsilon(1e-13));
}

TEST_CASE("tune_reference is kappa over stiffness") {
  const auto params = plant_of(make_rectangle("s", 10, 10), 0.02);
  const auto k = tune_reference(params, 2.0, 5.55e-2);
  CHECK(k.x == doctest::Approx(2.0 / stiffness_expectation(params, StiffnessComponent::X)).epsilon(1e-12));
  CHECK(k.beta == doctest::Approx(2.0 / stiffness_expectation(params, StiffnessComponent::Beta)).epsilon(1e-12));
  CHECK(k.gamma == 5.55e-2);
}

TEST_CASE("probe signs agree for symmetric sections") {
  const auto params = plant_of(make_rectangle("s", 15, 15), 0.03);
  for (auto c : kStiffnessComponents) {
    const double a = probe_stiffness(params, c, +1), b = probe_stiffness(params, c, -1);
    CHECK(a > 0.0);
    CHECK(b == doctest::Approx(a).epsilon(1e-6));
  }
  CHECK_THROWS_AS(probe_stiffness(params, StiffnessComponent::X, 0), Error);
}

TEST_CASE("reconfigure_table needs exactly one reference") {
  std::vector<ReconfigTask> t{row("a", 7.5, 30, {1, 1, 1, 1, 1}), row("b", 5, 20, {1, 1, 1, 1, 1})};
  CHECK_THROWS_AS(reconfigure_table(t), Error);
  t[0].reference = true;
  t[0].tuned_gains = {1e-5, 1e-5, 1e-7, 1e-2, 1e-2, 5e-2};
  const auto rep = reconfigure_table(t);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].method == "Tuned");
  CHECK(rep.rows[1].method == "Reconfigured");
  CHECK(rep.rows[1].gains.x == doctest::Approx(1e-5 * 7.5 * 30 / (5.0 * 20)).epsilon(1e-13));
  for (double s : rep.product_spread) CHECK(s < 1e-12);
  t[1].reference = true;
  CHECK_THROWS_AS(reconfigure_table(t), Error);
  CHECK(report_csv(rep).find("label,") == 0);
}
