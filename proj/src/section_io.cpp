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

// Section definition file:
//
//   {
//     "name": "square15",
//     "segments": [
//       {"type": "line", "from": [7.5, -7.5], "to": [7.5, 7.5]},
//       {"type": "arc", "center": [0, 0], "radius": 5.0,
//        "start_angle": 0.0, "sweep": 3.14159}
//     ]
//   }
//
// Lengths in mm, angles in radians, sweep > 0 counterclockwise.

#include "peghole/geometry.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace peghole {
namespace {

using nlohmann::json;

Eigen::Vector2d read_point(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2) throw Error(std::string("section: '") + key + "' must be [x, y]");
  return {v[0].get<double>(), v[1].get<double>()};
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(std::string("section: unknown key '") + key + "' in " + where);
  }
}

}  // namespace

CrossSection section_from_json(const json& j) {
  if (!j.is_object()) throw Error("section: expected an object");
  reject_unknown(j, {"name", "segments"}, "section");
  std::vector<Segment> segs;
  for (const auto& s : j.at("segments")) {
    const auto type = s.at("type").get<std::string>();
    if (type == "line") {
      reject_unknown(s, {"type", "from", "to"}, "line segment");
      segs.emplace_back(LineSegment{read_point(s, "from"), read_point(s, "to")});
    } else if (type == "arc") {
      reject_unknown(s, {"type", "center", "radius", "start_angle", "sweep"}, "arc segment");
      segs.emplace_back(ArcSegment{read_point(s, "center"), s.at("radius").get<double>(),
                                   s.at("start_angle").get<double>(), s.at("sweep").get<double>()});
    } else {
      throw Error("section: unknown segment type '" + type + "'");
    }
  }
  return CrossSection(j.at("name").get<std::string>(), std::move(segs));
}

json section_to_json(const CrossSection& section) {
  json segs = json::array();
  for (const auto& seg : section.segments()) {
    if (const auto* l = std::get_if<LineSegment>(&seg)) {
      segs.push_back({{"type", "line"},
                      {"from", {l->from.x(), l->from.y()}},
                      {"to", {l->to.x(), l->to.y()}}});
    } else {
      const auto& a = std::get<ArcSegment>(seg);
      segs.push_back({{"type", "arc"},
                      {"center", {a.center.x(), a.center.y()}},
                      {"radius", a.radius},
                      {"start_angle", a.start_angle},
                      {"sweep", a.sweep}});
    }
  }
  return {{"name", section.name()}, {"segments", segs}};
}

CrossSection section_from_json_text(const std::string& text) {
  try {
    return section_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(std::string("section: ") + e.what());
  }
}

std::string section_to_json_text(const CrossSection& section) {
  return section_to_json(section).dump(2) + "\n";
}

CrossSection load_section(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open section file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return section_from_json_text(ss.str());
}

void save_section(const CrossSection& section, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write section file '" + path + "'");
  out << section_to_json_text(section);
}

}  // namespace peghole
