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
 * @file geometry.hpp
 * @brief Planar cross-section kernel for columnar pegs.
 *
 * A CrossSection is a closed, simple, counterclockwise chain of straight
 * edges and circular arcs. Lengths are in millimeters unless a caller
 * rescales the section (the plant works in meters).
 *
 * Polar quantities (BoundaryPoint, discretize) are measured from the area
 * centroid and require the section to be star-shaped about it.
 */

#pragma once

#include "peghole/types.hpp"

#include <string>
#include <variant>
#include <vector>

namespace peghole {

struct LineSegment {
  Eigen::Vector2d from;
  Eigen::Vector2d to;
};

/// Circular arc; positive sweep runs counterclockwise around `center`.
struct ArcSegment {
  Eigen::Vector2d center;
  double radius = 0.0;
  double start_angle = 0.0;
  double sweep = 0.0;

  Eigen::Vector2d point_at(double angle) const {
    return center + radius * Eigen::Vector2d(std::cos(angle), std::sin(angle));
  }
};

using Segment = std::variant<LineSegment, ArcSegment>;

Eigen::Vector2d segment_start(const Segment& seg);
Eigen::Vector2d segment_end(const Segment& seg);

/// Ray sample of the boundary seen from the centroid.
struct BoundaryPoint {
  double theta = 0.0;         // polar angle at the centroid (rad)
  double radius = 0.0;        // centroid-to-boundary distance
  double normal_angle = 0.0;  // direction of the outward normal (rad)
};

struct QuadratureNode {
  BoundaryPoint point;
  double weight = 0.0;  // angular measure (rad)
  std::size_t segment = 0;
};

class CrossSection {
 public:
  /// Validates closure, orientation and simplicity; throws Error otherwise.
  CrossSection(std::string name, std::vector<Segment> segments);

  const std::string& name() const { return name_; }
  const std::vector<Segment>& segments() const { return segments_; }
  double area() const { return area_; }
  const Eigen::Vector2d& centroid() const { return centroid_; }
  bool star_shaped() const { return star_shaped_; }

  /// Polar angle (about the centroid) where segment k begins, and its
  /// angular extent. Only meaningful for star-shaped sections.
  double polar_start(std::size_t k) const { return polar_start_[k]; }
  double polar_sweep(std::size_t k) const { return polar_sweep_[k]; }

  /// Index of the segment owning polar angle theta on the half-open span
  /// [start, start + sweep). Throws for non-star sections.
  std::size_t segment_at(double theta) const;

 private:
  void require_star(const char* op) const;

  std::string name_;
  std::vector<Segment> segments_;
  double area_ = 0.0;
  Eigen::Vector2d centroid_ = Eigen::Vector2d::Zero();
  bool star_shaped_ = false;
  std::string star_diagnostic_;
  std::vector<double> polar_start_;
  std::vector<double> polar_sweep_;
  std::vector<double> cumulative_;  // offsets of each span from polar_start_[0]

  friend BoundaryPoint boundary_sample(const CrossSection&, double);
  friend std::vector<QuadratureNode> discretize(const CrossSection&, int);
};

Eigen::Vector2d centroid(const CrossSection& section);

/// R(theta) and the outward normal direction where the centroid ray at
/// `theta` leaves the section. At a vertex the edge that begins there wins.
BoundaryPoint boundary_sample(const CrossSection& section, double theta);
/// Same, when the caller already knows which segment the ray leaves through.
BoundaryPoint boundary_sample(const CrossSection& section, std::size_t segment, double theta);

/// Largest centroid-to-boundary distance (exact for lines and arcs).
double max_radius(const CrossSection& section);

/// Quadrature over the polar angle. Every segment receives
/// max(1, round(n_theta * sweep / 2pi)) midpoint nodes, so no node sits on a
/// vertex and each node carries the normal of its own edge. Weights sum to 2pi.
std::vector<QuadratureNode> discretize(const CrossSection& section, int n_theta);

/// Unsigned distance from q to the boundary.
double distance_to_boundary(const CrossSection& section, const Eigen::Vector2d& q);

/// Distance to the boundary, positive outside the section. Star-shaped only.
double signed_distance(const CrossSection& section, const Eigen::Vector2d& q);

/// signed_distance with the segments unpacked once. The sign comes from the
/// nearest feature: the side of an edge, or the bisecting normal at a vertex.
class DistanceField {
 public:
  struct Sample {
    double distance = 0.0;     // signed
    int feature = 0;           // 2k: interior of segment k; 2k + 1: vertex where segment k starts
    Eigen::Vector2d closest;   // nearest boundary point
    Eigen::Vector2d gradient;  // of the signed distance
  };

  explicit DistanceField(const CrossSection& section);
  /// The distance is smooth while the nearest feature stays the same.
  Sample query(const Eigen::Vector2d& q) const;
  double operator()(const Eigen::Vector2d& q) const { return query(q).distance; }

 private:
  struct Feature {
    bool arc = false;
    Eigen::Vector2d from, dir;  // line: start and to - from
    double len2 = 0.0;
    Eigen::Vector2d normal;     // line: unit outward normal
    Eigen::Vector2d center;     // arc
    double radius = 0.0, start = 0.0, sweep = 0.0;
    Eigen::Vector2d end;
  };
  std::vector<Feature> features_;
  std::vector<Eigen::Vector2d> vertex_normal_;  // at the start of each feature
};

CrossSection translated(const CrossSection& section, const Eigen::Vector2d& offset);
CrossSection scaled(const CrossSection& section, double factor);
/// Translates so that the centroid sits at the origin.
CrossSection centered(const CrossSection& section);

CrossSection make_circle(const std::string& name, double radius);
CrossSection make_rectangle(const std::string& name, double width, double height);
CrossSection make_polygon(const std::string& name, const std::vector<Eigen::Vector2d>& vertices);
/// Regular n-gon with one vertex at angle `phase`.
CrossSection make_regular_polygon(const std::string& name, int sides, double circumradius,
                                  double phase = 0.0);
/// Rectangle of size (length x 2*radius) capped on the +x end by a half disk.
CrossSection make_bullet(const std::string& name, double length, double radius);

// Section definition files (JSON). write(read(x)) reproduces x exactly.
CrossSection section_from_json_text(const std::string& text);
std::string section_to_json_text(const CrossSection& section);
CrossSection load_section(const std::string& path);
void save_section(const CrossSection& section, const std::string& path);

}  // namespace peghole
