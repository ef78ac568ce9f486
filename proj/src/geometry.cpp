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

#include "peghole/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace peghole {
namespace {

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Wraps into [0, 2pi).
double wrap_positive(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}

// How far (radians) the direction `angle` lies outside the arc's span; 0 when inside.
double arc_excess(const ArcSegment& arc, double angle) {
  const double rel = arc.sweep >= 0.0 ? wrap_positive(angle - arc.start_angle)
                                      : wrap_positive(arc.start_angle - angle);
  const double span = std::abs(arc.sweep);
  if (rel <= span) return 0.0;
  return std::min(rel - span, kTwoPi - rel);
}

double point_segment_distance(const Segment& seg, const Eigen::Vector2d& q) {
  return std::visit(
      overloaded{
          [&](const LineSegment& l) {
            const Eigen::Vector2d d = l.to - l.from;
            const double len2 = d.squaredNorm();
            double t = len2 > 0.0 ? (q - l.from).dot(d) / len2 : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            return (l.from + t * d - q).norm();
          },
          [&](const ArcSegment& a) {
            const Eigen::Vector2d rel = q - a.center;
            const double rho = rel.norm();
            if (rho == 0.0) return a.radius;
            if (arc_excess(a, std::atan2(rel.y(), rel.x())) == 0.0) return std::abs(rho - a.radius);
            const double d0 = (a.point_at(a.start_angle) - q).norm();
            const double d1 = (a.point_at(a.start_angle + a.sweep) - q).norm();
            return std::min(d0, d1);
          }},
      seg);
}

struct RayHit {
  double t = 0.0;
  double normal_angle = 0.0;
};

double line_normal_angle(const LineSegment& l) {
  const Eigen::Vector2d d = l.to - l.from;
  return std::atan2(-d.x(), d.y());
}

double arc_normal_angle(const ArcSegment& a, const Eigen::Vector2d& p) {
  const Eigen::Vector2d rel = p - a.center;
  const double radial = std::atan2(rel.y(), rel.x());
  return a.sweep > 0.0 ? radial : radial + kPi;
}

// All forward intersections of the ray origin + t*dir (t > tiny) with one segment.
std::vector<RayHit> ray_hits(const Segment& seg, const Eigen::Vector2d& origin,
                             const Eigen::Vector2d& dir, double scale) {
  std::vector<RayHit> hits;
  const double tiny = 1e-12 * scale;
  std::visit(overloaded{[&](const LineSegment& l) {
                          const Eigen::Vector2d d = l.to - l.from;
                          const double denom = cross2(dir, d);
                          if (std::abs(denom) < 1e-15 * d.norm()) return;
                          const Eigen::Vector2d w = l.from - origin;
                          const double t = cross2(w, d) / denom;
                          const double v = cross2(w, dir) / denom;
                          if (t > tiny && v >= -1e-12 && v <= 1.0 + 1e-12)
                            hits.push_back({t, line_normal_angle(l)});
                        },
                        [&](const ArcSegment& a) {
                          const Eigen::Vector2d oc = origin - a.center;
                          const double b = dir.dot(oc);
                          const double c = oc.squaredNorm() - a.radius * a.radius;
                          const double disc = b * b - c;
                          if (disc < 0.0) return;
                          const double sq = std::sqrt(disc);
                          for (double t : {-b - sq, -b + sq}) {
                            if (t <= tiny) continue;
                            const Eigen::Vector2d p = origin + t * dir;
                            const Eigen::Vector2d rel = p - a.center;
                            if (arc_excess(a, std::atan2(rel.y(), rel.x())) > 1e-12) continue;
                            hits.push_back({t, arc_normal_angle(a, p)});
                          }
                        }},
             seg);
  return hits;
}

// Intersection of a ray with a segment already known to own its direction.
RayHit owned_ray_hit(const Segment& seg, const Eigen::Vector2d& origin,
                     const Eigen::Vector2d& dir) {
  return std::visit(
      overloaded{[&](const LineSegment& l) {
                   const Eigen::Vector2d d = l.to - l.from;
                   const Eigen::Vector2d w = l.from - origin;
                   const double t = cross2(w, d) / cross2(dir, d);
                   return RayHit{t, line_normal_angle(l)};
                 },
                 [&](const ArcSegment& a) {
                   const Eigen::Vector2d oc = origin - a.center;
                   const double b = dir.dot(oc);
                   const double c = oc.squaredNorm() - a.radius * a.radius;
                   const double sq = std::sqrt(std::max(0.0, b * b - c));
                   RayHit best{0.0, 0.0};
                   double best_excess = std::numeric_limits<double>::infinity();
                   for (double t : {-b + sq, -b - sq}) {
                     if (t <= 0.0) continue;
                     const Eigen::Vector2d p = origin + t * dir;
                     const Eigen::Vector2d rel = p - a.center;
                     const double ex = arc_excess(a, std::atan2(rel.y(), rel.x()));
                     if (ex < best_excess) {
                       best_excess = ex;
                       best = {t, arc_normal_angle(a, p)};
                     }
                   }
                   return best;
                 }},
      seg);
}

// Polyline approximation used for the simplicity scan and polar sweeps.
std::vector<Eigen::Vector2d> polyline(const Segment& seg, int arc_pieces_per_quarter) {
  return std::visit(overloaded{[](const LineSegment& l) {
                                 return std::vector<Eigen::Vector2d>{l.from, l.to};
                               },
                               [&](const ArcSegment& a) {
                                 const int n = std::max(
                                     4, static_cast<int>(std::ceil(std::abs(a.sweep) /
                                                                   (kPi / 2.0) *
                                                                   arc_pieces_per_quarter)));
                                 std::vector<Eigen::Vector2d> pts;
                                 pts.reserve(n + 1);
                                 for (int i = 0; i <= n; ++i)
                                   pts.push_back(a.point_at(a.start_angle + a.sweep * i / n));
                                 return pts;
                               }},
                    seg);
}

bool on_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& q, const Eigen::Vector2d& r) {
  return q.x() <= std::max(p.x(), r.x()) && q.x() >= std::min(p.x(), r.x()) &&
         q.y() <= std::max(p.y(), r.y()) && q.y() >= std::min(p.y(), r.y());
}

int orientation(const Eigen::Vector2d& p, const Eigen::Vector2d& q, const Eigen::Vector2d& r,
                double eps) {
  const double v = cross2(q - p, r - q);
  if (std::abs(v) <= eps) return 0;
  return v > 0.0 ? 1 : 2;
}

bool pieces_intersect(const Eigen::Vector2d& p1, const Eigen::Vector2d& q1,
                      const Eigen::Vector2d& p2, const Eigen::Vector2d& q2, double eps) {
  const int o1 = orientation(p1, q1, p2, eps);
  const int o2 = orientation(p1, q1, q2, eps);
  const int o3 = orientation(p2, q2, p1, eps);
  const int o4 = orientation(p2, q2, q1, eps);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, q2, q1)) return true;
  if (o3 == 0 && on_segment(p2, p1, q2)) return true;
  if (o4 == 0 && on_segment(p2, q1, q2)) return true;
  return false;
}

// Contributions of one segment to the Green's-theorem integrals
// (int x dy, int x^2 dy, int y^2 dx).
Eigen::Vector3d green_terms(const Segment& seg) {
  return std::visit(
      overloaded{[](const LineSegment& l) {
                   const double x0 = l.from.x(), y0 = l.from.y(), x1 = l.to.x(), y1 = l.to.y();
                   return Eigen::Vector3d((y1 - y0) * (x0 + x1) / 2.0,
                                          (y1 - y0) * (x0 * x0 + x0 * x1 + x1 * x1) / 3.0,
                                          (x1 - x0) * (y0 * y0 + y0 * y1 + y1 * y1) / 3.0);
                 },
                 [](const ArcSegment& a) {
                   const double cx = a.center.x(), cy = a.center.y(), r = a.radius;
                   const double t0 = a.start_angle, t1 = a.start_angle + a.sweep;
                   auto cos_sq = [](double t) { return t / 2.0 + std::sin(2.0 * t) / 4.0; };
                   auto sin_sq = [](double t) { return t / 2.0 - std::sin(2.0 * t) / 4.0; };
                   auto cos_cube = [](double t) {
                     const double s = std::sin(t);
                     return s - s * s * s / 3.0;
                   };
                   auto sin_cube = [](double t) {
                     const double c = std::cos(t);
                     return -c + c * c * c / 3.0;
                   };
                   const double dsin = std::sin(t1) - std::sin(t0);
                   const double dcos = std::cos(t1) - std::cos(t0);
                   const double x_dy = cx * r * dsin + r * r * (cos_sq(t1) - cos_sq(t0));
                   const double x2_dy = cx * cx * r * dsin +
                                        2.0 * cx * r * r * (cos_sq(t1) - cos_sq(t0)) +
                                        r * r * r * (cos_cube(t1) - cos_cube(t0));
                   const double y2_dx = -(cy * cy * r * (-dcos) +
                                          2.0 * cy * r * r * (sin_sq(t1) - sin_sq(t0)) +
                                          r * r * r * (sin_cube(t1) - sin_cube(t0)));
                   return Eigen::Vector3d(x_dy, x2_dy, y2_dx);
                 }},
      seg);
}

double section_scale(const std::vector<Segment>& segments) {
  double s = 0.0;
  for (const auto& seg : segments) {
    s = std::max(s, segment_start(seg).cwiseAbs().maxCoeff());
    if (const auto* a = std::get_if<ArcSegment>(&seg))
      s = std::max(s, a->center.cwiseAbs().maxCoeff() + a->radius);
  }
  return std::max(s, 1e-300);
}

}  // namespace

Eigen::Vector2d segment_start(const Segment& seg) {
  return std::visit(overloaded{[](const LineSegment& l) { return l.from; },
                               [](const ArcSegment& a) { return a.point_at(a.start_angle); }},
                    seg);
}

Eigen::Vector2d segment_end(const Segment& seg) {
  return std::visit(
      overloaded{[](const LineSegment& l) { return l.to; },
                 [](const ArcSegment& a) { return a.point_at(a.start_angle + a.sweep); }},
      seg);
}

CrossSection::CrossSection(std::string name, std::vector<Segment> segments)
    : name_(std::move(name)), segments_(std::move(segments)) {
  if (segments_.empty()) throw Error("section '" + name_ + "': no segments");
  const double scale = section_scale(segments_);
  const double tol = 1e-9 * scale;

  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const auto& seg = segments_[k];
    if (const auto* l = std::get_if<LineSegment>(&seg)) {
      if ((l->to - l->from).norm() <= tol)
        throw Error("section '" + name_ + "': zero-length edge " + std::to_string(k));
    } else {
      const auto& a = std::get<ArcSegment>(seg);
      if (!(a.radius > 0.0) || a.sweep == 0.0 || std::abs(a.sweep) > kTwoPi + 1e-12)
        throw Error("section '" + name_ + "': invalid arc " + std::to_string(k));
    }
    const auto& next = segments_[(k + 1) % segments_.size()];
    if ((segment_end(seg) - segment_start(next)).norm() > tol)
      throw Error("section '" + name_ + "': boundary not closed after segment " +
                  std::to_string(k));
  }

  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  for (const auto& seg : segments_) g += green_terms(seg);
  area_ = g[0];
  if (std::abs(area_) <= 1e-12 * scale * scale)
    throw Error("section '" + name_ + "': degenerate (zero-area) boundary");
  if (area_ < 0.0) throw Error("section '" + name_ + "': boundary must be counterclockwise");
  centroid_ = Eigen::Vector2d(g[1] / (2.0 * area_), -g[2] / (2.0 * area_));

  // Simplicity: no two non-adjacent polyline pieces may touch.
  std::vector<Eigen::Vector2d> ring;
  for (const auto& seg : segments_) {
    auto pts = polyline(seg, 8);
    ring.insert(ring.end(), pts.begin(), pts.end() - 1);
  }
  const std::size_t n = ring.size();
  if (n >= 4) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;
        if (pieces_intersect(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n],
                             1e-12 * scale * scale))
          throw Error("section '" + name_ + "': boundary self-intersects");
      }
    }
  }

  // Star-shapedness about the centroid: polar angle strictly increasing along
  // the boundary, one full turn in total.
  star_shaped_ = true;
  polar_start_.resize(segments_.size());
  polar_sweep_.resize(segments_.size());
  cumulative_.assign(1, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < segments_.size() && star_shaped_; ++k) {
    const auto pts = polyline(segments_[k], 16);
    const Eigen::Vector2d s0 = pts.front() - centroid_;
    polar_start_[k] = std::atan2(s0.y(), s0.x());
    double sweep = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const Eigen::Vector2d a = pts[i] - centroid_;
      const Eigen::Vector2d b = pts[i + 1] - centroid_;
      if (a.norm() <= tol || b.norm() <= tol) {
        star_shaped_ = false;
        star_diagnostic_ = "boundary passes through the centroid";
        break;
      }
      const double inc = std::atan2(cross2(a, b), a.dot(b));
      if (!(inc > 0.0)) {
        star_shaped_ = false;
        std::ostringstream os;
        os << "polar angle about the centroid decreases along segment " << k;
        star_diagnostic_ = os.str();
        break;
      }
      sweep += inc;
    }
    if (const auto* a = std::get_if<ArcSegment>(&segments_[k]);
        a && star_shaped_ && (a->center - centroid_).norm() <= tol) {
      sweep = std::abs(a->sweep);  // exact for arcs about the centroid
    }
    polar_sweep_[k] = sweep;
    total += sweep;
    cumulative_.push_back(total);
  }
  if (star_shaped_ && std::abs(total - kTwoPi) > 1e-6) {
    star_shaped_ = false;
    star_diagnostic_ = "boundary winds " + std::to_string(total / kTwoPi) + " times about the centroid";
  }
}

void CrossSection::require_star(const char* op) const {
  if (!star_shaped_)
    throw Error(std::string(op) + ": section '" + name_ +
                "' is not star-shaped about its centroid (" + star_diagnostic_ + ")");
}

std::size_t CrossSection::segment_at(double theta) const {
  require_star("segment_at");
  const double rel = wrap_positive(theta - polar_start_[0]);
  const std::size_t n = segments_.size();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.begin() + n, rel);
  std::size_t k = static_cast<std::size_t>(std::distance(cumulative_.begin(), it)) - 1;
  k = std::min(k, n - 1);
  // Snap onto the segment that begins at a vertex.
  if (k + 1 < n && std::abs(rel - cumulative_[k + 1]) < 1e-12) ++k;
  if (std::abs(rel - cumulative_[n]) < 1e-12) k = 0;
  return k;
}

Eigen::Vector2d centroid(const CrossSection& section) { return section.centroid(); }

BoundaryPoint boundary_sample(const CrossSection& section, double theta) {
  const Eigen::Vector2d dir(std::cos(theta), std::sin(theta));
  if (!section.star_shaped()) {
    const double scale = section_scale(section.segments());
    std::vector<double> ts;
    for (const auto& seg : section.segments())
      for (const auto& h : ray_hits(seg, section.centroid(), dir, scale)) {
        bool dup = false;
        for (double t : ts) dup = dup || std::abs(t - h.t) < 1e-9 * scale;
        if (!dup) ts.push_back(h.t);
      }
    std::ostringstream os;
    os << "boundary_sample: section '" << section.name()
       << "' is not star-shaped about its centroid (ray at theta=" << theta << " hits the boundary "
       << ts.size() << " times; " << section.star_diagnostic_ << ")";
    throw Error(os.str());
  }
  const std::size_t k = section.segment_at(theta);
  const RayHit hit = owned_ray_hit(section.segments()[k], section.centroid(), dir);
  return {theta, hit.t, theta + wrap_angle(hit.normal_angle - theta)};
}

BoundaryPoint boundary_sample(const CrossSection& section, std::size_t segment, double theta) {
  if (segment >= section.segments().size()) throw Error("boundary_sample: segment index out of range");
  const Eigen::Vector2d dir(std::cos(theta), std::sin(theta));
  const RayHit hit = owned_ray_hit(section.segments()[segment], section.centroid(), dir);
  return {theta, hit.t, theta + wrap_angle(hit.normal_angle - theta)};
}

double max_radius(const CrossSection& section) {
  const Eigen::Vector2d& g = section.centroid();
  double best = 0.0;
  for (const auto& seg : section.segments()) {
    best = std::max(best, (segment_start(seg) - g).norm());
    if (const auto* a = std::get_if<ArcSegment>(&seg)) {
      const Eigen::Vector2d away = a->center - g;
      const double dist = away.norm();
      if (dist == 0.0) {
        best = std::max(best, a->radius);
      } else if (arc_excess(*a, std::atan2(away.y(), away.x())) == 0.0) {
        best = std::max(best, dist + a->radius);
      }
    }
  }
  return best;
}

std::vector<QuadratureNode> discretize(const CrossSection& section, int n_theta) {
  section.require_star("discretize");
  if (n_theta < 1) throw Error("discretize: n_theta must be positive");
  std::vector<QuadratureNode> nodes;
  nodes.reserve(static_cast<std::size_t>(n_theta) + section.segments().size());
  for (std::size_t k = 0; k < section.segments().size(); ++k) {
    const double sweep = section.polar_sweep(k);
    const long count = std::max(1L, std::lround(n_theta * sweep / kTwoPi));
    const double h = sweep / static_cast<double>(count);
    for (long m = 0; m < count; ++m) {
      const double theta = section.polar_start(k) + (static_cast<double>(m) + 0.5) * h;
      const Eigen::Vector2d dir(std::cos(theta), std::sin(theta));
      const RayHit hit = owned_ray_hit(section.segments()[k], section.centroid(), dir);
      nodes.push_back({{theta, hit.t, theta + wrap_angle(hit.normal_angle - theta)}, h, k});
    }
  }
  return nodes;
}

double distance_to_boundary(const CrossSection& section, const Eigen::Vector2d& q) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& seg : section.segments()) best = std::min(best, point_segment_distance(seg, q));
  return best;
}

double signed_distance(const CrossSection& section, const Eigen::Vector2d& q) {
  const Eigen::Vector2d rel = q - section.centroid();
  const double rho = rel.norm();
  const double dist = distance_to_boundary(section, q);
  if (rho == 0.0) return -dist;
  const BoundaryPoint bp = boundary_sample(section, std::atan2(rel.y(), rel.x()));
  return rho > bp.radius ? dist : -dist;
}

DistanceField::DistanceField(const CrossSection& section) {
  const auto& segs = section.segments();
  std::vector<Eigen::Vector2d> start_normal, end_normal;
  for (const auto& seg : segs) {
    Feature f;
    std::visit(overloaded{[&](const LineSegment& l) {
                            f.from = l.from;
                            f.end = l.to;
                            f.dir = l.to - l.from;
                            f.len2 = f.dir.squaredNorm();
                            // Counter-clockwise boundary: outward is to the right.
                            f.normal = Eigen::Vector2d(f.dir.y(), -f.dir.x()).normalized();
                            start_normal.push_back(f.normal);
                            end_normal.push_back(f.normal);
                          },
                          [&](const ArcSegment& a) {
                            f.arc = true;
                            f.center = a.center;
                            f.radius = a.radius;
                            f.start = a.start_angle;
                            f.sweep = a.sweep;
                            f.from = a.point_at(a.start_angle);
                            f.end = a.point_at(a.start_angle + a.sweep);
                            const double side = a.sweep > 0.0 ? 1.0 : -1.0;
                            start_normal.push_back(side * (f.from - a.center).normalized());
                            end_normal.push_back(side * (f.end - a.center).normalized());
                          }},
               seg);
    features_.push_back(f);
  }
  const std::size_t n = features_.size();
  for (std::size_t k = 0; k < n; ++k) vertex_normal_.push_back(end_normal[(k + n - 1) % n] + start_normal[k]);
}

DistanceField::Sample DistanceField::query(const Eigen::Vector2d& q) const {
  const std::size_t n = features_.size();
  Sample out;
  double best = std::numeric_limits<double>::infinity();
  double side = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Feature& f = features_[k];
    double dist = 0.0, s = 0.0;
    int vertex = -1;
    Eigen::Vector2d closest, normal;
    if (!f.arc) {
      const Eigen::Vector2d rel = q - f.from;
      const double t = f.len2 > 0.0 ? rel.dot(f.dir) / f.len2 : 0.0;
      if (t <= 0.0) {
        vertex = static_cast<int>(k);
      } else if (t >= 1.0) {
        vertex = static_cast<int>((k + 1) % n);
      } else {
        s = rel.dot(f.normal);
        dist = std::abs(s);
        closest = q - s * f.normal;
        normal = f.normal;
      }
    } else {
      const Eigen::Vector2d rel = q - f.center;
      const double rho = rel.norm();
      const ArcSegment a{f.center, f.radius, f.start, f.sweep};
      if (rho > 0.0 && arc_excess(a, std::atan2(rel.y(), rel.x())) == 0.0) {
        const double orient = f.sweep > 0.0 ? 1.0 : -1.0;
        s = orient * (rho - f.radius);
        dist = std::abs(s);
        closest = f.center + (f.radius / rho) * rel;
        normal = orient * rel / rho;
      } else {
        vertex = (q - f.from).norm() <= (q - f.end).norm() ? static_cast<int>(k) : static_cast<int>((k + 1) % n);
      }
    }
    if (vertex >= 0) {
      closest = features_[static_cast<std::size_t>(vertex)].from;
      dist = (q - closest).norm();
    }
    if (dist < best) {
      best = dist;
      out.closest = closest;
      if (vertex >= 0) {
        s = (q - closest).dot(vertex_normal_[static_cast<std::size_t>(vertex)]);
        normal = dist > 0.0 ? Eigen::Vector2d((s > 0.0 ? 1.0 : -1.0) * (q - closest) / dist)
                            : vertex_normal_[static_cast<std::size_t>(vertex)].normalized();
        out.feature = 2 * vertex + 1;
      } else {
        out.feature = 2 * static_cast<int>(k);
      }
      out.gradient = normal;
      side = s;
    }
  }
  out.distance = side > 0.0 ? best : -best;
  return out;
}

CrossSection translated(const CrossSection& section, const Eigen::Vector2d& offset) {
  std::vector<Segment> out;
  out.reserve(section.segments().size());
  for (const auto& seg : section.segments()) {
    std::visit(overloaded{[&](const LineSegment& l) {
                            out.emplace_back(LineSegment{l.from + offset, l.to + offset});
                          },
                          [&](const ArcSegment& a) {
                            ArcSegment b = a;
                            b.center += offset;
                            out.emplace_back(b);
                          }},
               seg);
  }
  return CrossSection(section.name(), std::move(out));
}

CrossSection scaled(const CrossSection& section, double factor) {
  if (!(factor > 0.0)) throw Error("scaled: factor must be positive");
  std::vector<Segment> out;
  out.reserve(section.segments().size());
  for (const auto& seg : section.segments()) {
    std::visit(overloaded{[&](const LineSegment& l) {
                            out.emplace_back(LineSegment{l.from * factor, l.to * factor});
                          },
                          [&](const ArcSegment& a) {
                            ArcSegment b = a;
                            b.center *= factor;
                            b.radius *= factor;
                            out.emplace_back(b);
                          }},
               seg);
  }
  return CrossSection(section.name(), std::move(out));
}

CrossSection centered(const CrossSection& section) {
  return translated(section, -section.centroid());
}

CrossSection make_circle(const std::string& name, double radius) {
  return CrossSection(name, {ArcSegment{Eigen::Vector2d::Zero(), radius, 0.0, kTwoPi}});
}

CrossSection make_polygon(const std::string& name, const std::vector<Eigen::Vector2d>& vertices) {
  if (vertices.size() < 3) throw Error("make_polygon: need at least three vertices");
  std::vector<Segment> segs;
  segs.reserve(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i)
    segs.emplace_back(LineSegment{vertices[i], vertices[(i + 1) % vertices.size()]});
  return CrossSection(name, std::move(segs));
}

CrossSection make_rectangle(const std::string& name, double width, double height) {
  const double hx = width / 2.0, hy = height / 2.0;
  return make_polygon(name, {{hx, -hy}, {hx, hy}, {-hx, hy}, {-hx, -hy}});
}

CrossSection make_regular_polygon(const std::string& name, int sides, double circumradius,
                                  double phase) {
  if (sides < 3) throw Error("make_regular_polygon: need at least three sides");
  std::vector<Eigen::Vector2d> v;
  v.reserve(static_cast<std::size_t>(sides));
  for (int k = 0; k < sides; ++k) {
    const double a = phase + kTwoPi * k / sides;
    v.emplace_back(circumradius * std::cos(a), circumradius * std::sin(a));
  }
  return make_polygon(name, v);
}

CrossSection make_bullet(const std::string& name, double length, double radius) {
  const double hx = length / 2.0;
  return CrossSection(name, {LineSegment{{-hx, -radius}, {hx, -radius}},
                             ArcSegment{{hx, 0.0}, radius, -kPi / 2.0, kPi},
                             LineSegment{{hx, radius}, {-hx, radius}},
                             LineSegment{{-hx, radius}, {-hx, -radius}}});
}

}  // namespace peghole
