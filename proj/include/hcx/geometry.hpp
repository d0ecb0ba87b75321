#pragma once

#include <algorithm>
#include <cmath>
#include <variant>
#include <vector>

#include "hcx/common.hpp"

namespace hcx {

struct Rect {
  double x0 = 0, y0 = 0, x1 = 1, y1 = 1;
};

struct Disk {
  Vec2 center{0, 0};
  double radius = 1;
};

/// Simple closed polygon, vertices in counter-clockwise order.
struct Polygon {
  std::vector<Vec2> vertices;
};

using OuterShape = std::variant<Rect, Disk>;
using InclusionShape = std::variant<Disk, Polygon>;

/// Domain description: one outer shape minus nothing, with tagged inclusions
/// strictly inside. Inclusion i of the list gets subdomain tag i+1; the
/// background keeps tag 0.
struct GeometrySpec {
  OuterShape outer = Rect{};
  std::vector<InclusionShape> inclusions;
  double target_h = 0.1;
};

inline double polygon_signed_area(const std::vector<Vec2>& v) {
  double a = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % v.size()];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

inline double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double t = ab.squaredNorm() > 0 ? (p - a).dot(ab) / ab.squaredNorm() : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

inline bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& v) {
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    bool crosses = (v[i].y() > p.y()) != (v[j].y() > p.y());
    if (crosses) {
      double xc = v[j].x() + (v[i].x() - v[j].x()) * (p.y() - v[j].y()) / (v[i].y() - v[j].y());
      if (p.x() < xc) inside = !inside;
    }
  }
  return inside;
}

/// Negative inside the shape, positive outside, zero on the boundary.
inline double signed_distance(const Disk& d, const Vec2& p) {
  return (p - d.center).norm() - d.radius;
}

inline double signed_distance(const Polygon& poly, const Vec2& p) {
  double d = std::numeric_limits<double>::infinity();
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i)
    d = std::min(d, dist_point_segment(p, v[i], v[(i + 1) % v.size()]));
  return point_in_polygon(p, v) ? -d : d;
}

inline double signed_distance(const Rect& r, const Vec2& p) {
  double dx = std::max({r.x0 - p.x(), p.x() - r.x1});
  double dy = std::max({r.y0 - p.y(), p.y() - r.y1});
  if (dx > 0 || dy > 0) return std::hypot(std::max(dx, 0.0), std::max(dy, 0.0));
  return std::max(dx, dy);
}

inline double signed_distance(const InclusionShape& s, const Vec2& p) {
  return std::visit([&](const auto& sh) { return signed_distance(sh, p); }, s);
}

inline double signed_distance(const OuterShape& s, const Vec2& p) {
  return std::visit([&](const auto& sh) { return signed_distance(sh, p); }, s);
}

inline Rect bounding_box(const OuterShape& s) {
  if (const Rect* r = std::get_if<Rect>(&s)) return *r;
  const Disk& d = std::get<Disk>(s);
  return Rect{d.center.x() - d.radius, d.center.y() - d.radius,
              d.center.x() + d.radius, d.center.y() + d.radius};
}

inline double shape_diameter(const InclusionShape& s) {
  if (const Disk* d = std::get_if<Disk>(&s)) return 2 * d->radius;
  const auto& v = std::get<Polygon>(s).vertices;
  double dm = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) dm = std::max(dm, (v[i] - v[j]).norm());
  return dm;
}

inline double shape_area(const InclusionShape& s) {
  if (const Disk* d = std::get_if<Disk>(&s)) return M_PI * d->radius * d->radius;
  return polygon_signed_area(std::get<Polygon>(s).vertices);
}

namespace detail {

inline std::vector<Vec2> boundary_samples(const InclusionShape& s, int n) {
  std::vector<Vec2> pts;
  if (const Disk* d = std::get_if<Disk>(&s)) {
    for (int i = 0; i < n; ++i) {
      double t = 2 * M_PI * i / n;
      pts.push_back(d->center + d->radius * Vec2(std::cos(t), std::sin(t)));
    }
  } else {
    const auto& v = std::get<Polygon>(s).vertices;
    int per_edge = std::max(1, n / int(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Vec2 a = v[i], b = v[(i + 1) % v.size()];
      for (int k = 0; k < per_edge; ++k) pts.push_back(a + (double(k) / per_edge) * (b - a));
    }
  }
  return pts;
}

}  // namespace detail

/// Minimum distance between the boundaries of two inclusions (coarse sampled
/// bound; adequate for the clearance check since shapes are well separated).
inline double boundary_gap(const InclusionShape& a, const InclusionShape& b) {
  if (const Disk* da = std::get_if<Disk>(&a))
    if (const Disk* db = std::get_if<Disk>(&b))
      return (da->center - db->center).norm() - da->radius - db->radius;
  double gap = std::numeric_limits<double>::infinity();
  for (const Vec2& p : detail::boundary_samples(a, 256))
    gap = std::min(gap, std::abs(signed_distance(b, p)));
  return gap;
}

/// Throws GeometryError unless every inclusion sits strictly inside the outer
/// shape, inclusions are pairwise separated, and all gaps are at least
/// 2 * target_h.
inline void validate_geometry(const GeometrySpec& spec) {
  if (spec.target_h <= 0) throw GeometryError("target_h must be positive");
  if (const Rect* r = std::get_if<Rect>(&spec.outer)) {
    if (r->x1 <= r->x0 || r->y1 <= r->y0) throw GeometryError("outer rectangle is degenerate");
  } else if (std::get<Disk>(spec.outer).radius <= 0) {
    throw GeometryError("outer disk radius must be positive");
  }
  const double clearance = 2 * spec.target_h;
  for (std::size_t i = 0; i < spec.inclusions.size(); ++i) {
    const InclusionShape& s = spec.inclusions[i];
    if (const Polygon* poly = std::get_if<Polygon>(&s)) {
      if (poly->vertices.size() < 3)
        throw GeometryError("inclusion " + std::to_string(i + 1) + ": polygon needs 3+ vertices");
      if (polygon_signed_area(poly->vertices) <= 0)
        throw GeometryError("inclusion " + std::to_string(i + 1) +
                            ": polygon must be counter-clockwise with positive area");
    } else if (std::get<Disk>(s).radius <= 0) {
      throw GeometryError("inclusion " + std::to_string(i + 1) + ": radius must be positive");
    }
    for (const Vec2& p : detail::boundary_samples(s, 256)) {
      double d = signed_distance(spec.outer, p);
      if (d > -clearance)
        throw GeometryError("inclusion " + std::to_string(i + 1) +
                            " is too close to the outer boundary");
    }
    for (std::size_t j = i + 1; j < spec.inclusions.size(); ++j) {
      double gap = boundary_gap(s, spec.inclusions[j]);
      if (gap < clearance)
        throw GeometryError("inclusions " + std::to_string(i + 1) + " and " +
                            std::to_string(j + 1) + " are closer than 2*target_h");
    }
  }
}

/// Concentric-ring layout of equal disks inside the unit disk. Ring k of the
/// counts list sits at radius ring_step * k and holds counts[k] disks.
inline GeometrySpec ring_layout(const std::vector<int>& counts, double ring_step, double radius,
                                double target_h) {
  GeometrySpec spec;
  spec.outer = Disk{{0, 0}, 1.0};
  spec.target_h = target_h;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    double rho = ring_step * double(k);
    int n = counts[k];
    for (int i = 0; i < n; ++i) {
      double t = 2 * M_PI * i / n + (k % 2 ? M_PI / n : 0.0);
      Vec2 c = rho * Vec2(std::cos(t), std::sin(t));
      if (k == 0) c = Vec2(0, 0);
      spec.inclusions.push_back(Disk{c, radius});
    }
  }
  return spec;
}

/// 36 disks of radius 0.07 spread homogeneously over the unit disk.
inline GeometrySpec preset_disk36(double target_h = 0.02) {
  return ring_layout({1, 6, 12, 17}, 0.26, 0.07, target_h);
}

/// 60 disks of radius 0.07; denser variant of preset_disk36.
inline GeometrySpec preset_disk60(double target_h = 0.02) {
  return ring_layout({1, 6, 12, 17, 24}, 0.2, 0.07, target_h);
}

/// Unit square with one convex polygonal inclusion near the center.
inline GeometrySpec preset_square_polygon(double target_h = 1.0 / 32) {
  GeometrySpec spec;
  spec.outer = Rect{0, 0, 1, 1};
  spec.target_h = target_h;
  Polygon poly;
  poly.vertices = {{0.3, 0.35}, {0.7, 0.3}, {0.75, 0.6}, {0.5, 0.75}, {0.28, 0.6}};
  spec.inclusions.push_back(poly);
  return spec;
}

/// Canonical text form of a geometry, used for cache keys and config hashes.
inline std::string geometry_fingerprint(const GeometrySpec& spec) {
  std::string s;
  auto num = [&s](double v) {
    s += format_double(v);
    s += ',';
  };
  if (const Rect* r = std::get_if<Rect>(&spec.outer)) {
    s += "rect:";
    num(r->x0);
    num(r->y0);
    num(r->x1);
    num(r->y1);
  } else {
    const Disk& d = std::get<Disk>(spec.outer);
    s += "disk:";
    num(d.center.x());
    num(d.center.y());
    num(d.radius);
  }
  for (const InclusionShape& inc : spec.inclusions) {
    if (const Disk* d = std::get_if<Disk>(&inc)) {
      s += ";disk:";
      num(d->center.x());
      num(d->center.y());
      num(d->radius);
    } else {
      s += ";poly:";
      for (const Vec2& q : std::get<Polygon>(inc).vertices) {
        num(q.x());
        num(q.y());
      }
    }
  }
  s += ";h=";
  num(spec.target_h);
  return s;
}

}  // namespace hcx
