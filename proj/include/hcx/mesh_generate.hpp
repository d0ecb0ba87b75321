#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "hcx/mesh.hpp"

namespace hcx {
namespace detail {

/// Mutable triangulation state while fitting curves. Curve ids: 0 is the
/// outer boundary (only when it is a disk), m >= 1 is inclusion m.
struct GenState {
  const GeometrySpec& geo;
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> tris;
  std::vector<std::vector<int>> node_tris;  // may hold stale ids; filter on use
  std::vector<std::vector<int>> on_curve;   // per node: curves the node lies on
  double dx;
  double scale;

  explicit GenState(const GeometrySpec& g) : geo(g), dx(0), scale(1) {}

  bool on(int v, int curve) const {
    const auto& c = on_curve[v];
    return std::find(c.begin(), c.end(), curve) != c.end();
  }
  bool movable(int v) const { return on_curve[v].empty(); }
  void mark(int v, int curve) {
    if (!on(v, curve)) on_curve[v].push_back(curve);
  }

  double curve_dist(int curve, const Vec2& p) const {
    if (curve == 0) return signed_distance(geo.outer, p);
    return signed_distance(geo.inclusions[std::size_t(curve - 1)], p);
  }

  Vec2 curve_project(int curve, const Vec2& p) const {
    auto project_disk = [&](const Disk& d) {
      Vec2 u = p - d.center;
      double n = u.norm();
      if (n < 1e-300) u = Vec2(1, 0), n = 1;
      return Vec2(d.center + (d.radius / n) * u);
    };
    auto project_poly = [&](const Polygon& poly) {
      double best = std::numeric_limits<double>::infinity();
      Vec2 bp = p;
      const auto& v = poly.vertices;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 a = v[i], b = v[(i + 1) % v.size()];
        Vec2 ab = b - a;
        double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
        Vec2 q = a + t * ab;
        double d = (p - q).norm();
        if (d < best) best = d, bp = q;
      }
      return bp;
    };
    if (curve == 0) return project_disk(std::get<Disk>(geo.outer));
    const InclusionShape& s = geo.inclusions[std::size_t(curve - 1)];
    if (const Disk* d = std::get_if<Disk>(&s)) return project_disk(*d);
    return project_poly(std::get<Polygon>(s));
  }

  double tri_signed_area(const std::array<int, 3>& t) const {
    const Vec2 &a = nodes[t[0]], &b = nodes[t[1]], &c = nodes[t[2]];
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
  }

  std::vector<int> tris_of_node(int v) const {
    std::vector<int> out;
    for (int t : node_tris[v]) {
      const auto& tv = tris[t];
      if (tv[0] == v || tv[1] == v || tv[2] == v) out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::vector<int> tris_of_edge(int a, int b) const {
    std::vector<int> out;
    for (int t : tris_of_node(a)) {
      const auto& tv = tris[t];
      if (tv[0] == b || tv[1] == b || tv[2] == b) out.push_back(t);
    }
    return out;
  }

  int add_node(const Vec2& p) {
    nodes.push_back(p);
    node_tris.emplace_back();
    on_curve.emplace_back();
    return int(nodes.size()) - 1;
  }

  /// Moves node v to p unless some incident triangle would flip or collapse.
  bool try_move(int v, const Vec2& p) {
    Vec2 saved = nodes[v];
    nodes[v] = p;
    const double floor = 1e-8 * dx * dx;
    for (int t : tris_of_node(v))
      if (tri_signed_area(tris[t]) <= floor) {
        nodes[v] = saved;
        return false;
      }
    return true;
  }

  /// Splits edge (a,b) at point p; both adjacent triangles split in two.
  int split_edge(int a, int b, const Vec2& p) {
    int n = add_node(p);
    for (int t : tris_of_edge(a, b)) {
      std::array<int, 3> tv = tris[t];
      int c = -1;
      for (int x : tv)
        if (x != a && x != b) c = x;
      // Preserve cyclic orientation of (a, b, c) as stored.
      auto oriented = [&](int u, int w) {
        for (int i = 0; i < 3; ++i)
          if (tv[i] == u && tv[(i + 1) % 3] == w) return true;
        return false;
      };
      std::array<int, 3> t1, t2;
      if (oriented(a, b)) {
        t1 = {a, n, c};
        t2 = {n, b, c};
      } else {
        t1 = {b, n, c};
        t2 = {n, a, c};
      }
      tris[t] = t1;
      int id2 = int(tris.size());
      tris.push_back(t2);
      for (int x : t1) node_tris[x].push_back(t);
      for (int x : t2) node_tris[x].push_back(id2);
    }
    return n;
  }

  /// Splits triangle t into three at interior point p.
  int split_triangle(int t, const Vec2& p) {
    int n = add_node(p);
    std::array<int, 3> tv = tris[t];
    tris[t] = {tv[0], tv[1], n};
    int id2 = int(tris.size());
    tris.push_back({tv[1], tv[2], n});
    int id3 = int(tris.size());
    tris.push_back({tv[2], tv[0], n});
    for (int x : tris[t]) node_tris[x].push_back(t);
    for (int x : tris[std::size_t(id2)]) node_tris[x].push_back(id2);
    for (int x : tris[std::size_t(id3)]) node_tris[x].push_back(id3);
    return n;
  }
};

/// Strictly interior parameters where segment (a,b) crosses the curve, in
/// increasing order. Tangencies and below-tolerance dips are dropped.
inline std::vector<double> edge_curve_crossings(const GenState& st, int curve, const Vec2& a,
                                                const Vec2& b) {
  const double tcut = 1e-9;
  std::vector<double> ts;
  auto circle_roots = [&](const Disk& d) {
    Vec2 u = b - a, w = a - d.center;
    double A = u.squaredNorm(), B = 2 * u.dot(w), C = w.squaredNorm() - d.radius * d.radius;
    if (A < 1e-300) return;
    double disc = B * B - 4 * A * C;
    double span = std::sqrt(A);
    if (disc <= (1e-11 * span * d.radius) * (1e-11 * span * d.radius)) return;
    double sq = std::sqrt(disc);
    double q = -0.5 * (B + (B >= 0 ? sq : -sq));
    double r1 = q / A, r2 = (std::abs(q) > 1e-300) ? C / q : r1;
    if (r1 > r2) std::swap(r1, r2);
    for (double t : {r1, r2})
      if (t > tcut && t < 1 - tcut) ts.push_back(t);
  };
  const InclusionShape* shape = nullptr;
  if (curve == 0) {
    circle_roots(std::get<Disk>(st.geo.outer));
  } else {
    shape = &st.geo.inclusions[std::size_t(curve - 1)];
    if (const Disk* d = std::get_if<Disk>(shape)) {
      circle_roots(*d);
    } else {
      const auto& v = std::get<Polygon>(*shape).vertices;
      Vec2 u = b - a;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 p = v[i], w = v[(i + 1) % v.size()] - v[i];
        double den = u.x() * w.y() - u.y() * w.x();
        if (std::abs(den) < 1e-14 * u.norm() * w.norm()) continue;
        Vec2 ap = p - a;
        double t = (ap.x() * w.y() - ap.y() * w.x()) / den;
        double s = (ap.x() * u.y() - ap.y() * u.x()) / den;
        if (t > tcut && t < 1 - tcut && s > -tcut && s < 1 + tcut) ts.push_back(t);
      }
    }
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end(),
                       [](double x, double y) { return std::abs(x - y) < 1e-9; }),
           ts.end());
  return ts;
}

inline void fit_curve(GenState& st, int curve) {
  const double snap_band = 0.30 * st.dx;
  const double d_on = 1e-12 * st.scale;

  Rect box;
  if (curve == 0) {
    box = bounding_box(OuterShape{std::get<Disk>(st.geo.outer)});
  } else {
    const InclusionShape& s = st.geo.inclusions[std::size_t(curve - 1)];
    if (const Disk* d = std::get_if<Disk>(&s)) {
      box = Rect{d->center.x() - d->radius, d->center.y() - d->radius, d->center.x() + d->radius,
                 d->center.y() + d->radius};
    } else {
      const auto& v = std::get<Polygon>(s).vertices;
      box = Rect{v[0].x(), v[0].y(), v[0].x(), v[0].y()};
      for (const Vec2& p : v) {
        box.x0 = std::min(box.x0, p.x());
        box.y0 = std::min(box.y0, p.y());
        box.x1 = std::max(box.x1, p.x());
        box.y1 = std::max(box.y1, p.y());
      }
    }
  }
  const double margin = 3 * st.dx;
  auto near_box = [&](const Vec2& p) {
    return p.x() > box.x0 - margin && p.x() < box.x1 + margin && p.y() > box.y0 - margin &&
           p.y() < box.y1 + margin;
  };

  // Polygon corners become mesh nodes first; they anchor the interface exactly.
  if (curve > 0) {
    if (const Polygon* poly = std::get_if<Polygon>(&st.geo.inclusions[std::size_t(curve - 1)])) {
      for (const Vec2& q : poly->vertices) {
        int nearest = -1;
        double best = 0.35 * st.dx;
        for (int v = 0; v < int(st.nodes.size()); ++v)
          if (near_box(st.nodes[v])) {
            double d = (st.nodes[v] - q).norm();
            if (d < best && st.movable(v)) best = d, nearest = v;
          }
        if (nearest >= 0 && st.try_move(nearest, q)) {
          st.mark(nearest, curve);
          continue;
        }
        // Locate the triangle containing q.
        int host = -1;
        double l0 = 0, l1 = 0, l2 = 0;
        for (std::size_t t = 0; t < st.tris.size(); ++t) {
          const Vec2 &A = st.nodes[st.tris[t][0]], &B = st.nodes[st.tris[t][1]],
                     &C = st.nodes[st.tris[t][2]];
          double den = (B.x() - A.x()) * (C.y() - A.y()) - (C.x() - A.x()) * (B.y() - A.y());
          if (den <= 0) continue;
          double a0 = ((B.x() - q.x()) * (C.y() - q.y()) - (C.x() - q.x()) * (B.y() - q.y())) / den;
          double a1 = ((C.x() - q.x()) * (A.y() - q.y()) - (A.x() - q.x()) * (C.y() - q.y())) / den;
          double a2 = 1 - a0 - a1;
          if (a0 >= -1e-12 && a1 >= -1e-12 && a2 >= -1e-12) {
            host = int(t);
            l0 = a0;
            l1 = a1;
            l2 = a2;
            break;
          }
        }
        if (host < 0) throw GeometryError("polygon corner outside the meshed region");
        const double edge_tol = 1e-9;
        int n;
        if (l0 < edge_tol)
          n = st.split_edge(st.tris[std::size_t(host)][1], st.tris[std::size_t(host)][2], q);
        else if (l1 < edge_tol)
          n = st.split_edge(st.tris[std::size_t(host)][2], st.tris[std::size_t(host)][0], q);
        else if (l2 < edge_tol)
          n = st.split_edge(st.tris[std::size_t(host)][0], st.tris[std::size_t(host)][1], q);
        else
          n = st.split_triangle(host, q);
        st.mark(n, curve);
      }
    }
  }

  // Nodes already close to the curve slide onto it.
  for (int v = 0; v < int(st.nodes.size()); ++v) {
    if (!near_box(st.nodes[v])) continue;
    double d = std::abs(st.curve_dist(curve, st.nodes[v]));
    if (d <= d_on) {
      st.mark(v, curve);
    } else if (d <= snap_band && st.movable(v)) {
      if (st.try_move(v, st.curve_project(curve, st.nodes[v]))) st.mark(v, curve);
    }
  }

  // Remaining crossings: snap an edge endpoint onto the crossing point when it
  // is near one, otherwise split the edge there. Repeat until conforming.
  for (int guard = 0;; ++guard) {
    if (guard > 100000) throw ValidationError("interface recovery did not converge");

    std::set<std::pair<int, int>> edges;
    for (int v = 0; v < int(st.nodes.size()); ++v) {
      if (!near_box(st.nodes[v])) continue;
      for (int t : st.tris_of_node(v)) {
        const auto& tv = st.tris[t];
        if (tv[0] != v && tv[1] != v && tv[2] != v) continue;
        for (int e = 0; e < 3; ++e)
          edges.insert(edge_key(tv[e], tv[(e + 1) % 3]));
      }
    }
    bool changed = false;
    for (const auto& [a, b] : edges) {
      if (st.on(a, curve) && st.on(b, curve)) continue;
      auto ts = edge_curve_crossings(st, curve, st.nodes[a], st.nodes[b]);
      if (ts.empty()) continue;
      double t = ts.front();
      Vec2 p = st.nodes[a] + t * (st.nodes[b] - st.nodes[a]);
      if (t <= 0.35 && st.movable(a) && st.try_move(a, p)) {
        st.mark(a, curve);
      } else if (t >= 0.65 && st.movable(b) && st.try_move(b, p)) {
        st.mark(b, curve);
      } else {
        st.split_edge(a, b, p);
      }
      changed = true;
      break;  // topology changed; rebuild the candidate set
    }
    if (!changed) break;
  }
}

}  // namespace detail

/// Laplacian smoothing of nodes that sit on no boundary or interface edge.
/// Each accepted move keeps every incident triangle strictly positive, so
/// elements never cross the (pinned) interface polylines and tags stay valid.
/// Deterministic: fixed pass count, nodes visited in index order.
inline void smooth_interior(Mesh& mesh, int passes = 4) {
  const std::size_t n = mesh.nodes.size();
  std::vector<char> fixed(n, 0);
  for (const auto& e : mesh.boundary_edges) fixed[std::size_t(e.v[0])] = fixed[std::size_t(e.v[1])] = 1;

  std::vector<std::vector<int>> star(n);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
    for (int v : mesh.triangles[t].v) star[std::size_t(v)].push_back(int(t));

  auto signed_area = [&](int t, int moved, const Vec2& pos) {
    std::array<Vec2, 3> p;
    for (int k = 0; k < 3; ++k) {
      int v = mesh.triangles[std::size_t(t)].v[k];
      p[std::size_t(k)] = v == moved ? pos : mesh.nodes[std::size_t(v)];
    }
    return 0.5 * ((p[1] - p[0]).x() * (p[2] - p[0]).y() - (p[1] - p[0]).y() * (p[2] - p[0]).x());
  };

  for (int pass = 0; pass < passes; ++pass) {
    for (std::size_t v = 0; v < n; ++v) {
      if (fixed[v] || star[v].empty()) continue;
      Vec2 sum(0, 0);
      int count = 0;
      double avg_area = 0;
      for (int t : star[v]) {
        avg_area += mesh.area(t);
        for (int w : mesh.triangles[std::size_t(t)].v)
          if (w != int(v)) {
            sum += mesh.nodes[std::size_t(w)];
            ++count;
          }
      }
      avg_area /= double(star[v].size());
      Vec2 target = sum / double(count);  // ring neighbors, counted once per triangle
      bool ok = true;
      for (int t : star[v])
        if (signed_area(t, int(v), target) <= 1e-6 * avg_area) {
          ok = false;
          break;
        }
      if (ok) mesh.nodes[v] = target;
    }
  }
}

/// Tangential smoothing of nodes on circular boundaries and interfaces: each
/// node slides toward the arc midpoint of its two curve neighbors, staying
/// exactly on the circle. Evens out chord lengths, which removes the sliver
/// triangles that edge splitting can leave behind. Polygonal interfaces are
/// left alone (their corners must not move and their sides stay straight).
inline void smooth_curve_nodes(Mesh& mesh, int passes = 4) {
  if (!mesh.geometry) return;
  const std::size_t n = mesh.nodes.size();

  std::vector<std::vector<int>> star(n);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
    for (int v : mesh.triangles[t].v) star[std::size_t(v)].push_back(int(t));

  auto signed_area = [&](int t, int moved, const Vec2& pos) {
    std::array<Vec2, 3> p;
    for (int k = 0; k < 3; ++k) {
      int v = mesh.triangles[std::size_t(t)].v[k];
      p[std::size_t(k)] = v == moved ? pos : mesh.nodes[std::size_t(v)];
    }
    return 0.5 * ((p[1] - p[0]).x() * (p[2] - p[0]).y() - (p[1] - p[0]).y() * (p[2] - p[0]).x());
  };

  for (int curve = 0; curve <= mesh.num_inclusions; ++curve) {
    const Disk* disk = nullptr;
    if (curve == 0)
      disk = std::get_if<Disk>(&mesh.geometry->outer);
    else
      disk = std::get_if<Disk>(&mesh.geometry->inclusions[std::size_t(curve - 1)]);
    if (!disk) continue;

    // Two arc neighbors per node, from the curve's edge loop.
    std::vector<std::array<int, 2>> nbr(n, {-1, -1});
    for (const auto& e : mesh.boundary_edges) {
      if (e.tag != curve) continue;
      for (int k = 0; k < 2; ++k) {
        int a = e.v[k], b = e.v[1 - k];
        auto& slot = nbr[std::size_t(a)];
        (slot[0] == -1 ? slot[0] : slot[1]) = b;
      }
    }

    for (int pass = 0; pass < passes; ++pass) {
      for (std::size_t v = 0; v < n; ++v) {
        if (nbr[v][0] < 0 || nbr[v][1] < 0) continue;
        Vec2 mid = 0.5 * (mesh.nodes[std::size_t(nbr[v][0])] + mesh.nodes[std::size_t(nbr[v][1])]);
        Vec2 dir = mid - disk->center;
        double len = dir.norm();
        if (len < 1e-12 * disk->radius) continue;
        Vec2 target = disk->center + disk->radius / len * dir;
        double avg_area = 0;
        for (int t : star[v]) avg_area += mesh.area(t);
        avg_area /= double(star[v].size());
        bool ok = true;
        for (int t : star[v])
          if (signed_area(t, int(v), target) <= 1e-6 * avg_area) {
            ok = false;
            break;
          }
        if (ok) mesh.nodes[v] = target;
      }
    }
  }
}

namespace detail {

inline double min_corner_angle(const Vec2& a, const Vec2& b, const Vec2& c) {
  double best = 3.2;
  std::array<Vec2, 3> p{a, b, c};
  for (int k = 0; k < 3; ++k) {
    Vec2 u = p[std::size_t((k + 1) % 3)] - p[std::size_t(k)];
    Vec2 v = p[std::size_t((k + 2) % 3)] - p[std::size_t(k)];
    double arg = u.dot(v) / (u.norm() * v.norm());
    best = std::min(best, std::acos(std::clamp(arg, -1.0, 1.0)));
  }
  return best;
}

}  // namespace detail

/// Local edge flipping on interior same-tag edges: a flip is applied when it
/// raises the smallest corner angle of the triangle pair and keeps both new
/// triangles positively oriented. Removes the flat "cap" triangles that curve
/// fitting leaves along circles (three consecutive boundary nodes joined
/// across an interior edge). Interface and boundary edges are never flipped,
/// so subdomain shapes and tags are untouched. Deterministic edge order.
inline void flip_improve(Mesh& mesh, int max_passes = 10) {
  auto area2 = [&](int a, int b, int c) {
    Vec2 u = mesh.nodes[std::size_t(b)] - mesh.nodes[std::size_t(a)];
    Vec2 v = mesh.nodes[std::size_t(c)] - mesh.nodes[std::size_t(a)];
    return u.x() * v.y() - u.y() * v.x();
  };

  for (int pass = 0; pass < max_passes; ++pass) {
    // (lo, hi) edge -> incident triangles.
    std::map<std::pair<int, int>, std::vector<int>> edges;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
      for (int k = 0; k < 3; ++k) {
        int a = mesh.triangles[t].v[k], b = mesh.triangles[t].v[(k + 1) % 3];
        edges[{std::min(a, b), std::max(a, b)}].push_back(int(t));
      }

    std::vector<char> dirty(mesh.triangles.size(), 0);
    int flips = 0;
    for (const auto& [edge, tris] : edges) {
      if (tris.size() != 2) continue;
      int t1 = tris[0], t2 = tris[1];
      if (dirty[std::size_t(t1)] || dirty[std::size_t(t2)]) continue;
      Triangle& tri1 = mesh.triangles[std::size_t(t1)];
      Triangle& tri2 = mesh.triangles[std::size_t(t2)];
      if (tri1.tag != tri2.tag) continue;

      // Opposite vertices d1 in t1 and d2 in t2; edge = (a, c) oriented as in t1.
      int a = -1, c = -1, d1 = -1, d2 = -1;
      for (int k = 0; k < 3; ++k) {
        int u = tri1.v[k], v = tri1.v[(k + 1) % 3];
        if (std::minmax(u, v) == std::minmax(edge.first, edge.second)) {
          a = u;
          c = v;
          d1 = tri1.v[(k + 2) % 3];
        }
      }
      for (int k = 0; k < 3; ++k)
        if (tri2.v[k] != a && tri2.v[k] != c) d2 = tri2.v[k];
      if (a < 0 || d1 < 0 || d2 < 0 || d1 == d2) continue;

      if (area2(a, d2, d1) <= 0 || area2(c, d1, d2) <= 0) continue;  // non-convex quad
      double before = std::min(
          detail::min_corner_angle(mesh.nodes[std::size_t(a)], mesh.nodes[std::size_t(c)],
                                   mesh.nodes[std::size_t(d1)]),
          detail::min_corner_angle(mesh.nodes[std::size_t(c)], mesh.nodes[std::size_t(a)],
                                   mesh.nodes[std::size_t(d2)]));
      double after = std::min(
          detail::min_corner_angle(mesh.nodes[std::size_t(a)], mesh.nodes[std::size_t(d2)],
                                   mesh.nodes[std::size_t(d1)]),
          detail::min_corner_angle(mesh.nodes[std::size_t(c)], mesh.nodes[std::size_t(d1)],
                                   mesh.nodes[std::size_t(d2)]));
      if (after <= before + 1e-12) continue;

      tri1.v = {a, d2, d1};
      tri2.v = {c, d1, d2};
      dirty[std::size_t(t1)] = dirty[std::size_t(t2)] = 1;
      ++flips;
    }
    if (flips == 0) break;
  }
}

/// Builds a conforming triangulation of the geometry: structured grid over the
/// bounding box, curve fitting by vertex snapping plus conforming edge splits,
/// centroid tagging, and boundary extraction. Deterministic for a given spec.
inline Mesh generate_mesh(const GeometrySpec& spec) {
  validate_geometry(spec);
  detail::GenState st(spec);

  Rect box = bounding_box(spec.outer);
  const bool disk_outer = std::holds_alternative<Disk>(spec.outer);
  st.scale = std::max(box.x1 - box.x0, box.y1 - box.y0);
  int nx, ny;
  double x0 = box.x0, y0 = box.y0;
  if (disk_outer) {
    // Two spare cells keep the circle away from the grid border.
    nx = int(std::ceil((box.x1 - box.x0) / spec.target_h)) + 4;
    ny = int(std::ceil((box.y1 - box.y0) / spec.target_h)) + 4;
    st.dx = spec.target_h;
    x0 = box.x0 - 2 * st.dx;
    y0 = box.y0 - 2 * st.dx;
  } else {
    nx = std::max(1, int(std::ceil((box.x1 - box.x0) / spec.target_h - 1e-12)));
    ny = std::max(1, int(std::ceil((box.y1 - box.y0) / spec.target_h - 1e-12)));
    st.dx = std::max((box.x1 - box.x0) / nx, (box.y1 - box.y0) / ny);
  }
  const double hx = disk_outer ? st.dx : (box.x1 - box.x0) / nx;
  const double hy = disk_outer ? st.dx : (box.y1 - box.y0) / ny;

  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) st.add_node(Vec2(x0 + i * hx, y0 + j * hy));
  auto nid = [&](int i, int j) { return i + j * (nx + 1); };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int v00 = nid(i, j), v10 = nid(i + 1, j), v01 = nid(i, j + 1), v11 = nid(i + 1, j + 1);
      if ((i + j) % 2 == 0) {
        st.tris.push_back({v00, v10, v11});
        st.tris.push_back({v00, v11, v01});
      } else {
        st.tris.push_back({v00, v10, v01});
        st.tris.push_back({v10, v11, v01});
      }
    }
  for (std::size_t t = 0; t < st.tris.size(); ++t)
    for (int v : st.tris[t]) st.node_tris[v].push_back(int(t));

  if (disk_outer) detail::fit_curve(st, 0);
  for (int m = 1; m <= int(spec.inclusions.size()); ++m) detail::fit_curve(st, m);

  // Assemble the final mesh: drop triangles outside a disk outer boundary,
  // renumber nodes, tag by centroid.
  Mesh mesh;
  std::vector<int> remap(st.nodes.size(), -1);
  for (const auto& tv : st.tris) {
    Vec2 c = (st.nodes[tv[0]] + st.nodes[tv[1]] + st.nodes[tv[2]]) / 3.0;
    if (disk_outer && signed_distance(spec.outer, c) >= 0) continue;
    Triangle tri;
    for (int k = 0; k < 3; ++k) {
      int v = tv[k];
      if (remap[v] == -1) {
        remap[v] = int(mesh.nodes.size());
        mesh.nodes.push_back(st.nodes[v]);
      }
      tri.v[k] = remap[v];
    }
    tri.tag = 0;
    for (std::size_t m = 0; m < spec.inclusions.size(); ++m)
      if (signed_distance(spec.inclusions[m], c) < 0) {
        tri.tag = int(m) + 1;
        break;
      }
    mesh.triangles.push_back(tri);
  }
  mesh.num_inclusions = int(spec.inclusions.size());
  mesh.boundary_edges = extract_boundary_edges(mesh);
  mesh.geometry = std::make_shared<GeometrySpec>(spec);

  for (int round = 0; round < 3; ++round) {
    smooth_curve_nodes(mesh, 2);
    smooth_interior(mesh, 2);
    flip_improve(mesh);
  }
  validate_mesh(mesh);

  // Resolution checks: every inclusion needs interior nodes and a sane area.
  SubdomainIndex idx = SubdomainIndex::build(mesh);
  for (int m = 1; m <= mesh.num_inclusions; ++m) {
    if (idx.inclusion_interior(m).empty())
      throw ResolutionError("inclusion " + std::to_string(m) +
                            " has no interior node; decrease target_h");
    double discrete = mesh.subdomain_area(m);
    double analytic = shape_area(spec.inclusions[std::size_t(m - 1)]);
    if (std::abs(discrete - analytic) > 0.10 * analytic)
      throw ResolutionError("inclusion " + std::to_string(m) +
                            " area off by more than 10%; decrease target_h");
  }
  return mesh;
}

}  // namespace hcx
