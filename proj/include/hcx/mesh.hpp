#pragma once

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "hcx/geometry.hpp"

namespace hcx {

struct Triangle {
  std::array<int, 3> v;
  int tag = 0;  // 0 background, m >= 1 inclusion index
};

struct BoundaryEdge {
  std::array<int, 2> v;
  int tag = 0;  // 0 outer boundary, m >= 1 interface of inclusion m
};

/// Conforming triangulation of the domain. Triangle tags partition the
/// elements into background (0) and inclusions (1..num_inclusions); the
/// boundary_edges list stores the outer boundary and every inclusion
/// interface as closed edge loops.
struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<Triangle> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  int num_inclusions = 0;

  // Analytic geometry the mesh was generated from, when known. Enables
  // interface snapping under refinement and distance queries for
  // delta-neighborhoods.
  std::shared_ptr<const GeometrySpec> geometry;

  double signed_area(int t) const {
    const Vec2 &a = nodes[triangles[t].v[0]], &b = nodes[triangles[t].v[1]],
               &c = nodes[triangles[t].v[2]];
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
  }
  double area(int t) const { return std::abs(signed_area(t)); }
  Vec2 centroid(int t) const {
    return (nodes[triangles[t].v[0]] + nodes[triangles[t].v[1]] + nodes[triangles[t].v[2]]) / 3.0;
  }
  double subdomain_area(int tag) const {
    double a = 0;
    for (std::size_t t = 0; t < triangles.size(); ++t)
      if (triangles[t].tag == tag) a += area(int(t));
    return a;
  }
  double total_area() const {
    double a = 0;
    for (std::size_t t = 0; t < triangles.size(); ++t) a += area(int(t));
    return a;
  }
};

namespace detail {

using EdgeKey = std::pair<int, int>;
inline EdgeKey edge_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

/// edge -> (adjacent triangle count, tag of each side)
struct EdgeAdjacency {
  std::map<EdgeKey, std::array<int, 2>> tris;  // triangle ids, -1 if absent

  explicit EdgeAdjacency(const Mesh& mesh) {
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto& v = mesh.triangles[t].v;
      for (int e = 0; e < 3; ++e) {
        auto key = edge_key(v[e], v[(e + 1) % 3]);
        auto [it, fresh] = tris.try_emplace(key, std::array<int, 2>{-1, -1});
        if (fresh)
          it->second[0] = int(t);
        else if (it->second[1] == -1)
          it->second[1] = int(t);
        else
          throw ValidationError("edge shared by more than two triangles");
      }
    }
  }
};

}  // namespace detail

/// Recomputes the boundary and interface edges from triangle adjacency and
/// tags. Outer edges (one adjacent triangle) get tag 0; edges between tag 0
/// and tag m get tag m. Adjacent triangles with two different nonzero tags
/// violate the inclusion-separation invariant.
inline std::vector<BoundaryEdge> extract_boundary_edges(const Mesh& mesh) {
  detail::EdgeAdjacency adj(mesh);
  std::vector<BoundaryEdge> out;
  for (const auto& [key, tt] : adj.tris) {
    if (tt[1] == -1) {
      int tag = mesh.triangles[tt[0]].tag;
      if (tag != 0)
        throw ValidationError("inclusion triangle touches the outer boundary");
      out.push_back({{key.first, key.second}, 0});
    } else {
      int ta = mesh.triangles[tt[0]].tag, tb = mesh.triangles[tt[1]].tag;
      if (ta == tb) continue;
      if (ta != 0 && tb != 0)
        throw ValidationError("inclusions " + std::to_string(ta) + " and " + std::to_string(tb) +
                              " share an edge");
      out.push_back({{key.first, key.second}, std::max(ta, tb)});
    }
  }
  return out;
}

/// Structural invariants: positive areas, valid indices, tags in range, each
/// inclusion edge-connected and non-empty, stored boundary edges equal to the
/// ones implied by triangle tags, and every interface forming closed loops.
inline void validate_mesh(const Mesh& mesh) {
  const int n = int(mesh.nodes.size());
  if (mesh.triangles.empty()) throw ValidationError("mesh has no triangles");
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    for (int vi : tri.v)
      if (vi < 0 || vi >= n)
        throw ValidationError("triangle " + std::to_string(t) + " references node " +
                              std::to_string(vi) + " out of range");
    if (tri.v[0] == tri.v[1] || tri.v[1] == tri.v[2] || tri.v[0] == tri.v[2])
      throw ValidationError("triangle " + std::to_string(t) + " has repeated vertices");
    if (mesh.signed_area(int(t)) <= 0)
      throw ValidationError("triangle " + std::to_string(t) + " has non-positive area");
    if (tri.tag < 0 || tri.tag > mesh.num_inclusions)
      throw ValidationError("triangle " + std::to_string(t) + " has tag " +
                            std::to_string(tri.tag) + " outside 0.." +
                            std::to_string(mesh.num_inclusions));
  }

  auto implied = extract_boundary_edges(mesh);
  std::set<std::pair<detail::EdgeKey, int>> a, b;
  for (const auto& e : implied) a.insert({detail::edge_key(e.v[0], e.v[1]), e.tag});
  for (const auto& e : mesh.boundary_edges) b.insert({detail::edge_key(e.v[0], e.v[1]), e.tag});
  if (a != b)
    throw ValidationError("stored boundary_edges disagree with triangle adjacency and tags");

  // Closed loops: within each tag class every node has even edge degree.
  std::map<std::pair<int, int>, int> degree;  // (tag, node) -> degree
  for (const auto& e : implied) {
    ++degree[{e.tag, e.v[0]}];
    ++degree[{e.tag, e.v[1]}];
  }
  for (const auto& [key, d] : degree)
    if (d % 2 != 0)
      throw ValidationError("boundary of tag " + std::to_string(key.first) +
                            " is not a closed loop at node " + std::to_string(key.second));

  // Edge-connectivity of each inclusion.
  for (int m = 1; m <= mesh.num_inclusions; ++m) {
    std::vector<int> tris;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
      if (mesh.triangles[t].tag == m) tris.push_back(int(t));
    if (tris.empty()) throw ValidationError("inclusion " + std::to_string(m) + " has no triangles");
    std::map<detail::EdgeKey, std::vector<int>> by_edge;
    for (int t : tris) {
      const auto& v = mesh.triangles[t].v;
      for (int e = 0; e < 3; ++e) by_edge[detail::edge_key(v[e], v[(e + 1) % 3])].push_back(t);
    }
    std::map<int, std::vector<int>> nbr;
    for (const auto& [key, ts] : by_edge)
      if (ts.size() == 2) {
        nbr[ts[0]].push_back(ts[1]);
        nbr[ts[1]].push_back(ts[0]);
      }
    std::set<int> seen{tris[0]};
    std::vector<int> stack{tris[0]};
    while (!stack.empty()) {
      int t = stack.back();
      stack.pop_back();
      for (int u : nbr[t])
        if (seen.insert(u).second) stack.push_back(u);
    }
    if (seen.size() != tris.size())
      throw ValidationError("inclusion " + std::to_string(m) + " is not edge-connected");
  }
}

struct QualityReport {
  double h = 0;                 // longest edge
  double min_angle_deg = 180;   // over all corners
  double max_aspect_ratio = 0;  // diam / inradius
  int worst_element = -1;       // element attaining max_aspect_ratio
};

/// Aspect ratio diam(K)/r_K per element; 2*sqrt(3) for equilateral triangles.
inline double aspect_ratio(const Vec2& a, const Vec2& b, const Vec2& c) {
  double la = (b - c).norm(), lb = (a - c).norm(), lc = (a - b).norm();
  double s = 0.5 * (la + lb + lc);
  double area = 0.5 * std::abs((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
  double inradius = area / s;
  return std::max({la, lb, lc}) / inradius;
}

inline QualityReport mesh_quality(const Mesh& mesh) {
  QualityReport rep;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Vec2 &a = mesh.nodes[mesh.triangles[t].v[0]], &b = mesh.nodes[mesh.triangles[t].v[1]],
               &c = mesh.nodes[mesh.triangles[t].v[2]];
    double rho = aspect_ratio(a, b, c);
    if (rho > rep.max_aspect_ratio) {
      rep.max_aspect_ratio = rho;
      rep.worst_element = int(t);
    }
    std::array<Vec2, 3> p{a, b, c};
    for (int i = 0; i < 3; ++i) {
      Vec2 u = p[(i + 1) % 3] - p[i], v = p[(i + 2) % 3] - p[i];
      rep.h = std::max(rep.h, u.norm());
      double ang = std::acos(std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0));
      rep.min_angle_deg = std::min(rep.min_angle_deg, ang * 180.0 / M_PI);
    }
  }
  return rep;
}

namespace detail {

/// Projects p onto the analytic curve an edge of the given tag belongs to:
/// the outer boundary for tag 0, inclusion m's boundary for tag m. Polygon
/// and rectangle boundaries contain edge midpoints already, so only circles
/// move points.
inline Vec2 snap_to_tag_curve(const GeometrySpec& geo, int tag, const Vec2& p) {
  if (tag == 0) {
    if (const Disk* d = std::get_if<Disk>(&geo.outer))
      return d->center + d->radius * (p - d->center).normalized();
    return p;
  }
  const InclusionShape& s = geo.inclusions.at(std::size_t(tag - 1));
  if (const Disk* d = std::get_if<Disk>(&s))
    return d->center + d->radius * (p - d->center).normalized();
  return p;
}

}  // namespace detail

/// Red refinement: every triangle splits into four via edge midpoints, tags
/// inherited. Midpoints of boundary and interface edges are snapped back onto
/// the analytic curve when the mesh carries its geometry.
inline Mesh refine_uniform(const Mesh& mesh) {
  Mesh out;
  out.nodes = mesh.nodes;
  out.num_inclusions = mesh.num_inclusions;
  out.geometry = mesh.geometry;

  std::map<detail::EdgeKey, int> boundary_tag;
  for (const auto& e : mesh.boundary_edges)
    boundary_tag[detail::edge_key(e.v[0], e.v[1])] = e.tag;

  std::map<detail::EdgeKey, int> midpoint;
  auto mid = [&](int a, int b) {
    auto key = detail::edge_key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    Vec2 p = 0.5 * (mesh.nodes[a] + mesh.nodes[b]);
    auto bt = boundary_tag.find(key);
    if (bt != boundary_tag.end() && mesh.geometry)
      p = detail::snap_to_tag_curve(*mesh.geometry, bt->second, p);
    int idx = int(out.nodes.size());
    out.nodes.push_back(p);
    midpoint.emplace(key, idx);
    return idx;
  };

  for (const Triangle& tri : mesh.triangles) {
    int a = tri.v[0], b = tri.v[1], c = tri.v[2];
    int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
    out.triangles.push_back({{a, ab, ca}, tri.tag});
    out.triangles.push_back({{ab, b, bc}, tri.tag});
    out.triangles.push_back({{ca, bc, c}, tri.tag});
    out.triangles.push_back({{ab, bc, ca}, tri.tag});
  }
  for (const auto& e : mesh.boundary_edges) {
    int m = midpoint.at(detail::edge_key(e.v[0], e.v[1]));
    out.boundary_edges.push_back({{e.v[0], m}, e.tag});
    out.boundary_edges.push_back({{m, e.v[1]}, e.tag});
  }
  return out;
}

/// Node index sets used throughout the expansion pipeline.
struct SubdomainIndex {
  int num_nodes = 0;
  std::vector<int> outer_boundary;                 // nodes on tag-0 boundary edges
  std::vector<std::vector<int>> inclusion_nodes;   // [m-1]: all nodes of tag-m triangles
  std::vector<std::vector<int>> interface_nodes;   // [m-1]: nodes on tag-m boundary edges
  std::vector<char> is_outer;                      // per node
  std::vector<int> inclusion_of;                   // per node: m if node of tag-m triangle, else 0
  std::vector<int> background_free;                // nodes in no inclusion and not on outer boundary

  static SubdomainIndex build(const Mesh& mesh) {
    SubdomainIndex idx;
    idx.num_nodes = int(mesh.nodes.size());
    idx.is_outer.assign(mesh.nodes.size(), 0);
    idx.inclusion_of.assign(mesh.nodes.size(), 0);
    idx.inclusion_nodes.resize(mesh.num_inclusions);
    idx.interface_nodes.resize(mesh.num_inclusions);

    std::vector<std::set<int>> incl(mesh.num_inclusions), iface(mesh.num_inclusions);
    for (const Triangle& t : mesh.triangles)
      if (t.tag > 0)
        for (int v : t.v) incl[t.tag - 1].insert(v);
    for (const auto& e : mesh.boundary_edges) {
      if (e.tag == 0)
        for (int v : e.v) idx.is_outer[v] = 1;
      else
        for (int v : e.v) iface[e.tag - 1].insert(v);
    }
    for (int m = 0; m < mesh.num_inclusions; ++m) {
      idx.inclusion_nodes[m].assign(incl[m].begin(), incl[m].end());
      idx.interface_nodes[m].assign(iface[m].begin(), iface[m].end());
      for (int v : incl[m]) idx.inclusion_of[v] = m + 1;
    }
    for (int v = 0; v < idx.num_nodes; ++v) {
      if (idx.is_outer[v]) idx.outer_boundary.push_back(v);
      if (!idx.is_outer[v] && idx.inclusion_of[v] == 0) idx.background_free.push_back(v);
    }
    return idx;
  }

  /// Interior nodes of inclusion m (1-based): inclusion nodes off the interface.
  std::vector<int> inclusion_interior(int m) const {
    std::set<int> iface(interface_nodes[m - 1].begin(), interface_nodes[m - 1].end());
    std::vector<int> interior;
    for (int v : inclusion_nodes[m - 1])
      if (!iface.count(v)) interior.push_back(v);
    return interior;
  }
};

}  // namespace hcx
