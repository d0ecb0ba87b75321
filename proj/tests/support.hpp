#pragma once

#include <hcx/fem.hpp>
#include <hcx/geometry.hpp>
#include <hcx/mesh.hpp>
#include <hcx/mesh_generate.hpp>

#include <cmath>
#include <vector>

namespace hcx::testing {

/// Uniform right-triangle grid on the unit square, n cells per side, each cell
/// split along the (i,j)-(i+1,j+1) diagonal. Every triangle is right isoceles,
/// so the stiffness matrix is an M-matrix and discrete maximum principles hold
/// exactly. With `with_inclusion` and n a multiple of 5, the cells covering
/// [0.4,0.6]^2 are tagged 1 and the interface lands on grid lines.
inline Mesh structured_square_mesh(int n, bool with_inclusion) {
  Mesh mesh;
  double h = 1.0 / n;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) mesh.nodes.emplace_back(i * h, j * h);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      int a = id(i, j), b = id(i + 1, j), c = id(i, j + 1), d = id(i + 1, j + 1);
      for (const auto& tri : {Triangle{{a, b, d}, 0}, Triangle{{a, d, c}, 0}}) {
        Triangle t = tri;
        if (with_inclusion) {
          Vec2 g = (mesh.nodes[std::size_t(t.v[0])] + mesh.nodes[std::size_t(t.v[1])] +
                    mesh.nodes[std::size_t(t.v[2])]) /
                   3.0;
          if (g.x() > 0.4 && g.x() < 0.6 && g.y() > 0.4 && g.y() < 0.6) t.tag = 1;
        }
        mesh.triangles.push_back(t);
      }
    }
  mesh.num_inclusions = with_inclusion ? 1 : 0;
  mesh.boundary_edges = extract_boundary_edges(mesh);
  validate_mesh(mesh);
  return mesh;
}

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 1;
};

/// Least-squares line through (x, y) with the coefficient of determination.
inline LineFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  std::size_t n = x.size();
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  double mx = sx / double(n), my = sy / double(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy > 0) {
    double ss_res = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double e = y[i] - (fit.intercept + fit.slope * x[i]);
      ss_res += e * e;
    }
    fit.r2 = 1.0 - ss_res / syy;
  }
  return fit;
}

/// Far-separated pair of disk inclusions in a 3x1 channel; small enough for
/// fast unit tests yet exercising the multi-inclusion paths.
inline GeometrySpec two_disk_channel(double h = 0.1) {
  GeometrySpec spec;
  spec.outer = Rect{0, 0, 3, 1};
  spec.inclusions = {Disk{{0.5, 0.5}, 0.2}, Disk{{2.5, 0.5}, 0.2}};
  spec.target_h = h;
  return spec;
}

}  // namespace hcx::testing
