#ifndef TVOA_MESH_HPP
#define TVOA_MESH_HPP

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

namespace tvoa {

using Point = Eigen::Vector2d;

/// Edge shared by two triangles. The normal is the unit normal pointing from
/// `left` into `right`.
struct InteriorEdge {
  int left = -1;
  int right = -1;
  double length = 0.0;
  Point normal = Point::Zero();
};

/// Uniform triangulation of the unit square. Every grid square is split along
/// its lower-left to upper-right diagonal. Immutable after construction.
struct Mesh {
  int n = 0;
  std::vector<Point> nodes;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
  std::vector<InteriorEdge> interior_edges;
  std::vector<std::uint8_t> boundary_node_mask;
  std::vector<double> cell_areas;
  int boundary_edge_count = 0;

  /// Gradients of the three barycentric basis functions per triangle.
  std::vector<std::array<Point, 3>> basis_gradients;
  /// node index -> interior (Dirichlet-reduced) index, or -1 on the boundary.
  std::vector<int> interior_index;
  /// interior index -> node index.
  std::vector<int> interior_nodes;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int cell_count() const { return static_cast<int>(triangles.size()); }
  int interior_count() const { return static_cast<int>(interior_nodes.size()); }
  bool is_boundary(int node) const { return boundary_node_mask[static_cast<std::size_t>(node)] != 0; }
  double h() const { return std::sqrt(2.0) / n; }

  Point centroid(int cell) const {
    const auto& t = triangles[static_cast<std::size_t>(cell)];
    return (nodes[t[0]] + nodes[t[1]] + nodes[t[2]]) / 3.0;
  }
};

inline double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

inline Mesh build_friedrichs_keller(int n) {
  if (n < 1) throw std::invalid_argument("build_friedrichs_keller: n must be >= 1");
  Mesh m;
  m.n = n;
  const int side = n + 1;
  const auto id = [side](int i, int j) { return i + j * side; };

  m.nodes.reserve(static_cast<std::size_t>(side * side));
  m.boundary_node_mask.reserve(static_cast<std::size_t>(side * side));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      m.nodes.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
      m.boundary_node_mask.push_back(i == 0 || j == 0 || i == n || j == n ? 1 : 0);
    }
  }

  m.triangles.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      m.triangles.push_back({a, b, c});
      m.triangles.push_back({a, c, d});
    }
  }

  m.cell_areas.reserve(m.triangles.size());
  m.basis_gradients.reserve(m.triangles.size());
  for (const auto& t : m.triangles) {
    const Point& p0 = m.nodes[t[0]];
    const Point& p1 = m.nodes[t[1]];
    const Point& p2 = m.nodes[t[2]];
    const double area = signed_area(p0, p1, p2);
    m.cell_areas.push_back(area);
    // grad of lambda_k = rot90(opposite edge) / (2 area)
    std::array<Point, 3> g;
    for (int k = 0; k < 3; ++k) {
      const Point& q1 = m.nodes[t[(k + 1) % 3]];
      const Point& q2 = m.nodes[t[(k + 2) % 3]];
      g[k] = Point(q1.y() - q2.y(), q2.x() - q1.x()) / (2.0 * area);
    }
    m.basis_gradients.push_back(g);
  }

  // edge -> adjacent cells
  std::map<std::pair<int, int>, std::vector<int>> edge_cells;
  for (int c = 0; c < m.cell_count(); ++c) {
    const auto& t = m.triangles[static_cast<std::size_t>(c)];
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      edge_cells[{a, b}].push_back(c);
    }
  }
  for (const auto& [edge, cells] : edge_cells) {
    if (cells.size() == 1) {
      ++m.boundary_edge_count;
      continue;
    }
    const Point& pa = m.nodes[edge.first];
    const Point& pb = m.nodes[edge.second];
    const Point tangent = pb - pa;
    InteriorEdge e;
    e.left = cells[0];
    e.right = cells[1];
    e.length = tangent.norm();
    Point normal(tangent.y(), -tangent.x());
    normal /= e.length;
    if (normal.dot(m.centroid(e.right) - m.centroid(e.left)) < 0.0) normal = -normal;
    e.normal = normal;
    m.interior_edges.push_back(e);
  }

  m.interior_index.assign(m.nodes.size(), -1);
  for (int v = 0; v < m.node_count(); ++v) {
    if (!m.is_boundary(v)) {
      m.interior_index[static_cast<std::size_t>(v)] = m.interior_count();
      m.interior_nodes.push_back(v);
    }
  }
  return m;
}

inline std::shared_ptr<const Mesh> make_mesh(int n) {
  return std::make_shared<const Mesh>(build_friedrichs_keller(n));
}

}  // namespace tvoa

#endif  // TVOA_MESH_HPP
