#ifndef TVOA_FEM_HPP
#define TVOA_FEM_HPP

#include "tvoa/fields.hpp"
#include "tvoa/mesh.hpp"
#include "tvoa/sparse_linalg.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tvoa {

using Triplets = std::vector<Eigen::Triplet<double>>;

inline SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, const Triplets& t) {
  SparseMatrix a(rows, cols);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  return a;
}

/// Selection operator picking the interior nodes (components per node).
inline SparseMatrix interior_selection(const Mesh& m, int components = 1) {
  Triplets t;
  t.reserve(static_cast<std::size_t>(components * m.interior_count()));
  for (int i = 0; i < m.interior_count(); ++i)
    for (int c = 0; c < components; ++c)
      t.emplace_back(components * i + c, components * m.interior_nodes[static_cast<std::size_t>(i)] + c, 1.0);
  return from_triplets(components * m.interior_count(), components * m.node_count(), t);
}

/// Removes the rows and columns of boundary degrees of freedom.
inline SparseSymMatrix reduce_dirichlet(const Mesh& m, const SparseSymMatrix& full, int components = 1) {
  const SparseMatrix s = interior_selection(m, components);
  SparseSymMatrix r = s * full * s.transpose();
  r.makeCompressed();
  return r;
}

/// P1 Galerkin matrix of -Laplace on all nodes (no boundary conditions).
inline SparseSymMatrix assemble_stiffness_full(const Mesh& m) {
  Triplets t;
  t.reserve(9 * m.triangles.size());
  for (int c = 0; c < m.cell_count(); ++c) {
    const auto& tri = m.triangles[static_cast<std::size_t>(c)];
    const auto& g = m.basis_gradients[static_cast<std::size_t>(c)];
    const double area = m.cell_areas[static_cast<std::size_t>(c)];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) t.emplace_back(tri[a], tri[b], area * g[a].dot(g[b]));
  }
  return from_triplets(m.node_count(), m.node_count(), t);
}

/// Stiffness matrix on interior nodes (homogeneous Dirichlet conditions).
inline SparseSymMatrix assemble_stiffness(const Mesh& m) { return reduce_dirichlet(m, assemble_stiffness_full(m)); }

/// Consistent P1 mass matrix on all nodes.
inline SparseSymMatrix assemble_mass_p1_full(const Mesh& m) {
  Triplets t;
  t.reserve(9 * m.triangles.size());
  for (int c = 0; c < m.cell_count(); ++c) {
    const auto& tri = m.triangles[static_cast<std::size_t>(c)];
    const double area = m.cell_areas[static_cast<std::size_t>(c)];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) t.emplace_back(tri[a], tri[b], area / 12.0 * (a == b ? 2.0 : 1.0));
  }
  return from_triplets(m.node_count(), m.node_count(), t);
}

inline Eigen::DiagonalMatrix<double, Eigen::Dynamic> assemble_mass_p0(const Mesh& m) {
  return Eigen::DiagonalMatrix<double, Eigen::Dynamic>(
      Eigen::Map<const Vector>(m.cell_areas.data(), m.cell_count()));
}

/// Maps P0 coefficients to the P1 load vector (integral of u times each hat
/// function), all nodes. Each triangle contributes area/3 to its vertices.
inline SparseMatrix assemble_p0_p1_coupling(const Mesh& m) {
  Triplets t;
  t.reserve(3 * m.triangles.size());
  for (int c = 0; c < m.cell_count(); ++c) {
    const auto& tri = m.triangles[static_cast<std::size_t>(c)];
    const double w = m.cell_areas[static_cast<std::size_t>(c)] / 3.0;
    for (int a = 0; a < 3; ++a) t.emplace_back(tri[a], c, w);
  }
  return from_triplets(m.node_count(), m.cell_count(), t);
}

/// Divergence of a P1 vector field (all nodes, interleaved) as a P0 field.
inline SparseMatrix assemble_divergence_full(const Mesh& m) {
  Triplets t;
  t.reserve(6 * m.triangles.size());
  for (int c = 0; c < m.cell_count(); ++c) {
    const auto& tri = m.triangles[static_cast<std::size_t>(c)];
    const auto& g = m.basis_gradients[static_cast<std::size_t>(c)];
    for (int a = 0; a < 3; ++a) {
      t.emplace_back(c, 2 * tri[a], g[a].x());
      t.emplace_back(c, 2 * tri[a] + 1, g[a].y());
    }
  }
  return from_triplets(m.cell_count(), 2 * m.node_count(), t);
}

/// Divergence restricted to interior vector degrees of freedom.
inline SparseMatrix assemble_divergence(const Mesh& m) {
  SparseMatrix d = assemble_divergence_full(m) * interior_selection(m, 2).transpose();
  d.makeCompressed();
  return d;
}

inline P0Field divergence_p1_to_p0(const Mesh& m, const P1VectorField& phi) {
  if (phi.size() != 2 * m.node_count()) throw std::invalid_argument("divergence_p1_to_p0: size mismatch");
  P0Field out = P0Field::zeros(m);
  for (int c = 0; c < m.cell_count(); ++c) {
    const auto& tri = m.triangles[static_cast<std::size_t>(c)];
    const auto& g = m.basis_gradients[static_cast<std::size_t>(c)];
    double d = 0.0;
    for (int a = 0; a < 3; ++a) d += g[a].dot(phi.at(tri[a]));
    out.values[c] = d;
  }
  return out;
}

/// Barycentric coordinates of the centroids of the 4^depth congruent
/// sub-triangles obtained by recursive midpoint subdivision.
inline std::vector<Eigen::Vector3d> subdivision_centroids(int depth) {
  if (depth < 0) throw std::invalid_argument("subdivision depth must be >= 0");
  std::vector<std::array<Eigen::Vector3d, 3>> tris{
      {Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0), Eigen::Vector3d(0, 0, 1)}};
  for (int d = 0; d < depth; ++d) {
    std::vector<std::array<Eigen::Vector3d, 3>> next;
    next.reserve(4 * tris.size());
    for (const auto& t : tris) {
      const Eigen::Vector3d m01 = 0.5 * (t[0] + t[1]);
      const Eigen::Vector3d m12 = 0.5 * (t[1] + t[2]);
      const Eigen::Vector3d m20 = 0.5 * (t[2] + t[0]);
      next.push_back({t[0], m01, m20});
      next.push_back({m01, t[1], m12});
      next.push_back({m20, m12, t[2]});
      next.push_back({m01, m12, m20});
    }
    tris = std::move(next);
  }
  std::vector<Eigen::Vector3d> out;
  out.reserve(tris.size());
  for (const auto& t : tris) out.push_back((t[0] + t[1] + t[2]) / 3.0);
  return out;
}

/// Cell averages of f by the centroid rule on 4^depth sub-triangles.
template <class F>
P0Field project_p0(F&& f, const Mesh& m, int depth = 4) {
  const auto bary = subdivision_centroids(depth);
  P0Field out = P0Field::zeros(m);
  for (int c = 0; c < m.cell_count(); ++c) {
    const auto& tri = m.triangles[static_cast<std::size_t>(c)];
    const Point& p0 = m.nodes[tri[0]];
    const Point& p1 = m.nodes[tri[1]];
    const Point& p2 = m.nodes[tri[2]];
    double sum = 0.0;
    for (const auto& b : bary) sum += f(Point(b[0] * p0 + b[1] * p1 + b[2] * p2));
    out.values[c] = sum / static_cast<double>(bary.size());
  }
  return out;
}

/// Nodal interpolation. With `dirichlet` set, boundary values are zeroed.
template <class F>
P1ScalarField interpolate_p1(F&& f, const Mesh& m, bool dirichlet = false) {
  P1ScalarField out = P1ScalarField::zeros(m);
  for (int v = 0; v < m.node_count(); ++v)
    out.values[v] = (dirichlet && m.is_boundary(v)) ? 0.0 : f(m.nodes[static_cast<std::size_t>(v)]);
  return out;
}

/// Integral of the product of two P0 fields.
inline double inner_p0(const Mesh& m, const P0Field& u, const P0Field& v) {
  require_p0(m, u, "inner_p0");
  require_p0(m, v, "inner_p0");
  return (Eigen::Map<const Vector>(m.cell_areas.data(), m.cell_count()).array() * u.values.array() *
          v.values.array())
      .sum();
}

inline double integrate_p0(const Mesh& m, const P0Field& u) {
  require_p0(m, u, "integrate_p0");
  return Eigen::Map<const Vector>(m.cell_areas.data(), m.cell_count()).dot(u.values);
}

inline double l2_norm_p0(const Mesh& m, const P0Field& u) { return std::sqrt(inner_p0(m, u, u)); }

inline double l2_error_p0(const Mesh& m, const P0Field& u, const P0Field& v) {
  if (u.size() != v.size()) throw std::invalid_argument("l2_error_p0: length mismatch");
  return l2_norm_p0(m, P0Field(u.values - v.values));
}

/// Cell average of a P1 field (L2 projection onto P0).
inline P0Field p1_cell_average(const Mesh& m, const P1ScalarField& y) {
  P0Field out = P0Field::zeros(m);
  for (int c = 0; c < m.cell_count(); ++c) {
    const auto& tri = m.triangles[static_cast<std::size_t>(c)];
    out.values[c] = (y.values[tri[0]] + y.values[tri[1]] + y.values[tri[2]]) / 3.0;
  }
  return out;
}

}  // namespace tvoa

#endif  // TVOA_FEM_HPP
