#ifndef TVOA_FIELDS_HPP
#define TVOA_FIELDS_HPP

#include "tvoa/mesh.hpp"
#include "tvoa/sparse_linalg.hpp"

#include <stdexcept>

namespace tvoa {

/// Piecewise constant field, one value per triangle.
struct P0Field {
  Vector values;

  P0Field() = default;
  explicit P0Field(Vector v) : values(std::move(v)) {}
  static P0Field zeros(const Mesh& m) { return P0Field(Vector::Zero(m.cell_count())); }
  static P0Field constant(const Mesh& m, double c) { return P0Field(Vector::Constant(m.cell_count(), c)); }
  Eigen::Index size() const { return values.size(); }
};

/// Continuous piecewise linear scalar field, one value per node.
struct P1ScalarField {
  Vector values;

  P1ScalarField() = default;
  explicit P1ScalarField(Vector v) : values(std::move(v)) {}
  static P1ScalarField zeros(const Mesh& m) { return P1ScalarField(Vector::Zero(m.node_count())); }
  Eigen::Index size() const { return values.size(); }
};

/// Continuous piecewise linear vector field; values are interleaved
/// (x, y) per node.
struct P1VectorField {
  Vector values;

  P1VectorField() = default;
  explicit P1VectorField(Vector v) : values(std::move(v)) {}
  static P1VectorField zeros(const Mesh& m) { return P1VectorField(Vector::Zero(2 * m.node_count())); }
  Eigen::Index size() const { return values.size(); }
  Point at(int node) const { return {values[2 * node], values[2 * node + 1]}; }
};

inline void require_p0(const Mesh& m, const P0Field& u, const char* what) {
  if (u.size() != m.cell_count()) throw std::invalid_argument(std::string(what) + ": P0 field size mismatch");
}

/// Interior (Dirichlet-reduced) coefficients of a scalar field.
inline Vector restrict_interior(const Mesh& m, const P1ScalarField& f) {
  Vector r(m.interior_count());
  for (int i = 0; i < m.interior_count(); ++i) r[i] = f.values[m.interior_nodes[static_cast<std::size_t>(i)]];
  return r;
}

inline P1ScalarField extend_interior(const Mesh& m, const Vector& r) {
  P1ScalarField f = P1ScalarField::zeros(m);
  for (int i = 0; i < m.interior_count(); ++i) f.values[m.interior_nodes[static_cast<std::size_t>(i)]] = r[i];
  return f;
}

inline Vector restrict_interior(const Mesh& m, const P1VectorField& f) {
  Vector r(2 * m.interior_count());
  for (int i = 0; i < m.interior_count(); ++i) {
    const int v = m.interior_nodes[static_cast<std::size_t>(i)];
    r[2 * i] = f.values[2 * v];
    r[2 * i + 1] = f.values[2 * v + 1];
  }
  return r;
}

inline P1VectorField extend_interior_vector(const Mesh& m, const Vector& r) {
  P1VectorField f = P1VectorField::zeros(m);
  for (int i = 0; i < m.interior_count(); ++i) {
    const int v = m.interior_nodes[static_cast<std::size_t>(i)];
    f.values[2 * v] = r[2 * i];
    f.values[2 * v + 1] = r[2 * i + 1];
  }
  return f;
}

}  // namespace tvoa

#endif  // TVOA_FIELDS_HPP
