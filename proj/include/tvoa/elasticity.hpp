#ifndef TVOA_ELASTICITY_HPP
#define TVOA_ELASTICITY_HPP

#include "tvoa/fem.hpp"

#include <stdexcept>

namespace tvoa {

/// Isotropic linear elasticity form a[phi, psi] = int sym(grad phi) : C sym(grad psi)
/// with C e = 2 mu e + lambda tr(e) I, on Dirichlet-reduced vector P1 fields.
struct ElasticityForm {
  double E = 0.0;
  double nu = 0.0;
  double mu = 0.0;
  double lambda = 0.0;
  SparseSymMatrix matrix;  // interior dofs, interleaved (x, y) per interior node
};

inline double lame_mu(double E, double nu) { return E / (2.0 * (1.0 + nu)); }
inline double lame_lambda(double E, double nu) { return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)); }

/// Elasticity matrix on all vector dofs (no boundary conditions).
inline SparseSymMatrix assemble_elasticity_full(const Mesh& m, double mu, double lambda) {
  Triplets t;
  t.reserve(36 * m.triangles.size());
  Eigen::Matrix3d d;
  d << lambda + 2.0 * mu, lambda, 0.0, lambda, lambda + 2.0 * mu, 0.0, 0.0, 0.0, mu;
  for (int c = 0; c < m.cell_count(); ++c) {
    const auto& tri = m.triangles[static_cast<std::size_t>(c)];
    const auto& g = m.basis_gradients[static_cast<std::size_t>(c)];
    // Voigt strain (e11, e22, 2 e12)
    Eigen::Matrix<double, 3, 6> b = Eigen::Matrix<double, 3, 6>::Zero();
    for (int a = 0; a < 3; ++a) {
      b(0, 2 * a) = g[a].x();
      b(1, 2 * a + 1) = g[a].y();
      b(2, 2 * a) = g[a].y();
      b(2, 2 * a + 1) = g[a].x();
    }
    const Eigen::Matrix<double, 6, 6> k = m.cell_areas[static_cast<std::size_t>(c)] * b.transpose() * d * b;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) t.emplace_back(2 * tri[i / 2] + i % 2, 2 * tri[j / 2] + j % 2, k(i, j));
  }
  return from_triplets(2 * m.node_count(), 2 * m.node_count(), t);
}

inline ElasticityForm assemble_elasticity(const Mesh& m, double E, double nu) {
  if (!(nu > 0.0 && nu < 0.5)) throw std::invalid_argument("assemble_elasticity: nu must lie in (0, 0.5)");
  if (!(E > 0.0)) throw std::invalid_argument("assemble_elasticity: E must be positive");
  ElasticityForm form;
  form.E = E;
  form.nu = nu;
  form.mu = lame_mu(E, nu);
  form.lambda = lame_lambda(E, nu);
  form.matrix = reduce_dirichlet(m, assemble_elasticity_full(m, form.mu, form.lambda), 2);
  return form;
}

}  // namespace tvoa

#endif  // TVOA_ELASTICITY_HPP
