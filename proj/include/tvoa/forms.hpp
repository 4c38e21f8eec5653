#ifndef TVOA_FORMS_HPP
#define TVOA_FORMS_HPP

#include "tvoa/elasticity.hpp"
#include "tvoa/fem.hpp"

#include <memory>

namespace tvoa {

inline constexpr double kDefaultElasticityModulus = 2900.0;
inline constexpr double kDefaultPoissonRatio = 0.4;

/// All discrete operators on one mesh used by the solvers.
struct Forms {
  std::shared_ptr<const Mesh> mesh;
  SparseSymMatrix stiffness;          // -Laplace, interior x interior
  SpdSolver poisson;                  // factorization of `stiffness`
  SparseSymMatrix mass_p1;            // all nodes
  SparseMatrix mass_p1_interior_rows;  // interior x all nodes
  Vector cell_areas;
  SparseMatrix coupling;    // interior nodes x cells: P0 -> P1 load
  SparseMatrix divergence;  // cells x interior vector dofs
  ElasticityForm elasticity;

  const Mesh& m() const { return *mesh; }
};

inline std::shared_ptr<const Forms> build_forms(std::shared_ptr<const Mesh> mesh,
                                                double E = kDefaultElasticityModulus,
                                                double nu = kDefaultPoissonRatio) {
  auto f = std::make_shared<Forms>();
  const Mesh& m = *mesh;
  f->mesh = std::move(mesh);
  f->stiffness = assemble_stiffness(m);
  f->poisson = SpdSolver(f->stiffness);
  f->mass_p1 = assemble_mass_p1_full(m);
  f->mass_p1_interior_rows = interior_selection(m) * f->mass_p1;
  f->cell_areas = Eigen::Map<const Vector>(m.cell_areas.data(), m.cell_count());
  f->coupling = interior_selection(m) * assemble_p0_p1_coupling(m);
  f->coupling.makeCompressed();
  f->divergence = assemble_divergence(m);
  f->elasticity = assemble_elasticity(m, E, nu);
  return f;
}

/// Solves -Laplace y = load (P0 right-hand side), y = 0 on the boundary.
inline P1ScalarField solve_poisson_p0(const Forms& f, const P0Field& load) {
  require_p0(f.m(), load, "solve_poisson_p0");
  return extend_interior(f.m(), f.poisson.solve(f.coupling * load.values));
}

/// Linear functional b with b . phi = int u div(phi) dx on interior vector dofs.
inline Vector divergence_load(const Forms& f, const P0Field& u) {
  require_p0(f.m(), u, "divergence_load");
  return f.divergence.transpose() * f.cell_areas.cwiseProduct(u.values);
}

/// a[phi, phi] for a field given on all nodes.
inline double elastic_energy(const Forms& f, const P1VectorField& phi) {
  const Vector r = restrict_interior(f.m(), phi);
  return r.dot(f.elasticity.matrix * r);
}

/// F_eps(u, phi) = -(eps/2) a[phi, phi] + int u div(phi) dx.
inline double dual_objective(const Forms& f, const P0Field& u, const P1VectorField& phi, double eps) {
  const Vector r = restrict_interior(f.m(), phi);
  return -0.5 * eps * r.dot(f.elasticity.matrix * r) + divergence_load(f, u).dot(r);
}

}  // namespace tvoa

#endif  // TVOA_FORMS_HPP
