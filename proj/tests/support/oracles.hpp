// Reference implementations used only by the tests: brute-force solvers that
// share no code path with the library solvers they check.
#ifndef TVOA_TESTS_ORACLES_HPP
#define TVOA_TESTS_ORACLES_HPP

#include "tvoa/tvoa.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace tvoa::testing {

inline P0Field random_p0(const Mesh& m, std::mt19937& rng, double amplitude = 1.0) {
  std::uniform_real_distribution<double> uni(-amplitude, amplitude);
  P0Field u = P0Field::zeros(m);
  for (auto& v : u.values) v = uni(rng);
  return u;
}

inline P1ScalarField random_p1(const Mesh& m, std::mt19937& rng, double amplitude = 1.0) {
  std::uniform_real_distribution<double> uni(-amplitude, amplitude);
  P1ScalarField y = P1ScalarField::zeros(m);
  for (auto& v : y.values) v = uni(rng);
  return y;
}

/// Random interior field with every nodal vector inside the closed unit disc.
inline P1VectorField random_feasible_dual(const Mesh& m, std::mt19937& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Vector r(2 * m.interior_count());
  for (int i = 0; i < m.interior_count(); ++i) {
    const double rad = std::sqrt(uni(rng)), ang = 2.0 * 3.141592653589793 * uni(rng);
    r[2 * i] = rad * std::cos(ang);
    r[2 * i + 1] = rad * std::sin(ang);
  }
  return extend_interior_vector(m, r);
}

struct AscentResult {
  Vector phi;  // interior dofs
  double value = 0.0;
};

/// Projected gradient ascent for max -eps/2 x'Ax + b'x over nodal unit discs,
/// fixed step 1/L with L the Gershgorin bound of eps A.
inline AscentResult projected_gradient_ascent(const P0Field& u, double eps, const Forms& forms,
                                              int iterations = 100000) {
  const SparseSymMatrix& a = forms.elasticity.matrix;
  const Mesh& m = forms.m();
  Vector b = Vector::Zero(a.rows());
  // b_j = int u div(e_j) = sum over cells of area * u * (div e_j)
  const SparseMatrix div = assemble_divergence(m);
  for (int k = 0; k < div.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(div, k); it; ++it)
      b[it.col()] += m.cell_areas[static_cast<std::size_t>(it.row())] * u.values[it.row()] * it.value();
  double lip = 0.0;
  for (int k = 0; k < a.outerSize(); ++k) {
    double s = 0.0;
    for (SparseSymMatrix::InnerIterator it(a, k); it; ++it) s += std::abs(it.value());
    lip = std::max(lip, eps * s);
  }
  Vector x = Vector::Zero(a.rows());
  for (int it = 0; it < iterations; ++it) {
    x += (b - eps * (a * x)) / lip;
    for (Eigen::Index i = 0; i < x.size() / 2; ++i) {
      const double nrm = std::hypot(x[2 * i], x[2 * i + 1]);
      if (nrm > 1.0) x.segment<2>(2 * i) /= nrm;
    }
  }
  AscentResult r;
  r.phi = x;
  r.value = -0.5 * eps * x.dot(a * x) + b.dot(x);
  return r;
}

/// Gaussian elimination with partial pivoting.
inline Vector dense_gauss_solve(DenseMatrix a, Vector b) {
  const Eigen::Index n = b.size();
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index piv = k;
    for (Eigen::Index i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    a.row(k).swap(a.row(piv));
    std::swap(b[k], b[piv]);
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      a.row(i).tail(n - k) -= f * a.row(k).tail(n - k);
      b[i] -= f * b[k];
    }
  }
  Vector x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) x[i] = (b[i] - a.row(i).tail(n - i - 1).dot(x.tail(n - i - 1))) / a(i, i);
  return x;
}

struct DenseQpSolution {
  Vector u;
  Vector mu;
  double objective = 0.0;
};

/// Reduced dense QP in u with the listed planes imposed as equalities:
/// y = K^{-1} C (u + f) eliminated explicitly, KKT system solved by dense
/// elimination.
inline DenseQpSolution dense_master_oracle(const ProblemInstance& inst, const std::vector<CuttingPlane>& planes,
                                           double eps) {
  const Mesh& m = *inst.mesh;
  const auto nc = static_cast<Eigen::Index>(m.cell_count());
  const DenseMatrix k = DenseMatrix(assemble_stiffness(m));
  const DenseMatrix c = DenseMatrix(interior_selection(m) * assemble_p0_p1_coupling(m));
  const DenseMatrix mass = DenseMatrix(assemble_mass_p1_full(m));
  const DenseMatrix ext = DenseMatrix(interior_selection(m)).transpose();
  DenseMatrix s(k.rows(), nc);
  for (Eigen::Index j = 0; j < nc; ++j) s.col(j) = dense_gauss_solve(k, c.col(j));
  const Vector areas = Eigen::Map<const Vector>(m.cell_areas.data(), nc);

  // J(u) = 1/2 |E S u + E S f - y_d|_M^2 + alpha/2 |u - u_d|_{M0}^2
  const DenseMatrix es = ext * s;
  const Vector r0 = es * inst.f.values - inst.y_d.values;
  const DenseMatrix h = es.transpose() * mass * es + DenseMatrix(inst.alpha * areas.asDiagonal());
  const Vector g = -(es.transpose() * mass * r0) + inst.alpha * areas.cwiseProduct(inst.u_d.values);

  const auto np = static_cast<Eigen::Index>(planes.size());
  DenseMatrix kkt = DenseMatrix::Zero(nc + np, nc + np);
  Vector rhs(nc + np);
  kkt.topLeftCorner(nc, nc) = h;
  rhs.head(nc) = g;
  for (Eigen::Index i = 0; i < np; ++i) {
    const Vector row = areas.cwiseProduct(planes[static_cast<std::size_t>(i)].div_phi.values);
    kkt.block(0, nc + i, nc, 1) = row;
    kkt.block(nc + i, 0, 1, nc) = row.transpose();
    rhs[nc + i] = 1.0 + 0.5 * eps * planes[static_cast<std::size_t>(i)].energy;
  }
  const Vector sol = dense_gauss_solve(kkt, rhs);
  DenseQpSolution out;
  out.u = sol.head(nc);
  out.mu = sol.tail(np);
  const Vector r = es * out.u + r0;
  const Vector du = out.u - inst.u_d.values;
  out.objective = 0.5 * r.dot(mass * r) + 0.5 * inst.alpha * areas.dot(du.cwiseAbs2());
  return out;
}

/// Plane through the interior dofs along the oracle load of `u`, scaled so
/// that u violates it with int u div(phi) = 3.
inline CuttingPlane violating_plane(const Forms& f, const P0Field& u, int id, double scale = 3.0) {
  const Vector b = divergence_load(f, u);
  return make_cutting_plane(f, extend_interior_vector(f.m(), scale * b / b.squaredNorm()), id);
}

/// Perturbed oracle maximizer t*phi with F_eps(u, t*phi) = level, i.e. the
/// plane is violated by u iff level > 1.
inline CuttingPlane plane_at_level(const Forms& f, const P0Field& u, std::mt19937& rng, int id, double level, double eps) {
  P1VectorField phi = eval_tv_eps(u, eps, f).phi;
  phi.values += 0.3 * random_feasible_dual(f.m(), rng).values;
  double c = inner_p0(f.m(), u, divergence_p1_to_p0(f.m(), phi));
  if (c < 0.0) {
    phi.values = -phi.values;
    c = -c;
  }
  const double q = eps * elastic_energy(f, phi);
  const double disc = c * c - 2.0 * q * level;
  if (disc < 0.0) throw std::runtime_error("plane_at_level: level not attainable");
  phi.values *= (c - std::sqrt(disc)) / q;
  return make_cutting_plane(f, std::move(phi), id);
}

/// Synthetic instance with random data on a given mesh.
inline ProblemInstance random_instance(std::shared_ptr<const Mesh> mesh, std::mt19937& rng, double alpha = 1.0) {
  ProblemInstance inst;
  inst.alpha = alpha;
  inst.f = random_p0(*mesh, rng);
  inst.u_d = random_p0(*mesh, rng, 3.0);
  inst.y_d = random_p1(*mesh, rng);
  inst.label = "random";
  inst.mesh = std::move(mesh);
  return inst;
}

}  // namespace tvoa::testing

#endif  // TVOA_TESTS_ORACLES_HPP
