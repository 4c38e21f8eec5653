#ifndef TVOA_MASTER_PROBLEM_HPP
#define TVOA_MASTER_PROBLEM_HPP

#include "tvoa/forms.hpp"
#include "tvoa/instances.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace tvoa {

/// Linear constraint int u div(phi) dx <= 1 + (eps/2) a[phi, phi], i.e.
/// F_eps(u, phi) <= 1, with eps supplied when the constraint is evaluated.
struct CuttingPlane {
  P1VectorField phi;
  P0Field div_phi;
  double energy = 0.0;
  int id = 0;
};

inline CuttingPlane make_cutting_plane(const Forms& forms, P1VectorField phi, int id) {
  CuttingPlane plane;
  plane.div_phi = divergence_p1_to_p0(forms.m(), phi);
  plane.energy = elastic_energy(forms, phi);
  plane.phi = std::move(phi);
  plane.id = id;
  return plane;
}

inline double plane_rhs(const CuttingPlane& plane, double eps) { return 1.0 + 0.5 * eps * plane.energy; }

/// 1 + (eps/2) a[phi, phi] - int u div(phi) dx; nonnegative iff u satisfies the plane.
inline double plane_slack(const Mesh& mesh, const CuttingPlane& plane, const P0Field& u, double eps) {
  return plane_rhs(plane, eps) - inner_p0(mesh, u, plane.div_phi);
}

struct MasterSolution {
  P0Field u;
  P1ScalarField y;
  P1ScalarField p;
  std::vector<double> mu;         // one per plane, in the order of the plane list
  std::vector<int> active_planes;  // plane ids
  double objective = 0.0;
  int inner_iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;     // stationarity, state/adjoint equations, primal and dual feasibility
  double complementarity = 0.0;  // max |mu_i * slack_i|
};

struct MasterOptions {
  int max_iterations = 100;
  double kkt_tolerance = 1e-8;
  double active_set_constant = 1.0;
};

/// Relaxed problem with finitely many cutting planes,
///   min 1/2 |y - y_d|^2 + alpha/2 |u - u_d|^2  s.t.  K y = B (u + f),  plane constraints,
/// solved by a primal-dual active set method over the plane multipliers.
///
/// The control is eliminated through the gradient equation
///   alpha (u - u_d) + P0(p) + sum mu_i div(phi_i) = 0,
/// which leaves a symmetric quasi-definite system in (y, p) bordered by one
/// column per active plane. The (y, p) block does not depend on the planes or
/// on eps and is factorized once.
///
/// Not thread-safe: per-plane base solves are cached inside the object.
class MasterProblem {
public:
  MasterProblem(ProblemInstance instance, std::shared_ptr<const Forms> forms)
      : inst_(std::move(instance)), forms_(std::move(forms)) {
    validate(inst_);
    if (forms_->m().n != inst_.mesh->n)
      throw std::invalid_argument("MasterProblem: instance and forms use different meshes");
    const Forms& f = *forms_;
    const Eigen::Index n = f.m().interior_count();
    const double alpha = inst_.alpha;

    const SparseMatrix inv_areas_bt = f.cell_areas.cwiseInverse().asDiagonal() * SparseMatrix(f.coupling.transpose());
    const SparseSymMatrix bmb = f.coupling * inv_areas_bt;
    const SparseSymMatrix m_ii = f.mass_p1_interior_rows * interior_selection(f.m()).transpose();

    Triplets t;
    t.reserve(static_cast<std::size_t>(m_ii.nonZeros() + 2 * f.stiffness.nonZeros() + bmb.nonZeros()));
    const auto append = [&t](const SparseMatrix& blk, Eigen::Index r0, Eigen::Index c0, double s) {
      for (int k = 0; k < blk.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(blk, k); it; ++it)
          t.emplace_back(static_cast<int>(it.row() + r0), static_cast<int>(it.col() + c0), s * it.value());
    };
    append(m_ii, 0, 0, 1.0);
    append(f.stiffness, 0, n, -1.0);
    append(f.stiffness, n, 0, -1.0);
    append(bmb, n, n, -1.0 / alpha);
    base_ = SymmetricSolver(from_triplets(2 * n, 2 * n, t));

    Vector rhs(2 * n);
    rhs.head(n) = f.mass_p1_interior_rows * inst_.y_d.values;
    rhs.tail(n) = -(f.coupling * (inst_.u_d.values + inst_.f.values));
    base_solution_ = base_.solve(rhs);
  }

  const ProblemInstance& instance() const { return inst_; }
  const Forms& forms() const { return *forms_; }

  MasterSolution solve(const std::vector<CuttingPlane>& planes, double eps,
                       const std::optional<MasterSolution>& warm_start = std::nullopt,
                       const MasterOptions& options = {}) const {
    if (!(eps > 0.0)) throw std::invalid_argument("solve_master: eps must be positive");
    const Mesh& mesh = forms_->m();
    for (const auto& pl : planes) require_p0(mesh, pl.div_phi, "solve_master");
    const std::size_t k = planes.size();

    std::vector<char> active(k, 0);
    if (warm_start) {
      for (std::size_t i = 0; i < k; ++i)
        active[i] = std::find(warm_start->active_planes.begin(), warm_start->active_planes.end(), planes[i].id) !=
                            warm_start->active_planes.end()
                        ? 1
                        : 0;
    }

    std::vector<double> rhs(k), gud(k);
    for (std::size_t i = 0; i < k; ++i) {
      rhs[i] = plane_rhs(planes[i], eps);
      gud[i] = inner_p0(mesh, inst_.u_d, planes[i].div_phi);
    }

    MasterSolution sol;
    const double c = options.active_set_constant;
    int iteration = 0;
    while (iteration < options.max_iterations) {
      ++iteration;
      sol = solve_with_active_set(planes, active, rhs, gud);
      std::vector<char> next(k, 0);
      for (std::size_t i = 0; i < k; ++i) {
        const double slack = rhs[i] - inner_p0(mesh, sol.u, planes[i].div_phi);
        next[i] = sol.mu[i] - c * slack > 0.0 ? 1 : 0;
      }
      if (next == active) {
        sol.converged = true;
        break;
      }
      active = std::move(next);
    }
    sol.inner_iterations = iteration;
    certify(planes, eps, sol);
    sol.converged = sol.converged && sol.kkt_residual <= options.kkt_tolerance &&
                    sol.complementarity <= options.kkt_tolerance;
    return sol;
  }

  /// J(u) with the state obtained from a fresh Poisson solve.
  double objective(const P0Field& u) const {
    const P1ScalarField y = solve_poisson_p0(*forms_, P0Field(u.values + inst_.f.values));
    return objective(u, y);
  }

  double objective(const P0Field& u, const P1ScalarField& y) const {
    const Vector dy = y.values - inst_.y_d.values;
    const Vector du = u.values - inst_.u_d.values;
    return 0.5 * dy.dot(forms_->mass_p1 * dy) + 0.5 * inst_.alpha * forms_->cell_areas.dot(du.cwiseAbs2());
  }

  /// L2 representative of J'(u): alpha (u - u_d) + P0(p), p the adjoint state.
  P0Field reduced_gradient(const P0Field& u) const {
    const Forms& f = *forms_;
    const P1ScalarField y = solve_poisson_p0(f, P0Field(u.values + inst_.f.values));
    const Vector p = f.poisson.solve(f.mass_p1_interior_rows * (y.values - inst_.y_d.values));
    return P0Field(inst_.alpha * (u.values - inst_.u_d.values) +
                   p1_cell_average(f.m(), extend_interior(f.m(), p)).values);
  }

private:
  const Vector& plane_column(const CuttingPlane& plane) const {
    auto it = cache_.find(plane.id);
    if (it != cache_.end() && it->second.div == plane.div_phi.values) return it->second.solution;
    const Forms& f = *forms_;
    const Eigen::Index n = f.m().interior_count();
    Vector w = Vector::Zero(2 * n);
    w.tail(n) = -(f.coupling * plane.div_phi.values) / inst_.alpha;
    CachedPlane entry{plane.div_phi.values, w, base_.solve(w)};
    return (cache_[plane.id] = std::move(entry)).solution;
  }

  MasterSolution solve_with_active_set(const std::vector<CuttingPlane>& planes, const std::vector<char>& active,
                                       const std::vector<double>& rhs, const std::vector<double>& gud) const {
    const Forms& f = *forms_;
    const Mesh& mesh = f.m();
    const Eigen::Index n = mesh.interior_count();
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < planes.size(); ++i)
      if (active[i]) idx.push_back(i);
    const auto m = static_cast<Eigen::Index>(idx.size());

    DenseMatrix border(2 * n, m), z(2 * n, m), corner(m, m);
    Vector rhs_border(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      const CuttingPlane& pa = planes[idx[static_cast<std::size_t>(a)]];
      z.col(a) = plane_column(pa);
      border.col(a) = cache_.at(pa.id).column;
      rhs_border[a] = rhs[idx[static_cast<std::size_t>(a)]] - gud[idx[static_cast<std::size_t>(a)]];
      for (Eigen::Index b = 0; b < m; ++b)
        corner(a, b) = -inner_p0(mesh, pa.div_phi, planes[idx[static_cast<std::size_t>(b)]].div_phi) / inst_.alpha;
    }

    BorderedSolution bs;
    try {
      bs = solve_bordered_eliminated(base_solution_, z, border, corner, rhs_border);
    } catch (const SingularSchurError&) {
      std::ostringstream msg;
      msg << "solve_master: singular bordered system for active plane ids";
      for (auto i : idx) msg << ' ' << planes[i].id;
      throw SingularSchurError(msg.str());
    }

    MasterSolution sol;
    sol.y = extend_interior(mesh, bs.primal.head(n));
    sol.p = extend_interior(mesh, bs.primal.tail(n));
    sol.mu.assign(planes.size(), 0.0);
    Vector shift = p1_cell_average(mesh, sol.p).values;
    for (Eigen::Index a = 0; a < m; ++a) {
      const std::size_t i = idx[static_cast<std::size_t>(a)];
      sol.mu[i] = bs.multipliers[a];
      shift += bs.multipliers[a] * planes[i].div_phi.values;
      sol.active_planes.push_back(planes[i].id);
    }
    sol.u = P0Field(inst_.u_d.values - shift / inst_.alpha);
    sol.objective = objective(sol.u, sol.y);
    return sol;
  }

  void certify(const std::vector<CuttingPlane>& planes, double eps, MasterSolution& sol) const {
    const Forms& f = *forms_;
    const Mesh& mesh = f.m();
    Vector grad = inst_.alpha * (sol.u.values - inst_.u_d.values) + p1_cell_average(mesh, sol.p).values;
    double primal = 0.0, dual = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < planes.size(); ++i) {
      grad += sol.mu[i] * planes[i].div_phi.values;
      const double slack = plane_slack(mesh, planes[i], sol.u, eps);
      primal = std::max(primal, -slack);
      dual = std::max(dual, -sol.mu[i]);
      comp = std::max(comp, std::abs(sol.mu[i] * slack));
    }
    const Vector yi = restrict_interior(mesh, sol.y);
    const Vector pi = restrict_interior(mesh, sol.p);
    const double state = max_abs(f.stiffness * yi - f.coupling * (sol.u.values + inst_.f.values));
    const double adjoint = max_abs(f.stiffness * pi - f.mass_p1_interior_rows * (sol.y.values - inst_.y_d.values));
    sol.kkt_residual = std::max({max_abs(grad), state, adjoint, primal, dual});
    sol.complementarity = comp;
  }

  struct CachedPlane {
    Vector div;
    Vector column;
    Vector solution;
  };

  ProblemInstance inst_;
  std::shared_ptr<const Forms> forms_;
  SymmetricSolver base_;
  Vector base_solution_;
  mutable std::map<int, CachedPlane> cache_;
};

/// One-shot convenience wrapper around MasterProblem.
inline MasterSolution solve_master(const std::vector<CuttingPlane>& planes, const ProblemInstance& instance,
                                   std::shared_ptr<const Forms> forms, double eps, double alpha,
                                   const std::optional<MasterSolution>& warm_start = std::nullopt,
                                   const MasterOptions& options = {}) {
  ProblemInstance inst = instance;
  inst.alpha = alpha;
  return MasterProblem(std::move(inst), std::move(forms)).solve(planes, eps, warm_start, options);
}

}  // namespace tvoa

#endif  // TVOA_MASTER_PROBLEM_HPP
