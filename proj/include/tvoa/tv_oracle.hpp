#ifndef TVOA_TV_ORACLE_HPP
#define TVOA_TV_ORACLE_HPP

#include "tvoa/forms.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace tvoa {

/// Multipliers of the nodal constraints |phi(node)|^2 <= 1.
struct BallConstraintState {
  std::vector<int> active_nodes;  // mesh node indices, ascending
  Vector multipliers;             // one per mesh node, zero on inactive and boundary nodes
};

struct OracleResult {
  P1VectorField phi;
  double value = 0.0;   // TV_eps(u) = F_eps(u, phi)
  double energy = 0.0;  // a[phi, phi]
  int inner_iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
  BallConstraintState state;
};

struct OracleOptions {
  int max_inner_iterations = 200;
  double kkt_tolerance = 1e-9;
  double active_set_constant = 1.0;
};

namespace detail {

struct BallKkt {
  double stationarity = 0.0;
  double feasibility = 0.0;
  double dual_sign = 0.0;
  double complementarity = 0.0;
  double max() const { return std::max({stationarity, feasibility, dual_sign, complementarity}); }
};

/// x: interior vector dofs, lambda: one per interior node.
inline BallKkt ball_kkt(const Vector& gradient_of_energy_minus_load, const Vector& x, const Vector& lambda) {
  BallKkt r;
  const Eigen::Index nodes = lambda.size();
  for (Eigen::Index i = 0; i < nodes; ++i) {
    const double px = x[2 * i], py = x[2 * i + 1];
    const double sq = px * px + py * py - 1.0;
    const double l = lambda[i];
    r.stationarity = std::max({r.stationarity, std::abs(gradient_of_energy_minus_load[2 * i] + 2.0 * l * px),
                               std::abs(gradient_of_energy_minus_load[2 * i + 1] + 2.0 * l * py)});
    r.feasibility = std::max(r.feasibility, sq);
    r.dual_sign = std::max(r.dual_sign, -l);
    r.complementarity = std::max(r.complementarity, std::abs(l * sq));
  }
  return r;
}

inline std::vector<char> classify_active(const Vector& x, const Vector& lambda, double c) {
  std::vector<char> active(static_cast<std::size_t>(lambda.size()), 0);
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const double sq = x[2 * i] * x[2 * i] + x[2 * i + 1] * x[2 * i + 1];
    active[static_cast<std::size_t>(i)] = lambda[i] + c * (sq - 1.0) > 0.0 ? 1 : 0;
  }
  return active;
}

}  // namespace detail

/// Evaluates TV_eps(u) = max { F_eps(u, phi) : |phi(node)| <= 1 at every node }
/// by a primal-dual active set iteration on the nodal ball constraints.
///
/// Each step linearizes the stationarity system eps A phi + 2 lambda phi = b
/// around the current active set: on active nodes phi is pinned to the
/// tangent line of the unit circle at phi/|phi|, the tangential component is
/// solved for and the multiplier is recovered from the normal component.
inline OracleResult eval_tv_eps(const P0Field& u, double eps, const Forms& forms,
                                const std::optional<OracleResult>& warm_start = std::nullopt,
                                const OracleOptions& options = {}) {
  if (!(eps > 0.0)) throw std::invalid_argument("eval_tv_eps: eps must be positive");
  const Mesh& mesh = forms.m();
  require_p0(mesh, u, "eval_tv_eps");
  const int nodes = mesh.interior_count();
  const Eigen::Index dofs = 2 * nodes;
  const SparseSymMatrix& a = forms.elasticity.matrix;
  const Vector b = divergence_load(forms, u);

  Vector x = Vector::Zero(dofs);
  Vector lambda = Vector::Zero(nodes);
  if (warm_start) {
    if (warm_start->phi.size() != 2 * mesh.node_count())
      throw std::invalid_argument("eval_tv_eps: warm start on a different mesh");
    x = restrict_interior(mesh, warm_start->phi);
    // multipliers consistent with the new data on the previous contact set
    const Vector g = eps * (a * x) - b;
    for (int i = 0; i < nodes; ++i) {
      const Eigen::Vector2d v(x[2 * i], x[2 * i + 1]);
      if (v.squaredNorm() >= 1.0 - 1e-8) lambda[i] = -0.5 * v.normalized().dot(Eigen::Vector2d(g[2 * i], g[2 * i + 1]));
    }
  }

  const double c = options.active_set_constant;
  std::vector<char> active = detail::classify_active(x, lambda, c);
  OracleResult result;
  detail::BallKkt kkt;
  int iteration = 0;
  bool converged = false;

  while (iteration < options.max_inner_iterations) {
    ++iteration;
    // Rotated frame per active node: (normal, tangent).
    std::vector<Eigen::Vector2d> normal(static_cast<std::size_t>(nodes), Eigen::Vector2d(1.0, 0.0));
    Triplets qt;
    qt.reserve(static_cast<std::size_t>(4 * nodes));
    Vector shift = Vector::Zero(nodes);
    for (int i = 0; i < nodes; ++i) {
      if (active[static_cast<std::size_t>(i)]) {
        Eigen::Vector2d nv(x[2 * i], x[2 * i + 1]);
        const double len = nv.norm();
        nv = len > 0.0 ? Eigen::Vector2d(nv / len) : Eigen::Vector2d(1.0, 0.0);
        normal[static_cast<std::size_t>(i)] = nv;
        qt.emplace_back(2 * i, 2 * i, nv.x());
        qt.emplace_back(2 * i + 1, 2 * i, nv.y());
        qt.emplace_back(2 * i, 2 * i + 1, -nv.y());
        qt.emplace_back(2 * i + 1, 2 * i + 1, nv.x());
        shift[i] = 2.0 * std::max(lambda[i], 0.0);
      } else {
        qt.emplace_back(2 * i, 2 * i, 1.0);
        qt.emplace_back(2 * i + 1, 2 * i + 1, 1.0);
      }
    }
    const SparseMatrix q = from_triplets(dofs, dofs, qt);

    Vector shift_dofs(dofs);
    for (int i = 0; i < nodes; ++i) shift_dofs[2 * i] = shift_dofs[2 * i + 1] = shift[i];
    SparseSymMatrix h = eps * a;
    h += SparseSymMatrix(shift_dofs.asDiagonal());
    const SparseSymMatrix hr = q.transpose() * h * q;

    // Free dofs: everything except the normal component of active nodes (fixed to 1).
    std::vector<int> free_to_dof;
    free_to_dof.reserve(static_cast<std::size_t>(dofs));
    Vector fixed = Vector::Zero(dofs);
    for (int i = 0; i < nodes; ++i) {
      if (active[static_cast<std::size_t>(i)]) {
        fixed[2 * i] = 1.0;
      } else {
        free_to_dof.push_back(2 * i);
      }
      free_to_dof.push_back(2 * i + 1);
    }
    Triplets st;
    st.reserve(free_to_dof.size());
    for (std::size_t k = 0; k < free_to_dof.size(); ++k) st.emplace_back(static_cast<int>(k), free_to_dof[k], 1.0);
    const SparseMatrix sel = from_triplets(static_cast<Eigen::Index>(free_to_dof.size()), dofs, st);

    const Vector rhs = sel * (q.transpose() * b - hr * fixed);
    const Vector z_free = SpdSolver(SparseSymMatrix(sel * hr * sel.transpose())).solve(rhs);
    const Vector z = sel.transpose() * z_free + fixed;
    x = q * z;

    const Vector g = eps * (a * x) - b;
    for (int i = 0; i < nodes; ++i) {
      if (active[static_cast<std::size_t>(i)]) {
        const Eigen::Vector2d& nv = normal[static_cast<std::size_t>(i)];
        lambda[i] = -0.5 * (nv.x() * g[2 * i] + nv.y() * g[2 * i + 1]);
      } else {
        lambda[i] = 0.0;
      }
    }

    kkt = detail::ball_kkt(g, x, lambda);
    std::vector<char> next = detail::classify_active(x, lambda, c);
    const bool repeated = next == active;
    active = std::move(next);
    if (repeated && kkt.max() <= options.kkt_tolerance) {
      converged = true;
      break;
    }
  }

  if (iteration == 0) {
    const Vector g = eps * (a * x) - b;
    kkt = detail::ball_kkt(g, x, lambda);
    converged = kkt.max() <= options.kkt_tolerance;
  }

  result.phi = extend_interior_vector(mesh, x);
  result.energy = x.dot(a * x);
  result.value = -0.5 * eps * result.energy + b.dot(x);
  result.inner_iterations = iteration;
  result.converged = converged;
  result.kkt_residual = kkt.max();
  result.state.multipliers = extend_interior(mesh, lambda).values;
  for (int i = 0; i < nodes; ++i) {
    const double sq = x[2 * i] * x[2 * i] + x[2 * i + 1] * x[2 * i + 1];
    // ties |phi| = 1 with zero multiplier count as inactive
    if (lambda[i] + c * (sq - 1.0) > 0.0)
      result.state.active_nodes.push_back(mesh.interior_nodes[static_cast<std::size_t>(i)]);
  }
  std::sort(result.state.active_nodes.begin(), result.state.active_nodes.end());
  return result;
}

/// Total variation of a piecewise constant function: sum over interior edges
/// of edge length times the jump.
inline double discrete_tv(const P0Field& u, const Mesh& mesh) {
  require_p0(mesh, u, "discrete_tv");
  double tv = 0.0;
  for (const auto& e : mesh.interior_edges) tv += e.length * std::abs(u.values[e.left] - u.values[e.right]);
  return tv;
}

/// TV(u) >= int u div(phi) dx = TV_eps(u) + (eps/2) a[phi, phi].
inline double tv_lower_bound(const OracleResult& result, double eps) {
  if (!result.converged) throw std::invalid_argument("tv_lower_bound: oracle result did not converge");
  return result.value + 0.5 * eps * result.energy;
}

}  // namespace tvoa

#endif  // TVOA_TV_ORACLE_HPP
