#ifndef TVOA_INSTANCES_HPP
#define TVOA_INSTANCES_HPP

#include "tvoa/fem.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

namespace tvoa {

/// Data of the tracking-type control problem
///   min 1/2 |y - y_d|^2 + alpha/2 |u - u_d|^2,  -Laplace y = u + f,  TV(u) <= 1.
struct ProblemInstance {
  std::shared_ptr<const Mesh> mesh;
  double alpha = 1.0;
  P0Field f;
  P0Field u_d;
  P1ScalarField y_d;
  std::optional<P0Field> reference_u;
  std::string label;
};

inline void validate(const ProblemInstance& inst) {
  if (!inst.mesh) throw std::invalid_argument("ProblemInstance: missing mesh");
  if (!(inst.alpha > 0.0)) throw std::invalid_argument("ProblemInstance: alpha must be positive");
  const Mesh& m = *inst.mesh;
  if (inst.f.size() != m.cell_count() || inst.u_d.size() != m.cell_count() || inst.y_d.size() != m.node_count() ||
      (inst.reference_u && inst.reference_u->size() != m.cell_count()))
    throw std::invalid_argument("ProblemInstance: fields live on different meshes");
}

// ---------------------------------------------------------------------------
// Instance with known optimal control: the indicator of a disc scaled by the
// reciprocal of its perimeter.

namespace exact {

inline constexpr double kPi = boost::math::constants::pi<double>();
inline constexpr double kRadius = 0.25;
inline constexpr double kInner = 3.0 / 16.0;
inline constexpr double kOuter = 5.0 / 16.0;
inline constexpr double kPerimeter = 2.0 * kPi * kRadius;
inline const Point kCenter(0.5, 0.5);

/// C^1 bump on (3/16, 5/16) with peak value 1 at r = 1/4.
inline double psi(double r) {
  if (r >= kInner && r <= kRadius) return ((-8192.0 * r + 5376.0) * r - 1152.0) * r + 81.0;
  if (r > kRadius && r <= kOuter) return ((8192.0 * r - 6912.0) * r + 1920.0) * r - 175.0;
  return 0.0;
}

inline double psi_prime(double r) {
  if (r >= kInner && r <= kRadius) return (-24576.0 * r + 10752.0) * r - 1152.0;
  if (r > kRadius && r <= kOuter) return (24576.0 * r - 13824.0) * r + 1920.0;
  return 0.0;
}

inline double control(const Point& x) { return (x - kCenter).norm() < kRadius ? 1.0 / kPerimeter : 0.0; }

/// y = p = 0.1 sin(2 pi x1) sin(2 pi x2)
inline double state(const Point& x) { return 0.1 * std::sin(2.0 * kPi * x.x()) * std::sin(2.0 * kPi * x.y()); }

/// -Laplace of `state`.
inline double minus_laplace_state(const Point& x) {
  return 0.8 * kPi * kPi * std::sin(2.0 * kPi * x.x()) * std::sin(2.0 * kPi * x.y());
}

/// Radial dual field -s psi(rho) (x - c)/rho on the annulus 3/16 < rho < 5/16.
inline Point multiplier_field(const Point& x, double s) {
  const Point d = x - kCenter;
  const double rho = d.norm();
  if (!(rho > kInner && rho < kOuter)) return Point::Zero();
  return -s * psi(rho) * d / rho;
}

/// div of multiplier_field: -s (psi'(rho) + psi(rho)/rho).
inline double multiplier_divergence(const Point& x, double s) {
  const double rho = (x - kCenter).norm();
  if (!(rho > kInner && rho < kOuter)) return 0.0;
  return -s * (psi_prime(rho) + psi(rho) / rho);
}

}  // namespace exact

/// Projected pieces of the optimality system of the exact instance.
struct ExactSolutionPieces {
  P0Field control;                 // u-bar
  P0Field adjoint;                 // p-bar projected to P0
  P0Field multiplier_divergence;   // div Phi-bar projected to P0
};

inline ExactSolutionPieces exact_solution_pieces(const Mesh& mesh, double s = 0.01, int depth = 4) {
  ExactSolutionPieces p;
  p.control = project_p0(exact::control, mesh, depth);
  p.adjoint = project_p0(exact::state, mesh, depth);
  p.multiplier_divergence = project_p0([s](const Point& x) { return exact::multiplier_divergence(x, s); }, mesh, depth);
  return p;
}

inline ProblemInstance build_exact_instance(std::shared_ptr<const Mesh> mesh, double s = 0.01, double alpha = 1.0,
                                            int depth = 4) {
  if (!(alpha > 0.0)) throw std::invalid_argument("build_exact_instance: alpha must be positive");
  const Mesh& m = *mesh;
  const ExactSolutionPieces pieces = exact_solution_pieces(m, s, depth);
  ProblemInstance inst;
  inst.alpha = alpha;
  inst.label = "exact";
  inst.f = P0Field(project_p0(exact::minus_laplace_state, m, depth).values - pieces.control.values);
  inst.y_d = interpolate_p1(
      [](const Point& x) { return exact::state(x) - exact::minus_laplace_state(x); }, m);
  inst.u_d = P0Field(pieces.control.values + (pieces.adjoint.values - pieces.multiplier_divergence.values) / alpha);
  inst.reference_u = pieces.control;
  inst.mesh = std::move(mesh);
  return inst;
}

// ---------------------------------------------------------------------------
// Instance without known solution: u_d = c 2 pi^2 sin(pi x1) cos(pi x2) with
// TV(u_d) = 2.

namespace generic {

inline constexpr double kPi = boost::math::constants::pi<double>();

inline double profile(const Point& x) { return 2.0 * kPi * kPi * std::sin(kPi * x.x()) * std::cos(kPi * x.y()); }

inline double profile_gradient_norm(double x1, double x2) {
  const double gx = std::cos(kPi * x1) * std::cos(kPi * x2);
  const double gy = std::sin(kPi * x1) * std::sin(kPi * x2);
  return 2.0 * kPi * kPi * kPi * std::sqrt(gx * gx + gy * gy);
}

/// TV of `profile` = int |grad profile| dx, by nested adaptive Gauss-Kronrod
/// quadrature over [0, 1/2]^2 (the integrand has the symmetry of that quarter).
inline double profile_total_variation() {
  using boost::math::quadrature::gauss_kronrod;
  const auto inner = [](double x1) {
    return gauss_kronrod<double, 31>::integrate([x1](double x2) { return profile_gradient_norm(x1, x2); }, 0.0, 0.5,
                                                 15, 1e-11);
  };
  return 4.0 * gauss_kronrod<double, 31>::integrate(inner, 0.0, 0.5, 15, 1e-11);
}

}  // namespace generic

inline ProblemInstance build_generic_instance(std::shared_ptr<const Mesh> mesh, double alpha = 1.0, int depth = 4) {
  if (!(alpha > 0.0)) throw std::invalid_argument("build_generic_instance: alpha must be positive");
  const Mesh& m = *mesh;
  const double scale = 2.0 / generic::profile_total_variation();
  ProblemInstance inst;
  inst.alpha = alpha;
  inst.label = "generic";
  inst.f = P0Field::zeros(m);
  inst.u_d = P0Field(scale * project_p0(generic::profile, m, depth).values);
  // desired state is data, not a Dirichlet field: no boundary forcing
  inst.y_d = interpolate_p1(
      [scale](const Point& x) { return scale * std::sin(generic::kPi * x.x()) * std::cos(generic::kPi * x.y()); }, m);
  inst.mesh = std::move(mesh);
  return inst;
}

}  // namespace tvoa

#endif  // TVOA_INSTANCES_HPP
