#ifndef TVOA_DRIVER_HPP
#define TVOA_DRIVER_HPP

#include "tvoa/master_problem.hpp"
#include "tvoa/tv_oracle.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tvoa {

struct SolverConfig {
  double eps_start = 1e-5;
  double eps_factor = 0.5;
  double eps_min = 7.8e-8;
  /// A reduced eps within this relative distance above eps_min snaps to eps_min.
  double eps_snap = 0.05;
  double tol = 1e-2;
  double alpha = 1.0;
  int n = 50;
  int max_outer = 50;
  int subdivision_depth = 4;
  bool warm_start = true;
  OracleOptions oracle;
  MasterOptions master;
};

inline void validate(const SolverConfig& c) {
  if (!(c.eps_factor > 0.0 && c.eps_factor < 1.0)) throw std::invalid_argument("eps_factor must lie in (0, 1)");
  if (!(c.eps_min > 0.0)) throw std::invalid_argument("eps_min must be positive");
  if (!(c.eps_min <= c.eps_start)) throw std::invalid_argument("eps_min must not exceed eps_start");
  if (!(c.eps_snap >= 0.0)) throw std::invalid_argument("eps_snap must be nonnegative");
  if (!(c.tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (!(c.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (c.n < 1) throw std::invalid_argument("n must be >= 1");
  if (c.max_outer < 1) throw std::invalid_argument("max_outer must be >= 1");
  if (c.subdivision_depth < 0) throw std::invalid_argument("subdivision depth must be >= 0");
}

/// Next value on the geometric eps path.
inline double next_eps(double eps, const SolverConfig& c) {
  const double e = eps * c.eps_factor;
  return e <= c.eps_min * (1.0 + c.eps_snap) ? c.eps_min : e;
}

struct IterationRecord {
  int k = 0;
  double eps = 0.0;
  double objective = 0.0;
  int it_master = 0;
  int it_oracle = 0;
  double tv_eps = 0.0;
  double tv_lower_bound = 0.0;
  std::optional<double> rel_error;
  std::optional<double> eoc;
};

enum class Termination { tolerance_met, max_outer, inner_failure };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::tolerance_met: return "tolerance_met";
    case Termination::max_outer: return "max_outer";
    case Termination::inner_failure: return "inner_failure";
  }
  return "unknown";
}

struct RunReport {
  std::vector<IterationRecord> records;
  Termination terminated = Termination::max_outer;
  std::string message;
  P0Field final_control;
  P1ScalarField final_state;
  P1ScalarField final_adjoint;
  std::vector<CuttingPlane> planes;
  /// TV_eps of the final control from a cold-started oracle run.
  std::optional<double> verified_tv_eps;
};

inline double rel_error(const Mesh& mesh, const P0Field& u, const P0Field& reference) {
  const double norm = l2_norm_p0(mesh, reference);
  if (!(norm > 0.0)) throw std::invalid_argument("rel_error: zero reference");
  return l2_error_p0(mesh, u, reference) / norm;
}

/// eoc_k = (log err_{k-1} - log err_k) / (log eps_{k-1} - log eps_k)
inline std::vector<IterationRecord> compute_eoc(std::vector<IterationRecord> records) {
  for (std::size_t k = 0; k < records.size(); ++k) {
    records[k].eoc.reset();
    if (k == 0) continue;
    const auto& prev = records[k - 1];
    const auto& cur = records[k];
    if (!prev.rel_error || !cur.rel_error || !(*prev.rel_error > 0.0) || !(*cur.rel_error > 0.0)) continue;
    if (prev.eps == cur.eps) continue;
    records[k].eoc =
        (std::log(*prev.rel_error) - std::log(*cur.rel_error)) / (std::log(prev.eps) - std::log(cur.eps));
  }
  return records;
}

/// Per-iteration observer, e.g. for progress output.
using IterationCallback = std::function<void(const IterationRecord&)>;

/// Outer approximation with eps path following:
///  1. solve the master problem with the current planes at the current eps,
///  2. evaluate TV_eps(u_k) with the oracle, record the row,
///  3. stop once eps = eps_min and TV_eps(u_k) <= 1 + tol,
///  4. otherwise append the plane from the oracle maximizer and, while
///     eps > eps_min, reduce eps (which tightens every plane right-hand side).
inline RunReport run_outer_approximation(const ProblemInstance& instance, std::shared_ptr<const Forms> forms,
                                         const SolverConfig& config, const IterationCallback& on_iteration = {}) {
  validate(config);
  ProblemInstance inst = instance;
  inst.alpha = config.alpha;
  const MasterProblem master(inst, forms);
  const Mesh& mesh = forms->m();

  RunReport report;
  double eps = config.eps_start;
  std::optional<MasterSolution> master_warm;
  std::optional<OracleResult> oracle_warm;
  int next_id = 0;

  for (int k = 0; k < config.max_outer; ++k) {
    MasterSolution sol;
    try {
      sol = master.solve(report.planes, eps, config.warm_start ? master_warm : std::nullopt, config.master);
    } catch (const SolverError& e) {
      report.terminated = Termination::inner_failure;
      report.message = e.what();
      return report;
    }
    if (!sol.converged) {
      report.terminated = Termination::inner_failure;
      report.message = "master problem did not converge at k = " + std::to_string(k);
      return report;
    }
    report.final_control = sol.u;
    report.final_state = sol.y;
    report.final_adjoint = sol.p;

    OracleResult orc = eval_tv_eps(sol.u, eps, *forms, config.warm_start ? oracle_warm : std::nullopt, config.oracle);
    if (!orc.converged) {
      report.terminated = Termination::inner_failure;
      report.message = "TV oracle did not converge at k = " + std::to_string(k);
      return report;
    }

    IterationRecord rec;
    rec.k = k;
    rec.eps = eps;
    rec.objective = sol.objective;
    rec.it_master = sol.inner_iterations;
    rec.it_oracle = orc.inner_iterations;
    rec.tv_eps = orc.value;
    rec.tv_lower_bound = tv_lower_bound(orc, eps);
    if (inst.reference_u) rec.rel_error = rel_error(mesh, sol.u, *inst.reference_u);
    report.records.push_back(rec);
    report.records = compute_eoc(std::move(report.records));
    if (on_iteration) on_iteration(report.records.back());

    if (eps == config.eps_min && orc.value <= 1.0 + config.tol) {
      const OracleResult cold = eval_tv_eps(sol.u, eps, *forms, std::nullopt, config.oracle);
      if (!cold.converged) {
        report.terminated = Termination::inner_failure;
        report.message = "cold-start verification of the final control did not converge";
        return report;
      }
      report.verified_tv_eps = cold.value;
      if (cold.value <= 1.0 + config.tol) {
        report.terminated = Termination::tolerance_met;
        return report;
      }
      orc = cold;
    }

    CuttingPlane plane = make_cutting_plane(*forms, orc.phi, next_id);
    bool duplicate = false;
    for (const auto& p : report.planes)
      duplicate = duplicate || l2_error_p0(mesh, p.div_phi, plane.div_phi) < 1e-12;
    if (!duplicate) {
      report.planes.push_back(std::move(plane));
      ++next_id;
    }

    master_warm = std::move(sol);
    oracle_warm = std::move(orc);
    if (eps > config.eps_min) eps = next_eps(eps, config);
  }
  report.terminated = Termination::max_outer;
  report.message = "maximum number of outer iterations reached";
  return report;
}

inline RunReport run_outer_approximation(const ProblemInstance& instance, const SolverConfig& config,
                                         const IterationCallback& on_iteration = {}) {
  return run_outer_approximation(instance, build_forms(instance.mesh), config, on_iteration);
}

}  // namespace tvoa

#endif  // TVOA_DRIVER_HPP
