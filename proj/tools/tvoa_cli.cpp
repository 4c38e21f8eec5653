// Command line front end: builds one of the two model instances, runs the
// outer approximation and writes the iteration table to stdout.

#include "tvoa/tvoa.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <system_error>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInnerFailure = 2;
constexpr int kExitMaxOuter = 3;

int exit_code(tvoa::Termination t) {
  switch (t) {
    case tvoa::Termination::tolerance_met: return kExitOk;
    case tvoa::Termination::inner_failure: return kExitInnerFailure;
    case tvoa::Termination::max_outer: return kExitMaxOuter;
  }
  return kExitInnerFailure;
}

void print_progress(const tvoa::IterationRecord& r) {
  std::fprintf(stderr, "k=%d eps=%.3e J=%.6g it_P=%d it_Q=%d tv_eps=%.6g tv_lb=%.6g\n", r.k, r.eps, r.objective,
               r.it_master, r.it_oracle, r.tv_eps, r.tv_lower_bound);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TV-constrained elliptic optimal control by outer approximation"};

  std::string instance = "exact";
  int n = 50;
  tvoa::SolverConfig config;
  std::optional<double> eps_min;
  std::string output = "csv";
  std::string dump_dir;
  std::uint64_t seed = 0;
  bool no_warm_start = false;
  bool progress = false;

  app.add_option("--instance", instance, "model instance")->check(CLI::IsMember({"exact", "generic"}));
  app.add_option("--n", n, "subdivisions per side")->check(CLI::Range(1, 4096));
  app.add_option("--eps-start", config.eps_start, "initial regularization")->check(CLI::PositiveNumber);
  app.add_option("--eps-factor", config.eps_factor, "eps reduction factor in (0,1)")
      ->check(CLI::Range(0.0, 1.0) & CLI::PositiveNumber);
  app.add_option("--eps-min", eps_min, "final regularization (default 7.8e-8 exact, 1.6e-7 generic)")
      ->check(CLI::PositiveNumber);
  app.add_option("--tol", config.tol, "termination tolerance on TV_eps - 1")->check(CLI::PositiveNumber);
  app.add_option("--alpha", config.alpha, "Tikhonov weight")->check(CLI::PositiveNumber);
  app.add_option("--depth", config.subdivision_depth, "subdivision depth of the P0 projection quadrature")
      ->check(CLI::Range(0, 10));
  app.add_option("--max-outer", config.max_outer, "outer iteration limit")->check(CLI::Range(1, 100000));
  app.add_option("--output", output, "report format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--dump-fields", dump_dir, "directory for plain-text dumps of the final fields");
  app.add_option("--seed", seed, "seed echoed in the report");
  app.add_flag("--no-warm-start", no_warm_start, "cold-start every inner solve");
  app.add_flag("--progress", progress, "print one line per outer iteration to stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (app.exit(e) == 0) return kExitOk;
    std::cerr << app.help();
    return kExitUsage;
  }

  config.n = n;
  config.warm_start = !no_warm_start;
  config.eps_min = eps_min ? *eps_min : (instance == "exact" ? 7.8e-8 : 1.6e-7);

  try {
    tvoa::validate(config);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  if (!dump_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dump_dir, ec);
    if (ec || !std::filesystem::is_directory(dump_dir)) {
      std::cerr << "--dump-fields: cannot create directory '" << dump_dir << "'\n";
      return kExitUsage;
    }
  }

  try {
    auto mesh = tvoa::make_mesh(n);
    const tvoa::ProblemInstance inst =
        instance == "exact" ? tvoa::build_exact_instance(mesh, 0.01, config.alpha, config.subdivision_depth)
                            : tvoa::build_generic_instance(mesh, config.alpha, config.subdivision_depth);
    const auto forms = tvoa::build_forms(mesh);
    const tvoa::RunReport report = tvoa::run_outer_approximation(
        inst, forms, config, progress ? tvoa::IterationCallback(print_progress) : tvoa::IterationCallback());

    const tvoa::RunDescription run{instance, config, seed};
    std::cout << tvoa::serialize_report(report, output == "csv" ? tvoa::ReportFormat::csv : tvoa::ReportFormat::json,
                                        run);
    std::cout.flush();

    if (!dump_dir.empty() && !report.records.empty()) {
      const std::filesystem::path dir(dump_dir);
      tvoa::dump_field(report.final_control, (dir / "control.txt").string());
      tvoa::dump_field(report.final_state, (dir / "state.txt").string());
      tvoa::dump_field(report.final_adjoint, (dir / "adjoint.txt").string());
      if (inst.reference_u) tvoa::dump_field(*inst.reference_u, (dir / "reference_control.txt").string());
      if (!report.planes.empty()) tvoa::dump_field(report.planes.back().phi, (dir / "dual_field.txt").string());
    }
    if (report.terminated != tvoa::Termination::tolerance_met) std::cerr << report.message << "\n";
    return exit_code(report.terminated);
  } catch (const tvoa::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitUsage;
  }
}
