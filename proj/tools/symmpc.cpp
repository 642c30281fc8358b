// symmpc: explicit solutions of symmetric constrained LQ optimal control problems.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "symmpc/symmpc.hpp"

namespace {

using namespace symmpc;

int exit_code(ErrorCode code) {
  switch (error_category(code)) {
    case ErrorCategory::Parse: return 2;
    case ErrorCategory::Validation: return 3;
    case ErrorCategory::Numerical: return 4;
  }
  return 4;
}

struct SolveArgs {
  std::string problem;
  int horizon = 1;
  bool no_symmetry = false;
  bool orbit_dedup = false;
  bool parallel = false;
  std::string trace;
  std::string out = "solution.json";
  std::string dump_qp;
};

struct CompareArgs {
  std::string problem;
  int horizon = 1;
  std::string csv;
};

struct PlotArgs {
  std::string solution;
  std::string out = "partition.svg";
  bool reduced_only = false;
};

int cmd_solve(const SolveArgs& a, const Tolerances& tol) {
  LoadedProblem p = prepare(load_problem(a.problem), tol, !a.no_symmetry);

  std::ostringstream trace;
  DpOptions opt;
  opt.mode = a.no_symmetry ? Mode::Baseline : Mode::Symmetric;
  opt.orbit_dedup = a.orbit_dedup;
  opt.parallel = a.parallel;
  opt.tol = tol;
  if (!a.trace.empty()) opt.trace = [&](const TraceRecord& r) { trace << to_json(r).dump() << "\n"; };

  DpResult r;
  try {
    r = run_dp(p.ocp, a.horizon, p.group, opt);
  } catch (...) {
    if (!a.trace.empty()) write_text_file(a.trace, trace.str());
    throw;
  }
  if (!a.trace.empty()) write_text_file(a.trace, trace.str());
  if (!a.dump_qp.empty()) write_text_file(a.dump_qp, to_json(condense(p.ocp, r.horizon_reached)).dump(2) + "\n");
  write_text_file(a.out, solution_to_json(r, a.parallel).dump(1) + "\n");
  std::cout << solve_report(r, p.raw.baseline_lp_counts, a.parallel);
  std::cout << "solution written to " << a.out << "\n";
  return 0;
}

int cmd_compare(const CompareArgs& a, const Tolerances& tol) {
  LoadedProblem p = prepare(load_problem(a.problem), tol, true);
  DpOptions opt;
  opt.tol = tol;
  const auto rows = compare_modes(p, a.horizon, opt);
  std::cout << compare_table(rows);
  const std::string csv = compare_csv(rows);
  if (a.csv.empty())
    std::cout << "\n" << csv;
  else
    write_text_file(a.csv, csv);
  for (const auto& row : rows)
    if (!row.equal) return 1;
  return 0;
}

int cmd_plot(const PlotArgs& a) {
  auto pieces = pieces_from_json(read_json_file(a.solution));
  if (a.reduced_only) std::erase_if(pieces, [](const ExplicitPiece& p) { return !p.reduced; });
  write_text_file(a.out, render_partition(pieces));
  std::cout << pieces.size() << " regions drawn to " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit MPC for symmetric constrained linear-quadratic problems"};
  app.require_subcommand(1);

  Tolerances tol;
  auto add_tolerances = [&](CLI::App* cmd) {
    const auto range = CLI::Range(1e-14, 1e-3);
    cmd->add_option("--tol-row", tol.row, "row matching / redundancy tolerance")->check(range);
    cmd->add_option("--tol-dim", tol.dim, "Chebyshev radius threshold")->check(range);
    cmd->add_option("--tol-degenerate", tol.degenerate, "t* at or below which a set is degenerate")->check(range);
    cmd->add_option("--tol-feasibility", tol.feasibility, "LP feasibility tolerance")->check(range);
    cmd->add_option("--tol-rank", tol.rank, "relative singular value cutoff")->check(range);
    cmd->add_option("--tol-symmetry", tol.symmetry, "symmetry and permutation matching")->check(range);
  };

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "compute the explicit solution");
  solve->add_option("problem", sa.problem, "problem file (JSON)")->required();
  solve->add_option("--n", sa.horizon, "horizon")->required()->check(CLI::PositiveNumber);
  solve->add_flag("--no-symmetry", sa.no_symmetry, "ignore symmetries (baseline)");
  solve->add_flag("--orbit-dedup", sa.orbit_dedup, "drop same-orbit duplicates after each extension");
  solve->add_flag("--parallel", sa.parallel, "test candidates of one batch concurrently");
  solve->add_option("--trace", sa.trace, "JSON-lines log of every LP test");
  solve->add_option("--out", sa.out, "solution file")->capture_default_str();
  solve->add_option("--dump-qp", sa.dump_qp, "write the condensed QP as JSON");
  add_tolerances(solve);

  CompareArgs ca;
  auto* compare = app.add_subcommand("compare", "baseline against symmetric for N = 1..n");
  compare->add_option("problem", ca.problem, "problem file (JSON)")->required();
  compare->add_option("--n", ca.horizon, "largest horizon")->required()->check(CLI::PositiveNumber);
  compare->add_option("--csv", ca.csv, "CSV output path (stdout when omitted)");
  add_tolerances(compare);

  PlotArgs pa;
  auto* plot = app.add_subcommand("plot", "draw a planar partition as SVG");
  plot->add_option("solution", pa.solution, "solution file")->required();
  plot->add_option("--out", pa.out, "SVG path")->capture_default_str();
  plot->add_flag("--reduced-only", pa.reduced_only, "draw only the tested representatives");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*solve) return cmd_solve(sa, tol);
    if (*compare) return cmd_compare(ca, tol);
    if (*plot) return cmd_plot(pa);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
