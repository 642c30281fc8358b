#ifndef SYMMPC_DRIVER_HPP_
#define SYMMPC_DRIVER_HPP_

#include <cstdio>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "enumerate.hpp"
#include "io.hpp"
#include "ocp.hpp"
#include "symmetry.hpp"

namespace symmpc {

struct LoadedProblem {
  Problem raw;
  ValidatedOcp ocp;
  SymmetryGroup group;
};

/// Validates the OCP, checks every supplied pair and closes them into a group.
inline LoadedProblem prepare(Problem raw, const Tolerances& tol = {}, bool use_symmetries = true) {
  LoadedProblem p;
  p.ocp = validate(raw.spec, tol.symmetry);
  if (use_symmetries) {
    for (const auto& pair : raw.symmetries) validate_pair(p.ocp, pair, tol.symmetry);
    p.group = close_group(raw.symmetries, p.ocp.n(), p.ocp.m(), tol.symmetry);
    for (const auto& e : p.group.elements) validate_pair(p.ocp, e, tol.symmetry);
  } else {
    p.group.elements.push_back(identity_pair(p.ocp.n(), p.ocp.m()));
  }
  p.raw = std::move(raw);
  return p;
}

inline std::string format_double(double v, const char* fmt = "%.3f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

inline std::string solve_report(const DpResult& r, const std::map<int, long>& baseline, bool parallel) {
  std::ostringstream s;
  s << "mode: " << to_string(r.mode) << " (group size " << r.group_size << ")\n";
  s << "horizon reached: " << r.horizon_reached << " of " << r.horizon_requested
    << (r.fixed_point ? " (fixed point)" : "") << "\n";
  s << "|S_red|: " << r.horizons.back().reduced.size() << "  |M_N|: " << r.solution.pieces.size() << "\n";
  s << "LPs: " << r.lps.total() << " (optimality " << r.lps.optimality << ", feasibility "
    << r.lps.feasibility << ")" << (parallel ? " [parallel run, not comparable]" : "") << "\n";
  const auto it = baseline.find(r.horizon_reached);
  if (r.mode == Mode::Symmetric && it != baseline.end() && it->second > 0) {
    const double red = 100.0 * (1.0 - static_cast<double>(r.lps.total()) / static_cast<double>(it->second));
    s << "reduction vs stored baseline (" << it->second << " LPs): -" << format_double(red, "%.1f") << "%\n";
  }
  if (!r.horizons.back().orbit_duplicates.empty())
    s << "same-orbit duplicates in S_red: " << r.horizons.back().orbit_duplicates.size() << "\n";
  s << "wall time: " << format_double(r.enumeration_seconds + r.postprocess_seconds) << " s\n";
  return s.str();
}

struct CompareRow {
  int horizon = 0;
  long lps_baseline = 0;
  double time_baseline = 0.0;
  long lps_symmetric = 0;
  double time_symmetric = 0.0;
  bool equal = false;

  double reduction_pct() const {
    return lps_baseline > 0 ? 100.0 * (1.0 - static_cast<double>(lps_symmetric) / lps_baseline) : 0.0;
  }
};

inline std::vector<ActiveSet> piece_sets(const DpResult& r) {
  std::vector<ActiveSet> out;
  for (const auto& p : r.solution.pieces) out.push_back(p.active_set);
  return out;
}

/// Both modes at every horizon 1..n_max; equality of expanded S_N and of M_N.
inline std::vector<CompareRow> compare_modes(const LoadedProblem& p, int n_max, const DpOptions& base = {}) {
  std::vector<CompareRow> rows;
  for (int n = 1; n <= n_max; ++n) {
    DpOptions ob = base;
    ob.mode = Mode::Baseline;
    DpOptions os = base;
    os.mode = Mode::Symmetric;
    const DpResult rb = run_dp(p.ocp, n, p.group, ob);
    const DpResult rs = run_dp(p.ocp, n, p.group, os);
    CompareRow row;
    row.horizon = n;
    row.lps_baseline = rb.lps.total();
    row.time_baseline = rb.enumeration_seconds + rb.postprocess_seconds;
    row.lps_symmetric = rs.lps.total();
    row.time_symmetric = rs.enumeration_seconds + rs.postprocess_seconds;
    row.equal = rb.expanded == rs.expanded && piece_sets(rb) == piece_sets(rs);
    rows.push_back(row);
  }
  return rows;
}

inline std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream s;
  s << "N,lps_baseline,time_baseline_s,lps_symmetric,time_symmetric_s,reduction_pct,equality\n";
  for (const auto& r : rows)
    s << r.horizon << "," << r.lps_baseline << "," << format_double(r.time_baseline, "%.4f") << ","
      << r.lps_symmetric << "," << format_double(r.time_symmetric, "%.4f") << ","
      << format_double(r.reduction_pct(), "%.1f") << "," << (r.equal ? "PASS" : "FAIL") << "\n";
  return s.str();
}

inline std::string compare_table(const std::vector<CompareRow>& rows) {
  std::ostringstream s;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%3s  %12s %10s  %12s %10s  %9s  %s\n", "N", "LPs (base)", "time/s",
                "LPs (sym)", "time/s", "reduction", "equal");
  s << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%3d  %12ld %10.3f  %12ld %10.3f  %8.1f%%  %s\n", r.horizon,
                  r.lps_baseline, r.time_baseline, r.lps_symmetric, r.time_symmetric, -r.reduction_pct(),
                  r.equal ? "PASS" : "FAIL");
    s << buf;
  }
  return s.str();
}

}  // namespace symmpc

#endif  // SYMMPC_DRIVER_HPP_
