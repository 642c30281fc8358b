#ifndef SYMMPC_IO_HPP_
#define SYMMPC_IO_HPP_

/**
 * @file
 * @brief JSON reading and writing: problem files, polytopes, explicit
 * solutions, condensed QP dumps and trace records.
 *
 * Matrices are nested arrays in row-major order.
 */

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "condense.hpp"
#include "enumerate.hpp"
#include "ocp.hpp"
#include "symmetry.hpp"

namespace symmpc {

using Json = nlohmann::ordered_json;

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) parse_fail(std::string("missing key '") + key + "'");
  return j.at(key);
}

inline double number(const Json& j, const std::string& where) {
  if (!j.is_number()) parse_fail(where + ": expected a number");
  return j.get<double>();
}

}  // namespace detail

inline Matrix matrix_from_json(const Json& j, const std::string& where = "matrix") {
  if (!j.is_array()) detail::parse_fail(where + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Matrix(0, 0);
  if (!j[0].is_array()) detail::parse_fail(where + ": expected an array of rows");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array()) detail::parse_fail(where + ": expected an array of rows");
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw Error(ErrorCode::DimensionMismatch, where + ": ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = detail::number(row[static_cast<std::size_t>(c)], where);
  }
  return m;
}

inline Vector vector_from_json(const Json& j, const std::string& where = "vector") {
  if (!j.is_array()) detail::parse_fail(where + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = detail::number(j[i], where);
  return v;
}

inline Json to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

inline Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Polytope polytope_from_json(const Json& j, const std::string& where = "polytope") {
  Matrix normals = matrix_from_json(detail::field(j, "normals"), where + ".normals");
  Vector offsets = vector_from_json(detail::field(j, "offsets"), where + ".offsets");
  if (normals.rows() != offsets.size())
    throw Error(ErrorCode::DimensionMismatch, where + ": normals and offsets differ in length");
  return {std::move(normals), std::move(offsets)};
}

inline Json to_json(const Polytope& p) {
  Json j;
  j["normals"] = to_json(p.normals());
  j["offsets"] = to_json(p.offsets());
  return j;
}

inline Json to_json(const ActiveSet& a) { return Json(a.indices()); }

struct Problem {
  OcpSpec spec;
  std::vector<SymmetryPair> symmetries;
  std::map<int, long> baseline_lp_counts;  // horizon -> total LPs, optional
};

inline Problem problem_from_json(const Json& j) {
  if (!j.is_object()) detail::parse_fail("problem file must hold a JSON object");
  Problem p;
  p.spec.A = matrix_from_json(detail::field(j, "A"), "A");
  p.spec.B = matrix_from_json(detail::field(j, "B"), "B");
  p.spec.Q = matrix_from_json(detail::field(j, "Q"), "Q");
  p.spec.R = matrix_from_json(detail::field(j, "R"), "R");
  p.spec.U = polytope_from_json(detail::field(j, "U"), "U");
  p.spec.X = polytope_from_json(detail::field(j, "X"), "X");
  const Json& n = detail::field(j, "N");
  if (!n.is_number_integer()) detail::parse_fail("N: expected an integer");
  p.spec.horizon = n.get<int>();
  if (j.contains("P")) p.spec.P = matrix_from_json(j.at("P"), "P");
  if (j.contains("T")) p.spec.T = polytope_from_json(j.at("T"), "T");
  if (j.contains("symmetries")) {
    const Json& s = j.at("symmetries");
    if (!s.is_array()) detail::parse_fail("symmetries: expected an array");
    for (std::size_t k = 0; k < s.size(); ++k) {
      const std::string where = "symmetries[" + std::to_string(k) + "]";
      p.symmetries.push_back({matrix_from_json(detail::field(s[k], "Theta"), where + ".Theta"),
                              matrix_from_json(detail::field(s[k], "Omega"), where + ".Omega")});
    }
  }
  if (j.contains("baseline_lp_counts")) {
    const Json& b = j.at("baseline_lp_counts");
    if (!b.is_object()) detail::parse_fail("baseline_lp_counts: expected an object");
    for (const auto& [key, value] : b.items()) {
      if (!value.is_number_integer()) detail::parse_fail("baseline_lp_counts: expected integers");
      try {
        p.baseline_lp_counts[std::stoi(key)] = value.get<long>();
      } catch (const std::logic_error&) {
        detail::parse_fail("baseline_lp_counts: keys are horizons");
      }
    }
  }
  return p;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) detail::parse_fail("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    detail::parse_fail(path + ": " + e.what());
  }
}

inline Problem load_problem(const std::string& path) { return problem_from_json(read_json_file(path)); }

inline Json to_json(const CondensedQp& qp) {
  Json j;
  j["horizon"] = qp.horizon;
  j["q"] = qp.q;
  j["q0"] = qp.q0;
  j["q_u"] = qp.q_u;
  j["q_x"] = qp.q_x;
  j["q_t"] = qp.q_t;
  j["Y"] = to_json(qp.Y);
  j["F"] = to_json(qp.F);
  j["H"] = to_json(qp.H);
  j["G"] = to_json(qp.G);
  j["E"] = to_json(qp.E);
  j["w"] = to_json(qp.w);
  j["stage_of_row"] = qp.stage_of_row;
  return j;
}

inline const char* to_string(Mode m) { return m == Mode::Symmetric ? "symmetric" : "baseline"; }
inline const char* to_string(TestKind t) { return t == TestKind::Optimality ? "optimality" : "feasibility"; }

inline Json to_json(const TraceRecord& r) {
  Json j;
  j["horizon"] = r.horizon;
  j["set"] = to_json(r.set);
  j["test"] = to_string(r.test);
  j["outcome"] = r.outcome;
  if (r.test == TestKind::Optimality) {
    if (std::isinf(r.t_star))
      j["t_star"] = "inf";
    else
      j["t_star"] = r.t_star;
  } else {
    j["t_star"] = nullptr;
  }
  return j;
}

inline Json to_json(const ExplicitPiece& p) {
  Json j;
  j["active_set"] = to_json(p.active_set);
  j["reduced"] = p.reduced;
  j["group_element"] = p.group_element;
  j["gain"] = to_json(p.gain);
  j["offset"] = to_json(p.offset);
  j["region"] = to_json(p.region);
  return j;
}

/// Solution file. Wall-clock figures sit under metadata.timing_s only.
inline Json solution_to_json(const DpResult& r, bool parallel = false) {
  Json meta;
  meta["mode"] = to_string(r.mode);
  meta["horizon_requested"] = r.horizon_requested;
  meta["horizon_reached"] = r.horizon_reached;
  meta["fixed_point"] = r.fixed_point;
  meta["group_size"] = r.group_size;
  meta["lp_counts"] = {{"optimality", r.lps.optimality},
                       {"feasibility", r.lps.feasibility},
                       {"total", r.lps.total()}};
  meta["lp_counts_comparable"] = !parallel;
  const auto& last = r.horizons.back();
  meta["reduced_sets"] = last.reduced.size();
  meta["degenerate_sets"] = last.degenerate.size();
  meta["orbit_count"] = r.solution.accepted.size();
  meta["pieces"] = r.solution.pieces.size();
  meta["rank_rejected"] = r.solution.rank_rejected;
  meta["dim_rejected"] = r.solution.dim_rejected;
  Json dups = Json::array();
  for (const auto& [kept, dup] : last.orbit_duplicates) dups.push_back({to_json(kept), to_json(dup)});
  meta["orbit_duplicates"] = dups;
  Json per = Json::array();
  for (const auto& h : r.horizons)
    per.push_back({{"horizon", h.horizon},
                   {"lp_counts", {{"optimality", h.lps.optimality}, {"feasibility", h.lps.feasibility}}},
                   {"reduced_sets", h.reduced.size()},
                   {"degenerate_sets", h.degenerate.size()},
                   {"pruned_sets", h.pruned},
                   {"orbit_duplicates", h.orbit_duplicates.size()}});
  meta["horizons"] = per;
  meta["timing_s"] = {{"enumeration", r.enumeration_seconds}, {"postprocess", r.postprocess_seconds}};

  Json j;
  j["horizon"] = r.horizon_reached;
  j["state_dim"] = r.solution.pieces.empty() ? 0 : r.solution.pieces.front().gain.cols();
  Json pieces = Json::array();
  for (const auto& p : r.solution.pieces) pieces.push_back(to_json(p));
  j["pieces"] = std::move(pieces);
  j["metadata"] = std::move(meta);
  return j;
}

/// Pieces read back from a solution file; law and region only.
inline std::vector<ExplicitPiece> pieces_from_json(const Json& j) {
  std::vector<ExplicitPiece> out;
  const Json& pieces = detail::field(j, "pieces");
  if (!pieces.is_array()) detail::parse_fail("pieces: expected an array");
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const Json& p = pieces[k];
    const std::string where = "pieces[" + std::to_string(k) + "]";
    ExplicitPiece e;
    const Json& a = detail::field(p, "active_set");
    if (!a.is_array()) detail::parse_fail(where + ".active_set: expected an array");
    std::vector<int> idx;
    for (const auto& v : a) {
      if (!v.is_number_integer()) detail::parse_fail(where + ".active_set: expected integers");
      idx.push_back(v.get<int>());
    }
    e.active_set = ActiveSet(std::move(idx));
    e.gain = matrix_from_json(detail::field(p, "gain"), where + ".gain");
    e.offset = vector_from_json(detail::field(p, "offset"), where + ".offset");
    e.region = polytope_from_json(detail::field(p, "region"), where + ".region");
    if (p.contains("reduced")) e.reduced = p.at("reduced").get<bool>();
    out.push_back(std::move(e));
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path);
  out << text;
}

}  // namespace symmpc

#endif  // SYMMPC_IO_HPP_
