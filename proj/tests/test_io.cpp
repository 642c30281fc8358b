#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "support/reference.hpp"

using namespace symmpc;
using namespace symmpc::testing;

namespace {

template <class F>
ErrorCode error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::NoConvergence;  // sentinel: nothing thrown
}

Json minimal_problem() {
  return Json::parse(R"({
    "A": [[1, 0], [0, 1]], "B": [[1, 0], [0, 1]],
    "Q": [[1, 0], [0, 1]], "R": [[1, 0], [0, 1]],
    "U": {"normals": [[1, 0], [-1, 0], [0, 1], [0, -1]], "offsets": [1, 1, 1, 1]},
    "X": {"normals": [[1, 0], [-1, 0], [0, 1], [0, -1]], "offsets": [2, 2, 2, 2]},
    "N": 2
  })");
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("symmpc_io_" + name)).string();
}

}  // namespace

TEST(Io, MatrixParsing) {
  const Matrix m = matrix_from_json(Json::parse("[[1, 2, 3], [4, 5, 6]]"));
  ASSERT_EQ(m.rows(), 2);
  ASSERT_EQ(m.cols(), 3);
  EXPECT_EQ(m(1, 2), 6.0);
  EXPECT_EQ(error_of([] { matrix_from_json(Json::parse("[[1, 2], [3]]")); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(error_of([] { matrix_from_json(Json::parse("[[1, \"x\"]]")); }), ErrorCode::ParseError);
  EXPECT_EQ(error_of([] { matrix_from_json(Json::parse("{\"a\": 1}")); }), ErrorCode::ParseError);
  EXPECT_EQ(error_of([] { vector_from_json(Json::parse("3")); }), ErrorCode::ParseError);
}

TEST(Io, MatrixRoundTrip) {
  Matrix m(2, 2);
  m << 0.1, -2.5e-17, 1e300, 3.0;
  EXPECT_EQ(matrix_from_json(Json::parse(to_json(m).dump())), m);
}

TEST(Io, MinimalProblem) {
  const Problem p = problem_from_json(minimal_problem());
  EXPECT_EQ(p.spec.horizon, 2);
  EXPECT_TRUE(p.symmetries.empty());
  EXPECT_FALSE(p.spec.P.has_value());
  EXPECT_NO_THROW(prepare(p));
}

TEST(Io, MissingKeysAndBadTypes) {
  for (const char* key : {"A", "B", "Q", "R", "U", "X", "N"}) {
    Json j = minimal_problem();
    j.erase(key);
    EXPECT_EQ(error_of([&] { problem_from_json(j); }), ErrorCode::ParseError) << key;
  }
  Json j = minimal_problem();
  j["N"] = 2.5;
  EXPECT_EQ(error_of([&] { problem_from_json(j); }), ErrorCode::ParseError);
  j = minimal_problem();
  j["symmetries"] = Json::array({Json::object({{"Theta", Json::parse("[[1,0],[0,1]]")}})});
  EXPECT_EQ(error_of([&] { problem_from_json(j); }), ErrorCode::ParseError);
  j = minimal_problem();
  j["baseline_lp_counts"] = Json::object({{"two", 3}});
  EXPECT_EQ(error_of([&] { problem_from_json(j); }), ErrorCode::ParseError);
  EXPECT_EQ(error_of([] { problem_from_json(Json::array()); }), ErrorCode::ParseError);
}

TEST(Io, UnreadableOrMalformedFile) {
  EXPECT_EQ(error_of([] { read_json_file("/nonexistent/problem.json"); }), ErrorCode::ParseError);
  const std::string path = temp_path("broken.json");
  write_text_file(path, "{\"A\": [[1, 2]");
  EXPECT_EQ(error_of([&] { read_json_file(path); }), ErrorCode::ParseError);
  std::remove(path.c_str());
  EXPECT_EQ(error_of([] { write_text_file("/nonexistent/dir/out.json", "x"); }), ErrorCode::ParseError);
}

TEST(Io, ExampleFixture) {
  const Problem p = load_problem(data_path("example2.json"));
  EXPECT_EQ(p.spec.horizon, 5);
  EXPECT_EQ(p.symmetries.size(), 4u);
  EXPECT_EQ(p.baseline_lp_counts.at(1), 145);
  EXPECT_EQ(p.baseline_lp_counts.at(5), 7438);
}

TEST(Io, SolutionFileStructure) {
  const auto p = example2();
  const auto r = run_dp(p.ocp, 2, p.group);
  const Json j = solution_to_json(r);
  EXPECT_EQ(j.at("horizon"), 2);
  EXPECT_EQ(j.at("state_dim"), 2);
  EXPECT_EQ(j.at("pieces").size(), r.solution.pieces.size());
  const Json& meta = j.at("metadata");
  EXPECT_EQ(meta.at("mode"), "symmetric");
  EXPECT_EQ(meta.at("group_size"), 4);
  EXPECT_EQ(meta.at("lp_counts").at("total"), r.lps.total());
  EXPECT_TRUE(meta.at("lp_counts_comparable").get<bool>());
  EXPECT_FALSE(solution_to_json(r, true).at("metadata").at("lp_counts_comparable").get<bool>());
  EXPECT_EQ(meta.at("horizons").size(), 2u);
  EXPECT_TRUE(meta.at("timing_s").contains("enumeration"));

  const auto back = pieces_from_json(Json::parse(j.dump()));
  ASSERT_EQ(back.size(), r.solution.pieces.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    const auto& want = r.solution.pieces[k];
    EXPECT_EQ(back[k].active_set, want.active_set);
    EXPECT_EQ(back[k].reduced, want.reduced);
    EXPECT_EQ(back[k].gain, want.gain);
    EXPECT_EQ(back[k].offset, want.offset);
    EXPECT_TRUE(same_set(back[k].region, want.region, 0.0));
  }
}

TEST(Io, TraceRecords) {
  const Json opt = to_json(TraceRecord{3, ActiveSet{1, 4}, TestKind::Optimality, true, kInf});
  EXPECT_EQ(opt.dump(), R"({"horizon":3,"set":[1,4],"test":"optimality","outcome":true,"t_star":"inf"})");
  const Json fea = to_json(TraceRecord{1, ActiveSet{}, TestKind::Feasibility, false, 0.0});
  EXPECT_TRUE(fea.at("t_star").is_null());
  EXPECT_EQ(fea.at("set"), Json::array());
}

TEST(Io, CondensedQpDump) {
  const auto qp = condense(example2().ocp, 2);
  const Json j = to_json(qp);
  EXPECT_EQ(j.at("q"), 20);
  EXPECT_EQ(matrix_from_json(j.at("H")), qp.H);
  EXPECT_EQ(j.at("stage_of_row").size(), 20u);
}

TEST(Svg, PolygonVertices) {
  const auto sq = polygon_vertices(Polytope::box(-Vector::Ones(2), Vector::Ones(2)));
  ASSERT_EQ(sq.size(), 4u);
  double area = 0.0;
  for (std::size_t k = 0; k < sq.size(); ++k) {
    const auto& a = sq[k];
    const auto& b = sq[(k + 1) % sq.size()];
    area += a.x() * b.y() - a.y() * b.x();
  }
  EXPECT_NEAR(area / 2.0, 4.0, 1e-9);
  EXPECT_EQ(error_of([] { polygon_vertices(Polytope::box(-Vector::Ones(3), Vector::Ones(3))); }),
            ErrorCode::NotPlanar);
}

TEST(Svg, RenderedPartitionHasOnePolygonPerPiece) {
  const auto p = example2();
  const auto r = run_dp(p.ocp, 1, p.group);
  const std::string svg = render_partition(r.solution.pieces);
  std::size_t count = 0;
  for (std::size_t pos = svg.find("<polygon"); pos != std::string::npos; pos = svg.find("<polygon", pos + 1)) ++count;
  EXPECT_EQ(count, r.solution.pieces.size());
  EXPECT_NE(svg.find("#b0b0b0"), std::string::npos);
  EXPECT_EQ(svg.rfind("</svg>"), svg.size() - 7);
}
