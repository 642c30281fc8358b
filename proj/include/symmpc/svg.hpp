#ifndef SYMMPC_SVG_HPP_
#define SYMMPC_SVG_HPP_

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "polytope.hpp"
#include "postprocess.hpp"

namespace symmpc {

using Point2 = Eigen::Vector2d;

/**
 * Vertices of a bounded planar polytope in counter-clockwise order,
 * obtained by clipping a large square against each half-plane in turn.
 * Returns an empty list for an empty or degenerate region.
 */
inline std::vector<Point2> polygon_vertices(const Polytope& p, double extent = 1e6) {
  if (p.dim() != 2) throw Error(ErrorCode::NotPlanar, "polygon vertices need a 2-D polytope");
  std::vector<Point2> poly{{-extent, -extent}, {extent, -extent}, {extent, extent}, {-extent, extent}};
  for (Eigen::Index r = 0; r < p.num_rows() && !poly.empty(); ++r) {
    const Point2 a = p.normals().row(r).transpose();
    const double b = p.offsets()(r);
    std::vector<Point2> out;
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const Point2& s = poly[k];
      const Point2& e = poly[(k + 1) % poly.size()];
      const double ds = a.dot(s) - b;
      const double de = a.dot(e) - b;
      if (ds <= 0) out.push_back(s);
      if ((ds < 0 && de > 0) || (ds > 0 && de < 0)) out.push_back(s + (e - s) * (ds / (ds - de)));
    }
    poly = std::move(out);
  }
  std::vector<Point2> clean;
  for (const auto& v : poly)
    if (clean.empty() || (v - clean.back()).norm() > 1e-12) clean.push_back(v);
  while (clean.size() > 1 && (clean.front() - clean.back()).norm() <= 1e-12) clean.pop_back();
  if (clean.size() < 3) return {};
  return clean;
}

struct SvgOptions {
  int size_px = 600;
  double margin = 0.05;  // fraction of the data range
};

/// Reduced pieces are filled gray, orbit images white.
inline std::string render_partition(const std::vector<ExplicitPiece>& pieces, const SvgOptions& opt = {}) {
  std::vector<std::vector<Point2>> polys;
  Point2 lo = Point2::Constant(kInf);
  Point2 hi = Point2::Constant(-kInf);
  for (const auto& p : pieces) {
    if (p.region.dim() != 2) throw Error(ErrorCode::NotPlanar, "plotting needs a 2-D state space");
    polys.push_back(polygon_vertices(p.region));
    for (const auto& v : polys.back()) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
  }
  if (!(lo.array() < hi.array()).all()) {
    lo = Point2::Constant(-1.0);
    hi = Point2::Constant(1.0);
  }
  const Point2 pad = (hi - lo) * opt.margin;
  lo -= pad;
  hi += pad;
  const double scale = opt.size_px / std::max(hi.x() - lo.x(), hi.y() - lo.y());
  const auto px = [&](const Point2& v) {
    return Point2((v.x() - lo.x()) * scale, (hi.y() - v.y()) * scale);
  };

  std::ostringstream s;
  char buf[64];
  const int w = static_cast<int>(std::ceil((hi.x() - lo.x()) * scale));
  const int h = static_cast<int>(std::ceil((hi.y() - lo.y()) * scale));
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    if (polys[k].empty()) continue;
    s << "<polygon points=\"";
    for (std::size_t i = 0; i < polys[k].size(); ++i) {
      const Point2 q = px(polys[k][i]);
      std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", i ? " " : "", q.x(), q.y());
      s << buf;
    }
    s << "\" fill=\"" << (pieces[k].reduced ? "#b0b0b0" : "white")
      << "\" stroke=\"black\" stroke-width=\"0.8\"><title>" << pieces[k].active_set.to_string()
      << "</title></polygon>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace symmpc

#endif  // SYMMPC_SVG_HPP_
