#include "kmesh/pullback.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace kmesh {

namespace {

Chart level_chart(const SubdividedComplex& sub, int t) {
  const auto e = sub.side_lengths(t);
  return chart_for(sub.geodesic(t), comparison_from_lengths(e[0], e[1], e[2]));
}

// Start and end lattice points of side k of level-n triangle t, in the edge's orientation.
std::array<int, 2> side_ends(const SubdividedComplex& sub, int t, int k) {
  const auto& p = sub.triangles[t].p;
  int a = p[k], b = p[(k + 1) % 3];
  if (sub.tri_flip[t][k]) std::swap(a, b);
  return {a, b};
}

int side_of_edge(const SubdividedComplex& sub, int t, int e) {
  for (int k = 0; k < 3; ++k)
    if (sub.tri_edge[t][k] == e) return k;
  return -1;
}

std::array<double, 3> geodesic_angles(const std::array<Point, 3>& p) {
  return {angle_at(p[2], p[0], p[1]), angle_at(p[0], p[1], p[2]), angle_at(p[1], p[2], p[0])};
}

}  // namespace

Point AcuteTriangulation::position(int v, int tri) const {
  const MeshVertex& mv = vertices[v];
  const auto& pts = sub.points[sub.triangles[tri].cell];
  switch (mv.kind) {
    case MeshVertexKind::Interior:
      return mv.x;
    case MeshVertexKind::Lattice:
      for (int k = 0; k < 3; ++k)
        if (sub.tri_vertex[tri][k] == mv.level_vertex) return pts[sub.triangles[tri].p[k]];
      break;
    case MeshVertexKind::Edge: {
      const int k = side_of_edge(sub, tri, mv.edge);
      if (k < 0) break;
      const auto [a, b] = side_ends(sub, tri, k);
      return point_on_geodesic(pts[a], pts[b], mv.s);
    }
  }
  throw Error(Errc::InvalidComplex, "vertex " + std::to_string(v) + " does not touch triangle " + std::to_string(tri));
}

std::array<Point, 3> AcuteTriangulation::corners(int t) const {
  const MeshTriangle& m = triangles[t];
  return {position(m.v[0], m.tri), position(m.v[1], m.tri), position(m.v[2], m.tri)};
}

CurvedDissection pull_back(const SubdividedComplex& sub, const PlanarRefinement& r) {
  const int nt = static_cast<int>(sub.triangles.size());
  if (static_cast<int>(r.cells.size()) != nt) throw Error(Errc::InvalidComplex, "refinement does not match the complex");
  CurvedDissection d;
  d.charts.reserve(nt);
  d.cells.resize(nt);
  for (int t = 0; t < nt; ++t) {
    d.charts.push_back(level_chart(sub, t));
    const Triangle g = sub.geodesic(t);
    CellDissection& cd = d.cells[t];
    cd.vertices = r.cells[t].vertices;
    cd.triangles = r.cells[t].triangles;
    cd.points.reserve(cd.vertices.size());
    for (const RefVertex& v : cd.vertices)
      cd.points.push_back(v.kind == RefVertexKind::Corner ? g.v[v.corner] : d.charts[t].inverse(v.xy));
  }
  return d;
}

AcuteTriangulation merge_edge_vertices(const SubdividedComplex& sub, const PlanarRefinement& r,
                                       const CurvedDissection& d) {
  AcuteTriangulation out;
  out.sub = sub;
  const int nt = static_cast<int>(sub.triangles.size());
  const int ne = static_cast<int>(sub.edges.size());
  if (static_cast<int>(r.edge_params.size()) != ne) throw Error(Errc::ParameterMismatch, "edge parameter table size");

  // Lattice vertices first, then edge vertices by (edge, slot), then interiors.
  const int nv = static_cast<int>(sub.vertices.size());
  out.vertices.resize(nv);
  for (int t = 0; t < nt; ++t)
    for (int k = 0; k < 3; ++k) {
      MeshVertex& v = out.vertices[sub.tri_vertex[t][k]];
      if (v.cell >= 0) continue;
      v.kind = MeshVertexKind::Lattice;
      v.level_vertex = sub.tri_vertex[t][k];
      v.cell = sub.triangles[t].cell;
      v.x = sub.points[v.cell][sub.triangles[t].p[k]];
    }
  std::vector<int> edge_offset(ne + 1, nv);
  for (int e = 0; e < ne; ++e) edge_offset[e + 1] = edge_offset[e] + static_cast<int>(r.edge_params[e].size());
  out.vertices.resize(edge_offset[ne]);
  std::vector<char> edge_seen(ne, 0);
  out.snaps.resize(edge_offset[ne] - nv);

  for (int t = 0; t < nt; ++t) {
    const CellDissection& cd = d.cells[t];
    const int cell = sub.triangles[t].cell;
    const auto& pts = sub.points[cell];
    std::vector<int> id(cd.vertices.size(), -1);
    std::array<int, 3> side_count{};
    for (size_t i = 0; i < cd.vertices.size(); ++i) {
      const RefVertex& rv = cd.vertices[i];
      if (rv.kind == RefVertexKind::Corner) {
        id[i] = sub.tri_vertex[t][rv.corner];
      } else if (rv.kind == RefVertexKind::Edge) {
        const int e = sub.tri_edge[t][rv.side];
        const auto& ps = r.edge_params[e];
        if (rv.edge != e) throw Error(Errc::ParameterMismatch, "edge vertex tagged with the wrong edge");
        const auto it = std::lower_bound(ps.begin(), ps.end(), rv.s);
        if (it == ps.end() || *it != rv.s)
          throw Error(Errc::ParameterMismatch, "parameter " + std::to_string(rv.s) + " not on edge " + std::to_string(e));
        ++side_count[rv.side];
        const int slot = static_cast<int>(it - ps.begin());
        const int v = edge_offset[e] + slot;
        id[i] = v;
        const auto [a, b] = side_ends(sub, t, rv.side);
        const Point merged = point_on_geodesic(pts[a], pts[b], rv.s);
        MeshVertex& mv = out.vertices[v];
        if (mv.cell < 0) {
          mv.kind = MeshVertexKind::Edge;
          mv.edge = e;
          mv.s = rv.s;
          mv.cell = cell;
          mv.x = merged;
        }
        SnapRecord& sr = out.snaps[v - nv];
        sr.edge = e;
        sr.s = rv.s;
        sr.triangles.push_back(t);
        sr.preimage.push_back(distance(pts[a], cd.points[i]));
        sr.distance.push_back(distance(merged, cd.points[i]));
      } else {
        id[i] = static_cast<int>(out.vertices.size());
        MeshVertex mv;
        mv.kind = MeshVertexKind::Interior;
        mv.tri = t;
        mv.xy = rv.xy;
        mv.cell = cell;
        mv.x = cd.points[i];
        out.vertices.push_back(mv);
      }
    }
    for (int k = 0; k < 3; ++k) {
      const int e = sub.tri_edge[t][k];
      if (side_count[k] != static_cast<int>(r.edge_params[e].size()))
        throw Error(Errc::ParameterMismatch, "triangle " + std::to_string(t) + " misses vertices of edge " + std::to_string(e));
      edge_seen[e] = 1;
    }
    for (size_t j = 0; j < cd.triangles.size(); ++j) {
      const auto& tri = cd.triangles[j];
      out.triangles.push_back({t, static_cast<int>(j), {id[tri[0]], id[tri[1]], id[tri[2]]}});
    }
  }

  // Quality figures from the merged coordinates.
  out.min_angle = std::numeric_limits<double>::infinity();
  out.max_angle = 0;
  double min_edge = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < out.triangles.size(); ++i) {
    const MeshTriangle& m = out.triangles[i];
    const auto merged = out.corners(static_cast<int>(i));
    const CellDissection& cd = d.cells[m.tri];
    const auto& lt = cd.triangles[m.local];
    const std::array<Point, 3> pre{cd.points[lt[0]], cd.points[lt[1]], cd.points[lt[2]]};
    const auto am = geodesic_angles(merged), ap = geodesic_angles(pre);
    std::array<double, 3> side{};
    for (int k = 0; k < 3; ++k) {
      out.min_angle = std::min(out.min_angle, am[k]);
      out.max_angle = std::max(out.max_angle, am[k]);
      out.cos_perturbation = std::max(out.cos_perturbation, std::abs(std::cos(am[k]) - std::cos(ap[k])));
      side[k] = distance(merged[k], merged[(k + 1) % 3]);
    }
    const double lo = std::min({side[0], side[1], side[2]}), hi = std::max({side[0], side[1], side[2]});
    min_edge = std::min(min_edge, lo);
    out.comparability = std::max(out.comparability, hi / lo);
  }
  for (const SnapRecord& sr : out.snaps)
    for (double x : sr.distance) out.eps = std::max(out.eps, x);
  out.eps_ratio = out.eps / min_edge;
  out.star = std::numeric_limits<double>::infinity();
  for (int t = 0; t < nt; ++t) {
    const auto e = sub.side_lengths(t);
    out.star = std::min(out.star, star_separation(comparison_from_lengths(e[0], e[1], e[2]), r.cells[t]));
  }
  return out;
}

AcuteTriangulation build_triangulation(const SubdividedComplex& sub, const AcuteParams& params) {
  const PlanarRefinement r = acute_refine(comparison_complex(sub), params);
  return merge_edge_vertices(sub, r, pull_back(sub, r));
}

PipelineResult run_pipeline(const CurvedComplex& c, const PipelineParams& params) {
  const ValidationReport rep = validate(c);
  if (!rep.ok()) throw Error(Errc::InvalidComplex, rep.issues.front().kind + ": " + rep.issues.front().detail);
  if (params.level_cap < params.start_level) throw Error(Errc::OutOfRange, "level cap below the start level");
  const double bound = std::numbers::pi / 2 - params.final_margin;
  std::vector<PipelineAttempt> attempts;
  std::shared_ptr<AcuteTriangulation> best;
  SubdividedComplex sub = subdivide(c, params.start_level);
  for (int n = params.start_level;; ++n) {
    PipelineAttempt a;
    a.level = n;
    try {
      auto mesh = std::make_shared<AcuteTriangulation>(build_triangulation(sub, params.acute));
      a.refined = true;
      a.max_angle = mesh->max_angle;
      const bool ok = mesh->max_angle < bound && mesh->min_angle > 0;
      a.note = ok ? "certified" : "max angle above bound";
      attempts.push_back(a);
      if (ok) return {std::move(*mesh), std::move(attempts)};
      if (!best || mesh->max_angle < best->max_angle) best = mesh;
    } catch (const Error& e) {
      if (e.code() != Errc::BudgetExhausted) throw;
      a.note = e.what();
      attempts.push_back(a);
    }
    if (n >= params.level_cap) break;
    sub = medial_subdivide(sub);
  }
  throw PipelineFailure("no certified triangulation up to level " + std::to_string(params.level_cap),
                        std::move(attempts), std::move(best));
}

}  // namespace kmesh
