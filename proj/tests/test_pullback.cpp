#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "kmesh/pullback.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace kmesh;
using namespace testsupport;
using std::numbers::pi;

TEST_CASE("pull_back keeps corners exact and points on the surface") {
  const auto sub = subdivide(mixed_fan(), 1);
  const auto r = acute_refine(comparison_complex(sub), {});
  const auto d = pull_back(sub, r);
  REQUIRE(d.cells.size() == sub.triangles.size());
  for (size_t t = 0; t < d.cells.size(); ++t) {
    const Triangle g = sub.geodesic(static_cast<int>(t));
    const auto& cd = d.cells[t];
    REQUIRE(cd.points.size() == cd.vertices.size());
    for (size_t i = 0; i < cd.points.size(); ++i) {
      CHECK(embedding_residual(cd.points[i]) < 1e-12);
      if (cd.vertices[i].kind == RefVertexKind::Corner) CHECK(cd.points[i].x == g.v[cd.vertices[i].corner].x);
    }
  }
}

TEST_CASE("merge restores the planar combinatorics") {
  for (const auto& c : {octahedron(), hyperbolic_pair(), mixed_fan()}) {
    const auto sub = subdivide(c, 1);
    const auto pc = comparison_complex(sub);
    const auto r = acute_refine(pc, {});
    const auto m = merge_edge_vertices(sub, r, pull_back(sub, r));
    const Signature a = planar_signature(pc, r), b = mesh_signature(m);
    CHECK(a.vertices == b.vertices);
    CHECK(a.edges == b.edges);
    CHECK(a.faces == b.faces);
    CHECK(a.hash == b.hash);
    CHECK(a == b);
    CHECK(m.vertices.size() == a.vertices);
  }
}

TEST_CASE("vertex numbering and snap records") {
  const auto sub = subdivide(mixed_fan(), 1);
  const auto r = acute_refine(comparison_complex(sub), {});
  const auto m = merge_edge_vertices(sub, r, pull_back(sub, r));
  const size_t nv = sub.vertices.size();
  size_t edge_points = 0;
  for (const auto& p : r.edge_params) edge_points += p.size();
  REQUIRE(m.snaps.size() == edge_points);
  for (size_t v = 0; v < m.vertices.size(); ++v) {
    const auto kind = m.vertices[v].kind;
    if (v < nv) CHECK(kind == MeshVertexKind::Lattice);
    else if (v < nv + edge_points) CHECK(kind == MeshVertexKind::Edge);
    else CHECK(kind == MeshVertexKind::Interior);
  }
  double eps = 0;
  for (const SnapRecord& s : m.snaps) {
    // Interior level edges have two incident triangles; boundary ones of a
    // manifold-with-boundary complex may have one.
    CHECK(s.triangles.size() >= 1);
    CHECK(s.triangles.size() == s.distance.size());
    for (double x : s.distance) eps = std::max(eps, x);
    // The merged point sits at arc length s from the side start.
    const MeshVertex& mv = m.vertices[nv + (&s - m.snaps.data())];
    CHECK(mv.s == s.s);
  }
  CHECK(eps == m.eps);
  CHECK(m.eps > 0);
  CHECK(m.eps_ratio < 1);
}

TEST_CASE("flat complexes merge without displacement") {
  const auto flat = make_complex({tri(0, 0.0, 1, 1, 1), tri(1, 0.0, 1, 1.2, 0.9)}, {{{0, 0}, {1, 0}, Orientation::Reversing}});
  const auto sub = subdivide(flat, 1);
  const auto r = acute_refine(comparison_complex(sub), {});
  const auto m = merge_edge_vertices(sub, r, pull_back(sub, r));
  CHECK(m.eps < 1e-12);
  CHECK(m.cos_perturbation < 1e-12);
}

TEST_CASE("merge rejects disagreeing parameter tables") {
  const auto sub = subdivide(hyperbolic_pair(), 0);
  auto r = acute_refine(comparison_complex(sub), {});
  const auto d = pull_back(sub, r);
  int e = 0;
  while (r.edge_params[e].empty()) ++e;
  r.edge_params[e][0] += 1e-3;
  try {
    merge_edge_vertices(sub, r, d);
    FAIL("expected ParameterMismatch");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::ParameterMismatch);
  }
}

TEST_CASE("pipeline climbs levels until certified") {
  const auto res = run_pipeline(octahedron(), {});
  REQUIRE(res.attempts.size() >= 2);
  CHECK(res.attempts.front().level == 0);
  CHECK(res.attempts.back().note == "certified");
  CHECK(res.mesh.sub.level == res.attempts.back().level);
  CHECK(res.mesh.max_angle < pi / 2 - 0.01);
  for (size_t i = 0; i + 1 < res.attempts.size(); ++i) CHECK(res.attempts[i].note != "certified");
}

TEST_CASE("pipeline level cap") {
  PipelineParams p;
  p.level_cap = 0;
  try {
    run_pipeline(octahedron(), p);
    FAIL("expected PipelineFailure");
  } catch (const PipelineFailure& f) {
    CHECK(f.code() == Errc::LevelCapExceeded);
    REQUIRE(f.attempts.size() == 1);
    REQUIRE(f.best);
    CHECK(f.best->max_angle >= pi / 2 - 0.01);
  }
}

TEST_CASE("pipeline rejects invalid complexes") {
  const auto bad = make_complex({tri(0, 1.0, 1, 1, 3)}, {});
  try {
    run_pipeline(bad, {});
    FAIL("expected InvalidComplex");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidComplex);
  }
}

TEST_CASE("snap distance decays with the level") {
  double prev_eps = std::numeric_limits<double>::infinity(), prev_cos = prev_eps;
  auto sub = subdivide(mixed_fan(), 0);
  for (int n = 0; n < 3; ++n) {
    const auto m = build_triangulation(sub, {});
    CHECK(m.eps < prev_eps);
    CHECK(m.cos_perturbation < prev_cos);
    prev_eps = m.eps;
    prev_cos = m.cos_perturbation;
    sub = medial_subdivide(sub);
  }
}
