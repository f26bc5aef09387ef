#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "kmesh/verify.hpp"
#include "support.hpp"

using namespace kmesh;
using namespace testsupport;
using std::numbers::pi;

namespace {

PlanarTri planar(Vec2d a, Vec2d b, Vec2d c) {
  PlanarTri t;
  t.v = {a, b, c};
  return t;
}

// Regular k-fold refinement of every chart; only valid when all edges match.
PlanarRefinement regular(const PlanarComplex& c, int k) {
  PlanarRefinement r;
  r.edge_params.resize(c.edge_length.size());
  for (size_t e = 0; e < c.edge_length.size(); ++e)
    for (int j = 1; j < k; ++j) r.edge_params[e].push_back(c.edge_length[e] * j / k);
  for (size_t t = 0; t < c.charts.size(); ++t) {
    CellRefinement cell = regular_cell(c.charts[t], k);
    for (RefVertex& v : cell.vertices) {
      if (v.kind != RefVertexKind::Edge) continue;
      v.edge = c.tri_edge[t][v.side];
      if (c.tri_flip[t][v.side]) v.s = c.edge_length[v.edge] - v.s;
    }
    r.cells.push_back(cell);
  }
  return r;
}

Triangle scaled(double kappa, double diam) {
  // Fixed shape: sides proportional to (1, 0.8, 0.9).
  return realize_triangle(kappa, diam, 0.8 * diam, 0.9 * diam);
}

}  // namespace

TEST_CASE("acuteness_check on planar meshes") {
  const auto eq = planar_complex_from({planar({0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2})}, {{{0, 1, 2}}});
  const AngleCheck a = acuteness_check(eq, regular(eq, 4), 0.05);
  CHECK(a.pass);
  CHECK(a.max_angle == doctest::Approx(pi / 3).epsilon(1e-12));

  const auto right = planar_complex_from({planar({0, 0}, {1, 0}, {0, 1})}, {{{0, 1, 2}}});
  const AngleCheck b = acuteness_check(right, regular(right, 2), 0.01);
  CHECK_FALSE(b.pass);
  CHECK(b.max_angle == doctest::Approx(pi / 2).epsilon(1e-12));
}

TEST_CASE("planar conformity detects a moved side vertex") {
  const auto c = planar_complex_from({planar({0, 0}, {1, 0}, {0.5, 0.8}), planar({1, 0}, {0, 0}, {0.5, -0.8})},
                                     {{{0, 1, 2}, {1, 0, 3}}});
  auto r = regular(c, 3);
  const CheckResult ok = conformity_check(c, r);
  CHECK_MESSAGE(ok.pass, ok.detail);
  CHECK(three_on_edge_count(c, r) == 0);
  // Slide one point of the shared side by 1e-3 in the second cell only.
  for (RefVertex& v : r.cells[1].vertices)
    if (v.kind == RefVertexKind::Edge && v.side == 0) {
      v.xy.x() += 1e-3;
      break;
    }
  const CheckResult bad = conformity_check(c, r);
  CHECK_FALSE(bad.pass);
  CHECK(bad.detail.find("edge " + std::to_string(c.tri_edge[0][0])) != std::string::npos);
  CHECK(bad.worst == doctest::Approx(1e-3).epsilon(1e-6));
}

TEST_CASE("tiling check catches overlaps and gaps") {
  const auto c = planar_complex_from({planar({0, 0}, {1, 0}, {0.5, 0.8})}, {{{0, 1, 2}}});
  auto r = regular(c, 2);
  CHECK(tiling_check(c, r).pass);
  r.cells[0].triangles.pop_back();
  CHECK_FALSE(tiling_check(c, r).pass);
  r = regular(c, 2);
  std::swap(r.cells[0].triangles[0][0], r.cells[0].triangles[0][1]);
  CHECK_FALSE(tiling_check(c, r).pass);
}

TEST_CASE("three vertices on one edge") {
  const auto c = planar_complex_from({planar({0, 0}, {1, 0}, {0.5, 0.8})}, {{{0, 1, 2}}});
  PlanarRefinement r;
  r.edge_params = {{0.5}, {}, {}};
  CellRefinement cell;
  RefVertex a, b, m, top;
  a.kind = RefVertexKind::Corner, a.corner = 0, a.xy = c.charts[0].v[0];
  b.kind = RefVertexKind::Corner, b.corner = 1, b.xy = c.charts[0].v[1];
  top.kind = RefVertexKind::Corner, top.corner = 2, top.xy = c.charts[0].v[2];
  m.kind = RefVertexKind::Edge, m.side = 0, m.edge = 0, m.s = 0.5, m.xy = Vec2d(0.5, 0);
  cell.vertices = {a, b, top, m};
  cell.triangles = {{0, 3, 2}, {3, 1, 2}};
  r.cells = {cell};
  CHECK(three_on_edge_count(c, r) == 0);
  cell.triangles.push_back({0, 3, 1});  // degenerate sliver along the side
  r.cells = {cell};
  CHECK(three_on_edge_count(c, r) == 1);
}

TEST_CASE("merged output passes, pre-merge dissection of mixed curvature does not") {
  const auto sub = subdivide(mixed_fan(), 0);
  const auto r = acute_refine(comparison_complex(sub), {});
  const auto d = pull_back(sub, r);
  const CheckResult pre = conformity_check(sub, d);
  CHECK_FALSE(pre.pass);
  CHECK(pre.worst > 1e-4);
  const auto m = merge_edge_vertices(sub, r, d);
  const CheckResult post = conformity_check(m);
  CHECK_MESSAGE(post.pass, post.detail);

  // Same curvature on both sides: the dissection already agrees.
  const auto hsub = subdivide(hyperbolic_pair(), 0);
  const auto hr = acute_refine(comparison_complex(hsub), {});
  CHECK(conformity_check(hsub, pull_back(hsub, hr)).pass);
}

TEST_CASE("verify on pipeline output") {
  for (const auto& c : {hyperbolic_pair(), mixed_fan()}) {
    const auto m = run_pipeline(c, {}).mesh;
    const QualityReport q = verify(m, 0.01);
    CHECK(q.pass());
    CHECK(q.coordinates.pass);
    CHECK(q.tiling.pass);
    CHECK(q.three_on_edge == 0);
    CHECK(q.gauss_bonnet < 1e-8);
    CHECK(q.max_angle == doctest::Approx(m.max_angle).epsilon(1e-12));
    // Recomputed from coordinates, not copied.
    CHECK(q.eps == doctest::Approx(m.eps).epsilon(1e-9));
    CHECK(q.star > 0);
  }
}

TEST_CASE("verify catches corrupted coordinates") {
  const auto good = run_pipeline(mixed_fan(), {}).mesh;
  SUBCASE("interior vertex") {
    auto m = good;
    for (auto& v : m.vertices)
      if (v.kind == MeshVertexKind::Interior) {
        v.xy.x() += 1e-3;
        break;
      }
    CHECK_FALSE(coordinate_check(m).pass);
    CHECK_FALSE(verify(m, 0.01).pass());
  }
  SUBCASE("edge parameter") {
    auto m = good;
    for (auto& v : m.vertices)
      if (v.kind == MeshVertexKind::Edge) {
        v.s += 1e-4;
        break;
      }
    CHECK_FALSE(coordinate_check(m).pass);
  }
  SUBCASE("off the surface") {
    auto m = good;
    for (auto& v : m.vertices)
      if (v.kind == MeshVertexKind::Interior) {
        v.x.x *= 1 + 1e-6;
        break;
      }
    CHECK_FALSE(coordinate_check(m).pass);
  }
}

TEST_CASE("Gauss-Bonnet residual") {
  const auto flat = make_complex({tri(0, 0.0, 1, 1.1, 0.9)}, {});
  const auto m = run_pipeline(flat, {}).mesh;
  CHECK(gauss_bonnet_check(m) < 1e-12);
  const auto oct = run_pipeline(octahedron(), {}).mesh;
  CHECK(gauss_bonnet_check(oct) < 1e-8);
  // Octant: excess pi/2 equals the area.
  const Triangle t = make_triangle(Point{1.0, Vec3d(1, 0, 0)}, Point{1.0, Vec3d(0, 1, 0)}, Point{1.0, Vec3d(0, 0, 1)});
  const double excess = angle_at(t.v[2], t.v[0], t.v[1]) + angle_at(t.v[0], t.v[1], t.v[2]) + angle_at(t.v[1], t.v[2], t.v[0]) - pi;
  CHECK(excess == doctest::Approx(pi / 2).epsilon(1e-14));
  CHECK(triangle_area(t) == doctest::Approx(excess).epsilon(1e-14));
}

TEST_CASE("distortion_probe") {
  const Triangle flat = scaled(0.0, 1.0);
  CHECK(distortion_probe(flat, chart_for(flat), 6) < 1e-12);

  double prev = std::numeric_limits<double>::infinity();
  for (double diam : {0.2, 0.1, 0.05, 0.025}) {
    const Triangle t = scaled(-1.0, diam);
    const double d = distortion_probe(t, chart_for(t), 6);
    CHECK(d < prev);
    CHECK(d > 0);
    prev = d;
  }
  CHECK(prev < 0.01);

  // Spherical triangle inside B(P, eps): distortion has the order of the
  // bracket width.
  for (double eps : {0.2, 0.1, 0.05}) {
    const Triangle t = scaled(1.0, eps);
    const auto [lo, hi] = metric_ratio_bounds(1.0, eps);
    const double d = distortion_probe(t, chart_for(t), 6);
    CAPTURE(eps);
    CHECK(d < 10 * (hi - lo));
    CHECK(d > 0.01 * (hi - lo));
  }
}

TEST_CASE("quality report output") {
  const auto m = run_pipeline(hyperbolic_pair(), {}).mesh;
  const QualityReport q = verify(m, 0.01);
  std::ostringstream text, csv;
  q.write_text(text);
  CHECK(text.str().find("overall PASS") != std::string::npos);
  CHECK(text.str().find("conformity PASS") != std::string::npos);
  q.write_csv_header(csv);
  q.write_csv_row(csv);
  const std::string s = csv.str();
  CHECK(std::count(s.begin(), s.end(), '\n') == 2);
  const auto header = s.substr(0, s.find('\n'));
  const auto row = s.substr(s.find('\n') + 1);
  CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
}
