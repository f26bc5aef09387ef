#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

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

PlanarTri equilateral() { return planar({0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}); }

void check_contract(const PlanarComplex& c, const PlanarRefinement& r, double margin) {
  const CheckResult conf = conformity_check(c, r);
  CHECK_MESSAGE(conf.pass, conf.detail);
  const AngleCheck a = acuteness_check(c, r, margin);
  CHECK(a.pass);
  CHECK(a.max_angle < pi / 2 - margin);
  CHECK(three_on_edge_count(c, r) == 0);
  for (size_t t = 0; t < c.charts.size(); ++t) CHECK(star_separation(c.charts[t], r.cells[t]) > 0);
  CHECK(tiling_check(c, r).pass);
}

}  // namespace

TEST_CASE("subdivide_edges counts") {
  AcuteParams p;
  p.h = 0.4;
  const auto c = planar_complex_from({equilateral()}, {{{0, 1, 2}}});
  const auto s = subdivide_edges(c, p);
  REQUIRE(s.size() == 3);
  for (const auto& e : s) {
    REQUIRE(e.size() == 2);
    CHECK(e[0] == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(e[1] == doctest::Approx(2.0 / 3).epsilon(1e-15));
  }
  // A long edge is split against the shortest side of its triangles.
  const auto thin = planar_complex_from({planar({0, 0}, {2, 0}, {1, 0.5})}, {{{0, 1, 2}}});
  const auto st = subdivide_edges(thin, {});
  const double shortest = std::hypot(1.0, 0.5);
  CHECK(st[0].size() + 1 == static_cast<size_t>(std::ceil(2 / (shortest / 3))));
  CHECK(st[1].size() + 1 == 3);
}

TEST_CASE("equilateral cell refines regularly") {
  const auto c = planar_complex_from({equilateral()}, {{{0, 1, 2}}});
  const auto r = acute_refine(c, {});
  CHECK(r.regular_cells == 1);
  const AngleCheck a = acuteness_check(c, r, 0.05);
  CHECK(a.max_angle == doctest::Approx(pi / 3).epsilon(1e-12));
  CHECK(a.min_angle == doctest::Approx(pi / 3).epsilon(1e-12));
  check_contract(c, r, 0.05);
}

TEST_CASE("right isosceles triangle") {
  const auto c = planar_complex_from({planar({0, 0}, {1, 0}, {0, 1})}, {{{0, 1, 2}}});
  const auto r = acute_refine(c, {});
  CHECK(r.regular_cells == 0);
  check_contract(c, r, 0.05);
}

TEST_CASE("two glued charts agree on the shared edge") {
  const auto c = planar_complex_from({planar({0, 0}, {1, 0}, {0.3, 0.8}), planar({1, 0}, {0, 0}, {0.6, -0.9})},
                                     {{{0, 1, 2}, {1, 0, 3}}});
  REQUIRE(c.edge_length.size() == 5);
  const auto r = acute_refine(c, {});
  check_contract(c, r, 0.05);
  // The shared class carries the same parameters in both cells.
  const int e = c.tri_edge[0][0];
  CHECK(c.tri_edge[1][0] == e);
  std::vector<double> a, b;
  for (const auto& v : r.cells[0].vertices)
    if (v.kind == RefVertexKind::Edge && v.edge == e) a.push_back(v.s);
  for (const auto& v : r.cells[1].vertices)
    if (v.kind == RefVertexKind::Edge && v.edge == e) b.push_back(v.s);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
  CHECK(a == r.edge_params[e]);
}

TEST_CASE("branching edge shared by three cells") {
  const auto c = planar_complex_from(
      {planar({0, 0}, {1, 0}, {0.5, 0.7}), planar({1, 0}, {0, 0}, {0.4, -0.8}), planar({1, 0}, {0, 0}, {0.6, -0.6})},
      {{{0, 1, 2}, {1, 0, 3}, {1, 0, 4}}});
  const auto r = acute_refine(c, {});
  check_contract(c, r, 0.05);
}

TEST_CASE("star separation") {
  const PlanarTri t = equilateral();
  CellRefinement cell;
  RefVertex v;
  v.xy = (t.v[0] + t.v[1] + t.v[2]) / 3;
  cell.vertices.push_back(v);
  CHECK(star_separation(t, cell) == doctest::Approx(pi / 6).epsilon(1e-14));
  cell.vertices[0].xy = Vec2d(0.5, 1e-6);
  CHECK(star_separation(t, cell) == doctest::Approx(std::atan(2e-6)).epsilon(1e-9));
  cell.vertices.clear();
  CHECK(std::isinf(star_separation(t, cell)));
}

TEST_CASE("refinement is deterministic") {
  const auto c = random_planar_complex(7, 4);
  const auto a = acute_refine(c, {});
  const auto b = acute_refine(c, {});
  REQUIRE(a.cells.size() == b.cells.size());
  CHECK(a.edge_params == b.edge_params);
  for (size_t t = 0; t < a.cells.size(); ++t) {
    CHECK(a.cells[t].triangles == b.cells[t].triangles);
    REQUIRE(a.cells[t].vertices.size() == b.cells[t].vertices.size());
    for (size_t i = 0; i < a.cells[t].vertices.size(); ++i) CHECK(a.cells[t].vertices[i].xy == b.cells[t].vertices[i].xy);
  }
}

TEST_CASE("parameter checks") {
  const auto c = planar_complex_from({equilateral()}, {{{0, 1, 2}}});
  AcuteParams p;
  p.min_angle = 1.6;
  CHECK_THROWS_AS(acute_refine(c, p), Error);
  try {
    acute_refine(c, p);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::OutOfRange);
  }
}

TEST_CASE("random complexes satisfy the refiner contract") {
  for (int i = 0; i < 8; ++i) {
    CAPTURE(i);
    const auto c = random_planar_complex(500 + i, 2 + i % 4);
    const auto r = acute_refine(c, {});
    check_contract(c, r, 0.05);
    // Angles also stay above the requested minimum.
    CHECK(acuteness_check(c, r, 0.05).min_angle > AcuteParams{}.min_angle);
  }
}

TEST_CASE("tighter margin is honored") {
  AcuteParams p;
  p.margin = 0.15;
  const auto c = random_planar_complex(11, 3);
  const auto r = acute_refine(c, p);
  check_contract(c, r, 0.15);
}
