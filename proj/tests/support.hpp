#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "kmesh/medial.hpp"

namespace testsupport {

using namespace kmesh;

inline CellSpec tri(int id, double kappa, double a, double b, double c) {
  CellSpec s;
  s.id = id;
  s.kappa = kappa;
  s.side_lengths = {a, b, c};
  return s;
}

// Octant cells with corners (X, Y, Z) on the unit sphere, one per sign pattern.
inline CurvedComplex octahedron() {
  const double q = std::numbers::pi / 2;
  std::vector<CellSpec> cells;
  for (int i = 0; i < 8; ++i) cells.push_back(tri(i, 1.0, q, q, q));
  std::vector<Gluing> g;
  // Octant i has signs from bits (x: 1, y: 2, z: 4). Flipping z shares X-Y (side 0),
  // flipping x shares Y-Z (side 1), flipping y shares Z-X (side 2).
  for (int i = 0; i < 8; ++i) {
    if (!(i & 4)) g.push_back({{i, 0}, {i | 4, 0}, Orientation::Preserving});
    if (!(i & 1)) g.push_back({{i, 1}, {i | 1, 1}, Orientation::Preserving});
    if (!(i & 2)) g.push_back({{i, 2}, {i | 2, 2}, Orientation::Preserving});
  }
  return make_complex(cells, g);
}

inline CurvedComplex hyperbolic_pair() {
  return make_complex({tri(0, -1.0, 1, 1, 1), tri(1, -1.0, 1, 1, 1)}, {{{0, 0}, {1, 0}, Orientation::Reversing}});
}

// Spherical, flat and hyperbolic unit-sided triangles around a common vertex.
inline CurvedComplex mixed_fan() {
  return make_complex({tri(0, 1.0, 1, 1, 1), tri(1, 0.0, 1, 1, 1), tri(2, -1.0, 1, 1, 1)},
                      {{{0, 2}, {1, 0}, Orientation::Reversing},
                       {{1, 2}, {2, 0}, Orientation::Reversing},
                       {{2, 2}, {0, 0}, Orientation::Reversing}});
}

// Angles (a, b, pi - a - b), each above lo.
inline std::array<double, 2> random_angles(std::mt19937_64& rng, double lo) {
  std::uniform_real_distribution<double> U(0, 1);
  for (;;) {
    const double a = lo + U(rng) * (std::numbers::pi - 3 * lo);
    const double b = lo + U(rng) * (std::numbers::pi - a - 2 * lo);
    if (std::numbers::pi - a - b > lo) return {a, b};
  }
}

// Planar triangles glued edge to edge: each new triangle sits on a random existing
// edge (so edges may branch), all angles in (lo, pi - lo).
inline PlanarComplex random_planar_complex(std::uint64_t seed, int triangles, double lo = 0.3) {
  std::mt19937_64 rng(seed);
  std::vector<PlanarTri> charts;
  std::vector<std::array<int, 3>> corners;
  auto [a0, b0] = random_angles(rng, lo);
  PlanarTri t0;
  t0.v[0] = Vec2d(0, 0);
  t0.v[1] = Vec2d(1, 0);
  const double ac = std::sin(b0) / std::sin(a0 + b0);
  t0.v[2] = Vec2d(ac * std::cos(a0), ac * std::sin(a0));
  charts.push_back(t0);
  corners.push_back({0, 1, 2});
  int next = 3;
  while (static_cast<int>(charts.size()) < triangles) {
    const int t = std::uniform_int_distribution<int>(0, static_cast<int>(charts.size()) - 1)(rng);
    const int k = std::uniform_int_distribution<int>(0, 2)(rng);
    const Vec2d A = charts[t].v[k], B = charts[t].v[(k + 1) % 3];
    auto [alpha, beta] = random_angles(rng, lo);
    const Vec2d u = (A - B).normalized();
    const Vec2d dir(std::cos(alpha) * u.x() - std::sin(alpha) * u.y(), std::sin(alpha) * u.x() + std::cos(alpha) * u.y());
    const double len = (A - B).norm() * std::sin(beta) / std::sin(alpha + beta);
    PlanarTri n;
    n.v = {B, A, B + len * dir};
    charts.push_back(n);
    corners.push_back({corners[t][(k + 1) % 3], corners[t][k], next++});
  }
  return planar_complex_from(charts, corners);
}

}  // namespace testsupport
