#pragma once

// Small planar triangulation toolkit used by the acute refiner.

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "kmesh/geom.hpp"

namespace kmesh::mesh2d {

double orient(const Vec2d& a, const Vec2d& b, const Vec2d& c);

// Angles at a, b, c.
std::array<double, 3> angles(const Vec2d& a, const Vec2d& b, const Vec2d& c);

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

struct TriMesh {
  std::vector<Vec2d> P;
  std::vector<std::array<int, 3>> T;  // counter-clockwise
  std::vector<char> movable;
  std::unordered_map<std::uint64_t, char> locked;  // edges that must not flip

  int add_point(const Vec2d& p, bool can_move);
  bool is_locked(int a, int b) const { return locked.count(edge_key(a, b)) != 0; }
  double min_angle() const;
  double max_angle() const;
};

// Ear clipping of a simple counter-clockwise polygon; picks the ear with the
// best minimum angle, ties to the lowest ring position. Empty on failure.
std::vector<std::array<int, 3>> ear_clip(const std::vector<Vec2d>& P, const std::vector<int>& ring);

// Inserts vertex v (already in P) into the triangle containing it, splitting an
// unlocked edge when it lands on one. Returns false if it cannot be placed.
bool insert_point(TriMesh& m, int v);

enum class FlipRule { Delaunay, MaxAngle };
int flip_pass(TriMesh& m, FlipRule rule);

// Flips toward per-vertex target valences.
int flip_valence(TriMesh& m, const std::vector<int>& target);

// Gradient descent on sum over angles of exp(beta (theta - hi)) + exp(beta (lo - theta)),
// moving only movable vertices and never inverting a triangle.
void smooth(TriMesh& m, double lo, double hi, double beta, int iters);

// Pattern search per movable vertex on the worst angle-bound violation of its
// star. Returns the number of vertex moves.
int optimize_vertices(TriMesh& m, double lo, double hi, int sweeps);

}  // namespace kmesh::mesh2d
