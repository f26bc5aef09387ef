#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kmesh/complex.hpp"

namespace kmesh {

// Points of a level-n cell are indexed by lattice coordinates (i, j) with
// barycentric weights (N - i - j, i, j) on the corners, N = 2^n.
struct Lattice {
  int N = 1;
  int index(int i, int j) const { return j * (N + 1) - j * (j - 1) / 2 + i; }
  int size() const { return (N + 1) * (N + 2) / 2; }
  std::array<int, 2> coords(int idx) const;
};

struct SubTriangle {
  int cell = 0;               // cell index in the base complex
  std::array<int, 3> p{};     // lattice indices, counter-clockwise
  std::uint64_t path = 0;     // child slots from level 0, two bits per level (3 = central)
};

enum class LevelEdgeKind { Boundary, Interior };
struct LevelEdge {
  LevelEdgeKind kind = LevelEdgeKind::Boundary;
  int base_edge = -1;  // boundary: edge class of the base complex
  int segment = -1;    // boundary: segment index along the class orientation
  int cell = -1;       // interior: cell index
  int a = -1, b = -1;  // interior: lattice indices, a < b (class orientation a -> b)
};

enum class LevelVertexKind { Corner, Edge, Interior };
struct LevelVertex {
  LevelVertexKind kind = LevelVertexKind::Corner;
  int base = -1;   // corner: vertex class; edge: edge class; interior: cell index
  int index = -1;  // edge: lattice step along the class (1..N-1); interior: lattice index
};

struct SubdividedComplex {
  CurvedComplex complex;
  ChartLayout layout;
  int level = 0;
  Lattice lattice;
  std::vector<std::vector<Point>> points;  // per cell, by lattice index
  std::vector<SubTriangle> triangles;

  // Combinatorics of T_n. Side s of triangle t runs from corner s to corner s+1.
  std::vector<std::array<int, 3>> tri_vertex;
  std::vector<std::array<int, 3>> tri_edge;
  std::vector<std::array<char, 3>> tri_flip;
  std::vector<LevelEdge> edges;
  std::vector<double> edge_length;
  std::vector<LevelVertex> vertices;

  Triangle geodesic(int t) const;
  std::array<double, 3> side_lengths(int t) const;  // canonical (v0v1, v1v2, v2v0)
  int boundary_edge_id(int base_edge, int segment) const;
  int edge_vertex_id(int base_edge, int step) const;
};

SubdividedComplex subdivide(const CurvedComplex& c, int levels);
SubdividedComplex medial_subdivide(const SubdividedComplex& c);

struct LevelStats {
  int level = 0;
  double max_edge = 0;
  double min_angle = 0;
  double max_angle = 0;
};

struct ConvergenceStats {
  std::vector<LevelStats> rows;
  void write_csv(std::ostream& os) const;
};

LevelStats level_stats(const SubdividedComplex& c);

struct SubdivisionTarget {
  int levels = -1;        // >= 0 selects a fixed level
  double max_edge = 0;    // otherwise subdivide until every edge is below this
  int level_cap = 30;
};

struct SubdivisionResult {
  SubdividedComplex complex;
  ConvergenceStats stats;
};

SubdivisionResult subdivide_to(const CurvedComplex& c, const SubdivisionTarget& target);

// Euclidean comparison complex: one canonical comparison triangle per cell,
// glued along shared edge classes.
struct PlanarComplex {
  std::vector<PlanarTri> charts;
  std::vector<std::array<int, 3>> tri_vertex;
  std::vector<std::array<int, 3>> tri_edge;
  std::vector<std::array<char, 3>> tri_flip;
  std::vector<double> edge_length;
  int vertex_count = 0;
  // Angles of the curved triangles behind the charts, per corner; empty for plain
  // planar input. The refiner sizes corner fans by the larger of the two.
  std::vector<std::array<double, 3>> corner_angles;
};

PlanarComplex comparison_complex(const SubdividedComplex& c);

// Fills tri_edge/tri_flip/tri_vertex/edge_length from per-triangle corner
// vertex ids, treating triangles that share a vertex pair as glued there.
PlanarComplex planar_complex_from(const std::vector<PlanarTri>& charts, const std::vector<std::array<int, 3>>& corners);

}  // namespace kmesh
