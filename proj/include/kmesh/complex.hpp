#pragma once

#include <array>
#include <string>
#include <vector>

#include "kmesh/geom.hpp"

namespace kmesh {

enum class CellKind { Triangle, Polygon };
enum class Orientation { Preserving, Reversing };

// Side i of a cell runs from corner i to corner (i+1) mod n.
struct CellSpec {
  int id = 0;
  double kappa = 0;
  CellKind kind = CellKind::Triangle;
  std::vector<double> side_lengths;
  // Optional corner coordinates in the cell's projective chart (gnomonic for
  // kappa > 0, Klein for kappa < 0, the plane itself for kappa = 0).
  std::vector<Vec2d> chart_vertices;

  int sides() const {
    return static_cast<int>(chart_vertices.empty() ? side_lengths.size() : chart_vertices.size());
  }
};

struct SideRef {
  int cell = 0;  // cell id
  int edge = 0;
};

// Preserving glues start to start; reversing glues the start of one side to the
// end of the other.
struct Gluing {
  SideRef a, b;
  Orientation orientation = Orientation::Reversing;
};

struct SideUse {
  int cell = 0;  // cell index
  int side = 0;
  bool flipped = false;  // runs against the class orientation
};

struct EdgeClass {
  std::vector<SideUse> uses;
  double length = 0;
};

struct VertexClass {
  std::vector<std::array<int, 2>> corners;  // (cell index, corner)
};

struct Issue {
  std::string kind;
  std::string detail;
  int cell = -1;
  int edge = -1;
};

struct ValidationReport {
  std::vector<Issue> issues;
  bool ok() const { return issues.empty(); }
};

struct CurvedComplex {
  std::vector<CellSpec> cells;
  std::vector<Gluing> gluings;

  // Derived by classify().
  std::vector<EdgeClass> edges;
  std::vector<VertexClass> vertices;
  std::vector<std::vector<int>> side_class;
  std::vector<std::vector<char>> side_flipped;
  std::vector<std::vector<int>> corner_class;
  std::vector<Issue> structural;

  int index_of(int id) const;
  double side_length(int cell, int side) const;
};

// Rebuilds the edge and vertex identification classes. Structural problems
// (unknown ids, contradictory gluings) are collected in `structural`.
void classify(CurvedComplex& c);

CurvedComplex make_complex(std::vector<CellSpec> cells, std::vector<Gluing> gluings);

ValidationReport validate(const CurvedComplex& c);

struct Dissection {
  CurvedComplex complex;
  std::vector<int> source_cell;  // per output cell, id of the input cell it came from
};

Dissection dissect_polygons(const CurvedComplex& c);

struct ChartLayout {
  std::vector<Triangle> cells;
};

ChartLayout layout(const CurvedComplex& c);

// Canonical realization of a triangle with edge lengths (v0v1, v1v2, v2v0).
Triangle realize_triangle(double kappa, double e01, double e12, double e20);

}  // namespace kmesh
