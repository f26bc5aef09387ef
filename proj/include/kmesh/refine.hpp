#pragma once

#include <array>
#include <vector>

#include "kmesh/medial.hpp"

namespace kmesh {

struct AcuteParams {
  double margin = 0.05;
  double min_angle = 0.25;
  double h = 1.0 / 3.0;
  int budget = 50;
};

enum class RefVertexKind { Corner, Edge, Interior };

struct RefVertex {
  RefVertexKind kind = RefVertexKind::Interior;
  int corner = -1;  // corner: local corner index
  int side = -1;    // edge: local side index
  int edge = -1;    // edge: edge class
  double s = 0;     // edge: arc-length parameter in the class orientation
  int slot = -1;    // edge: position in the side's point list, from the side's start
  Vec2d xy = Vec2d::Zero();
};

struct CellRefinement {
  std::vector<RefVertex> vertices;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
};

struct PlanarRefinement {
  std::vector<CellRefinement> cells;
  std::vector<std::vector<double>> edge_params;  // per edge class, interior parameters ascending
  int rounds = 0;
  int regular_cells = 0;
};

// Equal-arc split of every edge class: k = ceil(L / (h * L_ref)) pieces, L_ref the
// shortest edge of any incident triangle.
std::vector<std::vector<double>> subdivide_edges(const PlanarComplex& c, const AcuteParams& params);

// Throws BudgetExhausted when no certified refinement is found.
PlanarRefinement acute_refine(const PlanarComplex& c, const AcuteParams& params);

// Minimum over interior vertices X and chart sides of the two base angles of the
// triangle (X, side endpoints); +inf without interior vertices.
double star_separation(const PlanarTri& chart, const CellRefinement& cell);

// Cell triangulation with prescribed side points (distances from each side's start
// corner). Empty result when the cell could not be certified.
struct CellMeshOptions {
  double margin = 0.05;
  double min_angle = 0.25;
  int variant = 0;
  std::array<double, 3> corner_angles{};  // fan sizing floor per corner
};
CellRefinement mesh_cell(const PlanarTri& chart, const std::array<std::vector<double>, 3>& side_points,
                         const CellMeshOptions& opt);

// Regular k-fold subdivision (k^2 triangles similar to the chart).
CellRefinement regular_cell(const PlanarTri& chart, int k);

}  // namespace kmesh
