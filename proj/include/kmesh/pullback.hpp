#pragma once

#include <array>
#include <memory>
#include <vector>

#include "kmesh/refine.hpp"

namespace kmesh {

// Pulled-back refinement of one level-n triangle, in its base cell's frame.
struct CellDissection {
  std::vector<RefVertex> vertices;
  std::vector<Point> points;
  std::vector<std::array<int, 3>> triangles;
};

struct CurvedDissection {
  std::vector<Chart> charts;  // per level-n triangle
  std::vector<CellDissection> cells;
};

struct SnapRecord {
  int edge = -1;       // level-n edge
  double s = 0;        // planar parameter, also the merged arc length
  std::vector<int> triangles;
  std::vector<double> preimage;  // distance from the edge start to each preimage
  std::vector<double> distance;  // displacement of each preimage
};

enum class MeshVertexKind { Lattice, Edge, Interior };

struct MeshVertex {
  MeshVertexKind kind = MeshVertexKind::Lattice;
  int level_vertex = -1;  // lattice
  int edge = -1;          // edge: level-n edge and parameter along it
  double s = 0;
  int tri = -1;  // interior: level-n triangle and chart position
  Vec2d xy = Vec2d::Zero();
  int cell = -1;  // home cell (base complex index) of x
  Point x;
};

struct MeshTriangle {
  int tri = -1;    // level-n triangle
  int local = -1;  // triangle index inside that cell's refinement
  std::array<int, 3> v{};
};

struct AcuteTriangulation {
  SubdividedComplex sub;
  std::vector<MeshVertex> vertices;
  std::vector<MeshTriangle> triangles;
  std::vector<SnapRecord> snaps;

  double eps = 0;               // max snap distance
  double eps_ratio = 0;         // eps over the shortest output edge
  double cos_perturbation = 0;  // max |cos(merged) - cos(pre-merge)|
  double comparability = 0;     // max side over min side, worst triangle
  double star = 0;              // refiner separation angle
  double min_angle = 0, max_angle = 0;

  // Vertex v placed inside level-n triangle `tri`, in its base cell's frame.
  Point position(int v, int tri) const;
  std::array<Point, 3> corners(int t) const;
};

CurvedDissection pull_back(const SubdividedComplex& sub, const PlanarRefinement& r);

// Throws ParameterMismatch when incident triangles disagree on an edge.
AcuteTriangulation merge_edge_vertices(const SubdividedComplex& sub, const PlanarRefinement& r,
                                       const CurvedDissection& d);

struct PipelineParams {
  AcuteParams acute;
  double final_margin = 0.01;
  int level_cap = 8;
  int start_level = 0;
};

struct PipelineAttempt {
  int level = 0;
  bool refined = false;
  double max_angle = 0;  // after merge, when refined
  std::string note;
};

struct PipelineResult {
  AcuteTriangulation mesh;
  std::vector<PipelineAttempt> attempts;
};

// Raised by run_pipeline when no level up to the cap certifies.
class PipelineFailure : public Error {
 public:
  PipelineFailure(const std::string& what, std::vector<PipelineAttempt> attempts,
                  std::shared_ptr<AcuteTriangulation> best)
      : Error(Errc::LevelCapExceeded, what), attempts(std::move(attempts)), best(std::move(best)) {}
  std::vector<PipelineAttempt> attempts;
  std::shared_ptr<AcuteTriangulation> best;  // null when no level could be refined
};

AcuteTriangulation build_triangulation(const SubdividedComplex& sub, const AcuteParams& params);

PipelineResult run_pipeline(const CurvedComplex& c, const PipelineParams& params);

}  // namespace kmesh
