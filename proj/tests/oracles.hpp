#pragma once

#include <algorithm>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "kmesh/pullback.hpp"

namespace testsupport {

using namespace kmesh;

// Vertex labels that do not depend on either side's numbering: corners by vertex
// class, edge points by (edge class, rank along the class), interior points by
// cell and exact chart coordinates.
struct Signature {
  std::size_t vertices = 0, edges = 0, faces = 0;
  std::set<std::array<std::string, 3>> triangles;
  std::size_t hash = 0;
  bool operator==(const Signature&) const = default;
};

inline std::string hex(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

inline Signature finish(std::vector<std::array<std::string, 3>> tris) {
  Signature s;
  std::set<std::string> verts;
  std::set<std::pair<std::string, std::string>> edges;
  for (auto& t : tris) {
    for (int k = 0; k < 3; ++k) {
      verts.insert(t[k]);
      edges.insert(std::minmax(t[k], t[(k + 1) % 3]));
    }
    std::sort(t.begin(), t.end());
    s.triangles.insert(t);
  }
  s.vertices = verts.size();
  s.edges = edges.size();
  s.faces = tris.size();
  std::string all;
  for (const auto& t : s.triangles) all += t[0] + "|" + t[1] + "|" + t[2] + ";";
  s.hash = std::hash<std::string>{}(all);
  return s;
}

inline Signature planar_signature(const PlanarComplex& c, const PlanarRefinement& r) {
  std::vector<std::array<std::string, 3>> tris;
  for (size_t t = 0; t < r.cells.size(); ++t) {
    const auto& cell = r.cells[t];
    auto label = [&](int i) -> std::string {
      const RefVertex& v = cell.vertices[i];
      switch (v.kind) {
        case RefVertexKind::Corner:
          return "C" + std::to_string(c.tri_vertex[t][v.corner]);
        case RefVertexKind::Edge: {
          const auto& ps = r.edge_params[v.edge];
          const long slot = std::lower_bound(ps.begin(), ps.end(), v.s) - ps.begin();
          return "E" + std::to_string(v.edge) + ":" + std::to_string(slot);
        }
        default:
          return "I" + std::to_string(t) + ":" + hex(v.xy.x()) + "," + hex(v.xy.y());
      }
    };
    for (const auto& tri : cell.triangles) tris.push_back({label(tri[0]), label(tri[1]), label(tri[2])});
  }
  return finish(std::move(tris));
}

inline Signature mesh_signature(const AcuteTriangulation& m) {
  std::vector<std::vector<double>> params(m.sub.edges.size());
  for (const MeshVertex& v : m.vertices)
    if (v.kind == MeshVertexKind::Edge) params[v.edge].push_back(v.s);
  for (auto& p : params) std::sort(p.begin(), p.end());
  auto label = [&](int i) -> std::string {
    const MeshVertex& v = m.vertices[i];
    switch (v.kind) {
      case MeshVertexKind::Lattice:
        return "C" + std::to_string(v.level_vertex);
      case MeshVertexKind::Edge: {
        const auto& ps = params[v.edge];
        const long slot = std::lower_bound(ps.begin(), ps.end(), v.s) - ps.begin();
        return "E" + std::to_string(v.edge) + ":" + std::to_string(slot);
      }
      default:
        return "I" + std::to_string(v.tri) + ":" + hex(v.xy.x()) + "," + hex(v.xy.y());
    }
  };
  std::vector<std::array<std::string, 3>> tris;
  for (const MeshTriangle& t : m.triangles) tris.push_back({label(t.v[0]), label(t.v[1]), label(t.v[2])});
  return finish(std::move(tris));
}

}  // namespace testsupport
