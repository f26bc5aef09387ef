#include "kmesh/complex.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace kmesh {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// Union-find over sides with a parity bit (relative orientation).
struct ParityDsu {
  std::vector<int> parent;
  std::vector<char> parity;  // parity relative to parent

  explicit ParityDsu(int n) : parent(n), parity(n, 0) { std::iota(parent.begin(), parent.end(), 0); }

  std::pair<int, int> find(int x) {
    int p = 0;
    int r = x;
    while (parent[r] != r) {
      p ^= parity[r];
      r = parent[r];
    }
    // path compression
    int cur = x, acc = p;
    while (parent[cur] != cur) {
      const int next = parent[cur];
      const int np = acc ^ parity[cur];
      parent[cur] = r;
      parity[cur] = static_cast<char>(acc);
      acc = np;
      cur = next;
    }
    return {r, p};
  }

  // Returns false on a parity contradiction.
  bool unite(int a, int b, int rel) {
    auto [ra, pa] = find(a);
    auto [rb, pb] = find(b);
    if (ra == rb) return ((pa ^ pb) == rel);
    if (rb < ra) {
      std::swap(ra, rb);
      std::swap(pa, pb);
    }
    parent[rb] = ra;
    parity[rb] = static_cast<char>(pa ^ pb ^ rel);
    return true;
  }
};

struct Dsu {
  std::vector<int> parent;
  explicit Dsu(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

double cross2(const Vec2d& a, const Vec2d& b, const Vec2d& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool segments_cross(const Vec2d& p, const Vec2d& q, const Vec2d& r, const Vec2d& s) {
  const double d1 = cross2(p, q, r), d2 = cross2(p, q, s), d3 = cross2(r, s, p), d4 = cross2(r, s, q);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  auto on = [](const Vec2d& a, const Vec2d& b, const Vec2d& c, double d) {
    return d == 0 && std::min(a.x(), b.x()) <= c.x() && c.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= c.y() && c.y() <= std::max(a.y(), b.y());
  };
  return on(p, q, r, d1) || on(p, q, s, d2) || on(r, s, p, d3) || on(r, s, q, d4);
}

bool simple_polygon(const std::vector<Vec2d>& v) {
  const int n = static_cast<int>(v.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) {
        if ((v[i] - v[(i + 1) % n]).norm() == 0) return false;
        continue;
      }
      if (segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) return false;
    }
  return true;
}

double signed_area(const std::vector<Vec2d>& v) {
  double a = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    const auto& p = v[i];
    const auto& q = v[(i + 1) % v.size()];
    a += p.x() * q.y() - p.y() * q.x();
  }
  return a / 2;
}

bool chart_point_ok(double kappa, const Vec2d& x) {
  if (!std::isfinite(x.x()) || !std::isfinite(x.y())) return false;
  if (kappa < 0) return x.squaredNorm() < 1.0 / -kappa;
  return true;
}

}  // namespace

int CurvedComplex::index_of(int id) const {
  for (size_t i = 0; i < cells.size(); ++i)
    if (cells[i].id == id) return static_cast<int>(i);
  return -1;
}

double CurvedComplex::side_length(int cell, int side) const {
  const CellSpec& c = cells.at(cell);
  if (!c.side_lengths.empty()) return c.side_lengths.at(side);
  const int n = static_cast<int>(c.chart_vertices.size());
  const Point p = unproject(c.kappa, c.chart_vertices.at(side));
  const Point q = unproject(c.kappa, c.chart_vertices.at((side + 1) % n));
  return distance(p, q);
}

void classify(CurvedComplex& c) {
  const int nc = static_cast<int>(c.cells.size());
  std::vector<int> offset(nc + 1, 0);
  for (int i = 0; i < nc; ++i) offset[i + 1] = offset[i] + std::max(0, c.cells[i].sides());
  const int total = offset[nc];

  c.structural.clear();
  ParityDsu sides(total);
  Dsu corners(total);
  for (size_t g = 0; g < c.gluings.size(); ++g) {
    const Gluing& gl = c.gluings[g];
    const int ia = c.index_of(gl.a.cell), ib = c.index_of(gl.b.cell);
    if (ia < 0 || ib < 0) {
      c.structural.push_back({"UnknownCell", "gluing " + std::to_string(g) + " references a missing cell id",
                              ia < 0 ? gl.a.cell : gl.b.cell, -1});
      continue;
    }
    const int na = c.cells[ia].sides(), nb = c.cells[ib].sides();
    if (gl.a.edge < 0 || gl.a.edge >= na || gl.b.edge < 0 || gl.b.edge >= nb) {
      const bool bad_a = gl.a.edge < 0 || gl.a.edge >= na;
      c.structural.push_back({"BadEdgeIndex", "gluing " + std::to_string(g) + " uses an edge index out of range",
                              bad_a ? gl.a.cell : gl.b.cell, bad_a ? gl.a.edge : gl.b.edge});
      continue;
    }
    const int sa = offset[ia] + gl.a.edge, sb = offset[ib] + gl.b.edge;
    if (sa == sb) {
      c.structural.push_back({"SelfGluing", "gluing " + std::to_string(g) + " glues a side to itself",
                              gl.a.cell, gl.a.edge});
      continue;
    }
    const bool rev = gl.orientation == Orientation::Reversing;
    if (!sides.unite(sa, sb, rev ? 1 : 0)) {
      c.structural.push_back({"OrientationConflict",
                              "gluing " + std::to_string(g) + " contradicts the orientation of its edge class",
                              gl.a.cell, gl.a.edge});
      continue;
    }
    const int a0 = offset[ia] + gl.a.edge, a1 = offset[ia] + (gl.a.edge + 1) % na;
    const int b0 = offset[ib] + gl.b.edge, b1 = offset[ib] + (gl.b.edge + 1) % nb;
    corners.unite(a0, rev ? b1 : b0);
    corners.unite(a1, rev ? b0 : b1);
  }

  c.edges.clear();
  c.vertices.clear();
  c.side_class.assign(nc, {});
  c.side_flipped.assign(nc, {});
  c.corner_class.assign(nc, {});
  std::map<int, int> edge_of_root, vertex_of_root;
  std::map<int, int> root_parity;
  for (int i = 0; i < nc; ++i) {
    const int n = offset[i + 1] - offset[i];
    c.side_class[i].assign(n, -1);
    c.side_flipped[i].assign(n, 0);
    c.corner_class[i].assign(n, -1);
    for (int s = 0; s < n; ++s) {
      auto [r, p] = sides.find(offset[i] + s);
      auto it = edge_of_root.find(r);
      if (it == edge_of_root.end()) {
        // First (lowest) side of the class defines its orientation.
        it = edge_of_root.emplace(r, static_cast<int>(c.edges.size())).first;
        root_parity[r] = p;
        c.edges.push_back({});
      }
      const bool flipped = (p ^ root_parity[r]) != 0;
      c.side_class[i][s] = it->second;
      c.side_flipped[i][s] = flipped;
      c.edges[it->second].uses.push_back({i, s, flipped});

      const int vr = corners.find(offset[i] + s);
      auto jt = vertex_of_root.find(vr);
      if (jt == vertex_of_root.end()) {
        jt = vertex_of_root.emplace(vr, static_cast<int>(c.vertices.size())).first;
        c.vertices.push_back({});
      }
      c.corner_class[i][s] = jt->second;
      c.vertices[jt->second].corners.push_back({i, s});
    }
  }
  for (auto& e : c.edges) {
    const SideUse& u = e.uses.front();
    try {
      e.length = c.side_length(u.cell, u.side);
    } catch (const Error&) {
      e.length = std::numeric_limits<double>::quiet_NaN();
    }
  }
}

CurvedComplex make_complex(std::vector<CellSpec> cells, std::vector<Gluing> gluings) {
  CurvedComplex c;
  c.cells = std::move(cells);
  c.gluings = std::move(gluings);
  classify(c);
  return c;
}

ValidationReport validate(const CurvedComplex& c) {
  ValidationReport rep;
  auto add = [&](std::string kind, std::string detail, int cell, int edge = -1) {
    rep.issues.push_back({std::move(kind), std::move(detail), cell, edge});
  };
  std::set<int> seen;
  for (const CellSpec& cell : c.cells) {
    if (!seen.insert(cell.id).second) add("DuplicateId", "cell id used more than once", cell.id);
    if (!std::isfinite(cell.kappa)) {
      add("InvalidCurvature", "curvature is not finite", cell.id);
      continue;
    }
    const int n = cell.sides();
    if (n < 3) {
      add("TooFewSides", "a cell needs at least three sides", cell.id);
      continue;
    }
    if (cell.kind == CellKind::Triangle && n != 3) {
      add("SideCount", "triangle cell with " + std::to_string(n) + " sides", cell.id);
      continue;
    }
    if (!cell.chart_vertices.empty() && !cell.side_lengths.empty() &&
        cell.chart_vertices.size() != cell.side_lengths.size()) {
      add("SideCount", "side_lengths and chart_vertices disagree in count", cell.id);
      continue;
    }
    if (cell.kind == CellKind::Polygon && n > 3 && cell.chart_vertices.empty()) {
      add("MissingChartVertices", "polygon cells need chart vertices", cell.id);
      continue;
    }
    bool charts_ok = true;
    for (const Vec2d& x : cell.chart_vertices)
      if (!chart_point_ok(cell.kappa, x)) charts_ok = false;
    if (!charts_ok) {
      add("OutsideModel", "chart vertex outside the model chart", cell.id);
      continue;
    }
    if (!cell.chart_vertices.empty() && !simple_polygon(cell.chart_vertices)) {
      add("SelfIntersectingBoundary", "cell boundary is not a simple polygon", cell.id);
      continue;
    }
    std::vector<double> len(n);
    const int idx = c.index_of(cell.id);
    bool lengths_ok = true;
    for (int s = 0; s < n; ++s) {
      len[s] = c.side_length(idx, s);
      if (!std::isfinite(len[s]) || !(len[s] > 0)) {
        add("InvalidSideLength", "side length must be positive and finite", cell.id, s);
        lengths_ok = false;
      }
    }
    if (!lengths_ok) continue;
    if (!cell.chart_vertices.empty() && !cell.side_lengths.empty()) {
      CellSpec geo = cell;
      geo.side_lengths.clear();
      CurvedComplex tmp;
      tmp.cells = {geo};
      for (int s = 0; s < n; ++s) {
        const double from_chart = tmp.side_length(0, s);
        if (std::abs(from_chart - len[s]) > 1e-9 * std::max(from_chart, len[s]))
          add("LengthMismatch", "side length " + fmt(len[s]) + " differs from chart length " + fmt(from_chart),
              cell.id, s);
      }
    }
    const double perim = std::accumulate(len.begin(), len.end(), 0.0);
    if (n == 3) {
      for (int s = 0; s < 3; ++s)
        if (!(len[s] < len[(s + 1) % 3] + len[(s + 2) % 3]))
          add("TriangleInequality", "side " + std::to_string(s) + " is not shorter than the other two combined",
              cell.id, s);
    }
    if (cell.kappa > 0 && !(perim < 2 * std::numbers::pi / std::sqrt(cell.kappa)))
      add("PerimeterViolation", "perimeter " + fmt(perim) + " is not below 2*pi/sqrt(kappa)", cell.id);
  }

  for (const Issue& i : c.structural) rep.issues.push_back(i);

  for (size_t g = 0; g < c.gluings.size(); ++g) {
    const Gluing& gl = c.gluings[g];
    const int ia = c.index_of(gl.a.cell), ib = c.index_of(gl.b.cell);
    if (ia < 0 || ib < 0) continue;
    if (gl.a.edge < 0 || gl.a.edge >= c.cells[ia].sides() || gl.b.edge < 0 || gl.b.edge >= c.cells[ib].sides())
      continue;
    double la, lb;
    try {
      la = c.side_length(ia, gl.a.edge);
      lb = c.side_length(ib, gl.b.edge);
    } catch (const Error&) {
      continue;
    }
    if (!(std::abs(la - lb) <= 1e-9 * std::max(std::abs(la), std::abs(lb))))
      add("LengthMismatch",
          "gluing " + std::to_string(g) + " joins lengths " + fmt(la) + " and " + fmt(lb) + " (cell " +
              std::to_string(gl.b.cell) + " edge " + std::to_string(gl.b.edge) + ")",
          gl.a.cell, gl.a.edge);
  }
  return rep;
}

Dissection dissect_polygons(const CurvedComplex& c) {
  int next_id = 0;
  for (const CellSpec& cell : c.cells) next_id = std::max(next_id, cell.id + 1);

  Dissection out;
  std::vector<CellSpec> cells;
  // Where each input side ends up: (output cell id, side).
  std::vector<std::vector<SideRef>> moved(c.cells.size());
  std::vector<Gluing> gluings;

  for (size_t ci = 0; ci < c.cells.size(); ++ci) {
    const CellSpec& cell = c.cells[ci];
    const int n = cell.sides();
    if (n == 3) {
      CellSpec t = cell;
      t.kind = CellKind::Triangle;
      if (t.side_lengths.empty())
        for (int s = 0; s < 3; ++s) t.side_lengths.push_back(c.side_length(static_cast<int>(ci), s));
      cells.push_back(t);
      out.source_cell.push_back(cell.id);
      for (int s = 0; s < 3; ++s) moved[ci].push_back({cell.id, s});
      continue;
    }
    if (cell.chart_vertices.empty())
      throw Error(Errc::InvalidComplex, "polygon cell " + std::to_string(cell.id) + " has no chart vertices");
    const auto& V = cell.chart_vertices;
    for (const Vec2d& x : V)
      if (!chart_point_ok(cell.kappa, x))
        throw Error(cell.kappa > 0 ? Errc::NotHemispheric : Errc::OutsideHemisphere,
                    "polygon cell " + std::to_string(cell.id) + " leaves its chart");
    if (!simple_polygon(V))
      throw Error(Errc::SelfIntersectingBoundary, "polygon cell " + std::to_string(cell.id) + " is not simple");
    const double orient = signed_area(V) > 0 ? 1.0 : -1.0;

    std::vector<int> ring(n);
    std::iota(ring.begin(), ring.end(), 0);
    std::vector<std::array<int, 3>> tris;
    while (ring.size() > 3) {
      const int m = static_cast<int>(ring.size());
      int ear = -1;
      for (int k = 0; k < m && ear < 0; ++k) {
        const int a = ring[(k + m - 1) % m], b = ring[k], d = ring[(k + 1) % m];
        if (!(orient * cross2(V[a], V[b], V[d]) > 0)) continue;
        bool blocked = false;
        for (int j : ring) {
          if (j == a || j == b || j == d) continue;
          const double s1 = orient * cross2(V[a], V[b], V[j]);
          const double s2 = orient * cross2(V[b], V[d], V[j]);
          const double s3 = orient * cross2(V[d], V[a], V[j]);
          if (s1 >= 0 && s2 >= 0 && s3 >= 0) {
            blocked = true;
            break;
          }
        }
        if (!blocked) ear = k;
      }
      if (ear < 0)
        throw Error(Errc::SelfIntersectingBoundary, "no ear found in polygon cell " + std::to_string(cell.id));
      tris.push_back({ring[(ear + m - 1) % m], ring[ear], ring[(ear + 1) % m]});
      ring.erase(ring.begin() + ear);
    }
    tris.push_back({ring[0], ring[1], ring[2]});

    // Diagonal (i, j) -> (cell id, side) of the triangle that holds it as i -> j.
    std::map<std::pair<int, int>, SideRef> owner;
    moved[ci].resize(n);
    for (size_t t = 0; t < tris.size(); ++t) {
      CellSpec tc;
      tc.id = t == 0 ? cell.id : next_id++;
      tc.kappa = cell.kappa;
      tc.kind = CellKind::Triangle;
      for (int s = 0; s < 3; ++s) tc.chart_vertices.push_back(V[tris[t][s]]);
      for (int s = 0; s < 3; ++s) {
        const int i = tris[t][s], j = tris[t][(s + 1) % 3];
        if ((i + 1) % n == j && !cell.side_lengths.empty()) {
          tc.side_lengths.push_back(cell.side_lengths[i]);
        } else {
          tc.side_lengths.push_back(distance(unproject(cell.kappa, V[i]), unproject(cell.kappa, V[j])));
        }
        if ((i + 1) % n == j) {
          moved[ci][i] = {tc.id, s};
        } else {
          owner[{i, j}] = {tc.id, s};
          auto it = owner.find({j, i});
          if (it != owner.end()) gluings.push_back({it->second, {tc.id, s}, Orientation::Reversing});
        }
      }
      cells.push_back(tc);
      out.source_cell.push_back(cell.id);
    }
  }

  for (const Gluing& g : c.gluings) {
    const int ia = c.index_of(g.a.cell), ib = c.index_of(g.b.cell);
    if (ia < 0 || ib < 0) throw Error(Errc::InvalidComplex, "gluing references a missing cell");
    gluings.push_back({moved[ia].at(g.a.edge), moved[ib].at(g.b.edge), g.orientation});
  }
  out.complex = make_complex(std::move(cells), std::move(gluings));
  return out;
}

Triangle realize_triangle(double kappa, double e01, double e12, double e20) {
  const auto ang = solve_triangle(kappa, e12, e20, e01);
  Triangle t;
  t.kappa = kappa;
  t.v[0] = pole(kappa);
  t.v[1] = polar_point(kappa, e01, 0.0);
  t.v[2] = polar_point(kappa, e20, ang[0]);
  return t;
}

ChartLayout layout(const CurvedComplex& c) {
  ChartLayout out;
  for (size_t i = 0; i < c.cells.size(); ++i) {
    const CellSpec& cell = c.cells[i];
    if (cell.sides() != 3) throw Error(Errc::InvalidComplex, "layout needs a triangle complex");
    const int k = static_cast<int>(i);
    out.cells.push_back(realize_triangle(cell.kappa, c.side_length(k, 0), c.side_length(k, 1), c.side_length(k, 2)));
  }
  return out;
}

}  // namespace kmesh
