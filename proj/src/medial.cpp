#include "kmesh/medial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <unordered_map>

namespace kmesh {

std::array<int, 2> Lattice::coords(int idx) const {
  int j = 0;
  while (idx > N - j) {
    idx -= N + 1 - j;
    ++j;
  }
  return {idx, j};
}

Triangle SubdividedComplex::geodesic(int t) const {
  const SubTriangle& s = triangles[t];
  const auto& pts = points[s.cell];
  return {complex.cells[s.cell].kappa, {pts[s.p[0]], pts[s.p[1]], pts[s.p[2]]}};
}

std::array<double, 3> SubdividedComplex::side_lengths(int t) const {
  return {edge_length[tri_edge[t][0]], edge_length[tri_edge[t][1]], edge_length[tri_edge[t][2]]};
}

int SubdividedComplex::boundary_edge_id(int base_edge, int segment) const { return base_edge * lattice.N + segment; }

int SubdividedComplex::edge_vertex_id(int base_edge, int step) const {
  return static_cast<int>(complex.vertices.size()) + base_edge * (lattice.N - 1) + step - 1;
}

namespace {

// Cell side holding both lattice points, with their positions along it.
struct SideHit {
  int side = -1;
  int tp = 0, tq = 0;
};

std::vector<std::array<int, 2>> coord_table(const Lattice& L) {
  std::vector<std::array<int, 2>> out(L.size());
  for (int j = 0; j <= L.N; ++j)
    for (int i = 0; i + j <= L.N; ++i) out[L.index(i, j)] = {i, j};
  return out;
}

SideHit common_side(const Lattice& L, const std::vector<std::array<int, 2>>& xy, int p, int q) {
  const auto [ip, jp] = xy[p];
  const auto [iq, jq] = xy[q];
  const int ap = L.N - ip - jp, aq = L.N - iq - jq;
  if (jp == 0 && jq == 0) return {0, ip, iq};
  if (ap == 0 && aq == 0) return {1, jp, jq};
  if (ip == 0 && iq == 0) return {2, ap, aq};
  return {};
}

// Side and position of a single boundary lattice point that is not a corner.
SideHit point_side(const Lattice& L, const std::vector<std::array<int, 2>>& xy, int p) {
  const auto [i, j] = xy[p];
  const int a = L.N - i - j;
  if (j == 0) return {0, i, i};
  if (a == 0) return {1, j, j};
  if (i == 0) return {2, a, a};
  return {};
}

void build_combinatorics(SubdividedComplex& s) {
  const CurvedComplex& c = s.complex;
  const Lattice& L = s.lattice;
  const int N = L.N;
  const int V0 = static_cast<int>(c.vertices.size());
  const int E0 = static_cast<int>(c.edges.size());
  const int nt = static_cast<int>(s.triangles.size());

  s.tri_vertex.assign(nt, {});
  s.tri_edge.assign(nt, {});
  s.tri_flip.assign(nt, {});
  s.edges.assign(static_cast<size_t>(E0) * N, {});
  s.edge_length.assign(static_cast<size_t>(E0) * N, 0.0);
  for (int e = 0; e < E0; ++e)
    for (int k = 0; k < N; ++k) {
      LevelEdge& le = s.edges[static_cast<size_t>(e) * N + k];
      le.kind = LevelEdgeKind::Boundary;
      le.base_edge = e;
      le.segment = k;
      s.edge_length[static_cast<size_t>(e) * N + k] = c.edges[e].length / N;
    }
  s.vertices.assign(V0 + static_cast<size_t>(E0) * (N - 1), {});
  for (int v = 0; v < V0; ++v) s.vertices[v] = {LevelVertexKind::Corner, v, -1};
  for (int e = 0; e < E0; ++e)
    for (int k = 1; k < N; ++k) s.vertices[s.edge_vertex_id(e, k)] = {LevelVertexKind::Edge, e, k};

  const int ncell = static_cast<int>(c.cells.size());
  std::vector<std::vector<int>> interior_id(ncell);
  std::vector<std::unordered_map<std::uint64_t, int>> interior_edge(ncell);
  const auto xy = coord_table(L);
  const int corner_idx[3] = {L.index(0, 0), L.index(N, 0), L.index(0, N)};

  auto vertex_of = [&](int cell, int p) {
    for (int k = 0; k < 3; ++k)
      if (p == corner_idx[k]) return c.corner_class[cell][k];
    const SideHit h = point_side(L, xy, p);
    if (h.side >= 0) {
      const int e = c.side_class[cell][h.side];
      const int step = c.side_flipped[cell][h.side] ? N - h.tp : h.tp;
      return s.edge_vertex_id(e, step);
    }
    auto& ids = interior_id[cell];
    if (ids.empty()) ids.assign(L.size(), -1);
    if (ids[p] < 0) {
      ids[p] = static_cast<int>(s.vertices.size());
      s.vertices.push_back({LevelVertexKind::Interior, cell, p});
    }
    return ids[p];
  };

  for (int t = 0; t < nt; ++t) {
    const SubTriangle& tri = s.triangles[t];
    const int cell = tri.cell;
    for (int k = 0; k < 3; ++k) s.tri_vertex[t][k] = vertex_of(cell, tri.p[k]);
    for (int k = 0; k < 3; ++k) {
      const int p = tri.p[k], q = tri.p[(k + 1) % 3];
      const SideHit h = common_side(L, xy, p, q);
      if (h.side >= 0) {
        const int e = c.side_class[cell][h.side];
        const bool fl = c.side_flipped[cell][h.side];
        const int ks = std::min(h.tp, h.tq);
        const bool along = h.tq > h.tp;
        s.tri_edge[t][k] = s.boundary_edge_id(e, fl ? N - 1 - ks : ks);
        s.tri_flip[t][k] = along ? fl : !fl;
        continue;
      }
      const int a = std::min(p, q), b = std::max(p, q);
      const std::uint64_t key = static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(L.size()) + b;
      auto it = interior_edge[cell].find(key);
      if (it == interior_edge[cell].end()) {
        it = interior_edge[cell].emplace(key, static_cast<int>(s.edges.size())).first;
        LevelEdge le;
        le.kind = LevelEdgeKind::Interior;
        le.cell = cell;
        le.a = a;
        le.b = b;
        s.edges.push_back(le);
        s.edge_length.push_back(distance(s.points[cell][a], s.points[cell][b]));
      }
      s.tri_edge[t][k] = it->second;
      s.tri_flip[t][k] = p > q;
    }
  }
}

SubdividedComplex level_zero(const CurvedComplex& c) {
  for (const CellSpec& cell : c.cells)
    if (cell.sides() != 3) throw Error(Errc::InvalidComplex, "subdivision needs a triangle complex");
  SubdividedComplex s;
  s.complex = c;
  s.layout = layout(c);
  s.level = 0;
  s.lattice.N = 1;
  for (size_t i = 0; i < c.cells.size(); ++i) {
    const Triangle& t = s.layout.cells[i];
    s.points.push_back({t.v[0], t.v[1], t.v[2]});
    s.triangles.push_back({static_cast<int>(i), {s.lattice.index(0, 0), s.lattice.index(1, 0), s.lattice.index(0, 1)}, 0});
  }
  build_combinatorics(s);
  return s;
}

}  // namespace

SubdividedComplex medial_subdivide(const SubdividedComplex& prev) {
  if (prev.level >= 30) throw Error(Errc::LevelCapExceeded, "subdivision level limited to 30");
  SubdividedComplex s;
  s.complex = prev.complex;
  s.layout = prev.layout;
  s.level = prev.level + 1;
  const Lattice& P = prev.lattice;
  s.lattice.N = 2 * P.N;
  const Lattice& L = s.lattice;
  const int N = L.N;
  const CurvedComplex& c = s.complex;

  s.points.resize(prev.points.size());
  for (size_t cell = 0; cell < prev.points.size(); ++cell) {
    auto& pts = s.points[cell];
    pts.assign(L.size(), Point{});
    for (int j = 0; j <= P.N; ++j)
      for (int i = 0; i + j <= P.N; ++i) pts[L.index(2 * i, 2 * j)] = prev.points[cell][P.index(i, j)];
    const Triangle& base = s.layout.cells[cell];
    const int ci = static_cast<int>(cell);
    // Sides: arc-length positions along the realized cell sides.
    for (int t = 1; t < N; t += 2) {
      const double f = static_cast<double>(t) / N;
      pts[L.index(t, 0)] = point_on_geodesic(base.v[0], base.v[1], f * c.side_length(ci, 0));
      pts[L.index(N - t, t)] = point_on_geodesic(base.v[1], base.v[2], f * c.side_length(ci, 1));
      pts[L.index(0, N - t)] = point_on_geodesic(base.v[2], base.v[0], f * c.side_length(ci, 2));
    }
    // Interior: midpoint of the parent edge through the new point.
    for (int j = 1; j < N; ++j)
      for (int i = 1; i + j < N; ++i) {
        const int a = N - i - j;
        const bool oi = i & 1, oj = j & 1, oa = a & 1;
        if (!oi && !oj && !oa) continue;
        int p, q;
        if (oi && oj) {
          p = L.index(i + 1, j - 1);
          q = L.index(i - 1, j + 1);
        } else if (oi && oa) {
          p = L.index(i + 1, j);
          q = L.index(i - 1, j);
        } else {
          p = L.index(i, j + 1);
          q = L.index(i, j - 1);
        }
        if (q < p) std::swap(p, q);
        pts[L.index(i, j)] = geodesic_midpoint(pts[p], pts[q]);
      }
  }

  s.triangles.reserve(prev.triangles.size() * 4);
  const auto prev_xy = coord_table(P);
  for (const SubTriangle& t : prev.triangles) {
    std::array<std::array<int, 2>, 3> v;
    for (int k = 0; k < 3; ++k) {
      const auto ij = prev_xy[t.p[k]];
      v[k] = {2 * ij[0], 2 * ij[1]};
    }
    auto mid = [&](int a, int b) { return L.index((v[a][0] + v[b][0]) / 2, (v[a][1] + v[b][1]) / 2); };
    const int v0 = L.index(v[0][0], v[0][1]), v1 = L.index(v[1][0], v[1][1]), v2 = L.index(v[2][0], v[2][1]);
    const int m01 = mid(0, 1), m12 = mid(1, 2), m20 = mid(2, 0);
    const std::uint64_t base = t.path << 2;
    s.triangles.push_back({t.cell, {v0, m01, m20}, base | 0});
    s.triangles.push_back({t.cell, {v1, m12, m01}, base | 1});
    s.triangles.push_back({t.cell, {v2, m20, m12}, base | 2});
    s.triangles.push_back({t.cell, {m01, m12, m20}, base | 3});
  }
  build_combinatorics(s);
  return s;
}

SubdividedComplex subdivide(const CurvedComplex& c, int levels) {
  SubdividedComplex s = level_zero(c);
  for (int i = 0; i < levels; ++i) s = medial_subdivide(s);
  return s;
}

LevelStats level_stats(const SubdividedComplex& c) {
  LevelStats st;
  st.level = c.level;
  st.min_angle = std::numeric_limits<double>::infinity();
  st.max_angle = 0;
  for (double e : c.edge_length) st.max_edge = std::max(st.max_edge, e);
  for (size_t t = 0; t < c.triangles.size(); ++t) {
    const auto e = c.side_lengths(static_cast<int>(t));
    const auto ang = solve_triangle(c.complex.cells[c.triangles[t].cell].kappa, e[1], e[2], e[0]);
    for (double a : ang) {
      st.min_angle = std::min(st.min_angle, a);
      st.max_angle = std::max(st.max_angle, a);
    }
  }
  return st;
}

void ConvergenceStats::write_csv(std::ostream& os) const {
  const auto old = os.precision(17);
  os << "level,max_edge,min_angle,max_angle\n";
  for (const LevelStats& r : rows) os << r.level << ',' << r.max_edge << ',' << r.min_angle << ',' << r.max_angle << '\n';
  os.precision(old);
}

SubdivisionResult subdivide_to(const CurvedComplex& c, const SubdivisionTarget& target) {
  if (target.levels < 0 && !(target.max_edge > 0))
    throw Error(Errc::InvalidEps, "subdivision target needs a level or a positive edge bound");
  SubdivisionResult r{level_zero(c), {}};
  r.stats.rows.push_back(level_stats(r.complex));
  auto done = [&] {
    if (target.levels >= 0) return r.complex.level >= target.levels;
    return r.stats.rows.back().max_edge <= target.max_edge;
  };
  while (!done()) {
    if (r.complex.level >= target.level_cap)
      throw Error(Errc::LevelCapExceeded, "target not reached by level " + std::to_string(target.level_cap));
    r.complex = medial_subdivide(r.complex);
    r.stats.rows.push_back(level_stats(r.complex));
  }
  return r;
}

PlanarComplex comparison_complex(const SubdividedComplex& c) {
  PlanarComplex p;
  p.charts.reserve(c.triangles.size());
  for (size_t t = 0; t < c.triangles.size(); ++t) {
    const auto e = c.side_lengths(static_cast<int>(t));
    p.charts.push_back(comparison_from_lengths(e[0], e[1], e[2]));
    p.corner_angles.push_back(solve_triangle(c.complex.cells[c.triangles[t].cell].kappa, e[1], e[2], e[0]));
  }
  p.tri_vertex = c.tri_vertex;
  p.tri_edge = c.tri_edge;
  p.tri_flip = c.tri_flip;
  p.edge_length = c.edge_length;
  p.vertex_count = static_cast<int>(c.vertices.size());
  return p;
}

PlanarComplex planar_complex_from(const std::vector<PlanarTri>& charts, const std::vector<std::array<int, 3>>& corners) {
  PlanarComplex p;
  p.charts = charts;
  p.tri_vertex = corners;
  std::unordered_map<std::uint64_t, int> ids;
  int vmax = -1;
  for (size_t t = 0; t < charts.size(); ++t) {
    std::array<int, 3> e{};
    std::array<char, 3> f{};
    for (int k = 0; k < 3; ++k) {
      const int a = corners[t][k], b = corners[t][(k + 1) % 3];
      vmax = std::max(vmax, a);
      const std::uint64_t key = (static_cast<std::uint64_t>(std::min(a, b)) << 32) | static_cast<std::uint32_t>(std::max(a, b));
      auto it = ids.find(key);
      if (it == ids.end()) {
        it = ids.emplace(key, static_cast<int>(p.edge_length.size())).first;
        p.edge_length.push_back((charts[t].v[(k + 1) % 3] - charts[t].v[k]).norm());
      }
      e[k] = it->second;
      f[k] = a > b;
    }
    p.tri_edge.push_back(e);
    p.tri_flip.push_back(f);
  }
  p.vertex_count = vmax + 1;
  return p;
}

}  // namespace kmesh
