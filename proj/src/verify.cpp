#include "kmesh/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

namespace kmesh {

namespace {

constexpr double kOnSide = 1e-9;
constexpr double kParamTol = 1e-9;
constexpr double kCoordTol = 1e-9;
constexpr double kAreaTol = 1e-9;

double cross(const Vec2d& u, const Vec2d& v) { return u.x() * v.y() - u.y() * v.x(); }

double planar_angle(const Vec2d& a, const Vec2d& b, const Vec2d& c) {
  const Vec2d u = a - b, v = c - b;
  return std::acos(std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0));
}

double seg_dist(const Vec2d& q, const Vec2d& a, const Vec2d& b) {
  const Vec2d ab = b - a;
  const double t = std::clamp((q - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (q - (a + t * ab)).norm();
}

// Sides of the chart that q lies on, as a bit mask.
int side_mask(const PlanarTri& chart, const Vec2d& q) {
  int mask = 0;
  for (int k = 0; k < 3; ++k) {
    const Vec2d &a = chart.v[k], &b = chart.v[(k + 1) % 3];
    if (seg_dist(q, a, b) <= kOnSide * (b - a).norm()) mask |= 1 << k;
  }
  return mask;
}

bool is_corner(const PlanarTri& chart, const Vec2d& q) {
  const double scale = (chart.v[1] - chart.v[0]).norm();
  for (const auto& v : chart.v)
    if ((q - v).norm() <= kOnSide * scale) return true;
  return false;
}

// Local picture of one cell: planar positions for topology, per-side parameters
// (class orientation) for matching across cells.
struct Local {
  PlanarTri chart;
  std::vector<Vec2d> xy;
  std::vector<double> param_side[3];  // filled by the caller
  std::vector<std::array<int, 3>> tris;
};

struct SideList {
  int cell = -1, side = -1;
  std::vector<double> params;
};

CheckResult compare_sides(const std::vector<SideList>& lists, const std::vector<std::array<int, 3>>& tri_edge,
                          const std::vector<double>& edge_length) {
  CheckResult r;
  std::map<int, const SideList*> first;
  for (const SideList& s : lists) {
    const int e = tri_edge[s.cell][s.side];
    auto [it, fresh] = first.emplace(e, &s);
    if (fresh) continue;
    const SideList& ref = *it->second;
    const double tol = kParamTol * std::max(1.0, edge_length[e]);
    std::ostringstream os;
    os.precision(17);
    if (ref.params.size() != s.params.size()) {
      if (r.pass) {
        os << "edge " << e << ": cell " << ref.cell << " has " << ref.params.size() << " vertices, cell " << s.cell
           << " has " << s.params.size();
        r.detail = os.str();
      }
      r.pass = false;
      r.worst = std::max(r.worst, edge_length[e]);
      continue;
    }
    for (size_t i = 0; i < s.params.size(); ++i) {
      const double gap = std::abs(ref.params[i] - s.params[i]);
      r.worst = std::max(r.worst, gap);
      if (gap > tol && r.pass) {
        r.pass = false;
        os << "edge " << e << ": parameter " << ref.params[i] << " (cell " << ref.cell << ") vs " << s.params[i]
           << " (cell " << s.cell << "), gap " << gap;
        r.detail = os.str();
      }
    }
  }
  return r;
}

// Orientation, area and edge pairing inside one cell.
std::string local_tiling(const PlanarTri& chart, const std::vector<Vec2d>& xy, const std::vector<std::array<int, 3>>& tris,
                         double area_mesh, double area_cell) {
  for (size_t i = 0; i < tris.size(); ++i) {
    const auto& t = tris[i];
    if (!(cross(xy[t[1]] - xy[t[0]], xy[t[2]] - xy[t[0]]) > 0)) return "triangle " + std::to_string(i) + " is not positively oriented";
  }
  if (!(std::abs(area_mesh - area_cell) <= kAreaTol * area_cell)) {
    std::ostringstream os;
    os.precision(17);
    os << "areas " << area_mesh << " vs cell " << area_cell;
    return os.str();
  }
  std::set<std::pair<int, int>> directed;
  for (const auto& t : tris)
    for (int k = 0; k < 3; ++k)
      if (!directed.emplace(t[k], t[(k + 1) % 3]).second) return "edge used twice in the same direction";
  for (const auto& [a, b] : directed) {
    if (directed.count({b, a})) continue;
    if (!(side_mask(chart, xy[a]) & side_mask(chart, xy[b]))) return "unpaired interior edge";
  }
  return {};
}

double planar_area(const Vec2d& a, const Vec2d& b, const Vec2d& c) { return 0.5 * cross(b - a, c - a); }

std::array<double, 3> tri_angles(const std::array<Point, 3>& p) {
  return {angle_at(p[2], p[0], p[1]), angle_at(p[0], p[1], p[2]), angle_at(p[1], p[2], p[0])};
}

Chart chart_of(const SubdividedComplex& sub, int t, PlanarTri* placement = nullptr) {
  const auto e = sub.side_lengths(t);
  const PlanarTri target = comparison_from_lengths(e[0], e[1], e[2]);
  if (placement) *placement = target;
  return chart_for(sub.geodesic(t), target);
}

std::vector<std::vector<int>> group_by_tri(const AcuteTriangulation& m) {
  std::vector<std::vector<int>> g(m.sub.triangles.size());
  for (size_t i = 0; i < m.triangles.size(); ++i) g[m.triangles[i].tri].push_back(static_cast<int>(i));
  return g;
}

// Per level-n triangle: local vertex list of the mesh triangles inside it.
struct CurvedLocal {
  std::vector<int> ids;
  std::vector<Point> pts;
  std::vector<std::array<int, 3>> tris;
};

CurvedLocal curved_local(const AcuteTriangulation& m, const std::vector<int>& members, int t) {
  CurvedLocal l;
  std::map<int, int> local;
  for (int i : members) {
    std::array<int, 3> lt{};
    for (int k = 0; k < 3; ++k) {
      const int v = m.triangles[i].v[k];
      auto [it, fresh] = local.emplace(v, static_cast<int>(l.ids.size()));
      if (fresh) {
        l.ids.push_back(v);
        l.pts.push_back(m.position(v, t));
      }
      lt[k] = it->second;
    }
    l.tris.push_back(lt);
  }
  return l;
}

CheckResult curved_conformity(const SubdividedComplex& sub, const std::vector<std::vector<Point>>& pts) {
  std::vector<SideList> lists;
  for (size_t t = 0; t < sub.triangles.size(); ++t) {
    const int ti = static_cast<int>(t);
    PlanarTri chart;
    const Chart phi = chart_of(sub, ti, &chart);
    const Triangle g = sub.geodesic(ti);
    SideList s[3];
    for (int k = 0; k < 3; ++k) s[k] = {ti, k, {}};
    for (const Point& p : pts[t]) {
      const Vec2d q = phi.forward(p);
      if (is_corner(chart, q)) continue;
      const int mask = side_mask(chart, q);
      for (int k = 0; k < 3; ++k) {
        if (!(mask & (1 << k))) continue;
        const bool fl = sub.tri_flip[t][k];
        s[k].params.push_back(distance(g.v[fl ? (k + 1) % 3 : k], p));
      }
    }
    for (int k = 0; k < 3; ++k) {
      std::sort(s[k].params.begin(), s[k].params.end());
      lists.push_back(std::move(s[k]));
    }
  }
  return compare_sides(lists, sub.tri_edge, sub.edge_length);
}

}  // namespace

CheckResult conformity_check(const PlanarComplex& c, const PlanarRefinement& r) {
  std::vector<SideList> lists;
  for (size_t t = 0; t < c.charts.size(); ++t) {
    const PlanarTri& chart = c.charts[t];
    SideList s[3];
    for (int k = 0; k < 3; ++k) s[k] = {static_cast<int>(t), k, {}};
    for (const RefVertex& v : r.cells[t].vertices) {
      if (is_corner(chart, v.xy)) continue;
      const int mask = side_mask(chart, v.xy);
      for (int k = 0; k < 3; ++k) {
        if (!(mask & (1 << k))) continue;
        const int e = c.tri_edge[t][k];
        const double L = (chart.v[(k + 1) % 3] - chart.v[k]).norm();
        const double d = (v.xy - chart.v[k]).norm() * c.edge_length[e] / L;
        s[k].params.push_back(c.tri_flip[t][k] ? c.edge_length[e] - d : d);
      }
    }
    for (int k = 0; k < 3; ++k) {
      std::sort(s[k].params.begin(), s[k].params.end());
      lists.push_back(std::move(s[k]));
    }
  }
  CheckResult res = compare_sides(lists, c.tri_edge, c.edge_length);
  if (!res.pass) return res;
  const CheckResult tiles = tiling_check(c, r);
  return tiles.pass ? res : tiles;
}

CheckResult tiling_check(const PlanarComplex& c, const PlanarRefinement& r) {
  CheckResult res;
  for (size_t t = 0; t < c.charts.size(); ++t) {
    const PlanarTri& chart = c.charts[t];
    std::vector<Vec2d> xy;
    for (const RefVertex& v : r.cells[t].vertices) xy.push_back(v.xy);
    double area = 0;
    for (const auto& tri : r.cells[t].triangles) area += planar_area(xy[tri[0]], xy[tri[1]], xy[tri[2]]);
    const std::string err = local_tiling(chart, xy, r.cells[t].triangles, area, planar_area(chart.v[0], chart.v[1], chart.v[2]));
    if (!err.empty()) {
      res.pass = false;
      res.detail = "cell " + std::to_string(t) + ": " + err;
      return res;
    }
  }
  return res;
}

AngleCheck acuteness_check(const PlanarComplex& c, const PlanarRefinement& r, double margin) {
  AngleCheck a;
  a.min_angle = std::numbers::pi;
  a.max_angle = 0;
  for (size_t t = 0; t < c.charts.size(); ++t)
    for (const auto& tri : r.cells[t].triangles) {
      const Vec2d &p = r.cells[t].vertices[tri[0]].xy, &q = r.cells[t].vertices[tri[1]].xy, &s = r.cells[t].vertices[tri[2]].xy;
      for (double x : {planar_angle(s, p, q), planar_angle(p, q, s), planar_angle(q, s, p)}) {
        a.min_angle = std::min(a.min_angle, x);
        a.max_angle = std::max(a.max_angle, x);
      }
    }
  a.pass = a.max_angle < std::numbers::pi / 2 - margin && a.min_angle > 0;
  return a;
}

int three_on_edge_count(const PlanarComplex& c, const PlanarRefinement& r) {
  int n = 0;
  for (size_t t = 0; t < c.charts.size(); ++t)
    for (const auto& tri : r.cells[t].triangles) {
      int mask = 7;
      for (int v : tri) mask &= side_mask(c.charts[t], r.cells[t].vertices[v].xy);
      n += mask != 0;
    }
  return n;
}

CheckResult conformity_check(const AcuteTriangulation& m) {
  const auto groups = group_by_tri(m);
  std::vector<std::vector<Point>> pts(groups.size());
  for (size_t t = 0; t < groups.size(); ++t) pts[t] = curved_local(m, groups[t], static_cast<int>(t)).pts;
  CheckResult res = curved_conformity(m.sub, pts);
  if (!res.pass) return res;
  // Consecutive vertices along every level-n side must be joined by a mesh edge.
  for (size_t t = 0; t < groups.size(); ++t) {
    const int ti = static_cast<int>(t);
    const CurvedLocal l = curved_local(m, groups[t], ti);
    PlanarTri chart;
    const Chart phi = chart_of(m.sub, ti, &chart);
    std::set<std::pair<int, int>> edges;
    for (const auto& tri : l.tris)
      for (int k = 0; k < 3; ++k) edges.insert(std::minmax(tri[k], tri[(k + 1) % 3]));
    for (int k = 0; k < 3; ++k) {
      std::vector<std::pair<double, int>> on;
      for (size_t i = 0; i < l.pts.size(); ++i) {
        const Vec2d q = phi.forward(l.pts[i]);
        if (side_mask(chart, q) & (1 << k)) on.push_back({(q - chart.v[k]).norm(), static_cast<int>(i)});
      }
      std::sort(on.begin(), on.end());
      for (size_t i = 0; i + 1 < on.size(); ++i)
        if (!edges.count(std::minmax(on[i].second, on[i + 1].second))) {
          res.pass = false;
          res.detail = "level triangle " + std::to_string(t) + " side " + std::to_string(k) + ": boundary vertices not consecutive";
          return res;
        }
    }
  }
  return res;
}

CheckResult conformity_check(const SubdividedComplex& sub, const CurvedDissection& d) {
  std::vector<std::vector<Point>> pts(d.cells.size());
  for (size_t t = 0; t < d.cells.size(); ++t) pts[t] = d.cells[t].points;
  return curved_conformity(sub, pts);
}

AngleCheck acuteness_check(const AcuteTriangulation& m, double margin) {
  AngleCheck a;
  a.min_angle = std::numbers::pi;
  a.max_angle = 0;
  for (size_t i = 0; i < m.triangles.size(); ++i)
    for (double x : tri_angles(m.corners(static_cast<int>(i)))) {
      a.min_angle = std::min(a.min_angle, x);
      a.max_angle = std::max(a.max_angle, x);
    }
  a.pass = a.max_angle < std::numbers::pi / 2 - margin && a.min_angle > 0;
  return a;
}

CheckResult coordinate_check(const AcuteTriangulation& m) {
  CheckResult res;
  auto fail = [&](int v, const std::string& why, double gap) {
    res.worst = std::max(res.worst, gap);
    if (!res.pass) return;
    res.pass = false;
    res.detail = "vertex " + std::to_string(v) + ": " + why;
  };
  std::vector<char> seen(m.vertices.size(), 0);
  for (size_t i = 0; i < m.triangles.size(); ++i) {
    const MeshTriangle& mt = m.triangles[i];
    const int cell = m.sub.triangles[mt.tri].cell;
    for (int v : mt.v) {
      const MeshVertex& mv = m.vertices[v];
      if (seen[v] || mv.cell != cell) continue;
      seen[v] = 1;
      const double res_embed = embedding_residual(mv.x);
      if (!(res_embed <= kCoordTol)) fail(v, "off the model surface", res_embed);
      Point expect;
      if (mv.kind == MeshVertexKind::Interior) {
        if (mv.tri != mt.tri) {
          fail(v, "interior vertex outside its triangle", 1);
          continue;
        }
        expect = chart_of(m.sub, mt.tri).inverse(mv.xy);
      } else {
        expect = m.position(v, mt.tri);
      }
      const double gap = (expect.x - mv.x.x).norm();
      res.worst = std::max(res.worst, gap);
      if (!(gap <= kCoordTol * (1 + mv.x.x.norm()))) fail(v, "coordinates disagree with the derivation", gap);
    }
  }
  for (size_t v = 0; v < m.vertices.size(); ++v)
    if (!seen[v]) fail(static_cast<int>(v), "not used in its home cell", 0);
  return res;
}

CheckResult tiling_check(const AcuteTriangulation& m) {
  CheckResult res;
  const auto groups = group_by_tri(m);
  for (size_t t = 0; t < groups.size(); ++t) {
    const int ti = static_cast<int>(t);
    const CurvedLocal l = curved_local(m, groups[t], ti);
    PlanarTri chart;
    const Chart phi = chart_of(m.sub, ti, &chart);
    std::vector<Vec2d> xy;
    for (const Point& p : l.pts) xy.push_back(phi.forward(p));
    const double kappa = m.sub.complex.cells[m.sub.triangles[t].cell].kappa;
    double area = 0;
    for (const auto& tri : l.tris) {
      const double a = distance(l.pts[tri[0]], l.pts[tri[1]]), b = distance(l.pts[tri[1]], l.pts[tri[2]]),
                   c = distance(l.pts[tri[2]], l.pts[tri[0]]);
      area += triangle_area(kappa, b, c, a);
    }
    const auto e = m.sub.side_lengths(ti);
    const double cell_area = triangle_area(kappa, e[1], e[2], e[0]);
    res.worst = std::max(res.worst, std::abs(area - cell_area) / cell_area);
    const std::string err = local_tiling(chart, xy, l.tris, area, cell_area);
    if (!err.empty() && res.pass) {
      res.pass = false;
      res.detail = "level triangle " + std::to_string(t) + ": " + err;
    }
  }
  return res;
}

int three_on_edge_count(const AcuteTriangulation& m) {
  int n = 0;
  std::vector<Chart> charts;
  std::vector<PlanarTri> placements(m.sub.triangles.size());
  for (size_t t = 0; t < m.sub.triangles.size(); ++t) charts.push_back(chart_of(m.sub, static_cast<int>(t), &placements[t]));
  for (size_t i = 0; i < m.triangles.size(); ++i) {
    const int t = m.triangles[i].tri;
    const auto p = m.corners(static_cast<int>(i));
    int mask = 7;
    for (const Point& q : p) mask &= side_mask(placements[t], charts[t].forward(q));
    n += mask != 0;
  }
  return n;
}

double gauss_bonnet_check(const AcuteTriangulation& m) {
  double worst = 0;
  for (size_t i = 0; i < m.triangles.size(); ++i) {
    const auto p = m.corners(static_cast<int>(i));
    const double kappa = p[0].kappa;
    const auto ang = tri_angles(p);
    const double a = distance(p[1], p[2]), b = distance(p[2], p[0]), c = distance(p[0], p[1]);
    const double excess = ang[0] + ang[1] + ang[2] - std::numbers::pi;
    worst = std::max(worst, std::abs(excess - kappa * triangle_area(kappa, a, b, c)));
  }
  return worst;
}

double star_separation(const AcuteTriangulation& m) {
  double best = std::numeric_limits<double>::infinity();
  for (const MeshVertex& v : m.vertices) {
    if (v.kind != MeshVertexKind::Interior) continue;
    const auto e = m.sub.side_lengths(v.tri);
    const PlanarTri chart = comparison_from_lengths(e[0], e[1], e[2]);
    for (int k = 0; k < 3; ++k) {
      const Vec2d &a = chart.v[k], &b = chart.v[(k + 1) % 3];
      best = std::min({best, planar_angle(b, a, v.xy), planar_angle(a, b, v.xy)});
    }
  }
  return best;
}

double distortion_probe(const Triangle& t, const Chart& chart, int samples) {
  std::vector<Point> pts;
  const int n = std::max(1, samples);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i + j <= n; ++i) {
      // Barycentric lattice point through the chart's inverse of the planar image.
      const double w1 = static_cast<double>(i) / n, w2 = static_cast<double>(j) / n;
      const Vec2d a = chart.forward(t.v[0]), b = chart.forward(t.v[1]), c = chart.forward(t.v[2]);
      pts.push_back(chart.inverse((1 - w1 - w2) * a + w1 * b + w2 * c));
    }
  std::vector<Vec2d> img;
  for (const Point& p : pts) img.push_back(chart.forward(p));
  double worst = 0;
  const size_t np = pts.size();
  for (size_t b = 0; b < np; ++b)
    for (size_t a = 0; a < np; ++a) {
      if (a == b) continue;
      for (size_t c = a + 1; c < np; ++c) {
        if (c == b) continue;
        const Vec2d u = img[a] - img[b], w = img[c] - img[b];
        if (std::abs(cross(u, w)) <= 1e-12 * u.norm() * w.norm()) continue;
        worst = std::max(worst, std::abs(planar_angle(img[a], img[b], img[c]) - angle_at(pts[a], pts[b], pts[c])));
      }
    }
  return worst;
}

bool QualityReport::pass() const {
  return acute && conformity.pass && coordinates.pass && tiling.pass && three_on_edge == 0 && gauss_bonnet < 1e-8 &&
         star > 0;
}

void QualityReport::write_text(std::ostream& os) const {
  const auto old = os.precision(17);
  auto flag = [](bool b) { return b ? "PASS" : "FAIL"; };
  os << "level " << level << "\n";
  os << "vertices " << vertices << "\ntriangles " << triangles << "\n";
  os << "min_angle " << min_angle << "\nmax_angle " << max_angle << "\n";
  os << "margin " << margin << " (required " << required_margin << ")\n";
  os << "acuteness " << flag(acute) << "\n";
  os << "conformity " << flag(conformity.pass) << (conformity.pass ? "" : " " + conformity.detail) << "\n";
  os << "coordinates " << flag(coordinates.pass) << (coordinates.pass ? "" : " " + coordinates.detail) << "\n";
  os << "tiling " << flag(tiling.pass) << (tiling.pass ? "" : " " + tiling.detail) << "\n";
  os << "three_on_edge " << three_on_edge << "\n";
  os << "star_separation " << star << "\n";
  os << "gauss_bonnet " << gauss_bonnet << "\n";
  os << "eps " << eps << "\neps_over_min_edge " << eps_ratio << "\n";
  os << "overall " << flag(pass()) << "\n";
  os.precision(old);
}

void QualityReport::write_csv_header(std::ostream& os) const {
  os << "level,vertices,triangles,min_angle,max_angle,margin,conformity,star,gauss_bonnet,eps,eps_over_min_edge\n";
}

void QualityReport::write_csv_row(std::ostream& os) const {
  const auto old = os.precision(17);
  os << level << ',' << vertices << ',' << triangles << ',' << min_angle << ',' << max_angle << ',' << margin << ','
     << (conformity.pass ? 1 : 0) << ',' << star << ',' << gauss_bonnet << ',' << eps << ',' << eps_ratio << '\n';
  os.precision(old);
}

QualityReport verify(const AcuteTriangulation& m, double margin) {
  QualityReport q;
  q.level = m.sub.level;
  q.vertices = m.vertices.size();
  q.triangles = m.triangles.size();
  q.required_margin = margin;
  q.coordinates = coordinate_check(m);
  const AngleCheck a = acuteness_check(m, margin);
  q.min_angle = a.min_angle;
  q.max_angle = a.max_angle;
  q.margin = std::numbers::pi / 2 - a.max_angle;
  q.acute = a.pass;
  q.conformity = conformity_check(m);
  q.tiling = tiling_check(m);
  q.three_on_edge = three_on_edge_count(m);
  q.star = star_separation(m);
  q.gauss_bonnet = gauss_bonnet_check(m);

  // Snap distances, recomputed from the planar parameters of the edge vertices.
  double min_edge = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < m.triangles.size(); ++i) {
    const auto p = m.corners(static_cast<int>(i));
    for (int k = 0; k < 3; ++k) min_edge = std::min(min_edge, distance(p[k], p[(k + 1) % 3]));
  }
  for (size_t t = 0; t < m.sub.triangles.size(); ++t) {
    PlanarTri chart;
    const Chart phi = chart_of(m.sub, static_cast<int>(t), &chart);
    std::set<int> verts;
    for (const MeshTriangle& mt : m.triangles)
      if (mt.tri == static_cast<int>(t)) verts.insert(mt.v.begin(), mt.v.end());
    for (int v : verts) {
      const MeshVertex& mv = m.vertices[v];
      if (mv.kind != MeshVertexKind::Edge) continue;
      for (int k = 0; k < 3; ++k) {
        if (m.sub.tri_edge[t][k] != mv.edge) continue;
        const bool fl = m.sub.tri_flip[t][k];
        const Vec2d a = chart.v[fl ? (k + 1) % 3 : k], b = chart.v[fl ? k : (k + 1) % 3];
        const Vec2d xy = a + (mv.s / (b - a).norm()) * (b - a);
        q.eps = std::max(q.eps, distance(phi.inverse(xy), m.position(v, static_cast<int>(t))));
      }
    }
  }
  q.eps_ratio = q.eps / min_edge;
  return q;
}

}  // namespace kmesh
