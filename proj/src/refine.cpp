#include "kmesh/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "kmesh/mesh2d.hpp"

namespace kmesh {

using namespace mesh2d;

namespace {

constexpr double kFanSector = 70.0 * std::numbers::pi / 180.0;
constexpr double kRadiusShare = 1.0 / 3.0;
constexpr double kAltitudeCap = 1.5;
const double kMuLevels[] = {0.9, 0.75, 0.6, 0.5};
constexpr double kGrowth = 0.15;
constexpr double kFanJump = 1.5;
constexpr int kGradedLevels = 4;

struct Variant {
  double grad, kb, ks, layer;
};
const Variant kVariants[] = {{0.1, 0.8, 0.6, 0.8}, {0.2, 0.8, 0.6, 0.8}, {0.1, 0.7, 0.5, 0.7}, {0.05, 0.9, 0.7, 0.9}};
constexpr int kVariantCount = 4;

std::array<double, 3> chart_sides(const PlanarTri& t) {
  return {(t.v[1] - t.v[0]).norm(), (t.v[2] - t.v[1]).norm(), (t.v[0] - t.v[2]).norm()};
}

std::array<double, 3> chart_angles(const PlanarTri& t) { return angles(t.v[0], t.v[1], t.v[2]); }

double seg_dist(const Vec2d& q, const Vec2d& a, const Vec2d& b) {
  const Vec2d ab = b - a;
  const double t = std::clamp((q - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (q - (a + t * ab)).norm();
}

bool in_polygon(const std::vector<Vec2d>& poly, const Vec2d& q) {
  bool in = false;
  const size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2d &a = poly[i], &b = poly[j];
    if ((a.y() > q.y()) != (b.y() > q.y()) && q.x() < (b.x() - a.x()) * (q.y() - a.y()) / (b.y() - a.y()) + a.x())
      in = !in;
  }
  return in;
}

// Graded interior points of an edge of length L whose end fans have radii ra, rb.
// sa, sb shrink the spacing near ends with narrow corners so interior points fit.
// ma, mb scale the first step to the fan chord at each end; ga, gb are growth rates.
std::vector<double> graded_params(double L, double ra, double rb, double ma, double mb, double ga, double gb) {
  auto f = [&](double t) { return std::min(ma * ra + ga * (t - ra), mb * rb + gb * (L - rb - t)); };
  const double end = L - rb;
  std::vector<double> ts{ra};
  double t = ra;
  for (;;) {
    const double step = f(t);
    if (t + step > end - 0.5 * f(end)) break;
    t += step;
    ts.push_back(t);
  }
  ts.push_back(end);
  return ts;
}

bool angles_ok(const std::vector<Vec2d>& P, const std::vector<std::array<int, 3>>& T, double lo, double hi) {
  for (const auto& t : T) {
    if (!(orient(P[t[0]], P[t[1]], P[t[2]]) > 0)) return false;
    for (double a : angles(P[t[0]], P[t[1]], P[t[2]]))
      if (!(a > lo && a < hi)) return false;
  }
  return true;
}

}  // namespace

std::vector<std::vector<double>> subdivide_edges(const PlanarComplex& c, const AcuteParams& params) {
  const size_t ne = c.edge_length.size();
  std::vector<double> ref(ne, std::numeric_limits<double>::infinity());
  for (size_t t = 0; t < c.charts.size(); ++t) {
    const auto s = chart_sides(c.charts[t]);
    const double shortest = std::min({s[0], s[1], s[2]});
    for (int k = 0; k < 3; ++k) ref[c.tri_edge[t][k]] = std::min(ref[c.tri_edge[t][k]], shortest);
  }
  std::vector<std::vector<double>> out(ne);
  for (size_t e = 0; e < ne; ++e) {
    const double L = c.edge_length[e];
    const int k = std::max(1, static_cast<int>(std::ceil(L / (params.h * ref[e]) - 1e-12)));
    for (int j = 1; j < k; ++j) out[e].push_back(L * j / k);
  }
  return out;
}

CellRefinement regular_cell(const PlanarTri& chart, int k) {
  CellRefinement r;
  const auto L = chart_sides(chart);
  std::vector<int> id((k + 1) * (k + 2) / 2);
  auto index = [k](int i, int j) { return j * (k + 1) - j * (j - 1) / 2 + i; };
  for (int j = 0; j <= k; ++j)
    for (int i = 0; i + j <= k; ++i) {
      RefVertex v;
      v.xy = chart.v[0] + (static_cast<double>(i) / k) * (chart.v[1] - chart.v[0]) +
             (static_cast<double>(j) / k) * (chart.v[2] - chart.v[0]);
      if (i == 0 && j == 0) {
        v.kind = RefVertexKind::Corner, v.corner = 0;
      } else if (i == k) {
        v.kind = RefVertexKind::Corner, v.corner = 1;
      } else if (j == k) {
        v.kind = RefVertexKind::Corner, v.corner = 2;
      } else if (j == 0) {
        v.kind = RefVertexKind::Edge, v.side = 0, v.slot = i - 1, v.s = L[0] * i / k;
      } else if (i + j == k) {
        v.kind = RefVertexKind::Edge, v.side = 1, v.slot = j - 1, v.s = L[1] * j / k;
      } else if (i == 0) {
        v.kind = RefVertexKind::Edge, v.side = 2, v.slot = k - j - 1, v.s = L[2] * (k - j) / k;
      }
      id[index(i, j)] = static_cast<int>(r.vertices.size());
      r.vertices.push_back(v);
    }
  for (int j = 0; j < k; ++j)
    for (int i = 0; i + j < k; ++i) {
      r.triangles.push_back({id[index(i, j)], id[index(i + 1, j)], id[index(i, j + 1)]});
      if (i + j + 1 < k) r.triangles.push_back({id[index(i + 1, j)], id[index(i + 1, j + 1)], id[index(i, j + 1)]});
    }
  return r;
}

CellRefinement mesh_cell(const PlanarTri& chart, const std::array<std::vector<double>, 3>& side_points,
                         const CellMeshOptions& opt) {
  const Variant var = kVariants[std::clamp(opt.variant, 0, kVariantCount - 1)];
  const auto L = chart_sides(chart);
  const auto corner_angle = chart_angles(chart);
  for (int i = 0; i < 3; ++i)
    if (side_points[i].empty()) return {};

  TriMesh m;
  std::vector<RefVertex> info;
  auto add = [&](const Vec2d& p, bool movable, RefVertex v) {
    v.xy = p;
    info.push_back(v);
    return m.add_point(p, movable);
  };
  for (int k = 0; k < 3; ++k) {
    RefVertex v;
    v.kind = RefVertexKind::Corner;
    v.corner = k;
    add(chart.v[k], false, v);
  }
  std::array<std::vector<int>, 3> side_ids;
  for (int i = 0; i < 3; ++i) {
    const Vec2d d = (chart.v[(i + 1) % 3] - chart.v[i]) / L[i];
    for (size_t j = 0; j < side_points[i].size(); ++j) {
      RefVertex v;
      v.kind = RefVertexKind::Edge;
      v.side = i;
      v.slot = static_cast<int>(j);
      v.s = side_points[i][j];
      side_ids[i].push_back(add(chart.v[i] + side_points[i][j] * d, false, v));
    }
  }

  // Corner fans.
  std::vector<std::array<int, 3>> fan_tris;
  std::array<std::vector<int>, 3> arcs;
  for (int v = 0; v < 3; ++v) {
    const int pv = (v + 2) % 3;
    const int prev = side_ids[pv].back(), next = side_ids[v].front();
    const double r_prev = L[pv] - side_points[pv].back(), r_next = side_points[v].front();
    const Vec2d a = chart.v[pv] - chart.v[v];
    const double al = std::atan2(a.y(), a.x());
    const double ang = corner_angle[v];
    // Sector count: at least one per kFanSector of the sized angle. Among counts
    // whose fan triangles (geometric radii) stay acute, take the one whose arc
    // chord best matches the side spacing next to the fan; failing that, the
    // count with the smallest top angle.
    const double q = std::log(r_next / r_prev);
    const double sized = std::max(ang, opt.corner_angles[v]);
    const int n0 = std::max(1, static_cast<int>(std::ceil(sized / kFanSector - 1e-9)));
    const auto& sp = side_points[pv];
    const auto& sn = side_points[v];
    double gap = 0;
    int gaps = 0;
    if (sp.size() >= 2) gap += sp[sp.size() - 1] - sp[sp.size() - 2], ++gaps;
    if (sn.size() >= 2) gap += sn[1] - sn[0], ++gaps;
    const double r_mid = std::sqrt(r_prev * r_next);
    gap = gaps ? gap / gaps : r_mid;
    const double near_cap = std::numbers::pi / 2 - opt.margin - 0.05;
    int n = n0, n_fit = -1;
    double best = std::numeric_limits<double>::infinity(), best_fit = best;
    for (int cand = n0; cand <= n0 + 3; ++cand) {
      const double step = std::exp(std::abs(q) / cand), th = ang / cand;
      if (cand > n0 && th < opt.min_angle + 0.05) break;
      const double near = std::numbers::pi - std::atan2(step * std::sin(th), step * std::cos(th) - 1);
      if (near < best - 1e-12) best = near, n = cand;
      const double fit = std::abs(std::log(2 * r_mid * std::sin(th / 2) / gap));
      if (near < near_cap && fit < best_fit - 1e-12) best_fit = fit, n_fit = cand;
    }
    if (n_fit > 0) n = n_fit;
    std::vector<int> arc{prev};
    for (int j = 1; j < n; ++j) {
      const double phi = al - j * ang / n;
      const double r = r_prev * std::exp(q * j / n);
      arc.push_back(add(chart.v[v] + r * Vec2d(std::cos(phi), std::sin(phi)), true, RefVertex{}));
    }
    arc.push_back(next);
    for (int j = 0; j < n; ++j) {
      fan_tris.push_back({v, arc[j + 1], arc[j]});
      m.locked[edge_key(v, arc[j])] = 1;
    }
    arcs[v] = arc;
    // A single-sector fan is rigid; give up early when it cannot pass.
    if (n == 1) {
      const auto a3 = angles(m.P[v], m.P[next], m.P[prev]);
      for (double x : a3)
        if (!(x > opt.min_angle && x < std::numbers::pi / 2 - opt.margin)) return {};
    }
  }

  // Inner polygon H, counter-clockwise.
  std::vector<int> H;
  for (int i = 0; i < 3; ++i) {
    H.insert(H.end(), side_ids[i].begin(), side_ids[i].end());
    const auto& arc = arcs[(i + 1) % 3];
    H.insert(H.end(), arc.begin() + 1, arc.end() - 1);
  }
  const int nH = static_cast<int>(H.size());
  std::vector<Vec2d> Hp;
  for (int i : H) Hp.push_back(m.P[i]);
  for (int k = 0; k < nH; ++k) m.locked[edge_key(H[k], H[(k + 1) % nH])] = 1;

  m.T = ear_clip(m.P, H);
  if (m.T.empty()) return {};
  m.T.insert(m.T.end(), fan_tris.begin(), fan_tris.end());

  // Size field from boundary spacing.
  std::vector<double> spacing(nH, std::numeric_limits<double>::infinity());
  for (int k = 0; k < nH; ++k) {
    const double d = (Hp[(k + 1) % nH] - Hp[k]).norm();
    spacing[k] = std::min(spacing[k], d);
    spacing[(k + 1) % nH] = std::min(spacing[(k + 1) % nH], d);
  }
  auto size_at = [&](const Vec2d& q) {
    double s = std::numeric_limits<double>::infinity();
    for (int k = 0; k < nH; ++k) s = std::min(s, spacing[k] + var.grad * (q - Hp[k]).norm());
    return s;
  };
  const double smin = *std::min_element(spacing.begin(), spacing.end());
  Vec2d lo = Hp[0], hi = Hp[0];
  for (const auto& p : Hp) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double c = 0.5 * smin;
  const long budget_points = 200000;
  if ((hi - lo).prod() / (c * c) > budget_points) return {};
  std::vector<std::pair<double, Vec2d>> cands;
  int row = 0;
  for (double y = lo.y(); y < hi.y(); y += c * std::sqrt(3.0) / 2, ++row)
    for (double x = lo.x() + (row % 2) * c / 2; x < hi.x(); x += c) {
      const Vec2d q(x, y);
      if (in_polygon(Hp, q)) cands.push_back({size_at(q), q});
    }
  std::stable_sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  // Apex layer: one point over each boundary segment at about equilateral height.
  std::vector<Vec2d> kept;
  std::vector<std::pair<double, int>> segs;
  for (int k = 0; k < nH; ++k) segs.push_back({(Hp[(k + 1) % nH] - Hp[k]).norm(), k});
  std::stable_sort(segs.begin(), segs.end());
  for (const auto& [len, k] : segs) {
    const Vec2d d = (Hp[(k + 1) % nH] - Hp[k]) / len;
    const Vec2d q = 0.5 * (Hp[k] + Hp[(k + 1) % nH]) + var.layer * len * Vec2d(-d.y(), d.x());
    if (!in_polygon(Hp, q)) continue;
    bool ok = true;
    for (int j = 0; j < nH && ok; ++j)
      if (j != k && seg_dist(q, Hp[j], Hp[(j + 1) % nH]) < 0.6 * len) ok = false;
    for (size_t j = 0; j < kept.size() && ok; ++j)
      if ((kept[j] - q).norm() < 0.7 * len) ok = false;
    if (ok) kept.push_back(q);
  }
  for (const auto& [s, q] : cands) {
    bool ok = true;
    for (const auto& p : Hp)
      if ((p - q).norm() < var.kb * s) {
        ok = false;
        break;
      }
    if (!ok) continue;
    for (int k = 0; k < nH && ok; ++k)
      if (seg_dist(q, Hp[k], Hp[(k + 1) % nH]) < var.ks * s) ok = false;
    for (size_t k = 0; k < kept.size() && ok; ++k)
      if ((kept[k] - q).norm() < 0.95 * s) ok = false;
    if (ok) kept.push_back(q);
  }
  for (const auto& q : kept) {
    const int v = add(q, true, RefVertex{});
    if (!insert_point(m, v)) m.movable[v] = 0;
  }
  flip_pass(m, FlipRule::Delaunay);

  const double lo_ang = opt.min_angle, hi_ang = std::numbers::pi / 2 - opt.margin;
  const double s_hi = hi_ang - 0.02, s_lo = opt.min_angle + 0.03;

  auto certified = [&] {
    return angles_ok(m.P, m.T, lo_ang, hi_ang);
  };

  // Valence targets: 6 inside, by interior angle on H.
  auto targets = [&] {
    std::vector<int> t(m.P.size(), 6);
    for (int k = 0; k < nH; ++k) {
      const Vec2d u = Hp[(k + nH - 1) % nH] - Hp[k], w = Hp[(k + 1) % nH] - Hp[k];
      double phi = std::atan2(u.y(), u.x()) - std::atan2(w.y(), w.x());
      while (phi < 0) phi += 2 * std::numbers::pi;
      while (phi >= 2 * std::numbers::pi) phi -= 2 * std::numbers::pi;
      t[H[k]] = std::max(2, static_cast<int>(std::lround(phi / (std::numbers::pi / 3)))) + 1;
    }
    return t;
  };

  auto badness = [&] {
    double b = 0;
    for (const auto& t : m.T)
      for (double a : angles(m.P[t[0]], m.P[t[1]], m.P[t[2]])) b = std::max({b, a - hi_ang, lo_ang - a});
    return b;
  };
  double best_bad = std::numeric_limits<double>::infinity();
  int stale = 0;
  bool ok = certified();
  auto relax = [&] {
    smooth(m, s_lo, s_hi, 10.0, 100);
    if (certified()) return true;
    optimize_vertices(m, s_lo, s_hi, 20);
    return certified();
  };
  for (int round = 0; round < 12 && !ok && stale < 3; ++round) {
    if (relax()) break;
    if (round < 6) {
      flip_valence(m, targets());
      if (relax()) break;
    }
    flip_pass(m, FlipRule::MaxAngle);
    ok = certified();
    const double bad = badness();
    stale = bad < best_bad - 1e-3 ? 0 : stale + 1;
    best_bad = std::min(best_bad, bad);
    if (ok || round >= 8) continue;

    // Vertices whose incident angles cannot all drop below the bound get a new
    // neighbor at the centroid of their widest triangle.
    std::vector<double> sum(m.P.size(), 0), widest(m.P.size(), 0);
    std::vector<int> count(m.P.size(), 0), widest_t(m.P.size(), -1);
    for (size_t t = 0; t < m.T.size(); ++t) {
      const auto a = angles(m.P[m.T[t][0]], m.P[m.T[t][1]], m.P[m.T[t][2]]);
      for (int k = 0; k < 3; ++k) {
        const int v = m.T[t][k];
        sum[v] += a[k];
        ++count[v];
        if (a[k] > widest[v]) widest[v] = a[k], widest_t[v] = static_cast<int>(t);
      }
    }
    std::vector<int> split;
    for (size_t v = 0; v < m.P.size(); ++v)
      if (count[v] > 0 && sum[v] / count[v] >= s_hi && widest_t[v] >= 0) split.push_back(widest_t[v]);
    std::sort(split.begin(), split.end());
    split.erase(std::unique(split.begin(), split.end()), split.end());
    for (int t : split) {
      const auto tri = m.T[t];
      const Vec2d ctr = (m.P[tri[0]] + m.P[tri[1]] + m.P[tri[2]]) / 3.0;
      const int v = add(ctr, true, RefVertex{});
      m.T[t] = {tri[0], tri[1], v};
      m.T.push_back({tri[1], tri[2], v});
      m.T.push_back({tri[2], tri[0], v});
    }
    flip_pass(m, FlipRule::Delaunay);
  }
  ok = certified();
  if (!ok) return {};

  CellRefinement out;
  out.vertices = info;
  for (size_t i = 0; i < m.P.size(); ++i) out.vertices[i].xy = m.P[i];
  out.triangles = m.T;
  // Drop unused vertices (points that could not be inserted).
  std::vector<int> used(out.vertices.size(), 0);
  for (const auto& t : out.triangles)
    for (int v : t) used[v] = 1;
  std::vector<int> remap(out.vertices.size(), -1);
  std::vector<RefVertex> vs;
  for (size_t i = 0; i < out.vertices.size(); ++i)
    if (used[i]) {
      remap[i] = static_cast<int>(vs.size());
      vs.push_back(out.vertices[i]);
    }
  for (auto& t : out.triangles)
    for (int& v : t) v = remap[v];
  out.vertices = std::move(vs);
  return out;
}

double star_separation(const PlanarTri& chart, const CellRefinement& cell) {
  double best = std::numeric_limits<double>::infinity();
  for (const RefVertex& v : cell.vertices) {
    if (v.kind != RefVertexKind::Interior) continue;
    for (int k = 0; k < 3; ++k) {
      const Vec2d& a = chart.v[k];
      const Vec2d& b = chart.v[(k + 1) % 3];
      auto base = [](const Vec2d& p, const Vec2d& q, const Vec2d& x) {
        const Vec2d u = q - p, w = x - p;
        return std::atan2(std::abs(u.x() * w.y() - u.y() * w.x()), u.dot(w));
      };
      best = std::min({best, base(a, b, v.xy), base(b, a, v.xy)});
    }
  }
  return best;
}

PlanarRefinement acute_refine(const PlanarComplex& c, const AcuteParams& params) {
  if (!(params.min_angle > 0 && params.min_angle < std::numbers::pi / 2 - params.margin))
    throw Error(Errc::OutOfRange, "need 0 < min_angle < pi/2 - margin");
  const int nt = static_cast<int>(c.charts.size());
  const int ne = static_cast<int>(c.edge_length.size());

  const auto uniform = subdivide_edges(c, params);
  int k_star = 2;
  for (const auto& u : uniform) k_star = std::max(k_star, static_cast<int>(u.size()) + 1);
  // One split count everywhere lets whole cells be regular; only worth it while
  // no edge ends up much finer than its own count asks for.
  bool global_k = true;
  for (const auto& u : uniform) global_k &= k_star <= 2 * (static_cast<int>(u.size()) + 1);

  // Corner radii per vertex class.
  std::vector<double> rho(c.vertex_count, std::numeric_limits<double>::infinity());
  for (int t = 0; t < nt; ++t) {
    const auto L = chart_sides(c.charts[t]);
    const double area = 0.5 * std::abs(orient(c.charts[t].v[0], c.charts[t].v[1], c.charts[t].v[2]));
    for (int k = 0; k < 3; ++k) {
      const double alt = 2 * area / L[(k + 1) % 3];
      const double r = kRadiusShare * std::min({L[k], L[(k + 2) % 3], kAltitudeCap * alt});
      rho[c.tri_vertex[t][k]] = std::min(rho[c.tri_vertex[t][k]], r);
    }
  }
  // Per vertex: chord of the narrowest fan sector (the spacing the fans expect
  // next to them) and a growth damper for narrow corners.
  std::vector<double> chord(c.vertex_count, 1.0), narrow(c.vertex_count, 1.0);
  for (int t = 0; t < nt; ++t) {
    const auto a = chart_angles(c.charts[t]);
    for (int k = 0; k < 3; ++k) {
      const int v = c.tri_vertex[t][k];
      const double sized = c.corner_angles.empty() ? a[k] : std::max(a[k], c.corner_angles[t][k]);
      const int n = std::max(1, static_cast<int>(std::ceil(sized / kFanSector - 1e-9)));
      chord[v] = std::min(chord[v], 2 * std::sin(a[k] / (2 * n)));
      narrow[v] = std::min(narrow[v], std::sin(std::min(a[k], std::numbers::pi / 3)) / std::sin(std::numbers::pi / 3));
    }
  }
  // Class endpoints and incident cells.
  std::vector<std::array<int, 2>> ends(ne, {-1, -1});
  std::vector<std::vector<int>> incident(ne);
  for (int t = 0; t < nt; ++t)
    for (int k = 0; k < 3; ++k) {
      const int e = c.tri_edge[t][k];
      incident[e].push_back(t);
      if (ends[e][0] < 0) {
        int a = c.tri_vertex[t][k], b = c.tri_vertex[t][(k + 1) % 3];
        if (c.tri_flip[t][k]) std::swap(a, b);
        ends[e] = {a, b};
      }
    }
  // A fan much wider than the spacing that can grow in from the edge's far end
  // leaves a size jump at its arc; shrink such radii.
  for (int pass = 0; pass < 3; ++pass)
    for (int e = 0; e < ne; ++e)
      for (int side = 0; side < 2; ++side) {
        const int a = ends[e][side], b = ends[e][1 - side];
        const double L = c.edge_length[e];
        const double rb = std::min(rho[b], L / 3);
        const double ma = kMuLevels[0] * chord[a], mb = kMuLevels[0] * chord[b], gb = kGrowth * narrow[b];
        rho[a] = std::min(rho[a], kFanJump * (mb * rb + gb * (L - rb)) / (ma + gb));
      }

  // -1: equal arcs, otherwise graded level. Equal arcs only pay off when whole
  // cells can be regular; otherwise corner fans need a common radius per vertex.
  std::vector<int> level(ne, global_k ? -1 : 0);
  std::vector<std::vector<double>> eparams(ne);
  auto compute_params = [&](int e) {
    const double L = c.edge_length[e];
    if (level[e] < 0) {
      eparams[e].clear();
      const int k = global_k ? k_star : std::max(2, static_cast<int>(uniform[e].size()) + 1);
      for (int j = 1; j < k; ++j) eparams[e].push_back(L * j / k);
    } else {
      const double ra = std::min(rho[ends[e][0]], L / 3), rb = std::min(rho[ends[e][1]], L / 3);
      const int a = ends[e][0], b = ends[e][1];
      const double mu = kMuLevels[level[e]];
      eparams[e] = graded_params(L, ra, rb, mu * chord[a], mu * chord[b], kGrowth * narrow[a], kGrowth * narrow[b]);
    }
  };
  for (int e = 0; e < ne; ++e) compute_params(e);

  PlanarRefinement out;
  out.cells.assign(nt, {});
  std::vector<char> done(nt, 0), dirty(nt, 1);
  std::map<std::vector<double>, CellRefinement> cache;
  const double hi = std::numbers::pi / 2 - params.margin;

  for (int round = 0; round < std::max(1, params.budget); ++round) {
    out.rounds = round + 1;
    for (int t = 0; t < nt; ++t) {
      if (!dirty[t]) continue;
      dirty[t] = 0;
      const PlanarTri& chart = c.charts[t];
      const auto L = chart_sides(chart);
      std::array<std::vector<double>, 3> sides;
      bool all_uniform = true;
      for (int k = 0; k < 3; ++k) {
        const int e = c.tri_edge[t][k];
        all_uniform &= level[e] < 0;
        const double scale = L[k] / c.edge_length[e];
        const auto& ps = eparams[e];
        for (size_t j = 0; j < ps.size(); ++j) {
          const double s = c.tri_flip[t][k] ? c.edge_length[e] - ps[ps.size() - 1 - j] : ps[j];
          sides[k].push_back(s * scale);
        }
      }
      auto ang = chart_angles(chart);
      std::array<double, 3> true_ang{};
      if (!c.corner_angles.empty()) true_ang = c.corner_angles[t];
      for (int k = 0; k < 3; ++k) ang[k] = std::max(ang[k], true_ang[k]);
      CellRefinement r;
      if (all_uniform && global_k && *std::max_element(ang.begin(), ang.end()) < hi &&
          *std::min_element(ang.begin(), ang.end()) > params.min_angle) {
        r = regular_cell(chart, k_star);
      } else {
        // Symmetric complexes repeat cells exactly; reuse those meshes.
        std::vector<double> key;
        for (const auto& p : chart.v) key.insert(key.end(), {p.x(), p.y()});
        key.insert(key.end(), true_ang.begin(), true_ang.end());
        for (const auto& sp : sides) {
          key.push_back(-1);
          key.insert(key.end(), sp.begin(), sp.end());
        }
        auto hit = cache.find(key);
        if (hit != cache.end()) {
          r = hit->second;
        } else {
          for (int v = 0; v < kVariantCount && r.triangles.empty(); ++v)
            r = mesh_cell(chart, sides, {params.margin, params.min_angle, v, true_ang});
          cache.emplace(std::move(key), r);
        }
      }
      done[t] = !r.triangles.empty();
      // Class parameters for side vertices.
      for (RefVertex& v : r.vertices) {
        if (v.kind != RefVertexKind::Edge) continue;
        const int e = c.tri_edge[t][v.side];
        const auto& ps = eparams[e];
        v.edge = e;
        v.s = c.tri_flip[t][v.side] ? ps[ps.size() - 1 - v.slot] : ps[v.slot];
      }
      out.cells[t] = std::move(r);
    }
    bool all = true;
    std::vector<int> changed;
    for (int t = 0; t < nt; ++t) {
      if (done[t]) continue;
      all = false;
      for (int k = 0; k < 3; ++k) {
        const int e = c.tri_edge[t][k];
        if (level[e] + 1 < kGradedLevels) changed.push_back(e);
      }
    }
    // Leaving equal arcs is global: cells mixing equal-arc and graded sides get
    // badly mismatched spacing.
    if (!all && std::find(level.begin(), level.end(), -1) != level.end())
      for (int e = 0; e < ne; ++e)
        if (level[e] < 0) changed.push_back(e);
    if (all) {
      out.edge_params = eparams;
      out.regular_cells = 0;
      for (const auto& cell : out.cells)
        if (cell.vertices.size() == static_cast<size_t>((k_star + 1) * (k_star + 2) / 2) &&
            cell.triangles.size() == static_cast<size_t>(k_star * k_star))
          ++out.regular_cells;
      return out;
    }
    std::sort(changed.begin(), changed.end());
    changed.erase(std::unique(changed.begin(), changed.end()), changed.end());
    if (changed.empty()) break;
    for (int e : changed) {
      ++level[e];
      compute_params(e);
      for (int t : incident[e]) dirty[t] = 1;
    }
  }
  int failed = 0;
  for (int t = 0; t < nt; ++t) failed += !done[t];
  throw Error(Errc::BudgetExhausted, std::to_string(failed) + " of " + std::to_string(nt) +
                                         " cells could not be certified acute");
}

}  // namespace kmesh
