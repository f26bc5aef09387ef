#include "kmesh/mesh2d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kmesh::mesh2d {

double orient(const Vec2d& a, const Vec2d& b, const Vec2d& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

std::array<double, 3> angles(const Vec2d& a, const Vec2d& b, const Vec2d& c) {
  auto at = [](const Vec2d& p, const Vec2d& q, const Vec2d& r) {
    const Vec2d u = q - p, v = r - p;
    return std::atan2(std::abs(u.x() * v.y() - u.y() * v.x()), u.dot(v));
  };
  return {at(a, b, c), at(b, c, a), at(c, a, b)};
}

int TriMesh::add_point(const Vec2d& p, bool can_move) {
  P.push_back(p);
  movable.push_back(can_move);
  return static_cast<int>(P.size()) - 1;
}

double TriMesh::min_angle() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& t : T)
    for (double a : angles(P[t[0]], P[t[1]], P[t[2]])) r = std::min(r, a);
  return r;
}

double TriMesh::max_angle() const {
  double r = 0;
  for (const auto& t : T)
    for (double a : angles(P[t[0]], P[t[1]], P[t[2]])) r = std::max(r, a);
  return r;
}

namespace {

bool inside_closed(const Vec2d& a, const Vec2d& b, const Vec2d& c, const Vec2d& x, double eps) {
  return orient(a, b, x) >= -eps && orient(b, c, x) >= -eps && orient(c, a, x) >= -eps;
}

double min_angle_of(const Vec2d& a, const Vec2d& b, const Vec2d& c) {
  const auto g = angles(a, b, c);
  return std::min({g[0], g[1], g[2]});
}

double max_angle_of(const Vec2d& a, const Vec2d& b, const Vec2d& c) {
  const auto g = angles(a, b, c);
  return std::max({g[0], g[1], g[2]});
}

struct Adjacency {
  std::unordered_map<std::uint64_t, std::array<int, 2>> map;

  explicit Adjacency(const TriMesh& m) {
    map.reserve(m.T.size() * 2);
    for (size_t t = 0; t < m.T.size(); ++t)
      for (int k = 0; k < 3; ++k) add(m.T[t][k], m.T[t][(k + 1) % 3], static_cast<int>(t));
  }
  void add(int a, int b, int t) {
    auto [it, fresh] = map.try_emplace(edge_key(a, b), std::array<int, 2>{t, -1});
    if (!fresh) it->second[1] = t;
  }
  void remove(int a, int b, int t) {
    auto it = map.find(edge_key(a, b));
    if (it == map.end()) return;
    auto& s = it->second;
    if (s[0] == t) {
      s[0] = s[1];
      s[1] = -1;
    } else if (s[1] == t) {
      s[1] = -1;
    }
    if (s[0] < 0) map.erase(it);
  }
};

// Third vertex of triangle t opposite the edge (a, b), and whether t runs a -> b.
int opposite(const std::array<int, 3>& t, int a, int b, bool& forward) {
  for (int k = 0; k < 3; ++k) {
    if (t[k] == a && t[(k + 1) % 3] == b) {
      forward = true;
      return t[(k + 2) % 3];
    }
    if (t[k] == b && t[(k + 1) % 3] == a) {
      forward = false;
      return t[(k + 2) % 3];
    }
  }
  return -1;
}

// Flips the edge shared by t0 (a -> b, apex c) and t1 (b -> a, apex d).
void do_flip(TriMesh& m, Adjacency& adj, int t0, int t1, int a, int b, int c, int d) {
  adj.remove(b, c, t0);
  adj.remove(a, d, t1);
  adj.map.erase(edge_key(a, b));
  m.T[t0] = {a, d, c};
  m.T[t1] = {d, b, c};
  adj.add(a, d, t0);
  adj.add(d, c, t0);
  adj.add(d, c, t1);
  adj.add(b, c, t1);
}

struct FlipCandidate {
  int t0, t1, a, b, c, d;
};

bool candidate(const TriMesh& m, const Adjacency& adj, std::uint64_t key, FlipCandidate& f) {
  auto it = adj.map.find(key);
  if (it == adj.map.end() || it->second[1] < 0) return false;
  if (m.locked.count(key)) return false;
  int t0 = it->second[0], t1 = it->second[1];
  const int a0 = static_cast<int>(key >> 32), b0 = static_cast<int>(key & 0xffffffffu);
  bool fw0 = false, fw1 = false;
  const int c0 = opposite(m.T[t0], a0, b0, fw0);
  const int c1 = opposite(m.T[t1], a0, b0, fw1);
  if (c0 < 0 || c1 < 0 || fw0 == fw1) return false;
  int a = a0, b = b0, c = c0, d = c1;
  if (!fw0) {
    std::swap(t0, t1);
    std::swap(c, d);
  }
  if (c == d || adj.map.count(edge_key(c, d))) return false;
  const auto& P = m.P;
  const double scale = (P[a] - P[b]).squaredNorm();
  if (orient(P[a], P[d], P[c]) <= 1e-12 * scale || orient(P[d], P[b], P[c]) <= 1e-12 * scale) return false;
  f = {t0, t1, a, b, c, d};
  return true;
}

double incircle(const Vec2d& a, const Vec2d& b, const Vec2d& c, const Vec2d& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady, bd = bdx * bdx + bdy * bdy, cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

std::vector<std::uint64_t> sorted_keys(const Adjacency& adj) {
  std::vector<std::uint64_t> keys;
  keys.reserve(adj.map.size());
  for (const auto& [k, v] : adj.map)
    if (v[1] >= 0) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  return keys;
}

}  // namespace

std::vector<std::array<int, 3>> ear_clip(const std::vector<Vec2d>& P, const std::vector<int>& ring_in) {
  std::vector<int> ring = ring_in;
  std::vector<std::array<int, 3>> out;
  double scale = 0;
  for (int i : ring) scale = std::max(scale, P[i].squaredNorm());
  const double eps = 1e-14 * std::max(scale, 1e-300);
  while (ring.size() > 3) {
    const int n = static_cast<int>(ring.size());
    int best = -1;
    double best_q = -1;
    for (int i = 0; i < n; ++i) {
      const int a = ring[(i + n - 1) % n], b = ring[i], c = ring[(i + 1) % n];
      if (orient(P[a], P[b], P[c]) <= eps) continue;
      bool ok = true;
      for (int j : ring) {
        if (j == a || j == b || j == c) continue;
        if (inside_closed(P[a], P[b], P[c], P[j], eps) || (P[j] - P[a]).norm() == 0 || (P[j] - P[c]).norm() == 0) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      const double q = min_angle_of(P[a], P[b], P[c]);
      if (q > best_q) {
        best_q = q;
        best = i;
      }
    }
    if (best < 0) return {};
    out.push_back({ring[(best + n - 1) % n], ring[best], ring[(best + 1) % n]});
    ring.erase(ring.begin() + best);
  }
  if (orient(P[ring[0]], P[ring[1]], P[ring[2]]) <= eps) return {};
  out.push_back({ring[0], ring[1], ring[2]});
  return out;
}

bool insert_point(TriMesh& m, int v) {
  const Vec2d& x = m.P[v];
  for (size_t ti = 0; ti < m.T.size(); ++ti) {
    const auto t = m.T[ti];
    const Vec2d &a = m.P[t[0]], &b = m.P[t[1]], &c = m.P[t[2]];
    const double scale = std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()});
    const double eps = 1e-12 * scale;
    if (!inside_closed(a, b, c, x, eps)) continue;
    const double o[3] = {orient(a, b, x), orient(b, c, x), orient(c, a, x)};
    int on_edge = -1;
    for (int k = 0; k < 3; ++k)
      if (std::abs(o[k]) <= 1e-9 * scale) on_edge = k;
    if (on_edge < 0) {
      m.T[ti] = {t[0], t[1], v};
      m.T.push_back({t[1], t[2], v});
      m.T.push_back({t[2], t[0], v});
      return true;
    }
    const int p = t[on_edge], q = t[(on_edge + 1) % 3], r = t[(on_edge + 2) % 3];
    if (m.is_locked(p, q)) return false;
    // Neighbor across p-q.
    int other = -1, s = -1;
    for (size_t tj = 0; tj < m.T.size(); ++tj) {
      if (tj == ti) continue;
      bool fw;
      const int opp = opposite(m.T[tj], p, q, fw);
      if (opp >= 0 && !fw) {
        other = static_cast<int>(tj);
        s = opp;
        break;
      }
    }
    m.T[ti] = {p, v, r};
    m.T.push_back({v, q, r});
    if (other >= 0) {
      m.T[other] = {q, v, s};
      m.T.push_back({v, p, s});
    }
    return true;
  }
  return false;
}

int flip_pass(TriMesh& m, FlipRule rule) {
  Adjacency adj(m);
  int total = 0;
  for (int sweep = 0; sweep < 200; ++sweep) {
    int flips = 0;
    for (std::uint64_t key : sorted_keys(adj)) {
      FlipCandidate f;
      if (!candidate(m, adj, key, f)) continue;
      const auto& P = m.P;
      bool go;
      if (rule == FlipRule::Delaunay) {
        const double s = (P[f.a] - P[f.b]).squaredNorm();
        go = incircle(P[f.a], P[f.b], P[f.c], P[f.d]) > 1e-12 * s * s;
      } else {
        const double before = std::max(max_angle_of(P[f.a], P[f.b], P[f.c]), max_angle_of(P[f.b], P[f.a], P[f.d]));
        const double after = std::max(max_angle_of(P[f.a], P[f.d], P[f.c]), max_angle_of(P[f.d], P[f.b], P[f.c]));
        go = after < before - 1e-9;
      }
      if (!go) continue;
      do_flip(m, adj, f.t0, f.t1, f.a, f.b, f.c, f.d);
      ++flips;
    }
    total += flips;
    if (flips == 0) break;
  }
  return total;
}

int flip_valence(TriMesh& m, const std::vector<int>& target) {
  std::vector<int> deg(m.P.size(), 0);
  {
    Adjacency adj(m);
    for (const auto& [k, v] : adj.map) {
      ++deg[k >> 32];
      ++deg[k & 0xffffffffu];
    }
  }
  auto cost = [&](int v, int delta) {
    const int d = deg[v] + delta - target[v];
    return d * d;
  };
  Adjacency adj(m);
  int total = 0;
  for (int sweep = 0; sweep < 50; ++sweep) {
    int flips = 0;
    for (std::uint64_t key : sorted_keys(adj)) {
      FlipCandidate f;
      if (!candidate(m, adj, key, f)) continue;
      const int before = cost(f.a, 0) + cost(f.b, 0) + cost(f.c, 0) + cost(f.d, 0);
      const int after = cost(f.a, -1) + cost(f.b, -1) + cost(f.c, 1) + cost(f.d, 1);
      if (after >= before) continue;
      --deg[f.a];
      --deg[f.b];
      ++deg[f.c];
      ++deg[f.d];
      do_flip(m, adj, f.t0, f.t1, f.a, f.b, f.c, f.d);
      ++flips;
    }
    total += flips;
    if (flips == 0) break;
  }
  return total;
}

namespace {

double energy(const TriMesh& m, const std::vector<Vec2d>& P, double lo, double hi, double beta, std::vector<Vec2d>* grad) {
  double E = 0;
  if (grad) grad->assign(P.size(), Vec2d::Zero());
  for (const auto& t : m.T) {
    for (int k = 0; k < 3; ++k) {
      const int ip = t[k], iq = t[(k + 1) % 3], ir = t[(k + 2) % 3];
      const Vec2d u = P[iq] - P[ip], v = P[ir] - P[ip];
      const double cr = u.x() * v.y() - u.y() * v.x();
      if (k == 0 && !(cr > 0)) return std::numeric_limits<double>::infinity();
      const double th = std::atan2(cr, u.dot(v));
      const double e1 = std::exp(std::clamp(beta * (th - hi), -700.0, 700.0));
      const double e2 = std::exp(std::clamp(beta * (lo - th), -700.0, 700.0));
      E += e1 + e2;
      if (!grad) continue;
      const double df = beta * (e1 - e2);
      const Vec2d gq = -Vec2d(-u.y(), u.x()) / u.squaredNorm();
      const Vec2d gr = Vec2d(-v.y(), v.x()) / v.squaredNorm();
      (*grad)[iq] += df * gq;
      (*grad)[ir] += df * gr;
      (*grad)[ip] -= df * (gq + gr);
    }
  }
  return E;
}

}  // namespace

void smooth(TriMesh& m, double lo, double hi, double beta, int iters) {
  bool any = false;
  for (char c : m.movable) any |= c != 0;
  if (!any) return;
  std::vector<Vec2d> g, gn;
  double E = energy(m, m.P, lo, hi, beta, &g);
  if (!std::isfinite(E)) return;
  for (size_t i = 0; i < g.size(); ++i)
    if (!m.movable[i]) g[i].setZero();
  double step = 1e-3;
  std::vector<Vec2d> trial(m.P.size());
  for (int it = 0; it < iters; ++it) {
    double gnorm = 0;
    for (const auto& x : g) gnorm += x.squaredNorm();
    if (gnorm == 0) break;
    double En = 0;
    for (;;) {
      for (size_t i = 0; i < trial.size(); ++i) trial[i] = m.P[i] - step * g[i];
      En = energy(m, trial, lo, hi, beta, nullptr);
      if (En < E) break;
      step *= 0.5;
      if (step < 1e-14) break;
    }
    if (step < 1e-14) break;
    m.P = trial;
    E = energy(m, m.P, lo, hi, beta, &g);
    for (size_t i = 0; i < g.size(); ++i)
      if (!m.movable[i]) g[i].setZero();
    step *= 1.5;
  }
}

}  // namespace kmesh::mesh2d

namespace kmesh::mesh2d {

namespace {

// Worst bound violation (positive) or smallest slack (negative) over triangles.
double star_score(const std::vector<Vec2d>& P, const std::vector<std::array<int, 3>>& T, const std::vector<int>& star,
                  double lo, double hi) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int ti : star) {
    const auto& t = T[ti];
    if (!(orient(P[t[0]], P[t[1]], P[t[2]]) > 0)) return std::numeric_limits<double>::infinity();
    for (double a : angles(P[t[0]], P[t[1]], P[t[2]])) worst = std::max({worst, a - hi, lo - a});
  }
  return worst;
}

}  // namespace

int optimize_vertices(TriMesh& m, double lo, double hi, int sweeps) {
  std::vector<std::vector<int>> star(m.P.size());
  for (size_t t = 0; t < m.T.size(); ++t)
    for (int v : m.T[t]) star[v].push_back(static_cast<int>(t));
  static const double dirs[8][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {0.7071067811865476, 0.7071067811865476},
                                    {-0.7071067811865476, 0.7071067811865476}, {-0.7071067811865476, -0.7071067811865476},
                                    {0.7071067811865476, -0.7071067811865476}};
  int moved = 0;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    int moves = 0;
    for (size_t v = 0; v < m.P.size(); ++v) {
      if (!m.movable[v] || star[v].empty()) continue;
      double reach = std::numeric_limits<double>::infinity();
      for (int ti : star[v])
        for (int w : m.T[ti])
          if (w != static_cast<int>(v)) reach = std::min(reach, (m.P[w] - m.P[v]).norm());
      double best = star_score(m.P, m.T, star[v], lo, hi);
      const Vec2d start = m.P[v];
      double step = 0.25 * reach;
      for (int it = 0; it < 40 && step > 1e-4 * reach; ++it) {
        const Vec2d here = m.P[v];
        bool improved = false;
        for (const auto& d : dirs) {
          m.P[v] = here + step * Vec2d(d[0], d[1]);
          const double s = star_score(m.P, m.T, star[v], lo, hi);
          if (s < best - 1e-12) {
            best = s;
            improved = true;
            break;
          }
          m.P[v] = here;
        }
        if (!improved) step *= 0.5;
      }
      if ((m.P[v] - start).norm() > 0) ++moves;
    }
    moved += moves;
    if (moves == 0) break;
  }
  return moved;
}

}  // namespace kmesh::mesh2d
