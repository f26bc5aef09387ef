#pragma once

// Trigonometry and geodesic maps of the model planes M2_kappa.
//
// Points live in embedding coordinates: the sphere x.x = 1/kappa for kappa > 0,
// the upper sheet <x,x> = 1/kappa of the hyperboloid in signature (+,+,-) for
// kappa < 0, and (x, y, 1) for the Euclidean plane.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "kmesh/error.hpp"

namespace kmesh {

template <class S> using Vec2 = Eigen::Matrix<S, 2, 1>;
template <class S> using Vec3 = Eigen::Matrix<S, 3, 1>;
template <class S> using Mat2 = Eigen::Matrix<S, 2, 2>;
template <class S> using Mat3 = Eigen::Matrix<S, 3, 3>;

inline constexpr double kDefaultTol = 1e-10;

template <class S>
struct ModelPoint {
  S kappa{0};
  Vec3<S> x{S(0), S(0), S(1)};
};

template <class S>
struct GeodesicTriangle {
  S kappa{0};
  std::array<ModelPoint<S>, 3> v;
};

template <class S>
struct PlanarTriangle {
  std::array<Vec2<S>, 3> v;
};

template <class S>
struct Isometry {
  S kappa{0};
  Mat3<S> m = Mat3<S>::Identity();

  ModelPoint<S> operator()(const ModelPoint<S>& p) const { return {kappa, m * p.x}; }
  Isometry inverse() const;
};

template <class S>
struct AffineMap {
  Mat2<S> linear = Mat2<S>::Identity();
  Vec2<S> offset = Vec2<S>::Zero();

  Vec2<S> operator()(const Vec2<S>& x) const { return linear * x + offset; }
  AffineMap inverse() const {
    AffineMap r;
    r.linear = linear.inverse();
    r.offset = -(r.linear * offset);
    return r;
  }
};

template <class S>
struct GeodesicChart {
  Isometry<S> tau;
  S kappa{0};
  AffineMap<S> psi;

  Vec2<S> forward(const ModelPoint<S>& p) const;
  ModelPoint<S> inverse(const Vec2<S>& x) const;
};

namespace detail {

template <class S>
S radius(S kappa) {
  using std::abs, std::sqrt;
  return S(1) / sqrt(abs(kappa));
}

// Minkowski form (+,+,-).
template <class S>
S mink(const Vec3<S>& a, const Vec3<S>& b) {
  return a[0] * b[0] + a[1] * b[1] - a[2] * b[2];
}

template <class S>
S form(S kappa, const Vec3<S>& a, const Vec3<S>& b) {
  if (kappa < 0) return mink(a, b);
  if (kappa > 0) return a.dot(b);
  return a[0] * b[0] + a[1] * b[1];
}

template <class S>
void same_kappa(const ModelPoint<S>& p, const ModelPoint<S>& q) {
  if (p.kappa != q.kappa)
    throw Error(Errc::CurvatureMismatch, "points from different model planes");
}

template <class S>
Mat3<S> rot_z(S a) {
  using std::cos, std::sin;
  Mat3<S> r;
  r << cos(a), -sin(a), S(0), sin(a), cos(a), S(0), S(0), S(0), S(1);
  return r;
}

template <class S>
Mat3<S> rot_y(S a) {
  using std::cos, std::sin;
  Mat3<S> r;
  r << cos(a), S(0), sin(a), S(0), S(1), S(0), -sin(a), S(0), cos(a);
  return r;
}

template <class S>
Mat3<S> boost_x(S eta) {
  using std::cosh, std::sinh;
  Mat3<S> r;
  r << cosh(eta), S(0), sinh(eta), S(0), S(1), S(0), sinh(eta), S(0), cosh(eta);
  return r;
}

// sin, sinh or identity of the curvature-scaled length.
template <class S>
S sfun(S kappa, S x) {
  using std::sin, std::sinh, std::sqrt, std::abs;
  if (kappa > 0) return sin(sqrt(kappa) * x);
  if (kappa < 0) return sinh(sqrt(-kappa) * x);
  return x;
}

}  // namespace detail

template <class S>
ModelPoint<S> plane_point(S x, S y) {
  return {S(0), Vec3<S>(x, y, S(1))};
}

// Point at distance r from the pole/apex/origin in direction theta.
template <class S>
ModelPoint<S> polar_point(S kappa, S r, S theta) {
  using std::cos, std::sin, std::cosh, std::sinh;
  if (kappa == 0) return plane_point<S>(r * cos(theta), r * sin(theta));
  const S R = detail::radius(kappa);
  const S t = r / R;
  if (kappa > 0) return {kappa, Vec3<S>(R * sin(t) * cos(theta), R * sin(t) * sin(theta), R * cos(t))};
  return {kappa, Vec3<S>(R * sinh(t) * cos(theta), R * sinh(t) * sin(theta), R * cosh(t))};
}

template <class S>
ModelPoint<S> pole(S kappa) {
  if (kappa == 0) return plane_point<S>(S(0), S(0));
  return {kappa, Vec3<S>(S(0), S(0), detail::radius(kappa))};
}

// Relative violation of the embedding constraint.
template <class S>
S embedding_residual(const ModelPoint<S>& p) {
  using std::abs;
  if (p.kappa == 0) return abs(p.x[2] - S(1));
  const S target = S(1) / p.kappa;
  S r = abs(detail::form(p.kappa, p.x, p.x) - target) / abs(target);
  if (p.kappa < 0 && p.x[2] <= 0) r = std::numeric_limits<S>::infinity();
  return r;
}

template <class S>
S distance(const ModelPoint<S>& p, const ModelPoint<S>& q, S tol = S(kDefaultTol)) {
  using std::atan2, std::asinh, std::sqrt, std::max;
  detail::same_kappa(p, q);
  const S k = p.kappa;
  if (k == 0) return (p.x.template head<2>() - q.x.template head<2>()).norm();
  const S R = detail::radius(k);
  if (k > 0) {
    const Vec3<S> u = p.x.normalized(), v = q.x.normalized();
    if ((u + v).norm() <= tol) throw Error(Errc::AntipodalPoints, "distance between antipodal points");
    return R * atan2(u.cross(v).norm(), u.dot(v));
  }
  const Vec3<S> d = p.x - q.x;
  const S m = max(S(0), detail::mink(d, d));
  return S(2) * R * asinh(sqrt(m) / (S(2) * R));
}

template <class S>
ModelPoint<S> point_on_geodesic(const ModelPoint<S>& p, const ModelPoint<S>& q, S s,
                                S tol = S(kDefaultTol)) {
  using std::cos, std::sin, std::cosh, std::sinh, std::sqrt, std::abs;
  detail::same_kappa(p, q);
  const S k = p.kappa;
  if (k > 0) {
    const Vec3<S> u = p.x.normalized(), v = q.x.normalized();
    if ((u + v).norm() <= tol) throw Error(Errc::NonUniqueGeodesic, "antipodal endpoints");
  }
  const S d = distance(p, q, tol);
  if (!(s >= -tol * d && s <= d * (S(1) + tol)))
    throw Error(Errc::OutOfRange, "arc length outside [0, distance]");
  s = std::clamp(s, S(0), d);
  if (d == 0 || s == 0) return p;
  if (s == d) return q;
  if (k == 0) {
    ModelPoint<S> r = p;
    r.x.template head<2>() += (s / d) * (q.x.template head<2>() - p.x.template head<2>());
    return r;
  }
  const S R = detail::radius(k);
  const S t = s / R;
  if (k > 0) {
    const Vec3<S> u = p.x.normalized(), v = q.x.normalized();
    Vec3<S> w = v - u.dot(v) * u;
    w.normalize();
    return {k, R * (cos(t) * u + sin(t) * w)};
  }
  const Vec3<S> u = p.x / R, v = q.x / R;
  Vec3<S> w = v + detail::mink(u, v) * u;
  w /= sqrt(detail::mink(w, w));
  return {k, R * (cosh(t) * u + sinh(t) * w)};
}

template <class S>
ModelPoint<S> geodesic_midpoint(const ModelPoint<S>& p, const ModelPoint<S>& q) {
  return point_on_geodesic(p, q, distance(p, q) / S(2));
}

// Angle at b between the geodesics b->a and b->c.
template <class S>
S angle_at(const ModelPoint<S>& a, const ModelPoint<S>& b, const ModelPoint<S>& c,
           S tol = S(kDefaultTol)) {
  using std::atan2, std::sqrt, std::max, std::abs;
  detail::same_kappa(a, b);
  detail::same_kappa(c, b);
  S da, dc;
  try {
    da = distance(b, a, tol);
    dc = distance(b, c, tol);
  } catch (const Error&) {
    throw Error(Errc::DegeneratePoints, "no unique geodesic from the base point");
  }
  const S scale = max(da, dc);
  if (!(scale > 0) || da <= tol * scale || dc <= tol * scale)
    throw Error(Errc::DegeneratePoints, "base point coincides with an endpoint");
  const S k = b.kappa;
  if (k == 0) {
    const Vec2<S> u = a.x.template head<2>() - b.x.template head<2>();
    const Vec2<S> v = c.x.template head<2>() - b.x.template head<2>();
    return atan2(abs(u[0] * v[1] - u[1] * v[0]), u.dot(v));
  }
  const S bb = detail::form(k, b.x, b.x);
  const Vec3<S> ta = a.x - (detail::form(k, a.x, b.x) / bb) * b.x;
  const Vec3<S> tc = c.x - (detail::form(k, c.x, b.x) / bb) * b.x;
  if (k > 0) return atan2(ta.cross(tc).norm(), ta.dot(tc));
  const S aa = detail::mink(ta, ta), cc = detail::mink(tc, tc), ac = detail::mink(ta, tc);
  return atan2(sqrt(max(S(0), aa * cc - ac * ac)), ac);
}

// Angles (alpha, beta, gamma) opposite the sides (a, b, c) of the triangle with
// those side lengths, via the half-angle form of the cosine law.
template <class S>
std::array<S, 3> solve_triangle(S kappa, S a, S b, S c) {
  using std::atan2, std::sqrt, std::isfinite;
  const bool ok = isfinite(a) && isfinite(b) && isfinite(c) && a > 0 && b > 0 && c > 0 &&
                  a < b + c && b < a + c && c < a + b;
  if (!ok) throw Error(Errc::InvalidSides, "side lengths violate the strict triangle inequality");
  if (kappa > 0 && !(a + b + c < S(2) * std::numbers::pi_v<S> / sqrt(kappa)))
    throw Error(Errc::InvalidSides, "perimeter not below 2*pi/sqrt(kappa)");
  const S s = (a + b + c) / S(2);
  const S fs = detail::sfun(kappa, s), fa = detail::sfun(kappa, s - a), fb = detail::sfun(kappa, s - b),
          fc = detail::sfun(kappa, s - c);
  return {S(2) * atan2(sqrt(fb * fc), sqrt(fs * fa)), S(2) * atan2(sqrt(fa * fc), sqrt(fs * fb)),
          S(2) * atan2(sqrt(fa * fb), sqrt(fs * fc))};
}

// Area from side lengths: L'Huilier for curved planes, Heron otherwise.
template <class S>
S triangle_area(S kappa, S a, S b, S c) {
  using std::atan, std::sqrt, std::tan, std::tanh, std::abs, std::max;
  const S s = (a + b + c) / S(2);
  if (kappa == 0) {
    std::array<S, 3> x{a, b, c};
    std::sort(x.begin(), x.end());
    const S p = (x[2] + (x[1] + x[0])) * (x[0] - (x[2] - x[1])) * (x[0] + (x[2] - x[1])) *
                (x[2] + (x[1] - x[0]));
    return sqrt(max(S(0), p)) / S(4);
  }
  const S k = sqrt(abs(kappa));
  auto f = [&](S x) { return kappa > 0 ? tan(k * x / S(2)) : tanh(k * x / S(2)); };
  const S e = S(4) * atan(sqrt(max(S(0), f(s) * f(s - a) * f(s - b) * f(s - c))));
  return e / abs(kappa);
}

// Lengths of the edges v0v1, v1v2, v2v0.
template <class S>
std::array<S, 3> edge_lengths(const GeodesicTriangle<S>& t) {
  return {distance(t.v[0], t.v[1]), distance(t.v[1], t.v[2]), distance(t.v[2], t.v[0])};
}

template <class S>
S triangle_area(const GeodesicTriangle<S>& t) {
  const auto e = edge_lengths(t);
  return triangle_area(t.kappa, e[1], e[2], e[0]);
}

template <class S>
GeodesicTriangle<S> make_triangle(const ModelPoint<S>& p0, const ModelPoint<S>& p1,
                                  const ModelPoint<S>& p2) {
  detail::same_kappa(p0, p1);
  detail::same_kappa(p0, p2);
  GeodesicTriangle<S> t{p0.kappa, {p0, p1, p2}};
  const auto e = edge_lengths(t);
  try {
    solve_triangle(t.kappa, e[1], e[2], e[0]);
  } catch (const Error&) {
    throw Error(Errc::DegenerateTriangle, "vertices do not span a valid geodesic triangle");
  }
  return t;
}

template <class S>
PlanarTriangle<S> comparison_from_lengths(S e01, S e12, S e20) {
  using std::cos, std::sin;
  std::array<S, 3> ang;
  try {
    ang = solve_triangle(S(0), e12, e20, e01);
  } catch (const Error&) {
    throw Error(Errc::DegenerateTriangle, "side lengths admit no planar triangle");
  }
  PlanarTriangle<S> p;
  p.v[0] = Vec2<S>::Zero();
  p.v[1] = Vec2<S>(e01, S(0));
  p.v[2] = Vec2<S>(e20 * cos(ang[0]), e20 * sin(ang[0]));
  return p;
}

template <class S>
PlanarTriangle<S> comparison_triangle(const GeodesicTriangle<S>& t) {
  const auto e = edge_lengths(t);
  return comparison_from_lengths(e[0], e[1], e[2]);
}

template <class S>
Isometry<S> Isometry<S>::inverse() const {
  Isometry r{kappa, m};
  if (kappa > 0) {
    r.m = m.transpose();
  } else if (kappa < 0) {
    const Mat3<S> J = Vec3<S>(S(1), S(1), S(-1)).asDiagonal();
    r.m = J * m.transpose() * J;
  } else {
    const Mat2<S> rt = m.template topLeftCorner<2, 2>().transpose();
    r.m.setIdentity();
    r.m.template topLeftCorner<2, 2>() = rt;
    r.m.template topRightCorner<2, 1>() = -(rt * m.template topRightCorner<2, 1>());
  }
  return r;
}

// Isometry taking the circumcenter of t to the pole/apex (the origin if kappa = 0).
template <class S>
Isometry<S> circumcenter_isometry(const GeodesicTriangle<S>& t, S tol = S(kDefaultTol)) {
  using std::atan2, std::hypot, std::asinh, std::sqrt, std::abs;
  const S k = t.kappa;
  Isometry<S> iso{k, Mat3<S>::Identity()};
  if (k == 0) {
    const Vec2<S> a = t.v[0].x.template head<2>(), b = t.v[1].x.template head<2>(),
                  c = t.v[2].x.template head<2>();
    const Vec2<S> ab = b - a, ac = c - a;
    const S d = S(2) * (ab[0] * ac[1] - ab[1] * ac[0]);
    const S scale = std::max(ab.squaredNorm(), ac.squaredNorm());
    if (!(abs(d) > tol * scale)) throw Error(Errc::CircumcenterUndefined, "collinear vertices");
    const Vec2<S> off((ac[1] * ab.squaredNorm() - ab[1] * ac.squaredNorm()) / d,
                      (ab[0] * ac.squaredNorm() - ac[0] * ab.squaredNorm()) / d);
    iso.m.template topRightCorner<2, 1>() = -(a + off);
    return iso;
  }
  const S R = detail::radius(k);
  Vec3<S> n = (t.v[1].x - t.v[0].x).cross(t.v[2].x - t.v[0].x);
  const S scale = std::max((t.v[1].x - t.v[0].x).squaredNorm(), (t.v[2].x - t.v[0].x).squaredNorm());
  if (!(n.norm() > tol * scale)) throw Error(Errc::CircumcenterUndefined, "degenerate triangle");
  if (k > 0) {
    if (n.dot(t.v[0].x + t.v[1].x + t.v[2].x) < 0) n = -n;
    n.normalize();
    if (!(n.dot(t.v[0].x) / R > tol))
      throw Error(Errc::CircumcenterUndefined, "circumradius not below a quarter great circle");
    const S theta = atan2(hypot(n[0], n[1]), n[2]);
    const S phi = atan2(n[1], n[0]);
    iso.m = detail::rot_y(-theta) * detail::rot_z(-phi);
    return iso;
  }
  n[2] = -n[2];
  const S nn = detail::mink(n, n);
  if (!(-nn > tol * n.squaredNorm()))
    throw Error(Errc::CircumcenterUndefined, "vertices lie on no common circle");
  if (n[2] < 0) n = -n;
  n /= sqrt(-nn);
  const S eta = asinh(hypot(n[0], n[1]));
  const S phi = atan2(n[1], n[0]);
  iso.m = detail::boost_x(-eta) * detail::rot_z(-phi);
  return iso;
}

// Gnomonic (kappa > 0) or Klein (kappa < 0) projection onto the tangent plane at
// the pole/apex; identity chart for kappa = 0.
template <class S>
Vec2<S> project(S kappa, const ModelPoint<S>& p, S tol = S(kDefaultTol)) {
  if (p.kappa != kappa) throw Error(Errc::CurvatureMismatch, "projection of a foreign point");
  if (kappa == 0) return p.x.template head<2>();
  const S R = detail::radius(kappa);
  if (kappa > 0 && !(p.x[2] > tol * R))
    throw Error(Errc::OutsideHemisphere, "point not in the open hemisphere of the pole");
  return Vec2<S>(R * p.x[0] / p.x[2], R * p.x[1] / p.x[2]);
}

template <class S>
ModelPoint<S> unproject(S kappa, const Vec2<S>& X) {
  using std::sqrt;
  if (kappa == 0) return plane_point<S>(X[0], X[1]);
  const S R = detail::radius(kappa);
  const Vec3<S> v(X[0], X[1], R);
  if (kappa > 0) return {kappa, (R / v.norm()) * v};
  const S q = R * R - X.squaredNorm();
  if (!(q > 0)) throw Error(Errc::OutsideHemisphere, "point outside the Klein disc");
  return {kappa, (R / sqrt(q)) * v};
}

template <class S>
AffineMap<S> affine_fit(const PlanarTriangle<S>& src, const PlanarTriangle<S>& dst,
                        S tol = S(kDefaultTol)) {
  using std::abs;
  Mat2<S> ms, md;
  ms.col(0) = src.v[1] - src.v[0];
  ms.col(1) = src.v[2] - src.v[0];
  md.col(0) = dst.v[1] - dst.v[0];
  md.col(1) = dst.v[2] - dst.v[0];
  const S scale_s = std::max(ms.col(0).squaredNorm(), ms.col(1).squaredNorm());
  const S scale_d = std::max(md.col(0).squaredNorm(), md.col(1).squaredNorm());
  if (!(abs(ms.determinant()) > tol * scale_s) || !(abs(md.determinant()) > tol * scale_d))
    throw Error(Errc::DegenerateTriangle, "affine fit of a degenerate triangle");
  AffineMap<S> f;
  f.linear = md * ms.inverse();
  f.offset = dst.v[0] - f.linear * src.v[0];
  return f;
}

template <class S>
Vec2<S> GeodesicChart<S>::forward(const ModelPoint<S>& p) const {
  return psi(project(kappa, tau(p)));
}

template <class S>
ModelPoint<S> GeodesicChart<S>::inverse(const Vec2<S>& x) const {
  return tau.inverse()(unproject(kappa, psi.inverse()(x)));
}

// phi_t = psi o pi o tau, sending t onto the given planar triangle (by default
// its comparison triangle).
template <class S>
GeodesicChart<S> chart_for(const GeodesicTriangle<S>& t, const PlanarTriangle<S>& target) {
  GeodesicChart<S> c;
  c.kappa = t.kappa;
  c.tau = t.kappa == 0 ? Isometry<S>{S(0), Mat3<S>::Identity()} : circumcenter_isometry(t);
  PlanarTriangle<S> src;
  for (int i = 0; i < 3; ++i) src.v[i] = project(t.kappa, c.tau(t.v[i]));
  c.psi = affine_fit(src, target);
  return c;
}

template <class S>
GeodesicChart<S> chart_for(const GeodesicTriangle<S>& t) {
  return chart_for(t, comparison_triangle(t));
}

// Closed-form distance-ratio expression; not a valid lower bound for kappa > 0.
template <class S>
S closed_form_metric_bracket(S kappa, S eps) {
  const S q = S(1) + kappa * eps * eps;
  return S(1) / q + eps * eps / (q * q);
}

// Bracket [lo, hi] for d(p,q) / |pi(p) pi(q)| over p, q in B(P, eps).
template <class S>
std::pair<S, S> metric_ratio_bounds(S kappa, S eps) {
  using std::cos, std::sqrt, std::isfinite;
  if (kappa == 0) throw Error(Errc::InvalidEps, "bracket undefined for the Euclidean plane");
  if (!(eps > 0) || !isfinite(eps)) throw Error(Errc::InvalidEps, "eps must be positive");
  if (!(S(1) + kappa * eps * eps > 0)) throw Error(Errc::InvalidEps, "1 + kappa*eps^2 must be positive");
  if (kappa < 0) return {S(1), closed_form_metric_bracket(kappa, eps)};
  if (!(sqrt(kappa) * eps < std::numbers::pi_v<S> / S(2)))
    throw Error(Errc::InvalidEps, "ball leaves the open hemisphere");
  const S c = cos(sqrt(kappa) * eps);
  return {c * c, S(1)};
}

using Point = ModelPoint<double>;
using Triangle = GeodesicTriangle<double>;
using PlanarTri = PlanarTriangle<double>;
using Chart = GeodesicChart<double>;
using Vec2d = Vec2<double>;
using Vec3d = Vec3<double>;

}  // namespace kmesh
