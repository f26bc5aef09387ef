#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>

#include "kmesh/io.hpp"

namespace kmesh {

namespace {

constexpr int kSamples = 64;
constexpr double kPanel = 320;
constexpr double kPad = 16;
constexpr int kColumns = 4;

using Polyline = std::vector<Vec2d>;

struct Panel {
  std::string title;
  std::vector<Polyline> thin, thick;
};

std::string f6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

Polyline sample(const Point& a, const Point& b, const std::function<Vec2d(const Point&)>& map) {
  Polyline out;
  const double len = distance(a, b);
  for (int i = 0; i <= kSamples; ++i) out.push_back(map(i == kSamples ? b : point_on_geodesic(a, b, len * i / kSamples)));
  return out;
}

std::function<Vec2d(const Point&)> projector(const Triangle& cell, Projection p) {
  if (p == Projection::Chart) {
    const Chart ch = chart_for(cell);
    return [ch](const Point& x) { return ch.forward(x); };
  }
  // Centered central projection: gnomonic on the sphere, Klein on the hyperboloid.
  const Isometry<double> tau = cell.kappa == 0 ? Isometry<double>{} : circumcenter_isometry(cell);
  return [tau](const Point& x) { return project(x.kappa, tau(x)); };
}

void write_svg(std::ostream& os, const std::vector<Panel>& panels) {
  const int cols = std::min<int>(kColumns, std::max<int>(1, static_cast<int>(panels.size())));
  const int rows = (static_cast<int>(panels.size()) + cols - 1) / cols;
  const double w = cols * kPanel, h = rows * (kPanel + 20);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f6(w) << "\" height=\"" << f6(h) << "\" viewBox=\"0 0 "
     << f6(w) << ' ' << f6(h) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (size_t i = 0; i < panels.size(); ++i) {
    const Panel& p = panels[i];
    Vec2d lo = Vec2d::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
    for (const auto* set : {&p.thin, &p.thick})
      for (const Polyline& l : *set)
        for (const Vec2d& q : l) {
          lo = lo.cwiseMin(q);
          hi = hi.cwiseMax(q);
        }
    const double span = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1e-12});
    const double scale = (kPanel - 2 * kPad) / span;
    const double ox = (i % cols) * kPanel + kPad, oy = (i / cols) * (kPanel + 20) + 20 + kPad;
    auto path = [&](const Polyline& l) {
      std::string d;
      for (size_t k = 0; k < l.size(); ++k) {
        d += k ? " L" : "M";
        d += f6(ox + (l[k].x() - lo.x()) * scale) + ' ' + f6(oy + (hi.y() - l[k].y()) * scale);
      }
      return d;
    };
    os << "<g>\n<text x=\"" << f6(ox) << "\" y=\"" << f6(oy - kPad - 4) << "\" font-family=\"sans-serif\" font-size=\"12\">"
       << p.title << "</text>\n";
    for (const Polyline& l : p.thin)
      os << "<path d=\"" << path(l) << "\" fill=\"none\" stroke=\"#4a6fa5\" stroke-width=\"0.6\"/>\n";
    for (const Polyline& l : p.thick)
      os << "<path d=\"" << path(l) << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    os << "</g>\n";
  }
  os << "</svg>\n";
}

std::string title(const CellSpec& c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "cell %d, kappa %g", c.id, c.kappa);
  return buf;
}

}  // namespace

void render_svg(std::ostream& os, const CurvedComplex& input, Projection p) {
  const bool polygons = std::any_of(input.cells.begin(), input.cells.end(), [](const CellSpec& c) { return c.sides() != 3; });
  const Dissection d = polygons ? dissect_polygons(input) : Dissection{input, {}};
  const ChartLayout lay = layout(d.complex);
  std::vector<Panel> panels;
  for (size_t i = 0; i < d.complex.cells.size(); ++i) {
    const Triangle& t = lay.cells[i];
    const auto map = projector(t, p);
    Panel panel;
    panel.title = title(d.complex.cells[i]);
    if (polygons) panel.title += " (piece of cell " + std::to_string(d.source_cell[i]) + ")";
    for (int k = 0; k < 3; ++k) panel.thick.push_back(sample(t.v[k], t.v[(k + 1) % 3], map));
    panels.push_back(std::move(panel));
  }
  write_svg(os, panels);
}

void render_svg(std::ostream& os, const AcuteTriangulation& m, Projection p) {
  const auto& cells = m.sub.complex.cells;
  std::vector<Panel> panels(cells.size());
  std::vector<std::function<Vec2d(const Point&)>> maps;
  for (size_t c = 0; c < cells.size(); ++c) {
    panels[c].title = title(cells[c]) + ", level " + std::to_string(m.sub.level);
    maps.push_back(projector(m.sub.layout.cells[c], p));
  }
  for (size_t i = 0; i < m.triangles.size(); ++i) {
    const int cell = m.sub.triangles[m.triangles[i].tri].cell;
    const auto q = m.corners(static_cast<int>(i));
    for (int k = 0; k < 3; ++k) panels[cell].thin.push_back(sample(q[k], q[(k + 1) % 3], maps[cell]));
  }
  for (size_t c = 0; c < cells.size(); ++c) {
    const Triangle& t = m.sub.layout.cells[c];
    for (int k = 0; k < 3; ++k) panels[c].thick.push_back(sample(t.v[k], t.v[(k + 1) % 3], maps[c]));
  }
  write_svg(os, panels);
}

}  // namespace kmesh
