#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kmesh/pullback.hpp"

namespace kmesh {

struct CheckResult {
  bool pass = true;
  std::string detail;  // first failure, empty on success
  double worst = 0;    // largest gap or residual seen
};

struct AngleCheck {
  bool pass = true;
  double min_angle = 0;
  double max_angle = 0;
};

// Planar refinements.
CheckResult conformity_check(const PlanarComplex& c, const PlanarRefinement& r);
AngleCheck acuteness_check(const PlanarComplex& c, const PlanarRefinement& r, double margin);
int three_on_edge_count(const PlanarComplex& c, const PlanarRefinement& r);
CheckResult tiling_check(const PlanarComplex& c, const PlanarRefinement& r);

// Curved triangulations and dissections.
CheckResult conformity_check(const AcuteTriangulation& m);
CheckResult conformity_check(const SubdividedComplex& sub, const CurvedDissection& d);
AngleCheck acuteness_check(const AcuteTriangulation& m, double margin);
CheckResult coordinate_check(const AcuteTriangulation& m);
CheckResult tiling_check(const AcuteTriangulation& m);
int three_on_edge_count(const AcuteTriangulation& m);
double gauss_bonnet_check(const AcuteTriangulation& m);
double star_separation(const AcuteTriangulation& m);

// Max |angle(phi A, phi B, phi C) - angle(A, B, C)| over lattice triples of t
// with `samples` steps per side.
double distortion_probe(const Triangle& t, const Chart& chart, int samples);

struct QualityReport {
  int level = 0;
  std::size_t vertices = 0, triangles = 0;
  double min_angle = 0, max_angle = 0;
  double margin = 0;  // pi/2 - max_angle
  double required_margin = 0;
  bool acute = false;
  CheckResult conformity, coordinates, tiling;
  int three_on_edge = 0;
  double star = 0;
  double gauss_bonnet = 0;
  double eps = 0, eps_ratio = 0;

  bool pass() const;
  void write_text(std::ostream& os) const;
  void write_csv_header(std::ostream& os) const;
  void write_csv_row(std::ostream& os) const;
};

QualityReport verify(const AcuteTriangulation& m, double margin);

}  // namespace kmesh
