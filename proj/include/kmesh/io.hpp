#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kmesh/verify.hpp"

namespace kmesh {

inline constexpr int kFormatVersion = 1;

// Documents are JSON text. Doubles are written with 17 significant digits and
// keys in a fixed order, so equal data gives equal bytes.

enum class DocumentKind { Complex, Subdivision, Mesh };

struct MeshDocument {
  AcuteTriangulation mesh;
  double margin = 0.01;  // acuteness margin the quality block is computed with
  std::vector<PipelineAttempt> attempts;
};

// Parse errors carry "line L, column C" for syntax problems and a JSON pointer
// for missing or ill-typed fields.
DocumentKind document_kind(const std::string& text);

CurvedComplex parse_complex(const std::string& text);
std::string write_complex(const CurvedComplex& c);

// The subdivided complex itself is rebuilt from (complex, level) on read.
std::string write_subdivision(const SubdivisionResult& r);

MeshDocument parse_mesh(const std::string& text);
std::string write_mesh(const MeshDocument& doc);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

enum class Projection { Gnomonic, Klein, Chart };

// One panel per base cell. Geodesic edges are drawn as polylines with 64 samples.
void render_svg(std::ostream& os, const CurvedComplex& c, Projection p);
void render_svg(std::ostream& os, const AcuteTriangulation& m, Projection p);

}  // namespace kmesh
