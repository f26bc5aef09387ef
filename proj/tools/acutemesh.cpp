#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "kmesh/io.hpp"

using namespace kmesh;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kBadInput = 2, kLevelCap = 3 };

CurvedComplex load_complex(const std::string& path) { return parse_complex(read_file(path)); }

// Polygon cells are cut into triangles before subdivision.
CurvedComplex triangulated(const CurvedComplex& c) {
  for (const CellSpec& s : c.cells)
    if (s.sides() != 3) return dissect_polygons(c).complex;
  return c;
}

void check_valid(const CurvedComplex& c) {
  const ValidationReport rep = validate(c);
  if (!rep.ok()) throw Error(Errc::InvalidComplex, rep.issues.front().kind + ": " + rep.issues.front().detail);
}

void print_attempts(std::ostream& os, const std::vector<PipelineAttempt>& attempts) {
  const auto old = os.precision(17);
  for (const PipelineAttempt& a : attempts) {
    os << "level " << a.level << ": ";
    if (a.refined) os << "max angle " << a.max_angle << ", ";
    os << a.note << "\n";
  }
  os.precision(old);
}

int cmd_validate(const std::string& in) {
  const CurvedComplex c = load_complex(in);
  const ValidationReport rep = validate(c);
  if (rep.ok()) {
    std::cout << "valid: " << c.cells.size() << " cells, " << c.edges.size() << " edge classes, " << c.vertices.size()
              << " vertex classes\n";
    return kOk;
  }
  for (const Issue& i : rep.issues) {
    std::cout << i.kind;
    if (i.cell >= 0) std::cout << " cell " << i.cell;
    if (i.edge >= 0) std::cout << " edge " << i.edge;
    std::cout << ": " << i.detail << "\n";
  }
  std::cout << "invalid: " << rep.issues.size() << " issue(s)\n";
  return kBadInput;
}

int cmd_subdivide(const std::string& in, int levels, double max_edge, const std::string& out, const std::string& stats) {
  const CurvedComplex c = load_complex(in);
  check_valid(c);
  SubdivisionTarget target;
  target.levels = levels;
  target.max_edge = max_edge;
  const SubdivisionResult r = subdivide_to(triangulated(c), target);
  const std::string doc = write_subdivision(r);
  if (out.empty()) std::cout << doc;
  else write_file(out, doc);
  if (!stats.empty()) {
    std::ostringstream os;
    r.stats.write_csv(os);
    write_file(stats, os.str());
  }
  const LevelStats& last = r.stats.rows.back();
  std::cerr << "level " << last.level << ", " << r.complex.triangles.size() << " triangles, max edge " << last.max_edge << "\n";
  return kOk;
}

struct MeshFlags {
  std::string in, out;
  double margin = 0.01;
  double min_angle = AcuteParams{}.min_angle;
  double h = AcuteParams{}.h;
  int level_cap = PipelineParams{}.level_cap;
};

int cmd_mesh(const MeshFlags& f) {
  const CurvedComplex c = load_complex(f.in);
  check_valid(c);
  PipelineParams p;
  p.final_margin = f.margin;
  p.level_cap = f.level_cap;
  p.acute.margin = std::max(AcuteParams{}.margin, f.margin + 0.04);
  p.acute.min_angle = f.min_angle;
  p.acute.h = f.h;
  MeshDocument doc;
  doc.margin = f.margin;
  try {
    PipelineResult r = run_pipeline(triangulated(c), p);
    doc.mesh = std::move(r.mesh);
    doc.attempts = std::move(r.attempts);
  } catch (const PipelineFailure& e) {
    std::cerr << e.what() << "\n";
    print_attempts(std::cerr, e.attempts);
    if (e.best) {
      doc.mesh = *e.best;
      doc.attempts = e.attempts;
      write_file(f.out, write_mesh(doc));
      std::cerr << "best attempt (level " << doc.mesh.sub.level << ", max angle " << doc.mesh.max_angle
                << ") written to " << f.out << "\n";
    }
    return kLevelCap;
  }
  write_file(f.out, write_mesh(doc));
  const QualityReport q = verify(doc.mesh, f.margin);
  print_attempts(std::cout, doc.attempts);
  std::cout << "level " << q.level << ", " << q.vertices << " vertices, " << q.triangles << " triangles, max angle "
            << q.max_angle << ", " << (q.pass() ? "certified" : "verification FAILED") << "\n";
  return q.pass() ? kOk : kVerifyFailed;
}

int cmd_verify(const std::string& in, double margin, const std::string& csv) {
  const MeshDocument doc = parse_mesh(read_file(in));
  QualityReport q;
  try {
    q = verify(doc.mesh, margin > 0 ? margin : doc.margin);
  } catch (const Error& e) {
    std::cout << "verification error: " << e.what() << "\noverall FAIL\n";
    return kVerifyFailed;
  }
  q.write_text(std::cout);
  if (!csv.empty()) {
    std::ostringstream os;
    q.write_csv_header(os);
    q.write_csv_row(os);
    write_file(csv, os.str());
  }
  return q.pass() ? kOk : kVerifyFailed;
}

int cmd_render(const std::string& in, const std::string& out, Projection proj) {
  const std::string text = read_file(in);
  std::ostringstream os;
  switch (document_kind(text)) {
    case DocumentKind::Complex: {
      const CurvedComplex c = parse_complex(text);
      check_valid(c);
      render_svg(os, c, proj);
      break;
    }
    case DocumentKind::Mesh:
      render_svg(os, parse_mesh(text).mesh, proj);
      break;
    default:
      throw Error(Errc::ParseError, "render takes a mesh or complex document");
  }
  write_file(out, os.str());
  return kOk;
}

int cmd_stats(const std::string& in, int levels, const std::string& out) {
  const CurvedComplex c = load_complex(in);
  check_valid(c);
  SubdivisionTarget target;
  target.levels = levels;
  const SubdivisionResult r = subdivide_to(triangulated(c), target);
  std::ostringstream os;
  r.stats.write_csv(os);
  if (out.empty()) std::cout << os.str();
  else write_file(out, os.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acute triangulations of constant curvature triangle complexes"};
  app.require_subcommand(1);

  std::string in, out, stats_out;

  auto* validate_cmd = app.add_subcommand("validate", "Check a complex document");
  validate_cmd->add_option("input", in, "Complex document")->required();

  int levels = -1;
  double max_edge = 0;
  auto* subdivide_cmd = app.add_subcommand("subdivide", "Medial subdivision to a level or edge bound");
  subdivide_cmd->add_option("input", in, "Complex document")->required();
  auto* lv = subdivide_cmd->add_option("--levels", levels, "Number of subdivision levels")->check(CLI::Range(0, 30));
  auto* me = subdivide_cmd->add_option("--max-edge", max_edge, "Subdivide until every edge is at most this long")
                 ->check(CLI::PositiveNumber);
  lv->excludes(me);
  subdivide_cmd->add_option("-o,--output", out, "Subdivision document (default: stdout)");
  subdivide_cmd->add_option("--stats", stats_out, "Convergence table (CSV)");

  MeshFlags mf;
  auto* mesh_cmd = app.add_subcommand("mesh", "Run the full pipeline and write a mesh document");
  mesh_cmd->set_help_flag("--help", "Print this help message and exit");
  mesh_cmd->add_option("input", mf.in, "Complex document")->required();
  mesh_cmd->add_option("-o,--output", mf.out, "Mesh document")->required();
  mesh_cmd->add_option("--margin", mf.margin, "Required acuteness margin (rad)")->capture_default_str()->check(CLI::Range(0.0, 0.5));
  mesh_cmd->add_option("--min-angle", mf.min_angle, "Refiner minimum angle (rad)")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  mesh_cmd->add_option("--h", mf.h, "Edge split ratio")->capture_default_str()->check(CLI::Range(0.01, 1.0));
  mesh_cmd->add_option("--level-cap", mf.level_cap, "Highest subdivision level to try")->capture_default_str()->check(CLI::Range(0, 12));

  double verify_margin = 0;
  std::string csv_out;
  auto* verify_cmd = app.add_subcommand("verify", "Recheck a mesh document");
  verify_cmd->add_option("input", in, "Mesh document")->required();
  verify_cmd->add_option("--margin", verify_margin, "Acuteness margin (default: the document's)")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--csv", csv_out, "Quality report (CSV)");

  Projection proj = Projection::Gnomonic;
  const std::map<std::string, Projection> projections{
      {"gnomonic", Projection::Gnomonic}, {"klein", Projection::Klein}, {"chart", Projection::Chart}};
  auto* render_cmd = app.add_subcommand("render", "Draw a mesh or complex as SVG");
  render_cmd->add_option("input", in, "Mesh or complex document")->required();
  render_cmd->add_option("-o,--output", out, "SVG file")->required();
  render_cmd->add_option("--projection", proj, "gnomonic, klein or chart")
      ->transform(CLI::CheckedTransformer(projections, CLI::ignore_case));

  int stat_levels = 0;
  auto* stats_cmd = app.add_subcommand("stats", "Per-level edge length and angle table");
  stats_cmd->add_option("input", in, "Complex document")->required();
  stats_cmd->add_option("--levels", stat_levels, "Number of levels")->required()->check(CLI::Range(0, 30));
  stats_cmd->add_option("-o,--output", out, "CSV file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  std::cout.precision(17);
  std::cerr.precision(17);
  try {
    if (*validate_cmd) return cmd_validate(in);
    if (*subdivide_cmd) {
      if (levels < 0 && max_edge <= 0) {
        std::cerr << "subdivide: give --levels or --max-edge\n";
        return kBadInput;
      }
      return cmd_subdivide(in, levels, max_edge, out, stats_out);
    }
    if (*mesh_cmd) return cmd_mesh(mf);
    if (*verify_cmd) return cmd_verify(in, verify_margin, csv_out);
    if (*render_cmd) return cmd_render(in, out, proj);
    if (*stats_cmd) return cmd_stats(in, stat_levels, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::LevelCapExceeded ? kLevelCap : kBadInput;
  }
  return kBadInput;
}
