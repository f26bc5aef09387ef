#include "kmesh/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace kmesh {

namespace {

using json = nlohmann::ordered_json;

// ---- emitter -------------------------------------------------------------

std::string number(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s = buf;
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

int depth(const json& j) {
  if (!j.is_structured()) return 0;
  int d = 0;
  for (const auto& v : j) d = std::max(d, depth(v));
  return d + 1;
}

void emit(std::string& out, const json& j, int indent, bool in_array);

void emit_inline(std::string& out, const json& j) {
  switch (j.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ", ";
        first = false;
        out += json(it.key()).dump() + ": ";
        emit_inline(out, it.value());
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      for (size_t i = 0; i < j.size(); ++i) {
        if (i) out += ", ";
        emit_inline(out, j[i]);
      }
      out += ']';
      break;
    }
    case json::value_t::number_float:
      out += number(j.get<double>());
      break;
    default:
      out += j.dump();
  }
}

void emit(std::string& out, const json& j, int indent, bool in_array) {
  const int d = depth(j);
  if (d == 0 || (d == 1 && !j.is_object()) || (d <= 2 && in_array) || j.empty()) {
    emit_inline(out, j);
    return;
  }
  const std::string pad(indent + 2, ' ');
  const bool obj = j.is_object();
  out += obj ? "{\n" : "[\n";
  size_t i = 0;
  for (auto it = j.begin(); it != j.end(); ++it, ++i) {
    out += pad;
    if (obj) out += json(it.key()).dump() + ": ";
    emit(out, it.value(), indent + 2, !obj);
    out += i + 1 < j.size() ? ",\n" : "\n";
  }
  out += std::string(indent, ' ');
  out += obj ? '}' : ']';
}

std::string dump(const json& j) {
  std::string out;
  emit(out, j, 0, false);
  out += '\n';
  return out;
}

json vec(const Vec2d& v) { return json::array({v.x(), v.y()}); }
json vec(const Vec3d& v) { return json::array({v.x(), v.y(), v.z()}); }

// ---- reader --------------------------------------------------------------

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(Errc::ParseError, (path.empty() ? std::string("/") : path) + ": " + what);
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports "parse error at line L, column C: ..."
    std::string msg = e.what();
    if (const auto p = msg.find("parse error"); p != std::string::npos) msg = msg.substr(p);
    throw Error(Errc::ParseError, msg);
  }
}

// Path-tracking view of a JSON value.
struct Node {
  const json& j;
  std::string path;

  bool has(const char* key) const { return j.is_object() && j.contains(key); }

  Node operator[](const std::string& key) const {
    if (!j.is_object()) fail(path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) fail(path + "/" + key, "missing field");
    return {*it, path + "/" + key};
  }
  Node operator[](size_t i) const { return {j[i], path + "/" + std::to_string(i)}; }

  size_t size() const {
    if (!j.is_array()) fail(path, "expected an array");
    return j.size();
  }
  size_t size(size_t n) const {
    if (size() != n) fail(path, "expected " + std::to_string(n) + " entries");
    return n;
  }
  double num() const {
    if (j.is_null()) return std::numeric_limits<double>::infinity();
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
  }
  double finite() const {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
  }
  int integer() const {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
  }
  int index(int n) const {
    const int i = integer();
    if (i < 0 || i >= n) fail(path, "index " + std::to_string(i) + " out of range [0, " + std::to_string(n) + ")");
    return i;
  }
  bool boolean() const {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
  }
  std::string str() const {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
  }
  Vec2d vec2() const {
    size(2);
    return {(*this)[0].finite(), (*this)[1].finite()};
  }
  Vec3d vec3() const {
    size(3);
    return {(*this)[0].finite(), (*this)[1].finite(), (*this)[2].finite()};
  }
};

void check_version(const Node& root) {
  if (!root.j.is_object()) fail("", "expected an object");
  if (root.has("format_version") && root["format_version"].integer() != kFormatVersion)
    fail("/format_version", "unsupported version " + std::to_string(root["format_version"].integer()));
}

void check_type(const Node& root, const char* want) {
  const std::string t = root.has("type") ? root["type"].str() : "complex";
  if (t != want) fail("/type", "expected \"" + std::string(want) + "\", found \"" + t + "\"");
}

// ---- complex -------------------------------------------------------------

json complex_json(const CurvedComplex& c) {
  json cells = json::array();
  for (const CellSpec& s : c.cells) {
    json cell;
    cell["id"] = s.id;
    cell["kappa"] = s.kappa;
    cell["kind"] = s.kind == CellKind::Triangle ? "triangle" : "polygon";
    if (!s.side_lengths.empty()) cell["side_lengths"] = s.side_lengths;
    if (!s.chart_vertices.empty()) {
      json v = json::array();
      for (const Vec2d& p : s.chart_vertices) v.push_back(vec(p));
      cell["chart_vertices"] = v;
    }
    cells.push_back(cell);
  }
  json gluings = json::array();
  for (const Gluing& g : c.gluings) {
    json e;
    e["a"] = json::array({g.a.cell, g.a.edge});
    e["b"] = json::array({g.b.cell, g.b.edge});
    e["orientation"] = g.orientation == Orientation::Preserving ? "preserving" : "reversing";
    gluings.push_back(e);
  }
  json j;
  j["cells"] = cells;
  j["gluings"] = gluings;
  return j;
}

CurvedComplex complex_from(const Node& n) {
  std::vector<CellSpec> cells;
  std::map<int, int> sides;
  const Node cs = n["cells"];
  for (size_t i = 0; i < cs.size(); ++i) {
    const Node c = cs[i];
    CellSpec s;
    s.id = c["id"].integer();
    s.kappa = c["kappa"].finite();
    const std::string kind = c.has("kind") ? c["kind"].str() : "triangle";
    if (kind == "triangle") s.kind = CellKind::Triangle;
    else if (kind == "polygon") s.kind = CellKind::Polygon;
    else fail(c.path + "/kind", "expected \"triangle\" or \"polygon\"");
    if (c.has("side_lengths")) {
      const Node l = c["side_lengths"];
      for (size_t k = 0; k < l.size(); ++k) s.side_lengths.push_back(l[k].finite());
    }
    if (c.has("chart_vertices")) {
      const Node v = c["chart_vertices"];
      for (size_t k = 0; k < v.size(); ++k) s.chart_vertices.push_back(v[k].vec2());
    }
    if (s.side_lengths.empty() && s.chart_vertices.empty()) fail(c.path, "needs side_lengths or chart_vertices");
    if (!sides.emplace(s.id, s.sides()).second) fail(c.path + "/id", "duplicate cell id " + std::to_string(s.id));
    cells.push_back(std::move(s));
  }
  std::vector<Gluing> gluings;
  if (n.has("gluings")) {
    const Node gs = n["gluings"];
    for (size_t i = 0; i < gs.size(); ++i) {
      const Node g = gs[i];
      auto side = [&](const char* key) {
        const Node r = g[key];
        r.size(2);
        SideRef ref{r[0].integer(), 0};
        const auto it = sides.find(ref.cell);
        if (it == sides.end()) fail(r.path + "/0", "unknown cell id " + std::to_string(ref.cell));
        ref.edge = r[1].index(it->second);
        return ref;
      };
      Gluing gl;
      gl.a = side("a");
      gl.b = side("b");
      const std::string o = g.has("orientation") ? g["orientation"].str() : "reversing";
      if (o == "preserving") gl.orientation = Orientation::Preserving;
      else if (o == "reversing") gl.orientation = Orientation::Reversing;
      else fail(g.path + "/orientation", "expected \"preserving\" or \"reversing\"");
      gluings.push_back(gl);
    }
  }
  return make_complex(std::move(cells), std::move(gluings));
}

// ---- mesh ----------------------------------------------------------------

const char* vertex_kind(MeshVertexKind k) {
  switch (k) {
    case MeshVertexKind::Lattice: return "lattice";
    case MeshVertexKind::Edge: return "edge";
    default: return "interior";
  }
}

json quality_json(const QualityReport& q) {
  json j;
  j["pass"] = q.pass();
  j["level"] = q.level;
  j["vertices"] = q.vertices;
  j["triangles"] = q.triangles;
  j["min_angle"] = q.min_angle;
  j["max_angle"] = q.max_angle;
  j["margin"] = q.margin;
  j["required_margin"] = q.required_margin;
  j["acute"] = q.acute;
  j["conformity"] = q.conformity.pass;
  j["coordinates"] = q.coordinates.pass;
  j["tiling"] = q.tiling.pass;
  j["three_on_edge"] = q.three_on_edge;
  j["star"] = q.star;
  j["gauss_bonnet"] = q.gauss_bonnet;
  j["eps"] = q.eps;
  j["eps_over_min_edge"] = q.eps_ratio;
  return j;
}

}  // namespace

DocumentKind document_kind(const std::string& text) {
  const json j = parse_text(text);
  const Node root{j, ""};
  check_version(root);
  const std::string t = root.has("type") ? root["type"].str() : "complex";
  if (t == "complex") return DocumentKind::Complex;
  if (t == "subdivision") return DocumentKind::Subdivision;
  if (t == "mesh") return DocumentKind::Mesh;
  fail("/type", "unknown document type \"" + t + "\"");
}

CurvedComplex parse_complex(const std::string& text) {
  const json j = parse_text(text);
  const Node root{j, ""};
  check_version(root);
  check_type(root, "complex");
  return complex_from(root);
}

std::string write_complex(const CurvedComplex& c) {
  json j;
  j["format_version"] = kFormatVersion;
  j["type"] = "complex";
  const json body = complex_json(c);
  for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
  return dump(j);
}

std::string write_subdivision(const SubdivisionResult& r) {
  const SubdividedComplex& s = r.complex;
  json j;
  j["format_version"] = kFormatVersion;
  j["type"] = "subdivision";
  j["complex"] = complex_json(s.complex);
  j["level"] = s.level;
  std::vector<json> verts(s.vertices.size());
  for (size_t t = 0; t < s.triangles.size(); ++t)
    for (int k = 0; k < 3; ++k) {
      json& v = verts[s.tri_vertex[t][k]];
      if (!v.is_null()) continue;
      const LevelVertex& lv = s.vertices[s.tri_vertex[t][k]];
      v["kind"] = lv.kind == LevelVertexKind::Corner ? "corner" : lv.kind == LevelVertexKind::Edge ? "edge" : "interior";
      v["base"] = lv.base;
      if (lv.kind != LevelVertexKind::Corner) v["index"] = lv.index;
      v["cell"] = s.triangles[t].cell;
      v["x"] = vec(s.points[s.triangles[t].cell][s.triangles[t].p[k]].x);
    }
  j["vertices"] = verts;
  json tris = json::array();
  for (size_t t = 0; t < s.triangles.size(); ++t) {
    json e;
    e["cell"] = s.triangles[t].cell;
    e["v"] = s.tri_vertex[t];
    tris.push_back(e);
  }
  j["triangles"] = tris;
  json stats = json::array();
  for (const LevelStats& row : r.stats.rows) {
    json e;
    e["level"] = row.level;
    e["max_edge"] = row.max_edge;
    e["min_angle"] = row.min_angle;
    e["max_angle"] = row.max_angle;
    stats.push_back(e);
  }
  j["stats"] = stats;
  return dump(j);
}

std::string write_mesh(const MeshDocument& doc) {
  const AcuteTriangulation& m = doc.mesh;
  json j;
  j["format_version"] = kFormatVersion;
  j["type"] = "mesh";
  j["complex"] = complex_json(m.sub.complex);
  j["level"] = m.sub.level;
  j["margin"] = doc.margin;
  json attempts = json::array();
  for (const PipelineAttempt& a : doc.attempts) {
    json e;
    e["level"] = a.level;
    e["refined"] = a.refined;
    e["max_angle"] = a.max_angle;
    e["note"] = a.note;
    attempts.push_back(e);
  }
  j["attempts"] = attempts;
  json summary;
  summary["min_angle"] = m.min_angle;
  summary["max_angle"] = m.max_angle;
  summary["eps"] = m.eps;
  summary["eps_ratio"] = m.eps_ratio;
  summary["cos_perturbation"] = m.cos_perturbation;
  summary["comparability"] = m.comparability;
  summary["star"] = m.star;
  j["merge"] = summary;
  json verts = json::array();
  for (const MeshVertex& v : m.vertices) {
    json e;
    e["kind"] = vertex_kind(v.kind);
    switch (v.kind) {
      case MeshVertexKind::Lattice:
        e["vertex"] = v.level_vertex;
        break;
      case MeshVertexKind::Edge:
        e["edge"] = v.edge;
        e["s"] = v.s;
        break;
      case MeshVertexKind::Interior:
        e["tri"] = v.tri;
        e["xy"] = vec(v.xy);
        break;
    }
    e["cell"] = v.cell;
    e["x"] = vec(v.x.x);
    verts.push_back(e);
  }
  j["vertices"] = verts;
  json tris = json::array();
  for (const MeshTriangle& t : m.triangles) {
    json e;
    e["tri"] = t.tri;
    e["local"] = t.local;
    e["v"] = t.v;
    tris.push_back(e);
  }
  j["triangles"] = tris;
  json snaps = json::array();
  for (const SnapRecord& s : m.snaps) {
    json e;
    e["edge"] = s.edge;
    e["s"] = s.s;
    e["triangles"] = s.triangles;
    e["preimage"] = s.preimage;
    e["distance"] = s.distance;
    snaps.push_back(e);
  }
  j["snaps"] = snaps;
  j["quality"] = quality_json(verify(m, doc.margin));
  return dump(j);
}

MeshDocument parse_mesh(const std::string& text) {
  const json j = parse_text(text);
  const Node root{j, ""};
  check_version(root);
  check_type(root, "mesh");
  MeshDocument doc;
  const CurvedComplex c = complex_from(root["complex"]);
  const ValidationReport rep = validate(c);
  if (!rep.ok()) fail("/complex", rep.issues.front().kind + ": " + rep.issues.front().detail);
  const int level = root["level"].integer();
  if (level < 0 || level > 30) fail("/level", "level out of range");
  AcuteTriangulation& m = doc.mesh;
  m.sub = subdivide(c, level);
  if (root.has("margin")) doc.margin = root["margin"].finite();
  if (root.has("attempts")) {
    const Node as = root["attempts"];
    for (size_t i = 0; i < as.size(); ++i) {
      PipelineAttempt a;
      a.level = as[i]["level"].integer();
      a.refined = as[i]["refined"].boolean();
      a.max_angle = as[i]["max_angle"].finite();
      a.note = as[i]["note"].str();
      doc.attempts.push_back(a);
    }
  }
  if (root.has("merge")) {
    const Node s = root["merge"];
    m.min_angle = s["min_angle"].num();
    m.max_angle = s["max_angle"].finite();
    m.eps = s["eps"].finite();
    m.eps_ratio = s["eps_ratio"].finite();
    m.cos_perturbation = s["cos_perturbation"].finite();
    m.comparability = s["comparability"].finite();
    m.star = s["star"].num();
  }

  const int nlevel_v = static_cast<int>(m.sub.vertices.size());
  const int nedge = static_cast<int>(m.sub.edges.size());
  const int ntri = static_cast<int>(m.sub.triangles.size());
  const int ncell = static_cast<int>(c.cells.size());
  const Node vs = root["vertices"];
  for (size_t i = 0; i < vs.size(); ++i) {
    const Node v = vs[i];
    MeshVertex mv;
    const std::string kind = v["kind"].str();
    if (kind == "lattice") {
      mv.kind = MeshVertexKind::Lattice;
      mv.level_vertex = v["vertex"].index(nlevel_v);
    } else if (kind == "edge") {
      mv.kind = MeshVertexKind::Edge;
      mv.edge = v["edge"].index(nedge);
      mv.s = v["s"].finite();
    } else if (kind == "interior") {
      mv.kind = MeshVertexKind::Interior;
      mv.tri = v["tri"].index(ntri);
      mv.xy = v["xy"].vec2();
    } else {
      fail(v.path + "/kind", "expected \"lattice\", \"edge\" or \"interior\"");
    }
    mv.cell = v["cell"].index(ncell);
    mv.x = Point{c.cells[mv.cell].kappa, v["x"].vec3()};
    m.vertices.push_back(mv);
  }
  const int nv = static_cast<int>(m.vertices.size());
  const Node ts = root["triangles"];
  for (size_t i = 0; i < ts.size(); ++i) {
    const Node t = ts[i];
    MeshTriangle mt;
    mt.tri = t["tri"].index(ntri);
    mt.local = t["local"].integer();
    const Node tv = t["v"];
    tv.size(3);
    for (int k = 0; k < 3; ++k) mt.v[k] = tv[k].index(nv);
    m.triangles.push_back(mt);
  }
  if (root.has("snaps")) {
    const Node ss = root["snaps"];
    for (size_t i = 0; i < ss.size(); ++i) {
      const Node s = ss[i];
      SnapRecord r;
      r.edge = s["edge"].index(nedge);
      r.s = s["s"].finite();
      const Node st = s["triangles"], sp = s["preimage"], sd = s["distance"];
      for (size_t k = 0; k < st.size(); ++k) r.triangles.push_back(st[k].index(ntri));
      for (size_t k = 0; k < sp.size(st.size()); ++k) r.preimage.push_back(sp[k].finite());
      for (size_t k = 0; k < sd.size(st.size()); ++k) r.distance.push_back(sd[k].finite());
      m.snaps.push_back(std::move(r));
    }
  }
  return doc;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ParseError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::ParseError, "cannot write " + path);
  out << text;
  if (!out.flush()) throw Error(Errc::ParseError, "cannot write " + path);
}

}  // namespace kmesh
