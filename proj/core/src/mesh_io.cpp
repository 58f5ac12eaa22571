#include "geoflow/mesh_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace geoflow {

namespace {

std::string lower_ext(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

[[noreturn]] void fail(const std::string& path, int line,
                       const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(const std::string& tok, const std::string& path,
                    int line) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    fail(path, line, "expected a number, got '" + tok + "'");
  }
  if (!std::isfinite(v)) fail(path, line, "non-finite coordinate");
  return v;
}

long parse_int(const std::string& tok, const std::string& path, int line) {
  long v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    fail(path, line, "expected an integer, got '" + tok + "'");
  }
  return v;
}

// Reads the next line that carries data; strips comments; tracks numbering.
struct LineReader {
  std::istream& in;
  const std::string& path;
  int line = 0;

  bool next(std::vector<std::string>& tokens) {
    std::string raw;
    while (std::getline(in, raw)) {
      ++line;
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      tokens = split_ws(raw);
      if (!tokens.empty()) return true;
    }
    return false;
  }
};

SurfaceMesh load_off(std::istream& in, const std::string& path) {
  LineReader rd{in, path};
  std::vector<std::string> tok;
  if (!rd.next(tok)) fail(path, rd.line, "empty file");
  std::size_t pos = 0;
  if (tok[pos] != "OFF") fail(path, rd.line, "malformed header: expected OFF");
  ++pos;
  if (pos == tok.size()) {
    if (!rd.next(tok)) fail(path, rd.line, "missing counts line");
    pos = 0;
  }
  if (tok.size() - pos != 3) fail(path, rd.line, "expected 3 counts");
  const long nv = parse_int(tok[pos], path, rd.line);
  const long nf = parse_int(tok[pos + 1], path, rd.line);
  if (nv < 0 || nf < 0) fail(path, rd.line, "negative count");

  std::vector<Vec3> verts;
  verts.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    if (!rd.next(tok)) fail(path, rd.line, "unexpected end of vertex list");
    if (tok.size() != 3) fail(path, rd.line, "expected 3 coordinates");
    verts.emplace_back(parse_double(tok[0], path, rd.line),
                       parse_double(tok[1], path, rd.line),
                       parse_double(tok[2], path, rd.line));
  }
  std::vector<std::array<int, 3>> faces;
  faces.reserve(nf);
  for (long i = 0; i < nf; ++i) {
    if (!rd.next(tok)) fail(path, rd.line, "unexpected end of face list");
    const long cnt = parse_int(tok[0], path, rd.line);
    if (cnt != 3) {
      fail(path, rd.line,
           "non-triangular face (" + std::to_string(cnt) + " vertices)");
    }
    if (tok.size() != 4) fail(path, rd.line, "expected 3 vertex indices");
    std::array<int, 3> f;
    for (int j = 0; j < 3; ++j) {
      const long idx = parse_int(tok[j + 1], path, rd.line);
      if (idx < 0 || idx >= nv) fail(path, rd.line, "vertex index out of range");
      f[j] = static_cast<int>(idx);
    }
    faces.push_back(f);
  }
  return SurfaceMesh(std::move(verts), std::move(faces));
}

SurfaceMesh load_obj(std::istream& in, const std::string& path) {
  LineReader rd{in, path};
  std::vector<std::string> tok;
  std::vector<Vec3> verts;
  std::vector<std::array<int, 3>> faces;
  while (rd.next(tok)) {
    if (tok[0] == "v") {
      if (tok.size() != 4) fail(path, rd.line, "expected v x y z");
      verts.emplace_back(parse_double(tok[1], path, rd.line),
                         parse_double(tok[2], path, rd.line),
                         parse_double(tok[3], path, rd.line));
    } else if (tok[0] == "f") {
      if (tok.size() != 4) {
        fail(path, rd.line, "non-triangular face (" +
                                std::to_string(tok.size() - 1) + " vertices)");
      }
      std::array<int, 3> f;
      for (int j = 0; j < 3; ++j) {
        std::string ref = tok[j + 1];
        const auto slash = ref.find('/');
        if (slash != std::string::npos) ref.resize(slash);
        const long idx = parse_int(ref, path, rd.line);
        if (idx < 1 || idx > static_cast<long>(verts.size())) {
          fail(path, rd.line, "vertex index out of range");
        }
        f[j] = static_cast<int>(idx - 1);
      }
      faces.push_back(f);
    }
    // vn/vt/o/g/s/usemtl/mtllib and friends are irrelevant here
  }
  return SurfaceMesh(std::move(verts), std::move(faces));
}

void write_off(std::FILE* f, const SurfaceMesh& mesh) {
  std::fprintf(f, "OFF\n%d %d 0\n", mesh.n_vertices(), mesh.n_triangles());
  for (const Vec3& p : mesh.vertices()) {
    std::fprintf(f, "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
  }
  for (const auto& t : mesh.triangles()) {
    std::fprintf(f, "3 %d %d %d\n", t[0], t[1], t[2]);
  }
}

void write_obj(std::FILE* f, const SurfaceMesh& mesh) {
  for (const Vec3& p : mesh.vertices()) {
    std::fprintf(f, "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
  }
  for (const auto& t : mesh.triangles()) {
    std::fprintf(f, "f %d %d %d\n", t[0] + 1, t[1] + 1, t[2] + 1);
  }
}

void write_vtk(std::FILE* f, const SurfaceMesh& mesh,
               const VtkPointData* pd) {
  std::fprintf(f, "# vtk DataFile Version 3.0\n");
  std::fprintf(f, "geoflow surface\nASCII\nDATASET UNSTRUCTURED_GRID\n");
  std::fprintf(f, "POINTS %d double\n", mesh.n_vertices());
  for (const Vec3& p : mesh.vertices()) {
    std::fprintf(f, "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
  }
  std::fprintf(f, "CELLS %d %d\n", mesh.n_triangles(),
               4 * mesh.n_triangles());
  for (const auto& t : mesh.triangles()) {
    std::fprintf(f, "3 %d %d %d\n", t[0], t[1], t[2]);
  }
  std::fprintf(f, "CELL_TYPES %d\n", mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) std::fprintf(f, "5\n");

  if (!pd || (pd->scalars.empty() && pd->vectors.empty())) return;
  std::fprintf(f, "POINT_DATA %d\n", mesh.n_vertices());
  for (const auto& [name, field] : pd->scalars) {
    if (static_cast<int>(field->size()) != mesh.n_vertices()) {
      throw std::invalid_argument("save_mesh: point data size mismatch");
    }
    std::fprintf(f, "SCALARS %s double 1\nLOOKUP_TABLE default\n",
                 name.c_str());
    for (double v : *field) std::fprintf(f, "%.17g\n", v);
  }
  for (const auto& [name, field] : pd->vectors) {
    if (static_cast<int>(field->size()) != mesh.n_vertices()) {
      throw std::invalid_argument("save_mesh: point data size mismatch");
    }
    std::fprintf(f, "VECTORS %s double\n", name.c_str());
    for (const Vec3& v : *field) {
      std::fprintf(f, "%.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    }
  }
}

}  // namespace

SurfaceMesh load_mesh(const std::string& path) {
  const std::string ext = lower_ext(path);
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file: " + path);
  SurfaceMesh mesh = [&] {
    if (ext == "off") return load_off(in, path);
    if (ext == "obj") return load_obj(in, path);
    throw ParseError(path + ": unsupported mesh format '." + ext + "'");
  }();
  if (mesh.n_triangles() > 0 && mesh.min_face_area() <= mesh.epsilon_area()) {
    throw ParseError(path + ": degenerate triangle " +
                     std::to_string(mesh.min_face_triangle()) +
                     " (area <= degeneracy floor)");
  }
  return mesh;
}

void save_mesh(const SurfaceMesh& mesh, const std::string& path,
               const VtkPointData* point_data) {
  if (mesh.n_triangles() == 0) {
    throw std::invalid_argument("save_mesh: refusing to write an empty mesh");
  }
  const std::string ext = lower_ext(path);
  if (ext != "off" && ext != "obj" && ext != "vtk") {
    throw std::invalid_argument("save_mesh: unsupported format '." + ext +
                                "'");
  }
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open for writing: " + path);
  try {
    if (ext == "off") {
      write_off(f, mesh);
    } else if (ext == "obj") {
      write_obj(f, mesh);
    } else {
      write_vtk(f, mesh, point_data);
    }
  } catch (...) {
    std::fclose(f);
    throw;
  }
  if (std::fclose(f) != 0) throw IoError("write failed: " + path);
}

}  // namespace geoflow
