#include "spmap/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "spmap/errors.hpp"
#include "spmap/util.hpp"

namespace spmap {
namespace {

std::string lower_ext(const std::string& path) {
  std::size_t dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

// Resolves an OBJ index (1-based, negative counts from the end).
std::uint32_t resolve_obj_index(long long idx, std::size_t nverts,
                                const std::string& path) {
  long long v = idx > 0 ? idx - 1 : static_cast<long long>(nverts) + idx;
  if (v < 0 || v >= static_cast<long long>(nverts)) {
    throw ParseError(path + ": face index " + std::to_string(idx) +
                     " out of range for " + std::to_string(nverts) +
                     " vertices");
  }
  return static_cast<std::uint32_t>(v);
}

template <typename T>
T read_le(std::istream& in, const std::string& path) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError(path + ": short read");
  return v;
}

template <typename T>
void write_le(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void fan_triangulate(TriangleMesh& mesh, const std::vector<std::uint32_t>& poly) {
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    mesh.faces.push_back({poly[0], poly[i], poly[i + 1]});
  }
}

}  // namespace

TriangleMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path + ": cannot open");
  TriangleMesh mesh;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::uint32_t> poly;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ss >> v.x >> v.y >> v.z)) {
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": malformed vertex");
      }
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      poly.clear();
      std::string corner;
      while (ss >> corner) {
        // "i", "i/t", "i//n", "i/t/n": the vertex index is the first field.
        std::size_t slash = corner.find('/');
        std::string head = slash == std::string::npos ? corner
                                                      : corner.substr(0, slash);
        long long idx = 0;
        try {
          idx = std::stoll(head);
        } catch (const std::exception&) {
          throw ParseError(path + ":" + std::to_string(lineno) +
                           ": malformed face corner '" + corner + "'");
        }
        poly.push_back(resolve_obj_index(idx, mesh.vertices.size(), path));
      }
      if (poly.size() < 3) {
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": face with fewer than 3 corners");
      }
      fan_triangulate(mesh, poly);
    }
    // vt, vn, usemtl, o, g, s, mtllib: ignored.
  }
  return mesh;
}

void save_obj(const std::string& path, const TriangleMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw IoError(path + ": cannot open for write");
  for (const Vec3& v : mesh.vertices) {
    out << "v " << format_double(v.x) << ' ' << format_double(v.y) << ' '
        << format_double(v.z) << '\n';
  }
  for (const auto& f : mesh.faces) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
  if (!out) throw IoError(path + ": write failed");
}

TriangleMesh load_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line) || (line != "ply" && line != "ply\r")) {
    throw BadMagic(path + ": not a PLY file");
  }

  struct Prop {
    std::string type;
    std::string name;
    bool is_list = false;
    std::string count_type, index_type;
  };
  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<Prop> props;
  };
  std::vector<Element> elements;
  bool binary_le = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "comment") continue;
    if (tag == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt != "binary_little_endian") {
        throw ParseError(path + ": unsupported PLY format '" + fmt +
                         "' (binary_little_endian only)");
      }
      binary_le = true;
    } else if (tag == "element") {
      Element e;
      ss >> e.name >> e.count;
      elements.push_back(e);
    } else if (tag == "property") {
      if (elements.empty()) throw ParseError(path + ": property before element");
      Prop p;
      ss >> p.type;
      if (p.type == "list") {
        p.is_list = true;
        ss >> p.count_type >> p.index_type >> p.name;
      } else {
        ss >> p.name;
      }
      elements.back().props.push_back(p);
    } else if (tag == "end_header") {
      break;
    } else if (tag.empty()) {
      continue;
    } else {
      throw ParseError(path + ": unknown header line '" + line + "'");
    }
  }
  if (!binary_le) throw ParseError(path + ": missing format line");

  auto scalar_size = [&](const std::string& t) -> std::size_t {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "int32" || t == "uint32" ||
        t == "float" || t == "float32") return 4;
    if (t == "double" || t == "float64") return 8;
    throw ParseError(path + ": unsupported PLY scalar type '" + t + "'");
  };
  auto read_scalar_double = [&](const std::string& t) -> double {
    if (t == "float" || t == "float32") return read_le<float>(in, path);
    if (t == "double" || t == "float64") return read_le<double>(in, path);
    if (t == "char" || t == "int8") return read_le<std::int8_t>(in, path);
    if (t == "uchar" || t == "uint8") return read_le<std::uint8_t>(in, path);
    if (t == "short" || t == "int16") return read_le<std::int16_t>(in, path);
    if (t == "ushort" || t == "uint16") return read_le<std::uint16_t>(in, path);
    if (t == "int" || t == "int32") return read_le<std::int32_t>(in, path);
    if (t == "uint" || t == "uint32") return read_le<std::uint32_t>(in, path);
    throw ParseError(path + ": unsupported PLY scalar type '" + t + "'");
  };
  auto read_scalar_ll = [&](const std::string& t) -> long long {
    return static_cast<long long>(read_scalar_double(t));
  };

  TriangleMesh mesh;
  for (const Element& e : elements) {
    if (e.name == "vertex") {
      int ix = -1, iy = -1, iz = -1;
      for (std::size_t i = 0; i < e.props.size(); ++i) {
        if (e.props[i].is_list) {
          throw ParseError(path + ": list property in vertex element");
        }
        if (e.props[i].name == "x") ix = static_cast<int>(i);
        if (e.props[i].name == "y") iy = static_cast<int>(i);
        if (e.props[i].name == "z") iz = static_cast<int>(i);
      }
      if (ix < 0 || iy < 0 || iz < 0) {
        throw ParseError(path + ": vertex element missing x/y/z");
      }
      mesh.vertices.resize(e.count);
      for (std::size_t v = 0; v < e.count; ++v) {
        for (std::size_t i = 0; i < e.props.size(); ++i) {
          double val = read_scalar_double(e.props[i].type);
          if (static_cast<int>(i) == ix) mesh.vertices[v].x = val;
          if (static_cast<int>(i) == iy) mesh.vertices[v].y = val;
          if (static_cast<int>(i) == iz) mesh.vertices[v].z = val;
        }
      }
    } else if (e.name == "face") {
      std::vector<std::uint32_t> poly;
      for (std::size_t f = 0; f < e.count; ++f) {
        for (const Prop& p : e.props) {
          if (p.is_list && (p.name == "vertex_indices" ||
                            p.name == "vertex_index")) {
            long long n = read_scalar_ll(p.count_type);
            poly.clear();
            for (long long i = 0; i < n; ++i) {
              long long idx = read_scalar_ll(p.index_type);
              if (idx < 0 ||
                  idx >= static_cast<long long>(mesh.vertices.size())) {
                throw ParseError(path + ": face index out of range");
              }
              poly.push_back(static_cast<std::uint32_t>(idx));
            }
            if (poly.size() < 3) {
              throw ParseError(path + ": face with fewer than 3 corners");
            }
            fan_triangulate(mesh, poly);
          } else if (p.is_list) {
            long long n = read_scalar_ll(p.count_type);
            in.ignore(static_cast<std::streamsize>(n) *
                      static_cast<std::streamsize>(scalar_size(p.index_type)));
          } else {
            read_scalar_double(p.type);
          }
        }
      }
    } else {
      // Unknown element: skippable only when it has no list properties.
      std::size_t row = 0;
      for (const Prop& p : e.props) {
        if (p.is_list) {
          throw ParseError(path + ": cannot skip list property in element '" +
                           e.name + "'");
        }
        row += scalar_size(p.type);
      }
      in.ignore(static_cast<std::streamsize>(row * e.count));
    }
  }
  if (!in) throw IoError(path + ": truncated payload");
  return mesh;
}

void save_ply(const std::string& path, const TriangleMesh& mesh) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for write");
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << mesh.vertices.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "element face " << mesh.faces.size() << "\n"
      << "property list uchar int vertex_indices\nend_header\n";
  for (const Vec3& v : mesh.vertices) {
    write_le(out, static_cast<float>(v.x));
    write_le(out, static_cast<float>(v.y));
    write_le(out, static_cast<float>(v.z));
  }
  for (const auto& f : mesh.faces) {
    write_le<std::uint8_t>(out, 3);
    write_le(out, static_cast<std::int32_t>(f[0]));
    write_le(out, static_cast<std::int32_t>(f[1]));
    write_le(out, static_cast<std::int32_t>(f[2]));
  }
  if (!out) throw IoError(path + ": write failed");
}

void save_point_cloud_ply(const std::string& path,
                          const std::vector<Vec3>& points,
                          const std::vector<Vec3>* normals) {
  if (normals && normals->size() != points.size()) {
    throw OutOfRange("point cloud: normals size " +
                     std::to_string(normals->size()) + " != points size " +
                     std::to_string(points.size()));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for write");
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << points.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n";
  if (normals) {
    out << "property float nx\nproperty float ny\nproperty float nz\n";
  }
  out << "element face 0\n"
      << "property list uchar int vertex_indices\nend_header\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    write_le(out, static_cast<float>(points[i].x));
    write_le(out, static_cast<float>(points[i].y));
    write_le(out, static_cast<float>(points[i].z));
    if (normals) {
      write_le(out, static_cast<float>((*normals)[i].x));
      write_le(out, static_cast<float>((*normals)[i].y));
      write_le(out, static_cast<float>((*normals)[i].z));
    }
  }
  if (!out) throw IoError(path + ": write failed");
}

TriangleMesh load_mesh(const std::string& path, std::size_t* dropped) {
  std::string ext = lower_ext(path);
  TriangleMesh mesh;
  if (ext == "obj") {
    mesh = load_obj(path);
  } else if (ext == "ply") {
    mesh = load_ply(path);
  } else {
    throw ParseError(path + ": unsupported mesh extension '." + ext + "'");
  }
  std::size_t n = drop_degenerate_faces(mesh);
  if (dropped) *dropped = n;
  if (mesh.faces.empty()) {
    throw EmptyMesh(path + ": no faces left after validation");
  }
  return mesh;
}

void save_mesh(const std::string& path, const TriangleMesh& mesh) {
  if (mesh.faces.empty()) throw EmptyMesh(path + ": refusing to save no faces");
  std::string ext = lower_ext(path);
  if (ext == "obj") {
    save_obj(path, mesh);
  } else if (ext == "ply") {
    save_ply(path, mesh);
  } else {
    throw ParseError(path + ": unsupported mesh extension '." + ext + "'");
  }
}

}  // namespace spmap
