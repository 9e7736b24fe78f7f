#ifndef VMORPH_MESH_IO_HPP
#define VMORPH_MESH_IO_HPP

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vmorph/error.hpp"
#include "vmorph/mesh.hpp"

namespace vmorph {

static_assert(std::endian::native == std::endian::little, "binary PLY I/O assumes a little-endian host");

enum class MeshFormat { ply_ascii, ply_binary_le, obj };

inline std::string to_string(MeshFormat f) {
  switch (f) {
    case MeshFormat::ply_ascii: return "ply-ascii";
    case MeshFormat::ply_binary_le: return "ply-binary-le";
    case MeshFormat::obj: return "obj";
  }
  return "?";
}

inline MeshFormat parse_mesh_format(std::string_view s) {
  if (s == "ply-ascii") return MeshFormat::ply_ascii;
  if (s == "ply-binary-le" || s == "ply" || s == "ply-binary") return MeshFormat::ply_binary_le;
  if (s == "obj") return MeshFormat::obj;
  throw InputError("unknown mesh format '" + std::string(s) + "'");
}

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

inline std::optional<PlyType> ply_type(std::string_view s) {
  if (s == "char" || s == "int8") return PlyType::i8;
  if (s == "uchar" || s == "uint8") return PlyType::u8;
  if (s == "short" || s == "int16") return PlyType::i16;
  if (s == "ushort" || s == "uint16") return PlyType::u16;
  if (s == "int" || s == "int32") return PlyType::i32;
  if (s == "uint" || s == "uint32") return PlyType::u32;
  if (s == "float" || s == "float32") return PlyType::f32;
  if (s == "double" || s == "float64") return PlyType::f64;
  return std::nullopt;
}

inline std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::i8: case PlyType::u8: return 1;
    case PlyType::i16: case PlyType::u16: return 2;
    case PlyType::i32: case PlyType::u32: case PlyType::f32: return 4;
    case PlyType::f64: return 8;
  }
  return 0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::f32;
  bool is_list = false;
  PlyType count_type = PlyType::u8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

template <class T>
T read_le(const std::string& buf, std::size_t& pos) {
  if (pos + sizeof(T) > buf.size()) throw ParseError("unexpected end of binary data", pos, true);
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

inline double read_binary_value(const std::string& buf, std::size_t& pos, PlyType t) {
  switch (t) {
    case PlyType::i8: return read_le<std::int8_t>(buf, pos);
    case PlyType::u8: return read_le<std::uint8_t>(buf, pos);
    case PlyType::i16: return read_le<std::int16_t>(buf, pos);
    case PlyType::u16: return read_le<std::uint16_t>(buf, pos);
    case PlyType::i32: return read_le<std::int32_t>(buf, pos);
    case PlyType::u32: return read_le<std::uint32_t>(buf, pos);
    case PlyType::f32: return read_le<float>(buf, pos);
    case PlyType::f64: return read_le<double>(buf, pos);
  }
  return 0.0;
}

inline Index checked_index(double value, std::size_t offset, bool binary) {
  if (!(value >= 0.0) || value != std::floor(value) || value > 4294967295.0)
    throw ParseError("invalid vertex index " + std::to_string(value), offset, binary);
  return static_cast<Index>(value);
}

/// Splits an n-gon into a triangle fan.
inline void push_polygon(std::vector<Face>& faces, const std::vector<Index>& poly, std::size_t offset,
                         bool binary, Diagnostics* diag, bool& warned) {
  if (poly.size() < 3) throw ParseError("face with fewer than 3 vertices", offset, binary);
  if (poly.size() > 3 && !warned) {
    warn(diag, "polygonal faces triangulated as fans");
    warned = true;
  }
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) faces.push_back({poly[0], poly[k], poly[k + 1]});
}

inline TriangleMesh parse_ply(const std::string& buf, Diagnostics* diag) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::string_view {
    if (pos >= buf.size()) throw ParseError("unexpected end of header", line_no + 1, false);
    std::size_t end = buf.find('\n', pos);
    if (end == std::string::npos) end = buf.size();
    std::string_view line(buf.data() + pos, end - pos);
    pos = std::min(end + 1, buf.size());
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  };

  if (next_line() != "ply") throw ParseError("missing 'ply' magic", 1, false);
  bool binary = false;
  bool have_format = false;
  std::vector<PlyElement> elements;
  for (;;) {
    const std::string_view line = next_line();
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() != 3) throw ParseError("malformed format line", line_no, false);
      if (tok[1] == "ascii") binary = false;
      else if (tok[1] == "binary_little_endian") binary = true;
      else throw ParseError("unsupported PLY encoding '" + std::string(tok[1]) + "'", line_no, false);
      have_format = true;
    } else if (tok[0] == "element") {
      std::size_t count = 0;
      if (tok.size() != 3 || !parse_number(tok[2], count)) throw ParseError("malformed element line", line_no, false);
      elements.push_back({std::string(tok[1]), count, {}});
    } else if (tok[0] == "property") {
      if (elements.empty()) throw ParseError("property before element", line_no, false);
      PlyProperty prop;
      if (tok.size() == 5 && tok[1] == "list") {
        auto ct = ply_type(tok[2]);
        auto it = ply_type(tok[3]);
        if (!ct || !it) throw ParseError("unknown list property type", line_no, false);
        prop = {std::string(tok[4]), *it, true, *ct};
      } else if (tok.size() == 3) {
        auto t = ply_type(tok[1]);
        if (!t) throw ParseError("unknown property type '" + std::string(tok[1]) + "'", line_no, false);
        prop = {std::string(tok[2]), *t, false, PlyType::u8};
      } else {
        throw ParseError("malformed property line", line_no, false);
      }
      elements.back().properties.push_back(prop);
    } else {
      throw ParseError("unexpected header keyword '" + std::string(tok[0]) + "'", line_no, false);
    }
  }
  if (!have_format) throw ParseError("missing format line", line_no, false);

  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  bool fan_warned = false;
  bool saw_vertex = false;

  for (const PlyElement& el : elements) {
    const bool is_vertex = el.name == "vertex";
    const bool is_face = el.name == "face";
    int ix = -1, iy = -1, iz = -1, ilist = -1;
    for (int k = 0; k < static_cast<int>(el.properties.size()); ++k) {
      const auto& p = el.properties[static_cast<std::size_t>(k)];
      if (p.name == "x") ix = k;
      if (p.name == "y") iy = k;
      if (p.name == "z") iz = k;
      if (p.is_list && (p.name == "vertex_indices" || p.name == "vertex_index")) ilist = k;
    }
    if (is_vertex) {
      if (ix < 0 || iy < 0 || iz < 0) throw ParseError("vertex element lacks x/y/z", line_no, false);
      saw_vertex = true;
      vertices.reserve(el.count);
    }
    if (is_face && ilist < 0) throw ParseError("face element lacks vertex_indices", line_no, false);
    if (!is_vertex && !is_face) warn(diag, "PLY element '" + el.name + "' ignored");

    std::vector<Index> poly;
    for (std::size_t r = 0; r < el.count; ++r) {
      Vec3 p = Vec3::Zero();
      poly.clear();
      const std::size_t record_start = binary ? pos : line_no + 1;
      std::vector<std::string_view> tok;
      std::size_t t = 0;
      if (!binary) {
        tok = split_ws(next_line());
      }
      auto ascii_value = [&](void) -> double {
        if (t >= tok.size()) throw ParseError("too few values in record", line_no, false);
        double v = 0.0;
        if (!parse_number(tok[t], v)) throw ParseError("malformed number '" + std::string(tok[t]) + "'", line_no, false);
        ++t;
        return v;
      };
      for (int k = 0; k < static_cast<int>(el.properties.size()); ++k) {
        const auto& prop = el.properties[static_cast<std::size_t>(k)];
        if (prop.is_list) {
          const std::size_t at = binary ? pos : line_no;
          const double n = binary ? read_binary_value(buf, pos, prop.count_type) : ascii_value();
          const std::size_t count = checked_index(n, at, binary);
          for (std::size_t c = 0; c < count; ++c) {
            const std::size_t vat = binary ? pos : line_no;
            const double v = binary ? read_binary_value(buf, pos, prop.type) : ascii_value();
            if (k == ilist) poly.push_back(checked_index(v, vat, binary));
          }
        } else {
          const double v = binary ? read_binary_value(buf, pos, prop.type) : ascii_value();
          if (k == ix) p.x() = v;
          if (k == iy) p.y() = v;
          if (k == iz) p.z() = v;
        }
      }
      if (!binary && t != tok.size()) throw ParseError("trailing values in record", line_no, false);
      if (is_vertex) vertices.push_back(p);
      if (is_face) push_polygon(faces, poly, record_start, binary, diag, fan_warned);
    }
  }
  if (!saw_vertex) throw ParseError("no vertex element", line_no, false);
  return TriangleMesh(std::move(vertices), std::move(faces));
}

inline TriangleMesh parse_obj(const std::string& buf, Diagnostics* diag) {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::map<std::string, std::size_t> ignored;
  bool fan_warned = false;
  std::size_t pos = 0, line_no = 0;
  std::vector<Index> poly;
  while (pos < buf.size()) {
    std::size_t end = buf.find('\n', pos);
    if (end == std::string::npos) end = buf.size();
    std::string_view line(buf.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "v") {
      if (tok.size() < 4) throw ParseError("vertex record needs 3 coordinates", line_no, false);
      Vec3 p;
      for (int k = 0; k < 3; ++k)
        if (!parse_number(tok[static_cast<std::size_t>(k + 1)], p[k]))
          throw ParseError("malformed coordinate '" + std::string(tok[static_cast<std::size_t>(k + 1)]) + "'", line_no, false);
      vertices.push_back(p);
    } else if (tok[0] == "f") {
      poly.clear();
      for (std::size_t k = 1; k < tok.size(); ++k) {
        std::string_view ref = tok[k].substr(0, tok[k].find('/'));
        long idx = 0;
        if (!parse_number(ref, idx)) throw ParseError("malformed face index '" + std::string(tok[k]) + "'", line_no, false);
        if (idx == 0) throw ParseError("face index 0 (OBJ indices are 1-based)", line_no, false);
        const long resolved = idx > 0 ? idx - 1 : static_cast<long>(vertices.size()) + idx;
        if (resolved < 0 || resolved >= static_cast<long>(vertices.size()))
          throw ParseError("face index " + std::to_string(idx) + " out of range", line_no, false);
        poly.push_back(static_cast<Index>(resolved));
      }
      push_polygon(faces, poly, line_no, false, diag, fan_warned);
    } else {
      ++ignored[std::string(tok[0])];
    }
  }
  for (const auto& [kind, n] : ignored)
    warn(diag, "OBJ record '" + kind + "' ignored (" + std::to_string(n) + " lines)");
  return TriangleMesh(std::move(vertices), std::move(faces));
}

inline void write_file(const std::filesystem::path& path, const std::string& data) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

inline std::string format_g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace detail

/// Infers the format from a file extension (`.obj`, `.ply` = binary).
inline MeshFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".obj" || ext == ".OBJ") return MeshFormat::obj;
  return MeshFormat::ply_binary_le;
}

/// Loads a mesh. PLY files are accepted in either encoding whatever `format`
/// says among the two PLY variants; `scale` multiplies every coordinate.
inline TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format, double scale = 1.0,
                              Diagnostics* diag = nullptr) {
  if (!std::filesystem::exists(path)) throw InputError("no such file: '" + path.string() + "'");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InputError("scale hint must be positive");
  const std::string buf = detail::read_file(path);
  TriangleMesh mesh = format == MeshFormat::obj ? detail::parse_obj(buf, diag) : detail::parse_ply(buf, diag);
  if (auto nm = mesh.non_manifold_edge_count(); nm > 0)
    warn(diag, path.filename().string() + ": " + std::to_string(nm) + " non-manifold edges");
  return scaled(mesh, scale);
}

inline TriangleMesh load_mesh(const std::filesystem::path& path, Diagnostics* diag = nullptr) {
  return load_mesh(path, format_from_path(path), 1.0, diag);
}

inline std::string encode_mesh(const TriangleMesh& mesh, MeshFormat format) {
  std::string out;
  if (format == MeshFormat::obj) {
    out.reserve(mesh.vertex_count() * 40 + mesh.face_count() * 24);
    for (const Vec3& p : mesh.vertices())
      out += "v " + detail::format_g9(p.x()) + " " + detail::format_g9(p.y()) + " " + detail::format_g9(p.z()) + "\n";
    for (const Face& f : mesh.faces())
      out += "f " + std::to_string(f[0] + 1) + " " + std::to_string(f[1] + 1) + " " + std::to_string(f[2] + 1) + "\n";
    return out;
  }
  const bool binary = format == MeshFormat::ply_binary_le;
  out += "ply\nformat ";
  out += binary ? "binary_little_endian" : "ascii";
  out += " 1.0\nelement vertex " + std::to_string(mesh.vertex_count()) +
         "\nproperty float x\nproperty float y\nproperty float z\nelement face " +
         std::to_string(mesh.face_count()) + "\nproperty list uchar int vertex_indices\nend_header\n";
  if (binary) {
    const std::size_t header = out.size();
    out.resize(header + mesh.vertex_count() * 12 + mesh.face_count() * 13);
    char* w = out.data() + header;
    for (const Vec3& p : mesh.vertices())
      for (int k = 0; k < 3; ++k) {
        const float f = static_cast<float>(p[k]);
        std::memcpy(w, &f, 4);
        w += 4;
      }
    for (const Face& f : mesh.faces()) {
      *w++ = 3;
      for (int k = 0; k < 3; ++k) {
        const std::int32_t i = static_cast<std::int32_t>(f[static_cast<std::size_t>(k)]);
        std::memcpy(w, &i, 4);
        w += 4;
      }
    }
  } else {
    for (const Vec3& p : mesh.vertices())
      out += detail::format_g9(static_cast<float>(p.x())) + " " + detail::format_g9(static_cast<float>(p.y())) + " " +
             detail::format_g9(static_cast<float>(p.z())) + "\n";
    for (const Face& f : mesh.faces())
      out += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " + std::to_string(f[2]) + "\n";
  }
  return out;
}

inline void save_mesh(const std::filesystem::path& path, const TriangleMesh& mesh, MeshFormat format) {
  detail::write_file(path, encode_mesh(mesh, format));
}

/// Mask file: one decimal index per line; `#` starts a comment.
inline VertexMask load_mask(const std::filesystem::path& path) {
  const std::string buf = detail::read_file(path);
  std::vector<Index> idx;
  std::size_t pos = 0, line_no = 0;
  while (pos < buf.size()) {
    std::size_t end = buf.find('\n', pos);
    if (end == std::string::npos) end = buf.size();
    std::string_view line(buf.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 1) throw ParseError("expected one index per line", line_no, false);
    Index v = 0;
    if (!detail::parse_number(tok[0], v)) throw ParseError("malformed index '" + std::string(tok[0]) + "'", line_no, false);
    idx.push_back(v);
  }
  return VertexMask(std::move(idx));
}

/// Writes indices in the given order (contours keep their cyclic order).
inline void save_index_list(const std::filesystem::path& path, const std::vector<Index>& indices,
                            const std::string& comment = {}) {
  std::string out;
  if (!comment.empty()) out += "# " + comment + "\n";
  for (Index i : indices) out += std::to_string(i) + "\n";
  detail::write_file(path, out);
}

/// Ordered index list in mask-file syntax (duplicates and order preserved).
inline std::vector<Index> load_index_list(const std::filesystem::path& path) {
  const std::string buf = detail::read_file(path);
  std::vector<Index> idx;
  std::size_t pos = 0, line_no = 0;
  while (pos < buf.size()) {
    std::size_t end = buf.find('\n', pos);
    if (end == std::string::npos) end = buf.size();
    std::string_view line(buf.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    Index v = 0;
    if (tok.size() != 1 || !detail::parse_number(tok[0], v)) throw ParseError("malformed index line", line_no, false);
    idx.push_back(v);
  }
  return idx;
}

/// Polylines as `x,y,z` rows, blank line between polylines.
inline std::string encode_polylines_csv(const std::vector<std::vector<Vec3>>& lines) {
  std::string out = "x,y,z\n";
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += "\n";
    for (const Vec3& p : lines[i])
      out += detail::format_g9(p.x()) + "," + detail::format_g9(p.y()) + "," + detail::format_g9(p.z()) + "\n";
  }
  return out;
}

}  // namespace vmorph

#endif  // VMORPH_MESH_IO_HPP
