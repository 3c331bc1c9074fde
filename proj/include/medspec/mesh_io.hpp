#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <string>
#include <vector>

#include "medspec/mesh.hpp"
#include "medspec/text_io.hpp"

namespace medspec {

namespace detail {

inline std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

inline void push_polygon(TriangleMesh& mesh, const std::vector<int>& poly, const LineReader& reader) {
  if (poly.size() < 3) reader.error("face with fewer than 3 vertices");
  for (std::size_t i = 1; i + 1 < poly.size(); ++i)
    mesh.triangles.push_back({poly[0], poly[i], poly[i + 1]});
}

inline TriangleMesh read_off(LineReader& reader) {
  TriangleMesh mesh;
  auto header = split_ws(reader.require("OFF header"));
  if (header.empty() || header[0] != "OFF") reader.error("missing OFF magic");
  std::vector<std::string_view> counts(header.begin() + 1, header.end());
  std::string count_line;
  if (counts.empty()) {
    count_line = reader.require("OFF counts");
    counts = split_ws(count_line);
  }
  if (counts.size() < 2) reader.error("expected vertex and face counts");
  const auto nv = parse_number<long>(counts[0], reader);
  const auto nf = parse_number<long>(counts[1], reader);
  if (nv < 0 || nf < 0) reader.error("negative element count");
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    std::string line = reader.require("vertex");
    auto tok = split_ws(line);
    if (tok.size() < 3) reader.error("vertex needs 3 coordinates");
    mesh.vertices.emplace_back(parse_number<double>(tok[0], reader), parse_number<double>(tok[1], reader),
                               parse_number<double>(tok[2], reader));
  }
  std::vector<int> poly;
  for (long i = 0; i < nf; ++i) {
    std::string line = reader.require("face");
    auto tok = split_ws(line);
    const auto k = parse_number<long>(tok.at(0), reader);
    if (static_cast<long>(tok.size()) < k + 1) reader.error("face shorter than its declared size");
    poly.clear();
    for (long j = 0; j < k; ++j) {
      const int idx = parse_number<int>(tok[j + 1], reader);
      if (idx < 0 || idx >= nv)
        fail(ErrorCode::index_range, reader.path() + ":" + std::to_string(reader.line_number()) +
                                         ": face references vertex " + std::to_string(idx) + " of " +
                                         std::to_string(nv));
      poly.push_back(idx);
    }
    push_polygon(mesh, poly, reader);
  }
  return mesh;
}

inline TriangleMesh read_obj(LineReader& reader) {
  TriangleMesh mesh;
  struct PendingFace {
    std::vector<long> raw;
    int line;
  };
  std::vector<PendingFace> faces;
  std::string line;
  while (reader.next(line)) {
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "v") {
      if (tok.size() < 4) reader.error("vertex needs 3 coordinates");
      mesh.vertices.emplace_back(parse_number<double>(tok[1], reader), parse_number<double>(tok[2], reader),
                                 parse_number<double>(tok[3], reader));
    } else if (tok[0] == "f") {
      PendingFace face{{}, reader.line_number()};
      for (std::size_t j = 1; j < tok.size(); ++j) {
        auto slash = tok[j].find('/');
        auto head = tok[j].substr(0, slash);
        long idx = parse_number<long>(head, reader);
        // Negative indices are relative to the vertices read so far.
        if (idx < 0) idx = static_cast<long>(mesh.vertices.size()) + idx + 1;
        face.raw.push_back(idx);
      }
      faces.push_back(std::move(face));
    }
  }
  std::vector<int> poly;
  const long nv = static_cast<long>(mesh.vertices.size());
  for (const auto& face : faces) {
    poly.clear();
    for (long idx : face.raw) {
      if (idx < 1 || idx > nv)
        fail(ErrorCode::index_range, reader.path() + ":" + std::to_string(face.line) +
                                         ": face references vertex " + std::to_string(idx) + " of " +
                                         std::to_string(nv));
      poly.push_back(static_cast<int>(idx - 1));
    }
    push_polygon(mesh, poly, reader);
  }
  return mesh;
}

inline TriangleMesh read_ply(LineReader& reader) {
  TriangleMesh mesh;
  std::string line;
  if (!reader.next(line, false) || split_ws(line).empty() || split_ws(line)[0] != "ply")
    reader.error("missing ply magic");
  struct Element {
    std::string name;
    long count = 0;
    std::vector<std::string> props;
    bool has_list = false;
  };
  std::vector<Element> elements;
  bool ended = false;
  while (reader.next(line, false)) {
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "format") {
      if (tok.size() < 2 || tok[1] != "ascii") reader.error("only ASCII PLY is supported");
    } else if (tok[0] == "element") {
      if (tok.size() < 3) reader.error("malformed element line");
      elements.push_back({std::string(tok[1]), parse_number<long>(tok[2], reader), {}, false});
    } else if (tok[0] == "property") {
      if (elements.empty()) reader.error("property before element");
      if (tok.size() >= 2 && tok[1] == "list") {
        elements.back().has_list = true;
        elements.back().props.emplace_back(tok.back());
      } else {
        if (tok.size() < 3) reader.error("malformed property line");
        elements.back().props.emplace_back(tok[2]);
      }
    } else if (tok[0] == "end_header") {
      ended = true;
      break;
    }
  }
  if (!ended) reader.error("missing end_header");

  for (const auto& el : elements) {
    if (el.name == "vertex") {
      int ix = -1, iy = -1, iz = -1;
      for (int p = 0; p < static_cast<int>(el.props.size()); ++p) {
        if (el.props[p] == "x") ix = p;
        if (el.props[p] == "y") iy = p;
        if (el.props[p] == "z") iz = p;
      }
      if (ix < 0 || iy < 0 || iz < 0) reader.error("vertex element lacks x/y/z");
      for (int p = 0; p < static_cast<int>(el.props.size()); ++p)
        if (p != ix && p != iy && p != iz) mesh.channels[el.props[p]].reserve(el.count);
      for (long i = 0; i < el.count; ++i) {
        std::string row = reader.require("vertex row");
        auto tok = split_ws(row);
        if (tok.size() < el.props.size()) reader.error("vertex row has too few values");
        Vec3 v(parse_number<double>(tok[ix], reader), parse_number<double>(tok[iy], reader),
               parse_number<double>(tok[iz], reader));
        mesh.vertices.push_back(v);
        for (int p = 0; p < static_cast<int>(el.props.size()); ++p)
          if (p != ix && p != iy && p != iz)
            mesh.channels[el.props[p]].push_back(parse_number<double>(tok[p], reader));
      }
    } else if (el.name == "face") {
      std::vector<int> poly;
      const long nv = static_cast<long>(mesh.vertices.size());
      for (long i = 0; i < el.count; ++i) {
        std::string row = reader.require("face row");
        auto tok = split_ws(row);
        const auto k = parse_number<long>(tok.at(0), reader);
        if (static_cast<long>(tok.size()) < k + 1) reader.error("face shorter than its declared size");
        poly.clear();
        for (long j = 0; j < k; ++j) {
          const int idx = parse_number<int>(tok[j + 1], reader);
          if (idx < 0 || idx >= nv)
            fail(ErrorCode::index_range, reader.path() + ":" + std::to_string(reader.line_number()) +
                                             ": face references vertex " + std::to_string(idx) + " of " +
                                             std::to_string(nv));
          poly.push_back(idx);
        }
        push_polygon(mesh, poly, reader);
      }
    } else {
      for (long i = 0; i < el.count; ++i) reader.require("element row");
    }
  }
  return mesh;
}

}  // namespace detail

/// Reads an ASCII OFF, OBJ, or PLY surface. Degenerate faces are dropped;
/// vertex order is kept as in the file.
inline TriangleMesh load_mesh(const std::filesystem::path& path) {
  LineReader reader(path);
  const std::string ext = detail::lower_extension(path);
  TriangleMesh mesh;
  if (ext == ".off")
    mesh = detail::read_off(reader);
  else if (ext == ".obj")
    mesh = detail::read_obj(reader);
  else if (ext == ".ply")
    mesh = detail::read_ply(reader);
  else
    fail(ErrorCode::format, path.string() + ": unsupported mesh extension '" + ext + "'");
  if (mesh.vertices.empty() || mesh.triangles.empty())
    fail(ErrorCode::empty_input, path.string() + ": mesh has no vertices or faces");
  finalize_mesh(mesh);
  if (mesh.triangles.empty()) fail(ErrorCode::empty_input, path.string() + ": all faces are degenerate");
  return mesh;
}

/// Point cloud: a mesh file (vertices only are used) or a plain `.xyz` table.
inline std::vector<Vec3> load_points(const std::filesystem::path& path) {
  const std::string ext = detail::lower_extension(path);
  if (ext != ".xyz" && ext != ".txt" && ext != ".pts") return load_mesh(path).vertices;
  LineReader reader(path);
  std::vector<Vec3> points;
  std::string line;
  while (reader.next(line)) {
    auto tok = split_ws(line);
    if (tok.size() < 3) reader.error("point row needs 3 coordinates");
    points.emplace_back(parse_number<double>(tok[0], reader), parse_number<double>(tok[1], reader),
                        parse_number<double>(tok[2], reader));
  }
  if (points.empty()) fail(ErrorCode::empty_input, path.string() + ": no points");
  return points;
}

inline void save_points(const std::vector<Vec3>& points, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const auto& p : points) out << format_g9(p.x()) << ' ' << format_g9(p.y()) << ' ' << format_g9(p.z()) << '\n';
}

/// ASCII PLY with one `double` vertex property per channel.
inline void export_mesh_scalars(const TriangleMesh& mesh, const ScalarChannels& channels,
                                const std::filesystem::path& path) {
  for (const auto& [name, values] : channels) {
    if (values.size() != mesh.vertices.size())
      fail(ErrorCode::shape, "channel '" + name + "' has " + std::to_string(values.size()) +
                                 " values for " + std::to_string(mesh.vertices.size()) + " vertices");
    if (name.empty() || name.find_first_of(" \t\n") != std::string::npos)
      fail(ErrorCode::shape, "channel name '" + name + "' is not a valid PLY property name");
  }
  auto out = open_output(path);
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << mesh.vertices.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  for (const auto& [name, values] : channels) out << "property double " << name << "\n";
  out << "element face " << mesh.triangles.size() << "\n";
  out << "property list uchar int vertex_indices\nend_header\n";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3& v = mesh.vertices[i];
    out << format_g9(v.x()) << ' ' << format_g9(v.y()) << ' ' << format_g9(v.z());
    for (const auto& [name, values] : channels) out << ' ' << format_g9(values[i]);
    out << '\n';
  }
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

inline void save_off(const TriangleMesh& mesh, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.triangles.size() << " 0\n";
  for (const auto& v : mesh.vertices)
    out << format_g17(v.x()) << ' ' << format_g17(v.y()) << ' ' << format_g17(v.z()) << '\n';
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace medspec
