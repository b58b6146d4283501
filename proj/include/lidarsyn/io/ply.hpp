// Copyright 2026 The lidarsyn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

// PLY reader/writer for the profile used by every artifact in the pipeline:
//   element vertex N   with properties x, y, z (all float or all double)
//   element face M     with property list uchar int vertex_indices (optional)
// Formats: ascii 1.0 and binary_little_endian 1.0. Other layouts are rejected.
// Coordinates are stored as-is in the left-handed frame (x fwd, y right, z up).

#include <fmt/format.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "lidarsyn/core/error.hpp"
#include "lidarsyn/core/geometry.hpp"

namespace lidarsyn::io {

enum class PlyFormat { kAscii, kBinaryLittleEndian };
enum class PlyScalar { kFloat32, kFloat64 };

struct PlyData {
  std::vector<Point3> vertices;
  std::vector<Triangle> faces;
  bool has_face_element = false;
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  return {std::istream_iterator<std::string>(in), std::istream_iterator<std::string>()};
}

[[noreturn]] inline void parse_error(const std::filesystem::path& path, std::size_t line, const std::string& what) {
  fail(ErrorCode::kParse, fmt::format("{}:{}: {}", path.string(), line, what));
}

inline bool scalar_type(const std::string& name, PlyScalar& out) {
  if (name == "float" || name == "float32") {
    out = PlyScalar::kFloat32;
    return true;
  }
  if (name == "double" || name == "float64") {
    out = PlyScalar::kFloat64;
    return true;
  }
  return false;
}

template <typename T>
T load_le(const char* p) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void store_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace detail

inline PlyData read_ply(const std::filesystem::path& path) {
  using detail::parse_error;
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());

  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line() || line != "ply") parse_error(path, 1, "missing 'ply' magic");

  PlyFormat format = PlyFormat::kAscii;
  bool have_format = false;
  std::size_t vertex_count = 0, face_count = 0;
  bool have_vertex = false;
  PlyData data;
  PlyScalar scalar = PlyScalar::kFloat32;
  std::vector<std::string> vertex_props;
  enum class Current { kNone, kVertex, kFace } current = Current::kNone;
  bool face_prop_seen = false;

  while (true) {
    if (!next_line()) parse_error(path, line_no, "unexpected end of header");
    const auto tok = detail::split_ws(line);
    if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "format") {
      if (tok.size() != 3 || tok[2] != "1.0") parse_error(path, line_no, "bad format line");
      if (tok[1] == "ascii") {
        format = PlyFormat::kAscii;
      } else if (tok[1] == "binary_little_endian") {
        format = PlyFormat::kBinaryLittleEndian;
      } else {
        parse_error(path, line_no, "unsupported format '" + tok[1] + "'");
      }
      have_format = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) parse_error(path, line_no, "bad element line");
      std::size_t count = 0;
      try {
        std::size_t used = 0;
        count = std::stoull(tok[2], &used);
        if (used != tok[2].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        parse_error(path, line_no, "bad element count '" + tok[2] + "'");
      }
      if (tok[1] == "vertex" && !have_vertex && current == Current::kNone) {
        vertex_count = count;
        have_vertex = true;
        current = Current::kVertex;
      } else if (tok[1] == "face" && have_vertex && !data.has_face_element) {
        face_count = count;
        data.has_face_element = true;
        current = Current::kFace;
      } else {
        parse_error(path, line_no, "unsupported element '" + tok[1] + "'");
      }
    } else if (tok[0] == "property") {
      if (current == Current::kVertex) {
        PlyScalar s;
        if (tok.size() != 3 || !detail::scalar_type(tok[1], s)) {
          parse_error(path, line_no, "vertex properties must be float or double x, y, z");
        }
        if (!vertex_props.empty() && s != scalar) parse_error(path, line_no, "mixed vertex property types");
        scalar = s;
        vertex_props.push_back(tok[2]);
      } else if (current == Current::kFace) {
        const bool ok = tok.size() == 5 && tok[1] == "list" && (tok[2] == "uchar" || tok[2] == "uint8") &&
                        (tok[3] == "int" || tok[3] == "int32") && tok[4] == "vertex_indices";
        if (!ok || face_prop_seen) parse_error(path, line_no, "face property must be 'list uchar int vertex_indices'");
        face_prop_seen = true;
      } else {
        parse_error(path, line_no, "property outside of an element");
      }
    } else {
      parse_error(path, line_no, "unknown header keyword '" + tok[0] + "'");
    }
  }
  if (!have_format) parse_error(path, line_no, "missing format line");
  if (!have_vertex) parse_error(path, line_no, "missing vertex element");
  if (vertex_props != std::vector<std::string>{"x", "y", "z"}) {
    parse_error(path, line_no, "vertex properties must be exactly x, y, z");
  }
  if (data.has_face_element && !face_prop_seen) parse_error(path, line_no, "face element without vertex_indices");

  data.vertices.resize(vertex_count);
  data.faces.resize(face_count);

  auto check_face = [&](std::size_t f, long long a, long long b, long long c, std::size_t where) {
    for (long long v : {a, b, c}) {
      if (v < 0 || static_cast<std::size_t>(v) >= vertex_count) {
        parse_error(path, where, fmt::format("face {} references vertex {} of {}", f, v, vertex_count));
      }
    }
    data.faces[f] = {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(c)};
  };

  if (format == PlyFormat::kAscii) {
    for (std::size_t i = 0; i < vertex_count; ++i) {
      if (!next_line()) {
        parse_error(path, line_no, fmt::format("expected {} vertices, found {}", vertex_count, i));
      }
      const auto tok = detail::split_ws(line);
      if (tok.size() != 3) parse_error(path, line_no, "vertex line must hold 3 values");
      for (int k = 0; k < 3; ++k) {
        char* end = nullptr;
        const double v = scalar == PlyScalar::kFloat32 ? static_cast<double>(std::strtof(tok[k].c_str(), &end))
                                                       : std::strtod(tok[k].c_str(), &end);
        if (end != tok[k].c_str() + tok[k].size()) parse_error(path, line_no, "bad number '" + tok[k] + "'");
        data.vertices[i][k] = v;
      }
    }
    for (std::size_t f = 0; f < face_count; ++f) {
      if (!next_line()) parse_error(path, line_no, fmt::format("expected {} faces, found {}", face_count, f));
      const auto tok = detail::split_ws(line);
      if (tok.size() != 4 || tok[0] != "3") parse_error(path, line_no, "only triangle faces are supported");
      try {
        check_face(f, std::stoll(tok[1]), std::stoll(tok[2]), std::stoll(tok[3]), line_no);
      } catch (const std::logic_error&) {
        parse_error(path, line_no, "bad face index");
      }
    }
  } else {
    const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::size_t stride = scalar == PlyScalar::kFloat32 ? 12 : 24;
    const std::size_t vertex_bytes = vertex_count * stride;
    if (body.size() < vertex_bytes) {
      parse_error(path, line_no, fmt::format("expected {} vertices, found {}", vertex_count, body.size() / stride));
    }
    const char* p = body.data();
    for (std::size_t i = 0; i < vertex_count; ++i, p += stride) {
      for (int k = 0; k < 3; ++k) {
        data.vertices[i][k] = scalar == PlyScalar::kFloat32 ? static_cast<double>(detail::load_le<float>(p + 4 * k))
                                                            : detail::load_le<double>(p + 8 * k);
      }
    }
    std::size_t offset = vertex_bytes;
    for (std::size_t f = 0; f < face_count; ++f) {
      if (body.size() < offset + 13) {
        parse_error(path, line_no, fmt::format("expected {} faces, found {}", face_count, f));
      }
      if (static_cast<unsigned char>(body[offset]) != 3) parse_error(path, line_no, "only triangle faces are supported");
      const char* q = body.data() + offset + 1;
      check_face(f, detail::load_le<std::int32_t>(q), detail::load_le<std::int32_t>(q + 4),
                 detail::load_le<std::int32_t>(q + 8), line_no);
      offset += 13;
    }
  }
  for (std::size_t i = 0; i < data.vertices.size(); ++i) {
    if (!is_finite(data.vertices[i])) parse_error(path, line_no, fmt::format("non-finite vertex {}", i));
  }
  return data;
}

inline void write_ply(const std::filesystem::path& path, const std::vector<Point3>& vertices,
                      const std::vector<Triangle>* faces, PlyFormat format, PlyScalar scalar) {
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!is_finite(vertices[i])) fail(ErrorCode::kInvalidInput, fmt::format("non-finite coordinate at point {}", i));
  }
  const char* type = scalar == PlyScalar::kFloat32 ? "float" : "double";
  std::string out;
  out.reserve(128 + vertices.size() * (format == PlyFormat::kAscii ? 40 : 24));
  out += "ply\n";
  out += format == PlyFormat::kAscii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n";
  out += "comment frame: left-handed, x forward, y right, z up, meters\n";
  out += fmt::format("element vertex {}\n", vertices.size());
  out += fmt::format("property {} x\nproperty {} y\nproperty {} z\n", type, type, type);
  if (faces) {
    out += fmt::format("element face {}\n", faces->size());
    out += "property list uchar int vertex_indices\n";
  }
  out += "end_header\n";

  if (format == PlyFormat::kAscii) {
    for (const auto& v : vertices) {
      if (scalar == PlyScalar::kFloat32) {
        out += fmt::format("{} {} {}\n", static_cast<float>(v.x()), static_cast<float>(v.y()), static_cast<float>(v.z()));
      } else {
        out += fmt::format("{} {} {}\n", v.x(), v.y(), v.z());
      }
    }
    if (faces) {
      for (const auto& f : *faces) out += fmt::format("3 {} {} {}\n", f[0], f[1], f[2]);
    }
  } else {
    for (const auto& v : vertices) {
      for (int k = 0; k < 3; ++k) {
        if (scalar == PlyScalar::kFloat32) {
          detail::store_le(out, static_cast<float>(v[k]));
        } else {
          detail::store_le(out, v[k]);
        }
      }
    }
    if (faces) {
      for (const auto& f : *faces) {
        out.push_back(static_cast<char>(3));
        for (auto idx : f) detail::store_le(out, static_cast<std::int32_t>(idx));
      }
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) fail(ErrorCode::kIo, "cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) fail(ErrorCode::kIo, "write failed for " + path.string());
}

inline PointCloud read_cloud(const std::filesystem::path& path) {
  PointCloud cloud;
  cloud.points = read_ply(path).vertices;
  return cloud;
}

inline void write_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                        PlyFormat format = PlyFormat::kBinaryLittleEndian,
                        PlyScalar scalar = PlyScalar::kFloat32) {
  write_ply(path, cloud.points, nullptr, format, scalar);
}

inline TriangleMesh read_mesh(const std::filesystem::path& path) {
  PlyData data = read_ply(path);
  return TriangleMesh{std::move(data.vertices), std::move(data.faces)};
}

inline void write_mesh(const TriangleMesh& mesh, const std::filesystem::path& path,
                       PlyFormat format = PlyFormat::kBinaryLittleEndian,
                       PlyScalar scalar = PlyScalar::kFloat64) {
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    for (auto v : mesh.triangles[i]) {
      if (v >= mesh.vertices.size()) fail(ErrorCode::kInvalidInput, fmt::format("triangle {} index out of range", i));
    }
  }
  write_ply(path, mesh.vertices, &mesh.triangles, format, scalar);
}

}  // namespace lidarsyn::io
