// Copyright 2026 The hsfm Authors
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

#include "hsfm/export.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hsfm {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "binary PLY output assumes a little-endian host");

namespace {

constexpr std::array<std::uint8_t, 3> kPalette[] = {
    {230, 25, 75},  {60, 180, 75},  {0, 130, 200},  {245, 130, 48},
    {145, 30, 180}, {70, 240, 240}, {240, 50, 230}, {210, 245, 60},
    {250, 190, 212}, {0, 128, 128}, {170, 110, 40}, {128, 0, 0}};

std::array<std::uint8_t, 3> PaletteColor(int k) {
  return kPalette[static_cast<std::size_t>(k) % std::size(kPalette)];
}

template <class T>
void Put(std::string* out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out->append(bytes, sizeof(T));
}

}  // namespace

void WritePly(const PlyDocument& doc, const fs::path& path, bool binary) {
  const int n = static_cast<int>(doc.vertices.size());
  for (const PlyVertex& v : doc.vertices) {
    if (!v.position.allFinite()) throw SchemaMismatch("PLY vertex with non-finite position");
  }
  for (const auto& e : doc.edges) {
    if (e[0] < 0 || e[0] >= n || e[1] < 0 || e[1] >= n) {
      throw SchemaMismatch("PLY edge index out of range");
    }
  }
  const char* scalar = doc.double_precision ? "double" : "float";
  std::ostringstream header;
  header << "ply\n"
         << "format " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
         << "comment hsfm export\n"
         << "element vertex " << n << "\n"
         << "property " << scalar << " x\n"
         << "property " << scalar << " y\n"
         << "property " << scalar << " z\n"
         << "property uchar red\n"
         << "property uchar green\n"
         << "property uchar blue\n";
  if (!doc.edges.empty()) {
    header << "element edge " << doc.edges.size() << "\n"
           << "property int vertex1\n"
           << "property int vertex2\n";
  }
  header << "end_header\n";

  std::string body;
  if (binary) {
    for (const PlyVertex& v : doc.vertices) {
      for (int k = 0; k < 3; ++k) {
        if (doc.double_precision) {
          Put<double>(&body, v.position(k));
        } else {
          Put<float>(&body, static_cast<float>(v.position(k)));
        }
      }
      for (std::uint8_t c : v.color) Put<std::uint8_t>(&body, c);
    }
    for (const auto& e : doc.edges) {
      Put<std::int32_t>(&body, e[0]);
      Put<std::int32_t>(&body, e[1]);
    }
  } else {
    std::ostringstream text;
    text.precision(doc.double_precision ? 17 : 9);
    for (const PlyVertex& v : doc.vertices) {
      text << v.position.x() << ' ' << v.position.y() << ' ' << v.position.z() << ' '
           << int(v.color[0]) << ' ' << int(v.color[1]) << ' ' << int(v.color[2]) << '\n';
    }
    for (const auto& e : doc.edges) text << e[0] << ' ' << e[1] << '\n';
    body = text.str();
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  const std::string h = header.str();
  f.write(h.data(), static_cast<std::streamsize>(h.size()));
  f.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!f) throw IoError("write failed for " + path.string());
}

PlyDocument ScenePointCloud(const WorldState& state) {
  PlyDocument doc;
  for (std::size_t c = 0; c < state.cameras.size(); ++c) {
    const Pointmap pm = WorldPointmap(state, state.cameras[c].id);
    for (std::size_t p = 0; p < pm.points.size(); ++p) {
      if (!pm.valid[p] || !pm.points[p].allFinite()) continue;
      doc.vertices.push_back({pm.points[p], PaletteColor(static_cast<int>(c))});
    }
  }
  return doc;
}

PlyDocument SkeletonLines(const WorldState& state, const SkeletonTemplate& tmpl) {
  PlyDocument doc;
  doc.double_precision = true;
  for (std::size_t h = 0; h < state.humans.size(); ++h) {
    const int base = static_cast<int>(doc.vertices.size());
    const Points3 joints = ForwardKinematics(state.humans[h], tmpl);
    for (int j = 0; j < joints.cols(); ++j) {
      doc.vertices.push_back({joints.col(j), PaletteColor(static_cast<int>(h))});
    }
    for (int j = 0; j < tmpl.num_joints(); ++j) {
      if (tmpl.parents[j] >= 0) doc.edges.push_back({base + tmpl.parents[j], base + j});
    }
  }
  return doc;
}

PlyDocument CameraFrusta(const WorldState& state, double depth) {
  PlyDocument doc;
  doc.double_precision = true;
  for (std::size_t c = 0; c < state.cameras.size(); ++c) {
    const CameraModel& cam = state.cameras[c];
    const Intrinsics& k = cam.intrinsics;
    const Vec3 apex = cam.Center(state.alpha);
    const Mat3 rt = cam.rotation.matrix().transpose();
    const int base = static_cast<int>(doc.vertices.size());
    const auto color = PaletteColor(static_cast<int>(c));
    doc.vertices.push_back({apex, color});
    const Vec2 corners[] = {{0.0, 0.0}, {double(k.width), 0.0},
                            {double(k.width), double(k.height)}, {0.0, double(k.height)}};
    for (const Vec2& px : corners) {
      doc.vertices.push_back({apex + rt * (depth * k.Ray(px)), color});
    }
    for (int i = 0; i < 4; ++i) {
      doc.edges.push_back({base, base + 1 + i});
      doc.edges.push_back({base + 1 + i, base + 1 + (i + 1) % 4});
    }
  }
  return doc;
}

void ExportWorld(const WorldState& state, const SkeletonTemplate& tmpl,
                 const fs::path& dir, bool binary) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  WritePly(ScenePointCloud(state), dir / "scene.ply", binary);
  WritePly(SkeletonLines(state, tmpl), dir / "skeletons.ply", binary);
  WritePly(CameraFrusta(state), dir / "cameras.ply", binary);
}

}  // namespace hsfm
