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

#include "hsfm/scene_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace hsfm {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "binary grid files are read and written as native little-endian");

namespace {

constexpr char kMagic[4] = {'H', 'S', 'F', 'M'};

std::string Where(const fs::path& path, std::size_t offset) {
  return path.string() + " @ byte " + std::to_string(offset);
}

void WriteHeader(std::ofstream& out, int width, int height) {
  const std::uint32_t header[3] = {kBinaryVersion,
                                   static_cast<std::uint32_t>(width),
                                   static_cast<std::uint32_t>(height)};
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
}

std::vector<char> ReadAll(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

// Returns the payload offset.
std::size_t ParseHeader(const std::vector<char>& bytes, const fs::path& path,
                        std::size_t record_size, int* width, int* height) {
  if (bytes.size() < 16) throw ParseError("truncated header: " + Where(path, bytes.size()));
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ParseError("bad magic: " + Where(path, 0));
  }
  std::uint32_t header[3];
  std::memcpy(header, bytes.data() + 4, sizeof(header));
  if (header[0] != kBinaryVersion) {
    throw ParseError("unsupported version " + std::to_string(header[0]) + ": " +
                     Where(path, 4));
  }
  *width = static_cast<int>(header[1]);
  *height = static_cast<int>(header[2]);
  const std::size_t expected =
      16 + record_size * static_cast<std::size_t>(*width) * static_cast<std::size_t>(*height);
  if (bytes.size() != expected) {
    throw ParseError("payload size " + std::to_string(bytes.size()) +
                     " != expected " + std::to_string(expected) + ": " +
                     Where(path, std::min(bytes.size(), expected)));
  }
  return 16;
}

std::ofstream OpenOut(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

json Vec3Json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 Vec3FromJson(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ParseError("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json MatJson(const Mat3& m) {
  json a = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
  return a;
}

Mat3 MatFromJson(const json& j) {
  if (!j.is_array() || j.size() != 9) throw ParseError("expected 9 row-major values");
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = j[3 * r + c].get<double>();
  return m;
}

// Runs `fn` and rethrows json errors as ParseError tagged with the file.
template <typename Fn>
auto Parsing(const fs::path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace

// --- Binary grids -------------------------------------------------------------

void WriteDepthFile(const fs::path& path, int width, int height,
                    const std::vector<double>& depth) {
  if (static_cast<int>(depth.size()) != width * height) {
    throw SchemaMismatch("depth size does not match grid");
  }
  std::ofstream out = OpenOut(path, std::ios::binary);
  WriteHeader(out, width, height);
  std::vector<float> buf(depth.size());
  for (std::size_t i = 0; i < depth.size(); ++i) {
    buf[i] = std::isfinite(depth[i]) && depth[i] > 0.0
                 ? static_cast<float>(depth[i])
                 : std::numeric_limits<float>::quiet_NaN();
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<double> ReadDepthFile(const fs::path& path, int* width, int* height) {
  const std::vector<char> bytes = ReadAll(path);
  const std::size_t off = ParseHeader(bytes, path, sizeof(float), width, height);
  const std::size_t n = static_cast<std::size_t>(*width) * *height;
  std::vector<float> buf(n);
  std::memcpy(buf.data(), bytes.data() + off, n * sizeof(float));
  std::vector<double> depth(n);
  for (std::size_t i = 0; i < n; ++i) depth[i] = buf[i];
  return depth;
}

void WritePointmapFile(const fs::path& path, int width, int height,
                       const std::vector<Vec3>& points,
                       const std::vector<double>& confidence) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (points.size() != n || confidence.size() != n) {
    throw SchemaMismatch("pointmap size does not match grid");
  }
  std::ofstream out = OpenOut(path, std::ios::binary);
  WriteHeader(out, width, height);
  std::vector<float> buf(4 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < 3; ++k) buf[4 * i + k] = static_cast<float>(points[i](k));
    buf[4 * i + 3] = static_cast<float>(confidence[i]);
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out) throw IoError("write failed: " + path.string());
}

void ReadPointmapFile(const fs::path& path, int* width, int* height,
                      std::vector<Vec3>* points, std::vector<double>* confidence) {
  const std::vector<char> bytes = ReadAll(path);
  const std::size_t off = ParseHeader(bytes, path, 4 * sizeof(float), width, height);
  const std::size_t n = static_cast<std::size_t>(*width) * *height;
  std::vector<float> buf(4 * n);
  std::memcpy(buf.data(), bytes.data() + off, buf.size() * sizeof(float));
  points->resize(n);
  confidence->resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    (*points)[i] = Vec3(buf[4 * i], buf[4 * i + 1], buf[4 * i + 2]);
    const double q = buf[4 * i + 3];
    if (!(q >= 0.0) || !std::isfinite(q)) {
      throw ParseError("confidence must be finite and non-negative: " +
                       Where(path, off + (4 * i + 3) * sizeof(float)));
    }
    (*confidence)[i] = q;
  }
}

// --- JSON helpers ---------------------------------------------------------------

json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + " @ byte " + std::to_string(e.byte) + ": " +
                     e.what());
  }
}

void WriteJsonFile(const fs::path& path, const json& j) {
  std::ofstream out = OpenOut(path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

json CameraToJson(const CameraModel& cam) {
  const Intrinsics& k = cam.intrinsics;
  return {{"id", cam.id},       {"fx", k.fx},         {"fy", k.fy},
          {"cx", k.cx},         {"cy", k.cy},         {"width", k.width},
          {"height", k.height}, {"R", MatJson(cam.rotation.matrix())},
          {"t", Vec3Json(cam.translation)}};
}

CameraModel CameraFromJson(const json& j) {
  CameraModel cam;
  cam.id = j.at("id").get<int>();
  Intrinsics& k = cam.intrinsics;
  k.fx = j.at("fx").get<double>();
  k.fy = j.at("fy").get<double>();
  k.cx = j.at("cx").get<double>();
  k.cy = j.at("cy").get<double>();
  k.width = j.at("width").get<int>();
  k.height = j.at("height").get<int>();
  if (!(k.fx > 0.0 && k.fy > 0.0)) throw ParseError("focal lengths must be positive");
  cam.rotation = Rotation3(MatFromJson(j.at("R")));
  cam.translation = Vec3FromJson(j.at("t"));
  if (!cam.translation.allFinite()) throw ParseError("non-finite translation");
  return cam;
}

json HumanToJson(const HumanParams& h) {
  json theta = json::array();
  for (const Rotation3& r : h.theta) theta.push_back(Vec3Json(r.Log()));
  return {{"id", h.id},
          {"phi", Vec3Json(h.phi.Log())},
          {"theta", theta},
          {"beta", std::vector<double>(h.beta.data(), h.beta.data() + h.beta.size())},
          {"gamma", Vec3Json(h.gamma)}};
}

HumanParams HumanFromJson(const json& j, const SkeletonTemplate& tmpl) {
  HumanParams h;
  h.id = j.at("id").get<int>();
  h.phi = Rotation3::FromAxisAngle(Vec3FromJson(j.at("phi")));
  const auto& theta = j.at("theta");
  if (static_cast<int>(theta.size()) != tmpl.num_joints()) {
    throw SchemaMismatch("theta has " + std::to_string(theta.size()) +
                         " joints, template has " +
                         std::to_string(tmpl.num_joints()));
  }
  for (const auto& t : theta) h.theta.push_back(Rotation3::FromAxisAngle(Vec3FromJson(t)));
  const auto beta = j.at("beta").get<std::vector<double>>();
  if (static_cast<int>(beta.size()) != tmpl.num_betas()) {
    throw SchemaMismatch("beta has " + std::to_string(beta.size()) +
                         " coefficients, template has " +
                         std::to_string(tmpl.num_betas()));
  }
  h.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), beta.size());
  h.gamma = Vec3FromJson(j.at("gamma"));
  return h;
}

// --- Scene ------------------------------------------------------------------------

namespace {

std::string DepthName(int c) { return "depth_" + std::to_string(c) + ".bin"; }
std::string PairName(int i, int j, bool ref) {
  return "pointmap_" + std::to_string(i) + "_" + std::to_string(j) +
         (ref ? "_ref" : "") + ".bin";
}

}  // namespace

void SaveScene(const Scene& scene, const fs::path& dir) {
  fs::create_directories(dir);
  const WorldState& s = scene.state;
  const int num_cameras = static_cast<int>(s.cameras.size());

  WriteJsonFile(dir / "template.json", TemplateToJson(scene.skeleton));

  json cams = json::array();
  for (const CameraModel& c : s.cameras) cams.push_back(CameraToJson(c));
  WriteJsonFile(dir / "cameras.json", {{"cameras", cams}});

  json obs = json::array();
  for (const KeypointObservation& k : scene.keypoints) {
    json joints = json::array();
    for (Eigen::Index j = 0; j < k.joints.cols(); ++j) {
      joints.push_back({k.joints(0, j), k.joints(1, j), k.confidence(j)});
    }
    obs.push_back({{"camera", k.camera_id},
                   {"human", k.human_id},
                   {"bbox_height", k.bbox_height},
                   {"joints", joints}});
  }
  WriteJsonFile(dir / "keypoints.json", {{"observations", obs}});

  json est = json::array();
  for (const HumanEstimate& e : scene.human_estimates) {
    json h = HumanToJson(e.params);
    h.erase("id");
    h["human"] = e.human_id;
    h["camera"] = e.camera_id;
    est.push_back(h);
  }
  WriteJsonFile(dir / "humans_init.json", {{"estimates", est}});

  json depths = json::array();
  for (int c = 0; c < num_cameras; ++c) {
    WriteDepthFile(dir / DepthName(s.cameras[c].id), s.grid.width, s.grid.height,
                   s.depths[c].depth);
    depths.push_back({{"camera", s.cameras[c].id}, {"file", DepthName(s.cameras[c].id)}});
  }

  json pairs = json::array();
  for (const PairwiseObservation& p : s.pairs) {
    WritePointmapFile(dir / PairName(p.cam_i, p.cam_j, false), s.grid.width,
                      s.grid.height, p.points_i, p.confidence_i);
    WritePointmapFile(dir / PairName(p.cam_i, p.cam_j, true), s.grid.width,
                      s.grid.height, p.points_j, p.confidence_j);
    pairs.push_back({{"i", p.cam_i},
                     {"j", p.cam_j},
                     {"file", PairName(p.cam_i, p.cam_j, false)},
                     {"ref_file", PairName(p.cam_i, p.cam_j, true)}});
  }

  json manifest = {
      {"format", "hsfm-scene"},
      {"version", kBinaryVersion},
      {"num_cameras", num_cameras},
      {"num_humans", scene.num_humans},
      {"num_joints", scene.skeleton.num_joints()},
      {"num_betas", scene.skeleton.num_betas()},
      {"image_width", scene.image_width},
      {"image_height", scene.image_height},
      {"grid", {{"stride", s.grid.stride}, {"width", s.grid.width}, {"height", s.grid.height}}},
      {"template", "template.json"},
      {"cameras", "cameras.json"},
      {"keypoints", "keypoints.json"},
      {"humans_init", "humans_init.json"},
      {"depths", depths},
      {"pairs", pairs}};
  WriteJsonFile(dir / "manifest.json", manifest);
}

Scene LoadScene(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  const json manifest = ReadJsonFile(manifest_path);
  Scene scene;

  struct Refs {
    std::string tmpl, cameras, keypoints, humans;
    int num_cameras, num_joints, num_betas;
    json depths, pairs;
  };
  const Refs refs = Parsing(manifest_path, [&] {
    scene.num_humans = manifest.at("num_humans").get<int>();
    scene.image_width = manifest.at("image_width").get<int>();
    scene.image_height = manifest.at("image_height").get<int>();
    const json& g = manifest.at("grid");
    scene.state.grid.stride = g.at("stride").get<int>();
    scene.state.grid.width = g.at("width").get<int>();
    scene.state.grid.height = g.at("height").get<int>();
    return Refs{manifest.value("template", "template.json"),
                manifest.value("cameras", "cameras.json"),
                manifest.value("keypoints", "keypoints.json"),
                manifest.value("humans_init", "humans_init.json"),
                manifest.at("num_cameras").get<int>(),
                manifest.at("num_joints").get<int>(),
                manifest.at("num_betas").get<int>(),
                manifest.at("depths"),
                manifest.value("pairs", json::array())};
  });

  scene.skeleton = TemplateFromJson(ReadJsonFile(dir / refs.tmpl));
  if (scene.skeleton.num_joints() != refs.num_joints ||
      scene.skeleton.num_betas() != refs.num_betas) {
    throw SchemaMismatch("template does not match manifest joint/shape counts");
  }
  const SkeletonTemplate& tmpl = scene.skeleton;
  WorldState& s = scene.state;

  const fs::path cam_path = dir / refs.cameras;
  const json cams = ReadJsonFile(cam_path);
  Parsing(cam_path, [&] {
    for (const json& c : cams.at("cameras")) s.cameras.push_back(CameraFromJson(c));
    return 0;
  });
  std::sort(s.cameras.begin(), s.cameras.end(),
            [](const CameraModel& a, const CameraModel& b) { return a.id < b.id; });
  for (int c = 0; c < static_cast<int>(s.cameras.size()); ++c) {
    if (s.cameras[c].id != c) throw MissingCamera("camera ids must be 0..C-1; missing " + std::to_string(c));
  }
  if (static_cast<int>(s.cameras.size()) != refs.num_cameras) {
    throw MissingCamera("manifest lists " + std::to_string(refs.num_cameras) +
                        " cameras, cameras.json has " + std::to_string(s.cameras.size()));
  }
  const int num_cameras = refs.num_cameras;

  const fs::path kp_path = dir / refs.keypoints;
  const json kps = ReadJsonFile(kp_path);
  Parsing(kp_path, [&] {
    for (const json& o : kps.at("observations")) {
      KeypointObservation k;
      k.camera_id = o.at("camera").get<int>();
      k.human_id = o.at("human").get<int>();
      k.bbox_height = o.at("bbox_height").get<double>();
      if (!(k.bbox_height > 0.0)) throw ParseError("bbox_height must be positive");
      if (k.camera_id < 0 || k.camera_id >= num_cameras) {
        throw MissingCamera("keypoints reference camera " + std::to_string(k.camera_id));
      }
      if (k.human_id < 0 || k.human_id >= scene.num_humans) {
        throw SchemaMismatch("keypoints reference human " + std::to_string(k.human_id));
      }
      const json& joints = o.at("joints");
      if (static_cast<int>(joints.size()) != tmpl.num_joints()) {
        throw SchemaMismatch("keypoints have " + std::to_string(joints.size()) +
                             " joints, template has " + std::to_string(tmpl.num_joints()));
      }
      k.joints.resize(2, tmpl.num_joints());
      k.confidence.resize(tmpl.num_joints());
      for (int j = 0; j < tmpl.num_joints(); ++j) {
        k.joints(0, j) = joints[j].at(0).get<double>();
        k.joints(1, j) = joints[j].at(1).get<double>();
        k.confidence(j) = std::clamp(joints[j].at(2).get<double>(), 0.0, 1.0);
      }
      scene.keypoints.push_back(std::move(k));
    }
    return 0;
  });

  const fs::path est_path = dir / refs.humans;
  if (fs::exists(est_path)) {
    const json est = ReadJsonFile(est_path);
    Parsing(est_path, [&] {
      for (json e : est.at("estimates")) {
        HumanEstimate h;
        h.human_id = e.at("human").get<int>();
        h.camera_id = e.at("camera").get<int>();
        e["id"] = h.human_id;
        h.params = HumanFromJson(e, tmpl);
        scene.human_estimates.push_back(std::move(h));
      }
      return 0;
    });
  }

  // Depth maps: one per camera, all required.
  std::map<int, std::string> depth_files;
  Parsing(manifest_path, [&] {
    for (const json& d : refs.depths) {
      depth_files[d.at("camera").get<int>()] = d.at("file").get<std::string>();
    }
    return 0;
  });
  s.depths.resize(num_cameras);
  for (int c = 0; c < num_cameras; ++c) {
    auto it = depth_files.find(c);
    if (it == depth_files.end() || !fs::exists(dir / it->second)) {
      throw MissingCamera("no depth map for camera " + std::to_string(c));
    }
    int w = 0;
    int h = 0;
    s.depths[c].camera_id = c;
    s.depths[c].depth = ReadDepthFile(dir / it->second, &w, &h);
    if (w != s.grid.width || h != s.grid.height) {
      throw SchemaMismatch(it->second + " is " + std::to_string(w) + "x" +
                           std::to_string(h) + ", manifest grid is " +
                           std::to_string(s.grid.width) + "x" +
                           std::to_string(s.grid.height));
    }
  }

  for (const json& pj : refs.pairs) {
    PairwiseObservation p;
    std::string file;
    std::string ref_file;
    Parsing(manifest_path, [&] {
      p.cam_i = pj.at("i").get<int>();
      p.cam_j = pj.at("j").get<int>();
      file = pj.at("file").get<std::string>();
      ref_file = pj.at("ref_file").get<std::string>();
      return 0;
    });
    if (p.cam_i == p.cam_j) throw SchemaMismatch("pair must join two distinct cameras");
    for (int c : {p.cam_i, p.cam_j}) {
      if (c < 0 || c >= num_cameras) {
        throw MissingCamera("pair references camera " + std::to_string(c));
      }
    }
    int w = 0;
    int h = 0;
    ReadPointmapFile(dir / file, &w, &h, &p.points_i, &p.confidence_i);
    if (w != s.grid.width || h != s.grid.height) throw SchemaMismatch(file + " grid mismatch");
    ReadPointmapFile(dir / ref_file, &w, &h, &p.points_j, &p.confidence_j);
    if (w != s.grid.width || h != s.grid.height) throw SchemaMismatch(ref_file + " grid mismatch");
    s.pairs.push_back(std::move(p));
  }
  return scene;
}

// --- Snapshots ----------------------------------------------------------------------

void SaveSnapshot(const WorldState& state, const SkeletonTemplate& tmpl,
                  const fs::path& dir) {
  fs::create_directories(dir);
  json cams = json::array();
  for (const CameraModel& c : state.cameras) cams.push_back(CameraToJson(c));
  json humans = json::array();
  for (const HumanParams& h : state.humans) humans.push_back(HumanToJson(h));
  json pairs = json::array();
  for (const PairwiseObservation& p : state.pairs) {
    pairs.push_back({{"i", p.cam_i},
                     {"j", p.cam_j},
                     {"R", MatJson(p.rotation.matrix())},
                     {"t", Vec3Json(p.translation)},
                     {"sigma", p.sigma}});
  }
  json depths = json::array();
  for (std::size_t c = 0; c < state.depths.size(); ++c) {
    const int id = state.cameras[c].id;
    WriteDepthFile(dir / DepthName(id), state.grid.width, state.grid.height,
                   state.depths[c].depth);
    depths.push_back({{"camera", id}, {"file", DepthName(id)}});
  }
  json j = {{"format", "hsfm-state"},
            {"alpha", state.alpha},
            {"grid", {{"stride", state.grid.stride}, {"width", state.grid.width}, {"height", state.grid.height}}},
            {"cameras", cams},
            {"humans", humans},
            {"pairs", pairs},
            {"depths", depths},
            {"template", "template.json"}};
  WriteJsonFile(dir / "state.json", j);
  WriteJsonFile(dir / "template.json", TemplateToJson(tmpl));
}

WorldState LoadSnapshot(const fs::path& dir, SkeletonTemplate* tmpl) {
  const fs::path path = dir / "state.json";
  const json j = ReadJsonFile(path);
  *tmpl = TemplateFromJson(ReadJsonFile(dir / j.value("template", "template.json")));
  WorldState s;
  json depths;
  Parsing(path, [&] {
    s.alpha = j.at("alpha").get<double>();
    const json& g = j.at("grid");
    s.grid.stride = g.at("stride").get<int>();
    s.grid.width = g.at("width").get<int>();
    s.grid.height = g.at("height").get<int>();
    for (const json& c : j.at("cameras")) s.cameras.push_back(CameraFromJson(c));
    for (const json& h : j.at("humans")) s.humans.push_back(HumanFromJson(h, *tmpl));
    for (const json& p : j.value("pairs", json::array())) {
      PairwiseObservation pair;
      pair.cam_i = p.at("i").get<int>();
      pair.cam_j = p.at("j").get<int>();
      pair.rotation = Rotation3(MatFromJson(p.at("R")));
      pair.translation = Vec3FromJson(p.at("t"));
      pair.sigma = p.at("sigma").get<double>();
      s.pairs.push_back(std::move(pair));
    }
    depths = j.value("depths", json::array());
    return 0;
  });
  if (!(s.alpha > 0.0)) throw ParseError(path.string() + ": alpha must be positive");
  s.depths.resize(s.cameras.size());
  for (std::size_t c = 0; c < s.cameras.size(); ++c) {
    s.depths[c].camera_id = s.cameras[c].id;
    const fs::path dp = dir / DepthName(s.cameras[c].id);
    if (fs::exists(dp)) {
      int w = 0;
      int h = 0;
      s.depths[c].depth = ReadDepthFile(dp, &w, &h);
    } else {
      s.depths[c].depth.assign(s.grid.size(), std::numeric_limits<double>::quiet_NaN());
    }
  }
  return s;
}

}  // namespace hsfm
