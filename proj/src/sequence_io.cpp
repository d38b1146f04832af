// Copyright 2026 The STMD Tracker Authors
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

#include "stmd/core_data.hpp"

#include "stmd/errors.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace stmd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string frame_name(int t, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%03d.%s", t, ext);
  return buf;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

double parse_number(const std::string& token, const fs::path& file, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ParseError(file.string(), line, "not a number: '" + token + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

PointFrame read_xyz(const fs::path& p, int t) {
  std::ifstream in(p);
  if (!in) throw ParseError(p.string(), 0, "missing frame file");
  std::vector<double> vals;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    int count = 0;
    while (ls >> tok) {
      vals.push_back(parse_number(tok, p, lineno));
      ++count;
    }
    if (count != 3) throw ParseError(p.string(), lineno, "expected 3 values, got " + std::to_string(count));
  }
  PointFrame f;
  f.t = t;
  const auto n = static_cast<Eigen::Index>(vals.size() / 3);
  f.coords = Eigen::Map<Matrix>(vals.data(), n, 3);
  if (!f.coords.allFinite()) throw ParseError(p.string(), 0, "non-finite coordinate");
  return f;
}

std::vector<std::uint8_t> read_labels(const fs::path& p, Eigen::Index expected) {
  std::ifstream in(p);
  std::vector<std::uint8_t> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (line != "0" && line != "1") throw ParseError(p.string(), lineno, "label must be 0 or 1");
    out.push_back(line == "1" ? 1 : 0);
  }
  if (static_cast<Eigen::Index>(out.size()) != expected) {
    throw ParseError(p.string(), 0, "label count does not match point count");
  }
  return out;
}

}  // namespace

void write_sequence_dir(const SequenceSample& sample, const fs::path& dir) {
  sample.validate();
  fs::create_directories(dir);
  json meta;
  meta["num_frames"] = sample.length();
  meta["target_size"] = {sample.target_size.w, sample.target_size.l, sample.target_size.h};
  open_out(dir / "meta.json") << meta.dump(2) << "\n";

  for (std::size_t t = 0; t < sample.length(); ++t) {
    auto out = open_out(dir / frame_name(static_cast<int>(t), "xyz"));
    const Matrix& c = sample.frames[t].coords;
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      out << fmt(c(i, 0)) << ' ' << fmt(c(i, 1)) << ' ' << fmt(c(i, 2)) << '\n';
    }
    if (sample.has_labels()) {
      auto lab = open_out(dir / frame_name(static_cast<int>(t), "labels"));
      for (auto v : sample.target_labels[t]) lab << static_cast<int>(v) << '\n';
    }
  }

  auto boxes = open_out(dir / "boxes.csv");
  boxes << "frame,cx,cy,cz,w,l,h,theta\n";
  for (std::size_t t = 0; t < sample.length(); ++t) {
    const Box3D& b = sample.gt_boxes[t];
    boxes << t << ',' << fmt(b.center.x()) << ',' << fmt(b.center.y()) << ',' << fmt(b.center.z())
          << ',' << fmt(b.size.w) << ',' << fmt(b.size.l) << ',' << fmt(b.size.h) << ','
          << fmt(b.theta) << '\n';
  }
}

SequenceSample read_sequence_dir(const fs::path& dir) {
  const fs::path meta_path = dir / "meta.json";
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw ParseError(meta_path.string(), 0, "missing meta.json");
  json meta;
  try {
    meta = json::parse(meta_in);
  } catch (const json::exception& e) {
    throw ParseError(meta_path.string(), 0, std::string("invalid JSON: ") + e.what());
  }
  if (!meta.contains("num_frames") || !meta["num_frames"].is_number_integer() ||
      !meta.contains("target_size") || !meta["target_size"].is_array() ||
      meta["target_size"].size() != 3) {
    throw ParseError(meta_path.string(), 0, "needs integer num_frames and 3-element target_size");
  }
  const int num_frames = meta["num_frames"].get<int>();
  if (num_frames < 2) throw ParseError(meta_path.string(), 0, "num_frames must be >= 2");
  BoxSize size;
  try {
    size = {meta["target_size"][0].get<double>(), meta["target_size"][1].get<double>(),
            meta["target_size"][2].get<double>()};
  } catch (const json::exception&) {
    throw ParseError(meta_path.string(), 0, "target_size entries must be numbers");
  }

  SequenceSample s;
  s.target_size = size;
  bool labels = true;
  for (int t = 0; t < num_frames; ++t) {
    s.frames.push_back(read_xyz(dir / frame_name(t, "xyz"), t));
    labels = labels && fs::exists(dir / frame_name(t, "labels"));
  }
  if (labels) {
    for (int t = 0; t < num_frames; ++t) {
      s.target_labels.push_back(read_labels(dir / frame_name(t, "labels"), s.frames[t].size()));
    }
  }
  // frame files beyond the declared count mean meta and directory disagree
  if (fs::exists(dir / frame_name(num_frames, "xyz"))) {
    throw ParseError(meta_path.string(), 0, "more frame files than num_frames");
  }

  const fs::path box_path = dir / "boxes.csv";
  std::ifstream bin(box_path);
  if (!bin) throw ParseError(box_path.string(), 0, "missing boxes.csv");
  std::string line;
  int lineno = 0;
  std::getline(bin, line);
  ++lineno;
  if (trim(line) != "frame,cx,cy,cz,w,l,h,theta") {
    throw ParseError(box_path.string(), lineno, "unexpected header");
  }
  s.gt_boxes.resize(static_cast<std::size_t>(num_frames));
  std::vector<bool> seen(static_cast<std::size_t>(num_frames), false);
  while (std::getline(bin, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 8) throw ParseError(box_path.string(), lineno, "expected 8 fields");
    const double frame = parse_number(trim(f[0]), box_path, lineno);
    const int t = static_cast<int>(frame);
    if (t != frame || t < 0 || t >= num_frames) {
      throw ParseError(box_path.string(), lineno, "frame index out of range");
    }
    double v[7];
    for (int k = 0; k < 7; ++k) v[k] = parse_number(trim(f[k + 1]), box_path, lineno);
    if (!(v[3] > 0 && v[4] > 0 && v[5] > 0)) {
      throw ParseError(box_path.string(), lineno, "box size must be positive");
    }
    s.gt_boxes[static_cast<std::size_t>(t)] = Box3D::make({v[0], v[1], v[2]}, {v[3], v[4], v[5]}, v[6]);
    seen[static_cast<std::size_t>(t)] = true;
  }
  for (int t = 0; t < num_frames; ++t) {
    if (!seen[static_cast<std::size_t>(t)]) {
      throw ParseError(box_path.string(), 0, "no box for frame " + std::to_string(t));
    }
  }
  if (!(s.gt_boxes[0].size == s.target_size)) {
    throw ParseError(meta_path.string(), 0, "target_size differs from the frame-0 box size");
  }
  return s;
}

PointFrame read_kitti_points(const fs::path& bin_path) {
  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + bin_path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 16 != 0) {
    throw FormatError(bin_path.string() + ": length " + std::to_string(bytes.size()) +
                      " is not a multiple of 16 (truncated record)");
  }
  const auto n = static_cast<Eigen::Index>(bytes.size() / 16);
  PointFrame f;
  f.coords.resize(n, 3);
  f.feats.resize(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    float rec[4];
    for (int k = 0; k < 4; ++k) {
      const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + i * 16 + k * 4);
      const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                                 (static_cast<std::uint32_t>(p[2]) << 16) |
                                 (static_cast<std::uint32_t>(p[3]) << 24);
      std::memcpy(&rec[k], &bits, sizeof(float));
    }
    f.coords.row(i) << rec[0], rec[1], rec[2];
    f.feats(i, 0) = rec[3];
  }
  if (!f.coords.allFinite()) throw FormatError(bin_path.string() + ": non-finite coordinate");
  if (n == 0) f.feats.resize(0, 0);
  return f;
}

KittiFrame read_kitti_frame(const fs::path& bin_path, const std::vector<std::string>& label_fields) {
  // object format: type trunc occ alpha x1 y1 x2 y2 h w l x y z ry
  // tracking format prefixes frame and track_id
  std::size_t off = 0;
  if (label_fields.size() == 17) {
    off = 2;
  } else if (label_fields.size() != 15) {
    throw ParseError("label", 0, "expected 15 or 17 label fields, got " + std::to_string(label_fields.size()));
  }
  auto num = [&](std::size_t k) {
    return parse_number(label_fields[off + k], "label", static_cast<int>(off + k + 1));
  };
  const double h = num(8), w = num(9), l = num(10);
  const double x = num(11), y = num(12), z = num(13), ry = num(14);
  if (!(h > 0 && w > 0 && l > 0)) throw ParseError("label", 0, "box size must be positive");
  // KITTI locations are the bottom-face center with y pointing down
  KittiFrame out{read_kitti_points(bin_path), Box3D::make({x, y - h / 2, z}, {w, l, h}, ry)};
  return out;
}

}  // namespace stmd
