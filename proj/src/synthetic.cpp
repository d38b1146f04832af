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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace stmd {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct Track {
  BoxSize size;
  std::vector<Vector3> centers;
  std::vector<double> headings;
};

double footprint_radius(const BoxSize& s) { return 0.5 * std::hypot(s.w, s.l); }

// Point on the visible shell (4 sides + top) of an axis-aligned box centered at 0,
// faces chosen in proportion to their area.
Vector3 sample_shell(Rng& rng, const BoxSize& s) {
  const double side_l = s.l * s.h;  // faces at +-y
  const double side_w = s.w * s.h;  // faces at +-x
  const double top = s.l * s.w;
  const double total = 2 * side_l + 2 * side_w + top;
  const double u = uniform(rng, 0.0, total);
  const double a = uniform(rng, -0.5, 0.5);
  const double b = uniform(rng, -0.5, 0.5);
  if (u < 2 * side_l) {
    const double y = (u < side_l ? 0.5 : -0.5) * s.w;
    return {a * s.l, y, b * s.h};
  }
  if (u < 2 * side_l + 2 * side_w) {
    const double x = (u < 2 * side_l + side_w ? 0.5 : -0.5) * s.l;
    return {x, a * s.w, b * s.h};
  }
  return {a * s.l, b * s.w, 0.5 * s.h};
}

// Isotropic Gaussian jitter clipped to norm 3 sigma.
Vector3 jitter(Rng& rng, double sigma) {
  if (sigma <= 0.0) return Vector3::Zero();
  std::normal_distribution<double> n(0.0, sigma);
  Vector3 v(n(rng), n(rng), n(rng));
  const double lim = 3.0 * sigma;
  if (v.norm() > lim) v *= lim / v.norm();
  return v;
}

Vector3 to_world(const Vector3& local, const Vector3& center, double heading) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  return {center.x() + c * local.x() - s * local.y(), center.y() + s * local.x() + c * local.y(),
          center.z() + local.z()};
}

Track make_target(Rng& rng, const ScenarioConfig& cfg) {
  Track tr;
  tr.size = {uniform(rng, 1.6, 2.0), uniform(rng, 3.8, 4.6), uniform(rng, 1.4, 1.7)};
  double heading = uniform(rng, -kPi, kPi);
  const double speed = uniform(rng, cfg.min_speed, cfg.max_speed);
  const double yaw_rate = uniform(rng, -0.08, 0.08);
  Vector3 c(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0), 0.5 * tr.size.h);
  for (int t = 0; t < cfg.num_frames; ++t) {
    tr.centers.push_back(c);
    tr.headings.push_back(wrap_angle(heading));
    heading += yaw_rate + uniform(rng, -0.02, 0.02);
    c += speed * Vector3(std::cos(heading), std::sin(heading), 0.0);
  }
  return tr;
}

double min_clearance(const Track& a, const Track& b) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < a.centers.size(); ++t) {
    const double d = (a.centers[t] - b.centers[t]).head<2>().norm() - footprint_radius(a.size) -
                     footprint_radius(b.size);
    best = std::min(best, d);
  }
  return best;
}

// Distractors drive alongside the target (same heading, similar speed) at a
// lateral offset; placements violating the gap in any frame are redrawn.
Track make_distractor(Rng& rng, const ScenarioConfig& cfg, const Track& target,
                      const std::vector<Track>& others) {
  const double k = uniform(rng, 0.9, 1.1);
  BoxSize size{target.size.w * k, target.size.l * k, target.size.h * uniform(rng, 0.9, 1.1)};
  const double reach = footprint_radius(target.size) + footprint_radius(size) + cfg.distractor_min_gap;
  for (int attempt = 0;; ++attempt) {
    const double spread = attempt < 200 ? 2.0 : 2.0 + 0.1 * (attempt - 200);
    const double lateral = (uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0) * (reach + uniform(rng, 0.0, spread));
    const double along = uniform(rng, -4.0, 4.0);
    const double speed_scale = uniform(rng, 0.85, 1.15);
    Track d;
    d.size = size;
    Vector3 prev_t = target.centers[0];
    Vector3 c = to_world({along, lateral, 0.0}, target.centers[0], target.headings[0]);
    c.z() = 0.5 * size.h;
    for (std::size_t t = 0; t < target.centers.size(); ++t) {
      if (t > 0) {
        c += speed_scale * (target.centers[t] - prev_t);
        prev_t = target.centers[t];
      }
      d.centers.push_back(c);
      d.headings.push_back(target.headings[t]);
    }
    bool ok = min_clearance(target, d) >= cfg.distractor_min_gap;
    for (const auto& o : others) ok = ok && min_clearance(o, d) >= 0.0;
    if (ok) return d;
  }
}

}  // namespace

SequenceSample generate_synthetic_sequence(const ScenarioConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const Track target = make_target(rng, cfg);
  std::vector<Track> distractors;
  for (int i = 0; i < cfg.num_distractors; ++i) {
    distractors.push_back(make_distractor(rng, cfg, target, distractors));
  }

  const int n = cfg.points_per_frame;
  const int target_raw = n;
  const int distractor_raw = std::max(1, n / 2);
  const int clutter_raw = std::max(1, n / 2);

  SequenceSample out;
  out.target_size = target.size;
  for (int t = 0; t < cfg.num_frames; ++t) {
    std::vector<Vector3> pts;
    std::vector<std::uint8_t> member;

    std::vector<Vector3> shell;
    for (int i = 0; i < target_raw; ++i) {
      shell.push_back(to_world(sample_shell(rng, target.size), target.centers[t], target.headings[t]) +
                      jitter(rng, cfg.noise_sigma));
    }
    double drop = 0.0;
    if (auto it = cfg.occlusion_schedule.find(t); it != cfg.occlusion_schedule.end()) drop = it->second;
    const int keep = target_raw - static_cast<int>(std::lround(drop * target_raw));
    std::shuffle(shell.begin(), shell.end(), rng);
    for (int i = 0; i < keep; ++i) {
      pts.push_back(shell[i]);
      member.push_back(1);
    }

    for (const auto& d : distractors) {
      for (int i = 0; i < distractor_raw; ++i) {
        pts.push_back(to_world(sample_shell(rng, d.size), d.centers[t], d.headings[t]) +
                      jitter(rng, cfg.noise_sigma));
        member.push_back(0);
      }
    }
    for (int i = 0; i < clutter_raw; ++i) {
      const Vector3& c = target.centers[t];
      Vector3 p(c.x() + uniform(rng, -10.0, 10.0), c.y() + uniform(rng, -10.0, 10.0),
                uniform(rng, 0.0, 2.5));
      // clutter never lands inside the target's dilated box
      const Vector3 local = p - c;
      const double ch = std::cos(-target.headings[t]);
      const double sh = std::sin(-target.headings[t]);
      const double lx = ch * local.x() - sh * local.y();
      const double ly = sh * local.x() + ch * local.y();
      const double pad = 3.0 * cfg.noise_sigma + 0.1;
      if (std::abs(lx) <= target.size.l / 2 + pad && std::abs(ly) <= target.size.w / 2 + pad) {
        p.z() = target.size.h + pad + uniform(rng, 0.0, 1.0);
      }
      pts.push_back(p);
      member.push_back(0);
    }

    PointFrame raw;
    raw.t = t;
    raw.coords.resize(static_cast<Eigen::Index>(pts.size()), 3);
    for (std::size_t i = 0; i < pts.size(); ++i) raw.coords.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();

    ResampleResult rs = resample_points_indexed(raw, n, mix_seed(cfg.seed, 1000 + t));
    PointFrame frame;
    frame.t = t;
    frame.coords = rs.frame.coords;
    std::vector<std::uint8_t> labels(n, 0);
    for (int i = 0; i < n; ++i) labels[i] = rs.source[i] >= 0 ? member[rs.source[i]] : 0;

    out.frames.push_back(std::move(frame));
    out.target_labels.push_back(std::move(labels));
    out.gt_boxes.push_back(Box3D::make(target.centers[t], target.size, target.headings[t]));
  }
  return out;
}

}  // namespace stmd
