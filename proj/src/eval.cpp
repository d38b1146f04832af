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

#include "stmd/eval.hpp"

#include "stmd/errors.hpp"
#include "stmd/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace stmd {

std::vector<Eigen::Vector2d> bev_corners(const Box3D& box) {
  const double c = std::cos(box.theta);
  const double s = std::sin(box.theta);
  const double hl = box.size.l / 2;
  const double hw = box.size.w / 2;
  const double local[4][2] = {{hl, hw}, {-hl, hw}, {-hl, -hw}, {hl, -hw}};
  std::vector<Eigen::Vector2d> out;
  for (const auto& p : local) {
    out.emplace_back(box.center.x() + c * p[0] - s * p[1], box.center.y() + s * p[0] + c * p[1]);
  }
  return out;
}

namespace {

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p) {
  return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

double polygon_area(const std::vector<Eigen::Vector2d>& poly) {
  double area = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    area += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * std::abs(area);
}

}  // namespace

double convex_intersection_area(const std::vector<Eigen::Vector2d>& a, const std::vector<Eigen::Vector2d>& b) {
  // Sutherland-Hodgman: clip a against each edge of b
  std::vector<Eigen::Vector2d> poly = a;
  for (std::size_t e = 0; e < b.size() && !poly.empty(); ++e) {
    const Eigen::Vector2d& p0 = b[e];
    const Eigen::Vector2d& p1 = b[(e + 1) % b.size()];
    std::vector<Eigen::Vector2d> next;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Eigen::Vector2d& cur = poly[i];
      const Eigen::Vector2d& prv = poly[(i + poly.size() - 1) % poly.size()];
      const double dc = cross(p0, p1, cur);
      const double dp = cross(p0, p1, prv);
      if (dc >= 0.0) {
        if (dp < 0.0) next.push_back(prv + (cur - prv) * (dp / (dp - dc)));
        next.push_back(cur);
      } else if (dp >= 0.0) {
        next.push_back(prv + (cur - prv) * (dp / (dp - dc)));
      }
    }
    poly = std::move(next);
  }
  return poly.size() < 3 ? 0.0 : polygon_area(poly);
}

double iou3d(const Box3D& a, const Box3D& b) {
  if (!(a.size.w > 0 && a.size.l > 0 && a.size.h > 0 && b.size.w > 0 && b.size.l > 0 && b.size.h > 0)) {
    throw ArgumentError("iou3d: degenerate box");
  }
  const double za0 = a.center.z() - a.size.h / 2, za1 = a.center.z() + a.size.h / 2;
  const double zb0 = b.center.z() - b.size.h / 2, zb1 = b.center.z() + b.size.h / 2;
  const double dz = std::min(za1, zb1) - std::max(za0, zb0);
  if (dz <= 0.0) return 0.0;
  const double inter = convex_intersection_area(bev_corners(a), bev_corners(b)) * dz;
  const double uni = a.volume() + b.volume() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double center_distance(const Box3D& a, const Box3D& b) { return (a.center - b.center).norm(); }

std::vector<double> success_curve(std::span<const double> ious) {
  if (ious.empty()) throw ArgumentError("success_auc: empty list");
  std::vector<double> curve(kThresholdCount);
  for (int k = 0; k < kThresholdCount; ++k) {
    const double tau = k / 100.0;
    const auto hits = std::count_if(ious.begin(), ious.end(), [tau](double v) { return v > tau; });
    curve[k] = static_cast<double>(hits) / static_cast<double>(ious.size());
  }
  return curve;
}

std::vector<double> precision_curve(std::span<const double> distances) {
  if (distances.empty()) throw ArgumentError("precision_auc: empty list");
  std::vector<double> curve(kThresholdCount);
  for (int k = 0; k < kThresholdCount; ++k) {
    const double tau = 2.0 * k / 100.0;
    const auto hits = std::count_if(distances.begin(), distances.end(), [tau](double v) { return v <= tau; });
    curve[k] = static_cast<double>(hits) / static_cast<double>(distances.size());
  }
  return curve;
}

double success_auc(std::span<const double> ious) {
  if (ious.empty()) throw ArgumentError("success_auc: empty list");
  // integer hit totals keep the mean exact up to one final division
  std::int64_t hits = 0;
  for (int k = 0; k < kThresholdCount; ++k) {
    const double tau = k / 100.0;
    hits += std::count_if(ious.begin(), ious.end(), [tau](double v) { return v > tau; });
  }
  return static_cast<double>(hits) / (static_cast<double>(kThresholdCount) * static_cast<double>(ious.size()));
}

double precision_auc(std::span<const double> distances) {
  if (distances.empty()) throw ArgumentError("precision_auc: empty list");
  std::int64_t hits = 0;
  for (int k = 0; k < kThresholdCount; ++k) {
    const double tau = 2.0 * k / 100.0;
    hits += std::count_if(distances.begin(), distances.end(), [tau](double v) { return v <= tau; });
  }
  return static_cast<double>(hits) /
         (static_cast<double>(kThresholdCount) * static_cast<double>(distances.size()));
}

nlohmann::ordered_json TrackResult::to_json() const {
  nlohmann::ordered_json j;
  j["frames"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const Box3D& b = boxes[i];
    nlohmann::ordered_json f;
    f["box"] = {b.center.x(), b.center.y(), b.center.z(), b.size.w, b.size.l, b.size.h, b.theta};
    f["iou"] = ious[i];
    f["dist"] = distances[i];
    j["frames"].push_back(std::move(f));
  }
  j["success"] = success;
  j["precision"] = precision;
  return j;
}

TrackResult TrackResult::from_json(const nlohmann::json& j, const std::string& source) {
  try {
    TrackResult r;
    for (const auto& f : j.at("frames")) {
      const auto& b = f.at("box");
      if (!b.is_array() || b.size() != 7) throw ParseError(source, 0, "box must have 7 numbers");
      r.boxes.push_back(Box3D::make({b[0].get<double>(), b[1].get<double>(), b[2].get<double>()},
                                    {b[3].get<double>(), b[4].get<double>(), b[5].get<double>()},
                                    b[6].get<double>()));
      r.ious.push_back(f.at("iou").get<double>());
      r.distances.push_back(f.at("dist").get<double>());
    }
    r.success = j.at("success").get<double>();
    r.precision = j.at("precision").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, 0, e.what());
  } catch (const ArgumentError& e) {
    throw ParseError(source, 0, e.what());
  }
}

Box3D OracleTracker::predict(const SequenceSample& seq, int t, std::span<const Box3D>) const {
  return seq.gt_boxes[static_cast<std::size_t>(t)];
}

Box3D StaticTracker::predict(const SequenceSample&, int, std::span<const Box3D> history) const {
  return history.back();
}

TrackResult run_ope(const Tracker& tracker, const SequenceSample& sample) {
  sample.validate();
  TrackResult r;
  r.boxes.push_back(sample.gt_boxes[0]);
  for (std::size_t t = 1; t < sample.length(); ++t) {
    Box3D b = tracker.predict(sample, static_cast<int>(t), r.boxes);
    // dimensions stay those of the first frame
    b.size = sample.target_size;
    r.boxes.push_back(b);
  }
  for (std::size_t t = 0; t < sample.length(); ++t) {
    r.ious.push_back(iou3d(r.boxes[t], sample.gt_boxes[t]));
    r.distances.push_back(center_distance(r.boxes[t], sample.gt_boxes[t]));
  }
  r.success = success_auc(r.ious);
  r.precision = precision_auc(r.distances);
  return r;
}

Summary summarize(std::span<const TrackResult> results) {
  std::vector<double> ious;
  std::vector<double> dists;
  for (const auto& r : results) {
    ious.insert(ious.end(), r.ious.begin(), r.ious.end());
    dists.insert(dists.end(), r.distances.begin(), r.distances.end());
  }
  if (ious.empty()) return {};
  return {success_auc(ious), precision_auc(dists)};
}

std::vector<TrackResult> run_ope_batch(const Tracker& tracker, std::span<const SequenceSample> samples,
                                       int workers) {
  std::vector<TrackResult> out(samples.size());
  parallel_for_dynamic(static_cast<std::int64_t>(samples.size()),
                       [&](std::int64_t i) { out[i] = run_ope(tracker, samples[i]); }, workers);
  return out;
}

}  // namespace stmd
