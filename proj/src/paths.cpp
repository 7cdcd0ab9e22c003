// Copyright 2026 The stripfold Authors
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

#include "stripfold/paths.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stripfold/reward.hpp"

namespace stripfold {
namespace {

Vec2 segment_point(const GripperPath::Segment& seg, double u) {
  if (u <= 0.0) return seg.from;
  if (u >= seg.length) return seg.to;
  const double t = u / seg.length;
  if (!seg.arc) return seg.from + t * (seg.to - seg.from);
  const double a = seg.angle_from + t * (seg.angle_to - seg.angle_from);
  return seg.center + seg.radius * Vec2(std::cos(a), std::sin(a));
}

}  // namespace

GripperPath::GripperPath(const Vec2& start) : start_(start) {}

Vec2 GripperPath::end() const {
  return segments_.empty() ? start_ : segments_.back().to;
}

GripperPath& GripperPath::line_to(const Vec2& to) {
  Segment seg;
  seg.from = end();
  seg.to = to;
  seg.length = (to - seg.from).norm();
  offsets_.push_back(total_);
  total_ += seg.length;
  segments_.push_back(seg);
  return *this;
}

GripperPath& GripperPath::arc_around(const Vec2& center, double delta) {
  Segment seg;
  seg.arc = true;
  seg.from = end();
  seg.center = center;
  const Vec2 r = seg.from - center;
  seg.radius = r.norm();
  seg.angle_from = std::atan2(r.y(), r.x());
  seg.angle_to = seg.angle_from + delta;
  seg.to = center + seg.radius * Vec2(std::cos(seg.angle_to),
                                      std::sin(seg.angle_to));
  seg.length = seg.radius * std::abs(delta);
  offsets_.push_back(total_);
  total_ += seg.length;
  segments_.push_back(seg);
  return *this;
}

Vec2 GripperPath::at(double s) const {
  if (segments_.empty() || s <= 0.0) return start_;
  if (s >= total_) return end();
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), s);
  const auto i = static_cast<std::size_t>(it - offsets_.begin()) - 1;
  return segment_point(segments_[i], s - offsets_[i]);
}

std::vector<Vec2> GripperPath::waypoints(int samples_per_segment) const {
  std::vector<Vec2> pts{start_};
  for (const auto& seg : segments_) {
    for (int j = 1; j <= samples_per_segment; ++j) {
      pts.push_back(segment_point(
          seg, seg.length * j / static_cast<double>(samples_per_segment + 1)));
    }
    pts.push_back(seg.to);
  }
  return pts;
}

GripperPath triangular_path(double strip_length) {
  if (!(strip_length > 0.0)) {
    throw std::invalid_argument("strip_length must be positive");
  }
  const double h = 0.5 * strip_length;
  GripperPath path(Vec2(strip_length, 0.0));
  path.line_to(Vec2(h, h)).line_to(Vec2(0.0, 0.0));
  return path;
}

GripperPath circular_path(double strip_length) {
  if (!(strip_length > 0.0)) {
    throw std::invalid_argument("strip_length must be positive");
  }
  GripperPath path(Vec2(strip_length, 0.0));
  // Two quarter arcs so the top point is an exact waypoint.
  const Vec2 c(0.5 * strip_length, 0.0);
  path.arc_around(c, 0.5 * std::numbers::pi);
  path.arc_around(c, 0.5 * std::numbers::pi);
  return path;
}

EpisodeResult run_path(const GripperPath& path, const StripParams& params,
                       double speed, const EpisodeConfig& config) {
  if (!(speed > 0.0) || speed > params.max_gripper_speed) {
    throw std::invalid_argument("path speed must be in (0, max_gripper_speed]");
  }
  EpisodeResult r;
  FoldingDriver driver(params, config.contact);
  const double ds = speed * params.sim_dt;
  const auto total_steps =
      static_cast<long>(std::ceil(path.total_length() / ds - 1e-9));
  std::vector<Vec2> targets;
  long done = 0;
  bool touched = false;
  try {
    while (done < total_steps && !touched) {
      targets.clear();
      for (int j = 0; j < config.control_period && done < total_steps; ++j) {
        ++done;
        targets.push_back(path.at(std::min(done * ds, path.total_length())));
      }
      touched = driver.advance(targets);
    }
  } catch (const SimulationError& e) {
    throw SimulationError(std::string(e.what()) + " at path position " +
                              std::to_string(done * ds) + " m",
                          e.step_index());
  }
  r.trajectory = driver.trajectory();
  r.force_trace = driver.force_trace();
  r.steps = static_cast<int>(r.trajectory.size());
  r.touched = touched;
  r.touch = driver.touch();
  r.d = touched ? r.touch.d : 0.0;
  assign_rewards(r, config.reward, params.strip_length);
  return r;
}

}  // namespace stripfold
