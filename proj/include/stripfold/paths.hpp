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

#ifndef STRIPFOLD_PATHS_HPP_
#define STRIPFOLD_PATHS_HPP_

#include <string>
#include <vector>

#include "stripfold/episode.hpp"

namespace stripfold {

// Gripper path made of straight and circular pieces, parameterized by arc
// length.
class GripperPath {
 public:
  struct Segment {
    bool arc = false;
    Vec2 from;
    Vec2 to;
    // Arcs only: center, radius and the polar angles of the two ends.
    Vec2 center = Vec2::Zero();
    double radius = 0.0;
    double angle_from = 0.0;
    double angle_to = 0.0;
    double length = 0.0;
  };

  // A path that stays at start.
  explicit GripperPath(const Vec2& start);

  GripperPath& line_to(const Vec2& to);
  // Arc around center from the current end, sweeping by delta radians
  // (positive is counterclockwise in the xz-plane).
  GripperPath& arc_around(const Vec2& center, double delta);

  double total_length() const { return total_; }
  Vec2 start() const { return start_; }
  Vec2 end() const;
  // s is clamped to [0, total_length()].
  Vec2 at(double s) const;
  // Segment ends plus samples_per_segment interior points per segment.
  std::vector<Vec2> waypoints(int samples_per_segment = 0) const;
  const std::vector<Segment>& segments() const { return segments_; }

 private:
  Vec2 start_;
  std::vector<Segment> segments_;
  std::vector<double> offsets_;
  double total_ = 0.0;
};

// (L, 0) -> (L/2, L/2) -> (0, 0).
GripperPath triangular_path(double strip_length);
// Semicircle of radius L/2 around (L/2, 0) from (L, 0) over (L/2, L/2).
GripperPath circular_path(double strip_length);

inline constexpr double kBaselineSpeed = 0.05;

// Drives the gripper along the path at constant speed, starting from the
// flat strip, until the layers touch or the path ends. Control steps of
// control_period simulator steps are recorded and rewarded like policy
// episodes.
EpisodeResult run_path(const GripperPath& path, const StripParams& params,
                       double speed = kBaselineSpeed,
                       const EpisodeConfig& config = {});

}  // namespace stripfold

#endif  // STRIPFOLD_PATHS_HPP_
