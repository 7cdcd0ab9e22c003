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

#ifndef STRIPFOLD_VISION_HPP_
#define STRIPFOLD_VISION_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

#include "stripfold/strip_sim.hpp"

namespace stripfold {

// Projective map from the folding plane (x, z) to image pixels (u, v),
// scaled so that m(2, 2) = 1.
class Homography {
 public:
  Homography() : m_(Eigen::Matrix3d::Identity()) {}
  // Throws std::invalid_argument when m is singular or m(2, 2) == 0.
  explicit Homography(const Eigen::Matrix3d& m);

  const Eigen::Matrix3d& matrix() const { return m_; }
  Vec2 project(const Vec2& plane) const;
  Vec2 unproject(const Vec2& image) const;
  Eigen::Vector3d project_homogeneous(const Eigen::Vector3d& plane) const {
    return m_ * plane;
  }
  Homography inverse() const;
  // Plane distance along +x covered by one image pixel at (x, 0).
  double pixel_equivalent_x(double x) const;

 private:
  Eigen::Matrix3d m_;
  Eigen::Matrix3d inv_;
};

struct PointPair {
  Vec2 image;
  Vec2 plane;
};

struct HomographyEstimate {
  Homography homography;
  double rms_reprojection_error = 0.0;  // pixels
};

class DegenerateConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Normalized DLT: both point sets are translated to their centroid and
// scaled to mean distance sqrt(2), the 2n x 9 system is solved by SVD and the
// result is denormalized. Needs at least 4 pairs with no 3 plane points
// collinear.
HomographyEstimate estimate_homography(const std::vector<PointPair>& pairs);

struct CameraPose {
  Eigen::Vector3d position;  // world (x, y, z); the folding plane is y = 0
  Eigen::Vector3d target;
  double focal_px = 900.0;
  int width = 960;
  int height = 720;
};

// Pinhole camera looking at target, z up, restricted to the plane y = 0.
Homography look_at_homography(const CameraPose& pose);

// Low oblique view from beyond the grasped end, slightly in front of the
// folding plane.
CameraPose canonical_camera_pose();
Homography canonical_camera();

// "9 numbers, row-major, whitespace separated".
void write_homography(std::ostream& out, const Homography& h);
Homography read_homography(std::istream& in);

struct Color {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Color&) const = default;
};

// Max per-channel absolute difference.
int color_distance(const Color& a, const Color& b);

inline constexpr Color kDeskColor{200, 190, 170};
inline constexpr Color kStripColor{40, 60, 150};
inline constexpr int kColorThreshold = 30;

class RasterImage {
 public:
  RasterImage(int width, int height, Color fill = {});
  int width() const { return width_; }
  int height() const { return height_; }
  Color at(int u, int v) const;
  void set(int u, int v, const Color& c);
  bool contains(int u, int v) const {
    return u >= 0 && v >= 0 && u < width_ && v < height_;
  }
  const std::vector<std::uint8_t>& bytes() const { return data_; }
  bool operator==(const RasterImage&) const = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> data_;
};

void write_ppm(std::ostream& out, const RasterImage& image);
RasterImage read_ppm(std::istream& in);
void save_ppm(const std::filesystem::path& path, const RasterImage& image);
RasterImage load_ppm(const std::filesystem::path& path);

// Desk-colored canvas with the projected strip polyline: every pixel whose
// center lies within thickness_px / 2 of a projected link.
RasterImage render_strip(const StripState& state, const Homography& h,
                         int width, int height, Color desk = kDeskColor,
                         Color strip = kStripColor, double thickness_px = 1.0);

struct LineHit {
  int u = 0;
  int v = 0;
  Vec2 line_point;  // sub-pixel point on the search line that was tested
};

// Walks the rasterized segment from grasped to fixed and returns the first
// pixel farther than threshold from desk. Empty means no contact found.
std::optional<LineHit> detect_touch_point(const RasterImage& image,
                                          const Vec2& grasped,
                                          const Vec2& fixed, Color desk,
                                          int threshold = kColorThreshold);

// Image of the unfolded strip, (L, 0) to (0, 0).
struct SearchLine {
  Vec2 grasped;
  Vec2 fixed;
};
SearchLine search_line(const Homography& h, double strip_length);

// detect_touch_point on the search line, back-projected to the plane x.
std::optional<double> detect_contact_x(const RasterImage& image,
                                       const Homography& h,
                                       double strip_length,
                                       Color desk = kDeskColor,
                                       int threshold = kColorThreshold);

}  // namespace stripfold

#endif  // STRIPFOLD_VISION_HPP_
