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

#include "stripfold/vision.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "stripfold/key_value.hpp"

namespace stripfold {

Homography::Homography(const Eigen::Matrix3d& m) {
  if (!m.allFinite() || m(2, 2) == 0.0) {
    throw std::invalid_argument("homography needs a finite, nonzero h33");
  }
  m_ = m / m(2, 2);
  const double norm = m_.norm();
  if (!(std::abs(m_.determinant()) > 1e-12 * norm * norm * norm)) {
    throw std::invalid_argument("homography is singular");
  }
  inv_ = m_.inverse();
}

Vec2 Homography::project(const Vec2& p) const {
  const Eigen::Vector3d q = m_ * Eigen::Vector3d(p.x(), p.y(), 1.0);
  return q.head<2>() / q.z();
}

Vec2 Homography::unproject(const Vec2& p) const {
  const Eigen::Vector3d q = inv_ * Eigen::Vector3d(p.x(), p.y(), 1.0);
  return q.head<2>() / q.z();
}

Homography Homography::inverse() const { return Homography(inv_); }

double Homography::pixel_equivalent_x(double x) const {
  const Eigen::Vector3d q = m_ * Eigen::Vector3d(x, 0.0, 1.0);
  // d/dx of (q.xy / q.z).
  const Vec2 dq = (m_.col(0).head<2>() * q.z() - q.head<2>() * m_(2, 0)) /
                  (q.z() * q.z());
  return 1.0 / dq.norm();
}

namespace {

// Similarity taking the points to centroid 0 and mean distance sqrt(2).
Eigen::Matrix3d normalizer(const std::vector<Vec2>& pts) {
  Vec2 c = Vec2::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  double mean = 0.0;
  for (const auto& p : pts) mean += (p - c).norm();
  mean /= static_cast<double>(pts.size());
  if (!(mean > 0.0)) throw DegenerateConfiguration("coincident points");
  const double s = std::sqrt(2.0) / mean;
  Eigen::Matrix3d t;
  t << s, 0, -s * c.x(), 0, s, -s * c.y(), 0, 0, 1;
  return t;
}

bool collinear(const Vec2& a, const Vec2& b, const Vec2& c, double scale) {
  const Vec2 u = b - a;
  const Vec2 v = c - a;
  return std::abs(u.x() * v.y() - u.y() * v.x()) <= 1e-12 * scale * scale;
}

}  // namespace

HomographyEstimate estimate_homography(const std::vector<PointPair>& pairs) {
  const int n = static_cast<int>(pairs.size());
  if (n < 4) {
    throw DegenerateConfiguration("homography needs at least 4 point pairs");
  }
  std::vector<Vec2> img, pln;
  for (const auto& p : pairs) {
    if (!p.image.allFinite() || !p.plane.allFinite()) {
      throw std::invalid_argument("non-finite correspondence");
    }
    img.push_back(p.image);
    pln.push_back(p.plane);
  }
  const Eigen::Matrix3d t_img = normalizer(img);
  const Eigen::Matrix3d t_pln = normalizer(pln);
  if (n == 4) {
    const double scale = std::sqrt(2.0) / t_pln(0, 0);
    for (int a = 0; a < 4; ++a) {
      for (int b = a + 1; b < 4; ++b) {
        for (int c = b + 1; c < 4; ++c) {
          if (collinear(pln[a], pln[b], pln[c], scale)) {
            throw DegenerateConfiguration("three plane points are collinear");
          }
        }
      }
    }
  }

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 9);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d x = t_pln * Eigen::Vector3d(pln[i].x(), pln[i].y(), 1);
    const Eigen::Vector3d y = t_img * Eigen::Vector3d(img[i].x(), img[i].y(), 1);
    // y cross (H x) = 0, two independent rows.
    a.block<1, 3>(2 * i, 3) = -y.z() * x.transpose();
    a.block<1, 3>(2 * i, 6) = y.y() * x.transpose();
    a.block<1, 3>(2 * i + 1, 0) = y.z() * x.transpose();
    a.block<1, 3>(2 * i + 1, 6) = -y.x() * x.transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  // A unique solution needs a one-dimensional null space.
  if (!(s(7) > 1e-10 * s(0))) {
    throw DegenerateConfiguration("correspondences are rank deficient");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  const Eigen::Matrix3d m = t_img.inverse() * hn * t_pln;
  if (std::abs(m(2, 2)) < 1e-300) {
    throw DegenerateConfiguration("plane origin maps to infinity");
  }

  HomographyEstimate est{Homography(m), 0.0};
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    sq += (est.homography.project(pln[i]) - img[i]).squaredNorm();
  }
  est.rms_reprojection_error = std::sqrt(sq / n);
  return est;
}

Homography look_at_homography(const CameraPose& pose) {
  const Eigen::Vector3d fwd = (pose.target - pose.position).normalized();
  const Eigen::Vector3d right = fwd.cross(Eigen::Vector3d::UnitZ()).normalized();
  const Eigen::Vector3d down = fwd.cross(right);
  Eigen::Matrix3d r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = fwd.transpose();
  Eigen::Matrix3d k;
  k << pose.focal_px, 0, 0.5 * pose.width, 0, pose.focal_px,
      0.5 * pose.height, 0, 0, 1;
  Eigen::Matrix3d rt;
  rt.col(0) = r.col(0);  // world x
  rt.col(1) = r.col(2);  // world z
  rt.col(2) = -r * pose.position;
  return Homography(k * rt);
}

CameraPose canonical_camera_pose() {
  CameraPose pose;
  pose.position = Eigen::Vector3d(2.0, -0.2, 0.04);
  pose.target = Eigen::Vector3d(0.25, 0.0, 0.0);
  pose.focal_px = 1500.0;
  return pose;
}

Homography canonical_camera() {
  return look_at_homography(canonical_camera_pose());
}

void write_homography(std::ostream& out, const Homography& h) {
  const auto& m = h.matrix();
  for (int r = 0; r < 3; ++r) {
    out << format_double(m(r, 0)) << ' ' << format_double(m(r, 1)) << ' '
        << format_double(m(r, 2)) << '\n';
  }
}

Homography read_homography(std::istream& in) {
  Eigen::Matrix3d m;
  for (int i = 0; i < 9; ++i) {
    std::string token;
    if (!(in >> token)) {
      throw std::invalid_argument("homography file needs 9 numbers");
    }
    m(i / 3, i % 3) = parse_double("homography", token);
  }
  std::string extra;
  if (in >> extra) {
    throw std::invalid_argument("homography file has more than 9 numbers");
  }
  return Homography(m);
}

int color_distance(const Color& a, const Color& b) {
  return std::max({std::abs(a.r - b.r), std::abs(a.g - b.g),
                   std::abs(a.b - b.b)});
}

RasterImage::RasterImage(int width, int height, Color fill)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("image dimensions must be positive");
  }
  data_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

Color RasterImage::at(int u, int v) const {
  if (!contains(u, v)) throw std::out_of_range("pixel outside image");
  const std::size_t i = (static_cast<std::size_t>(v) * width_ + u) * 3;
  return {data_[i], data_[i + 1], data_[i + 2]};
}

void RasterImage::set(int u, int v, const Color& c) {
  if (!contains(u, v)) throw std::out_of_range("pixel outside image");
  const std::size_t i = (static_cast<std::size_t>(v) * width_ + u) * 3;
  data_[i] = c.r;
  data_[i + 1] = c.g;
  data_[i + 2] = c.b;
}

void write_ppm(std::ostream& out, const RasterImage& image) {
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.bytes().data()),
            static_cast<std::streamsize>(image.bytes().size()));
}

RasterImage read_ppm(std::istream& in) {
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  if (!(in >> magic) || magic != "P6") {
    throw std::invalid_argument("not a binary PPM (P6)");
  }
  auto next_int = [&in](int& v) {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
      in >> std::ws;
    }
    if (!(in >> v)) throw std::invalid_argument("truncated PPM header");
  };
  next_int(w);
  next_int(h);
  next_int(maxval);
  if (maxval != 255) throw std::invalid_argument("only 8-bit PPM supported");
  in.get();
  RasterImage image(w, h);
  std::vector<char> buf(static_cast<std::size_t>(w) * h * 3);
  if (!in.read(buf.data(), static_cast<std::streamsize>(buf.size()))) {
    throw std::invalid_argument("truncated PPM data");
  }
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const std::size_t i = (static_cast<std::size_t>(v) * w + u) * 3;
      image.set(u, v,
                {static_cast<std::uint8_t>(buf[i]),
                 static_cast<std::uint8_t>(buf[i + 1]),
                 static_cast<std::uint8_t>(buf[i + 2])});
    }
  }
  return image;
}

void save_ppm(const std::filesystem::path& path, const RasterImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_ppm(out, image);
}

RasterImage load_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_ppm(in);
}

namespace {

double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace

RasterImage render_strip(const StripState& state, const Homography& h,
                         int width, int height, Color desk, Color strip,
                         double thickness_px) {
  RasterImage image(width, height, desk);
  const double half = 0.5 * thickness_px;
  std::vector<Vec2> px;
  px.reserve(state.positions.size());
  for (const auto& p : state.positions) px.push_back(h.project(p));
  for (std::size_t i = 0; i + 1 < px.size(); ++i) {
    const Vec2& a = px[i];
    const Vec2& b = px[i + 1];
    const int u0 = std::max(0, static_cast<int>(std::floor(std::min(a.x(), b.x()) - half)));
    const int u1 = std::min(width - 1, static_cast<int>(std::ceil(std::max(a.x(), b.x()) + half)));
    const int v0 = std::max(0, static_cast<int>(std::floor(std::min(a.y(), b.y()) - half)));
    const int v1 = std::min(height - 1, static_cast<int>(std::ceil(std::max(a.y(), b.y()) + half)));
    for (int v = v0; v <= v1; ++v) {
      for (int u = u0; u <= u1; ++u) {
        // Pixel (u, v) covers [u, u + 1) x [v, v + 1); test its center.
        if (distance_to_segment(Vec2(u + 0.5, v + 0.5), a, b) <= half) {
          image.set(u, v, strip);
        }
      }
    }
  }
  return image;
}

std::optional<LineHit> detect_touch_point(const RasterImage& image,
                                          const Vec2& grasped,
                                          const Vec2& fixed, Color desk,
                                          int threshold) {
  auto inside = [&](const Vec2& p) {
    return p.x() >= 0.0 && p.y() >= 0.0 && p.x() < image.width() &&
           p.y() < image.height();
  };
  if (!inside(grasped) || !inside(fixed)) {
    throw std::invalid_argument("search line must lie inside the image");
  }
  const Vec2 delta = fixed - grasped;
  const int steps = std::max(
      1, static_cast<int>(std::ceil(std::max(std::abs(delta.x()),
                                             std::abs(delta.y())))));
  for (int s = 0; s <= steps; ++s) {
    const Vec2 p = grasped + delta * (static_cast<double>(s) / steps);
    const int u = std::min(image.width() - 1, static_cast<int>(std::floor(p.x())));
    const int v = std::min(image.height() - 1, static_cast<int>(std::floor(p.y())));
    if (color_distance(image.at(u, v), desk) > threshold) {
      return LineHit{u, v, p};
    }
  }
  return std::nullopt;
}

SearchLine search_line(const Homography& h, double strip_length) {
  return {h.project(Vec2(strip_length, 0.0)), h.project(Vec2(0.0, 0.0))};
}

std::optional<double> detect_contact_x(const RasterImage& image,
                                       const Homography& h,
                                       double strip_length, Color desk,
                                       int threshold) {
  const SearchLine line = search_line(h, strip_length);
  const auto hit =
      detect_touch_point(image, line.grasped, line.fixed, desk, threshold);
  if (!hit) return std::nullopt;
  return h.unproject(hit->line_point).x();
}

}  // namespace stripfold
