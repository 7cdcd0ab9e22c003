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

#include "stripfold/strip_params.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "stripfold/key_value.hpp"

namespace stripfold {

StripParams StripParams::full_fidelity() { return StripParams{}; }

StripParams StripParams::desk_scale() {
  StripParams p;
  p.link_length = 0.01;
  p.n_links = 60;
  p.sphere_mass = 0.0033 * (p.link_length / 0.002);
  return p;
}

int StripParams::links() const {
  if (n_links > 0) return n_links;
  return static_cast<int>(std::lround(strip_length / link_length));
}

double StripParams::effective_stiffness() const {
  return joint_stiffness * stiffness_reference_length / link_length;
}

double StripParams::effective_damping() const {
  return joint_damping * stiffness_reference_length / link_length;
}

StripParams StripParams::with_material(double stiffness,
                                       double damping) const {
  StripParams p = *this;
  p.joint_stiffness = stiffness;
  p.joint_damping = damping;
  return p;
}

void validate(const StripParams& p, int min_links) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("StripParams: ") + what);
  };
  require(std::isfinite(p.link_length) && p.link_length > 0,
          "link_length must be positive");
  require(std::isfinite(p.sphere_radius) && p.sphere_radius > 0,
          "sphere_radius must be positive");
  require(std::isfinite(p.sphere_mass) && p.sphere_mass > 0,
          "sphere_mass must be positive");
  require(std::isfinite(p.strip_length) && p.strip_length > 0,
          "strip_length must be positive");
  require(p.n_links >= 0, "n_links must be non-negative");
  require(p.links() >= min_links, "too few links");
  require(std::abs(p.links() * p.link_length - p.strip_length) <=
              1e-9 * p.strip_length + 1e-12,
          "n_links * link_length must equal strip_length");
  require(std::isfinite(p.joint_stiffness) && p.joint_stiffness >= 0,
          "joint_stiffness must be non-negative");
  require(std::isfinite(p.joint_damping) && p.joint_damping >= 0,
          "joint_damping must be non-negative");
  require(std::isfinite(p.gravity), "gravity must be finite");
  require(std::isfinite(p.sim_dt) && p.sim_dt > 0, "sim_dt must be positive");
  require(p.substeps >= 1, "substeps must be >= 1");
  require(p.constraint_iterations >= 1, "constraint_iterations must be >= 1");
  require(std::isfinite(p.stiffness_reference_length) &&
              p.stiffness_reference_length > 0,
          "stiffness_reference_length must be positive");
  require(std::isfinite(p.max_gripper_speed) && p.max_gripper_speed > 0,
          "max_gripper_speed must be positive");
}

bool within_material_prior(double k, double b) {
  // Relative slack absorbs the rounding of exp/log in log-uniform sampling.
  constexpr double eps = 1e-12;
  return k >= kStiffnessMin * (1 - eps) && k <= kStiffnessMax * (1 + eps) &&
         b >= damping_min(k) * (1 - eps) && b <= damping_max(k) * (1 + eps);
}

void write_params(std::ostream& out, const StripParams& p) {
  out << "link_length = " << format_double(p.link_length) << '\n'
      << "sphere_radius = " << format_double(p.sphere_radius) << '\n'
      << "sphere_mass = " << format_double(p.sphere_mass) << '\n'
      << "strip_length = " << format_double(p.strip_length) << '\n'
      << "n_links = " << p.n_links << '\n'
      << "joint_stiffness = " << format_double(p.joint_stiffness) << '\n'
      << "joint_damping = " << format_double(p.joint_damping) << '\n'
      << "gravity = " << format_double(p.gravity) << '\n'
      << "sim_dt = " << format_double(p.sim_dt) << '\n'
      << "substeps = " << p.substeps << '\n'
      << "constraint_iterations = " << p.constraint_iterations << '\n'
      << "stiffness_reference_length = "
      << format_double(p.stiffness_reference_length) << '\n'
      << "max_gripper_speed = " << format_double(p.max_gripper_speed) << '\n'
      << "desk_enabled = " << (p.desk_enabled ? "true" : "false") << '\n';
}

bool assign_param(StripParams& p, const std::string& key,
                  const std::string& value) {
  if (key == "link_length") p.link_length = parse_double(key, value);
  else if (key == "sphere_radius") p.sphere_radius = parse_double(key, value);
  else if (key == "sphere_mass") p.sphere_mass = parse_double(key, value);
  else if (key == "strip_length") p.strip_length = parse_double(key, value);
  else if (key == "n_links") p.n_links = parse_int(key, value);
  else if (key == "joint_stiffness") p.joint_stiffness = parse_double(key, value);
  else if (key == "joint_damping") p.joint_damping = parse_double(key, value);
  else if (key == "gravity") p.gravity = parse_double(key, value);
  else if (key == "sim_dt") p.sim_dt = parse_double(key, value);
  else if (key == "substeps") p.substeps = parse_int(key, value);
  else if (key == "constraint_iterations")
    p.constraint_iterations = parse_int(key, value);
  else if (key == "stiffness_reference_length")
    p.stiffness_reference_length = parse_double(key, value);
  else if (key == "max_gripper_speed")
    p.max_gripper_speed = parse_double(key, value);
  else if (key == "desk_enabled") p.desk_enabled = parse_bool(key, value);
  else return false;
  return true;
}

StripParams read_params(std::istream& in, StripParams base) {
  for (const auto& [key, value] : parse_key_values(in)) {
    if (!assign_param(base, key, value)) {
      throw std::invalid_argument("unknown strip parameter '" + key + "'");
    }
  }
  return base;
}

StripParams load_params(const std::filesystem::path& path, StripParams base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_params(in, base);
}

void save_params(const std::filesystem::path& path, const StripParams& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_params(out, params);
}

}  // namespace stripfold
