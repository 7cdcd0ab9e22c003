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

#ifndef STRIPFOLD_STRIP_PARAMS_HPP_
#define STRIPFOLD_STRIP_PARAMS_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>

namespace stripfold {

// Lower end of the admissible joint damping for a given joint stiffness.
// The upper end is 50 times this value.
constexpr double damping_min(double stiffness) {
  return 3e-3 * stiffness + 3.5e-4;
}
constexpr double damping_max(double stiffness) {
  return 50.0 * damping_min(stiffness);
}

inline constexpr double kStiffnessMin = 0.02;
inline constexpr double kStiffnessMax = 0.3;
inline constexpr double kDampingSpan = 50.0;

// Physical description of one simulated strip.
//
// joint_stiffness and joint_damping are the per-joint constants of a chain
// whose spheres are stiffness_reference_length apart (2 mm, the calibrated
// model). When the strip is discretized with a different link_length the
// simulator rescales them by stiffness_reference_length / link_length, so the
// continuum bending rigidity does not depend on the resolution. sphere_mass
// is taken literally; use desk_scale() to get a coarse chain with the same
// mass per unit length.
struct StripParams {
  double link_length = 0.002;
  double sphere_radius = 0.0005;
  double sphere_mass = 0.0033;
  double strip_length = 0.6;
  int n_links = 0;  // 0: derived as strip_length / link_length
  double joint_stiffness = 0.1;
  double joint_damping = damping_min(0.1);
  double gravity = 9.81;
  double sim_dt = 0.005;
  int substeps = 10;
  int constraint_iterations = 100;
  double stiffness_reference_length = 0.002;
  double max_gripper_speed = 0.1;
  bool desk_enabled = true;

  // 300 links of 2 mm.
  static StripParams full_fidelity();
  // 60 links of 1 cm, mass per unit length preserved.
  static StripParams desk_scale();

  int links() const;
  int spheres() const { return links() + 1; }
  double effective_stiffness() const;
  double effective_damping() const;

  // Same strip with a different material.
  StripParams with_material(double stiffness, double damping) const;
};

// Throws std::invalid_argument on non-positive geometry, inconsistent
// link count, or non-finite values. min_links is 3 for folding strips; the
// simulator core also accepts shorter chains (e.g. a single pendulum link).
void validate(const StripParams& params, int min_links = 3);

// True when (k, b) lies inside the calibrated material range.
bool within_material_prior(double stiffness, double damping);

// Flat "key = value" text, keys equal to the field names, SI units.
void write_params(std::ostream& out, const StripParams& params);
StripParams read_params(std::istream& in, StripParams base = {});
StripParams load_params(const std::filesystem::path& path,
                        StripParams base = {});
void save_params(const std::filesystem::path& path, const StripParams& params);

// Applies one "key = value" assignment; returns false for unknown keys.
bool assign_param(StripParams& params, const std::string& key,
                  const std::string& value);

}  // namespace stripfold

#endif  // STRIPFOLD_STRIP_PARAMS_HPP_
