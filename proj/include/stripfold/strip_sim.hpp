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

#ifndef STRIPFOLD_STRIP_SIM_HPP_
#define STRIPFOLD_STRIP_SIM_HPP_

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "stripfold/strip_params.hpp"

namespace stripfold {

using Vec2 = Eigen::Vector2d;  // (x, z)

// Sphere 0 is the fixed end pinned at the origin, sphere n the grasped end.
// z is the height of the sphere centers above their resting height, i.e. the
// desk surface lies at z = -sphere_radius and a sphere resting on top of a
// grounded one has its center at z = 2 * sphere_radius.
struct StripState {
  std::vector<Vec2> positions;
  std::vector<Vec2> velocities;
  double time = 0.0;
  // When false the grasped end is released and moves freely.
  bool grasped = true;

  const Vec2& gripper() const { return positions.back(); }
  int links() const { return static_cast<int>(positions.size()) - 1; }
};

struct TouchEvent {
  bool touched = false;
  int touch_sphere_index = -1;
  double touch_x = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double d = 0.0;
};

// Horizontal force the pin exerts on the fixed end, averaged over one step.
struct ForceReadout {
  double f_x = 0.0;
};

struct ContactTolerances {
  double ground = 1e-4;
  double touch = 1e-4;
  int gap = 2;
};

// Raised when the integrator produces non-finite values.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, std::int64_t step_index)
      : std::runtime_error(what + " (step " + std::to_string(step_index) + ")"),
        step_index_(step_index) {}
  std::int64_t step_index() const { return step_index_; }

 private:
  std::int64_t step_index_;
};

// Planar chain of point masses with inextensible links, bending springs and
// dampers at interior joints, a frictionless desk (sphere centers stay at
// z >= 0), a pinned fixed end and a kinematically driven grasped end.
//
// Each substep integrates gravity, bending and damping with linearized
// backward Euler, then projects the positions onto the link-length manifold
// with Newton iterations on the tridiagonal chain system. The velocity solve
// carries a stiff link-stretch term so the predicted motion is already
// tangent to the links. Desk contact is an active set at both levels:
// supported spheres cannot move below the desk and keep their support until
// the contact force turns tensile.
//
// Instances own scratch buffers and are not shareable between threads; use
// one simulator per rollout.
class StripSimulator {
 public:
  explicit StripSimulator(StripParams params, int min_links = 3);

  const StripParams& params() const { return params_; }

  static Vec2 pin_point() { return Vec2::Zero(); }

  // Straight strip on the desk along +x, zero velocities.
  StripState init_flat() const;

  // Advances by params().sim_dt. The grasped end moves linearly to
  // gripper_target over the substeps; ignored when the end is released.
  ForceReadout step(StripState& state, const Vec2& gripper_target);

  std::int64_t steps_taken() const { return step_count_; }

 private:
  void substep(StripState& state, const Vec2& grip_from, const Vec2& grip_to,
               double& fx_accum);
  void assemble_and_solve_velocities(StripState& state, const Vec2& grip_vel);
  double project(std::vector<Vec2>& x);

  StripParams params_;
  int n_ = 0;
  double dt_ = 0.0;
  double k_ = 0.0;
  double b_ = 0.0;
  std::int64_t step_count_ = 0;

  // Scratch.
  std::vector<Vec2> x_old_;
  std::vector<Vec2> x_pass_;
  std::vector<Vec2> impulse_pass_;
  std::vector<Vec2> x_pred_;
  std::vector<Vec2> impulse_;
  std::vector<Vec2> grad_prev_, grad_mid_, grad_next_;
  std::vector<double> theta_;
  std::vector<Eigen::Vector2d> w_;  // inverse mass per axis
  std::vector<char> locked_;
  std::vector<std::array<double, 6>> band_, band_free_;
  std::vector<double> rhs_, rhs_free_;
  std::vector<char> desk_active_;
  std::vector<Vec2> normals_;
  std::vector<double> tri_diag_, tri_off_, tri_rhs_, tri_tmp_;
  Vec2 pin_normal_ = Vec2::UnitX();
  Vec2 v_solved_first_ = Vec2::Zero();
  double pin_force_x_ = 0.0;
};

// Signed bend angle at interior joint i (between links i-1 and i).
double bend_angle(const StripState& state, int joint);

// Kinetic + gravitational + bending energy of the non-pinned spheres.
double mechanical_energy(const StripState& state, const StripParams& params);

// max_i | |p_{i+1} - p_i| - link_length |.
double max_link_error(const StripState& state, const StripParams& params);

// Number of spheres in the contiguous grounded run starting at the fixed end.
int grounded_run_length(const StripState& state, const StripParams& params,
                        const ContactTolerances& tol = {});

// Liftoff x-coordinate: largest x over the grounded run. This is the visual
// feedback feature.
double detect_desk_contact_x(const StripState& state, const StripParams& params,
                             const ContactTolerances& tol = {});

// Grounded means z <= tol.ground.
//
// Geometric layer-touch test: a hanging sphere (index at least gap beyond the
// grounded run) at or below 2 * sphere_radius + tol.touch over the laying
// layer. Sphere contacts are not simulated, so the test is purely geometric.
TouchEvent detect_layer_touch(const StripState& state,
                              const StripParams& params,
                              const ContactTolerances& tol = {});

// Maximum height of the strip after a slow fold that brings the grasped end
// onto the fixed end.
double folded_height(const StripParams& params);

}  // namespace stripfold

#endif  // STRIPFOLD_STRIP_SIM_HPP_
