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

#include "sim_checks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stripfold/paths.hpp"
#include "stripfold/reward.hpp"

namespace stripfold::testing {

StepInvariants driven_fold_invariants(
    const std::vector<StripParams>& materials) {
  StepInvariants out;
  out.min_z = 1e9;
  for (const StripParams& params : materials) {
    const double L = params.strip_length;
    for (const GripperPath& path : {triangular_path(L), circular_path(L)}) {
      StripSimulator sim(params);
      StripState s = sim.init_flat();
      const double ds = kBaselineSpeed * params.sim_dt;
      const int n = static_cast<int>(std::ceil(path.total_length() / ds));
      for (int i = 1; i <= n; ++i) {
        sim.step(s, path.at(i * ds));
        out.max_link_error =
            std::max(out.max_link_error, max_link_error(s, params));
        out.max_pin_offset =
            std::max(out.max_pin_offset, s.positions[0].norm());
        for (const Vec2& p : s.positions) out.min_z = std::min(out.min_z, p.y());
        ++out.steps;
      }
    }
  }
  return out;
}

double max_energy_increase(const StripParams& params, double start_height,
                           int steps) {
  EpisodeConfig cfg;
  cfg.start_height = start_height;
  StripState s = lifted_start_state(params, cfg);
  for (Vec2& v : s.velocities) v.setZero();
  s.grasped = false;
  StripSimulator sim(params);
  double e = mechanical_energy(s, params);
  double worst = -1e300;
  for (int i = 0; i < steps; ++i) {
    sim.step(s, s.gripper());
    const double next = mechanical_energy(s, params);
    worst = std::max(worst, next - e);
    e = next;
  }
  return worst;
}

double settled_asymmetry(const StripParams& params, double separation,
                         int settle_steps) {
  StripParams p = params;
  p.desk_enabled = false;
  StripSimulator sim(p);
  StripState s = sim.init_flat();
  Vec2 g = s.gripper();
  const double dx = 0.1 * p.max_gripper_speed * p.sim_dt;
  while (g.x() > separation) {
    g.x() = std::max(separation, g.x() - dx);
    sim.step(s, g);
  }
  for (int i = 0; i < settle_steps; ++i) sim.step(s, g);
  const int n = s.links();
  double asym = 0.0;
  for (int i = 0; i <= n; ++i) {
    const Vec2& q = s.positions[n - i];
    asym = std::max(asym, (s.positions[i] - Vec2(separation - q.x(), q.y())).norm());
  }
  return asym;
}

PendulumPeriod pendulum_period(double link_length, double amplitude) {
  StripParams p;
  p.link_length = link_length;
  p.strip_length = link_length;
  p.n_links = 1;
  p.desk_enabled = false;
  StripSimulator sim(p, 1);
  StripState s = sim.init_flat();
  s.grasped = false;
  s.positions[1] = Vec2(link_length * std::sin(amplitude),
                        -link_length * std::cos(amplitude));
  // Zero crossings of the bob's x coordinate, linearly interpolated.
  std::vector<double> crossings;
  double prev_x = s.positions[1].x();
  double prev_t = s.time;
  for (int i = 0; i < 200000 && crossings.size() < 11; ++i) {
    sim.step(s, s.gripper());
    const double x = s.positions[1].x();
    if ((prev_x > 0) != (x > 0)) {
      crossings.push_back(prev_t + (s.time - prev_t) * prev_x / (prev_x - x));
    }
    prev_x = x;
    prev_t = s.time;
  }
  PendulumPeriod out;
  out.analytic = 2.0 * std::numbers::pi * std::sqrt(link_length / p.gravity);
  if (crossings.size() >= 2) {
    out.measured = 2.0 * (crossings.back() - crossings.front()) /
                   static_cast<double>(crossings.size() - 1);
  }
  return out;
}

double recomputed_total_reward(const EpisodeResult& result,
                               const RewardConfig& config,
                               double strip_length) {
  const double floor = -(config.overtime_penalty + strip_length);
  if (result.failed) return floor;
  const double n = result.steps > 0 ? result.steps : 1;
  double total = 0.0;
  for (double f : result.force_trace) total -= config.force_scale * std::abs(f) / n;
  if (!result.touched) return total + floor;
  total -= std::abs(result.d);
  if (result.overtime) total -= config.overtime_penalty;
  return total;
}

}  // namespace stripfold::testing
