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

#include "stripfold/reward.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stripfold {

double intermediate_reward(double f_x, int n, double a) {
  if (n < 1) throw std::invalid_argument("N must be at least 1");
  if (a < 0.0) throw std::invalid_argument("force scale must be >= 0");
  return -a * std::abs(f_x) / n;
}

double terminal_reward(const TouchEvent& event) {
  if (!event.touched) {
    throw std::invalid_argument("terminal reward needs a layer touch");
  }
  return -std::abs(event.d);
}

double failure_reward(const RewardConfig& config, double strip_length) {
  return -(config.overtime_penalty + strip_length);
}

void assign_rewards(EpisodeResult& result, const RewardConfig& config,
                    double strip_length) {
  if (result.failed) {
    result.intermediate_reward_sum = 0.0;
    result.terminal_reward = failure_reward(config, strip_length);
    result.total_reward = result.terminal_reward;
    return;
  }
  const int n = std::max(1, result.steps);
  double sum = 0.0;
  for (double f : result.force_trace) {
    sum += intermediate_reward(f, n, config.force_scale);
  }
  result.intermediate_reward_sum = sum;
  if (result.touched) {
    result.terminal_reward = terminal_reward(result.touch);
    if (result.overtime) result.terminal_reward -= config.overtime_penalty;
  } else {
    result.terminal_reward = failure_reward(config, strip_length);
  }
  result.total_reward = result.intermediate_reward_sum + result.terminal_reward;
}

StripState lifted_start_state(const StripParams& params,
                              const EpisodeConfig& config) {
  const double L = params.strip_length;
  const double h = config.start_height;
  if (!(h >= 0.0 && h < L)) {
    throw std::invalid_argument("start height must lie in [0, strip_length)");
  }
  FoldingDriver driver(params, config.contact);
  driver.move_unrecorded(Vec2(L - h, h), config.lift_speed,
                         config.settle_time);
  return driver.state();
}

EpisodeResult run_controlled(const Controller& controller,
                             const StripParams& params,
                             const EpisodeConfig& config,
                             const StripState* start,
                             const StateObserver& observer) {
  if (config.control_period < 1 || config.horizon < 0 ||
      !(config.step_size > 0.0)) {
    throw std::invalid_argument("invalid episode configuration");
  }
  const double L = params.strip_length;
  const double x_limit = -0.2 * L;
  EpisodeResult r;
  try {
    FoldingDriver driver(params, config.contact,
                         start ? *start : lifted_start_state(params, config));
    std::vector<Vec2> targets(config.control_period);
    auto control_step = [&](double phi) {
      const Vec2 g = driver.state().gripper();
      const Vec2 t = apply_action(g, phi, config.step_size, L);
      for (int j = 0; j < config.control_period; ++j) {
        targets[j] = g + (t - g) * (static_cast<double>(j + 1) /
                                    config.control_period);
      }
      r.actions.push_back(phi);
      const bool hit = driver.advance(targets);
      if (observer) observer(driver.state(), static_cast<int>(r.actions.size()));
      return hit;
    };
    if (observer) observer(driver.state(), 0);

    bool touched = false;
    for (int c = 0; c < config.horizon && !touched; ++c) {
      const Vec2& g = driver.state().gripper();
      touched = control_step(controller({g.x(), g.y(), driver.contact_x()}));
    }
    if (!touched) {
      r.overtime = true;
      const int max_steps =
          static_cast<int>(std::ceil(1.3 * L / config.step_size)) + 1;
      for (int c = 0; c < max_steps && !touched; ++c) {
        const Vec2 before = driver.state().gripper();
        if (before.x() <= x_limit + 1e-12) break;
        touched = control_step(std::numbers::pi);
        if ((driver.state().gripper() - before).norm() <
            1e-3 * config.step_size) {
          break;
        }
      }
    }
    r.trajectory = driver.trajectory();
    r.force_trace = driver.force_trace();
    r.steps = static_cast<int>(r.trajectory.size());
    r.touched = touched;
    r.touch = driver.touch();
    r.d = touched ? r.touch.d : 0.0;
  } catch (const SimulationError&) {
    r.failed = true;
    r.touched = false;
    r.d = 0.0;
  }
  assign_rewards(r, config.reward, L);
  return r;
}

EpisodeResult run_episode(const PolicyWeights& weights,
                          const StripParams& params,
                          const EpisodeConfig& config,
                          const StripState* start) {
  validate(weights);
  const double L = params.strip_length;
  return run_controlled(
      [&](const Observation& obs) { return act(weights, obs, L); }, params,
      config, start);
}

EpisodeResult replay_actions(const std::vector<double>& actions,
                             const StripParams& params,
                             const EpisodeConfig& config,
                             const StripState* start) {
  std::size_t next = 0;
  return run_controlled(
      [&](const Observation&) {
        return next < actions.size() ? actions[next++] : std::numbers::pi;
      },
      params, config, start);
}

}  // namespace stripfold
