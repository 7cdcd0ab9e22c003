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

#ifndef STRIPFOLD_REWARD_HPP_
#define STRIPFOLD_REWARD_HPP_

#include <functional>
#include <vector>

#include "stripfold/episode.hpp"
#include "stripfold/policy.hpp"

namespace stripfold {

// -a |f_x| / N.
double intermediate_reward(double f_x, int n, double a);

// -|d| for a touch. A touchless event gets the failure value -(c_H + L)
// only through assign_rewards; here it is rejected.
double terminal_reward(const TouchEvent& event);

// Lower bound of every terminal reward.
double failure_reward(const RewardConfig& config, double strip_length);

// Fills intermediate_reward_sum, terminal_reward and total_reward from
// force_trace, touch, overtime and failed.
void assign_rewards(EpisodeResult& result, const RewardConfig& config,
                    double strip_length);

// Flat strip with the gripper lifted along x + z = L to
// (L - start_height, start_height) and left to settle.
StripState lifted_start_state(const StripParams& params,
                              const EpisodeConfig& config);

using Controller = std::function<double(const Observation&)>;
// Called with the state before the first control step (step 0) and after
// every control step.
using StateObserver = std::function<void(const StripState&, int step)>;

// Closed-loop episode from start (lifted_start_state when null): up to
// horizon control steps with controller angles, then phi = pi until touch,
// stall, or the x-limit. Simulator divergence yields a failed episode.
EpisodeResult run_controlled(const Controller& controller,
                             const StripParams& params,
                             const EpisodeConfig& config,
                             const StripState* start = nullptr,
                             const StateObserver& observer = {});

EpisodeResult run_episode(const PolicyWeights& weights,
                          const StripParams& params,
                          const EpisodeConfig& config,
                          const StripState* start = nullptr);

// Re-runs an episode from its logged action sequence.
EpisodeResult replay_actions(const std::vector<double>& actions,
                             const StripParams& params,
                             const EpisodeConfig& config,
                             const StripState* start = nullptr);

}  // namespace stripfold

#endif  // STRIPFOLD_REWARD_HPP_
