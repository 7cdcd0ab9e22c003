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

#ifndef STRIPFOLD_EPISODE_HPP_
#define STRIPFOLD_EPISODE_HPP_

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "stripfold/strip_sim.hpp"

namespace stripfold {

// One row of the trajectory log, recorded once per control step.
struct TrajectoryRecord {
  double time = 0.0;
  double gripper_x = 0.0;
  double gripper_z = 0.0;
  double contact_x = 0.0;
  double f_x = 0.0;  // mean over the control step
  bool touched = false;
  double d = 0.0;  // meaningful only when touched
};

// Outcome of one folding rollout (policy or fixed path).
struct EpisodeResult {
  bool touched = false;
  bool failed = false;    // simulator diverged
  bool overtime = false;  // needed the forced horizontal completion
  double d = 0.0;
  TouchEvent touch;
  int steps = 0;  // realized control steps N
  std::vector<double> force_trace;
  std::vector<double> actions;  // commanded angle per control step, radians
  std::vector<TrajectoryRecord> trajectory;
  double intermediate_reward_sum = 0.0;
  double terminal_reward = 0.0;
  double total_reward = 0.0;
};

struct RewardConfig {
  double force_scale = 0.01;      // a
  double overtime_penalty = 0.1;  // c_H
};

struct EpisodeConfig {
  RewardConfig reward;
  int horizon = 400;       // H, control steps
  int control_period = 10; // simulator steps per control step
  double step_size = 0.005;
  double start_height = 0.1;
  // Unrecorded lift to the start point and rest before the first action.
  double lift_speed = 0.05;
  double settle_time = 1.0;
  ContactTolerances contact;
};

// "key = value" lines, each key prefixed with prefix.
void write_episode_config(std::ostream& out, const EpisodeConfig& config,
                          const std::string& prefix = "");
// Applies one assignment (key without prefix); false for unknown keys.
bool assign_episode_key(EpisodeConfig& config, const std::string& key,
                        const std::string& value);

// Steps a privately owned simulator in control periods, checks for layer
// touch after every simulator step and records one trajectory row per
// control step.
class FoldingDriver {
 public:
  FoldingDriver(const StripParams& params, const ContactTolerances& contact);
  FoldingDriver(const StripParams& params, const ContactTolerances& contact,
                StripState start);

  const StripParams& params() const { return sim_.params(); }
  const StripState& state() const { return state_; }
  bool touched() const { return touch_.touched; }
  const TouchEvent& touch() const { return touch_; }
  const std::vector<TrajectoryRecord>& trajectory() const { return rows_; }
  const std::vector<double>& force_trace() const { return forces_; }

  // One control step: one simulator step per target, stopping early on
  // touch. Returns true once the layers touched.
  bool advance(std::span<const Vec2> sim_targets);

  // Unrecorded motion along a straight line at the given speed, without
  // touch checks, followed by a rest of settle_time seconds.
  void move_unrecorded(const Vec2& target, double speed, double settle_time);

  double contact_x() const;

 private:
  StripSimulator sim_;
  ContactTolerances contact_;
  StripState state_;
  TouchEvent touch_;
  std::vector<TrajectoryRecord> rows_;
  std::vector<double> forces_;
};

// CSV with header "time_s,gripper_x,gripper_z,x_c,f_x,touched,d_if_touched".
// d_if_touched is empty for rows without a touch.
void write_trajectory_csv(std::ostream& out,
                          const std::vector<TrajectoryRecord>& rows);
std::vector<TrajectoryRecord> read_trajectory_csv(std::istream& in);

// Trajectory log followed by a blank line and
// "summary,touched,d,N,total_reward" plus one value row.
void write_episode_dump(std::ostream& out, const EpisodeResult& result);
void save_episode_dump(const std::filesystem::path& path,
                       const EpisodeResult& result);

}  // namespace stripfold

#endif  // STRIPFOLD_EPISODE_HPP_
