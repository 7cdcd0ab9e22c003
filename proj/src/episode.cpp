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

#include "stripfold/episode.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "stripfold/key_value.hpp"

namespace stripfold {

FoldingDriver::FoldingDriver(const StripParams& params,
                             const ContactTolerances& contact)
    : sim_(params), contact_(contact) {
  state_ = sim_.init_flat();
}

FoldingDriver::FoldingDriver(const StripParams& params,
                             const ContactTolerances& contact, StripState start)
    : sim_(params), contact_(contact), state_(std::move(start)) {
  if (state_.links() != sim_.params().links()) {
    throw std::invalid_argument("start state does not match the strip");
  }
}

double FoldingDriver::contact_x() const {
  return detect_desk_contact_x(state_, sim_.params(), contact_);
}

bool FoldingDriver::advance(std::span<const Vec2> sim_targets) {
  if (touch_.touched) return true;
  double f_sum = 0.0;
  int executed = 0;
  for (const Vec2& target : sim_targets) {
    f_sum += sim_.step(state_, target).f_x;
    ++executed;
    touch_ = detect_layer_touch(state_, sim_.params(), contact_);
    if (touch_.touched) break;
  }
  TrajectoryRecord row;
  row.time = state_.time;
  row.gripper_x = state_.gripper().x();
  row.gripper_z = state_.gripper().y();
  row.contact_x = contact_x();
  row.f_x = executed > 0 ? f_sum / executed : 0.0;
  row.touched = touch_.touched;
  row.d = touch_.touched ? touch_.d : 0.0;
  rows_.push_back(row);
  forces_.push_back(row.f_x);
  return touch_.touched;
}

void FoldingDriver::move_unrecorded(const Vec2& target, double speed,
                                    double settle_time) {
  const double dt = sim_.params().sim_dt;
  const Vec2 from = state_.gripper();
  const double dist = (target - from).norm();
  const int n = static_cast<int>(std::ceil(dist / (speed * dt)));
  for (int j = 1; j <= n; ++j) {
    sim_.step(state_, from + (target - from) * (static_cast<double>(j) / n));
  }
  const int rest = static_cast<int>(std::ceil(settle_time / dt));
  for (int j = 0; j < rest; ++j) sim_.step(state_, target);
}

void write_episode_config(std::ostream& out, const EpisodeConfig& c,
                          const std::string& prefix) {
  out << prefix << "force_scale = " << format_double(c.reward.force_scale)
      << '\n'
      << prefix << "overtime_penalty = "
      << format_double(c.reward.overtime_penalty) << '\n'
      << prefix << "horizon = " << c.horizon << '\n'
      << prefix << "control_period = " << c.control_period << '\n'
      << prefix << "step_size = " << format_double(c.step_size) << '\n'
      << prefix << "start_height = " << format_double(c.start_height) << '\n'
      << prefix << "lift_speed = " << format_double(c.lift_speed) << '\n'
      << prefix << "settle_time = " << format_double(c.settle_time) << '\n'
      << prefix << "ground_tolerance = " << format_double(c.contact.ground)
      << '\n'
      << prefix << "touch_tolerance = " << format_double(c.contact.touch)
      << '\n'
      << prefix << "touch_gap = " << c.contact.gap << '\n';
}

bool assign_episode_key(EpisodeConfig& c, const std::string& key,
                        const std::string& value) {
  if (key == "force_scale") c.reward.force_scale = parse_double(key, value);
  else if (key == "overtime_penalty")
    c.reward.overtime_penalty = parse_double(key, value);
  else if (key == "horizon") c.horizon = parse_int(key, value);
  else if (key == "control_period") c.control_period = parse_int(key, value);
  else if (key == "step_size") c.step_size = parse_double(key, value);
  else if (key == "start_height") c.start_height = parse_double(key, value);
  else if (key == "lift_speed") c.lift_speed = parse_double(key, value);
  else if (key == "settle_time") c.settle_time = parse_double(key, value);
  else if (key == "ground_tolerance") c.contact.ground = parse_double(key, value);
  else if (key == "touch_tolerance") c.contact.touch = parse_double(key, value);
  else if (key == "touch_gap") c.contact.gap = parse_int(key, value);
  else return false;
  return true;
}

void write_trajectory_csv(std::ostream& out,
                          const std::vector<TrajectoryRecord>& rows) {
  out << "time_s,gripper_x,gripper_z,x_c,f_x,touched,d_if_touched\n";
  for (const auto& r : rows) {
    out << format_double(r.time) << ',' << format_double(r.gripper_x) << ','
        << format_double(r.gripper_z) << ',' << format_double(r.contact_x)
        << ',' << format_double(r.f_x) << ',' << (r.touched ? 1 : 0) << ',';
    if (r.touched) out << format_double(r.d);
    out << '\n';
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::vector<TrajectoryRecord> read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      line != "time_s,gripper_x,gripper_z,x_c,f_x,touched,d_if_touched") {
    throw std::invalid_argument("missing trajectory header");
  }
  std::vector<TrajectoryRecord> rows;
  while (std::getline(in, line)) {
    if (line.empty()) break;
    const auto c = split_csv(line);
    if (c.size() != 7) {
      throw std::invalid_argument("bad trajectory row: " + line);
    }
    TrajectoryRecord r;
    r.time = parse_double("time_s", c[0]);
    r.gripper_x = parse_double("gripper_x", c[1]);
    r.gripper_z = parse_double("gripper_z", c[2]);
    r.contact_x = parse_double("x_c", c[3]);
    r.f_x = parse_double("f_x", c[4]);
    r.touched = parse_bool("touched", c[5]);
    if (r.touched) r.d = parse_double("d_if_touched", c[6]);
    rows.push_back(r);
  }
  return rows;
}

void write_episode_dump(std::ostream& out, const EpisodeResult& result) {
  write_trajectory_csv(out, result.trajectory);
  out << "\nsummary,touched,d,N,total_reward\n";
  out << "summary," << (result.touched ? 1 : 0) << ','
      << format_double(result.d) << ',' << result.steps << ','
      << format_double(result.total_reward) << '\n';
}

void save_episode_dump(const std::filesystem::path& path,
                       const EpisodeResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_episode_dump(out, result);
}

}  // namespace stripfold
