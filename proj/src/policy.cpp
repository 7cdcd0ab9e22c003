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

#include "stripfold/policy.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "stripfold/key_value.hpp"

namespace stripfold {

PolicyWeights PolicyWeights::zeros(int n_inputs, int n_hidden) {
  return from_vector(
      std::vector<double>(parameter_count(n_inputs, n_hidden), 0.0), n_inputs,
      n_hidden);
}

PolicyWeights PolicyWeights::from_vector(std::vector<double> values,
                                         int n_inputs, int n_hidden) {
  PolicyWeights w;
  w.n_inputs = n_inputs;
  w.n_hidden = n_hidden;
  w.values = std::move(values);
  validate(w);
  return w;
}

void validate(const PolicyWeights& weights) {
  if (weights.n_inputs < 1 || weights.n_hidden < 1) {
    throw std::invalid_argument("policy architecture must be positive");
  }
  if (weights.size() !=
      PolicyWeights::parameter_count(weights.n_inputs, weights.n_hidden)) {
    throw std::invalid_argument(
        "policy has " + std::to_string(weights.size()) + " values, expected " +
        std::to_string(PolicyWeights::parameter_count(weights.n_inputs,
                                                      weights.n_hidden)));
  }
  for (double v : weights.values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("policy weights must be finite");
    }
  }
}

Observation observe(const StripState& state, const StripParams& params,
                    const ContactTolerances& tol) {
  return {state.gripper().x(), state.gripper().y(),
          detect_desk_contact_x(state, params, tol)};
}

double network_output(const PolicyWeights& weights,
                      const std::vector<double>& inputs, double input_scale) {
  const int ni = weights.n_inputs;
  const int nh = weights.n_hidden;
  if (static_cast<int>(inputs.size()) != ni) {
    throw std::invalid_argument("observation size does not match the policy");
  }
  using RowMajor =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const double* p = weights.values.data();
  Eigen::Map<const RowMajor> w1(p, nh, ni);
  Eigen::Map<const Eigen::VectorXd> b1(p + nh * ni, nh);
  Eigen::Map<const Eigen::VectorXd> w2(p + nh * ni + nh, nh);
  const double b2 = p[nh * ni + 2 * nh];
  const Eigen::VectorXd x =
      Eigen::Map<const Eigen::VectorXd>(inputs.data(), ni) / input_scale;
  const Eigen::VectorXd h = (w1 * x + b1).array().tanh().matrix();
  return w2.dot(h) + b2;
}

double act(const PolicyWeights& weights, const Observation& obs,
           double strip_length) {
  const std::vector<double> in{obs.gripper_x, obs.gripper_z, obs.contact_x};
  return std::numbers::pi * std::tanh(network_output(weights, in, strip_length));
}

Vec2 apply_action(const Vec2& gripper, double phi, double step_size,
                  double strip_length) {
  Vec2 t = gripper + step_size * Vec2(std::cos(phi), std::sin(phi));
  t.x() = std::clamp(t.x(), -0.2 * strip_length, 1.1 * strip_length);
  t.y() = std::max(t.y(), 0.0);
  return t;
}

void write_weights(std::ostream& out, const PolicyWeights& weights) {
  validate(weights);
  out << "stripfold-policy v1 " << weights.n_inputs << ' ' << weights.n_hidden
      << '\n';
  for (double v : weights.values) out << format_double(v) << '\n';
}

PolicyWeights read_weights(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("empty policy file");
  }
  std::istringstream header(line);
  std::string magic, version;
  int ni = 0, nh = 0;
  if (!(header >> magic >> version >> ni >> nh) ||
      magic != "stripfold-policy" || version != "v1") {
    throw std::invalid_argument("bad policy header: " + line);
  }
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    values.push_back(parse_double("weight", line));
  }
  return PolicyWeights::from_vector(std::move(values), ni, nh);
}

void save_weights(const std::filesystem::path& path,
                  const PolicyWeights& weights) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_weights(out, weights);
}

PolicyWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_weights(in);
}

}  // namespace stripfold
