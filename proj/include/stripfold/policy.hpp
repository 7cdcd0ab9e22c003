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

#ifndef STRIPFOLD_POLICY_HPP_
#define STRIPFOLD_POLICY_HPP_

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "stripfold/strip_sim.hpp"

namespace stripfold {

struct Observation {
  double gripper_x = 0.0;
  double gripper_z = 0.0;
  double contact_x = 0.0;
};

// Flat parameters of a one-hidden-layer tanh network with a scalar output.
// Layout: hidden weights (row-major, one row per hidden neuron), hidden
// biases, output weights, output bias.
struct PolicyWeights {
  int n_inputs = 3;
  int n_hidden = 20;
  std::vector<double> values;

  static int parameter_count(int n_inputs, int n_hidden) {
    return n_inputs * n_hidden + n_hidden + n_hidden + 1;
  }
  static PolicyWeights zeros(int n_inputs = 3, int n_hidden = 20);
  static PolicyWeights from_vector(std::vector<double> values,
                                   int n_inputs = 3, int n_hidden = 20);
  int size() const { return static_cast<int>(values.size()); }
};

// Throws std::invalid_argument on a length mismatch or non-finite entries.
void validate(const PolicyWeights& weights);

Observation observe(const StripState& state, const StripParams& params,
                    const ContactTolerances& tol = {});

// Raw network output before the angle squashing; inputs are divided by
// input_scale.
double network_output(const PolicyWeights& weights,
                      const std::vector<double>& inputs, double input_scale);

// Gripper motion angle phi = pi * tanh(output), measured from +x towards +z.
double act(const PolicyWeights& weights, const Observation& obs,
           double strip_length);

// gripper + step_size * (cos phi, sin phi), clamped to z >= 0 and
// x in [-0.2 L, 1.1 L].
Vec2 apply_action(const Vec2& gripper, double phi, double step_size,
                  double strip_length);

// "stripfold-policy v1 <n_inputs> <n_hidden>" then one value per line.
void write_weights(std::ostream& out, const PolicyWeights& weights);
PolicyWeights read_weights(std::istream& in);
void save_weights(const std::filesystem::path& path,
                  const PolicyWeights& weights);
PolicyWeights load_weights(const std::filesystem::path& path);

}  // namespace stripfold

#endif  // STRIPFOLD_POLICY_HPP_
