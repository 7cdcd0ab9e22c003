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

#ifndef STRIPFOLD_TRAINER_HPP_
#define STRIPFOLD_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "stripfold/episode.hpp"
#include "stripfold/policy.hpp"

namespace stripfold {

// Stiffness uniform in [k_min, k_max]; damping b = r * b_min(k) with the
// ratio r log-uniform in [ratio_min, ratio_max].
struct MaterialPrior {
  double k_min = kStiffnessMin;
  double k_max = kStiffnessMax;
  double ratio_min = 1.0;
  double ratio_max = kDampingSpan;
};

void validate(const MaterialPrior& prior);

// base with a material drawn from the prior.
StripParams sample_prior(const MaterialPrior& prior, const StripParams& base,
                         std::mt19937_64& rng);

// Independent seeds for the named random streams of one master seed.
enum class SeedStream : std::uint64_t {
  kSearch = 1,
  kTrainingMaterials = 2,
  kHeldOut = 3,
};
std::uint64_t derive_seed(std::uint64_t master, SeedStream stream);

struct TrainerConfig {
  int lambda = 16;
  double sigma0 = 0.5;
  int generations = 150;
  int samples_per_eval = 8;  // M
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency
  StripParams base = StripParams::desk_scale();
  MaterialPrior prior;
  EpisodeConfig episode;
};

void validate(const TrainerConfig& config);

// "key = value" snapshot with every field, including the strip and episode
// settings (prefixed "strip." and "episode.").
void write_trainer_config(std::ostream& out, const TrainerConfig& config);
TrainerConfig read_trainer_config(std::istream& in, TrainerConfig base = {});
// Applies one assignment; false for unknown keys.
bool assign_trainer_key(TrainerConfig& config, const std::string& key,
                        const std::string& value);

struct LedgerRow {
  int generation = 0;
  int candidate = 0;
  int theta_index = 0;
  double k = 0.0;
  double b = 0.0;
  double reward = 0.0;
  bool touched = false;
  bool failed = false;
  double d = 0.0;
};

struct GenerationStats {
  int generation = 0;
  double mean_fitness = 0.0;
  double max_fitness = 0.0;
  double best_so_far = 0.0;
  double sigma = 0.0;
  int failures = 0;
};

struct TrainingRun {
  TrainerConfig config;
  std::uint64_t search_seed = 0;
  std::uint64_t material_seed = 0;
  PolicyWeights best;
  // Search distribution mean after the last update.
  PolicyWeights mean;
  double best_fitness = 0.0;
  int best_generation = -1;
  int best_candidate = -1;
  std::vector<GenerationStats> stats;
  std::vector<LedgerRow> ledger;
  std::vector<std::vector<StripParams>> theta_batches;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mean total reward over the batch. starts, when given, holds the lifted
// start state for each batch entry.
double evaluate_candidate(const PolicyWeights& weights,
                          const std::vector<StripParams>& theta_batch,
                          const EpisodeConfig& episode,
                          const std::vector<StripState>* starts = nullptr,
                          int threads = 1);

// Invoked after every generation with the run so far.
using GenerationCallback = std::function<void(const TrainingRun&)>;

// CMA-ES on the policy weights starting from zero, maximizing the mean
// episode reward over a fresh material batch per generation that all
// candidates share. Throws TrainingError when more than half of a
// generation's episodes diverge.
TrainingRun train(const TrainerConfig& config,
                  const GenerationCallback& on_generation = {});

void write_ledger_csv(std::ostream& out, const std::vector<LedgerRow>& rows,
                      bool header = true);
void write_stats_csv(std::ostream& out,
                     const std::vector<GenerationStats>& rows,
                     bool header = true);

// Touch-position envelope under horizontal gripper motion.
struct EnvelopeRow {
  double height = 0.0;
  double k = 0.0;
  double b = 0.0;
  bool touched = false;  // false rows are censored
  double x_touch = 0.0;
};

struct FoldHeightGrid {
  std::vector<double> stiffness;
  std::vector<double> damping_ratio;  // b / b_min(k)
  static FoldHeightGrid uniform(const MaterialPrior& prior, int n_k, int n_b);
};

// For each height, lifts the gripper to (L - z, z), then moves it towards
// the fixed end at the given speed until layer touch or x = -0.2 L.
std::vector<EnvelopeRow> fold_height_envelope(
    const MaterialPrior& prior, const std::vector<double>& heights,
    const FoldHeightGrid& grid, const StripParams& base = StripParams::desk_scale(),
    const EpisodeConfig& episode = {}, double speed = 0.05, int threads = 0);

void write_envelope_csv(std::ostream& out, const std::vector<EnvelopeRow>& rows);

}  // namespace stripfold

#endif  // STRIPFOLD_TRAINER_HPP_
