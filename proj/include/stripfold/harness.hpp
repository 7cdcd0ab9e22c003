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

#ifndef STRIPFOLD_HARNESS_HPP_
#define STRIPFOLD_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "stripfold/paths.hpp"
#include "stripfold/trainer.hpp"
#include "stripfold/vision.hpp"

namespace stripfold {

// Everything a CLI run depends on besides the subcommand itself.
struct ExperimentConfig {
  std::string kind = "train";
  TrainerConfig trainer;
  std::filesystem::path out_dir = "out";
  // Baseline grid and displacement envelope grid.
  int grid_k = 5;
  int grid_b = 5;
  // Held-out evaluation draws.
  int eval_samples = 20;
  double baseline_speed = kBaselineSpeed;
  std::vector<double> sweep_heights{0.05, 0.1, 0.15};
  // Stiffness spacing 0.0025 keeps adjacent touch positions a few mm apart.
  int sweep_k = 113;
  int sweep_b = 3;
  int render_states = 200;
  double render_thickness_px = 1.0;
  double trace_k_low = kStiffnessMin;
  double trace_k_high = kStiffnessMax;
};

void write_experiment_config(std::ostream& out, const ExperimentConfig& c);
ExperimentConfig read_experiment_config(std::istream& in,
                                        ExperimentConfig base = {});
bool assign_experiment_key(ExperimentConfig& c, const std::string& key,
                           const std::string& value);

struct DisplacementRow {
  std::string method;
  double k = 0.0;
  double b = 0.0;
  bool touched = false;
  double d = 0.0;
};

// Statistics over the touched rows of one method.
struct MethodSummary {
  std::string method;
  int rows = 0;
  int touched = 0;
  double mean_d = 0.0;
  double mean_abs_d = 0.0;
  double max_abs_d = 0.0;
};

struct DisplacementReport {
  std::vector<DisplacementRow> rows;
  std::vector<MethodSummary> summaries;  // in order of first appearance

  const MethodSummary& summary(const std::string& method) const;
};

std::vector<MethodSummary> summarize(const std::vector<DisplacementRow>& rows);

void write_report_csv(std::ostream& out, const DisplacementReport& report);
void write_summary_csv(std::ostream& out, const DisplacementReport& report);

// Materials on a k x b grid over the prior: k linear, b / b_min(k)
// log-spaced over [ratio_min, ratio_max].
std::vector<StripParams> material_grid(const MaterialPrior& prior,
                                       const StripParams& base, int n_k,
                                       int n_b);

// Held-out draws from the prior on a seed stream disjoint from training.
std::vector<StripParams> held_out_materials(const MaterialPrior& prior,
                                            const StripParams& base,
                                            std::uint64_t seed, int n);

// Triangular and circular baselines for every material.
DisplacementReport baseline_report(const std::vector<StripParams>& materials,
                                   double speed, const EpisodeConfig& episode,
                                   int threads = 0);

// Policy plus both baselines on n_samples held-out draws.
DisplacementReport evaluate_policy(const PolicyWeights& weights,
                                   const MaterialPrior& prior,
                                   const StripParams& base, int n_samples,
                                   std::uint64_t seed,
                                   const EpisodeConfig& episode,
                                   double baseline_speed = kBaselineSpeed,
                                   int threads = 0);

// Policy displacement over a material grid; untouched rows are censored.
std::vector<DisplacementRow> displacement_envelope(
    const PolicyWeights& weights, const std::vector<StripParams>& grid,
    const EpisodeConfig& episode, int threads = 0);

// Per stiffness: d range over the touched rows and whether it brackets zero.
struct EnvelopeBand {
  double k = 0.0;
  int touched = 0;
  int censored = 0;
  double d_min = 0.0;
  double d_max = 0.0;
  bool contains_zero = false;
};
std::vector<EnvelopeBand> envelope_bands(
    const std::vector<DisplacementRow>& rows);
void write_envelope_bands_csv(std::ostream& out,
                              const std::vector<EnvelopeBand>& bands);

// Per height: x_touch range and the largest jump between adjacent stiffness
// grid points at equal damping.
struct HeightBand {
  double height = 0.0;
  int touched = 0;
  int censored = 0;
  double x_min = 0.0;
  double x_max = 0.0;
  double max_adjacent_jump = 0.0;
};
std::vector<HeightBand> height_bands(const std::vector<EnvelopeRow>& rows);
void write_height_bands_csv(std::ostream& out,
                            const std::vector<HeightBand>& bands);

struct StripSnapshot {
  int step = 0;
  double time = 0.0;
  std::vector<Vec2> positions;
};

struct PathTrace {
  StripParams params;
  EpisodeResult episode;
  std::vector<StripSnapshot> snapshots;
};

// Policy episode with strip snapshots every snapshot_every control steps
// (and at the first and last step).
PathTrace path_trace(const PolicyWeights& weights, const StripParams& params,
                     const EpisodeConfig& episode, int snapshot_every = 20);

// CSV "step,time_s,sphere,x,z".
void write_snapshots_csv(std::ostream& out,
                         const std::vector<StripSnapshot>& snapshots);
// CSV "path,s,x,z" with both reference paths sampled every ds meters.
void write_reference_paths_csv(std::ostream& out, double strip_length,
                               double ds = 0.005);

// Render-then-detect over states taken from baseline folds.
struct RenderCheckRow {
  double k = 0.0;
  double b = 0.0;
  std::string method;
  int step = 0;
  double x_c_sim = 0.0;
  bool detected = false;
  double x_c_vision = 0.0;
  double pixel_equivalent = 0.0;
  bool within = false;
};
struct RenderCheckReport {
  std::vector<RenderCheckRow> rows;
  int within = 0;
  double fraction() const {
    return rows.empty() ? 0.0 : static_cast<double>(within) / rows.size();
  }
};
RenderCheckReport render_check(const StripParams& base, int n_states,
                               const Homography& camera, int width,
                               int height, double thickness_px,
                               const EpisodeConfig& episode = {});
void write_render_check_csv(std::ostream& out, const RenderCheckReport& r);

// Text manifest: tool and library versions, the full configuration and the
// command line.
void write_manifest(std::ostream& out, const ExperimentConfig& config,
                    const std::vector<std::string>& argv);

}  // namespace stripfold

#endif  // STRIPFOLD_HARNESS_HPP_
