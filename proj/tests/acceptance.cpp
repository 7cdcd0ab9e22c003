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

// Runs the end-to-end acceptance criteria and prints one PASS/FAIL line per
// criterion. Exits nonzero when any criterion fails.

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "sim_checks.hpp"
#include "stripfold/cmaes.hpp"
#include "stripfold/harness.hpp"
#include "stripfold/parallel.hpp"
#include "stripfold/reward.hpp"

namespace stripfold {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  int passed = 0;
  int failed = 0;

  void report(int id, const std::string& name, bool ok,
              const std::string& detail, double secs) {
    std::printf("criterion %d %-34s %s  %s  (%.0f s)\n", id, name.c_str(),
                ok ? "PASS" : "FAIL", detail.c_str(), secs);
    std::fflush(stdout);
    (ok ? passed : failed)++;
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void baseline_signs(const ExperimentConfig& c, Outcome& out) {
  const auto t0 = Clock::now();
  const auto grid = material_grid(c.trainer.prior, c.trainer.base, 5, 5);
  const DisplacementReport r =
      baseline_report(grid, c.baseline_speed, c.trainer.episode, c.trainer.threads);
  int tri_ok = 0, circ_ok = 0;
  for (const auto& row : r.rows) {
    if (row.method == "triangular" && row.touched && row.d < 0.0) ++tri_ok;
    if (row.method == "circular" && row.touched && row.d > 0.0) ++circ_ok;
  }
  const int n = static_cast<int>(grid.size());
  out.report(1, "baseline sign structure", tri_ok == n && circ_ok == n,
             fmt("triangular d<0 %d/%d, circular d>0 %d/%d", tri_ok, n,
                 circ_ok, n),
             seconds_since(t0));
}

void policy_vs_baselines(const ExperimentConfig& c, const PolicyWeights& w,
                         double train_secs, Outcome& out) {
  const auto t0 = Clock::now();
  const DisplacementReport r =
      evaluate_policy(w, c.trainer.prior, c.trainer.base, c.eval_samples,
                      c.trainer.seed, c.trainer.episode, c.baseline_speed,
                      c.trainer.threads);
  const MethodSummary& p = r.summary("policy");
  const MethodSummary& tri = r.summary("triangular");
  const MethodSummary& circ = r.summary("circular");
  const double better = std::min(tri.mean_abs_d, circ.mean_abs_d);
  const bool all_touched = p.touched == p.rows && tri.touched == tri.rows &&
                           circ.touched == circ.rows;
  const bool ok = all_touched && p.mean_abs_d < tri.mean_abs_d &&
                  p.mean_abs_d < circ.mean_abs_d && p.mean_abs_d < 0.5 * better;
  out.report(2, "policy beats baselines", ok,
             fmt("mean|d| policy %.4f (touched %d/%d), triangular %.4f, "
                 "circular %.4f, limit %.4f",
                 p.mean_abs_d, p.touched, p.rows, tri.mean_abs_d,
                 circ.mean_abs_d, 0.5 * better),
             train_secs + seconds_since(t0));
}

void envelope_regeneration(const ExperimentConfig& c, Outcome& out) {
  const auto t0 = Clock::now();
  const FoldHeightGrid grid =
      FoldHeightGrid::uniform(c.trainer.prior, c.sweep_k, c.sweep_b);
  const auto rows = fold_height_envelope(c.trainer.prior, c.sweep_heights, grid,
                                         c.trainer.base, c.trainer.episode,
                                         c.baseline_speed, c.trainer.threads);
  const auto bands = height_bands(rows);
  int good = 0;
  double max_jump = 0.0, min_width = 1e9;
  for (const auto& b : bands) {
    const bool full = b.censored == 0;
    if (full && b.x_max > b.x_min && b.max_adjacent_jump < 0.005) ++good;
    max_jump = std::max(max_jump, b.max_adjacent_jump);
    min_width = std::min(min_width, b.x_max - b.x_min);
  }
  const bool ok = bands.size() >= 3 && good == static_cast<int>(bands.size());
  out.report(3, "envelope regeneration", ok,
             fmt("%d/%zu heights nonzero-width and continuous, min width "
                 "%.4f m, max adjacent jump %.4f m",
                 good, bands.size(), min_width, max_jump),
             seconds_since(t0));
}

void simulator_invariants(Outcome& out) {
  const auto t0 = Clock::now();
  const StripParams base = StripParams::desk_scale();
  std::vector<StripParams> corners;
  for (double k : {kStiffnessMin, kStiffnessMax}) {
    for (double ratio : {1.0, kDampingSpan}) {
      corners.push_back(base.with_material(k, ratio * damping_min(k)));
    }
  }
  const auto inv = testing::driven_fold_invariants(corners);
  double energy = -1.0;
  for (double k : {0.02, 0.1, 0.3}) {
    for (double ratio : {1.0, 7.0, 50.0}) {
      energy = std::max(energy, testing::max_energy_increase(
                                    base.with_material(k, ratio * damping_min(k)),
                                    0.2, 1500));
    }
  }
  double asym = 0.0;
  for (double k : {kStiffnessMin, kStiffnessMax}) {
    asym = std::max(asym, testing::settled_asymmetry(
                              base.with_material(k, damping_max(k)), 0.4, 16000));
  }
  double period = 0.0;
  for (double l : {0.002, 0.1}) {
    period = std::max(period,
                      std::abs(testing::pendulum_period(l, 0.05).relative_error()));
  }
  const bool ok = inv.max_link_error < 1e-6 && inv.max_pin_offset == 0.0 &&
                  inv.min_z >= -1e-5 && energy <= 1e-9 && asym < 1e-4 &&
                  period < 0.05;
  out.report(4, "simulator invariants", ok,
             fmt("link %.1e m, pin %.1e m, min z %.1e m, energy rise %.1e J, "
                 "asymmetry %.1e m, period error %.2f%%",
                 inv.max_link_error, inv.max_pin_offset, inv.min_z, energy,
                 asym, 100.0 * period),
             seconds_since(t0));
}

void reward_accounting(const ExperimentConfig& c, Outcome& out) {
  const auto t0 = Clock::now();
  TouchEvent e;
  e.touched = true;
  bool examples = intermediate_reward(0.0, 5, 0.01) == 0.0 &&
                  intermediate_reward(-2.0, 10, 1.0) == -0.2 &&
                  intermediate_reward(3.0, 7, 0.0) == 0.0;
  for (double d : {0.02, 0.0, -0.0368}) {
    e.d = d;
    examples &= terminal_reward(e) == -std::abs(d);
  }
  std::mt19937_64 rng(2026);
  std::normal_distribution<double> normal(0.0, c.trainer.sigma0);
  std::vector<std::pair<PolicyWeights, StripParams>> cases;
  for (int i = 0; i < 100; ++i) {
    PolicyWeights w = PolicyWeights::zeros();
    for (double& v : w.values) v = normal(rng);
    cases.emplace_back(w, sample_prior(c.trainer.prior, c.trainer.base, rng));
  }
  std::vector<double> err(cases.size());
  parallel_for(static_cast<int>(cases.size()), c.trainer.threads, [&](int i) {
    const auto& [w, p] = cases[i];
    const EpisodeResult r = run_episode(w, p, c.trainer.episode);
    err[i] = std::abs(r.total_reward - testing::recomputed_total_reward(
                                           r, c.trainer.episode.reward,
                                           p.strip_length));
  });
  const double worst = *std::max_element(err.begin(), err.end());
  out.report(5, "reward accounting", examples && worst <= 1e-12,
             fmt("unit examples %s, worst recomputation error %.1e over %zu "
                 "episodes",
                 examples ? "exact" : "WRONG", worst, cases.size()),
             seconds_since(t0));
}

bool same_rows(const LedgerRow& a, const LedgerRow& b) {
  return a.generation == b.generation && a.candidate == b.candidate &&
         a.theta_index == b.theta_index && a.k == b.k && a.b == b.b &&
         a.reward == b.reward && a.touched == b.touched &&
         a.failed == b.failed && a.d == b.d;
}

void cmaes_sanity(const TrainingRun& run, Outcome& out) {
  const auto t0 = Clock::now();
  const auto sphere = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  const MinimizeResult m = cmaes_minimize(
      sphere, Eigen::VectorXd::Constant(10, 1.0), 0.5, 10, 1, 10000, 1e-8);
  // Replay the opening generations of the training run from its seeds.
  TrainerConfig prefix = run.config;
  prefix.generations = std::min(3, run.config.generations);
  const TrainingRun again = train(prefix);
  bool replay = again.search_seed == run.search_seed &&
                again.material_seed == run.material_seed &&
                !again.ledger.empty() && again.ledger.size() <= run.ledger.size();
  for (std::size_t i = 0; replay && i < again.ledger.size(); ++i) {
    replay = same_rows(again.ledger[i], run.ledger[i]);
  }
  out.report(6, "CMA-ES sanity", m.cost < 1e-8 && replay,
             fmt("sphere f = %.1e after %ld evaluations, ledger replay of %zu "
                 "rows %s",
                 m.cost, m.evaluations, again.ledger.size(),
                 replay ? "bit-identical" : "DIFFERS"),
             seconds_since(t0));
}

void vision_loop(const ExperimentConfig& c, Outcome& out) {
  const auto t0 = Clock::now();
  const CameraPose pose = canonical_camera_pose();
  const RenderCheckReport r =
      render_check(c.trainer.base, c.render_states, canonical_camera(),
                   pose.width, pose.height, c.render_thickness_px,
                   c.trainer.episode);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ux(0.0, 0.6), uz(0.0, 0.3);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::Matrix3d m;
    m << 800.0 + 200.0 * u(rng), 100.0 * u(rng), 400.0 + 50.0 * u(rng),
        50.0 * u(rng), -700.0 + 200.0 * u(rng), 300.0 + 50.0 * u(rng),
        0.3 * u(rng), 0.3 * u(rng), 1.0;
    const Homography truth(m);
    std::vector<PointPair> pairs;
    for (int i = 0; i < 8; ++i) {
      const Vec2 p(ux(rng), uz(rng));
      pairs.push_back({truth.project(p), p});
    }
    const Eigen::Matrix3d est = estimate_homography(pairs).homography.matrix();
    worst = std::max(worst, (est / est(2, 2) - m).cwiseAbs().maxCoeff());
  }
  const bool ok = r.fraction() >= 0.99 && worst < 1e-6;
  out.report(7, "vision loop closure", ok,
             fmt("x_c within 1 pixel-equivalent for %d/%zu states (%.1f%%), "
                 "homography error %.1e",
                 r.within, r.rows.size(), 100.0 * r.fraction(), worst),
             seconds_since(t0));
}

void envelope_honesty(const ExperimentConfig& c, const PolicyWeights& w,
                      Outcome& out) {
  const auto t0 = Clock::now();
  const auto grid = material_grid(c.trainer.prior, c.trainer.base, c.grid_k,
                                  c.grid_b);
  const auto rows =
      displacement_envelope(w, grid, c.trainer.episode, c.trainer.threads);
  const auto bands = envelope_bands(rows);
  int covered = 0, accounted = 0;
  for (const auto& b : bands) {
    std::printf("  k %.3f  touched %d  censored %d  d [%+.4f, %+.4f]  zero %s\n",
                b.k, b.touched, b.censored, b.d_min, b.d_max,
                b.contains_zero ? "yes" : "no");
    covered += b.contains_zero ? 1 : 0;
    accounted += b.touched + b.censored;
  }
  const bool ok = static_cast<int>(bands.size()) == c.grid_k &&
                  accounted == static_cast<int>(grid.size());
  out.report(8, "displacement envelope honesty", ok,
             fmt("zero crossing reported for %d/%zu stiffness values, "
                 "%d/%zu rows accounted",
                 covered, bands.size(), accounted, grid.size()),
             seconds_since(t0));
}

}  // namespace
}  // namespace stripfold

int main(int argc, char** argv) {
  using namespace stripfold;
  CLI::App app{"stripfold acceptance run"};
  std::string policy_path;
  int threads = 0;
  app.add_option("--policy", policy_path,
                 "evaluate these weights instead of training");
  app.add_option("--threads", threads, "worker threads, 0 for all cores");
  CLI11_PARSE(app, argc, argv);

  ExperimentConfig c;
  c.trainer.threads = threads;
  Outcome out;

  simulator_invariants(out);
  baseline_signs(c, out);
  envelope_regeneration(c, out);
  reward_accounting(c, out);
  vision_loop(c, out);

  const auto t0 = Clock::now();
  TrainingRun run;
  PolicyWeights policy;
  if (policy_path.empty()) {
    run = train(c.trainer, [](const TrainingRun& r) {
      const GenerationStats& s = r.stats.back();
      if (s.generation % 10 == 0) {
        std::printf("  generation %d  mean %.4f  best %.4f  sigma %.3f\n",
                    s.generation, s.mean_fitness, s.best_so_far, s.sigma);
        std::fflush(stdout);
      }
    });
    policy = run.best;
  } else {
    policy = load_weights(policy_path);
    run = train([&] {
      TrainerConfig t = c.trainer;
      t.generations = 3;
      return t;
    }());
  }
  const double train_secs = seconds_since(t0);
  cmaes_sanity(run, out);
  policy_vs_baselines(c, policy, train_secs, out);
  envelope_honesty(c, policy, out);

  std::printf("acceptance: %d passed, %d failed\n", out.passed, out.failed);
  return out.failed == 0 ? 0 : 1;
}
