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

// stripfold command line: training, baselines, sweeps, evaluation, traces
// and the synthetic vision check. Every run writes its outputs and a
// manifest into --out.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "stripfold/harness.hpp"
#include "stripfold/key_value.hpp"

namespace fs = std::filesystem;
using namespace stripfold;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void report_check(const std::string& name, bool ok, bool& all_ok) {
  std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name.c_str());
  all_ok = all_ok && ok;
}

int run_train(const ExperimentConfig& c) {
  const fs::path dir = c.out_dir;
  {
    auto out = open_out(dir / "config.txt");
    write_trainer_config(out, c.trainer);
  }
  auto ledger = open_out(dir / "ledger.csv");
  auto stats = open_out(dir / "stats.csv");
  write_ledger_csv(ledger, {}, true);
  write_stats_csv(stats, {}, true);
  std::size_t written = 0;
  const TrainingRun run = train(c.trainer, [&](const TrainingRun& r) {
    std::vector<LedgerRow> fresh(r.ledger.begin() + written, r.ledger.end());
    written = r.ledger.size();
    write_ledger_csv(ledger, fresh, false);
    write_stats_csv(stats, {r.stats.back()}, false);
    ledger.flush();
    stats.flush();
    save_weights(dir / "best_policy.txt", r.best);
    save_weights(dir / "mean_policy.txt", r.mean);
    const auto& s = r.stats.back();
    std::printf("generation %d mean %.5f max %.5f best %.5f sigma %.4f\n",
                s.generation, s.mean_fitness, s.max_fitness, s.best_so_far,
                s.sigma);
    std::fflush(stdout);
  });
  save_weights(dir / "best_policy.txt", run.best);
  save_weights(dir / "mean_policy.txt", run.mean);
  auto seeds = open_out(dir / "seeds.txt");
  seeds << "seed = " << c.trainer.seed << '\n'
        << "search_seed = " << run.search_seed << '\n'
        << "material_seed = " << run.material_seed << '\n'
        << "best_generation = " << run.best_generation << '\n'
        << "best_candidate = " << run.best_candidate << '\n'
        << "best_fitness = " << format_double(run.best_fitness) << '\n';
  std::printf("best fitness %.6f (generation %d)\n", run.best_fitness,
              run.best_generation);
  return 0;
}

int run_baseline(const ExperimentConfig& c) {
  const auto materials =
      material_grid(c.trainer.prior, c.trainer.base, c.grid_k, c.grid_b);
  const DisplacementReport report = baseline_report(
      materials, c.baseline_speed, c.trainer.episode, c.trainer.threads);
  auto rows = open_out(c.out_dir / "baseline.csv");
  write_report_csv(rows, report);
  auto summary = open_out(c.out_dir / "baseline_summary.csv");
  write_summary_csv(summary, report);
  bool ok = true;
  bool tri_negative = true, circ_positive = true;
  for (const auto& r : report.rows) {
    if (r.method == "triangular") tri_negative &= r.touched && r.d < 0.0;
    if (r.method == "circular") circ_positive &= r.touched && r.d > 0.0;
  }
  for (const auto& s : report.summaries) {
    std::printf("%-10s mean d %+.4f  mean |d| %.4f  max |d| %.4f\n",
                s.method.c_str(), s.mean_d, s.mean_abs_d, s.max_abs_d);
  }
  report_check("triangular d < 0 on every grid point", tri_negative, ok);
  report_check("circular d > 0 on every grid point", circ_positive, ok);
  return ok ? 0 : 1;
}

int run_sweep(const ExperimentConfig& c) {
  const FoldHeightGrid grid =
      FoldHeightGrid::uniform(c.trainer.prior, c.sweep_k, c.sweep_b);
  const auto rows = fold_height_envelope(
      c.trainer.prior, c.sweep_heights, grid, c.trainer.base,
      c.trainer.episode, c.baseline_speed, c.trainer.threads);
  auto out = open_out(c.out_dir / "fold_height_envelope.csv");
  write_envelope_csv(out, rows);
  const auto bands = height_bands(rows);
  auto band_out = open_out(c.out_dir / "fold_height_bands.csv");
  write_height_bands_csv(band_out, bands);
  bool ok = true;
  int nonzero = 0;
  double max_jump = 0.0;
  for (const auto& b : bands) {
    std::printf("z %.3f  touched %d  x_touch [%.4f, %.4f]  max jump %.4f\n",
                b.height, b.touched, b.x_min, b.x_max, b.max_adjacent_jump);
    if (b.touched > 1 && b.x_max > b.x_min) ++nonzero;
    max_jump = std::max(max_jump, b.max_adjacent_jump);
  }
  report_check(">= 3 heights with nonzero envelope width", nonzero >= 3, ok);
  report_check("adjacent stiffness jumps < 5 mm", max_jump < 0.005, ok);
  return ok ? 0 : 1;
}

int run_evaluate(const ExperimentConfig& c, const fs::path& weights_path) {
  const PolicyWeights w = load_weights(weights_path);
  const DisplacementReport report =
      evaluate_policy(w, c.trainer.prior, c.trainer.base, c.eval_samples,
                      c.trainer.seed, c.trainer.episode, c.baseline_speed,
                      c.trainer.threads);
  auto rows = open_out(c.out_dir / "evaluation.csv");
  write_report_csv(rows, report);
  auto summary = open_out(c.out_dir / "evaluation_summary.csv");
  write_summary_csv(summary, report);

  const auto grid =
      material_grid(c.trainer.prior, c.trainer.base, c.grid_k, c.grid_b);
  const auto env =
      displacement_envelope(w, grid, c.trainer.episode, c.trainer.threads);
  {
    auto out = open_out(c.out_dir / "displacement_envelope.csv");
    write_report_csv(out, {env, summarize(env)});
  }
  const auto bands = envelope_bands(env);
  {
    auto out = open_out(c.out_dir / "displacement_bands.csv");
    write_envelope_bands_csv(out, bands);
  }
  int covered = 0;
  for (const auto& b : bands) covered += b.contains_zero ? 1 : 0;
  std::printf("zero displacement inside the envelope for %d of %zu stiffness "
              "values\n",
              covered, bands.size());

  for (const auto& s : report.summaries) {
    std::printf("%-10s touched %d/%d  mean d %+.4f  mean |d| %.4f\n",
                s.method.c_str(), s.touched, s.rows, s.mean_d, s.mean_abs_d);
  }
  const auto& p = report.summary("policy");
  const auto& t = report.summary("triangular");
  const auto& ci = report.summary("circular");
  const double better = std::min(t.mean_abs_d, ci.mean_abs_d);
  bool ok = true;
  report_check("every episode touched",
               p.touched == p.rows && t.touched == t.rows &&
                   ci.touched == ci.rows,
               ok);
  report_check("policy mean |d| < 0.5 x better baseline",
               p.mean_abs_d < t.mean_abs_d && p.mean_abs_d < ci.mean_abs_d &&
                   p.mean_abs_d < 0.5 * better,
               ok);
  return ok ? 0 : 1;
}

int run_trace(const ExperimentConfig& c, const fs::path& weights_path) {
  const PolicyWeights w = load_weights(weights_path);
  {
    auto out = open_out(c.out_dir / "reference_paths.csv");
    write_reference_paths_csv(out, c.trainer.base.strip_length);
  }
  bool ok = true;
  std::vector<PathTrace> traces;
  for (const auto& [name, k] :
       {std::pair{"low_k", c.trace_k_low}, std::pair{"high_k", c.trace_k_high}}) {
    const StripParams p = c.trainer.base.with_material(k, damping_min(k));
    traces.push_back(path_trace(w, p, c.trainer.episode));
    const PathTrace& t = traces.back();
    auto traj = open_out(c.out_dir / (std::string(name) + "_trajectory.csv"));
    write_episode_dump(traj, t.episode);
    auto snaps = open_out(c.out_dir / (std::string(name) + "_snapshots.csv"));
    write_snapshots_csv(snaps, t.snapshots);
    std::printf("%s: k %.3f touched %d d %+.4f steps %d\n", name, k,
                t.episode.touched, t.episode.d, t.episode.steps);
  }
  const auto& a = traces[0].episode.trajectory;
  const auto& b = traces[1].episode.trajectory;
  bool differ = a.size() != b.size();
  for (std::size_t i = 0; !differ && i < a.size(); ++i) {
    differ = a[i].gripper_x != b[i].gripper_x || a[i].gripper_z != b[i].gripper_z;
  }
  report_check("low and high stiffness traces differ", differ, ok);
  return ok ? 0 : 1;
}

int run_render_check(const ExperimentConfig& c) {
  const CameraPose pose = canonical_camera_pose();
  const Homography cam = canonical_camera();
  {
    auto out = open_out(c.out_dir / "camera.txt");
    write_homography(out, cam);
  }
  const RenderCheckReport r =
      render_check(c.trainer.base, c.render_states, cam, pose.width,
                   pose.height, c.render_thickness_px, c.trainer.episode);
  auto out = open_out(c.out_dir / "render_check.csv");
  write_render_check_csv(out, r);
  std::printf("x_c recovered within one pixel-equivalent: %d of %zu (%.1f%%)\n",
              r.within, r.rows.size(), 100.0 * r.fraction());
  bool ok = true;
  report_check("render-then-detect agreement >= 99%", r.fraction() >= 0.99,
               ok);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stripfold: fabric strip folding simulator and policy search"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir = "out";
  std::string weights_path = "best_policy.txt";
  TrainerConfig defaults;
  int lambda = defaults.lambda, generations = defaults.generations;
  int samples = defaults.samples_per_eval, threads = defaults.threads;
  double sigma0 = defaults.sigma0;
  int horizon = defaults.episode.horizon;
  double force_scale = defaults.episode.reward.force_scale;
  double overtime = defaults.episode.reward.overtime_penalty;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value configuration file");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { seed = s; seed_given = true; },
        "master seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads (0: all cores)");
  };
  auto* train_cmd = app.add_subcommand("train", "train a feedback policy");
  auto* baseline_cmd =
      app.add_subcommand("baseline", "triangular and circular paths on a grid");
  auto* sweep_cmd =
      app.add_subcommand("sweep", "touch-position envelope under horizontal motion");
  auto* eval_cmd = app.add_subcommand(
      "evaluate", "policy vs baselines on held-out materials");
  auto* trace_cmd = app.add_subcommand("trace", "gripper path and strip snapshots");
  auto* render_cmd =
      app.add_subcommand("render-check", "render-then-detect vision check");
  for (auto* sub : {train_cmd, baseline_cmd, sweep_cmd, eval_cmd, trace_cmd,
                    render_cmd}) {
    add_common(sub);
  }
  train_cmd->add_option("--lambda", lambda, "population size");
  train_cmd->add_option("--sigma0", sigma0, "initial step size");
  train_cmd->add_option("--generations", generations, "generations");
  train_cmd->add_option("--samples", samples, "materials per evaluation");
  for (auto* sub : {train_cmd, eval_cmd, trace_cmd}) {
    sub->add_option("--horizon", horizon, "control steps before shaping");
    sub->add_option("--force-scale", force_scale, "force reward scale a");
    sub->add_option("--overtime-penalty", overtime, "overtime penalty");
  }
  eval_cmd->add_option("--weights", weights_path, "policy weights file");
  trace_cmd->add_option("--weights", weights_path, "policy weights file");

  CLI11_PARSE(app, argc, argv);
  CLI::App* sub = app.get_subcommands().front();

  try {
    ExperimentConfig c;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot read " + config_path);
      c = read_experiment_config(in);
    }
    c.kind = sub->get_name();
    c.out_dir = out_dir;
    if (seed_given) c.trainer.seed = seed;
    auto given = [&](const char* flag) { return sub->count(flag) > 0; };
    if (given("--threads")) c.trainer.threads = threads;
    if (sub == train_cmd) {
      if (given("--lambda")) c.trainer.lambda = lambda;
      if (given("--sigma0")) c.trainer.sigma0 = sigma0;
      if (given("--generations")) c.trainer.generations = generations;
      if (given("--samples")) c.trainer.samples_per_eval = samples;
    }
    if (sub == train_cmd || sub == eval_cmd || sub == trace_cmd) {
      if (given("--horizon")) c.trainer.episode.horizon = horizon;
      if (given("--force-scale")) c.trainer.episode.reward.force_scale = force_scale;
      if (given("--overtime-penalty"))
        c.trainer.episode.reward.overtime_penalty = overtime;
    }
    validate(c.trainer);

    fs::create_directories(c.out_dir);
    {
      auto out = open_out(c.out_dir / "manifest.txt");
      write_manifest(out, c, std::vector<std::string>(argv, argv + argc));
    }
    if (sub == train_cmd) return run_train(c);
    if (sub == baseline_cmd) return run_baseline(c);
    if (sub == sweep_cmd) return run_sweep(c);
    if (sub == eval_cmd) return run_evaluate(c, weights_path);
    if (sub == trace_cmd) return run_trace(c, weights_path);
    return run_render_check(c);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "stripfold: %s\n", e.what());
    return 2;
  }
}
