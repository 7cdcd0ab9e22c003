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

#include "stripfold/harness.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "stripfold/key_value.hpp"
#include "stripfold/parallel.hpp"
#include "stripfold/reward.hpp"

namespace stripfold {

namespace {

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += format_double(v[i]);
  }
  return s;
}

std::vector<double> parse_doubles(const std::string& key,
                                  const std::string& text) {
  std::vector<double> v;
  std::istringstream in(text);
  for (std::string tok; in >> tok;) v.push_back(parse_double(key, tok));
  return v;
}

}  // namespace

void write_experiment_config(std::ostream& out, const ExperimentConfig& c) {
  out << "kind = " << c.kind << '\n'
      << "out_dir = " << c.out_dir.string() << '\n'
      << "grid_k = " << c.grid_k << '\n'
      << "grid_b = " << c.grid_b << '\n'
      << "eval_samples = " << c.eval_samples << '\n'
      << "baseline_speed = " << format_double(c.baseline_speed) << '\n'
      << "sweep_heights = " << join_doubles(c.sweep_heights) << '\n'
      << "sweep_k = " << c.sweep_k << '\n'
      << "sweep_b = " << c.sweep_b << '\n'
      << "render_states = " << c.render_states << '\n'
      << "render_thickness_px = " << format_double(c.render_thickness_px)
      << '\n'
      << "trace_k_low = " << format_double(c.trace_k_low) << '\n'
      << "trace_k_high = " << format_double(c.trace_k_high) << '\n';
  write_trainer_config(out, c.trainer);
}

bool assign_experiment_key(ExperimentConfig& c, const std::string& key,
                           const std::string& value) {
  if (key == "kind") c.kind = value;
  else if (key == "out_dir") c.out_dir = value;
  else if (key == "grid_k") c.grid_k = parse_int(key, value);
  else if (key == "grid_b") c.grid_b = parse_int(key, value);
  else if (key == "eval_samples") c.eval_samples = parse_int(key, value);
  else if (key == "baseline_speed") c.baseline_speed = parse_double(key, value);
  else if (key == "sweep_heights") c.sweep_heights = parse_doubles(key, value);
  else if (key == "sweep_k") c.sweep_k = parse_int(key, value);
  else if (key == "sweep_b") c.sweep_b = parse_int(key, value);
  else if (key == "render_states") c.render_states = parse_int(key, value);
  else if (key == "render_thickness_px")
    c.render_thickness_px = parse_double(key, value);
  else if (key == "trace_k_low") c.trace_k_low = parse_double(key, value);
  else if (key == "trace_k_high") c.trace_k_high = parse_double(key, value);
  else return assign_trainer_key(c.trainer, key, value);
  return true;
}

ExperimentConfig read_experiment_config(std::istream& in,
                                        ExperimentConfig base) {
  for (const auto& [key, value] : parse_key_values(in)) {
    if (!assign_experiment_key(base, key, value)) {
      throw std::invalid_argument("unknown config key: " + key);
    }
  }
  return base;
}

const MethodSummary& DisplacementReport::summary(
    const std::string& method) const {
  for (const auto& s : summaries) {
    if (s.method == method) return s;
  }
  throw std::out_of_range("no summary for method " + method);
}

std::vector<MethodSummary> summarize(const std::vector<DisplacementRow>& rows) {
  std::vector<MethodSummary> out;
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const MethodSummary& s) {
      return s.method == r.method;
    });
    if (it == out.end()) {
      out.push_back({r.method});
      it = out.end() - 1;
    }
    ++it->rows;
    if (!r.touched) continue;
    ++it->touched;
    it->mean_d += r.d;
    it->mean_abs_d += std::abs(r.d);
    it->max_abs_d = std::max(it->max_abs_d, std::abs(r.d));
  }
  for (auto& s : out) {
    if (s.touched > 0) {
      s.mean_d /= s.touched;
      s.mean_abs_d /= s.touched;
    }
  }
  return out;
}

void write_report_csv(std::ostream& out, const DisplacementReport& report) {
  out << "method,k,b,touched,d\n";
  for (const auto& r : report.rows) {
    out << r.method << ',' << format_double(r.k) << ',' << format_double(r.b)
        << ',' << (r.touched ? 1 : 0) << ',';
    if (r.touched) out << format_double(r.d);
    out << '\n';
  }
}

void write_summary_csv(std::ostream& out, const DisplacementReport& report) {
  out << "method,rows,touched,mean_d,mean_abs_d,max_abs_d\n";
  for (const auto& s : report.summaries) {
    out << s.method << ',' << s.rows << ',' << s.touched << ','
        << format_double(s.mean_d) << ',' << format_double(s.mean_abs_d)
        << ',' << format_double(s.max_abs_d) << '\n';
  }
}

std::vector<StripParams> material_grid(const MaterialPrior& prior,
                                       const StripParams& base, int n_k,
                                       int n_b) {
  const FoldHeightGrid g = FoldHeightGrid::uniform(prior, n_k, n_b);
  std::vector<StripParams> out;
  for (double k : g.stiffness) {
    for (double ratio : g.damping_ratio) {
      out.push_back(base.with_material(k, damping_min(k) * ratio));
    }
  }
  return out;
}

std::vector<StripParams> held_out_materials(const MaterialPrior& prior,
                                            const StripParams& base,
                                            std::uint64_t seed, int n) {
  std::mt19937_64 rng(derive_seed(seed, SeedStream::kHeldOut));
  std::vector<StripParams> out;
  for (int i = 0; i < n; ++i) out.push_back(sample_prior(prior, base, rng));
  return out;
}

namespace {

DisplacementRow row_from(const std::string& method, const StripParams& p,
                         const EpisodeResult& r) {
  return {method, p.joint_stiffness, p.joint_damping, r.touched, r.d};
}

// Runs fn(i) for every material and returns rows in material order.
template <typename Fn>
std::vector<DisplacementRow> for_materials(
    const std::string& method, const std::vector<StripParams>& materials,
    int threads, Fn fn) {
  std::vector<DisplacementRow> rows(materials.size());
  parallel_for(static_cast<int>(materials.size()), threads, [&](int i) {
    EpisodeResult r;
    try {
      r = fn(materials[i]);
    } catch (const SimulationError&) {
      r.touched = false;
    }
    rows[i] = row_from(method, materials[i], r);
  });
  return rows;
}

void append(std::vector<DisplacementRow>& to,
            const std::vector<DisplacementRow>& from) {
  to.insert(to.end(), from.begin(), from.end());
}

}  // namespace

DisplacementReport baseline_report(const std::vector<StripParams>& materials,
                                   double speed, const EpisodeConfig& episode,
                                   int threads) {
  DisplacementReport report;
  for (const char* method : {"triangular", "circular"}) {
    const bool tri = std::string(method) == "triangular";
    append(report.rows,
           for_materials(method, materials, threads, [&](const StripParams& p) {
             const GripperPath path = tri ? triangular_path(p.strip_length)
                                          : circular_path(p.strip_length);
             return run_path(path, p, speed, episode);
           }));
  }
  report.summaries = summarize(report.rows);
  return report;
}

DisplacementReport evaluate_policy(const PolicyWeights& weights,
                                   const MaterialPrior& prior,
                                   const StripParams& base, int n_samples,
                                   std::uint64_t seed,
                                   const EpisodeConfig& episode,
                                   double baseline_speed, int threads) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  const auto materials = held_out_materials(prior, base, seed, n_samples);
  DisplacementReport report;
  append(report.rows, displacement_envelope(weights, materials, episode,
                                            threads));
  const DisplacementReport baselines =
      baseline_report(materials, baseline_speed, episode, threads);
  append(report.rows, baselines.rows);
  report.summaries = summarize(report.rows);
  return report;
}

std::vector<DisplacementRow> displacement_envelope(
    const PolicyWeights& weights, const std::vector<StripParams>& grid,
    const EpisodeConfig& episode, int threads) {
  validate(weights);
  return for_materials("policy", grid, threads, [&](const StripParams& p) {
    return run_episode(weights, p, episode);
  });
}

std::vector<EnvelopeBand> envelope_bands(
    const std::vector<DisplacementRow>& rows) {
  std::map<double, EnvelopeBand> by_k;
  for (const auto& r : rows) {
    EnvelopeBand& b = by_k[r.k];
    b.k = r.k;
    if (!r.touched) {
      ++b.censored;
      continue;
    }
    if (b.touched == 0) {
      b.d_min = b.d_max = r.d;
    } else {
      b.d_min = std::min(b.d_min, r.d);
      b.d_max = std::max(b.d_max, r.d);
    }
    ++b.touched;
  }
  std::vector<EnvelopeBand> out;
  for (auto& [k, b] : by_k) {
    b.contains_zero = b.touched > 0 && b.d_min <= 0.0 && b.d_max >= 0.0;
    out.push_back(b);
  }
  return out;
}

void write_envelope_bands_csv(std::ostream& out,
                              const std::vector<EnvelopeBand>& bands) {
  out << "k,touched,censored,d_min,d_max,contains_zero\n";
  for (const auto& b : bands) {
    out << format_double(b.k) << ',' << b.touched << ',' << b.censored << ','
        << format_double(b.d_min) << ',' << format_double(b.d_max) << ','
        << (b.contains_zero ? 1 : 0) << '\n';
  }
}

std::vector<HeightBand> height_bands(const std::vector<EnvelopeRow>& rows) {
  std::map<double, std::vector<const EnvelopeRow*>> by_height;
  for (const auto& r : rows) by_height[r.height].push_back(&r);
  std::vector<HeightBand> out;
  for (const auto& [z, group] : by_height) {
    HeightBand band;
    band.height = z;
    band.x_min = std::numeric_limits<double>::infinity();
    band.x_max = -std::numeric_limits<double>::infinity();
    // Same damping ratio, consecutive stiffness: rows keep grid order.
    std::map<double, std::vector<const EnvelopeRow*>> by_ratio;
    for (const EnvelopeRow* r : group) {
      if (!r->touched) {
        ++band.censored;
        continue;
      }
      ++band.touched;
      band.x_min = std::min(band.x_min, r->x_touch);
      band.x_max = std::max(band.x_max, r->x_touch);
      const double ratio = r->b / damping_min(r->k);
      const double key = std::round(ratio * 1e9) / 1e9;
      by_ratio[key].push_back(r);
    }
    for (auto& [ratio, line] : by_ratio) {
      std::sort(line.begin(), line.end(),
                [](const EnvelopeRow* a, const EnvelopeRow* b) {
                  return a->k < b->k;
                });
      for (std::size_t i = 1; i < line.size(); ++i) {
        band.max_adjacent_jump =
            std::max(band.max_adjacent_jump,
                     std::abs(line[i]->x_touch - line[i - 1]->x_touch));
      }
    }
    if (band.touched == 0) band.x_min = band.x_max = 0.0;
    out.push_back(band);
  }
  return out;
}

void write_height_bands_csv(std::ostream& out,
                            const std::vector<HeightBand>& bands) {
  out << "height,touched,censored,x_min,x_max,width,max_adjacent_jump\n";
  for (const auto& b : bands) {
    out << format_double(b.height) << ',' << b.touched << ',' << b.censored
        << ',' << format_double(b.x_min) << ',' << format_double(b.x_max)
        << ',' << format_double(b.x_max - b.x_min) << ','
        << format_double(b.max_adjacent_jump) << '\n';
  }
}

PathTrace path_trace(const PolicyWeights& weights, const StripParams& params,
                     const EpisodeConfig& episode, int snapshot_every) {
  if (snapshot_every < 1) throw std::invalid_argument("snapshot_every >= 1");
  validate(weights);
  PathTrace trace;
  trace.params = params;
  StripSnapshot last;
  const double L = params.strip_length;
  trace.episode = run_controlled(
      [&](const Observation& obs) { return act(weights, obs, L); }, params,
      episode, nullptr, [&](const StripState& s, int step) {
        last = {step, s.time, s.positions};
        if (step % snapshot_every == 0) trace.snapshots.push_back(last);
      });
  if (!trace.snapshots.empty() && trace.snapshots.back().step != last.step) {
    trace.snapshots.push_back(last);
  }
  return trace;
}

void write_snapshots_csv(std::ostream& out,
                         const std::vector<StripSnapshot>& snapshots) {
  out << "step,time_s,sphere,x,z\n";
  for (const auto& s : snapshots) {
    for (std::size_t i = 0; i < s.positions.size(); ++i) {
      out << s.step << ',' << format_double(s.time) << ',' << i << ','
          << format_double(s.positions[i].x()) << ','
          << format_double(s.positions[i].y()) << '\n';
    }
  }
}

void write_reference_paths_csv(std::ostream& out, double strip_length,
                               double ds) {
  out << "path,s,x,z\n";
  for (const char* name : {"triangular", "circular"}) {
    const GripperPath path = std::string(name) == "triangular"
                                 ? triangular_path(strip_length)
                                 : circular_path(strip_length);
    const int n = static_cast<int>(std::ceil(path.total_length() / ds));
    for (int i = 0; i <= n; ++i) {
      const double s = std::min(i * ds, path.total_length());
      const Vec2 p = path.at(s);
      out << name << ',' << format_double(s) << ',' << format_double(p.x())
          << ',' << format_double(p.y()) << '\n';
    }
  }
}

RenderCheckReport render_check(const StripParams& base, int n_states,
                               const Homography& camera, int width,
                               int height, double thickness_px,
                               const EpisodeConfig& episode) {
  if (n_states < 1) throw std::invalid_argument("n_states must be >= 1");
  struct Candidate {
    RenderCheckRow row;
    StripState state;
  };
  std::vector<Candidate> pool;
  const auto materials = material_grid(MaterialPrior{}, base, 5, 2);
  for (const auto& p : materials) {
    for (const char* method : {"triangular", "circular"}) {
      const GripperPath path = std::string(method) == "triangular"
                                   ? triangular_path(p.strip_length)
                                   : circular_path(p.strip_length);
      FoldingDriver driver(p, episode.contact);
      const double ds = kBaselineSpeed * p.sim_dt;
      const long total = static_cast<long>(std::ceil(path.total_length() / ds));
      long done = 0;
      int step = 0;
      std::vector<Vec2> targets;
      while (done < total && !driver.touched()) {
        targets.clear();
        for (int j = 0; j < episode.control_period && done < total; ++j) {
          targets.push_back(path.at(++done * ds));
        }
        driver.advance(targets);
        if (++step % 5 != 0) continue;
        RenderCheckRow row;
        row.k = p.joint_stiffness;
        row.b = p.joint_damping;
        row.method = method;
        row.step = step;
        row.x_c_sim = driver.contact_x();
        pool.push_back({row, driver.state()});
      }
    }
  }
  RenderCheckReport report;
  const int n = std::min<int>(n_states, static_cast<int>(pool.size()));
  for (int i = 0; i < n; ++i) {
    auto& c = pool[static_cast<std::size_t>(i) * pool.size() / n];
    const RasterImage image = render_strip(c.state, camera, width, height,
                                           kDeskColor, kStripColor,
                                           thickness_px);
    const auto x = detect_contact_x(image, camera, base.strip_length);
    RenderCheckRow row = c.row;
    row.pixel_equivalent = camera.pixel_equivalent_x(row.x_c_sim);
    row.detected = x.has_value();
    row.x_c_vision = x.value_or(0.0);
    row.within =
        row.detected && std::abs(row.x_c_vision - row.x_c_sim) <=
                            row.pixel_equivalent;
    if (row.within) ++report.within;
    report.rows.push_back(row);
  }
  return report;
}

void write_render_check_csv(std::ostream& out, const RenderCheckReport& r) {
  out << "method,k,b,step,x_c_sim,detected,x_c_vision,pixel_equivalent,"
         "within\n";
  for (const auto& row : r.rows) {
    out << row.method << ',' << format_double(row.k) << ','
        << format_double(row.b) << ',' << row.step << ','
        << format_double(row.x_c_sim) << ',' << (row.detected ? 1 : 0) << ',';
    if (row.detected) out << format_double(row.x_c_vision);
    out << ',' << format_double(row.pixel_equivalent) << ','
        << (row.within ? 1 : 0) << '\n';
  }
}

void write_manifest(std::ostream& out, const ExperimentConfig& config,
                    const std::vector<std::string>& argv) {
  out << "# stripfold run manifest\n"
      << "tool_version = 1.0.0\n"
      << "compiler = " << __VERSION__ << '\n'
      << "eigen = " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
      << EIGEN_MINOR_VERSION << '\n'
      << "command =";
  for (const auto& a : argv) out << ' ' << a;
  out << '\n';
  write_experiment_config(out, config);
}

}  // namespace stripfold
