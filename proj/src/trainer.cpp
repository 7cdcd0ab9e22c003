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

#include "stripfold/trainer.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "stripfold/cmaes.hpp"
#include "stripfold/key_value.hpp"
#include "stripfold/parallel.hpp"
#include "stripfold/reward.hpp"

namespace stripfold {

void validate(const MaterialPrior& prior) {
  if (!(prior.k_min > 0.0 && prior.k_min <= prior.k_max) ||
      !(prior.ratio_min >= 1.0 && prior.ratio_min <= prior.ratio_max &&
        prior.ratio_max <= kDampingSpan)) {
    throw std::invalid_argument("invalid material prior");
  }
}

StripParams sample_prior(const MaterialPrior& prior, const StripParams& base,
                         std::mt19937_64& rng) {
  validate(prior);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double k = prior.k_min + (prior.k_max - prior.k_min) * unit(rng);
  const double u = unit(rng);
  const double ratio =
      prior.ratio_min * std::pow(prior.ratio_max / prior.ratio_min, u);
  const double b = damping_min(k) * ratio;
  return base.with_material(k, b);
}

std::uint64_t derive_seed(std::uint64_t master, SeedStream stream) {
  // splitmix64 finalizer over the master seed offset by the stream id.
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL *
                                 (static_cast<std::uint64_t>(stream) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void validate(const TrainerConfig& c) {
  if (c.lambda < 4) throw std::invalid_argument("lambda must be >= 4");
  if (c.samples_per_eval < 1) throw std::invalid_argument("M must be >= 1");
  if (!(c.sigma0 > 0.0)) throw std::invalid_argument("sigma0 must be > 0");
  if (c.generations < 0) throw std::invalid_argument("generations must be >= 0");
  validate(c.prior);
  validate(c.base);
}

void write_trainer_config(std::ostream& out, const TrainerConfig& c) {
  out << "lambda = " << c.lambda << '\n'
      << "sigma0 = " << format_double(c.sigma0) << '\n'
      << "generations = " << c.generations << '\n'
      << "samples_per_eval = " << c.samples_per_eval << '\n'
      << "seed = " << c.seed << '\n'
      << "threads = " << c.threads << '\n'
      << "prior.k_min = " << format_double(c.prior.k_min) << '\n'
      << "prior.k_max = " << format_double(c.prior.k_max) << '\n'
      << "prior.ratio_min = " << format_double(c.prior.ratio_min) << '\n'
      << "prior.ratio_max = " << format_double(c.prior.ratio_max)
      << '\n';
  write_episode_config(out, c.episode, "episode.");
  std::ostringstream strip;
  write_params(strip, c.base);
  std::istringstream lines(strip.str());
  for (std::string line; std::getline(lines, line);) {
    out << "strip." << line << '\n';
  }
}

bool assign_trainer_key(TrainerConfig& c, const std::string& key,
                        const std::string& value) {
  if (key == "lambda") c.lambda = parse_int(key, value);
  else if (key == "sigma0") c.sigma0 = parse_double(key, value);
  else if (key == "generations") c.generations = parse_int(key, value);
  else if (key == "samples_per_eval") c.samples_per_eval = parse_int(key, value);
  else if (key == "seed") c.seed = parse_u64(key, value);
  else if (key == "threads") c.threads = parse_int(key, value);
  else if (key == "prior.k_min") c.prior.k_min = parse_double(key, value);
  else if (key == "prior.k_max") c.prior.k_max = parse_double(key, value);
  else if (key == "prior.ratio_min")
    c.prior.ratio_min = parse_double(key, value);
  else if (key == "prior.ratio_max")
    c.prior.ratio_max = parse_double(key, value);
  else if (key.starts_with("episode."))
    return assign_episode_key(c.episode, key.substr(8), value);
  else if (key.starts_with("strip."))
    return assign_param(c.base, key.substr(6), value);
  else return false;
  return true;
}

TrainerConfig read_trainer_config(std::istream& in, TrainerConfig base) {
  for (const auto& [key, value] : parse_key_values(in)) {
    if (!assign_trainer_key(base, key, value)) {
      throw std::invalid_argument("unknown trainer key: " + key);
    }
  }
  return base;
}

namespace {

std::vector<std::optional<StripState>> lift_all(
    const std::vector<StripParams>& batch, const EpisodeConfig& episode,
    int threads) {
  std::vector<std::optional<StripState>> starts(batch.size());
  parallel_for(static_cast<int>(batch.size()), threads, [&](int j) {
    try {
      starts[j] = lifted_start_state(batch[j], episode);
    } catch (const SimulationError&) {
      // Left empty; the episode repeats the lift and is marked failed.
    }
  });
  return starts;
}

const StripState* start_or_null(const std::optional<StripState>& s) {
  return s ? &*s : nullptr;
}

}  // namespace

double evaluate_candidate(const PolicyWeights& weights,
                          const std::vector<StripParams>& theta_batch,
                          const EpisodeConfig& episode,
                          const std::vector<StripState>* starts,
                          int threads) {
  if (theta_batch.empty()) throw std::invalid_argument("empty theta batch");
  if (starts && starts->size() != theta_batch.size()) {
    throw std::invalid_argument("one start state per theta required");
  }
  const int m = static_cast<int>(theta_batch.size());
  std::vector<double> rewards(m);
  parallel_for(m, threads, [&](int j) {
    rewards[j] = run_episode(weights, theta_batch[j], episode,
                             starts ? &(*starts)[j] : nullptr)
                     .total_reward;
  });
  double sum = 0.0;
  for (double r : rewards) sum += r;
  return sum / m;
}

TrainingRun train(const TrainerConfig& config,
                  const GenerationCallback& on_generation) {
  validate(config);
  TrainingRun run;
  run.config = config;
  run.search_seed = derive_seed(config.seed, SeedStream::kSearch);
  run.material_seed = derive_seed(config.seed, SeedStream::kTrainingMaterials);
  run.best = PolicyWeights::zeros();
  run.mean = run.best;
  run.best_fitness = -std::numeric_limits<double>::infinity();

  const int dim = run.best.size();
  const int lambda = config.lambda;
  const int m = config.samples_per_eval;
  Cmaes es(Eigen::VectorXd::Zero(dim), config.sigma0, lambda, run.search_seed);
  std::mt19937_64 material_rng(run.material_seed);

  for (int g = 0; g < config.generations; ++g) {
    std::vector<StripParams> batch;
    for (int j = 0; j < m; ++j) {
      batch.push_back(sample_prior(config.prior, config.base, material_rng));
    }
    const auto starts = lift_all(batch, config.episode, config.threads);
    const auto& population = es.ask();
    std::vector<PolicyWeights> candidates;
    for (const auto& x : population) {
      candidates.push_back(PolicyWeights::from_vector(
          std::vector<double>(x.data(), x.data() + x.size())));
    }

    std::vector<EpisodeResult> results(lambda * m);
    parallel_for(lambda * m, config.threads, [&](int t) {
      const int i = t / m;
      const int j = t % m;
      EpisodeResult r = run_episode(candidates[i], batch[j], config.episode,
                                    start_or_null(starts[j]));
      r.trajectory.clear();
      r.trajectory.shrink_to_fit();
      results[t] = std::move(r);
    });

    GenerationStats st;
    st.generation = g;
    st.max_fitness = -std::numeric_limits<double>::infinity();
    std::vector<double> costs(lambda);
    double fitness_sum = 0.0;
    for (int i = 0; i < lambda; ++i) {
      double sum = 0.0;
      for (int j = 0; j < m; ++j) {
        const EpisodeResult& r = results[i * m + j];
        sum += r.total_reward;
        if (r.failed) ++st.failures;
        run.ledger.push_back({g, i, j, batch[j].joint_stiffness,
                              batch[j].joint_damping, r.total_reward,
                              r.touched, r.failed, r.d});
      }
      const double fitness = sum / m;
      costs[i] = -fitness;
      fitness_sum += fitness;
      st.max_fitness = std::max(st.max_fitness, fitness);
      if (fitness > run.best_fitness) {
        run.best_fitness = fitness;
        run.best = candidates[i];
        run.best_generation = g;
        run.best_candidate = i;
      }
    }
    st.mean_fitness = fitness_sum / lambda;
    st.best_so_far = run.best_fitness;
    run.theta_batches.push_back(batch);

    if (2 * st.failures > lambda * m) {
      throw TrainingError("generation " + std::to_string(g) + ": " +
                          std::to_string(st.failures) + " of " +
                          std::to_string(lambda * m) +
                          " episodes diverged");
    }
    es.tell(costs);
    run.mean = PolicyWeights::from_vector(std::vector<double>(
        es.mean().data(), es.mean().data() + es.mean().size()));
    st.sigma = es.sigma();
    run.stats.push_back(st);
    if (on_generation) on_generation(run);
  }
  return run;
}

void write_ledger_csv(std::ostream& out, const std::vector<LedgerRow>& rows,
                      bool header) {
  if (header) {
    out << "generation,candidate,theta_index,k,b,reward,touched,failed,d\n";
  }
  for (const auto& r : rows) {
    out << r.generation << ',' << r.candidate << ',' << r.theta_index << ','
        << format_double(r.k) << ',' << format_double(r.b) << ','
        << format_double(r.reward) << ',' << (r.touched ? 1 : 0) << ','
        << (r.failed ? 1 : 0) << ',' << format_double(r.d) << '\n';
  }
}

void write_stats_csv(std::ostream& out,
                     const std::vector<GenerationStats>& rows, bool header) {
  if (header) {
    out << "generation,mean_fitness,max_fitness,best_so_far,sigma,failures\n";
  }
  for (const auto& r : rows) {
    out << r.generation << ',' << format_double(r.mean_fitness) << ','
        << format_double(r.max_fitness) << ',' << format_double(r.best_so_far)
        << ',' << format_double(r.sigma) << ',' << r.failures << '\n';
  }
}

FoldHeightGrid FoldHeightGrid::uniform(const MaterialPrior& prior, int n_k,
                                       int n_b) {
  validate(prior);
  if (n_k < 1 || n_b < 1) throw std::invalid_argument("empty grid");
  FoldHeightGrid grid;
  for (int i = 0; i < n_k; ++i) {
    grid.stiffness.push_back(
        n_k == 1 ? 0.5 * (prior.k_min + prior.k_max)
                 : prior.k_min + (prior.k_max - prior.k_min) * i / (n_k - 1));
  }
  for (int i = 0; i < n_b; ++i) {
    grid.damping_ratio.push_back(
        n_b == 1 ? std::sqrt(prior.ratio_min * prior.ratio_max)
                 : prior.ratio_min *
                       std::pow(prior.ratio_max / prior.ratio_min,
                                static_cast<double>(i) / (n_b - 1)));
  }
  return grid;
}

std::vector<EnvelopeRow> fold_height_envelope(
    const MaterialPrior& prior, const std::vector<double>& heights,
    const FoldHeightGrid& grid, const StripParams& base,
    const EpisodeConfig& episode, double speed, int threads) {
  validate(prior);
  for (double z : heights) {
    if (!(z > 0.0)) throw std::invalid_argument("heights must be positive");
  }
  const int nk = static_cast<int>(grid.stiffness.size());
  const int nb = static_cast<int>(grid.damping_ratio.size());
  const int per_height = nk * nb;
  std::vector<EnvelopeRow> rows(heights.size() * per_height);
  parallel_for(static_cast<int>(rows.size()), threads, [&](int t) {
    const double z = heights[t / per_height];
    const double k = grid.stiffness[(t % per_height) / nb];
    const double b = damping_min(k) * grid.damping_ratio[t % nb];
    const StripParams params = base.with_material(k, b);
    EpisodeConfig cfg = episode;
    cfg.start_height = z;
    EnvelopeRow row{z, k, b, false, 0.0};
    try {
      FoldingDriver driver(params, cfg.contact,
                           lifted_start_state(params, cfg));
      const double L = params.strip_length;
      const double ds = speed * params.sim_dt;
      std::vector<Vec2> targets(cfg.control_period);
      while (!driver.touched() && driver.state().gripper().x() > -0.2 * L) {
        Vec2 g = driver.state().gripper();
        for (auto& p : targets) {
          g.x() = std::max(g.x() - ds, -0.2 * L);
          p = Vec2(g.x(), z);
        }
        driver.advance(targets);
      }
      if (driver.touched()) {
        row.touched = true;
        row.x_touch = driver.state().gripper().x();
      }
    } catch (const SimulationError&) {
      // Censored row.
    }
    rows[t] = row;
  });
  return rows;
}

void write_envelope_csv(std::ostream& out,
                        const std::vector<EnvelopeRow>& rows) {
  out << "height,k,b,touched,x_touch\n";
  for (const auto& r : rows) {
    out << format_double(r.height) << ',' << format_double(r.k) << ','
        << format_double(r.b) << ',' << (r.touched ? 1 : 0) << ',';
    if (r.touched) out << format_double(r.x_touch);
    out << '\n';
  }
}

}  // namespace stripfold
