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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include "stripfold/paths.hpp"
#include "stripfold/reward.hpp"
#include "stripfold/trainer.hpp"

namespace stripfold {
namespace {

TEST(PriorTest, SamplesStayInBoundsWithExpectedMoments) {
  const MaterialPrior prior;
  const StripParams base = StripParams::desk_scale();
  std::mt19937_64 rng(2024);
  const int n = 10000;
  double k_sum = 0.0;
  std::vector<double> ratios;
  for (int i = 0; i < n; ++i) {
    const StripParams p = sample_prior(prior, base, rng);
    ASSERT_TRUE(within_material_prior(p.joint_stiffness, p.joint_damping));
    EXPECT_EQ(p.links(), 60);
    k_sum += p.joint_stiffness;
    ratios.push_back(p.joint_damping / damping_min(p.joint_stiffness));
  }
  EXPECT_NEAR(k_sum / n, 0.16, 0.02 * 0.16);
  std::nth_element(ratios.begin(), ratios.begin() + n / 2, ratios.end());
  EXPECT_NEAR(ratios[n / 2], std::sqrt(50.0), 0.05 * std::sqrt(50.0));
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  EXPECT_GE(*lo, 1.0 - 1e-12);
  EXPECT_LE(*hi, 50.0 * (1 + 1e-12));
  EXPECT_LT(*lo, 1.1);
  EXPECT_GT(*hi, 45.0);
}

TEST(PriorTest, FixedSeedGivesFixedSequence) {
  const MaterialPrior prior;
  const StripParams base = StripParams::desk_scale();
  std::mt19937_64 a(8), b(8);
  for (int i = 0; i < 100; ++i) {
    const StripParams pa = sample_prior(prior, base, a);
    const StripParams pb = sample_prior(prior, base, b);
    ASSERT_EQ(pa.joint_stiffness, pb.joint_stiffness);
    ASSERT_EQ(pa.joint_damping, pb.joint_damping);
  }
}

TEST(PriorTest, PointPrior) {
  MaterialPrior prior;
  prior.k_min = prior.k_max = 0.16;
  prior.ratio_min = prior.ratio_max = std::sqrt(50.0);
  std::mt19937_64 rng(1);
  const StripParams p = sample_prior(prior, StripParams::desk_scale(), rng);
  EXPECT_EQ(p.joint_stiffness, 0.16);
  EXPECT_NEAR(p.joint_damping, std::sqrt(50.0) * damping_min(0.16), 1e-15);
}

TEST(PriorTest, RejectsInvalidPriors) {
  MaterialPrior prior;
  prior.k_min = 0.4;
  EXPECT_THROW(validate(prior), std::invalid_argument);
  prior = {};
  prior.ratio_min = 0.5;
  EXPECT_THROW(validate(prior), std::invalid_argument);
  prior = {};
  prior.ratio_max = 80.0;
  EXPECT_THROW(validate(prior), std::invalid_argument);
}

TEST(SeedTest, StreamsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t master : {0ull, 1ull, 2ull, 12345ull}) {
    for (SeedStream s : {SeedStream::kSearch, SeedStream::kTrainingMaterials,
                         SeedStream::kHeldOut}) {
      EXPECT_TRUE(seen.insert(derive_seed(master, s)).second);
      EXPECT_EQ(derive_seed(master, s), derive_seed(master, s));
    }
  }
}

TEST(TrainerConfigTest, TextRoundTrip) {
  TrainerConfig c;
  c.lambda = 12;
  c.sigma0 = 0.3;
  c.generations = 7;
  c.samples_per_eval = 3;
  c.seed = 99;
  c.prior.k_max = 0.25;
  c.prior.ratio_max = 20.0;
  c.episode.horizon = 123;
  c.episode.reward.force_scale = 0.02;
  c.base.substeps = 12;
  std::stringstream ss;
  write_trainer_config(ss, c);
  const TrainerConfig r = read_trainer_config(ss);
  EXPECT_EQ(r.lambda, 12);
  EXPECT_EQ(r.sigma0, 0.3);
  EXPECT_EQ(r.generations, 7);
  EXPECT_EQ(r.samples_per_eval, 3);
  EXPECT_EQ(r.seed, 99u);
  EXPECT_EQ(r.prior.k_max, 0.25);
  EXPECT_EQ(r.prior.ratio_max, 20.0);
  EXPECT_EQ(r.episode.horizon, 123);
  EXPECT_EQ(r.episode.reward.force_scale, 0.02);
  EXPECT_EQ(r.base.substeps, 12);
  std::istringstream bad("lambda = 2\n");
  EXPECT_THROW(validate(read_trainer_config(bad)), std::invalid_argument);
  std::istringstream unknown("population = 8\n");
  EXPECT_ANY_THROW(read_trainer_config(unknown));
}

TEST(EvaluateCandidateTest, IdenticalBatchEqualsSingleEpisode) {
  const StripParams p = StripParams::desk_scale().with_material(0.1, 3 * damping_min(0.1));
  EpisodeConfig episode;
  episode.horizon = 40;
  std::vector<double> v(101);
  for (int i = 0; i < 101; ++i) v[i] = 0.2 * std::sin(0.7 * i);
  const PolicyWeights w = PolicyWeights::from_vector(v);
  const double single = run_episode(w, p, episode).total_reward;
  EXPECT_EQ(evaluate_candidate(w, {p}, episode), single);
  EXPECT_DOUBLE_EQ(evaluate_candidate(w, {p, p, p}, episode, nullptr, 2), single);
  EXPECT_THROW(evaluate_candidate(w, {}, episode), std::invalid_argument);
}

TrainerConfig tiny_config() {
  TrainerConfig c;
  c.lambda = 4;
  c.generations = 3;
  c.samples_per_eval = 2;
  c.seed = 5;
  c.threads = 1;
  c.episode.horizon = 30;
  return c;
}

bool same_ledger(const std::vector<LedgerRow>& a, const std::vector<LedgerRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].generation != b[i].generation || a[i].candidate != b[i].candidate ||
        a[i].theta_index != b[i].theta_index || a[i].k != b[i].k ||
        a[i].b != b[i].b || a[i].reward != b[i].reward ||
        a[i].touched != b[i].touched || a[i].failed != b[i].failed ||
        a[i].d != b[i].d) {
      return false;
    }
  }
  return true;
}

class TinyTrainingTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { run_ = new TrainingRun(train(tiny_config())); }
  static void TearDownTestSuite() { delete run_; }
  static TrainingRun* run_;
};
TrainingRun* TinyTrainingTest::run_ = nullptr;

TEST_F(TinyTrainingTest, LedgerShape) {
  const TrainingRun& run = *run_;
  EXPECT_EQ(run.ledger.size(), 3u * 4u * 2u);
  EXPECT_EQ(run.stats.size(), 3u);
  EXPECT_EQ(run.theta_batches.size(), 3u);
  EXPECT_EQ(run.best.size(), 101);
  for (std::size_t t = 0; t < run.ledger.size(); ++t) {
    EXPECT_EQ(run.ledger[t].generation, static_cast<int>(t / 8));
    EXPECT_EQ(run.ledger[t].candidate, static_cast<int>(t / 2 % 4));
    EXPECT_EQ(run.ledger[t].theta_index, static_cast<int>(t % 2));
  }
}

TEST_F(TinyTrainingTest, ReplaysBitIdenticallyFromSeeds) {
  const TrainingRun again = train(run_->config);
  EXPECT_TRUE(same_ledger(again.ledger, run_->ledger));
  EXPECT_EQ(again.best.values, run_->best.values);
  TrainerConfig threaded = run_->config;
  threaded.threads = 3;
  EXPECT_TRUE(same_ledger(train(threaded).ledger, run_->ledger));
}

TEST_F(TinyTrainingTest, CandidatesShareTheMaterialBatch) {
  for (const LedgerRow& row : run_->ledger) {
    const StripParams& p = run_->theta_batches[row.generation][row.theta_index];
    EXPECT_EQ(row.k, p.joint_stiffness);
    EXPECT_EQ(row.b, p.joint_damping);
  }
}

TEST_F(TinyTrainingTest, BestSoFarIsMonotone) {
  double previous = -1e300;
  for (const GenerationStats& s : run_->stats) {
    EXPECT_GE(s.best_so_far, previous);
    EXPECT_GE(s.best_so_far, s.max_fitness);
    EXPECT_GE(s.max_fitness, s.mean_fitness);
    previous = s.best_so_far;
  }
  EXPECT_EQ(run_->stats.back().best_so_far, run_->best_fitness);
}

TEST_F(TinyTrainingTest, BestReevaluatesToItsLedgerFitness) {
  const TrainingRun& run = *run_;
  const auto& batch = run.theta_batches[run.best_generation];
  EXPECT_EQ(evaluate_candidate(run.best, batch, run.config.episode), run.best_fitness);
  double sum = 0.0;
  int count = 0;
  for (const LedgerRow& row : run.ledger) {
    if (row.generation == run.best_generation && row.candidate == run.best_candidate) {
      sum += row.reward;
      ++count;
    }
  }
  EXPECT_EQ(sum / count, run.best_fitness);
}

TEST_F(TinyTrainingTest, CsvWritersEmitOneLinePerRow) {
  std::ostringstream ledger, stats;
  write_ledger_csv(ledger, run_->ledger);
  write_stats_csv(stats, run_->stats);
  const std::string l = ledger.str(), s = stats.str();
  EXPECT_EQ(std::count(l.begin(), l.end(), '\n'),
            static_cast<long>(run_->ledger.size()) + 1);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'),
            static_cast<long>(run_->stats.size()) + 1);
}

TEST(TrainerTest, SingleMaterialPolicyBeatsBaselines) {
  TrainerConfig c;
  c.prior.k_min = c.prior.k_max = 0.16;
  c.prior.ratio_min = c.prior.ratio_max = std::sqrt(50.0);
  c.samples_per_eval = 1;
  c.generations = 40;
  c.seed = 3;
  const TrainingRun run = train(c);
  const StripParams& p = run.theta_batches.front().front();
  const EpisodeResult policy = run_episode(run.best, p, c.episode);
  const EpisodeResult tri = run_path(triangular_path(p.strip_length), p);
  const EpisodeResult circ = run_path(circular_path(p.strip_length), p);
  ASSERT_TRUE(policy.touched);
  EXPECT_LT(std::abs(policy.d), std::abs(tri.d));
  EXPECT_LT(std::abs(policy.d), std::abs(circ.d));
}

TEST(EnvelopeTest, TouchPositionsAreInsideTheStrip) {
  const MaterialPrior prior;
  const FoldHeightGrid grid = FoldHeightGrid::uniform(prior, 3, 2);
  EXPECT_EQ(grid.stiffness.front(), prior.k_min);
  EXPECT_EQ(grid.stiffness.back(), prior.k_max);
  EXPECT_DOUBLE_EQ(grid.damping_ratio.back(), prior.ratio_max);
  const auto rows = fold_height_envelope(prior, {0.1}, grid);
  ASSERT_EQ(rows.size(), 6u);
  for (const EnvelopeRow& r : rows) {
    ASSERT_TRUE(r.touched);
    EXPECT_GT(r.x_touch, 0.0);
    EXPECT_LT(r.x_touch, 0.6);
    EXPECT_EQ(r.height, 0.1);
  }
  EXPECT_THROW(fold_height_envelope(prior, {-0.1}, grid), std::invalid_argument);
}

}  // namespace
}  // namespace stripfold
