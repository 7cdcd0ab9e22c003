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

#ifndef STRIPFOLD_CMAES_HPP_
#define STRIPFOLD_CMAES_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace stripfold {

// (mu/mu_w, lambda)-CMA-ES with cumulative step-size adaptation and rank-one
// plus rank-mu covariance updates. Minimizes.
class Cmaes {
 public:
  Cmaes(Eigen::VectorXd mean, double sigma, int lambda, std::uint64_t seed);

  // Samples a new population; the returned reference stays valid until the
  // next call.
  const std::vector<Eigen::VectorXd>& ask();
  // costs[i] belongs to the i-th candidate of the last ask().
  void tell(const std::vector<double>& costs);

  int dimension() const { return static_cast<int>(mean_.size()); }
  int lambda() const { return lambda_; }
  int mu() const { return mu_; }
  int generation() const { return generation_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  double sigma() const { return sigma_; }
  const Eigen::MatrixXd& covariance() const { return C_; }
  const Eigen::VectorXd& best_x() const { return best_x_; }
  double best_cost() const { return best_cost_; }

 private:
  void update_eigensystem();

  int n_;
  int lambda_;
  int mu_;
  Eigen::VectorXd weights_;
  double mu_eff_;
  double c_sigma_, d_sigma_, c_c_, c_1_, c_mu_, chi_n_;

  Eigen::VectorXd mean_;
  double sigma_;
  Eigen::MatrixXd C_;
  Eigen::MatrixXd B_;
  Eigen::VectorXd D_;
  Eigen::VectorXd p_sigma_;
  Eigen::VectorXd p_c_;
  int generation_ = 0;

  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::vector<Eigen::VectorXd> y_;  // B D z of the last population
  std::vector<Eigen::VectorXd> x_;

  Eigen::VectorXd best_x_;
  double best_cost_;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double cost = 0.0;
  long evaluations = 0;
};

// Runs until cost <= target or max_evaluations is exhausted.
MinimizeResult cmaes_minimize(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x0, double sigma0, int lambda, std::uint64_t seed,
    long max_evaluations, double target);

}  // namespace stripfold

#endif  // STRIPFOLD_CMAES_HPP_
