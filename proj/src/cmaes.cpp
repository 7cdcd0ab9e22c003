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

#include "stripfold/cmaes.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace stripfold {

Cmaes::Cmaes(Eigen::VectorXd mean, double sigma, int lambda,
             std::uint64_t seed)
    : n_(static_cast<int>(mean.size())),
      lambda_(lambda),
      mu_(lambda / 2),
      mean_(std::move(mean)),
      sigma_(sigma),
      rng_(seed),
      best_cost_(std::numeric_limits<double>::infinity()) {
  if (n_ < 1) throw std::invalid_argument("CMA-ES needs dimension >= 1");
  if (lambda_ < 4) throw std::invalid_argument("CMA-ES needs lambda >= 4");
  if (!(sigma_ > 0.0)) throw std::invalid_argument("sigma must be positive");

  weights_.resize(mu_);
  for (int i = 0; i < mu_; ++i) {
    weights_[i] = std::log(mu_ + 0.5) - std::log(i + 1.0);
  }
  weights_ /= weights_.sum();
  mu_eff_ = 1.0 / weights_.squaredNorm();

  const double n = n_;
  c_sigma_ = (mu_eff_ + 2.0) / (n + mu_eff_ + 5.0);
  d_sigma_ = 1.0 +
             2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (n + 1.0)) - 1.0) +
             c_sigma_;
  c_c_ = (4.0 + mu_eff_ / n) / (n + 4.0 + 2.0 * mu_eff_ / n);
  c_1_ = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff_);
  c_mu_ = std::min(1.0 - c_1_, 2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) /
                                   ((n + 2.0) * (n + 2.0) + mu_eff_));
  chi_n_ = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

  C_ = Eigen::MatrixXd::Identity(n_, n_);
  B_ = Eigen::MatrixXd::Identity(n_, n_);
  D_ = Eigen::VectorXd::Ones(n_);
  p_sigma_ = Eigen::VectorXd::Zero(n_);
  p_c_ = Eigen::VectorXd::Zero(n_);
  best_x_ = mean_;
}

const std::vector<Eigen::VectorXd>& Cmaes::ask() {
  y_.assign(lambda_, Eigen::VectorXd(n_));
  x_.assign(lambda_, Eigen::VectorXd(n_));
  Eigen::VectorXd z(n_);
  for (int k = 0; k < lambda_; ++k) {
    for (int i = 0; i < n_; ++i) z[i] = normal_(rng_);
    y_[k] = B_ * D_.cwiseProduct(z);
    x_[k] = mean_ + sigma_ * y_[k];
  }
  return x_;
}

void Cmaes::tell(const std::vector<double>& costs) {
  if (static_cast<int>(costs.size()) != lambda_ ||
      static_cast<int>(x_.size()) != lambda_) {
    throw std::invalid_argument("tell() needs one cost per asked candidate");
  }
  std::vector<int> order(lambda_);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return costs[a] < costs[b]; });
  if (costs[order[0]] < best_cost_) {
    best_cost_ = costs[order[0]];
    best_x_ = x_[order[0]];
  }

  Eigen::VectorXd y_w = Eigen::VectorXd::Zero(n_);
  for (int i = 0; i < mu_; ++i) y_w += weights_[i] * y_[order[i]];
  mean_ += sigma_ * y_w;

  // C^{-1/2} y_w = B D^{-1} B^T y_w.
  const Eigen::VectorXd c_inv_sqrt_y =
      B_ * (B_.transpose() * y_w).cwiseQuotient(D_);
  p_sigma_ = (1.0 - c_sigma_) * p_sigma_ +
             std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mu_eff_) * c_inv_sqrt_y;
  ++generation_;
  const double ps_norm = p_sigma_.norm();
  const double h_sigma_threshold =
      (1.4 + 2.0 / (n_ + 1.0)) * chi_n_ *
      std::sqrt(1.0 - std::pow(1.0 - c_sigma_, 2.0 * generation_));
  const double h_sigma = ps_norm < h_sigma_threshold ? 1.0 : 0.0;
  p_c_ = (1.0 - c_c_) * p_c_ +
         h_sigma * std::sqrt(c_c_ * (2.0 - c_c_) * mu_eff_) * y_w;

  Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < mu_; ++i) {
    const auto& y = y_[order[i]];
    rank_mu.noalias() += weights_[i] * y * y.transpose();
  }
  const double delta_h = (1.0 - h_sigma) * c_c_ * (2.0 - c_c_);
  C_ = (1.0 - c_1_ - c_mu_) * C_ +
       c_1_ * (p_c_ * p_c_.transpose() + delta_h * C_) + c_mu_ * rank_mu;

  sigma_ *= std::exp((c_sigma_ / d_sigma_) * (ps_norm / chi_n_ - 1.0));
  update_eigensystem();
}

void Cmaes::update_eigensystem() {
  C_ = 0.5 * (C_ + C_.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C_);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("CMA-ES covariance decomposition failed");
  }
  B_ = eig.eigenvectors();
  D_ = eig.eigenvalues().cwiseMax(1e-300).cwiseSqrt();
}

MinimizeResult cmaes_minimize(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x0, double sigma0, int lambda, std::uint64_t seed,
    long max_evaluations, double target) {
  Cmaes es(x0, sigma0, lambda, seed);
  MinimizeResult result;
  result.cost = std::numeric_limits<double>::infinity();
  std::vector<double> costs(lambda);
  while (result.evaluations + lambda <= max_evaluations) {
    const auto& pop = es.ask();
    for (int i = 0; i < lambda; ++i) {
      costs[i] = f(pop[i]);
      ++result.evaluations;
      if (costs[i] < result.cost) {
        result.cost = costs[i];
        result.x = pop[i];
      }
    }
    if (result.cost <= target) break;
    es.tell(costs);
  }
  return result;
}

}  // namespace stripfold
