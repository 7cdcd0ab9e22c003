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

#include "stripfold/strip_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace stripfold {
namespace {

// Half bandwidth of the (x, z)-interleaved velocity system: a bending joint
// couples three consecutive spheres, i.e. six consecutive dofs.
constexpr int kBand = 5;
constexpr double kProjectionTolerance = 1e-11;
constexpr int kContactPasses = 16;
constexpr double kBuckleThreshold = 1e-9;
// Weight of the implicit link-stretch term in the velocity solve, relative to
// the sphere mass. Keeps the solved velocities tangent to the links.
constexpr double kLinkPenalty = 1e6;

// Rows are padded with kBand identity rows on both sides so the loops below
// never need bounds checks. Row r stores A(r, r - d) at [r][d].
using BandRow = std::array<double, kBand + 1>;

inline double& band_at(std::vector<BandRow>& a, int row, int col) {
  return a[row + kBand][row - col];
}

// In-place banded Cholesky (lower) followed by the two triangular solves.
// rhs is padded the same way as the matrix.
bool band_solve(std::vector<BandRow>& a, std::vector<double>& rhs, int n) {
  BandRow* L = a.data() + kBand;
  double* y = rhs.data() + kBand;
  for (int j = 0; j < n; ++j) {
    double d = L[j][0];
    for (int t = 1; t <= kBand; ++t) d -= L[j][t] * L[j][t];
    if (!(d > 0.0)) return false;
    const double ljj = std::sqrt(d);
    L[j][0] = ljj;
    const double inv = 1.0 / ljj;
    for (int e = 1; e <= kBand; ++e) {
      double s = L[j + e][e];
      for (int t = 1; t <= kBand - e; ++t) s -= L[j + e][e + t] * L[j][t];
      L[j + e][e] = s * inv;
    }
  }
  for (int i = 0; i < n; ++i) {
    double s = y[i];
    for (int t = 1; t <= kBand; ++t) s -= L[i][t] * y[i - t];
    y[i] = s / L[i][0];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int t = 1; t <= kBand; ++t) s -= L[i + t][t] * y[i + t];
    y[i] = s / L[i][0];
  }
  return true;
}

inline Vec2 perp(const Vec2& e) { return {-e.y(), e.x()}; }

// Bend angle at the joint between links e1 = p1 - p0 and e2 = p2 - p1 and its
// gradient with respect to p0, p1, p2.
inline double joint_angle(const Vec2& p0, const Vec2& p1, const Vec2& p2,
                          Vec2* g0, Vec2* g1, Vec2* g2) {
  const Vec2 e1 = p1 - p0;
  const Vec2 e2 = p2 - p1;
  const double cross = e1.x() * e2.y() - e1.y() * e2.x();
  const double dot = e1.dot(e2);
  const double theta = std::atan2(cross, dot);
  if (g0 != nullptr) {
    const double n1 = std::max(e1.squaredNorm(), 1e-30);
    const double n2 = std::max(e2.squaredNorm(), 1e-30);
    *g0 = perp(e1) / n1;
    *g2 = perp(e2) / n2;
    *g1 = -(*g0) - (*g2);
  }
  return theta;
}

bool all_finite(const std::vector<Vec2>& v) {
  return std::all_of(v.begin(), v.end(),
                     [](const Vec2& p) { return p.allFinite(); });
}

}  // namespace

StripSimulator::StripSimulator(StripParams params, int min_links)
    : params_(params) {
  validate(params_, min_links);
  n_ = params_.links();
  dt_ = params_.sim_dt / params_.substeps;
  k_ = params_.effective_stiffness();
  b_ = params_.effective_damping();
  const std::size_t spheres = static_cast<std::size_t>(n_) + 1;
  x_old_.resize(spheres);
  x_pass_.resize(spheres);
  impulse_pass_.resize(spheres);
  x_pred_.resize(spheres);
  impulse_.resize(spheres);
  grad_prev_.resize(spheres);
  grad_mid_.resize(spheres);
  grad_next_.resize(spheres);
  theta_.resize(spheres);
  w_.resize(spheres);
  locked_.resize(spheres);
  desk_active_.resize(spheres);
  band_.resize(2 * spheres + 2 * kBand);
  rhs_.resize(2 * spheres + 2 * kBand);
  normals_.resize(spheres);
  tri_diag_.resize(spheres);
  tri_off_.resize(spheres);
  tri_rhs_.resize(spheres);
  tri_tmp_.resize(spheres);
}

StripState StripSimulator::init_flat() const {
  StripState s;
  const double l = params_.link_length;
  s.positions.resize(static_cast<std::size_t>(n_) + 1);
  s.velocities.assign(static_cast<std::size_t>(n_) + 1, Vec2::Zero());
  for (int i = 0; i <= n_; ++i) s.positions[i] = Vec2(i * l, 0.0);
  return s;
}

ForceReadout StripSimulator::step(StripState& state, const Vec2& target) {
  if (state.links() != n_) {
    throw std::invalid_argument("StripSimulator::step: state size mismatch");
  }
  const Vec2 from = state.gripper();
  Vec2 to = from;
  if (state.grasped) {
    to = target;
    const Vec2 delta = to - from;
    const double max_move = params_.max_gripper_speed * params_.sim_dt;
    const double dist = delta.norm();
    if (dist > max_move * (1 + 1e-9)) to = from + delta * (max_move / dist);
    // Keep the chain feasible: the grasped end cannot leave the reachable
    // disk around the pin.
    const Vec2 pin = pin_point();
    const double reach =
        std::max(n_ * params_.link_length * (1.0 - 1e-4), (from - pin).norm());
    const double radius = (to - pin).norm();
    if (radius > reach) to = pin + (to - pin) * (reach / radius);
  }
  if (!to.allFinite()) {
    throw SimulationError("non-finite gripper target", step_count_);
  }
  double fx = 0.0;
  const int sub = params_.substeps;
  for (int s = 0; s < sub; ++s) {
    const Vec2 a = from + (to - from) * (static_cast<double>(s) / sub);
    const Vec2 b = (s + 1 == sub) ? to : Vec2(from + (to - from) *
                                         (static_cast<double>(s + 1) / sub));
    substep(state, a, b, fx);
    if (!all_finite(state.positions) || !all_finite(state.velocities)) {
      throw SimulationError("non-finite strip state after substep " +
                                std::to_string(s),
                            step_count_);
    }
  }
  state.time += params_.sim_dt;
  ++step_count_;
  return ForceReadout{fx / sub};
}

void StripSimulator::assemble_and_solve_velocities(StripState& state,
                                                   const Vec2& grip_vel) {
  const int dofs = 2 * (n_ + 1);
  const double m = params_.sphere_mass;
  const auto& p = state.positions;
  const auto& v = state.velocities;
  for (auto& row : band_) row.fill(0.0);
  std::fill(rhs_.begin(), rhs_.end(), 0.0);
  for (int i = 0; i < kBand; ++i) {
    band_[i][0] = 1.0;
    band_[band_.size() - 1 - i][0] = 1.0;
  }
  double* rhs = rhs_.data() + kBand;
  for (int i = 0; i <= n_; ++i) {
    band_at(band_, 2 * i, 2 * i) = m;
    band_at(band_, 2 * i + 1, 2 * i + 1) = m;
    rhs[2 * i] = m * v[i].x();
    rhs[2 * i + 1] = m * v[i].y() - dt_ * m * params_.gravity;
  }
  const double stiff = dt_ * b_ + dt_ * dt_ * k_;
  for (int j = 1; j < n_; ++j) {
    Vec2 g0, g1, g2;
    const double theta = joint_angle(p[j - 1], p[j], p[j + 1], &g0, &g1, &g2);
    theta_[j] = theta;
    grad_prev_[j] = g0;
    grad_mid_[j] = g1;
    grad_next_[j] = g2;
    const double g[6] = {g0.x(), g0.y(), g1.x(), g1.y(), g2.x(), g2.y()};
    const int base = 2 * (j - 1);
    for (int r = 0; r < 6; ++r) {
      rhs[base + r] -= dt_ * k_ * theta * g[r];
      for (int c = 0; c <= r; ++c) {
        band_at(band_, base + r, base + c) += stiff * g[r] * g[c];
      }
    }
  }
  const double pen = kLinkPenalty * m;
  for (int j = 0; j < n_; ++j) {
    const Vec2 e = p[j + 1] - p[j];
    const double len = e.norm();
    const Vec2 nrm = len > 1e-15 ? Vec2(e / len) : Vec2(1.0, 0.0);
    if (j == 0) pin_normal_ = nrm;
    const double g[4] = {-nrm.x(), -nrm.y(), nrm.x(), nrm.y()};
    const int base = 2 * j;
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c <= r; ++c) {
        band_at(band_, base + r, base + c) += pen * g[r] * g[c];
      }
    }
  }
  // Eliminate the kinematic dofs: pin (zero velocity) and, when grasped, the
  // gripper (prescribed velocity). Spheres resting on the desk get a zero
  // vertical velocity while the desk pushes on them (active set on the
  // reaction), so the bending response already accounts for the support.
  auto fix_dof = [&](int dof, double value) {
    for (int r = std::max(0, dof - kBand); r <= std::min(dofs - 1, dof + kBand);
         ++r) {
      if (r == dof) continue;
      double& entry = r > dof ? band_at(band_, r, dof) : band_at(band_, dof, r);
      rhs[r] -= entry * value;
      entry = 0.0;
    }
    band_at(band_, dof, dof) = 1.0;
    rhs[dof] = value;
  };
  // Desk support: v_z >= -z / dt for the dynamic spheres, with a
  // non-negative reaction on the active ones.
  const int last_dynamic = state.grasped ? n_ - 1 : n_;
  const bool desk = params_.desk_enabled;
  for (int i = 0; i <= n_; ++i) {
    desk_active_[i] = desk && i >= 1 && i <= last_dynamic && p[i].y() <= 1e-12;
  }
  if (desk) {
    band_free_ = band_;
    rhs_free_ = rhs_;
  }
  const double* rhs_free = rhs_free_.data() + kBand;
  const int max_rounds = 4 * (n_ + 1);
  for (int round = 0;; ++round) {
    if (round > 0) {
      band_ = band_free_;
      rhs_ = rhs_free_;
    }
    fix_dof(0, 0.0);
    fix_dof(1, 0.0);
    if (state.grasped) {
      fix_dof(2 * n_, grip_vel.x());
      fix_dof(2 * n_ + 1, grip_vel.y());
    }
    for (int i = 1; i <= last_dynamic; ++i) {
      if (desk_active_[i]) fix_dof(2 * i + 1, -p[i].y() / dt_);
    }
    if (!band_solve(band_, rhs_, dofs)) {
      throw SimulationError("velocity system not positive definite",
                            step_count_);
    }
    if (!desk || round == max_rounds) break;
    // Reaction on each supported dof: (A v - f) with the unconstrained row.
    int worst = -1;
    double worst_reaction = 0.0;
    bool violated = false;
    for (int i = 1; i <= last_dynamic; ++i) {
      const int d = 2 * i + 1;
      if (!desk_active_[i]) {
        if (rhs[d] < -p[i].y() / dt_ - 1e-12) {
          desk_active_[i] = 1;
          violated = true;
        }
        continue;
      }
      double av = 0.0;
      for (int c = std::max(0, d - kBand); c <= std::min(dofs - 1, d + kBand);
           ++c) {
        const double a =
            c <= d ? band_free_[d + kBand][d - c] : band_free_[c + kBand][c - d];
        av += a * rhs[c];
      }
      const double reaction = av - rhs_free[d];
      if (reaction < worst_reaction) {
        worst_reaction = reaction;
        worst = i;
      }
    }
    if (worst >= 0) {
      desk_active_[worst] = 0;
    } else if (!violated) {
      break;
    }
  }
  for (int i = 0; i <= n_; ++i) {
    state.velocities[i] = Vec2(rhs[2 * i], rhs[2 * i + 1]);
  }
  state.velocities[0].setZero();
  v_solved_first_ = state.velocities[1];
  if (state.grasped) state.velocities[n_] = grip_vel;
}

double StripSimulator::project(std::vector<Vec2>& x) {
  const double l = params_.link_length;
  double max_err = 0.0;
  for (int it = 0; it < params_.constraint_iterations; ++it) {
    max_err = 0.0;
    for (int j = 0; j < n_; ++j) {
      const Vec2 e = x[j + 1] - x[j];
      const double len = e.norm();
      normals_[j] = len > 1e-15 ? Vec2(e / len) : Vec2(1.0, 0.0);
      tri_rhs_[j] = -(len - l);
      max_err = std::max(max_err, std::abs(len - l));
    }
    if (max_err < kProjectionTolerance) break;
    const double eps = 1e-9 / params_.sphere_mass;
    for (int j = 0; j < n_; ++j) {
      const Vec2& nj = normals_[j];
      const Vec2& wa = w_[j];
      const Vec2& wb = w_[j + 1];
      tri_diag_[j] = wa.x() * nj.x() * nj.x() + wa.y() * nj.y() * nj.y() +
                     wb.x() * nj.x() * nj.x() + wb.y() * nj.y() * nj.y() + eps;
      if (j + 1 < n_) {
        const Vec2& nk = normals_[j + 1];
        tri_off_[j] = -(wb.x() * nj.x() * nk.x() + wb.y() * nj.y() * nk.y());
      }
    }
    // Thomas algorithm on the symmetric tridiagonal system.
    for (int j = 1; j < n_; ++j) {
      const double f = tri_off_[j - 1] / tri_diag_[j - 1];
      tri_diag_[j] -= f * tri_off_[j - 1];
      tri_rhs_[j] -= f * tri_rhs_[j - 1];
    }
    tri_tmp_[n_ - 1] = tri_rhs_[n_ - 1] / tri_diag_[n_ - 1];
    for (int j = n_ - 2; j >= 0; --j) {
      tri_tmp_[j] = (tri_rhs_[j] - tri_off_[j] * tri_tmp_[j + 1]) / tri_diag_[j];
    }
    for (int i = 0; i <= n_; ++i) {
      Vec2 imp = Vec2::Zero();
      if (i > 0) imp += normals_[i - 1] * tri_tmp_[i - 1];
      if (i < n_) imp -= normals_[i] * tri_tmp_[i];
      impulse_[i] += imp;
      x[i] += w_[i].cwiseProduct(imp);
    }
  }
  return max_err;
}

void StripSimulator::substep(StripState& state, const Vec2& grip_from,
                             const Vec2& grip_to, double& fx_accum) {
  const double m = params_.sphere_mass;
  const double inv_m = 1.0 / m;
  constexpr double r = 0.0;  // rest height of sphere centers
  const bool desk = params_.desk_enabled;
  auto& x = state.positions;
  auto& v = state.velocities;
  const Vec2 grip_vel = (grip_to - grip_from) / dt_;

  x_old_ = x;
  assemble_and_solve_velocities(state, grip_vel);

  // Elastic and damping force on the pinned sphere from the first joint,
  // consistent with the implicit update.
  Vec2 pin_bend = Vec2::Zero();
  if (n_ >= 2) {
    const double rate = grad_prev_[1].dot(v[0]) + grad_mid_[1].dot(v[1]) +
                        grad_next_[1].dot(v[2]);
    pin_bend = -(k_ * (theta_[1] + dt_ * rate) + b_ * rate) * grad_prev_[1];
  }

  const int last_dynamic = state.grasped ? n_ - 1 : n_;
  for (int i = 0; i <= n_; ++i) {
    x_pred_[i] = x[i] + dt_ * v[i];
    impulse_[i].setZero();
    locked_[i] = 0;
    w_[i] = Vec2(inv_m, inv_m);
  }
  x_pred_[0] = pin_point();
  w_[0].setZero();
  if (state.grasped) {
    x_pred_[n_] = grip_to;
    w_[n_].setZero();
  }
  x = x_pred_;
  if (desk) {
    for (int i = 1; i <= last_dynamic; ++i) {
      if (desk_active_[i] || x[i].y() < r) {
        x[i].y() = r;
        locked_[i] = 1;
        w_[i].y() = 0.0;
      }
    }
  }

  for (int pass = 0; pass < kContactPasses; ++pass) {
    x_pass_ = x;
    impulse_pass_ = impulse_;
    const double residual = project(x);
    if (!desk) break;
    bool changed = false;
    if (residual > kBuckleThreshold) {
      // A compressed run lying flat on the desk has no vertical constraint
      // gradient, so the projection cannot lift it. Seed an upward kink at
      // the grounded sphere closest to the grasped end and let the next pass
      // grow it into the buckle.
      int seed = -1;
      for (int i = last_dynamic; i >= 1; --i) {
        if (locked_[i] && i + 1 <= n_) {
          seed = i;
          break;
        }
      }
      if (seed > 0) {
        x = x_pass_;
        impulse_ = impulse_pass_;
        const double mid = 0.5 * (x[seed - 1].y() + x[seed + 1].y());
        x[seed].y() = std::max(x[seed].y(), mid) + 1e-3 * params_.link_length;
        locked_[seed] = 0;
        w_[seed].y() = inv_m;
        changed = true;
      }
    }
    for (int i = 1; i <= last_dynamic; ++i) {
      if (locked_[i]) {
        // Desk reaction needed to hold the sphere at z = r.
        const double normal = m * (r - x_pred_[i].y()) - impulse_[i].y();
        if (normal < 0.0) {
          locked_[i] = 0;
          w_[i].y() = inv_m;
          changed = true;
        }
      } else if (x[i].y() < r - 1e-12) {
        x[i].y() = r;
        locked_[i] = 1;
        w_[i].y() = 0.0;
        changed = true;
      }
    }
    if (!changed) break;
  }
  if (desk) {
    for (int i = 1; i <= last_dynamic; ++i) x[i].y() = std::max(x[i].y(), r);
  }

  for (int i = 0; i <= n_; ++i) v[i] = (x[i] - x_old_[i]) / dt_;
  v[0].setZero();

  const Vec2 pin_link =
      impulse_[0] / (dt_ * dt_) +
      kLinkPenalty * m * pin_normal_ * pin_normal_.dot(v_solved_first_) / dt_;
  pin_force_x_ = -(pin_link.x() + pin_bend.x());
  fx_accum += pin_force_x_;
}

double bend_angle(const StripState& state, int joint) {
  const auto& p = state.positions;
  return joint_angle(p[joint - 1], p[joint], p[joint + 1], nullptr, nullptr,
                     nullptr);
}

double mechanical_energy(const StripState& state, const StripParams& params) {
  const double m = params.sphere_mass;
  const double k = params.effective_stiffness();
  double e = 0.0;
  const int n = state.links();
  for (int i = 1; i <= n; ++i) {
    e += 0.5 * m * state.velocities[i].squaredNorm();
    e += m * params.gravity * state.positions[i].y();
  }
  for (int j = 1; j < n; ++j) {
    const double t = bend_angle(state, j);
    e += 0.5 * k * t * t;
  }
  return e;
}

double max_link_error(const StripState& state, const StripParams& params) {
  double err = 0.0;
  for (int i = 0; i < state.links(); ++i) {
    const double len = (state.positions[i + 1] - state.positions[i]).norm();
    err = std::max(err, std::abs(len - params.link_length));
  }
  return err;
}

int grounded_run_length(const StripState& state, const StripParams& /*params*/,
                        const ContactTolerances& tol) {
  const double limit = tol.ground;
  int count = 0;
  for (const auto& p : state.positions) {
    if (p.y() > limit) break;
    ++count;
  }
  return count;
}

double detect_desk_contact_x(const StripState& state, const StripParams& params,
                             const ContactTolerances& tol) {
  const int run = grounded_run_length(state, params, tol);
  double xc = 0.0;
  for (int i = 0; i < run; ++i) xc = std::max(xc, state.positions[i].x());
  return xc;
}

TouchEvent detect_layer_touch(const StripState& state,
                              const StripParams& params,
                              const ContactTolerances& tol) {
  TouchEvent ev;
  const int n = state.links();
  const int run = grounded_run_length(state, params, tol);
  if (run >= n + 1) return ev;
  double xc = 0.0;
  for (int i = 0; i < run; ++i) xc = std::max(xc, state.positions[i].x());
  const double limit = 2.0 * params.sphere_radius + tol.touch;
  int best = -1;
  for (int i = run + tol.gap; i <= n; ++i) {
    const Vec2& p = state.positions[i];
    if (p.y() <= limit && p.x() <= xc) {
      if (best < 0 || p.y() < state.positions[best].y()) best = i;
    }
  }
  if (best < 0) return ev;
  ev.touched = true;
  ev.touch_sphere_index = best;
  ev.touch_x = state.positions[best].x();
  ev.l1 = (n - best) * params.link_length;
  ev.l2 = std::max(0.0, ev.touch_x);
  ev.d = ev.l1 - ev.l2;
  return ev;
}

double folded_height(const StripParams& params) {
  StripSimulator sim(params);
  StripState s = sim.init_flat();
  const Vec2 pin = sim.pin_point();
  // Semicircle through the grasped end and the pin at a slow, constant speed,
  // then let the strip come to rest with the grasped end on the fixed end.
  const double x0 = s.gripper().x();
  const double radius = 0.5 * x0;
  const double speed = 0.05;
  const double length = std::numbers::pi * radius;
  const int steps = static_cast<int>(std::ceil(length / (speed * params.sim_dt)));
  for (int i = 1; i <= steps; ++i) {
    const double phi = std::numbers::pi * std::min(1.0, static_cast<double>(i) / steps);
    const Vec2 target(radius + radius * std::cos(phi),
                      pin.y() + radius * std::sin(phi));
    sim.step(s, i == steps ? pin : target);
  }
  const int settle = static_cast<int>(std::ceil(3.0 / params.sim_dt));
  for (int i = 0; i < settle; ++i) sim.step(s, pin);
  double h = 0.0;
  for (const auto& p : s.positions) h = std::max(h, p.y());
  return h;
}

}  // namespace stripfold
