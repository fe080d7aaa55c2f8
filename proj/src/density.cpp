// SPDX-License-Identifier: Apache-2.0

#include "fedgmr/density.hpp"

#include <algorithm>
#include <cmath>

#include "fedgmr/common.hpp"

namespace fedgmr {

double time_loss(const RoundTimeObs& obs) {
  if (obs.t_ref <= 0.0) throw ConfigError("time_loss: reference time must be positive");
  double loss = 0.0;
  for (const auto& [client, t] : obs.t) {
    if (t <= 0.0) throw ConfigError("time_loss: round times must be positive");
    const double r = (t - obs.t_ref) / t;
    loss += r * r;
  }
  return 0.5 * loss;
}

DensityVector stage1_update(const DensityVector& rho, const RoundTimeObs& obs, double lambda,
                            double rho_min) {
  if (rho.stage != Stage::Stage1) throw ConfigError("stage1_update: controller not in Stage 1");
  if (lambda <= 0.0) throw ConfigError("stage1_update: lambda must be positive");
  if (rho_min <= 0.0 || rho_min > 1.0) throw ConfigError("stage1_update: rho_min out of range");
  if (obs.t_ref <= 0.0) throw ConfigError("stage1_update: reference time must be positive");

  DensityVector out = rho;
  for (auto& [client, r] : out.rho) {
    const auto it = obs.t.find(client);
    if (it == obs.t.end()) continue;  // no observation yet, hold density
    const double t_i = it->second;
    if (t_i <= 0.0) throw ConfigError("stage1_update: round times must be positive");
    const double next = r * (1.0 + lambda * (obs.t_ref - t_i) / t_i);
    r = std::clamp(next, rho_min, 1.0);
  }
  return out;
}

EsmVerdict EsmState::check(int client, double metric) {
  PerClient& s = clients_[client];
  if (metric > s.best + opts_.tol) {
    s.best = metric;
    s.evals_since_improve = 0;
  } else {
    s.evals_since_improve += 1;
  }
  return s.evals_since_improve >= opts_.patience ? EsmVerdict::Saturated : EsmVerdict::Continue;
}

void EsmState::reset(int client) {
  clients_.erase(client);
}

double EsmState::best(int client) const {
  const auto it = clients_.find(client);
  return it == clients_.end() ? -std::numeric_limits<double>::infinity() : it->second.best;
}

long EsmState::evals_since_improve(int client) const {
  const auto it = clients_.find(client);
  return it == clients_.end() ? 0 : it->second.evals_since_improve;
}

DensityVector gmr_step(const DensityVector& rho, EsmState& esm,
                       const std::map<int, bool>& saturated, const std::vector<double>& ladder) {
  if (rho.stage != Stage::Stage2) throw ConfigError("gmr_step: controller not in Stage 2");
  DensityVector out = rho;
  for (auto& [client, r] : out.rho) {
    const auto it = saturated.find(client);
    if (it == saturated.end() || !it->second) continue;
    double next = r;
    for (double level : ladder) {
      if (level > r && (next == r || level < next)) next = level;
    }
    r = next;
    esm.reset(client);
  }
  return out;
}

bool StageTracker::observe(const DensityVector& before, const DensityVector& after) {
  rounds_seen_ += 1;
  double max_delta = 0.0;
  for (const auto& [client, r] : after.rho) {
    const auto it = before.rho.find(client);
    if (it != before.rho.end()) max_delta = std::max(max_delta, std::fabs(r - it->second));
  }
  stable_streak_ = (max_delta < opts_.eps_stab) ? stable_streak_ + 1 : 0;
  return stable_streak_ >= opts_.w_stab || budget_exhausted();
}

double snap_up(double rho, const std::vector<double>& ladder) {
  if (ladder.empty()) throw ConfigError("snap_up: empty ladder");
  double best = 0.0;
  bool found = false;
  double top = 0.0;
  for (double level : ladder) {
    top = std::max(top, level);
    if (level >= rho && (!found || level < best)) {
      best = level;
      found = true;
    }
  }
  return found ? best : top;
}

DensityVector to_stage2(const DensityVector& rho, const std::vector<double>& ladder) {
  DensityVector out = rho;
  out.stage = Stage::Stage2;
  for (auto& [client, r] : out.rho) r = snap_up(r, ladder);
  return out;
}

}  // namespace fedgmr
