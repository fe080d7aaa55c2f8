// SPDX-License-Identifier: Apache-2.0

#ifndef FEDGMR_DENSITY_HPP
#define FEDGMR_DENSITY_HPP

#include <limits>
#include <map>
#include <vector>

namespace fedgmr {

enum class Stage { Stage1, Stage2 };

/// Per-client sub-model densities plus the controller stage.
struct DensityVector {
  std::map<int, double> rho;
  Stage stage = Stage::Stage1;
};

/// Observed one-round wall times (seconds) plus the reference client's time.
struct RoundTimeObs {
  std::map<int, double> t;
  double t_ref = 0.0;
};

/// ½ Σ_i ((t_i - t_ref) / t_i)^2
double time_loss(const RoundTimeObs& obs);

/// One density-gradient-descent round: rho_i ← clamp(rho_i * (1 + lambda *
/// (t_ref - t_i)/t_i), rho_min, 1). Slower-than-reference clients shrink,
/// faster ones grow.
DensityVector stage1_update(const DensityVector& rho, const RoundTimeObs& obs, double lambda,
                            double rho_min);

struct EsmOptions {
  long eval_interval = 25;
  long patience = 5;
  double tol = 1e-4;
};

enum class EsmVerdict { Continue, Saturated };

/// Plateau detector over a per-client validation metric. An evaluation
/// counts as improvement only when it beats the best seen by more than tol.
class EsmState {
public:
  explicit EsmState(EsmOptions opts = {}) : opts_(opts) {}

  const EsmOptions& options() const { return opts_; }

  bool due(long round) const { return round % opts_.eval_interval == 0; }

  /// Records a new evaluation and reports saturation.
  EsmVerdict check(int client, double metric);

  /// Clears a client's window (called after its density is restored).
  void reset(int client);

  double best(int client) const;
  long evals_since_improve(int client) const;

private:
  struct PerClient {
    double best = -std::numeric_limits<double>::infinity();
    long evals_since_improve = 0;
  };
  EsmOptions opts_;
  std::map<int, PerClient> clients_;
};

/// Advances every saturated client to the smallest strictly larger ladder
/// density (no-op at the top) and resets its ESM window.
DensityVector gmr_step(const DensityVector& rho, EsmState& esm,
                       const std::map<int, bool>& saturated, const std::vector<double>& ladder);

struct StageTransitionOptions {
  double eps_stab = 0.01;
  long w_stab = 3;
  long max_stage1_rounds = 50;
};

/// Watches Stage-1 density deltas and decides when assignment has settled.
class StageTracker {
public:
  explicit StageTracker(StageTransitionOptions opts = {}) : opts_(opts) {}

  /// Feeds one Stage-1 update's result; returns true when the controller
  /// should switch to Stage 2 (all |Δrho| < eps_stab for w_stab consecutive
  /// updates, or the round budget is exhausted).
  bool observe(const DensityVector& before, const DensityVector& after);

  bool budget_exhausted() const { return rounds_seen_ >= opts_.max_stage1_rounds; }
  long rounds_seen() const { return rounds_seen_; }

private:
  StageTransitionOptions opts_;
  long rounds_seen_ = 0;
  long stable_streak_ = 0;
};

/// Smallest ladder level >= rho (the top level when rho exceeds them all).
double snap_up(double rho, const std::vector<double>& ladder);

/// Switches a Stage-1 vector to Stage 2, snapping every density onto the
/// ladder.
DensityVector to_stage2(const DensityVector& rho, const std::vector<double>& ladder);

}  // namespace fedgmr

#endif  // FEDGMR_DENSITY_HPP
