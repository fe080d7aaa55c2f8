// SPDX-License-Identifier: Apache-2.0

#ifndef FEDGMR_DIAGNOSTICS_HPP
#define FEDGMR_DIAGNOSTICS_HPP

#include <string>
#include <utility>
#include <vector>

#include "fedgmr/data.hpp"
#include "fedgmr/model.hpp"
#include "fedgmr/param_vector.hpp"
#include "fedgmr/pruning.hpp"
#include "fedgmr/simulator.hpp"

namespace fedgmr {

/// An accuracy-over-time curve for one run; times strictly increasing.
struct AccuracyTrace {
  std::vector<double> t;
  std::vector<double> acc;

  std::size_t size() const { return t.size(); }
};

AccuracyTrace trace_from_metrics(const MetricsLog& log);

/// Parses a metrics CSV (as written by the simulator) back into a trace of
/// (time_s, global_val_acc).
AccuracyTrace trace_from_csv_text(const std::string& csv);
AccuracyTrace trace_from_csv_file(const std::string& path);

struct SmoothedAcc {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Mean/std over `window` evaluations centered on the sample nearest t_star
/// ((window-1)/2 on each side). Throws ConfigError listing the available
/// range when the trace cannot supply a full window.
SmoothedAcc smoothed_acc(const AccuracyTrace& trace, double t_star, int window = 11);

/// Mean relative improvement over a set of baselines.
double mri(double method_acc, const std::vector<double>& baseline_accs);

struct SlopeResult {
  bool reached = false;
  double slope = 0.0;  // accuracy per second
};

/// (hi - lo) / (t_first_reach(hi) - t_first_reach(lo)), with linear
/// interpolation between samples; unreached intervals are reported, not
/// errors.
SlopeResult growth_slope(const AccuracyTrace& trace, double lo, double hi);

/// Accuracy of the model pruned to each density via the shared importance
/// ordering.
std::vector<std::pair<double, double>> prune_eval(const ParamVector& model, const ModelSpec& spec,
                                                  const ImportanceVector& scores,
                                                  const std::vector<double>& densities,
                                                  const DataShard& val);

/// Versioned binary dump of a trained model with its importance scores.
/// Layout (little-endian): magic "FGMR", u32 version, model kind u32,
/// u32 input_dim, u32 n_classes, u32 hidden count + u32 dims, u64 n_coords,
/// f64 values, f64 scores.
struct Checkpoint {
  ModelSpec spec;
  ParamVector model;
  ImportanceVector scores;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace fedgmr

#endif  // FEDGMR_DIAGNOSTICS_HPP
