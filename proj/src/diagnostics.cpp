// SPDX-License-Identifier: Apache-2.0

#include "fedgmr/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fedgmr/common.hpp"

namespace fedgmr {

AccuracyTrace trace_from_metrics(const MetricsLog& log) {
  AccuracyTrace tr;
  for (const MetricsRow& r : log.rows) {
    tr.t.push_back(r.time_s);
    tr.acc.push_back(r.global_val_acc);
  }
  return tr;
}

AccuracyTrace trace_from_csv_text(const std::string& csv) {
  std::stringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw StructuralError("trace: empty csv");
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
  }
  std::ptrdiff_t t_col = -1, acc_col = -1;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == "time_s") t_col = static_cast<std::ptrdiff_t>(i);
    if (cols[i] == "global_val_acc") acc_col = static_cast<std::ptrdiff_t>(i);
  }
  if (t_col < 0 || acc_col < 0) {
    throw StructuralError("trace: csv lacks time_s/global_val_acc columns");
  }
  AccuracyTrace tr;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::ptrdiff_t col = 0;
    double t = 0.0, a = 0.0;
    while (std::getline(ss, cell, ',')) {
      if (col == t_col) t = std::stod(cell);
      if (col == acc_col) a = std::stod(cell);
      ++col;
    }
    if (!tr.t.empty() && t <= tr.t.back()) {
      throw StructuralError("trace: times must be strictly increasing");
    }
    tr.t.push_back(t);
    tr.acc.push_back(a);
  }
  return tr;
}

AccuracyTrace trace_from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError("trace: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return trace_from_csv_text(ss.str());
}

SmoothedAcc smoothed_acc(const AccuracyTrace& trace, double t_star, int window) {
  if (window < 1 || window % 2 == 0) throw ConfigError("smoothed_acc: window must be odd");
  const std::size_t n = trace.size();
  const std::size_t half = static_cast<std::size_t>(window / 2);
  if (n < static_cast<std::size_t>(window)) {
    throw ConfigError("smoothed_acc: trace has " + std::to_string(n) + " samples, need " +
                      std::to_string(window));
  }
  // Sample nearest to t_star (first one on ties).
  std::size_t center = 0;
  double best = std::fabs(trace.t[0] - t_star);
  for (std::size_t i = 1; i < n; ++i) {
    const double d = std::fabs(trace.t[i] - t_star);
    if (d < best) {
      best = d;
      center = i;
    }
  }
  if (center < half || center + half >= n) {
    throw ConfigError("smoothed_acc: window around t*=" + std::to_string(t_star) +
                      " exceeds available range [" + std::to_string(trace.t.front()) + ", " +
                      std::to_string(trace.t.back()) + "]");
  }
  double mean = 0.0;
  for (std::size_t i = center - half; i <= center + half; ++i) mean += trace.acc[i];
  mean /= static_cast<double>(window);
  double var = 0.0;
  for (std::size_t i = center - half; i <= center + half; ++i) {
    const double d = trace.acc[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(window);
  return {mean, std::sqrt(var)};
}

double mri(double method_acc, const std::vector<double>& baseline_accs) {
  if (baseline_accs.empty()) throw ConfigError("mri: empty baseline list");
  double sum = 0.0;
  for (double b : baseline_accs) {
    if (b <= 0.0) throw ConfigError("mri: baseline accuracies must be positive");
    sum += (method_acc - b) / b;
  }
  return sum / static_cast<double>(baseline_accs.size());
}

namespace {

// First time the trace reaches `level`, linearly interpolated; NaN if never.
double first_reach(const AccuracyTrace& trace, double level) {
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace.acc[i] >= level) {
      if (i == 0 || trace.acc[i] == trace.acc[i - 1]) return trace.t[i];
      const double a0 = trace.acc[i - 1], a1 = trace.acc[i];
      const double t0 = trace.t[i - 1], t1 = trace.t[i];
      const double f = (level - a0) / (a1 - a0);
      return t0 + f * (t1 - t0);
    }
  }
  return std::nan("");
}

}  // namespace

SlopeResult growth_slope(const AccuracyTrace& trace, double lo, double hi) {
  if (hi <= lo) throw ConfigError("growth_slope: need lo < hi");
  const double t_lo = first_reach(trace, lo);
  const double t_hi = first_reach(trace, hi);
  if (std::isnan(t_lo) || std::isnan(t_hi) || t_hi <= t_lo) return {false, 0.0};
  return {true, (hi - lo) / (t_hi - t_lo)};
}

std::vector<std::pair<double, double>> prune_eval(const ParamVector& model, const ModelSpec& spec,
                                                  const ImportanceVector& scores,
                                                  const std::vector<double>& densities,
                                                  const DataShard& val) {
  const std::vector<std::size_t> order = importance_order(scores);
  std::vector<std::pair<double, double>> out;
  for (double rho : densities) {
    const Mask m = mask_from_order(order, rho, model.size());
    out.emplace_back(rho, accuracy(masked(model, m), spec, val));
  }
  return out;
}

namespace {

constexpr char kMagic[4] = {'F', 'G', 'M', 'R'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& out, T value) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
  std::reverse(buf, buf + sizeof(T));
#endif
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const char* what) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw StructuralError(std::string("checkpoint: truncated ") + what);
  }
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
  std::reverse(buf, buf + sizeof(T));
#endif
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  if (ckpt.model.size() != ckpt.spec.n_coords || ckpt.scores.size() != ckpt.spec.n_coords) {
    throw StructuralError("checkpoint: model/scores length does not match spec");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StructuralError("checkpoint: cannot open " + path + " for writing");
  out.write(kMagic, 4);
  write_le<std::uint32_t>(out, kVersion);
  write_le<std::uint32_t>(out, ckpt.spec.kind == ModelKind::Logistic ? 0u : 1u);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.spec.input_dim));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.spec.n_classes));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.spec.hidden_dims.size()));
  for (std::size_t h : ckpt.spec.hidden_dims) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(h));
  }
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(ckpt.spec.n_coords));
  for (double x : ckpt.model.v) write_le<double>(out, x);
  for (double x : ckpt.scores.scores) write_le<double>(out, x);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StructuralError("checkpoint: cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw StructuralError("checkpoint: bad magic (want FGMR)");
  }
  const std::uint32_t version = read_le<std::uint32_t>(in, "version");
  if (version != kVersion) {
    throw StructuralError("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint32_t kind = read_le<std::uint32_t>(in, "kind");
  const std::uint32_t input_dim = read_le<std::uint32_t>(in, "input_dim");
  const std::uint32_t n_classes = read_le<std::uint32_t>(in, "n_classes");
  const std::uint32_t n_hidden = read_le<std::uint32_t>(in, "hidden count");
  std::vector<std::size_t> hidden;
  for (std::uint32_t i = 0; i < n_hidden; ++i) {
    hidden.push_back(read_le<std::uint32_t>(in, "hidden dim"));
  }
  Checkpoint ckpt;
  ckpt.spec = kind == 0 ? ModelSpec::logistic(input_dim, static_cast<int>(n_classes))
                        : ModelSpec::mlp(input_dim, hidden, static_cast<int>(n_classes));
  const std::uint64_t n = read_le<std::uint64_t>(in, "n_coords");
  if (n != ckpt.spec.n_coords) throw StructuralError("checkpoint: coordinate count mismatch");
  ckpt.model.v.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) ckpt.model.v[i] = read_le<double>(in, "model value");
  ckpt.scores.scores.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) ckpt.scores.scores[i] = read_le<double>(in, "score");
  return ckpt;
}

}  // namespace fedgmr
