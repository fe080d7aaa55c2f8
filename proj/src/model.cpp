// SPDX-License-Identifier: Apache-2.0

#include "fedgmr/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedgmr/common.hpp"

namespace fedgmr {

namespace {

std::vector<LayerRange> build_layers(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                                     int n_classes, std::size_t& n_coords) {
  std::vector<std::size_t> dims;
  dims.push_back(input_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(static_cast<std::size_t>(n_classes));

  std::vector<LayerRange> layers;
  std::size_t pos = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    LayerRange r;
    r.in_dim = dims[l];
    r.out_dim = dims[l + 1];
    r.w_begin = pos;
    r.w_end = pos + r.in_dim * r.out_dim;
    r.b_begin = r.w_end;
    r.b_end = r.b_begin + r.out_dim;
    pos = r.b_end;
    layers.push_back(r);
  }
  n_coords = pos;
  return layers;
}

void check_spec(const ParamVector& w, const ModelSpec& spec) {
  if (w.size() != spec.n_coords) {
    throw StructuralError("model: parameter vector length does not match spec");
  }
}

// Forward pass for one sample; returns per-class logits.
void logits_for(const ParamVector& w, const ModelSpec& spec, const double* x,
                std::vector<std::vector<double>>& acts) {
  acts.resize(spec.layers.size() + 1);
  acts[0].assign(x, x + spec.input_dim);
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const LayerRange& r = spec.layers[l];
    acts[l + 1].assign(r.out_dim, 0.0);
    const double* in = acts[l].data();
    for (std::size_t o = 0; o < r.out_dim; ++o) {
      const double* row = w.v.data() + r.w_begin + o * r.in_dim;
      double s = w.v[r.b_begin + o];
      for (std::size_t i = 0; i < r.in_dim; ++i) s += row[i] * in[i];
      acts[l + 1][o] = s;
    }
    const bool last = (l + 1 == spec.layers.size());
    if (!last) {
      for (double& a : acts[l + 1]) a = std::tanh(a);
    }
  }
}

// Numerically stable log-softmax pieces.
double log_sum_exp(const std::vector<double>& z, double& zmax) {
  zmax = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double x : z) s += std::exp(x - zmax);
  return zmax + std::log(s);
}

std::size_t argmax_lowest_index(const std::vector<double>& z) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < z.size(); ++i) {
    if (z[i] > z[best]) best = i;
  }
  return best;
}

}  // namespace

ModelSpec ModelSpec::logistic(std::size_t input_dim, int n_classes) {
  ModelSpec s;
  s.kind = ModelKind::Logistic;
  s.input_dim = input_dim;
  s.n_classes = n_classes;
  s.layers = build_layers(input_dim, {}, n_classes, s.n_coords);
  return s;
}

ModelSpec ModelSpec::mlp(std::size_t input_dim, std::vector<std::size_t> hidden, int n_classes) {
  if (hidden.empty()) throw ConfigError("mlp: need at least one hidden layer");
  ModelSpec s;
  s.kind = ModelKind::Mlp;
  s.input_dim = input_dim;
  s.n_classes = n_classes;
  s.hidden_dims = std::move(hidden);
  s.layers = build_layers(input_dim, s.hidden_dims, n_classes, s.n_coords);
  return s;
}

EvalResult forward_loss(const ParamVector& w, const ModelSpec& spec, const DataShard& d,
                        std::span<const std::size_t> idx) {
  check_spec(w, spec);
  if (d.dim != spec.input_dim) throw StructuralError("model: shard dim does not match spec");
  if (idx.empty()) throw StructuralError("forward_loss: empty batch");

  EvalResult res;
  std::vector<std::vector<double>> acts;
  for (std::size_t i : idx) {
    logits_for(w, spec, d.row(i), acts);
    const std::vector<double>& z = acts.back();
    double zmax;
    const double lse = log_sum_exp(z, zmax);
    const int y = d.labels[i];
    res.loss += lse - z[static_cast<std::size_t>(y)];
    if (argmax_lowest_index(z) == static_cast<std::size_t>(y)) res.correct += 1;
  }
  res.loss /= static_cast<double>(idx.size());
  return res;
}

EvalResult evaluate(const ParamVector& w, const ModelSpec& spec, const DataShard& d) {
  std::vector<std::size_t> idx(d.size());
  std::iota(idx.begin(), idx.end(), 0);
  return forward_loss(w, spec, d, idx);
}

double accuracy(const ParamVector& w, const ModelSpec& spec, const DataShard& d) {
  if (d.size() == 0) return 0.0;
  const EvalResult r = evaluate(w, spec, d);
  return static_cast<double>(r.correct) / static_cast<double>(d.size());
}

double loss_and_grad(const ParamVector& w, const ModelSpec& spec, const DataShard& d,
                     std::span<const std::size_t> idx, ParamVector& grad) {
  check_spec(w, spec);
  if (d.dim != spec.input_dim) throw StructuralError("model: shard dim does not match spec");
  if (idx.empty()) throw StructuralError("loss_and_grad: empty batch");

  grad.v.assign(spec.n_coords, 0.0);
  double loss = 0.0;
  std::vector<std::vector<double>> acts;
  std::vector<double> delta, delta_prev;
  for (std::size_t i : idx) {
    logits_for(w, spec, d.row(i), acts);
    const std::vector<double>& z = acts.back();
    double zmax;
    const double lse = log_sum_exp(z, zmax);
    const int y = d.labels[i];
    loss += lse - z[static_cast<std::size_t>(y)];

    // dL/dlogit = softmax - onehot
    delta.resize(z.size());
    for (std::size_t c = 0; c < z.size(); ++c) {
      delta[c] = std::exp(z[c] - lse) - (static_cast<int>(c) == y ? 1.0 : 0.0);
    }

    for (std::size_t l = spec.layers.size(); l-- > 0;) {
      const LayerRange& r = spec.layers[l];
      const std::vector<double>& in = acts[l];
      for (std::size_t o = 0; o < r.out_dim; ++o) {
        const double g = delta[o];
        double* grow = grad.v.data() + r.w_begin + o * r.in_dim;
        for (std::size_t k = 0; k < r.in_dim; ++k) grow[k] += g * in[k];
        grad.v[r.b_begin + o] += g;
      }
      if (l > 0) {
        delta_prev.assign(r.in_dim, 0.0);
        for (std::size_t o = 0; o < r.out_dim; ++o) {
          const double g = delta[o];
          const double* row = w.v.data() + r.w_begin + o * r.in_dim;
          for (std::size_t k = 0; k < r.in_dim; ++k) delta_prev[k] += g * row[k];
        }
        // tanh' = 1 - tanh^2, and acts[l] holds the post-activation values.
        for (std::size_t k = 0; k < r.in_dim; ++k) delta_prev[k] *= 1.0 - in[k] * in[k];
        delta = delta_prev;
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(idx.size());
  loss *= inv;
  for (double& g : grad.v) g *= inv;
  return loss;
}

ParamVector init_params(const ModelSpec& spec, Rng& rng) {
  ParamVector w(spec.n_coords, 0.0);
  for (const LayerRange& r : spec.layers) {
    const double s = std::sqrt(6.0 / static_cast<double>(r.in_dim + r.out_dim));
    for (std::size_t i = r.w_begin; i < r.w_end; ++i) w.v[i] = rng.uniform(-s, s);
  }
  return w;
}

}  // namespace fedgmr
