// SPDX-License-Identifier: Apache-2.0

#ifndef FEDGMR_MODEL_HPP
#define FEDGMR_MODEL_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fedgmr/data.hpp"
#include "fedgmr/param_vector.hpp"
#include "fedgmr/rng.hpp"

namespace fedgmr {

enum class ModelKind { Logistic, Mlp };

/// One dense layer's slice of the flat parameter vector. Weights are
/// row-major [out][in] at [w_begin, w_end), biases at [b_begin, b_end).
struct LayerRange {
  std::size_t w_begin, w_end;
  std::size_t b_begin, b_end;
  std::size_t in_dim, out_dim;
};

/// Architecture descriptor mapping layers onto coordinate ranges. Hidden
/// layers use tanh; the output layer is linear into a softmax.
struct ModelSpec {
  ModelKind kind = ModelKind::Logistic;
  std::size_t input_dim = 0;
  int n_classes = 0;
  std::vector<std::size_t> hidden_dims;
  std::vector<LayerRange> layers;
  std::size_t n_coords = 0;

  static ModelSpec logistic(std::size_t input_dim, int n_classes);
  static ModelSpec mlp(std::size_t input_dim, std::vector<std::size_t> hidden, int n_classes);

  std::string kind_name() const { return kind == ModelKind::Logistic ? "logistic" : "mlp"; }
};

struct EvalResult {
  double loss = 0.0;
  std::size_t correct = 0;
};

/// Mean cross-entropy and argmax-correct count over the given sample indices.
EvalResult forward_loss(const ParamVector& w, const ModelSpec& spec, const DataShard& d,
                        std::span<const std::size_t> idx);

/// Same over the whole shard.
EvalResult evaluate(const ParamVector& w, const ModelSpec& spec, const DataShard& d);

double accuracy(const ParamVector& w, const ModelSpec& spec, const DataShard& d);

/// Mean cross-entropy gradient over the batch; also returns the loss.
double loss_and_grad(const ParamVector& w, const ModelSpec& spec, const DataShard& d,
                     std::span<const std::size_t> idx, ParamVector& grad);

/// Xavier-uniform weights, zero biases.
ParamVector init_params(const ModelSpec& spec, Rng& rng);

}  // namespace fedgmr

#endif  // FEDGMR_MODEL_HPP
