// Copyright 2026 The peghole Authors
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

/**
 * @file nn.hpp
 * @brief Dense multilayer perceptron with manual backpropagation, and Adam.
 *
 * Samples are columns: a batch is an (inputs x batch) matrix. All weights
 * and biases of a network live in one flat parameter vector, layer by
 * layer, W (column-major) then b. Optimizers, target-network averaging and
 * checkpoints all operate on that vector.
 */

#pragma once

#include "peghole/types.hpp"

#include <random>
#include <vector>

namespace peghole {

enum class Activation { Linear, Tanh };

template <typename Scalar>
class Mlp {
 public:
  using Matrix = MatrixX<Scalar>;
  using Vector = VectorX<Scalar>;

  Mlp() = default;
  /// sizes = {inputs, hidden..., outputs}. Hidden layers use `hidden`, the
  /// last layer uses `output`.
  Mlp(std::vector<int> sizes, Activation hidden, Activation output);

  const std::vector<int>& sizes() const { return sizes_; }
  Activation hidden_activation() const { return hidden_; }
  Activation output_activation() const { return output_; }
  int inputs() const { return sizes_.front(); }
  int outputs() const { return sizes_.back(); }
  Eigen::Index num_params() const { return params_.size(); }

  Vector& params() { return params_; }
  const Vector& params() const { return params_; }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for hidden layers; the last
  /// layer is drawn from Uniform(-final_range, final_range) (0 gives zeros).
  void initialize(std::mt19937_64& rng, double final_range);

  /// Activations of every layer, input first; kept for backward().
  struct Tape {
    std::vector<Matrix> values;
  };

  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, Tape& tape) const;

  /// Adds dLoss/dparams to `grad` (sized num_params()) and returns dLoss/dx.
  Matrix backward(const Tape& tape, const Matrix& d_out, Vector& grad) const;

 private:
  Eigen::Index weight_offset(std::size_t layer) const { return offsets_[layer]; }

  std::vector<int> sizes_;
  Activation hidden_ = Activation::Tanh;
  Activation output_ = Activation::Linear;
  std::vector<Eigen::Index> offsets_;
  Vector params_;
};

/// Adam with bias correction. State is kept alongside for checkpoints.
template <typename Scalar>
struct Adam {
  using Vector = VectorX<Scalar>;

  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Vector m;
  Vector v;
  long long t = 0;

  void reset(Eigen::Index n) {
    m = Vector::Zero(n);
    v = Vector::Zero(n);
    t = 0;
  }
  void step(Vector& params, const Vector& grad);
};

/// target <- tau * source + (1 - tau) * target
template <typename Scalar>
void soft_update(Mlp<Scalar>& target, const Mlp<Scalar>& source, double tau);

}  // namespace peghole
