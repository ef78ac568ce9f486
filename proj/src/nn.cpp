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

#include "peghole/nn.hpp"

#include <cmath>

namespace peghole {

template <typename Scalar>
Mlp<Scalar>::Mlp(std::vector<int> sizes, Activation hidden, Activation output)
    : sizes_(std::move(sizes)), hidden_(hidden), output_(output) {
  if (sizes_.size() < 2) throw Error("mlp: need at least input and output sizes");
  Eigen::Index total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] < 1 || sizes_[l + 1] < 1) throw Error("mlp: layer sizes must be positive");
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
  params_ = Vector::Zero(total);
}

template <typename Scalar>
void Mlp<Scalar>::initialize(std::mt19937_64& rng, double final_range) {
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const bool last = l + 1 == layers;
    const double range = last ? final_range : 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> u(-range, range);
    const Eigen::Index n = static_cast<Eigen::Index>(out) * (in + 1);
    for (Eigen::Index i = 0; i < n; ++i)
      params_[offsets_[l] + i] = range > 0.0 ? static_cast<Scalar>(u(rng)) : Scalar(0);
  }
}

template <typename Scalar>
typename Mlp<Scalar>::Matrix Mlp<Scalar>::forward(const Matrix& x) const {
  Tape tape;
  return forward(x, tape);
}

template <typename Scalar>
typename Mlp<Scalar>::Matrix Mlp<Scalar>::forward(const Matrix& x, Tape& tape) const {
  if (x.rows() != inputs()) throw Error("mlp: input has " + std::to_string(x.rows()) + " rows, expected " +
                                        std::to_string(inputs()));
  const std::size_t layers = sizes_.size() - 1;
  tape.values.resize(layers + 1);
  tape.values[0] = x;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    Eigen::Map<const Matrix> w(params_.data() + offsets_[l], out, in);
    Eigen::Map<const Vector> b(params_.data() + offsets_[l] + static_cast<Eigen::Index>(out) * in, out);
    Matrix z = w * tape.values[l];
    z.colwise() += b;
    const Activation act = l + 1 == layers ? output_ : hidden_;
    if (act == Activation::Tanh) z = z.array().tanh().matrix();
    tape.values[l + 1] = std::move(z);
  }
  return tape.values.back();
}

template <typename Scalar>
typename Mlp<Scalar>::Matrix Mlp<Scalar>::backward(const Tape& tape, const Matrix& d_out, Vector& grad) const {
  const std::size_t layers = sizes_.size() - 1;
  if (tape.values.size() != layers + 1) throw Error("mlp: backward needs the tape of a forward pass");
  if (grad.size() != params_.size()) throw Error("mlp: gradient buffer has the wrong size");
  Matrix delta = d_out;
  for (std::size_t l = layers; l-- > 0;) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const Activation act = l + 1 == layers ? output_ : hidden_;
    if (act == Activation::Tanh)
      delta = (delta.array() * (Scalar(1) - tape.values[l + 1].array().square())).matrix();
    Eigen::Map<const Matrix> w(params_.data() + offsets_[l], out, in);
    Eigen::Map<Matrix> gw(grad.data() + offsets_[l], out, in);
    Eigen::Map<Vector> gb(grad.data() + offsets_[l] + static_cast<Eigen::Index>(out) * in, out);
    gw.noalias() += delta * tape.values[l].transpose();
    gb += delta.rowwise().sum();
    delta = w.transpose() * delta;
  }
  return delta;
}

template <typename Scalar>
void Adam<Scalar>::step(Vector& params, const Vector& grad) {
  if (m.size() != params.size()) reset(params.size());
  ++t;
  const Scalar b1 = static_cast<Scalar>(beta1), b2 = static_cast<Scalar>(beta2);
  m = b1 * m + (Scalar(1) - b1) * grad;
  v = b2 * v + (Scalar(1) - b2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  const Scalar step = static_cast<Scalar>(lr / c1);
  const Scalar root_c2 = static_cast<Scalar>(std::sqrt(c2));
  const Scalar e = static_cast<Scalar>(eps);
  params.array() -= step * m.array() / (v.array().sqrt() / root_c2 + e);
}

template <typename Scalar>
void soft_update(Mlp<Scalar>& target, const Mlp<Scalar>& source, double tau) {
  if (target.num_params() != source.num_params()) throw Error("soft_update: network shapes differ");
  if (tau == 1.0) {
    target.params() = source.params();
  } else if (tau != 0.0) {
    const Scalar a = static_cast<Scalar>(tau);
    target.params() = a * source.params() + (Scalar(1) - a) * target.params();
  }
}

template class Mlp<float>;
template class Mlp<double>;
template struct Adam<float>;
template struct Adam<double>;
template void soft_update<float>(Mlp<float>&, const Mlp<float>&, double);
template void soft_update<double>(Mlp<double>&, const Mlp<double>&, double);

}  // namespace peghole
