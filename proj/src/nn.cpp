#include "masknet/nn.hpp"

#include <cmath>

namespace masknet {

void DenseLayer::init_kaiming(Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in_size()));
  for (Eigen::Index j = 0; j < weights.cols(); ++j)
    for (Eigen::Index i = 0; i < weights.rows(); ++i)
      weights(i, j) = rng.uniform(-bound, bound);
  bias.setZero();
}

Matrix dense_forward(const DenseLayer& layer, const Matrix& x) {
  if (x.cols() != layer.in_size())
    throw ShapeMismatch("dense_forward: input has " + std::to_string(x.cols()) +
                        " columns, layer expects " + std::to_string(layer.in_size()));
  Matrix y(x.rows(), layer.out_size());
  y.noalias() = x * layer.weights.transpose();
  y.rowwise() += layer.bias.transpose();
  return y;
}

Matrix dense_backward(const DenseLayer& layer, DenseGrads& grads,
                      const Matrix& x, const Matrix& dy) {
  if (dy.cols() != layer.out_size() || x.cols() != layer.in_size() ||
      dy.rows() != x.rows())
    throw ShapeMismatch("dense_backward: gradient/input shapes inconsistent");
  grads.weights.noalias() += dy.transpose() * x;
  grads.bias.noalias() += dy.colwise().sum().transpose();
  Matrix dx(x.rows(), x.cols());
  dx.noalias() = dy * layer.weights;
  return dx;
}

Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }

Matrix sigmoid(const Matrix& x) {
  return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Matrix relu_backward(const Matrix& y, const Matrix& dy) {
  return (y.array() > 0.0).select(dy, 0.0);
}

Matrix sigmoid_backward(const Matrix& y, const Matrix& dy) {
  return dy.array() * y.array() * (1.0 - y.array());
}

MaxPoolResult maxpool_rows(const Matrix& f) {
  if (f.rows() == 0) throw EmptyInput("maxpool_rows: empty input");
  MaxPoolResult r;
  r.values.resize(f.cols());
  r.argmax.resize(static_cast<std::size_t>(f.cols()));
  for (Eigen::Index c = 0; c < f.cols(); ++c) {
    Eigen::Index row;
    r.values(c) = f.col(c).maxCoeff(&row);  // first max row on ties
    r.argmax[static_cast<std::size_t>(c)] = row;
  }
  return r;
}

Matrix maxpool_backward(const MaxPoolResult& pooled, const Vector& dpooled,
                        Eigen::Index rows) {
  Matrix df = Matrix::Zero(rows, dpooled.size());
  for (Eigen::Index c = 0; c < dpooled.size(); ++c)
    df(pooled.argmax[static_cast<std::size_t>(c)], c) += dpooled(c);
  return df;
}

void ParamTape::attach(DenseLayer& layer, DenseGrads& grads) {
  auto push = [&](double* value, double* grad, Eigen::Index n) {
    Slot s;
    s.value = value;
    s.grad = grad;
    s.n = n;
    s.m = Eigen::ArrayXd::Zero(n);
    s.v = Eigen::ArrayXd::Zero(n);
    slots_.push_back(std::move(s));
  };
  push(layer.weights.data(), grads.weights.data(), layer.weights.size());
  push(layer.bias.data(), grads.bias.data(), layer.bias.size());
}

void ParamTape::zero_grads() {
  for (auto& s : slots_)
    Eigen::Map<Eigen::ArrayXd>(s.grad, s.n).setZero();
}

void ParamTape::adam_step(double lr, double beta1, double beta2, double eps) {
  ++step_;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_));
  for (auto& s : slots_) {
    Eigen::Map<Eigen::ArrayXd> value(s.value, s.n);
    Eigen::Map<const Eigen::ArrayXd> grad(s.grad, s.n);
    s.m = beta1 * s.m + (1.0 - beta1) * grad;
    s.v = beta2 * s.v + (1.0 - beta2) * grad.square();
    value -= lr * (s.m / bc1) / ((s.v / bc2).sqrt() + eps);
  }
}

}  // namespace masknet
