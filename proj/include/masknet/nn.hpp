#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "masknet/errors.hpp"
#include "masknet/rng.hpp"

namespace masknet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Fully-connected layer. Applied to a batch of row vectors: Y = X * W^T + b.
// A layer shared across all points of a cloud is the same thing as a 1x1
// convolution over the point dimension.
struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;     // out

  DenseLayer() = default;
  DenseLayer(Eigen::Index out, Eigen::Index in)
      : weights(Matrix::Zero(out, in)), bias(Vector::Zero(out)) {}

  Eigen::Index in_size() const { return weights.cols(); }
  Eigen::Index out_size() const { return weights.rows(); }

  // Kaiming-uniform fan-in init (bound sqrt(6/fan_in)), zero bias.
  void init_kaiming(Rng& rng);
};

// Gradient buffers shape-congruent with a DenseLayer.
struct DenseGrads {
  Matrix weights;
  Vector bias;

  explicit DenseGrads(const DenseLayer& layer)
      : weights(Matrix::Zero(layer.out_size(), layer.in_size())),
        bias(Vector::Zero(layer.out_size())) {}
  DenseGrads() = default;

  void setZero() {
    weights.setZero();
    bias.setZero();
  }
  void add(const DenseGrads& other) {
    weights += other.weights;
    bias += other.bias;
  }
};

Matrix dense_forward(const DenseLayer& layer, const Matrix& x);

// Accumulates dW, db into grads and returns dX. x must be the same matrix
// that produced the forward output.
Matrix dense_backward(const DenseLayer& layer, DenseGrads& grads,
                      const Matrix& x, const Matrix& dy);

Matrix relu(const Matrix& x);
Matrix sigmoid(const Matrix& x);

// dpre given the *post-activation* output y = relu(pre): gradient passes
// where y > 0. (relu output is 0 exactly where pre <= 0.)
Matrix relu_backward(const Matrix& y, const Matrix& dy);
Matrix sigmoid_backward(const Matrix& y, const Matrix& dy);

struct MaxPoolResult {
  Vector values;                    // columnwise max, K entries
  std::vector<Eigen::Index> argmax;  // row achieving it, lowest index on ties
};

// Columnwise max over rows: the symmetry function that makes pooled features
// permutation-invariant. Throws EmptyInput on a 0-row matrix.
MaxPoolResult maxpool_rows(const Matrix& f);

// Routes dpooled back to the argmax rows only.
Matrix maxpool_backward(const MaxPoolResult& pooled, const Vector& dpooled,
                        Eigen::Index rows);

// Flat view over every trainable tensor plus its gradient accumulator and
// Adam moment buffers. Layers stay the owners of their storage; the tape
// holds raw pointers, so attached layers must outlive it and must not be
// resized after attachment.
class ParamTape {
 public:
  void attach(DenseLayer& layer, DenseGrads& grads);

  void zero_grads();

  // Bias-corrected Adam. Gradients are left untouched; caller zeroes.
  void adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999,
                 double eps = 1e-8);

  std::int64_t step_count() const { return step_; }
  std::size_t tensor_count() const { return slots_.size(); }

  // Per-parameter access across all slots, in attachment order. Used by
  // serialization and the finite-difference checks.
  double* value_data(std::size_t slot) { return slots_[slot].value; }
  const double* grad_data(std::size_t slot) const { return slots_[slot].grad; }
  Eigen::Index slot_size(std::size_t slot) const { return slots_[slot].n; }

 private:
  struct Slot {
    double* value;
    double* grad;
    Eigen::ArrayXd m, v;
    Eigen::Index n;
  };
  std::vector<Slot> slots_;
  std::int64_t step_ = 0;
};

}  // namespace masknet
