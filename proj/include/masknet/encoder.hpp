#pragma once

#include <array>

#include "masknet/geom.hpp"
#include "masknet/nn.hpp"

namespace masknet {

inline constexpr int kEncoderLayers = 5;
inline constexpr Eigen::Index kEncoderWidths[kEncoderLayers + 1] = {3, 64, 64, 64, 128, 1024};
inline constexpr Eigen::Index kFeatureDim = 1024;

// Shared per-point MLP stack (3 -> 64 -> 64 -> 64 -> 128 -> 1024) with ReLU
// after every layer, including the last: features stay nonnegative and each
// point's row depends on that point only. Both Siamese branches use one
// parameter set.
struct EncoderParams {
  std::array<DenseLayer, kEncoderLayers> layers;

  EncoderParams();
  void init(Rng& rng);
};

struct EncoderGrads {
  std::array<DenseGrads, kEncoderLayers> layers;

  explicit EncoderGrads(const EncoderParams& params);
  EncoderGrads() = default;
  void setZero();
  void add(const EncoderGrads& other);
};

// N x 1024 per-point features, rows order-aligned with the input cloud.
using PerPointFeatures = Matrix;

// Layer outputs kept for the backward pass. outputs[0] is the raw N x 3
// input; outputs[i] is the post-ReLU output of layer i.
struct EncoderCache {
  std::array<Matrix, kEncoderLayers + 1> outputs;
  const Matrix& features() const { return outputs[kEncoderLayers]; }
};

PerPointFeatures encode_per_point(const EncoderParams& params, const PointCloud& p);

EncoderCache encode_per_point_cached(const EncoderParams& params, const PointCloud& p);

// dfeatures is N x 1024; accumulates into grads, returns nothing (input
// gradient is never needed, points are data).
void encoder_backward(const EncoderParams& params, const EncoderCache& cache,
                      const Matrix& dfeatures, EncoderGrads& grads);

// Max-pooled 1024-vector: g(phi(P)).
Vector encode_global(const EncoderParams& params, const PointCloud& p);

void attach_encoder(ParamTape& tape, EncoderParams& params, EncoderGrads& grads);

}  // namespace masknet
