#include "masknet/encoder.hpp"

namespace masknet {

EncoderParams::EncoderParams() {
  for (int i = 0; i < kEncoderLayers; ++i)
    layers[static_cast<std::size_t>(i)] =
        DenseLayer(kEncoderWidths[i + 1], kEncoderWidths[i]);
}

void EncoderParams::init(Rng& rng) {
  for (auto& layer : layers) layer.init_kaiming(rng);
}

EncoderGrads::EncoderGrads(const EncoderParams& params) {
  for (std::size_t i = 0; i < params.layers.size(); ++i)
    layers[i] = DenseGrads(params.layers[i]);
}

void EncoderGrads::setZero() {
  for (auto& g : layers) g.setZero();
}

void EncoderGrads::add(const EncoderGrads& other) {
  for (std::size_t i = 0; i < layers.size(); ++i) layers[i].add(other.layers[i]);
}

EncoderCache encode_per_point_cached(const EncoderParams& params, const PointCloud& p) {
  if (p.empty()) throw EmptyCloud("encode_per_point: empty cloud");
  EncoderCache cache;
  cache.outputs[0] = p.pts;
  for (int i = 0; i < kEncoderLayers; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    cache.outputs[idx + 1] =
        relu(dense_forward(params.layers[idx], cache.outputs[idx]));
  }
  return cache;
}

PerPointFeatures encode_per_point(const EncoderParams& params, const PointCloud& p) {
  if (p.empty()) throw EmptyCloud("encode_per_point: empty cloud");
  Matrix x = p.pts;
  for (const auto& layer : params.layers) x = relu(dense_forward(layer, x));
  return x;
}

void encoder_backward(const EncoderParams& params, const EncoderCache& cache,
                      const Matrix& dfeatures, EncoderGrads& grads) {
  Matrix delta = relu_backward(cache.outputs[kEncoderLayers], dfeatures);
  for (int i = kEncoderLayers - 1; i >= 0; --i) {
    const auto idx = static_cast<std::size_t>(i);
    Matrix dx = dense_backward(params.layers[idx], grads.layers[idx],
                               cache.outputs[idx], delta);
    if (i > 0) delta = relu_backward(cache.outputs[idx], dx);
  }
}

Vector encode_global(const EncoderParams& params, const PointCloud& p) {
  return maxpool_rows(encode_per_point(params, p)).values;
}

void attach_encoder(ParamTape& tape, EncoderParams& params, EncoderGrads& grads) {
  for (std::size_t i = 0; i < params.layers.size(); ++i)
    tape.attach(params.layers[i], grads.layers[i]);
}

}  // namespace masknet
