#include "masknet/masknet.hpp"

namespace masknet {

MaskHeadParams::MaskHeadParams() {
  for (int i = 0; i < kHeadLayers; ++i)
    layers[static_cast<std::size_t>(i)] =
        DenseLayer(kHeadWidths[i + 1], kHeadWidths[i]);
}

void MaskHeadParams::init(Rng& rng) {
  for (auto& layer : layers) layer.init_kaiming(rng);
}

MaskHeadGrads::MaskHeadGrads(const MaskHeadParams& params) {
  for (std::size_t i = 0; i < params.layers.size(); ++i)
    layers[i] = DenseGrads(params.layers[i]);
}

void MaskHeadGrads::setZero() {
  for (auto& g : layers) g.setZero();
}

void MaskHeadGrads::add(const MaskHeadGrads& other) {
  for (std::size_t i = 0; i < layers.size(); ++i) layers[i].add(other.layers[i]);
}

void attach_masknet(ParamTape& tape, MaskNetParams& params, MaskNetGrads& grads) {
  attach_encoder(tape, params.encoder, grads.encoder);
  for (std::size_t i = 0; i < params.head.layers.size(); ++i)
    tape.attach(params.head.layers[i], grads.head.layers[i]);
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> masknet_layer_sizes() {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> sizes;
  for (int i = 0; i < kEncoderLayers; ++i)
    sizes.emplace_back(kEncoderWidths[i + 1], kEncoderWidths[i]);
  for (int i = 0; i < kHeadLayers; ++i)
    sizes.emplace_back(kHeadWidths[i + 1], kHeadWidths[i]);
  return sizes;
}

std::vector<std::uint8_t> Mask::binary() const {
  return threshold_mask(probs, threshold);
}

std::vector<std::uint8_t> threshold_mask(const Vector& probs, double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw BadThreshold("threshold_mask: eps must lie in (0,1), got " + std::to_string(eps));
  std::vector<std::uint8_t> c(static_cast<std::size_t>(probs.size()));
  for (Eigen::Index i = 0; i < probs.size(); ++i)
    c[static_cast<std::size_t>(i)] = probs(i) >= eps ? 1 : 0;
  return c;
}

std::size_t popcount(const std::vector<std::uint8_t>& mask) {
  std::size_t n = 0;
  for (auto b : mask) n += b != 0;
  return n;
}

PointCloud apply_mask(const std::vector<std::uint8_t>& mask, const PointCloud& p) {
  if (static_cast<Eigen::Index>(mask.size()) != p.size())
    throw LengthMismatch("apply_mask: mask length " + std::to_string(mask.size()) +
                         " vs cloud size " + std::to_string(p.size()));
  PointCloud out;
  out.pts.resize(static_cast<Eigen::Index>(popcount(mask)), 3);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (mask[static_cast<std::size_t>(i)]) out.pts.row(row++) = p.pts.row(i);
  return out;
}

namespace {

// First head layer on [phi(X) | g tiled]: the tiled half multiplies the same
// vector for every row, so it is hoisted out of the per-point product.
// W1 = [A | B] with z = phiX * A^T + (B g + b) per row.
Matrix head_layer1(const DenseLayer& l1, const Matrix& phi_x, const Vector& g) {
  const auto a = l1.weights.leftCols(kFeatureDim);
  const auto b = l1.weights.rightCols(kFeatureDim);
  Vector shared = b * g + l1.bias;
  Matrix z(phi_x.rows(), l1.out_size());
  z.noalias() = phi_x * a.transpose();
  z.rowwise() += shared.transpose();
  return z;
}

Vector head_forward(const MaskHeadParams& head, const Matrix& phi_x, const Vector& g,
                    std::array<Matrix, kHeadLayers - 1>* hidden) {
  Matrix x = relu(head_layer1(head.layers[0], phi_x, g));
  if (hidden) (*hidden)[0] = x;
  for (int i = 1; i < kHeadLayers - 1; ++i) {
    x = relu(dense_forward(head.layers[static_cast<std::size_t>(i)], x));
    if (hidden) (*hidden)[static_cast<std::size_t>(i)] = x;
  }
  const Matrix logits = dense_forward(head.layers[kHeadLayers - 1], x);
  return sigmoid(logits).col(0);
}

}  // namespace

Vector predict_mask(const MaskNetParams& params, const PointCloud& template_cloud,
                    const PointCloud& source_cloud) {
  if (template_cloud.empty() || source_cloud.empty())
    throw EmptyCloud("predict_mask: empty input cloud");
  const Matrix phi_x = encode_per_point(params.encoder, template_cloud);
  const Vector g = encode_global(params.encoder, source_cloud);
  return head_forward(params.head, phi_x, g, nullptr);
}

MaskNetCache masknet_forward(const MaskNetParams& params,
                             const PointCloud& template_cloud,
                             const PointCloud& source_cloud) {
  if (template_cloud.empty() || source_cloud.empty())
    throw EmptyCloud("masknet_forward: empty input cloud");
  MaskNetCache cache;
  cache.enc_template = encode_per_point_cached(params.encoder, template_cloud);
  cache.enc_source = encode_per_point_cached(params.encoder, source_cloud);
  cache.source_pool = maxpool_rows(cache.enc_source.features());
  cache.probs = head_forward(params.head, cache.enc_template.features(),
                             cache.source_pool.values, &cache.head_hidden);
  cache.recorded = true;
  return cache;
}

void masknet_backward(const MaskNetParams& params, const MaskNetCache& cache,
                      const Vector& dprobs, MaskNetGrads& grads) {
  if (!cache.recorded)
    throw NoForwardRecorded("masknet_backward: cache not produced by a forward pass");

  const Matrix& phi_x = cache.enc_template.features();
  const Vector& g = cache.source_pool.values;

  // Output sigmoid.
  Matrix delta = (dprobs.array() * cache.probs.array() *
                  (1.0 - cache.probs.array())).matrix();

  // Head layers 5..2 (generic path).
  const auto& head = params.head.layers;
  auto& hgrads = grads.head.layers;
  delta = dense_backward(head[kHeadLayers - 1], hgrads[kHeadLayers - 1],
                         cache.head_hidden[kHeadLayers - 2], delta);
  for (int i = kHeadLayers - 2; i >= 1; --i) {
    const auto idx = static_cast<std::size_t>(i);
    delta = relu_backward(cache.head_hidden[idx], delta);
    delta = dense_backward(head[idx], hgrads[idx], cache.head_hidden[idx - 1], delta);
  }
  delta = relu_backward(cache.head_hidden[0], delta);

  // Head layer 1, split form. delta is N x 1024.
  {
    const auto a = head[0].weights.leftCols(kFeatureDim);
    const auto b = head[0].weights.rightCols(kFeatureDim);
    const Vector col_sum = delta.colwise().sum().transpose();
    hgrads[0].weights.leftCols(kFeatureDim).noalias() += delta.transpose() * phi_x;
    hgrads[0].weights.rightCols(kFeatureDim).noalias() += col_sum * g.transpose();
    hgrads[0].bias.noalias() += col_sum;

    Matrix dphi_x(phi_x.rows(), phi_x.cols());
    dphi_x.noalias() = delta * a;
    encoder_backward(params.encoder, cache.enc_template, dphi_x, grads.encoder);

    Vector dg(kFeatureDim);
    dg.noalias() = b.transpose() * col_sum;
    const Matrix dphi_y = maxpool_backward(cache.source_pool, dg,
                                           cache.enc_source.features().rows());
    encoder_backward(params.encoder, cache.enc_source, dphi_y, grads.encoder);
  }
}

RefineResult refine_iteratively(const MaskNetParams& params, const PointCloud& template_cloud,
                                const PointCloud& source_cloud, const Registrar& registrar,
                                int max_iters, double eps) {
  if (max_iters < 1) throw Error("refine_iteratively: max_iters must be >= 1");
  RefineResult result;
  PointCloud current = source_cloud;
  RigidTransform total;
  for (int iter = 0; iter < max_iters; ++iter) {
    result.mask.probs = predict_mask(params, template_cloud, current);
    result.mask.threshold = eps;
    const auto binary = result.mask.binary();
    if (popcount(binary) == 0)
      throw EmptyMask("refine_iteratively: all-zero mask at iteration " +
                      std::to_string(iter + 1));
    const PointCloud masked = apply_mask(binary, template_cloud);
    const RigidTransform step = registrar(masked, current);
    current = apply_transform(step, current);
    total = compose(step, total);
    result.trajectory.push_back(total);
  }
  return result;
}

Vector denoise_probs(const MaskNetParams& params, const PointCloud& clean_template,
                     const PointCloud& noisy_source) {
  // Role swap: per-point features come from the noisy cloud, the pooled
  // reference from the clean one.
  return predict_mask(params, noisy_source, clean_template);
}

PointCloud denoise(const MaskNetParams& params, const PointCloud& clean_template,
                   const PointCloud& noisy_source, double eps) {
  const Vector probs = denoise_probs(params, clean_template, noisy_source);
  return apply_mask(threshold_mask(probs, eps), noisy_source);
}

}  // namespace masknet
