#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "masknet/encoder.hpp"

namespace masknet {

inline constexpr int kHeadLayers = 5;
inline constexpr Eigen::Index kHeadWidths[kHeadLayers + 1] = {2048, 1024, 512, 256, 128, 1};

// Mask head h: (1024, 512, 256, 128, 1) MLP over rows of
// [phi(X) | g(phi(Y)) tiled], ReLU between layers, sigmoid on the output.
struct MaskHeadParams {
  std::array<DenseLayer, kHeadLayers> layers;

  MaskHeadParams();
  void init(Rng& rng);
};

struct MaskHeadGrads {
  std::array<DenseGrads, kHeadLayers> layers;

  explicit MaskHeadGrads(const MaskHeadParams& params);
  MaskHeadGrads() = default;
  void setZero();
  void add(const MaskHeadGrads& other);
};

struct MaskNetParams {
  EncoderParams encoder;
  MaskHeadParams head;

  void init(Rng& rng) {
    encoder.init(rng);
    head.init(rng);
  }
};

struct MaskNetGrads {
  EncoderGrads encoder;
  MaskHeadGrads head;

  explicit MaskNetGrads(const MaskNetParams& params)
      : encoder(params.encoder), head(params.head) {}
  MaskNetGrads() = default;
  void setZero() {
    encoder.setZero();
    head.setZero();
  }
  void add(const MaskNetGrads& other) {
    encoder.add(other.encoder);
    head.add(other.head);
  }
};

void attach_masknet(ParamTape& tape, MaskNetParams& params, MaskNetGrads& grads);

// (out, in) sizes of all ten layers, encoder first. The checkpoint format
// pins this table.
std::vector<std::pair<Eigen::Index, Eigen::Index>> masknet_layer_sizes();

// Per-point inlier estimate over the template. probs[i] in [0, 1].
struct Mask {
  Vector probs;
  double threshold = 0.5;

  std::vector<std::uint8_t> binary() const;
};

// C_i = 1 iff probs_i >= eps (inclusive). Throws BadThreshold unless
// eps in (0, 1).
std::vector<std::uint8_t> threshold_mask(const Vector& probs, double eps);

std::size_t popcount(const std::vector<std::uint8_t>& mask);

// Subsequence of p at indices where mask is 1, order preserved. An all-zero
// mask yields an empty cloud; callers decide whether that is an error.
PointCloud apply_mask(const std::vector<std::uint8_t>& mask, const PointCloud& p);

// probs has one entry per template point; row i depends on template point i
// and on the whole source cloud through the pooled global feature.
Vector predict_mask(const MaskNetParams& params, const PointCloud& template_cloud,
                    const PointCloud& source_cloud);

// Forward pass that keeps every intermediate needed by backward().
struct MaskNetCache {
  bool recorded = false;
  EncoderCache enc_template;
  EncoderCache enc_source;
  MaxPoolResult source_pool;
  std::array<Matrix, kHeadLayers - 1> head_hidden;  // post-ReLU outputs
  Vector probs;
};

MaskNetCache masknet_forward(const MaskNetParams& params,
                             const PointCloud& template_cloud,
                             const PointCloud& source_cloud);

// Accumulates d(loss)/d(theta) into grads for every parameter, given
// d(loss)/d(probs). Max-pool routes the source-branch gradient to argmax rows
// only; the shared encoder receives contributions from both branches.
// Throws NoForwardRecorded if the cache was not produced by masknet_forward.
void masknet_backward(const MaskNetParams& params, const MaskNetCache& cache,
                      const Vector& dprobs, MaskNetGrads& grads);

// Registers the masked template against the source, returning the
// source-to-template transform. Throwing RegistrationFailed aborts
// refine_iteratively.
using Registrar =
    std::function<RigidTransform(const PointCloud& masked_template, const PointCloud& source)>;

struct RefineResult {
  Mask mask;                                // from the final iteration
  std::vector<RigidTransform> trajectory;   // composed transform after each iteration
};

// Alternates mask prediction and registration, moving the source by the
// estimated transform each round. Rotation error tends to drop with more
// iterations on aggregate but is not guaranteed to per instance.
RefineResult refine_iteratively(const MaskNetParams& params, const PointCloud& template_cloud,
                                const PointCloud& source_cloud, const Registrar& registrar,
                                int max_iters, double eps = 0.5);

// Outlier removal: the mask is estimated over the *noisy* cloud with the
// clean template supplying the pooled reference feature (the role swap of the
// denoising formulation), then applied to the noisy cloud.
PointCloud denoise(const MaskNetParams& params, const PointCloud& clean_template,
                   const PointCloud& noisy_source, double eps = 0.5);

// Probabilities over the noisy cloud, before thresholding.
Vector denoise_probs(const MaskNetParams& params, const PointCloud& clean_template,
                     const PointCloud& noisy_source);

}  // namespace masknet
