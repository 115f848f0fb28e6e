#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "masknet/geom.hpp"
#include "masknet/mesh_io.hpp"
#include "masknet/rng.hpp"

namespace masknet {

// One training/evaluation record. gt_transform maps source onto template
// (the same direction registration backends estimate). gt_mask marks the
// template points visible in the partial scan; when outliers were injected,
// source_inlier_mask marks which source points are genuine (1) vs injected (0).
struct PairSample {
  PointCloud template_cloud;
  PointCloud source;
  std::vector<std::uint8_t> gt_mask;
  std::vector<std::uint8_t> source_inlier_mask;  // empty unless outliers injected
  RigidTransform gt_transform;
  std::string category;
};

enum class ShapeKind { Sphere, Box, Cylinder, Torus, Cone, Composite };

ShapeKind shape_kind_from_string(const std::string& name);
std::string to_string(ShapeKind kind);
const std::vector<std::string>& all_shape_families();

// Parametric surface generator. params are family specific (empty = default):
//   sphere:    none (unit sphere)
//   box:       half extents (a, b, c)
//   cylinder:  radius, half height
//   torus:     minor radius (major fixed at 1)
//   cone:      base radius, height
//   composite: bridge box half extents (a, b, c), lobe radius, lobe half
//              height, lobe offset (two mirrored cylinder lobes on a box)
struct ShapeSpec {
  ShapeKind kind = ShapeKind::Sphere;
  std::vector<double> params;
  std::uint64_t seed = 0;
};

// Draws family parameters uniformly from per-family ranges.
ShapeSpec random_shape_spec(ShapeKind kind, Rng& rng);

// n surface points, centroid-centered and scaled so the max radius is 1.
// Deterministic in spec.seed.
PointCloud sample_shape(const ShapeSpec& spec, int n);

// Simulated self-occlusion: keep the round(keep_fraction * N) template points
// nearest to a viewpoint drawn uniformly on the radius-2 sphere.
struct PartialScan {
  std::vector<std::uint8_t> gt_mask;  // 1 = kept
  PointCloud source;                  // masked template, template order
};

PartialScan simulate_partial(const PointCloud& template_cloud, double keep_fraction,
                             std::uint64_t seed);
PartialScan simulate_partial_view(const PointCloud& template_cloud, double keep_fraction,
                                  const Vec3& viewpoint);

// Rotation: uniform random axis, angle uniform in [0, rot_max_deg].
// Translation: componentwise uniform in [-trans_max, trans_max].
RigidTransform random_transform(double rot_max_deg, double trans_max, std::uint64_t seed);
RigidTransform random_transform(double rot_max_deg, double trans_max, Rng& rng);

// Appends round(fraction * N) uniform points in [-1,1]^3, then shuffles the
// combined cloud. Returned mask marks original points 1, injected 0.
struct OutlierResult {
  PointCloud cloud;
  std::vector<std::uint8_t> inlier_mask;
};

OutlierResult inject_outliers(const PointCloud& p, double fraction, std::uint64_t seed);
OutlierResult inject_outliers(const PointCloud& p, double fraction, Rng& rng);

PointCloud add_gaussian_noise(const PointCloud& p, double sigma, std::uint64_t seed);
PointCloud add_gaussian_noise(const PointCloud& p, double sigma, Rng& rng);

enum class SplitMode { All, Seen, Unseen };

// Flat key=value dataset description. Unknown keys are errors.
struct DatasetConfig {
  std::vector<std::string> shapes = all_shape_families();
  std::filesystem::path mesh_dir;  // overrides shapes when set
  int n_points = 1024;
  double keep_fraction = 0.7;
  double rot_max_deg = 45.0;
  double trans_max = 1.0;
  double outlier_fraction = 0.0;
  double noise_sigma = 0.0;
  SplitMode split = SplitMode::All;
  std::uint64_t seed = 0;
  int count = 100;

  void validate() const;
  // Category names this stream draws from, after applying the split
  // (seen = first half of the sorted list, unseen = second half).
  std::vector<std::string> active_categories() const;
  std::string fingerprint() const;
};

DatasetConfig parse_dataset_config(const std::filesystem::path& path);
DatasetConfig parse_dataset_config_text(const std::string& text);
std::string dataset_config_to_text(const DatasetConfig& config);

// Fully determined by (config, index): parallel and serial generation agree.
// Pipeline: sample/normalize template -> partial scan -> outliers -> noise ->
// rigid perturbation of the source; gt_transform maps source back onto the
// template.
PairSample make_sample(const DatasetConfig& config, int index);

std::vector<PairSample> make_dataset(const DatasetConfig& config);

}  // namespace masknet
