#include "masknet/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace masknet {

namespace {

constexpr double kViewpointRadius = 2.0;

double param_or(const std::vector<double>& params, std::size_t i, double fallback) {
  return i < params.size() ? params[i] : fallback;
}

// Emit antithetic +/- pairs for centrally symmetric families: the raw sample
// centroid is (numerically) zero, which keeps sphere samples on the unit
// sphere after normalization.
template <typename F>
void fill_symmetric(PointCloud& cloud, int n, F&& draw) {
  int i = 0;
  while (i + 1 < n) {
    const Vec3 p = draw();
    cloud.pts.row(i++) = p.transpose();
    cloud.pts.row(i++) = (-p).transpose();
  }
  if (i < n) cloud.pts.row(i) = draw().transpose();
}

Vec3 sphere_point(Rng& rng) { return rng.unit_vector(); }

Vec3 box_point(Rng& rng, double a, double b, double c) {
  // pick a face pair by area, then a uniform point on it
  const double area_x = b * c, area_y = a * c, area_z = a * b;
  const double pick = rng.uniform() * (area_x + area_y + area_z);
  const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  const double u = rng.uniform(-1.0, 1.0), v = rng.uniform(-1.0, 1.0);
  if (pick < area_x) return {sign * a, u * b, v * c};
  if (pick < area_x + area_y) return {u * a, sign * b, v * c};
  return {u * a, v * b, sign * c};
}

Vec3 cylinder_point(Rng& rng, double radius, double half_height) {
  const double side_area = 2.0 * std::numbers::pi * radius * 2.0 * half_height;
  const double cap_area = 2.0 * std::numbers::pi * radius * radius;
  const double pick = rng.uniform() * (side_area + cap_area);
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  if (pick < side_area) {
    return {radius * std::cos(angle), radius * std::sin(angle),
            rng.uniform(-half_height, half_height)};
  }
  const double r = radius * std::sqrt(rng.uniform());
  const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  return {r * std::cos(angle), r * std::sin(angle), sign * half_height};
}

Vec3 torus_point(Rng& rng, double minor) {
  // surface density over the tube angle is proportional to (1 + minor*cos v)
  constexpr double major = 1.0;
  double v;
  do {
    v = rng.uniform(0.0, 2.0 * std::numbers::pi);
  } while (rng.uniform() * (major + minor) > major + minor * std::cos(v));
  const double u = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double ring = major + minor * std::cos(v);
  return {ring * std::cos(u), ring * std::sin(u), minor * std::sin(v)};
}

Vec3 cone_point(Rng& rng, double radius, double height) {
  // apex at +height/2 on z, base disc at -height/2
  const double slant = std::sqrt(radius * radius + height * height);
  const double side_area = std::numbers::pi * radius * slant;
  const double base_area = std::numbers::pi * radius * radius;
  const double pick = rng.uniform() * (side_area + base_area);
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  if (pick < side_area) {
    const double s = std::sqrt(rng.uniform());  // distance fraction from apex
    const double r = s * radius;
    return {r * std::cos(angle), r * std::sin(angle), height * (0.5 - s)};
  }
  const double r = radius * std::sqrt(rng.uniform());
  return {r * std::cos(angle), r * std::sin(angle), -0.5 * height};
}

Vec3 composite_point(Rng& rng, double a, double b, double c, double lobe_r,
                     double lobe_hh, double offset) {
  // central box bridging two mirrored cylinder lobes: still symmetric
  const double box_area = 8.0 * (a * b + b * c + a * c);
  const double lobe_area =
      2.0 * (2.0 * std::numbers::pi * lobe_r * 2.0 * lobe_hh +
             2.0 * std::numbers::pi * lobe_r * lobe_r);
  const double pick = rng.uniform() * (box_area + lobe_area);
  if (pick < box_area) return box_point(rng, a, b, c);
  const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
  Vec3 p = cylinder_point(rng, lobe_r, lobe_hh);
  // lobes lie along x, cylinder axis along z
  p.x() += side * offset;
  return side > 0 ? p : Vec3(-p.x(), p.y(), p.z()) * 1.0 - Vec3::Zero();
}

}  // namespace

ShapeKind shape_kind_from_string(const std::string& name) {
  if (name == "sphere") return ShapeKind::Sphere;
  if (name == "box") return ShapeKind::Box;
  if (name == "cylinder") return ShapeKind::Cylinder;
  if (name == "torus") return ShapeKind::Torus;
  if (name == "cone") return ShapeKind::Cone;
  if (name == "composite") return ShapeKind::Composite;
  throw BadSpec("unknown shape family: " + name);
}

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Sphere: return "sphere";
    case ShapeKind::Box: return "box";
    case ShapeKind::Cylinder: return "cylinder";
    case ShapeKind::Torus: return "torus";
    case ShapeKind::Cone: return "cone";
    case ShapeKind::Composite: return "composite";
  }
  throw BadSpec("invalid shape kind");
}

const std::vector<std::string>& all_shape_families() {
  static const std::vector<std::string> families = {"sphere", "box", "cylinder",
                                                    "torus", "cone", "composite"};
  return families;
}

ShapeSpec random_shape_spec(ShapeKind kind, Rng& rng) {
  ShapeSpec spec;
  spec.kind = kind;
  spec.seed = rng.raw();
  switch (kind) {
    case ShapeKind::Sphere:
      break;
    case ShapeKind::Box:
      spec.params = {rng.uniform(0.4, 1.0), rng.uniform(0.4, 1.0), rng.uniform(0.4, 1.0)};
      break;
    case ShapeKind::Cylinder:
      spec.params = {rng.uniform(0.25, 0.7), rng.uniform(0.5, 1.0)};
      break;
    case ShapeKind::Torus:
      spec.params = {rng.uniform(0.15, 0.45)};
      break;
    case ShapeKind::Cone:
      spec.params = {rng.uniform(0.4, 0.9), rng.uniform(0.8, 1.6)};
      break;
    case ShapeKind::Composite:
      spec.params = {rng.uniform(0.3, 0.6), rng.uniform(0.2, 0.45), rng.uniform(0.2, 0.45),
                     rng.uniform(0.15, 0.35), rng.uniform(0.5, 0.9), rng.uniform(0.35, 0.65)};
      break;
  }
  return spec;
}

PointCloud sample_shape(const ShapeSpec& spec, int n) {
  if (n < 1) throw BadSpec("sample_shape: n must be >= 1");
  Rng rng(spec.seed);
  PointCloud cloud;
  cloud.pts.resize(n, 3);
  const auto& q = spec.params;

  switch (spec.kind) {
    case ShapeKind::Sphere:
      fill_symmetric(cloud, n, [&] { return sphere_point(rng); });
      break;
    case ShapeKind::Box: {
      const double a = param_or(q, 0, 1.0), b = param_or(q, 1, 0.7), c = param_or(q, 2, 0.5);
      fill_symmetric(cloud, n, [&] { return box_point(rng, a, b, c); });
      break;
    }
    case ShapeKind::Cylinder: {
      const double r = param_or(q, 0, 0.5), hh = param_or(q, 1, 1.0);
      fill_symmetric(cloud, n, [&] { return cylinder_point(rng, r, hh); });
      break;
    }
    case ShapeKind::Torus: {
      const double minor = param_or(q, 0, 0.3);
      fill_symmetric(cloud, n, [&] { return torus_point(rng, minor); });
      break;
    }
    case ShapeKind::Cone: {
      const double r = param_or(q, 0, 0.6), h = param_or(q, 1, 1.2);
      for (int i = 0; i < n; ++i) cloud.pts.row(i) = cone_point(rng, r, h).transpose();
      break;
    }
    case ShapeKind::Composite: {
      const double a = param_or(q, 0, 0.45), b = param_or(q, 1, 0.3), c = param_or(q, 2, 0.3);
      const double lr = param_or(q, 3, 0.25), lh = param_or(q, 4, 0.7), off = param_or(q, 5, 0.5);
      fill_symmetric(cloud, n, [&] { return composite_point(rng, a, b, c, lr, lh, off); });
      break;
    }
  }

  // center, then scale the max radius to 1
  const Eigen::RowVector3d centroid = cloud.pts.colwise().mean();
  cloud.pts.rowwise() -= centroid;
  const double max_norm = cloud.pts.rowwise().norm().maxCoeff();
  if (max_norm <= 0.0) throw BadSpec("sample_shape: degenerate shape");
  cloud.pts /= max_norm;
  return cloud;
}

PartialScan simulate_partial_view(const PointCloud& template_cloud, double keep_fraction,
                                  const Vec3& viewpoint) {
  const Eigen::Index n = template_cloud.size();
  const auto k = static_cast<Eigen::Index>(
      std::lround(keep_fraction * static_cast<double>(n)));
  if (k < 1 || k > n)
    throw BadSpec("simulate_partial: keep_fraction " + std::to_string(keep_fraction) +
                  " keeps no points (or more than N)");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd d2(n);
  for (Eigen::Index i = 0; i < n; ++i)
    d2(i) = (template_cloud.point(i) - viewpoint).squaredNorm();
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return d2(a) < d2(b) || (d2(a) == d2(b) && a < b);
  });

  PartialScan scan;
  scan.gt_mask.assign(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < k; ++i)
    scan.gt_mask[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
  scan.source.pts.resize(k, 3);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (scan.gt_mask[static_cast<std::size_t>(i)])
      scan.source.pts.row(row++) = template_cloud.pts.row(i);
  return scan;
}

PartialScan simulate_partial(const PointCloud& template_cloud, double keep_fraction,
                             std::uint64_t seed) {
  Rng rng(seed);
  const Vec3 viewpoint = kViewpointRadius * rng.unit_vector();
  return simulate_partial_view(template_cloud, keep_fraction, viewpoint);
}

RigidTransform random_transform(double rot_max_deg, double trans_max, Rng& rng) {
  if (rot_max_deg < 0.0 || rot_max_deg >= 180.0)
    throw BadSpec("random_transform: rot_max_deg must lie in [0, 180)");
  const Vec3 axis = rng.unit_vector();
  const double angle = rng.uniform(0.0, rot_max_deg) * std::numbers::pi / 180.0;
  Twist xi = Twist::Zero();
  xi.head<3>() = axis * angle;
  RigidTransform t = se3_exp(xi);
  t.translation = Vec3(rng.uniform(-trans_max, trans_max),
                       rng.uniform(-trans_max, trans_max),
                       rng.uniform(-trans_max, trans_max));
  return t;
}

RigidTransform random_transform(double rot_max_deg, double trans_max, std::uint64_t seed) {
  Rng rng(seed);
  return random_transform(rot_max_deg, trans_max, rng);
}

OutlierResult inject_outliers(const PointCloud& p, double fraction, Rng& rng) {
  if (fraction < 0.0) throw BadSpec("inject_outliers: fraction must be >= 0");
  const Eigen::Index n = p.size();
  const auto extra = static_cast<Eigen::Index>(
      std::lround(fraction * static_cast<double>(n)));

  Eigen::Matrix<double, Eigen::Dynamic, 3> combined(n + extra, 3);
  combined.topRows(n) = p.pts;
  for (Eigen::Index i = 0; i < extra; ++i)
    combined.row(n + i) << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
        rng.uniform(-1.0, 1.0);

  const auto perm = rng.permutation(static_cast<std::size_t>(n + extra));
  OutlierResult result;
  result.cloud.pts.resize(n + extra, 3);
  result.inlier_mask.assign(static_cast<std::size_t>(n + extra), 0);
  for (Eigen::Index i = 0; i < n + extra; ++i) {
    const auto src = static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]);
    result.cloud.pts.row(i) = combined.row(src);
    result.inlier_mask[static_cast<std::size_t>(i)] = src < n ? 1 : 0;
  }
  return result;
}

OutlierResult inject_outliers(const PointCloud& p, double fraction, std::uint64_t seed) {
  Rng rng(seed);
  return inject_outliers(p, fraction, rng);
}

PointCloud add_gaussian_noise(const PointCloud& p, double sigma, Rng& rng) {
  if (sigma < 0.0) throw BadSpec("add_gaussian_noise: sigma must be >= 0");
  if (sigma == 0.0) return p;
  PointCloud out = p;
  for (Eigen::Index i = 0; i < out.size(); ++i)
    for (Eigen::Index c = 0; c < 3; ++c) out.pts(i, c) += sigma * rng.normal();
  return out;
}

PointCloud add_gaussian_noise(const PointCloud& p, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  return add_gaussian_noise(p, sigma, rng);
}

void DatasetConfig::validate() const {
  if (n_points < 2) throw ConfigError("n_points must be >= 2");
  if (count < 1) throw ConfigError("count must be >= 1");
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
    throw ConfigError("keep_fraction must lie in (0, 1]");
  if (keep_fraction * n_points < 1.0) throw ConfigError("keep_fraction keeps no points");
  if (rot_max_deg < 0.0 || rot_max_deg >= 180.0)
    throw ConfigError("rot_max_deg must lie in [0, 180)");
  if (trans_max < 0.0) throw ConfigError("trans_max must be >= 0");
  if (outlier_fraction < 0.0) throw ConfigError("outlier_fraction must be >= 0");
  if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
  if (mesh_dir.empty()) {
    if (shapes.empty()) throw ConfigError("shapes list is empty");
    for (const auto& s : shapes) shape_kind_from_string(s);  // throws on unknown
    if (split != SplitMode::All && shapes.size() < 2)
      throw ConfigError("split requires at least 2 categories");
  }
}

std::vector<std::string> DatasetConfig::active_categories() const {
  std::vector<std::string> cats;
  if (!mesh_dir.empty()) {
    for (const auto& entry : std::filesystem::directory_iterator(mesh_dir)) {
      auto ext = entry.path().extension().string();
      if (ext == ".off" || ext == ".ply" || ext == ".xyz")
        cats.push_back(entry.path().string());
    }
    std::sort(cats.begin(), cats.end());
    if (cats.empty()) throw ConfigError("mesh_dir contains no .off/.ply/.xyz files");
  } else {
    cats = shapes;
  }
  if (split == SplitMode::All) return cats;
  const std::size_t half = cats.size() / 2;
  if (split == SplitMode::Seen)
    return {cats.begin(), cats.begin() + static_cast<std::ptrdiff_t>(half)};
  return {cats.begin() + static_cast<std::ptrdiff_t>(half), cats.end()};
}

std::string dataset_config_to_text(const DatasetConfig& config) {
  std::ostringstream out;
  out << "shapes=";
  for (std::size_t i = 0; i < config.shapes.size(); ++i)
    out << (i ? "," : "") << config.shapes[i];
  out << "\n";
  if (!config.mesh_dir.empty()) out << "mesh_dir=" << config.mesh_dir.string() << "\n";
  out << "n_points=" << config.n_points << "\n";
  char buf[64];
  auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << key << "=" << buf << "\n";
  };
  put("keep_fraction", config.keep_fraction);
  put("rot_max_deg", config.rot_max_deg);
  put("trans_max", config.trans_max);
  put("outlier_fraction", config.outlier_fraction);
  put("noise_sigma", config.noise_sigma);
  out << "split=" << (config.split == SplitMode::All ? "all"
                      : config.split == SplitMode::Seen ? "seen" : "unseen") << "\n";
  out << "seed=" << config.seed << "\n";
  out << "count=" << config.count << "\n";
  return out.str();
}

DatasetConfig parse_dataset_config_text(const std::string& text) {
  DatasetConfig config;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("dataset config line " + std::to_string(line_no) +
                        ": expected key=value");
    std::string key = line.substr(first, eq - first);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    while (!value.empty() && (value.back() == '\r' || value.back() == ' ')) value.pop_back();
    const auto vstart = value.find_first_not_of(" \t");
    value = vstart == std::string::npos ? "" : value.substr(vstart);

    try {
      if (key == "shapes") {
        config.shapes.clear();
        std::istringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) config.shapes.push_back(item);
      } else if (key == "mesh_dir") {
        config.mesh_dir = value;
      } else if (key == "n_points") {
        config.n_points = std::stoi(value);
      } else if (key == "keep_fraction") {
        config.keep_fraction = std::stod(value);
      } else if (key == "rot_max_deg") {
        config.rot_max_deg = std::stod(value);
      } else if (key == "trans_max") {
        config.trans_max = std::stod(value);
      } else if (key == "outlier_fraction") {
        config.outlier_fraction = std::stod(value);
      } else if (key == "noise_sigma") {
        config.noise_sigma = std::stod(value);
      } else if (key == "split") {
        if (value == "all") config.split = SplitMode::All;
        else if (value == "seen") config.split = SplitMode::Seen;
        else if (value == "unseen") config.split = SplitMode::Unseen;
        else throw ConfigError("split must be all|seen|unseen, got " + value);
      } else if (key == "seed") {
        config.seed = std::stoull(value);
      } else if (key == "count") {
        config.count = std::stoi(value);
      } else {
        throw ConfigError("unknown dataset config key: " + key);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("dataset config line " + std::to_string(line_no) +
                        ": bad value for " + key);
    }
  }
  config.validate();
  return config;
}

DatasetConfig parse_dataset_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset config " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset_config_text(buffer.str());
}

std::string DatasetConfig::fingerprint() const {
  // FNV-1a over the canonical text form
  const std::string text = dataset_config_to_text(*this);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PairSample make_sample(const DatasetConfig& config, int index) {
  const auto categories = config.active_categories();
  Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(index)));

  PairSample sample;
  sample.category = categories[static_cast<std::size_t>(index) % categories.size()];

  if (!config.mesh_dir.empty()) {
    Rng mesh_rng(rng.raw());
    sample.template_cloud =
        load_point_cloud(sample.category, mesh_rng, config.n_points);
    const Eigen::RowVector3d centroid = sample.template_cloud.pts.colwise().mean();
    sample.template_cloud.pts.rowwise() -= centroid;
    const double max_norm = sample.template_cloud.pts.rowwise().norm().maxCoeff();
    if (max_norm > 0) sample.template_cloud.pts /= max_norm;
  } else {
    const ShapeSpec spec = random_shape_spec(shape_kind_from_string(sample.category), rng);
    sample.template_cloud = sample_shape(spec, config.n_points);
  }

  PartialScan scan = simulate_partial(sample.template_cloud, config.keep_fraction, rng.raw());
  sample.gt_mask = std::move(scan.gt_mask);
  PointCloud working = std::move(scan.source);

  if (config.outlier_fraction > 0.0) {
    OutlierResult corrupted = inject_outliers(working, config.outlier_fraction, rng);
    working = std::move(corrupted.cloud);
    sample.source_inlier_mask = std::move(corrupted.inlier_mask);
  }
  if (config.noise_sigma > 0.0)
    working = add_gaussian_noise(working, config.noise_sigma, rng);

  const RigidTransform perturb =
      random_transform(config.rot_max_deg, config.trans_max, rng);
  sample.source = apply_transform(perturb, working);
  sample.gt_transform = perturb.inverse();
  return sample;
}

std::vector<PairSample> make_dataset(const DatasetConfig& config) {
  config.validate();
  std::vector<PairSample> samples;
  samples.reserve(static_cast<std::size_t>(config.count));
  for (int i = 0; i < config.count; ++i) samples.push_back(make_sample(config, i));
  return samples;
}

}  // namespace masknet
