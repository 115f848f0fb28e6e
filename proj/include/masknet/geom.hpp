#pragma once

#include <Eigen/Core>
#include <vector>

#include "masknet/errors.hpp"

namespace masknet {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Twist coordinates of SE(3): (wx, wy, wz, vx, vy, vz). Rotation part in
// radians, translation part in model units.
using Twist = Eigen::Matrix<double, 6, 1>;

// Ordered list of 3D points, one row per point. Order only carries mask
// index alignment; all encoders downstream are permutation-consistent.
struct PointCloud {
  Eigen::Matrix<double, Eigen::Dynamic, 3> pts;

  PointCloud() = default;
  explicit PointCloud(Eigen::Matrix<double, Eigen::Dynamic, 3> p) : pts(std::move(p)) {}

  Eigen::Index size() const { return pts.rows(); }
  bool empty() const { return pts.rows() == 0; }
  Vec3 point(Eigen::Index i) const { return pts.row(i).transpose(); }
  bool all_finite() const { return pts.allFinite(); }
};

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  Vec3 operator()(const Vec3& p) const { return rotation * p + translation; }

  RigidTransform inverse() const {
    RigidTransform inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
  }
};

// a after b: compose(a, b)(p) == a(b(p)).
inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform c;
  c.rotation = a.rotation * b.rotation;
  c.translation = a.rotation * b.translation + a.translation;
  return c;
}

// Checks orthogonality and det = +1 within tol (Frobenius).
bool is_valid_rotation(const Mat3& r, double tol = 1e-9);

PointCloud apply_transform(const RigidTransform& t, const PointCloud& p);

Mat3 skew(const Vec3& w);

// Exponential map. Rodrigues for the rotation, closed-form V matrix for the
// translation; second-order Taylor coefficients below |w| = 1e-6.
RigidTransform se3_exp(const Twist& xi);

// Logarithm map. Throws AngleNearPi for rotation angles >= pi - 1e-6 so the
// caller can re-seed rather than work with an ill-conditioned axis.
Twist se3_log(const RigidTransform& t);

double rotation_angle(const Mat3& r);

// For each query point: indices of its k nearest target points, ascending by
// distance, ties broken by lower index. Exhaustive scan; output is defined to
// agree exactly with a full-sort oracle. Throws KTooLarge if k > target size.
std::vector<std::vector<int>> nearest_neighbors(const PointCloud& query,
                                                const PointCloud& target,
                                                int k);

// Geodesic angle of gt^T * est in degrees, in [0, 180].
double rotation_error_deg(const RigidTransform& est, const RigidTransform& gt);

// Euclidean norm of the translation difference.
double translation_error(const RigidTransform& est, const RigidTransform& gt);

}  // namespace masknet
