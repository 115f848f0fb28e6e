#include "masknet/geom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace masknet {

bool is_valid_rotation(const Mat3& r, double tol) {
  const double ortho = (r.transpose() * r - Mat3::Identity()).norm();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

PointCloud apply_transform(const RigidTransform& t, const PointCloud& p) {
  PointCloud out;
  out.pts.resize(p.size(), 3);
  out.pts.noalias() = p.pts * t.rotation.transpose();
  out.pts.rowwise() += t.translation.transpose();
  return out;
}

Mat3 skew(const Vec3& w) {
  Mat3 s;
  s << 0, -w.z(), w.y(),
       w.z(), 0, -w.x(),
       -w.y(), w.x(), 0;
  return s;
}

RigidTransform se3_exp(const Twist& xi) {
  const Vec3 w = xi.head<3>();
  const Vec3 v = xi.tail<3>();
  const double theta = w.norm();
  const double theta2 = theta * theta;

  // A = sin(t)/t, B = (1-cos(t))/t^2, C = (t-sin(t))/t^3
  double a, b, c;
  if (theta < 1e-6) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
    c = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
    c = (theta - std::sin(theta)) / (theta2 * theta);
  }

  const Mat3 wx = skew(w);
  const Mat3 wx2 = wx * wx;
  RigidTransform t;
  t.rotation = Mat3::Identity() + a * wx + b * wx2;
  const Mat3 vmat = Mat3::Identity() + b * wx + c * wx2;
  t.translation = vmat * v;
  return t;
}

double rotation_angle(const Mat3& r) {
  const double arg = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
  return std::acos(arg);
}

Twist se3_log(const RigidTransform& t) {
  const double theta = rotation_angle(t.rotation);
  if (theta >= std::numbers::pi - 1e-6)
    throw AngleNearPi("se3_log: rotation angle too close to pi");

  const Mat3 diff = t.rotation - t.rotation.transpose();
  const Vec3 axis_raw(diff(2, 1), diff(0, 2), diff(1, 0));

  // w = theta/(2 sin theta) * vee(R - R^T)
  const double theta2 = theta * theta;
  double half_ratio;  // theta / (2 sin theta)
  if (theta < 1e-6) {
    half_ratio = 0.5 * (1.0 + theta2 / 6.0);
  } else {
    half_ratio = theta / (2.0 * std::sin(theta));
  }
  const Vec3 w = half_ratio * axis_raw;

  // V^-1 = I - wx/2 + k * wx^2, k = (1 - theta*sin/(2(1-cos))) / theta^2
  double k;
  if (theta < 1e-6) {
    k = 1.0 / 12.0 + theta2 / 720.0;
  } else {
    k = (1.0 - theta * std::sin(theta) / (2.0 * (1.0 - std::cos(theta)))) / theta2;
  }
  const Mat3 wx = skew(w);
  const Mat3 vinv = Mat3::Identity() - 0.5 * wx + k * (wx * wx);

  Twist xi;
  xi.head<3>() = w;
  xi.tail<3>() = vinv * t.translation;
  return xi;
}

std::vector<std::vector<int>> nearest_neighbors(const PointCloud& query,
                                                const PointCloud& target,
                                                int k) {
  if (k <= 0 || k > target.size())
    throw KTooLarge("nearest_neighbors: k out of range (k=" + std::to_string(k) +
                    ", target=" + std::to_string(target.size()) + ")");

  const Eigen::Index nq = query.size();
  const Eigen::Index nt = target.size();
  std::vector<std::vector<int>> result(static_cast<std::size_t>(nq));

  std::vector<double> d2(static_cast<std::size_t>(nt));
  std::vector<int> order(static_cast<std::size_t>(nt));
  for (Eigen::Index qi = 0; qi < nq; ++qi) {
    const Vec3 q = query.point(qi);
    for (Eigen::Index ti = 0; ti < nt; ++ti)
      d2[static_cast<std::size_t>(ti)] = (target.point(ti) - q).squaredNorm();

    auto cmp = [&](int a, int b) {
      return d2[static_cast<std::size_t>(a)] < d2[static_cast<std::size_t>(b)] ||
             (d2[static_cast<std::size_t>(a)] == d2[static_cast<std::size_t>(b)] && a < b);
    };
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + k, order.end(), cmp);
    result[static_cast<std::size_t>(qi)].assign(order.begin(), order.begin() + k);
  }
  return result;
}

double rotation_error_deg(const RigidTransform& est, const RigidTransform& gt) {
  const Mat3 rel = gt.rotation.transpose() * est.rotation;
  return rotation_angle(rel) * 180.0 / std::numbers::pi;
}

double translation_error(const RigidTransform& est, const RigidTransform& gt) {
  return (est.translation - gt.translation).norm();
}

}  // namespace masknet
