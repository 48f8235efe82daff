#include "viewseek/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "viewseek/errors.hpp"

namespace viewseek {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroRange: return "ZeroRange";
    case ErrorCode::NotInFront: return "NotInFront";
    case ErrorCode::OutOfImage: return "OutOfImage";
    case ErrorCode::PlacementFailure: return "PlacementFailure";
    case ErrorCode::EpisodeFinished: return "EpisodeFinished";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::NonPositive: return "NonPositive";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

double wrap_angle(double a) {
  double w = a - kTwoPi * std::floor((a + kPi) / kTwoPi);
  // floor() rounding can land exactly on +pi
  if (w >= kPi) w -= kTwoPi;
  if (w < -kPi) w = -kPi;
  return w;
}

Spherical spherical_about(const Vec3& point, const Vec3& center) {
  const Vec3 d = point - center;
  Spherical s;
  s.range = d.norm();
  if (s.range == 0.0) return s;
  const double horizontal = std::hypot(d.x(), d.y());
  s.elevation = std::atan2(d.z(), horizontal);
  s.azimuth = horizontal <= 1e-12 * s.range ? 0.0 : wrap_angle(std::atan2(d.y(), d.x()));
  return s;
}

Vec3 from_spherical(const Vec3& center, double range, double elevation, double azimuth) {
  const double ce = std::cos(elevation);
  return center + range * Vec3(ce * std::cos(azimuth), ce * std::sin(azimuth), std::sin(elevation));
}

Viewpoint::Viewpoint(const Vec3& lookat, double range, double elevation, double azimuth)
    : lookat_(lookat), range_(range), elevation_(elevation), azimuth_(wrap_angle(azimuth)) {
  if (!lookat.allFinite() || !std::isfinite(range) || !std::isfinite(elevation) ||
      !std::isfinite(azimuth)) {
    throw Error(ErrorCode::InvalidArgument, "viewpoint components must be finite");
  }
  if (range <= 0.0) throw Error(ErrorCode::InvalidArgument, "viewpoint range must be positive");
  if (elevation < 0.0 || elevation > 0.5 * kPi) {
    throw Error(ErrorCode::InvalidArgument, "viewpoint elevation outside [0, pi/2]");
  }
}

Vec3 Viewpoint::camera_position() const {
  return from_spherical(lookat_, range_, elevation_, azimuth_);
}

CameraPose look_at(const Vec3& eye, const Vec3& target) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(Vec3::UnitZ());
  Vec3 up;
  if (right.norm() < 1e-9) {
    // Straight down (or up): fix image up to world +x.
    up = Vec3::UnitX();
    right = up.cross(-forward);
  } else {
    right.normalize();
    up = right.cross(forward);
  }
  CameraPose pose;
  pose.position = eye;
  pose.orientation.col(0) = right;
  pose.orientation.col(1) = up;
  pose.orientation.col(2) = -forward;
  return pose;
}

double CameraModel::focal() const { return 0.5 * height / std::tan(0.5 * vertical_fov); }

CameraPose viewpoint_to_camera_pose(const Viewpoint& v) {
  return look_at(v.camera_position(), v.lookat());
}

Viewpoint camera_pose_to_viewpoint(const CameraPose& c, const Vec3& lookat) {
  const Spherical s = spherical_about(c.position, lookat);
  if (s.range == 0.0) throw Error(ErrorCode::ZeroRange, "camera position equals look-at point");
  return Viewpoint(lookat, s.range, s.elevation, s.azimuth);
}

Projection project(const CameraPose& c, const CameraModel& m, const Vec3& p) {
  const Vec3 pc = c.to_camera(p);
  const double depth = -pc.z();
  if (!(depth > 0.0)) throw Error(ErrorCode::NotInFront, "point is not in front of the camera");
  const double f = m.focal();
  return {Vec2(m.cx() + f * pc.x() / depth, m.cy() - f * pc.y() / depth), depth};
}

Ray backproject(const CameraPose& c, const CameraModel& m, const Vec2& pixel) {
  if (!(pixel.x() >= 0.0 && pixel.x() < m.width && pixel.y() >= 0.0 && pixel.y() < m.height)) {
    throw Error(ErrorCode::OutOfImage, "pixel outside the image rectangle");
  }
  const double f = m.focal();
  const Vec3 dir_cam((pixel.x() - m.cx()) / f, -(pixel.y() - m.cy()) / f, -1.0);
  return {c.position, (c.orientation * dir_cam).normalized()};
}

FrustumTest::FrustumTest(const CameraPose& c, const CameraModel& m)
    : px_(c.position.x()), py_(c.position.y()), pz_(c.position.z()),
      f_(m.focal()), cx_(m.cx()), cy_(m.cy()), w_(m.width), h_(m.height) {
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) r_[3 * row + col] = c.orientation(col, row);
  }
}

void FrustumTest::mark(const double* __restrict x, const double* __restrict y,
                       const double* __restrict z, std::size_t n, unsigned char* __restrict out) const {
  const double px = px_, py = py_, pz = pz_, f = f_, cx = cx_, cy = cy_, w = w_, h = h_;
  const double r0 = r_[0], r1 = r_[1], r2 = r_[2], r3 = r_[3], r4 = r_[4], r5 = r_[5];
  const double r6 = r_[6], r7 = r_[7], r8 = r_[8];
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - px, dy = y[i] - py, dz = z[i] - pz;
    const double depth = -(r6 * dx + r7 * dy + r8 * dz);
    const double us = cx * depth + f * (r0 * dx + r1 * dy + r2 * dz);
    const double vs = cy * depth - f * (r3 * dx + r4 * dy + r5 * dz);
    out[i] = static_cast<unsigned char>((depth > kMinFrustumDepth) & (us >= 0.0) & (us < w * depth) &
                                        (vs >= 0.0) & (vs < h * depth));
  }
}

bool in_frustum(const CameraPose& c, const CameraModel& m, const Vec3& p) {
  return FrustumTest(c, m).contains(p);
}

double rotation_angle(const Mat3& r) {
  // atan2 form stays accurate near 0 and pi where acos does not.
  const Vec3 axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  return std::atan2(0.5 * axis.norm(), 0.5 * (r.trace() - 1.0));
}

double rotation_error(const CameraPose& a, const CameraPose& b) {
  return rotation_angle(a.orientation.transpose() * b.orientation);
}

Mat3 euler_xyz_to_matrix(const Vec3& angles) {
  return (Eigen::AngleAxisd(angles.x(), Vec3::UnitX()) *
          Eigen::AngleAxisd(angles.y(), Vec3::UnitY()) *
          Eigen::AngleAxisd(angles.z(), Vec3::UnitZ()))
      .toRotationMatrix();
}

Vec3 matrix_to_euler_xyz(const Mat3& r) {
  const double b = std::asin(std::clamp(r(0, 2), -1.0, 1.0));
  const double a = std::atan2(-r(1, 2), r(2, 2));
  const double c = std::atan2(-r(0, 1), r(0, 0));
  return {a, b, c};
}

}  // namespace viewseek
