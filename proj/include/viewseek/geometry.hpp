#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstddef>
#include <numbers>

namespace viewseek {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle to [-pi, pi).
double wrap_angle(double a);

/// Spherical coordinates of a point about a center, elevation measured from the
/// horizontal plane (z up) and azimuth from +x toward +y. No range checks.
struct Spherical {
  double range = 0.0;
  double elevation = 0.0;
  double azimuth = 0.0;
};

Spherical spherical_about(const Vec3& point, const Vec3& center);
Vec3 from_spherical(const Vec3& center, double range, double elevation, double azimuth);

/// Camera control coordinate: gaze point plus spherical offset of the camera
/// about it. Construction validates and wraps the azimuth.
class Viewpoint {
 public:
  Viewpoint() = default;
  Viewpoint(const Vec3& lookat, double range, double elevation, double azimuth);

  const Vec3& lookat() const { return lookat_; }
  double range() const { return range_; }
  double elevation() const { return elevation_; }
  double azimuth() const { return azimuth_; }

  Vec3 camera_position() const;

 private:
  Vec3 lookat_ = Vec3::Zero();
  double range_ = 1.0;
  double elevation_ = 0.0;
  double azimuth_ = 0.0;
};

/// Rigid camera pose. Orientation columns are the camera x (right), y (up) and
/// z (backward) axes in world coordinates; the optical axis is -z.
struct CameraPose {
  Vec3 position = Vec3::Zero();
  Mat3 orientation = Mat3::Identity();

  Vec3 optical_axis() const { return -orientation.col(2); }
  Vec3 to_camera(const Vec3& world) const { return orientation.transpose() * (world - position); }
};

/// Pose at `eye` looking toward `target` with image up as close to +z as possible.
/// Looking straight down resolves image up to world +x.
CameraPose look_at(const Vec3& eye, const Vec3& target);

struct CameraModel {
  int width = 480;
  int height = 480;
  double vertical_fov = kPi / 3.0;

  double focal() const;
  double cx() const { return 0.5 * width; }
  double cy() const { return 0.5 * height; }
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();

  Vec3 at(double t) const { return origin + t * direction; }
};

struct Projection {
  Vec2 pixel;
  double depth = 0.0;
};

inline constexpr double kMinFrustumDepth = 1e-6;

CameraPose viewpoint_to_camera_pose(const Viewpoint& v);

/// Throws ZeroRange when the camera sits on the look-at point.
Viewpoint camera_pose_to_viewpoint(const CameraPose& c, const Vec3& lookat);

/// Throws NotInFront when the point is not ahead of the camera.
Projection project(const CameraPose& c, const CameraModel& m, const Vec3& p);

/// Throws OutOfImage when the pixel lies outside [0,W) x [0,H).
Ray backproject(const CameraPose& c, const CameraModel& m, const Vec2& pixel);

bool in_frustum(const CameraPose& c, const CameraModel& m, const Vec3& p);

/// Geodesic angle between two orientations, in [0, pi].
double rotation_error(const CameraPose& a, const CameraPose& b);
double rotation_angle(const Mat3& r);

// Precomputed frustum test for evaluating many points against one pose.
class FrustumTest {
 public:
  FrustumTest(const CameraPose& c, const CameraModel& m);

  bool contains(double x, double y, double z) const {
    const double dx = x - px_, dy = y - py_, dz = z - pz_;
    const double depth = -(r_[6] * dx + r_[7] * dy + r_[8] * dz);
    // Pixel bounds multiplied through by the (positive) depth.
    const double us = cx_ * depth + f_ * (r_[0] * dx + r_[1] * dy + r_[2] * dz);
    const double vs = cy_ * depth - f_ * (r_[3] * dx + r_[4] * dy + r_[5] * dz);
    return depth > kMinFrustumDepth && us >= 0.0 && us < w_ * depth && vs >= 0.0 && vs < h_ * depth;
  }
  bool contains(const Vec3& p) const { return contains(p.x(), p.y(), p.z()); }
  /// Branch-free batch form over coordinate arrays; out[i] is 1 when inside.
  void mark(const double* __restrict x, const double* __restrict y, const double* __restrict z,
            std::size_t n, unsigned char* __restrict out) const;

 private:
  double r_[9];  // rows of orientation^T
  double px_, py_, pz_;
  double f_, cx_, cy_, w_, h_;
};

/// Rotation Rx(a) * Ry(b) * Rz(c); the convention used for action rotations.
Mat3 euler_xyz_to_matrix(const Vec3& angles);
/// Inverse of euler_xyz_to_matrix with b in [-pi/2, pi/2].
Vec3 matrix_to_euler_xyz(const Mat3& r);

}  // namespace viewseek
