#pragma once

// Independent reference implementations used to check the library.

#include <cstdint>
#include <vector>

#include "viewseek/belief.hpp"
#include "viewseek/geometry.hpp"

namespace oracle {

using viewseek::CameraModel;
using viewseek::CameraPose;
using viewseek::Mat3;
using viewseek::Vec2;
using viewseek::Vec3;

/// Geodesic angle between two rotations through unit quaternions.
double quaternion_rotation_error(const Mat3& a, const Mat3& b);

/// Pinhole projection through a 3x4 homogeneous matrix; returns false behind the camera.
bool matrix_project(const CameraPose& c, const CameraModel& m, const Vec3& p, Vec2& pixel,
                    double& depth);
bool matrix_in_frustum(const CameraPose& c, const CameraModel& m, const Vec3& p);
/// World direction through the given pixel, from the inverted intrinsic matrix.
Vec3 matrix_ray_direction(const CameraPose& c, const CameraModel& m, const Vec2& pixel);

/// Mutual information between the detection outcome and the 20x20x10 position bin,
/// by enumerating the joint distribution over (bin, outcome).
double brute_force_mi(const viewseek::ParticleBelief& b, const CameraPose& camera,
                      const CameraModel& m, double tpr, double fpr);

/// Multivariate normal density with covariance var_depth along `axis` and var_lateral across.
double ray_gaussian_density(const Vec3& mean, const Vec3& axis, double var_depth,
                            double var_lateral, const Vec3& p);

/// Fraction of the target's angular disk hidden by a nearer sphere, by ray sampling.
double sampled_occlusion(const Vec3& eye, const Vec3& target, double target_radius,
                         const Vec3& occluder, double occluder_radius, int rays,
                         std::uint64_t seed);

/// Asymptotic Kolmogorov-Smirnov p-value for a one-sample test against U(lo, hi).
double ks_uniform_pvalue(std::vector<double> samples, double lo, double hi);

/// Scripted tabletop sequence shared by the grid-filter checks: three detections
/// of an object followed by two empty views, on a horizontal slice.
struct FilterScript {
  double slice_z = 0.05;
  Vec3 object{0.1, -0.05, 0.05};
  std::vector<CameraPose> detect_views;
  std::vector<CameraPose> empty_views;
};
FilterScript default_filter_script();

/// Total-variation distance between a particle posterior and an exact 200x200
/// grid Bayes filter after the script, both binned on the 20x20 belief grid.
double particle_vs_grid_tv(const FilterScript& script, int num_particles, std::uint64_t seed);

}  // namespace oracle
