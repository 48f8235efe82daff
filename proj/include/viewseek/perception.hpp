#pragma once

#include <optional>
#include <vector>

#include "viewseek/geometry.hpp"
#include "viewseek/random.hpp"
#include "viewseek/scene.hpp"

namespace viewseek {

/// Scale at which an object appears at distance d; unit scale at the 0.4 m
/// reference distance. Throws NonPositive.
double scale_from_distance(double d);
double distance_from_scale(double scale);

/// Object-relative view angles of the camera, with per-angle uncertainty.
struct PoseEstimate {
  double azimuth = 0.0;  // camera azimuth in the object frame (relative to yaw)
  double elevation = 0.0;
  double azimuth_std = 0.0;
  double elevation_std = 0.0;
};

struct Detection {
  int category = 0;
  double presence_prob = 0.0;
  Vec2 pixel_center = Vec2::Zero();
  double scale = 1.0;
  PoseEstimate pose;
};

struct ObservationBundle {
  CameraPose camera;
  std::vector<std::optional<Detection>> detections;  // indexed by category id

  const Detection* get(int category) const;
};

struct NoiseConfig {
  double pixel_noise_std = 4.0;
  double scale_noise_rel_std = 0.05;
  double pose_noise_std = 0.1;
  double true_positive_rate = 0.95;
  double false_positive_rate = 0.0;
  bool occlusion_enabled = true;

  /// No measurement noise, perfect detection rates and no occlusion-induced misses.
  static NoiseConfig noiseless();
  void validate() const;
};

struct Visibility {
  bool visible = false;
  double occlusion_fraction = 0.0;
};

Visibility visibility(const SceneSpec& scene, const Catalog& catalog, const CameraPose& camera,
                      const CameraModel& model, int category, bool occlusion_enabled = true);

/// True object-relative view angles of a camera position (no noise).
PoseEstimate true_view_angles(const Vec3& camera_position, const ObjectInstance& object);

ObservationBundle observe(const SceneSpec& scene, const Catalog& catalog, const CameraPose& camera,
                          const CameraModel& model, const NoiseConfig& noise, Rng& rng);

}  // namespace viewseek
