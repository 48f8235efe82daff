#include "viewseek/perception.hpp"

#include <algorithm>
#include <cmath>

#include "viewseek/errors.hpp"

namespace viewseek {

namespace {

constexpr double kReferenceDistance = 0.4;
constexpr double kMinScale = 1e-3;
const double kUniformCircleStd = kPi / std::sqrt(3.0);

// Fraction of a disk of radius a covered by a disk of radius b at center distance g.
double disk_overlap_fraction(double a, double b, double g) {
  if (a <= 0.0) return 0.0;
  if (g >= a + b) return 0.0;
  if (g <= std::abs(b - a)) return b >= a ? 1.0 : (b * b) / (a * a);
  const double c1 = std::clamp((g * g + a * a - b * b) / (2.0 * g * a), -1.0, 1.0);
  const double c2 = std::clamp((g * g + b * b - a * a) / (2.0 * g * b), -1.0, 1.0);
  const double k = std::max(0.0, (-g + a + b) * (g + a - b) * (g - a + b) * (g + a + b));
  const double lens = a * a * std::acos(c1) + b * b * std::acos(c2) - 0.5 * std::sqrt(k);
  return std::clamp(lens / (kPi * a * a), 0.0, 1.0);
}

double angular_radius(double radius, double distance) {
  return distance <= radius ? 0.5 * kPi : std::asin(radius / distance);
}

}  // namespace

double scale_from_distance(double d) {
  if (!(d > 0.0)) throw Error(ErrorCode::NonPositive, "distance must be positive");
  return kReferenceDistance / d;
}

double distance_from_scale(double scale) {
  if (!(scale > 0.0)) throw Error(ErrorCode::NonPositive, "scale must be positive");
  return kReferenceDistance / scale;
}

const Detection* ObservationBundle::get(int category) const {
  if (category < 0 || category >= static_cast<int>(detections.size())) return nullptr;
  const auto& d = detections[category];
  return d ? &*d : nullptr;
}

NoiseConfig NoiseConfig::noiseless() {
  NoiseConfig n;
  n.pixel_noise_std = 0.0;
  n.scale_noise_rel_std = 0.0;
  n.pose_noise_std = 0.0;
  n.true_positive_rate = 1.0;
  n.false_positive_rate = 0.0;
  n.occlusion_enabled = false;
  return n;
}

void NoiseConfig::validate() const {
  if (pixel_noise_std < 0.0 || scale_noise_rel_std < 0.0 || pose_noise_std < 0.0) {
    throw Error(ErrorCode::Config, "noise standard deviations must be non-negative");
  }
  if (true_positive_rate < 0.0 || true_positive_rate > 1.0 || false_positive_rate < 0.0 ||
      false_positive_rate > 1.0) {
    throw Error(ErrorCode::Config, "detection rates must lie in [0, 1]");
  }
}

Visibility visibility(const SceneSpec& scene, const Catalog& catalog, const CameraPose& camera,
                      const CameraModel& model, int category, bool occlusion_enabled) {
  const ObjectInstance* target = scene.find(category);
  if (target == nullptr) {
    throw Error(ErrorCode::UnknownCategory, "category " + std::to_string(category) + " not in scene");
  }
  Visibility vis;
  vis.visible = in_frustum(camera, model, target->position);
  if (!vis.visible || !occlusion_enabled) return vis;

  const Vec3 to_target = target->position - camera.position;
  const double dt = to_target.norm();
  const double at = angular_radius(category_of(catalog, category).proxy_radius, dt);
  double uncovered = 1.0;
  for (const auto& o : scene.objects) {
    if (o.category == category) continue;
    const Vec3 to_other = o.position - camera.position;
    const double d = to_other.norm();
    if (d >= dt) continue;
    const double ao = angular_radius(catalog[o.category].proxy_radius, d);
    const double cosg = std::clamp(to_target.dot(to_other) / (dt * d), -1.0, 1.0);
    uncovered *= 1.0 - disk_overlap_fraction(at, ao, std::acos(cosg));
  }
  vis.occlusion_fraction = 1.0 - uncovered;
  return vis;
}

PoseEstimate true_view_angles(const Vec3& camera_position, const ObjectInstance& object) {
  const Spherical s = spherical_about(camera_position, object.position);
  PoseEstimate p;
  p.azimuth = wrap_angle(s.azimuth - object.yaw);
  p.elevation = s.elevation;
  return p;
}

ObservationBundle observe(const SceneSpec& scene, const Catalog& catalog, const CameraPose& camera,
                          const CameraModel& model, const NoiseConfig& noise, Rng& rng) {
  ObservationBundle bundle;
  bundle.camera = camera;
  bundle.detections.resize(catalog.size());
  const double max_u = std::nextafter(static_cast<double>(model.width), 0.0);
  const double max_v = std::nextafter(static_cast<double>(model.height), 0.0);

  for (const auto& cat : catalog) {
    const ObjectInstance* obj = scene.find(cat.id);
    const double u = uniform(rng, 0.0, 1.0);
    if (obj != nullptr) {
      const Visibility vis = visibility(scene, catalog, camera, model, cat.id, noise.occlusion_enabled);
      if (!vis.visible || u >= noise.true_positive_rate * (1.0 - vis.occlusion_fraction)) continue;

      Detection det;
      det.category = cat.id;
      det.presence_prob = noise.true_positive_rate;
      const Projection proj = project(camera, model, obj->position);
      det.pixel_center = Vec2(std::clamp(proj.pixel.x() + gaussian(rng, noise.pixel_noise_std), 0.0, max_u),
                              std::clamp(proj.pixel.y() + gaussian(rng, noise.pixel_noise_std), 0.0, max_v));
      const double dist = (obj->position - camera.position).norm();
      det.scale = std::max(kMinScale, scale_from_distance(dist) *
                                          (1.0 + gaussian(rng, noise.scale_noise_rel_std)));
      const PoseEstimate truth = true_view_angles(camera.position, *obj);
      det.pose.elevation = truth.elevation + gaussian(rng, noise.pose_noise_std);
      det.pose.elevation_std = noise.pose_noise_std;
      if (cat.symmetry.is_continuous()) {
        det.pose.azimuth = uniform(rng, -kPi, kPi);
        det.pose.azimuth_std = kUniformCircleStd;
      } else {
        det.pose.azimuth = wrap_angle(truth.azimuth + gaussian(rng, noise.pose_noise_std));
        det.pose.azimuth_std = noise.pose_noise_std;
      }
      bundle.detections[cat.id] = det;
    } else if (u < noise.false_positive_rate) {
      Detection det;
      det.category = cat.id;
      det.presence_prob = noise.false_positive_rate;
      det.pixel_center = Vec2(uniform(rng, 0.0, model.width), uniform(rng, 0.0, model.height));
      det.scale = uniform(rng, 0.5, 2.0);
      det.pose.azimuth = uniform(rng, -kPi, kPi);
      det.pose.elevation = uniform(rng, 0.0, 0.5 * kPi);
      det.pose.azimuth_std = kUniformCircleStd;
      det.pose.elevation_std = kUniformCircleStd;
      bundle.detections[cat.id] = det;
    }
  }
  return bundle;
}

}  // namespace viewseek
