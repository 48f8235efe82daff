#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "viewseek/errors.hpp"
#include "viewseek/perception.hpp"

using namespace viewseek;

namespace {

SceneSpec scene_of(std::vector<ObjectInstance> objects) {
  SceneSpec s;
  s.objects = std::move(objects);
  return s;
}

}  // namespace

TEST_CASE("scale and distance") {
  CHECK(distance_from_scale(1.0) == doctest::Approx(0.4));
  CHECK(distance_from_scale(0.5) == doctest::Approx(0.8));
  CHECK(std::abs(distance_from_scale(scale_from_distance(0.65)) - 0.65) < 1e-12);
  CHECK_THROWS_AS(scale_from_distance(0.0), Error);
  CHECK_THROWS_AS(distance_from_scale(-1.0), Error);
}

TEST_CASE("noise config validation") {
  NoiseConfig n;
  n.validate();
  n.true_positive_rate = 1.2;
  CHECK_THROWS_AS(n.validate(), Error);
  n = NoiseConfig{};
  n.pixel_noise_std = -1.0;
  CHECK_THROWS_AS(n.validate(), Error);
}

TEST_CASE("visibility examples") {
  const Catalog cat = default_catalog();
  const CameraModel m;
  const Vec3 obj(0.1, 0.0, 0.08);
  const CameraPose cam = viewpoint_to_camera_pose(Viewpoint(obj, 0.5, 0.6, 0.4));
  const SceneSpec alone = scene_of({{4, obj, 0.0}});
  const Visibility v = visibility(alone, cat, cam, m, 4);
  CHECK(v.visible);
  CHECK(v.occlusion_fraction == 0.0);

  const CameraPose away = look_at(cam.position, cam.position + (cam.position - obj));
  const Visibility b = visibility(alone, cat, away, m, 4);
  CHECK_FALSE(b.visible);
  CHECK(b.occlusion_fraction == 0.0);

  // Equal proxy radius, same ray, nearer: fully hidden.
  const Vec3 front = cam.position + 0.5 * (obj - cam.position);
  const SceneSpec hidden = scene_of({{4, obj, 0.0}, {2, front, 0.0}});
  const Visibility h = visibility(hidden, cat, cam, m, 4);
  CHECK(h.occlusion_fraction == doctest::Approx(1.0));
  CHECK(oracle::sampled_occlusion(cam.position, obj, 0.08, front, 0.08, 20000, 1) == doctest::Approx(1.0));
  CHECK(visibility(hidden, cat, cam, m, 4, false).occlusion_fraction == 0.0);
}

TEST_CASE("partial occlusion agrees with ray sampling") {
  const Catalog cat = default_catalog();
  const CameraModel m;
  const Vec3 obj(0.0, 0.0, 0.08);
  const CameraPose cam = viewpoint_to_camera_pose(Viewpoint(obj, 0.6, 0.5, 0.0));
  const Vec3 dir = (obj - cam.position).normalized();
  const Vec3 side = dir.cross(Vec3::UnitZ()).normalized();
  for (double shift : {0.0, 0.02, 0.05, 0.08, 0.12, 0.2}) {
    const Vec3 occ = cam.position + 0.3 * dir + shift * side;
    const SceneSpec s = scene_of({{4, obj, 0.0}, {3, occ, 0.0}});
    const double lib = visibility(s, cat, cam, m, 4).occlusion_fraction;
    const double ref = oracle::sampled_occlusion(cam.position, obj, 0.08, occ, 0.05, 40000, 7);
    CHECK(std::abs(lib - ref) < 0.03);
  }
}

TEST_CASE("noiseless centered detection") {
  const Catalog cat = default_catalog();
  const CameraModel m;
  const ObjectInstance obj{4, Vec3(0.1, -0.1, 0.08), 0.3};
  const CameraPose cam = viewpoint_to_camera_pose(Viewpoint(obj.position, 0.4, 0.7, 1.1));
  Rng rng(1);
  const ObservationBundle b = observe(scene_of({obj}), cat, cam, m, NoiseConfig::noiseless(), rng);
  const Detection* d = b.get(4);
  REQUIRE(d != nullptr);
  CHECK(d->presence_prob == 1.0);
  CHECK((d->pixel_center - Vec2(240, 240)).norm() < 1e-9);
  CHECK(d->scale == doctest::Approx(1.0));
  const PoseEstimate truth = true_view_angles(cam.position, obj);
  CHECK(d->pose.azimuth == doctest::Approx(truth.azimuth));
  CHECK(d->pose.elevation == doctest::Approx(truth.elevation));
  CHECK(truth.elevation == doctest::Approx(0.7));
  CHECK(wrap_angle(truth.azimuth - (1.1 - 0.3)) == doctest::Approx(0.0));
  for (int c = 0; c < 4; ++c) CHECK(b.get(c) == nullptr);
}

TEST_CASE("out-of-frustum objects are not detected without false positives") {
  const Catalog cat = default_catalog();
  const CameraModel m;
  const ObjectInstance obj{1, Vec3(0.3, 0.3, 0.1), 0.0};
  const CameraPose cam = look_at(Vec3(0.0, 0.0, 0.5), Vec3(-0.4, -0.4, 0.0));
  REQUIRE_FALSE(in_frustum(cam, m, obj.position));
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    CHECK(observe(scene_of({obj}), cat, cam, m, NoiseConfig{}, rng).get(1) == nullptr);
  }
}

TEST_CASE("noiseless observation is invertible") {
  const Catalog cat = default_catalog();
  const CameraModel m;
  Rng rng(3);
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    const ObjectInstance obj{i % 5, Vec3(uniform(rng, -0.4, 0.4), uniform(rng, -0.4, 0.4), 0.08),
                             uniform(rng, -kPi, kPi)};
    const Viewpoint v(obj.position + Vec3(uniform(rng, -0.05, 0.05), uniform(rng, -0.05, 0.05), 0.0),
                      uniform(rng, 0.25, 0.65), uniform(rng, 0.1, 1.4), uniform(rng, -kPi, kPi));
    const CameraPose cam = viewpoint_to_camera_pose(v);
    const ObservationBundle b = observe(scene_of({obj}), cat, cam, m, NoiseConfig::noiseless(), rng);
    const Detection* d = b.get(obj.category);
    REQUIRE(d != nullptr);
    const double dist = (obj.position - cam.position).norm();
    CHECK(std::abs(distance_from_scale(d->scale) - dist) < 1e-12);
    const Ray r = backproject(cam, m, d->pixel_center);
    const Vec3 off = obj.position - r.origin;
    CHECK((off - off.dot(r.direction) * r.direction).norm() < 1e-6);
    ++checked;
  }
  CHECK(checked == 500);
}

TEST_CASE("continuous-symmetry azimuth is uniform") {
  const Catalog cat = default_catalog();
  const CameraModel m;
  const ObjectInstance can{3, Vec3(0.0, 0.1, 0.05), 0.0};
  const CameraPose cam = viewpoint_to_camera_pose(Viewpoint(can.position, 0.4, 0.6, 0.2));
  Rng rng(4);
  std::vector<double> az;
  while (az.size() < 2000) {
    const auto b = observe(scene_of({can}), cat, cam, m, NoiseConfig{}, rng);
    if (const Detection* d = b.get(3)) az.push_back(d->pose.azimuth);
  }
  CHECK(oracle::ks_uniform_pvalue(az, -kPi, kPi) > 0.01);
}

TEST_CASE("detection rate and pose statistics") {
  const Catalog cat = default_catalog();
  const CameraModel m;
  const NoiseConfig noise;
  const ObjectInstance obj{4, Vec3(0.1, 0.0, 0.08), 0.9};
  const CameraPose cam = viewpoint_to_camera_pose(Viewpoint(obj.position, 0.45, 0.5, -0.7));
  const PoseEstimate truth = true_view_angles(cam.position, obj);
  Rng rng(5);
  const int trials = 10000;
  int hits = 0;
  double sc = 0.0, ss = 0.0, el = 0.0;
  for (int i = 0; i < trials; ++i) {
    const auto b = observe(scene_of({obj}), cat, cam, m, noise, rng);
    if (const Detection* d = b.get(4)) {
      ++hits;
      const double e = wrap_angle(d->pose.azimuth - truth.azimuth);
      sc += std::cos(e);
      ss += std::sin(e);
      el += d->pose.elevation - truth.elevation;
    }
  }
  const double p = noise.true_positive_rate;
  CHECK(std::abs(static_cast<double>(hits) / trials - p) < 3.0 * std::sqrt(p * (1 - p) / trials));
  const double se = noise.pose_noise_std / std::sqrt(static_cast<double>(hits));
  CHECK(std::abs(std::atan2(ss, sc)) < 3.0 * se);
  CHECK(std::abs(el / hits) < 3.0 * se);
}
