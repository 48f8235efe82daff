#include "oracles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "viewseek/perception.hpp"

namespace oracle {

namespace {

struct Quat {
  double w, x, y, z;
};

// Shepperd's method: pick the largest diagonal combination for stability.
Quat to_quat(const Mat3& r) {
  const double t = r.trace();
  Quat q{};
  if (t > r(0, 0) && t > r(1, 1) && t > r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + t);
    q = {0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s, (r(1, 0) - r(0, 1)) / s};
  } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
    q = {(r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s, (r(0, 2) + r(2, 0)) / s};
  } else if (r(1, 1) > r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
    q = {(r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s, (r(1, 2) + r(2, 1)) / s};
  } else {
    const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
    q = {(r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s, 0.25 * s};
  }
  const double n = std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

Quat multiply(const Quat& a, const Quat& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Eigen::Matrix<double, 3, 4> projection_matrix(const CameraPose& c, const CameraModel& m) {
  Eigen::Matrix4d view = Eigen::Matrix4d::Identity();
  view.topLeftCorner<3, 3>() = c.orientation.transpose();
  view.topRightCorner<3, 1>() = -c.orientation.transpose() * c.position;
  const double f = 0.5 * m.height / std::tan(0.5 * m.vertical_fov);
  Eigen::Matrix<double, 3, 4> k = Eigen::Matrix<double, 3, 4>::Zero();
  // Camera looks down -z with y up; pixel rows grow downward.
  k(0, 0) = f;
  k(0, 2) = -0.5 * m.width;
  k(1, 1) = -f;
  k(1, 2) = -0.5 * m.height;
  k(2, 2) = -1.0;
  return k * view;
}

int axis_bin(double v, double lo, double hi, int n) {
  if (!(hi > lo)) return 0;
  const int i = static_cast<int>(std::floor((v - lo) / (hi - lo) * n));
  return std::clamp(i, 0, n - 1);
}

}  // namespace

double quaternion_rotation_error(const Mat3& a, const Mat3& b) {
  Quat qa = to_quat(a);
  const Quat qb = to_quat(b);
  qa.x = -qa.x;
  qa.y = -qa.y;
  qa.z = -qa.z;
  const Quat d = multiply(qa, qb);
  const double v = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
  return 2.0 * std::atan2(v, std::abs(d.w));
}

bool matrix_project(const CameraPose& c, const CameraModel& m, const Vec3& p, Vec2& pixel,
                    double& depth) {
  const Eigen::Vector3d h = projection_matrix(c, m) * p.homogeneous();
  depth = h.z();
  if (!(depth > 1e-6)) return false;
  pixel = h.head<2>() / h.z();
  return true;
}

bool matrix_in_frustum(const CameraPose& c, const CameraModel& m, const Vec3& p) {
  Vec2 px;
  double depth = 0.0;
  if (!matrix_project(c, m, p, px, depth)) return false;
  return px.x() >= 0.0 && px.x() < m.width && px.y() >= 0.0 && px.y() < m.height;
}

Vec3 matrix_ray_direction(const CameraPose& c, const CameraModel& m, const Vec2& pixel) {
  const Eigen::Matrix3d k = projection_matrix(CameraPose{}, m).leftCols<3>();
  const Vec3 cam = k.inverse() * Vec3(pixel.x(), pixel.y(), 1.0);
  return (c.orientation * cam).normalized();
}

double brute_force_mi(const viewseek::ParticleBelief& b, const CameraPose& camera,
                      const CameraModel& m, double tpr, double fpr) {
  const auto& lo = b.bounds().lo;
  const auto& hi = b.bounds().hi;
  std::map<int, std::pair<double, double>> joint;  // bin -> (P(bin, det), P(bin, miss))
  for (std::size_t i = 0; i < b.size(); ++i) {
    const Vec3& p = b.particles()[i];
    const int bin = (axis_bin(p.z(), lo.z(), hi.z(), 10) * 20 + axis_bin(p.y(), lo.y(), hi.y(), 20)) * 20 +
                    axis_bin(p.x(), lo.x(), hi.x(), 20);
    const double l = matrix_in_frustum(camera, m, p) ? tpr : fpr;
    auto& cell = joint[bin];
    cell.first += b.weights()[i] * l;
    cell.second += b.weights()[i] * (1.0 - l);
  }
  double p_det = 0.0, p_miss = 0.0;
  for (const auto& [bin, c] : joint) {
    p_det += c.first;
    p_miss += c.second;
  }
  double mi = 0.0;
  for (const auto& [bin, c] : joint) {
    const double pb = c.first + c.second;
    if (c.first > 0.0) mi += c.first * std::log(c.first / (pb * p_det));
    if (c.second > 0.0) mi += c.second * std::log(c.second / (pb * p_miss));
  }
  return mi;
}

double ray_gaussian_density(const Vec3& mean, const Vec3& axis, double var_depth,
                            double var_lateral, const Vec3& p) {
  const Vec3 a = axis.normalized();
  const Mat3 cov = var_depth * a * a.transpose() + var_lateral * (Mat3::Identity() - a * a.transpose());
  const Vec3 d = p - mean;
  const double q = d.dot(cov.inverse() * d);
  return std::exp(-0.5 * q) / std::sqrt(std::pow(2.0 * M_PI, 3) * cov.determinant());
}

double sampled_occlusion(const Vec3& eye, const Vec3& target, double target_radius,
                         const Vec3& occluder, double occluder_radius, int rays,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Vec3 axis = (target - eye).normalized();
  const double half_angle = std::asin(std::min(1.0, target_radius / (target - eye).norm()));
  const Vec3 e1 = axis.unitOrthogonal();
  const Vec3 e2 = axis.cross(e1);
  int hidden = 0;
  for (int i = 0; i < rays; ++i) {
    // Uniform over the solid angle of the target's cone.
    const double cos_t = 1.0 - u(rng) * (1.0 - std::cos(half_angle));
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    const double phi = 2.0 * M_PI * u(rng);
    const Vec3 dir = cos_t * axis + sin_t * (std::cos(phi) * e1 + std::sin(phi) * e2);
    const Vec3 oc = occluder - eye;
    const double along = oc.dot(dir);
    const double miss2 = oc.squaredNorm() - along * along;
    if (along > 0.0 && miss2 <= occluder_radius * occluder_radius) ++hidden;
  }
  return static_cast<double>(hidden) / rays;
}

double ks_uniform_pvalue(std::vector<double> samples, double lo, double hi) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = std::clamp((samples[i] - lo) / (hi - lo), 0.0, 1.0);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double sn = std::sqrt(n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    q += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  }
  return std::clamp(q, 0.0, 1.0);
}

FilterScript default_filter_script() {
  using viewseek::look_at;
  using viewseek::from_spherical;
  FilterScript s;
  for (double az : {0.3, 2.3, -2.0}) {
    s.detect_views.push_back(look_at(from_spherical(s.object, 0.6, 0.6, az), s.object));
  }
  const Vec3 empty_a(-0.3, 0.3, s.slice_z);
  const Vec3 empty_b(-0.3, -0.35, s.slice_z);
  s.empty_views.push_back(look_at(from_spherical(empty_a, 0.35, 1.0, 2.0), empty_a));
  s.empty_views.push_back(look_at(from_spherical(empty_b, 0.35, 1.0, -2.5), empty_b));
  return s;
}

double particle_vs_grid_tv(const FilterScript& script, int num_particles, std::uint64_t seed) {
  namespace vs = viewseek;
  const CameraModel model;
  vs::Bounds bounds;
  bounds.lo = Vec3(-0.5, -0.5, script.slice_z);
  bounds.hi = Vec3(0.5, 0.5, script.slice_z);
  vs::BeliefConfig cfg;
  cfg.bounds = bounds;

  vs::Rng rng(seed);
  vs::ParticleBelief particles = vs::ParticleBelief::init_uniform(bounds, num_particles, rng);

  constexpr int kGrid = 200;
  const double cell = 1.0 / kGrid;
  std::vector<double> grid(kGrid * kGrid, 1.0 / (kGrid * kGrid));
  auto center = [&](int i, int j) {
    return Vec3(-0.5 + (i + 0.5) * cell, -0.5 + (j + 0.5) * cell, script.slice_z);
  };
  auto normalize = [&] {
    double s = 0.0;
    for (double g : grid) s += g;
    for (double& g : grid) g /= s;
  };

  for (const CameraPose& cam : script.detect_views) {
    vs::Detection d;
    d.presence_prob = 1.0;
    d.pixel_center = vs::project(cam, model, script.object).pixel;
    d.scale = vs::scale_from_distance((script.object - cam.position).norm());
    particles.update_detection(vs::ray_likelihood(d, cam, model, cfg));

    const Vec3 dir = matrix_ray_direction(cam, model, d.pixel_center);
    const Vec3 mean = cam.position + vs::distance_from_scale(d.scale) * dir;
    for (int i = 0; i < kGrid; ++i) {
      for (int j = 0; j < kGrid; ++j) {
        grid[j * kGrid + i] *=
            ray_gaussian_density(mean, dir, cfg.depth_variance(), cfg.lateral_variance(), center(i, j));
      }
    }
    normalize();
  }

  // A particle weight is about cell mass * (cells / particles) under a uniform
  // proposal, so the absolute floor on weights maps to a scaled floor on cells.
  const double floor = cfg.negative_evidence_weight * num_particles / (kGrid * kGrid);
  for (const CameraPose& cam : script.empty_views) {
    particles.update_no_detection(cam, model, std::numeric_limits<double>::infinity(),
                                  cfg.negative_evidence_weight);
    for (int i = 0; i < kGrid; ++i) {
      for (int j = 0; j < kGrid; ++j) {
        if (matrix_in_frustum(cam, model, center(i, j))) {
          grid[j * kGrid + i] = std::min(grid[j * kGrid + i], floor);
        }
      }
    }
    normalize();
  }

  constexpr int kCoarse = 20;
  std::vector<double> p(kCoarse * kCoarse, 0.0), q(kCoarse * kCoarse, 0.0);
  for (std::size_t k = 0; k < particles.size(); ++k) {
    const Vec3& x = particles.particles()[k];
    const int i = axis_bin(x.x(), -0.5, 0.5, kCoarse), j = axis_bin(x.y(), -0.5, 0.5, kCoarse);
    p[j * kCoarse + i] += particles.weights()[k];
  }
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      q[(j * kCoarse / kGrid) * kCoarse + i * kCoarse / kGrid] += grid[j * kGrid + i];
    }
  }
  double tv = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) tv += std::abs(p[k] - q[k]);
  return 0.5 * tv;
}

}  // namespace oracle
