#include "viewseek/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "viewseek/errors.hpp"
#include "viewseek/random.hpp"

namespace viewseek {

Symmetry Symmetry::discrete(int order) {
  if (order < 1) throw Error(ErrorCode::InvalidArgument, "symmetry order must be >= 1");
  return Symmetry(order);
}

double Symmetry::reduce(double angle) const {
  if (is_continuous()) return 0.0;
  const double s = sector();
  double a = wrap_angle(angle);
  a -= s * std::round(a / s);
  return std::abs(a);
}

Catalog default_catalog() {
  return {
      {0, "master_chef_can", 0.07, Symmetry::continuous()},
      {1, "cracker_box", 0.10, Symmetry::discrete(2)},
      {2, "sugar_box", 0.08, Symmetry::discrete(2)},
      {3, "tomato_soup_can", 0.05, Symmetry::continuous()},
      {4, "mustard_bottle", 0.08, Symmetry::discrete(1)},
  };
}

void validate_catalog(const Catalog& catalog) {
  if (catalog.empty()) throw Error(ErrorCode::Config, "catalog is empty");
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (catalog[i].id != static_cast<int>(i)) {
      throw Error(ErrorCode::Config, "category ids must be contiguous from 0");
    }
    if (!(catalog[i].proxy_radius > 0.0)) {
      throw Error(ErrorCode::Config, "proxy radius must be positive");
    }
  }
}

const ObjectCategory& category_of(const Catalog& catalog, int id) {
  if (id < 0 || id >= static_cast<int>(catalog.size())) {
    throw Error(ErrorCode::UnknownCategory, "category id " + std::to_string(id));
  }
  return catalog[id];
}

const ObjectInstance* SceneSpec::find(int category) const {
  for (const auto& o : objects) {
    if (o.category == category) return &o;
  }
  return nullptr;
}

const ObjectInstance& SceneSpec::at(int category) const {
  const ObjectInstance* o = find(category);
  if (o == nullptr) {
    throw Error(ErrorCode::UnknownCategory, "category " + std::to_string(category) + " not in scene");
  }
  return *o;
}

bool Workspace::contains(const Vec3& p, double tol) const {
  return std::abs(p.x()) <= half_extent + tol && std::abs(p.y()) <= half_extent + tol &&
         p.z() >= min_z - tol && p.z() <= max_z + tol;
}

Vec3 Workspace::clamp(const Vec3& p) const {
  return {std::clamp(p.x(), -half_extent, half_extent), std::clamp(p.y(), -half_extent, half_extent),
          std::clamp(p.z(), min_z, max_z)};
}

Action::Action(const Vec3& translation, const Vec3& rotation)
    : dpos(translation.cwiseMax(-kLimit).cwiseMin(kLimit)),
      drot(rotation.cwiseMax(-kLimit).cwiseMin(kLimit)) {}

SceneSpec generate_scene(std::uint64_t seed, int num_objects, const Catalog& catalog,
                         std::optional<int> required_category, const SceneConfig& cfg) {
  const int max_objects = std::min<int>(5, static_cast<int>(catalog.size()));
  if (num_objects < 1 || num_objects > max_objects) {
    throw Error(ErrorCode::InvalidArgument,
                "num_objects must be in [1, " + std::to_string(max_objects) + "]");
  }
  Rng rng(seed);
  SceneSpec scene;
  scene.seed = seed;
  for (double& c : scene.table_color) c = uniform(rng, 0.0, 1.0);

  std::vector<int> ids(catalog.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  if (required_category) {
    category_of(catalog, *required_category);
    auto it = std::find(ids.begin(), ids.end(), *required_category);
    std::rotate(ids.begin(), it, it + 1);
  }
  ids.resize(num_objects);
  std::sort(ids.begin(), ids.end());

  int attempts = 0;
  for (int id : ids) {
    const double r = catalog[id].proxy_radius;
    const double lim = cfg.table_half_extent - r;
    while (true) {
      if (++attempts > cfg.max_attempts) {
        throw Error(ErrorCode::PlacementFailure, "could not place objects without overlap");
      }
      const Vec3 p(uniform(rng, -lim, lim), uniform(rng, -lim, lim), r);
      const bool clear = std::all_of(scene.objects.begin(), scene.objects.end(), [&](const auto& o) {
        const double need = std::max(cfg.min_separation, r + catalog[o.category].proxy_radius);
        return (o.position - p).template head<2>().norm() >= need;
      });
      if (clear) {
        scene.objects.push_back({id, p, uniform(rng, -kPi, kPi)});
        break;
      }
    }
  }
  return scene;
}

Viewpoint initial_viewpoint() { return Viewpoint(Vec3::Zero(), 0.65, kPi / 4.0, 0.0); }

EnvState reset_env(const SceneSpec& scene) {
  EnvState s;
  s.scene = scene;
  s.camera = viewpoint_to_camera_pose(initial_viewpoint());
  return s;
}

namespace {

constexpr double kSurfaceTol = 1e-9;

// Closest point on the sphere surface that respects the workspace floor.
Vec3 project_to_sphere(const Vec3& p, const Vec3& c, double r, const Workspace& ws) {
  Vec3 d = p - c;
  const double n = d.norm();
  d = n < 1e-12 ? Vec3::UnitZ() : Vec3(d / n);
  Vec3 q = c + r * d;
  if (q.z() < ws.min_z) {
    const double h = ws.min_z - c.z();
    const double rho = std::sqrt(std::max(0.0, r * r - h * h));
    Eigen::Vector2d dir = (p - c).head<2>();
    dir = dir.norm() < 1e-12 ? Eigen::Vector2d::UnitX() : Eigen::Vector2d(dir.normalized());
    q = Vec3(c.x() + rho * dir.x(), c.y() + rho * dir.y(), ws.min_z);
  }
  return q;
}

const ObjectInstance* containing_object(const Vec3& p, const SceneSpec& scene,
                                        const Catalog& catalog) {
  for (const auto& o : scene.objects) {
    if ((p - o.position).norm() < catalog[o.category].proxy_radius - kSurfaceTol) return &o;
  }
  return nullptr;
}

}  // namespace

EnvState apply_action(EnvState state, const Action& a, const Catalog& catalog, const Workspace& ws) {
  if (state.done) throw Error(ErrorCode::EpisodeFinished, "episode already finished");

  Vec3 p = ws.clamp(state.camera.position + a.dpos);
  for (int iter = 0; iter < 8; ++iter) {
    const ObjectInstance* hit = containing_object(p, state.scene, catalog);
    if (hit == nullptr) break;
    p = project_to_sphere(p, hit->position, catalog[hit->category].proxy_radius, ws);
  }
  if (containing_object(p, state.scene, catalog) != nullptr || !ws.contains(p, 1e-12)) {
    p = state.camera.position;  // wedged between proxies; stay put
  }
  state.camera.position = p;

  const Eigen::Quaterniond q(state.camera.orientation * euler_xyz_to_matrix(a.drot));
  state.camera.orientation = q.normalized().toRotationMatrix();

  ++state.step_count;
  state.done = state.step_count >= kMaxEpisodeSteps;
  return state;
}

CameraPose goal_camera_pose(const GoalSpec& goal, const SceneSpec& scene) {
  const ObjectInstance& obj = scene.at(goal.target_category);
  return look_at(from_spherical(obj.position, goal.range, goal.elevation, obj.yaw + goal.azimuth),
                 obj.position);
}

GoalSpec sample_goal(const SceneSpec& scene, std::uint64_t seed, const Catalog& catalog,
                     std::optional<int> target_category, const Workspace& ws, int max_attempts) {
  if (scene.objects.empty()) throw Error(ErrorCode::InvalidArgument, "scene has no objects");
  Rng rng(seed);
  GoalSpec goal;
  if (target_category) {
    scene.at(*target_category);
    goal.target_category = *target_category;
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, scene.objects.size() - 1);
    goal.target_category = scene.objects[pick(rng)].category;
  }
  goal.range = kGoalRange;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    goal.elevation = uniform(rng, kGoalMinElevation, kGoalMaxElevation);
    goal.azimuth = uniform(rng, -kPi, kPi);
    const Vec3 p = goal_camera_pose(goal, scene).position;
    if (!ws.contains(p)) continue;
    const bool clear = std::all_of(scene.objects.begin(), scene.objects.end(), [&](const auto& o) {
      return (p - o.position).norm() >= catalog[o.category].proxy_radius + 0.01;
    });
    if (clear) return goal;
  }
  throw Error(ErrorCode::PlacementFailure, "no reachable goal viewpoint found");
}

SuccessCheck evaluate_success(const CameraPose& camera, const GoalSpec& goal,
                              const SceneSpec& scene, const Catalog& catalog) {
  const ObjectInstance& obj = scene.at(goal.target_category);
  const Symmetry sym = category_of(catalog, obj.category).symmetry;
  const double base = obj.yaw + goal.azimuth;

  std::vector<double> azimuths;
  if (sym.is_continuous()) {
    const Spherical s = spherical_about(camera.position, obj.position);
    const bool above = std::hypot(camera.position.x() - obj.position.x(),
                                  camera.position.y() - obj.position.y()) <= 1e-12;
    azimuths.push_back(above ? base : s.azimuth);
  } else {
    for (int k = 0; k < sym.order(); ++k) azimuths.push_back(base + k * sym.sector());
  }

  SuccessCheck best;
  best.translation_error = std::numeric_limits<double>::infinity();
  for (double az : azimuths) {
    const CameraPose g =
        look_at(from_spherical(obj.position, goal.range, goal.elevation, az), obj.position);
    const double t = (camera.position - g.position).norm();
    if (t < best.translation_error) {
      best.translation_error = t;
      best.rotation_error = rotation_error(camera, g);
    }
  }
  best.success = best.translation_error < kSuccessTranslation && best.rotation_error < kSuccessRotation;
  return best;
}

bool check_success(const CameraPose& camera, const GoalSpec& goal, const SceneSpec& scene,
                   const Catalog& catalog) {
  return evaluate_success(camera, goal, scene, catalog).success;
}

ObjectCentricErrors object_centric_errors(const CameraPose& camera, const GoalSpec& goal,
                                          const SceneSpec& scene, const Catalog& catalog) {
  const ObjectInstance& obj = scene.at(goal.target_category);
  const Symmetry sym = category_of(catalog, obj.category).symmetry;
  const Spherical s = spherical_about(camera.position, obj.position);
  const double daz = wrap_angle(s.azimuth - goal.azimuth - obj.yaw);
  ObjectCentricErrors e;
  e.azimuth_raw = std::abs(daz);
  e.azimuth = sym.reduce(daz);
  e.elevation = std::abs(s.elevation - goal.elevation);
  e.range = std::abs(s.range - goal.range);
  return e;
}

}  // namespace viewseek
