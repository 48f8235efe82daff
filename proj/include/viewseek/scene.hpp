#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "viewseek/geometry.hpp"

namespace viewseek {

/// Rotational symmetry of an object about its vertical axis.
class Symmetry {
 public:
  static Symmetry continuous() { return Symmetry(0); }
  static Symmetry discrete(int order);

  bool is_continuous() const { return order_ == 0; }
  /// 0 for continuous symmetry.
  int order() const { return order_; }
  /// Angular period of the symmetry; 2*pi for order 1, 0 for continuous.
  double sector() const { return is_continuous() ? 0.0 : kTwoPi / order_; }
  /// Smallest absolute angle equivalent to `angle` under the symmetry group.
  double reduce(double angle) const;

  bool operator==(const Symmetry&) const = default;

 private:
  explicit Symmetry(int order) : order_(order) {}
  int order_ = 1;
};

struct ObjectCategory {
  int id = 0;
  std::string name;
  double proxy_radius = 0.05;
  Symmetry symmetry = Symmetry::discrete(1);
};

using Catalog = std::vector<ObjectCategory>;

/// The five tabletop categories of the benchmark.
Catalog default_catalog();
void validate_catalog(const Catalog& catalog);
const ObjectCategory& category_of(const Catalog& catalog, int id);

struct ObjectInstance {
  int category = 0;
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
};

struct SceneSpec {
  std::vector<ObjectInstance> objects;
  std::array<double, 3> table_color{0.5, 0.5, 0.5};
  std::uint64_t seed = 0;

  const ObjectInstance* find(int category) const;
  const ObjectInstance& at(int category) const;  // throws UnknownCategory
};

/// Box the camera may occupy.
struct Workspace {
  double half_extent = 0.5;
  double min_z = 0.05;
  double max_z = 0.6;

  bool contains(const Vec3& p, double tol = 0.0) const;
  Vec3 clamp(const Vec3& p) const;
};

struct SceneConfig {
  double min_separation = 0.15;
  double table_half_extent = 0.5;
  int max_attempts = 10000;
};

inline constexpr int kMaxEpisodeSteps = 350;
inline constexpr double kGoalRange = 0.4;
inline constexpr double kGoalMinElevation = 0.15;
inline constexpr double kGoalMaxElevation = 1.40;
inline constexpr double kSuccessTranslation = 0.075;
inline constexpr double kSuccessRotation = 0.5;

/// Relative camera motion; all six components are clamped to [-0.5, 0.5].
struct Action {
  static constexpr double kLimit = 0.5;

  Action() = default;
  Action(const Vec3& translation, const Vec3& rotation);

  Vec3 dpos = Vec3::Zero();
  Vec3 drot = Vec3::Zero();  // Rx * Ry * Rz, applied in the camera frame
};

/// Goal camera view expressed in the target object's frame.
struct GoalSpec {
  int target_category = 0;
  double range = kGoalRange;
  double elevation = 0.5;
  double azimuth = 0.0;  // relative to the object's yaw
};

struct EnvState {
  SceneSpec scene;
  CameraPose camera;
  int step_count = 0;
  bool done = false;
};

SceneSpec generate_scene(std::uint64_t seed, int num_objects, const Catalog& catalog,
                         std::optional<int> required_category = std::nullopt,
                         const SceneConfig& cfg = {});

Viewpoint initial_viewpoint();
EnvState reset_env(const SceneSpec& scene);

EnvState apply_action(EnvState state, const Action& a, const Catalog& catalog,
                      const Workspace& ws = {});

/// Camera pose implied by a goal and the target's true position and yaw.
CameraPose goal_camera_pose(const GoalSpec& goal, const SceneSpec& scene);

GoalSpec sample_goal(const SceneSpec& scene, std::uint64_t seed, const Catalog& catalog,
                     std::optional<int> target_category = std::nullopt,
                     const Workspace& ws = {}, int max_attempts = 10000);

struct SuccessCheck {
  double translation_error = 0.0;
  double rotation_error = 0.0;
  bool success = false;
};

/// Compares against the goal pose equivalent under the target's symmetry that is
/// closest to the camera.
SuccessCheck evaluate_success(const CameraPose& camera, const GoalSpec& goal,
                              const SceneSpec& scene, const Catalog& catalog);
bool check_success(const CameraPose& camera, const GoalSpec& goal, const SceneSpec& scene,
                   const Catalog& catalog);

struct ObjectCentricErrors {
  double azimuth = 0.0;      // reduced over the target's symmetry group
  double azimuth_raw = 0.0;  // plain wrapped difference
  double elevation = 0.0;
  double range = 0.0;
};

ObjectCentricErrors object_centric_errors(const CameraPose& camera, const GoalSpec& goal,
                                          const SceneSpec& scene, const Catalog& catalog);

}  // namespace viewseek
