#include "viewseek/policies.hpp"

#include <algorithm>
#include <cmath>

#include "viewseek/errors.hpp"

namespace viewseek {

namespace {

constexpr double kReachTolerance = 1e-3;

Catalog single_category(const Catalog& catalog, int id) {
  ObjectCategory c = category_of(catalog, id);
  c.id = 0;
  return {c};
}

}  // namespace

AifPolicy::AifPolicy(AgentContext ctx, std::optional<GoalBeliefs> goal, std::uint64_t seed)
    : ctx_(std::move(ctx)), goal_(goal), rng_(seed), bank_(ctx_.catalog, ctx_.belief, rng_) {
  ctx_.planner.validate();
  ctx_.belief.validate();
  if (goal_) {
    category_of(ctx_.catalog, goal_->target);
    tracked_.push_back(goal_->target);
  } else {
    for (const auto& c : ctx_.catalog) tracked_.push_back(c.id);
  }
}

bool AifPolicy::reached(const CameraPose& camera) const {
  return plan_ && (camera.position - plan_->viewpoint.camera_position()).norm() <= kReachTolerance;
}

Action AifPolicy::act(const EnvState& state, const ObservationBundle& obs) {
  records_.clear();
  for (int k : tracked_) {
    UpdateRecord rec;
    rec.category = k;
    integrate_observation(bank_[k], obs.get(k), obs.camera, ctx_.model, ctx_.catalog[k].symmetry,
                          ctx_.belief, rng_, record_ ? &rec : nullptr);
    if (record_) records_.push_back(std::move(rec));
  }

  const int step = state.step_count;
  replanned_ = !plan_ || step - planned_at_ >= ctx_.planner.replan_interval || reached(state.camera);
  if (replanned_) {
    const GoalBeliefs* g = goal_ ? &*goal_ : nullptr;
    plan_ = select_target_viewpoint(bank_, g, ctx_.planner, ctx_.model, ctx_.noise, rng_, ctx_.catalog,
                                    ctx_.belief, ctx_.workspace);
    planned_at_ = step;
    plan_steps_.push_back(step);
  }
  return step_toward(state.camera, plan_->viewpoint, ctx_.planner.step_size);
}

GreedyPolicy::GreedyPolicy(AgentContext ctx, GoalBeliefs goal, GreedyVariant variant,
                           std::uint64_t seed)
    : ctx_(std::move(ctx)), goal_(goal), variant_(variant), rng_(seed) {
  category_of(ctx_.catalog, goal_.target);
  if (variant_ == GreedyVariant::InfoGain) {
    ctx_.planner.validate();
    belief_ = CategoryBelief{
        ParticleBelief::init_uniform(ctx_.belief.bounds, ctx_.belief.num_particles, rng_), {}, false};
  }
}

std::optional<Viewpoint> GreedyPolicy::goal_from_detection(const Detection& d,
                                                           const CameraPose& camera,
                                                           const GoalBeliefs& goal,
                                                           const CameraModel& model) {
  Ray ray;
  try {
    ray = backproject(camera, model, d.pixel_center);
  } catch (const Error&) {
    return std::nullopt;
  }
  const Vec3 object = ray.at(distance_from_scale(d.scale));
  const Spherical here = spherical_about(camera.position, object);
  // Relative transform between the estimated and the goal view, applied to the current geometry.
  // Like a pose regressor, it takes the estimate at face value, symmetric objects included.
  const double azimuth = here.azimuth + wrap_angle(goal.azimuth - d.pose.azimuth);
  const double elevation = std::clamp(here.elevation + goal.elevation - d.pose.elevation, 0.0, 0.5 * kPi);
  return Viewpoint(object, distance_from_scale(goal.scale), elevation, azimuth);
}

Action GreedyPolicy::act(const EnvState& state, const ObservationBundle& obs) {
  const Detection* d = obs.get(goal_.target);
  const Symmetry& sym = ctx_.catalog[goal_.target].symmetry;
  if (belief_) {
    integrate_observation(*belief_, d, obs.camera, ctx_.model, sym, ctx_.belief, rng_);
  }
  if (stopped_) return {};

  if (d != nullptr) {
    search_.reset();
    if (auto v = goal_from_detection(*d, state.camera, goal_, ctx_.model)) {
      return step_toward(state.camera, *v, ctx_.planner.step_size);
    }
  }
  if (variant_ == GreedyVariant::Vanilla) {
    stopped_ = true;
    return {};
  }

  const bool arrived =
      search_ && (state.camera.position - search_->camera_position()).norm() <= kReachTolerance;
  if (!search_ || arrived || state.step_count - searched_at_ >= ctx_.planner.replan_interval) {
    // Information gain over the target's position only.
    const Catalog one = single_category(ctx_.catalog, goal_.target);
    Rng scratch(0);
    BeliefConfig tiny = ctx_.belief;
    tiny.num_particles = 1;
    BeliefBank bank(one, tiny, scratch);
    bank[0] = *belief_;
    PlannerConfig cfg = ctx_.planner;
    cfg.utility_enabled = false;
    search_ = select_target_viewpoint(bank, nullptr, cfg, ctx_.model, ctx_.noise, rng_, one,
                                      ctx_.belief, ctx_.workspace)
                  .viewpoint;
    searched_at_ = state.step_count;
  }
  return step_toward(state.camera, *search_, ctx_.planner.step_size);
}

RandomPolicy::RandomPolicy(std::uint64_t seed, double step_size, double max_rotation)
    : rng_(seed), step_size_(step_size), max_rotation_(max_rotation) {}

Action RandomPolicy::act(const EnvState&, const ObservationBundle&) {
  Vec3 dir(gaussian(rng_, 1.0), gaussian(rng_, 1.0), gaussian(rng_, 1.0));
  if (dir.norm() < 1e-12) dir = Vec3::UnitX();
  const Vec3 rot(uniform(rng_, -max_rotation_, max_rotation_), uniform(rng_, -max_rotation_, max_rotation_),
                 uniform(rng_, -max_rotation_, max_rotation_));
  return Action(dir.normalized() * step_size_, rot);
}

OraclePolicy::OraclePolicy(const GoalSpec& goal, const SceneSpec& scene, double step_size)
    : step_size_(step_size) {
  const ObjectInstance& obj = scene.at(goal.target_category);
  target_ = Viewpoint(obj.position, goal.range, goal.elevation, obj.yaw + goal.azimuth);
}

Action OraclePolicy::act(const EnvState& state, const ObservationBundle&) {
  return step_toward(state.camera, target_, step_size_);
}

}  // namespace viewseek
