#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "viewseek/belief.hpp"
#include "viewseek/perception.hpp"
#include "viewseek/planning.hpp"
#include "viewseek/scene.hpp"

namespace viewseek {

/// Everything an agent may know about the world besides its observations.
struct AgentContext {
  Catalog catalog = default_catalog();
  CameraModel model;
  NoiseConfig noise;
  BeliefConfig belief;
  PlannerConfig planner;
  Workspace workspace;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual Action act(const EnvState& state, const ObservationBundle& obs) = 0;
};

/// Expected-free-energy agent. Without a goal it explores, planning on
/// information gain over every category.
class AifPolicy : public Policy {
 public:
  AifPolicy(AgentContext ctx, std::optional<GoalBeliefs> goal, std::uint64_t seed);

  std::string name() const override { return "aif"; }
  Action act(const EnvState& state, const ObservationBundle& obs) override;

  const BeliefBank& bank() const { return bank_; }
  const std::optional<Selection>& plan() const { return plan_; }
  bool replanned_last_step() const { return replanned_; }
  const std::vector<int>& plan_steps() const { return plan_steps_; }
  const std::vector<int>& tracked() const { return tracked_; }

  /// Keep per-category update records of the latest step.
  void set_record_updates(bool on) { record_ = on; }
  const std::vector<UpdateRecord>& last_records() const { return records_; }

 private:
  bool reached(const CameraPose& camera) const;

  AgentContext ctx_;
  std::optional<GoalBeliefs> goal_;
  Rng rng_;
  BeliefBank bank_;
  std::vector<int> tracked_;
  std::optional<Selection> plan_;
  int planned_at_ = 0;
  bool replanned_ = false;
  std::vector<int> plan_steps_;
  bool record_ = false;
  std::vector<UpdateRecord> records_;
};

enum class GreedyVariant { Vanilla, InfoGain };

/// Per-frame pose regression: steps toward the goal view implied by the latest
/// detection of the target.
class GreedyPolicy : public Policy {
 public:
  GreedyPolicy(AgentContext ctx, GoalBeliefs goal, GreedyVariant variant, std::uint64_t seed);

  std::string name() const override {
    return variant_ == GreedyVariant::Vanilla ? "greedy" : "greedy-infogain";
  }
  Action act(const EnvState& state, const ObservationBundle& obs) override;

  bool stopped() const { return stopped_; }
  const std::optional<Viewpoint>& search_target() const { return search_; }

  /// Goal view implied by a single detection of the target, or nullopt when the
  /// detection cannot be back-projected.
  static std::optional<Viewpoint> goal_from_detection(const Detection& d, const CameraPose& camera,
                                                      const GoalBeliefs& goal,
                                                      const CameraModel& model);

 private:
  AgentContext ctx_;
  GoalBeliefs goal_;
  GreedyVariant variant_;
  Rng rng_;
  std::optional<CategoryBelief> belief_;
  bool stopped_ = false;
  std::optional<Viewpoint> search_;
  int searched_at_ = 0;
};

/// Uniformly random bounded steps.
class RandomPolicy : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed, double step_size = 0.05, double max_rotation = 0.1);

  std::string name() const override { return "random"; }
  Action act(const EnvState& state, const ObservationBundle& obs) override;

 private:
  Rng rng_;
  double step_size_;
  double max_rotation_;
};

/// Walks the ground-truth straight line to the goal view; a harness self-test.
class OraclePolicy : public Policy {
 public:
  OraclePolicy(const GoalSpec& goal, const SceneSpec& scene, double step_size = 0.05);

  std::string name() const override { return "oracle"; }
  Action act(const EnvState& state, const ObservationBundle& obs) override;

 private:
  Viewpoint target_;
  double step_size_;
};

/// Emits zero actions forever.
class IdlePolicy : public Policy {
 public:
  std::string name() const override { return "idle"; }
  Action act(const EnvState&, const ObservationBundle&) override { return {}; }
};

}  // namespace viewseek
