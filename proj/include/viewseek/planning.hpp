#pragma once

#include <vector>

#include "viewseek/belief.hpp"
#include "viewseek/geometry.hpp"
#include "viewseek/perception.hpp"
#include "viewseek/random.hpp"
#include "viewseek/scene.hpp"

namespace viewseek {

struct EfeBreakdown {
  double position_utility = 0.0;
  double scale_utility = 0.0;
  double pose_utility = 0.0;
  double info_gain = 0.0;
  double total = 0.0;
};

struct PlannerConfig {
  int num_candidates = 5000;
  int replan_interval = 10;
  double step_size = 0.05;
  double importance_mix = 0.7;
  double w_position = 1.0;
  double w_scale = 1.0;
  double w_pose = 1.0;
  double w_info = 1.0;
  bool utility_enabled = true;
  double range_min = 0.25;
  double range_max = 0.65;
  double elevation_min = 0.1;
  double elevation_max = 1.45;
  double scale_std = 0.1;
  double pose_std = 0.2;
  int scale_samples = 64;
  double log_floor = 1e-12;
  // Size of the equal-weight subsample each belief is reduced to while scoring;
  // 0 scores against the full particle set.
  int planning_particles = 512;

  void validate() const;
};

/// What the agent believes the goal image shows.
struct GoalBeliefs {
  int target = 0;
  double scale = 1.0;
  double azimuth = 0.0;  // object-relative
  double elevation = 0.5;
};

/// Reads the goal off a rendering of the goal view through the perception channel.
GoalBeliefs infer_goal(const GoalSpec& goal, const SceneSpec& scene, const Catalog& catalog,
                       const CameraModel& model, const NoiseConfig& noise, Rng& rng);

/// `goal` may be null (goal-free exploration).
std::vector<Viewpoint> sample_candidates(const BeliefBank& bank, const GoalBeliefs* goal,
                                         const PlannerConfig& cfg, Rng& rng,
                                         const Workspace& ws = {});

/// Mutual information between the binary detection event at `v` and the binned position.
double info_gain(const ParticleBelief& b, const Viewpoint& v, const CameraModel& model,
                 const NoiseConfig& noise);

/// Log density of a zero-mean wrapped normal on the circle.
class WrappedNormal {
 public:
  explicit WrappedNormal(double sd = 1.0);
  double operator()(double angle) const;

 private:
  double sd_;
  double inv_var_half_;
  double log_norm_;
  bool flat_;
};

/// Scores candidates against a frozen reduction of the belief bank.
class EfeScorer {
 public:
  EfeScorer(const BeliefBank& bank, const Catalog& catalog, const GoalBeliefs* goal,
            const PlannerConfig& cfg, const CameraModel& model, const NoiseConfig& noise,
            const BeliefConfig& belief_cfg = {});

  EfeBreakdown score(const Viewpoint& v) const;
  bool exploring() const { return exploring_; }

 private:
  struct Snapshot {
    std::vector<Vec3> particles;
    std::vector<double> xs, ys, zs;
    std::vector<double> weights;
    std::vector<int> bins;  // compact bin ids
    std::vector<double> mass;
    int num_bins = 0;
    double entropy = 0.0;
    double sum_plogp = 0.0;
  };
  static Snapshot make_snapshot(const ParticleBelief& b, int m);
  double snapshot_info_gain(const Snapshot& s, const FrustumTest& frustum) const;

  PlannerConfig cfg_;
  CameraModel model_;
  NoiseConfig noise_;
  double kde_bandwidth_;
  bool exploring_;
  GoalBeliefs goal_{};
  Symmetry symmetry_ = Symmetry::discrete(1);
  YawBelief yaw_;
  double yaw_mean_ = 0.0;
  bool flat_azimuth_ = true;
  WrappedNormal elevation_pref_;
  WrappedNormal azimuth_pref_;
  double scale_log_norm_ = 0.0;
  double kde_norm_ = 0.0;
  std::vector<Snapshot> snapshots_;  // one per category (target only when goal-directed)
  std::vector<Vec3> utility_samples_;
  mutable std::vector<double> scratch_in_;
  mutable std::vector<int> touched_;
  mutable std::vector<unsigned char> inside_;
};

EfeBreakdown score_efe(const BeliefBank& bank, const Viewpoint& v, const GoalBeliefs* goal,
                       const PlannerConfig& cfg, const CameraModel& model,
                       const NoiseConfig& noise, const Catalog& catalog = default_catalog(),
                       const BeliefConfig& belief_cfg = {});

struct Selection {
  Viewpoint viewpoint;
  EfeBreakdown efe;
  int index = 0;
};

/// Index of the smallest total; ties go to the earliest entry.
int argmin_total(const std::vector<double>& totals);

Selection select_target_viewpoint(const BeliefBank& bank, const GoalBeliefs* goal,
                                  const PlannerConfig& cfg, const CameraModel& model,
                                  const NoiseConfig& noise, Rng& rng,
                                  const Catalog& catalog = default_catalog(),
                                  const BeliefConfig& belief_cfg = {},
                                  const Workspace& ws = {});

Selection select_from(const std::vector<Viewpoint>& candidates, const EfeScorer& scorer);

/// Bounded step toward a target pose; lands exactly when within one step.
Action step_toward(const CameraPose& current, const CameraPose& target, double step_size = 0.05);
Action step_toward(const CameraPose& current, const Viewpoint& target, double step_size = 0.05);

}  // namespace viewseek
