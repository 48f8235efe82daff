#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "viewseek/free_energy.hpp"
#include "viewseek/planning.hpp"
#include "viewseek/policies.hpp"
#include "viewseek/scene.hpp"

namespace viewseek {

struct SuiteRecord {
  int id = 0;
  SceneSpec scene;
  GoalSpec goal;
  std::uint64_t seed = 0;
};

/// per_category scenes for every category, each with 1-5 objects including the target.
std::vector<SuiteRecord> build_suite(std::uint64_t seed, int per_category,
                                     const Catalog& catalog = default_catalog());

enum class AgentKind { Aif, Greedy, GreedyInfoGain, Random, Oracle };

std::string_view to_string(AgentKind kind);
std::optional<AgentKind> parse_agent(std::string_view name);

struct RunSettings {
  AgentContext ctx;
  std::uint64_t master_seed = 0;
  int jobs = 1;
  int max_steps = kMaxEpisodeSteps;
};

/// Per-episode random streams, derived only from the master seed and record id.
struct EpisodeSeeds {
  std::uint64_t perception;
  std::uint64_t agent;
  std::uint64_t goal;
};
EpisodeSeeds episode_seeds(std::uint64_t master_seed, int record_id);

struct EpisodeResult {
  int scene_id = 0;
  int target = 0;
  std::string agent;
  bool success = false;
  int steps = 0;
  double dphi = 0.0;    // azimuth error, radians
  double dtheta = 0.0;  // elevation error, radians
  double dr = 0.0;      // range error, meters
  double translation_error = 0.0;
  double rotation_error = 0.0;
  double trajectory_length = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const EpisodeResult&) const = default;
};

struct BeliefSnapshot {
  int category = 0;
  Vec3 mean = Vec3::Zero();
  Mat3 covariance = Mat3::Zero();
  double entropy = 0.0;
  std::vector<Vec3> particles;  // down-sampled, equal weight
};

struct TraceStep {
  int step = 0;
  CameraPose camera;
  std::optional<EfeBreakdown> efe;
  bool replanned = false;
  std::vector<BeliefSnapshot> beliefs;
  FreeEnergyStep free_energy;
};

struct EpisodeTrace {
  std::string agent;
  int scene_id = -1;
  std::vector<TraceStep> steps;
};

struct TraceOptions {
  int particles_per_belief = 200;
};

/// Builds the agent for a record; the goal is inferred through perception.
std::unique_ptr<Policy> make_agent(AgentKind kind, const SuiteRecord& record,
                                   const RunSettings& settings);

/// observe -> act -> apply until success or the step cap.
EpisodeResult run_episode(const SuiteRecord& record, Policy& policy, const RunSettings& settings,
                          EpisodeTrace* trace = nullptr, const TraceOptions& topt = {});
EpisodeResult run_episode(const SuiteRecord& record, AgentKind kind, const RunSettings& settings,
                          EpisodeTrace* trace = nullptr, const TraceOptions& topt = {});

/// Results are ordered like `records` whatever the number of jobs.
std::vector<EpisodeResult> run_suite(const std::vector<SuiteRecord>& records, AgentKind kind,
                                     const RunSettings& settings);

struct MetricRow {
  std::string agent;
  std::string category;  // "total" for per-agent rows
  int n = 0;
  double success_pct = 0.0;
  double dphi_mean = 0.0, dphi_se = 0.0;
  double dtheta_mean = 0.0, dtheta_se = 0.0;
  double dr_mean = 0.0, dr_se = 0.0;
};

struct MetricsTable {
  std::vector<MetricRow> rows;

  const MetricRow* find(std::string_view agent, std::string_view category) const;
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};
/// Mean and standard error (sample std / sqrt(n)); SE is 0 for a single value.
MeanSe mean_se(std::vector<double> values);

MetricsTable aggregate(const std::vector<EpisodeResult>& results,
                       const Catalog& catalog = default_catalog());

std::string to_csv(const MetricsTable& table);
MetricsTable parse_csv(std::string_view text);
std::string to_text(const MetricsTable& table);

struct ExplorationResult {
  std::vector<double> total_entropy;   // index 0 before the first observation
  std::vector<int> categories;         // categories present in the scene
  std::vector<Vec3> final_means;       // aligned with categories
  std::vector<double> final_errors;    // distance of each mean to the true position
};

/// Goal-free episode of `steps` actions.
ExplorationResult run_exploration(const SceneSpec& scene, const RunSettings& settings,
                                  std::uint64_t seed, int steps = 100,
                                  EpisodeTrace* trace = nullptr, const TraceOptions& topt = {});

}  // namespace viewseek
