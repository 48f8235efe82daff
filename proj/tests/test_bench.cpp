#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "viewseek/bench.hpp"
#include "viewseek/errors.hpp"
#include "viewseek/io.hpp"

using namespace viewseek;

namespace {

AgentContext light_context() {
  AgentContext ctx;
  ctx.belief.num_particles = 2000;
  ctx.planner.num_candidates = 500;
  return ctx;
}

EpisodeResult result(std::string agent, int target, bool success, double dphi, double dtheta, double dr) {
  EpisodeResult r;
  r.agent = std::move(agent);
  r.target = target;
  r.success = success;
  r.dphi = dphi;
  r.dtheta = dtheta;
  r.dr = dr;
  return r;
}

}  // namespace

TEST_CASE("suite construction") {
  const auto suite = build_suite(42, 100);
  REQUIRE(suite.size() == 500);
  std::vector<int> per(5, 0);
  std::vector<int> counts(6, 0);
  for (const auto& r : suite) {
    CHECK(r.scene.find(r.goal.target_category) != nullptr);
    CHECK(r.scene.objects.size() >= 1);
    CHECK(r.scene.objects.size() <= 5);
    ++per[r.goal.target_category];
    ++counts[r.scene.objects.size()];
  }
  for (int c : per) CHECK(c == 100);
  for (int n = 1; n <= 5; ++n) CHECK(counts[n] > 50);
  CHECK(dump_suite(suite) == dump_suite(build_suite(42, 100)));
  CHECK(dump_suite(suite) != dump_suite(build_suite(43, 100)));
  CHECK_THROWS_AS(build_suite(1, 0), Error);

  const auto back = suite_from_json(suite_to_json(suite));
  CHECK(dump_suite(back) == dump_suite(suite));
}

TEST_CASE("agent names") {
  for (AgentKind k : {AgentKind::Aif, AgentKind::Greedy, AgentKind::GreedyInfoGain, AgentKind::Random, AgentKind::Oracle}) {
    CHECK(parse_agent(to_string(k)) == k);
  }
  CHECK_FALSE(parse_agent("nope").has_value());
}

TEST_CASE("episode seeds depend only on master seed and record id") {
  const EpisodeSeeds a = episode_seeds(7, 3), b = episode_seeds(7, 3), c = episode_seeds(7, 4);
  CHECK(a.perception == b.perception);
  CHECK(a.agent == b.agent);
  CHECK(a.goal == b.goal);
  CHECK(a.perception != c.perception);
  CHECK(a.perception != a.agent);
}

TEST_CASE("oracle agent succeeds, idle agent times out") {
  RunSettings settings;
  settings.ctx = light_context();
  const auto suite = build_suite(5, 2);
  for (const auto& rec : suite) {
    const EpisodeResult r = run_episode(rec, AgentKind::Oracle, settings);
    CHECK(r.success);
    CHECK(r.translation_error < kSuccessTranslation);
    CHECK(r.rotation_error < kSuccessRotation);
    CHECK(r.steps < kMaxEpisodeSteps);
    CHECK(r.agent == "oracle");
  }
  IdlePolicy idle;
  const auto& rec = suite.front();
  REQUIRE_FALSE(check_success(reset_env(rec.scene).camera, rec.goal, rec.scene, settings.ctx.catalog));
  const EpisodeResult r = run_episode(rec, idle, settings);
  CHECK_FALSE(r.success);
  CHECK(r.steps == kMaxEpisodeSteps);

  RunSettings short_run = settings;
  short_run.max_steps = 10;
  EpisodeTrace trace;
  run_episode(rec, idle, short_run, &trace);
  CHECK(trace.steps.size() == 10);
}

TEST_CASE("aif solves noiseless single-object scenes") {
  RunSettings settings;
  settings.ctx.noise = NoiseConfig::noiseless();
  int wins = 0;
  for (int seed = 0; seed < 20; ++seed) {
    SuiteRecord rec;
    rec.id = seed;
    const int target = seed % 5;
    rec.scene = generate_scene(mix_seed(1000, seed), 1, settings.ctx.catalog, target);
    rec.goal = sample_goal(rec.scene, mix_seed(2000, seed), settings.ctx.catalog);
    const EpisodeResult r = run_episode(rec, AgentKind::Aif, settings);
    if (r.success && r.steps < kMaxEpisodeSteps) ++wins;
  }
  CHECK(wins >= 19);
}

TEST_CASE("aif traces carry beliefs and free-energy terms") {
  RunSettings settings;
  settings.ctx = light_context();
  settings.max_steps = 12;
  const auto suite = build_suite(9, 1);
  EpisodeTrace trace;
  run_episode(suite[0], AgentKind::Aif, settings, &trace, TraceOptions{50});
  REQUIRE(trace.steps.size() == 12);
  CHECK(trace.agent == "aif");
  CHECK(trace.steps[0].replanned);
  CHECK(trace.steps[0].efe.has_value());
  CHECK(trace.steps[0].beliefs.size() == 1);
  CHECK(trace.steps[0].beliefs[0].particles.size() == 50);
  CHECK(trace.steps[0].free_energy.kl.size() == 1);
  const Json j = to_json(trace);
  CHECK(j["steps"].size() == 12);
}

TEST_CASE("results are independent of the number of jobs") {
  RunSettings settings;
  settings.ctx = light_context();
  settings.master_seed = 17;
  settings.max_steps = 60;
  const auto suite = build_suite(3, 1);
  settings.jobs = 1;
  const auto serial = run_suite(suite, AgentKind::Aif, settings);
  settings.jobs = 3;
  const auto parallel = run_suite(suite, AgentKind::Aif, settings);
  CHECK(serial == parallel);
  for (std::size_t i = 0; i < suite.size(); ++i) CHECK(serial[i].scene_id == suite[i].id);

  const auto back = results_from_json(results_to_json(serial));
  CHECK(back == serial);
}

TEST_CASE("aggregation") {
  const MeanSe m = mean_se({1.0, 2.0, 3.0});
  CHECK(m.mean == doctest::Approx(2.0));
  CHECK(m.se == doctest::Approx(0.5774).epsilon(1e-4));
  CHECK(mean_se({4.0}).se == 0.0);
  CHECK_THROWS_AS(mean_se({}), Error);
  CHECK_THROWS_AS(aggregate({}), Error);

  std::vector<EpisodeResult> rs{result("aif", 4, true, 0.1, 0.2, 1.0), result("aif", 4, true, 0.3, 0.1, 2.0),
                                result("aif", 4, true, 0.2, 0.3, 3.0), result("aif", 0, true, 1.2, 0.1, 0.5),
                                result("greedy", 0, false, 2.0, 0.4, 0.1)};
  const MetricsTable t = aggregate(rs);
  const MetricRow* mustard = t.find("aif", "mustard_bottle");
  REQUIRE(mustard != nullptr);
  CHECK(mustard->n == 3);
  CHECK(mustard->dr_mean == doctest::Approx(2.0));
  CHECK(mustard->dr_se == doctest::Approx(0.5774).epsilon(1e-4));
  CHECK(t.find("aif", "total")->success_pct == 100.0);
  CHECK(t.find("aif", "total")->n == 4);
  CHECK(t.find("greedy", "total")->success_pct == 0.0);

  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(rs.begin(), rs.end(), rng);
    CHECK(to_csv(aggregate(rs)) == to_csv(t));
  }

  const MetricsTable back = parse_csv(to_csv(t));
  REQUIRE(back.rows.size() == t.rows.size());
  CHECK(to_csv(back) == to_csv(t));
  CHECK(to_text(t).find("mustard_bottle") != std::string::npos);
  CHECK_THROWS_AS(parse_csv("agent,category\nx,y,1\n"), Error);
}

TEST_CASE("noiseless exploration localises every object") {
  RunSettings settings;
  settings.ctx.noise = NoiseConfig::noiseless();
  const SceneSpec scene = generate_scene(21, 3, settings.ctx.catalog);
  const ExplorationResult r = run_exploration(scene, settings, 5, 100);
  REQUIRE(r.total_entropy.size() == 101);
  CHECK(r.total_entropy.back() < 0.5 * r.total_entropy.front());
  for (double e : r.final_errors) CHECK(e < 0.1);
}
