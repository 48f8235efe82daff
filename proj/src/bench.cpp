#include "viewseek/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "viewseek/errors.hpp"
#include "viewseek/random.hpp"

namespace viewseek {

namespace {

constexpr std::uint64_t kSceneSalt = 11;
constexpr std::uint64_t kGoalSalt = 12;
constexpr std::uint64_t kCountSalt = 13;

BeliefSnapshot snapshot_of(int category, const ParticleBelief& b, int particles) {
  BeliefSnapshot s;
  s.category = category;
  s.mean = b.mean();
  s.covariance = b.covariance();
  s.entropy = b.entropy();
  s.particles = b.systematic_subsample(particles);
  return s;
}

}  // namespace

std::vector<SuiteRecord> build_suite(std::uint64_t seed, int per_category, const Catalog& catalog) {
  if (per_category < 1) throw Error(ErrorCode::InvalidArgument, "per_category must be >= 1");
  validate_catalog(catalog);
  const int max_objects = std::min<int>(5, static_cast<int>(catalog.size()));
  std::vector<SuiteRecord> suite;
  int id = 0;
  for (const auto& cat : catalog) {
    for (int i = 0; i < per_category; ++i, ++id) {
      SuiteRecord r;
      r.id = id;
      r.seed = mix_seed(seed, static_cast<std::uint64_t>(id));
      Rng count_rng(mix_seed(r.seed, kCountSalt));
      const int n = std::uniform_int_distribution<int>(1, max_objects)(count_rng);
      r.scene = generate_scene(mix_seed(r.seed, kSceneSalt), n, catalog, cat.id);
      r.goal = sample_goal(r.scene, mix_seed(r.seed, kGoalSalt), catalog, cat.id);
      suite.push_back(std::move(r));
    }
  }
  return suite;
}

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::Aif: return "aif";
    case AgentKind::Greedy: return "greedy";
    case AgentKind::GreedyInfoGain: return "greedy-infogain";
    case AgentKind::Random: return "random";
    case AgentKind::Oracle: return "oracle";
  }
  return "unknown";
}

std::optional<AgentKind> parse_agent(std::string_view name) {
  for (AgentKind k : {AgentKind::Aif, AgentKind::Greedy, AgentKind::GreedyInfoGain, AgentKind::Random,
                      AgentKind::Oracle}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

EpisodeSeeds episode_seeds(std::uint64_t master_seed, int record_id) {
  const std::uint64_t s = mix_seed(master_seed, static_cast<std::uint64_t>(record_id));
  return {mix_seed(s, 1), mix_seed(s, 2), mix_seed(s, 3)};
}

std::unique_ptr<Policy> make_agent(AgentKind kind, const SuiteRecord& record,
                                   const RunSettings& settings) {
  const EpisodeSeeds seeds = episode_seeds(settings.master_seed, record.id);
  const auto& ctx = settings.ctx;
  auto goal = [&] {
    Rng rng(seeds.goal);
    return infer_goal(record.goal, record.scene, ctx.catalog, ctx.model, ctx.noise, rng);
  };
  switch (kind) {
    case AgentKind::Aif: return std::make_unique<AifPolicy>(ctx, goal(), seeds.agent);
    case AgentKind::Greedy:
      return std::make_unique<GreedyPolicy>(ctx, goal(), GreedyVariant::Vanilla, seeds.agent);
    case AgentKind::GreedyInfoGain:
      return std::make_unique<GreedyPolicy>(ctx, goal(), GreedyVariant::InfoGain, seeds.agent);
    case AgentKind::Random: return std::make_unique<RandomPolicy>(seeds.agent);
    case AgentKind::Oracle: return std::make_unique<OraclePolicy>(record.goal, record.scene);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown agent");
}

EpisodeResult run_episode(const SuiteRecord& record, Policy& policy, const RunSettings& settings,
                          EpisodeTrace* trace, const TraceOptions& topt) {
  const auto& ctx = settings.ctx;
  const EpisodeSeeds seeds = episode_seeds(settings.master_seed, record.id);
  Rng perception(seeds.perception);
  auto* aif = dynamic_cast<AifPolicy*>(&policy);
  if (trace != nullptr) {
    trace->agent = policy.name();
    trace->scene_id = record.id;
    trace->steps.clear();
    if (aif != nullptr) aif->set_record_updates(true);
  }

  EnvState env = reset_env(record.scene);
  double path = 0.0;
  const int cap = std::min(settings.max_steps, kMaxEpisodeSteps);
  while (!env.done && env.step_count < cap) {
    if (check_success(env.camera, record.goal, record.scene, ctx.catalog)) break;
    const ObservationBundle obs = observe(env.scene, ctx.catalog, env.camera, ctx.model, ctx.noise, perception);
    const Action a = policy.act(env, obs);
    if (trace != nullptr) {
      TraceStep ts;
      ts.step = env.step_count;
      ts.camera = env.camera;
      if (aif != nullptr) {
        if (aif->plan()) ts.efe = aif->plan()->efe;
        ts.replanned = aif->replanned_last_step();
        for (int k : aif->tracked()) {
          ts.beliefs.push_back(snapshot_of(k, aif->bank()[k].position, topt.particles_per_belief));
        }
        ts.free_energy = free_energy_step(aif->last_records());
      }
      trace->steps.push_back(std::move(ts));
    }
    const Vec3 before = env.camera.position;
    env = apply_action(std::move(env), a, ctx.catalog, ctx.workspace);
    path += (env.camera.position - before).norm();
  }

  const SuccessCheck sc = evaluate_success(env.camera, record.goal, record.scene, ctx.catalog);
  const ObjectCentricErrors err = object_centric_errors(env.camera, record.goal, record.scene, ctx.catalog);
  EpisodeResult r;
  r.scene_id = record.id;
  r.target = record.goal.target_category;
  r.agent = policy.name();
  r.success = sc.success;
  r.steps = env.step_count;
  r.dphi = err.azimuth_raw;
  r.dtheta = err.elevation;
  r.dr = err.range;
  r.translation_error = sc.translation_error;
  r.rotation_error = sc.rotation_error;
  r.trajectory_length = path;
  r.seed = mix_seed(settings.master_seed, static_cast<std::uint64_t>(record.id));
  return r;
}

EpisodeResult run_episode(const SuiteRecord& record, AgentKind kind, const RunSettings& settings,
                          EpisodeTrace* trace, const TraceOptions& topt) {
  auto policy = make_agent(kind, record, settings);
  return run_episode(record, *policy, settings, trace, topt);
}

std::vector<EpisodeResult> run_suite(const std::vector<SuiteRecord>& records, AgentKind kind,
                                     const RunSettings& settings) {
  std::vector<EpisodeResult> results(records.size());
  const int jobs = std::max(1, std::min<int>(settings.jobs, static_cast<int>(records.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= records.size()) return;
      try {
        results[i] = run_episode(records[i], kind, settings);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = records.size();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

const MetricRow* MetricsTable::find(std::string_view agent, std::string_view category) const {
  for (const auto& r : rows) {
    if (r.agent == agent && r.category == category) return &r;
  }
  return nullptr;
}

MeanSe mean_se(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "no values");
  // Sorting first makes the result independent of input order.
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

MetricsTable aggregate(const std::vector<EpisodeResult>& results, const Catalog& catalog) {
  if (results.empty()) throw Error(ErrorCode::EmptyInput, "no episode results to aggregate");
  std::map<std::string, std::map<int, std::vector<const EpisodeResult*>>> groups;
  for (const auto& r : results) groups[r.agent][r.target].push_back(&r);

  auto row_of = [](const std::string& agent, const std::string& category,
                   const std::vector<const EpisodeResult*>& rs) {
    MetricRow row;
    row.agent = agent;
    row.category = category;
    row.n = static_cast<int>(rs.size());
    std::vector<double> dphi, dtheta, dr;
    int wins = 0;
    for (const auto* r : rs) {
      wins += r->success ? 1 : 0;
      dphi.push_back(r->dphi);
      dtheta.push_back(r->dtheta);
      dr.push_back(r->dr);
    }
    row.success_pct = 100.0 * wins / row.n;
    const MeanSe a = mean_se(dphi), b = mean_se(dtheta), c = mean_se(dr);
    row.dphi_mean = a.mean, row.dphi_se = a.se;
    row.dtheta_mean = b.mean, row.dtheta_se = b.se;
    row.dr_mean = c.mean, row.dr_se = c.se;
    return row;
  };

  MetricsTable table;
  for (const auto& [agent, by_cat] : groups) {
    std::vector<const EpisodeResult*> all;
    for (const auto& [cat, rs] : by_cat) {
      const std::string name =
          cat >= 0 && cat < static_cast<int>(catalog.size()) ? catalog[cat].name : std::to_string(cat);
      table.rows.push_back(row_of(agent, name, rs));
      all.insert(all.end(), rs.begin(), rs.end());
    }
    table.rows.push_back(row_of(agent, "total", all));
  }
  return table;
}

std::string to_csv(const MetricsTable& table) {
  std::ostringstream os;
  os << "agent,category,n,success_pct,dphi_mean,dphi_se,dtheta_mean,dtheta_se,dr_mean,dr_se\n";
  char buf[512];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.agent.c_str(), r.category.c_str(), r.n, r.success_pct, r.dphi_mean, r.dphi_se,
                  r.dtheta_mean, r.dtheta_se, r.dr_mean, r.dr_se);
    os << buf;
  }
  return os.str();
}

MetricsTable parse_csv(std::string_view text) {
  MetricsTable table;
  std::istringstream is{std::string(text)};
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("agent,", 0) == 0) continue;
    }
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 10) throw Error(ErrorCode::Io, "malformed metrics row: " + line);
    MetricRow r;
    try {
      r.agent = f[0];
      r.category = f[1];
      r.n = std::stoi(f[2]);
      r.success_pct = std::stod(f[3]);
      r.dphi_mean = std::stod(f[4]);
      r.dphi_se = std::stod(f[5]);
      r.dtheta_mean = std::stod(f[6]);
      r.dtheta_se = std::stod(f[7]);
      r.dr_mean = std::stod(f[8]);
      r.dr_se = std::stod(f[9]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::Io, "malformed metrics row: " + line);
    }
    table.rows.push_back(std::move(r));
  }
  return table;
}

std::string to_text(const MetricsTable& table) {
  std::ostringstream os;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-16s %-16s %5s %9s %17s %17s %17s\n", "agent", "category", "n",
                "success%", "dphi (rad)", "dtheta (rad)", "dr (m)");
  os << buf;
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf,
                  "%-16s %-16s %5d %9.1f %8.3f +- %-5.3f %8.3f +- %-5.3f %8.3f +- %-5.3f\n",
                  r.agent.c_str(), r.category.c_str(), r.n, r.success_pct, r.dphi_mean, r.dphi_se,
                  r.dtheta_mean, r.dtheta_se, r.dr_mean, r.dr_se);
    os << buf;
  }
  return os.str();
}

ExplorationResult run_exploration(const SceneSpec& scene, const RunSettings& settings,
                                  std::uint64_t seed, int steps, EpisodeTrace* trace,
                                  const TraceOptions& topt) {
  const auto& ctx = settings.ctx;
  Rng perception(mix_seed(seed, 1));
  AifPolicy agent(ctx, std::nullopt, mix_seed(seed, 2));
  if (trace != nullptr) {
    trace->agent = "aif-explore";
    trace->steps.clear();
    agent.set_record_updates(true);
  }

  ExplorationResult res;
  for (const auto& o : scene.objects) res.categories.push_back(o.category);
  auto total_entropy = [&] {
    double h = 0.0;
    for (int k : res.categories) h += agent.bank()[k].position.entropy();
    return h;
  };
  res.total_entropy.push_back(total_entropy());

  EnvState env = reset_env(scene);
  for (int t = 0; t < steps && !env.done; ++t) {
    const ObservationBundle obs = observe(env.scene, ctx.catalog, env.camera, ctx.model, ctx.noise, perception);
    const Action a = agent.act(env, obs);
    res.total_entropy.push_back(total_entropy());
    if (trace != nullptr) {
      TraceStep ts;
      ts.step = env.step_count;
      ts.camera = env.camera;
      if (agent.plan()) ts.efe = agent.plan()->efe;
      ts.replanned = agent.replanned_last_step();
      for (int k : agent.tracked()) {
        ts.beliefs.push_back(snapshot_of(k, agent.bank()[k].position, topt.particles_per_belief));
      }
      ts.free_energy = free_energy_step(agent.last_records());
      trace->steps.push_back(std::move(ts));
    }
    env = apply_action(std::move(env), a, ctx.catalog, ctx.workspace);
  }
  for (int k : res.categories) {
    const Vec3 m = agent.bank()[k].position.mean();
    res.final_means.push_back(m);
    res.final_errors.push_back((m - scene.at(k).position).norm());
  }
  return res;
}

}  // namespace viewseek
