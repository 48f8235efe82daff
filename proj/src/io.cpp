#include "viewseek/io.hpp"

#include <fstream>
#include <sstream>

#include "viewseek/errors.hpp"

namespace viewseek {

namespace {

Json vec(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::Config, "expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json mat(const Mat3& m) {
  Json rows = Json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(Json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

// Wraps nlohmann exceptions into the library's error type.
template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, e.what());
  }
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

Json to_json(const SceneSpec& scene) {
  Json objs = Json::array();
  for (const auto& o : scene.objects) {
    objs.push_back({{"category", o.category}, {"position", vec(o.position)}, {"yaw", o.yaw}});
  }
  return {{"objects", objs},
          {"table_color", {scene.table_color[0], scene.table_color[1], scene.table_color[2]}},
          {"seed", scene.seed}};
}

SceneSpec scene_from_json(const Json& j) {
  return guarded([&] {
    SceneSpec s;
    for (const auto& o : j.at("objects")) {
      s.objects.push_back({o.at("category").get<int>(), vec_from(o.at("position")), o.at("yaw").get<double>()});
    }
    if (j.contains("table_color")) {
      for (int i = 0; i < 3; ++i) s.table_color[i] = j.at("table_color").at(i).get<double>();
    }
    read_opt(j, "seed", s.seed);
    return s;
  });
}

Json to_json(const GoalSpec& goal) {
  return {{"target_category", goal.target_category},
          {"range", goal.range},
          {"elevation", goal.elevation},
          {"azimuth", goal.azimuth}};
}

GoalSpec goal_from_json(const Json& j) {
  return guarded([&] {
    GoalSpec g;
    g.target_category = j.at("target_category").get<int>();
    read_opt(j, "range", g.range);
    g.elevation = j.at("elevation").get<double>();
    g.azimuth = j.at("azimuth").get<double>();
    return g;
  });
}

Json suite_to_json(const std::vector<SuiteRecord>& suite) {
  Json arr = Json::array();
  for (const auto& r : suite) {
    arr.push_back({{"id", r.id}, {"seed", r.seed}, {"scene", to_json(r.scene)}, {"goal", to_json(r.goal)}});
  }
  return arr;
}

std::vector<SuiteRecord> suite_from_json(const Json& j) {
  return guarded([&] {
    if (!j.is_array()) throw Error(ErrorCode::Config, "suite must be a JSON array");
    std::vector<SuiteRecord> out;
    for (const auto& e : j) {
      SuiteRecord r;
      r.id = e.at("id").get<int>();
      read_opt(e, "seed", r.seed);
      r.scene = scene_from_json(e.at("scene"));
      r.goal = goal_from_json(e.at("goal"));
      if (r.scene.find(r.goal.target_category) == nullptr) {
        throw Error(ErrorCode::Config, "suite record " + std::to_string(r.id) + ": target not in scene");
      }
      out.push_back(std::move(r));
    }
    return out;
  });
}

std::string dump_suite(const std::vector<SuiteRecord>& suite) { return suite_to_json(suite).dump(2) + "\n"; }

Json to_json(const EpisodeResult& r) {
  return {{"scene_id", r.scene_id},
          {"target", r.target},
          {"agent", r.agent},
          {"success", r.success},
          {"steps", r.steps},
          {"dphi", r.dphi},
          {"dtheta", r.dtheta},
          {"dr", r.dr},
          {"translation_error", r.translation_error},
          {"rotation_error", r.rotation_error},
          {"trajectory_length", r.trajectory_length},
          {"seed", r.seed}};
}

EpisodeResult result_from_json(const Json& j) {
  return guarded([&] {
    EpisodeResult r;
    r.scene_id = j.at("scene_id").get<int>();
    r.target = j.at("target").get<int>();
    r.agent = j.at("agent").get<std::string>();
    r.success = j.at("success").get<bool>();
    r.steps = j.at("steps").get<int>();
    r.dphi = j.at("dphi").get<double>();
    r.dtheta = j.at("dtheta").get<double>();
    r.dr = j.at("dr").get<double>();
    read_opt(j, "translation_error", r.translation_error);
    read_opt(j, "rotation_error", r.rotation_error);
    read_opt(j, "trajectory_length", r.trajectory_length);
    read_opt(j, "seed", r.seed);
    return r;
  });
}

Json results_to_json(const std::vector<EpisodeResult>& results) {
  Json arr = Json::array();
  for (const auto& r : results) arr.push_back(to_json(r));
  return arr;
}

std::vector<EpisodeResult> results_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::Config, "results must be a JSON array");
  std::vector<EpisodeResult> out;
  for (const auto& e : j) out.push_back(result_from_json(e));
  return out;
}

Json to_json(const EfeBreakdown& e) {
  return {{"position_utility", e.position_utility},
          {"scale_utility", e.scale_utility},
          {"pose_utility", e.pose_utility},
          {"info_gain", e.info_gain},
          {"total", e.total}};
}

Json to_json(const EpisodeTrace& trace) {
  Json steps = Json::array();
  for (const auto& s : trace.steps) {
    Json beliefs = Json::array();
    for (const auto& b : s.beliefs) {
      Json pts = Json::array();
      for (const auto& p : b.particles) pts.push_back(vec(p));
      beliefs.push_back({{"category", b.category},
                         {"mean", vec(b.mean)},
                         {"covariance", mat(b.covariance)},
                         {"entropy", b.entropy},
                         {"particles", pts}});
    }
    Json fe = Json::array();
    for (std::size_t k = 0; k < s.free_energy.categories.size(); ++k) {
      Json e = {{"category", s.free_energy.categories[k]},
                {"kl", s.free_energy.kl[k]},
                {"entropy", s.free_energy.entropy[k]}};
      e["detection_nll"] = s.free_energy.nll[k] ? Json(*s.free_energy.nll[k]) : Json(nullptr);
      fe.push_back(e);
    }
    steps.push_back({{"step", s.step},
                     {"camera", {{"position", vec(s.camera.position)}, {"orientation", mat(s.camera.orientation)}}},
                     {"efe", s.efe ? to_json(*s.efe) : Json(nullptr)},
                     {"replanned", s.replanned},
                     {"beliefs", beliefs},
                     {"free_energy", fe}});
  }
  return {{"agent", trace.agent}, {"scene_id", trace.scene_id}, {"steps", steps}};
}

Json to_json(const ExplorationResult& r) {
  Json means = Json::array();
  for (const auto& m : r.final_means) means.push_back(vec(m));
  return {{"total_entropy", r.total_entropy},
          {"categories", r.categories},
          {"final_means", means},
          {"final_errors", r.final_errors}};
}

AgentContext context_from_json(const Json& j) {
  return guarded([&] {
    if (!j.is_object()) throw Error(ErrorCode::Config, "config must be a JSON object");
    AgentContext ctx;
    if (j.contains("noise")) {
      const Json& n = j.at("noise");
      auto& c = ctx.noise;
      read_opt(n, "pixel_noise_std", c.pixel_noise_std);
      read_opt(n, "scale_noise_rel_std", c.scale_noise_rel_std);
      read_opt(n, "pose_noise_std", c.pose_noise_std);
      read_opt(n, "true_positive_rate", c.true_positive_rate);
      read_opt(n, "false_positive_rate", c.false_positive_rate);
      read_opt(n, "occlusion_enabled", c.occlusion_enabled);
    }
    if (j.contains("planner")) {
      const Json& p = j.at("planner");
      auto& c = ctx.planner;
      read_opt(p, "num_candidates", c.num_candidates);
      read_opt(p, "replan_interval", c.replan_interval);
      read_opt(p, "step_size", c.step_size);
      read_opt(p, "importance_mix", c.importance_mix);
      read_opt(p, "w_position", c.w_position);
      read_opt(p, "w_scale", c.w_scale);
      read_opt(p, "w_pose", c.w_pose);
      read_opt(p, "w_info", c.w_info);
      read_opt(p, "utility_enabled", c.utility_enabled);
      read_opt(p, "range_min", c.range_min);
      read_opt(p, "range_max", c.range_max);
      read_opt(p, "elevation_min", c.elevation_min);
      read_opt(p, "elevation_max", c.elevation_max);
      read_opt(p, "scale_std", c.scale_std);
      read_opt(p, "pose_std", c.pose_std);
      read_opt(p, "scale_samples", c.scale_samples);
      read_opt(p, "log_floor", c.log_floor);
      read_opt(p, "planning_particles", c.planning_particles);
    }
    if (j.contains("belief")) {
      const Json& b = j.at("belief");
      auto& c = ctx.belief;
      read_opt(b, "num_particles", c.num_particles);
      read_opt(b, "depth_spread", c.depth_spread);
      read_opt(b, "lateral_spread", c.lateral_spread);
      read_opt(b, "spreads_are_std", c.spreads_are_std);
      read_opt(b, "jitter_std", c.jitter_std);
      read_opt(b, "resample_threshold", c.resample_threshold);
      read_opt(b, "negative_evidence_weight", c.negative_evidence_weight);
      read_opt(b, "kde_bandwidth", c.kde_bandwidth);
      if (b.contains("bounds_lo")) c.bounds.lo = vec_from(b.at("bounds_lo"));
      if (b.contains("bounds_hi")) c.bounds.hi = vec_from(b.at("bounds_hi"));
    }
    if (j.contains("env")) {
      const Json& e = j.at("env");
      read_opt(e, "workspace_half_extent", ctx.workspace.half_extent);
      read_opt(e, "workspace_min_z", ctx.workspace.min_z);
      read_opt(e, "workspace_max_z", ctx.workspace.max_z);
      read_opt(e, "image_width", ctx.model.width);
      read_opt(e, "image_height", ctx.model.height);
      read_opt(e, "vertical_fov", ctx.model.vertical_fov);
    }
    ctx.noise.validate();
    ctx.planner.validate();
    ctx.belief.validate();
    if (ctx.model.width < 1 || ctx.model.height < 1 || !(ctx.model.vertical_fov > 0.0 && ctx.model.vertical_fov < kPi)) {
      throw Error(ErrorCode::Config, "invalid camera model");
    }
    if (!(ctx.workspace.half_extent > 0.0) || !(ctx.workspace.max_z > ctx.workspace.min_z)) {
      throw Error(ErrorCode::Config, "invalid workspace");
    }
    return ctx;
  });
}

Json to_json(const AgentContext& ctx) {
  const auto& n = ctx.noise;
  const auto& p = ctx.planner;
  const auto& b = ctx.belief;
  return {
      {"noise",
       {{"pixel_noise_std", n.pixel_noise_std},
        {"scale_noise_rel_std", n.scale_noise_rel_std},
        {"pose_noise_std", n.pose_noise_std},
        {"true_positive_rate", n.true_positive_rate},
        {"false_positive_rate", n.false_positive_rate},
        {"occlusion_enabled", n.occlusion_enabled}}},
      {"planner",
       {{"num_candidates", p.num_candidates},
        {"replan_interval", p.replan_interval},
        {"step_size", p.step_size},
        {"importance_mix", p.importance_mix},
        {"w_position", p.w_position},
        {"w_scale", p.w_scale},
        {"w_pose", p.w_pose},
        {"w_info", p.w_info},
        {"utility_enabled", p.utility_enabled},
        {"range_min", p.range_min},
        {"range_max", p.range_max},
        {"elevation_min", p.elevation_min},
        {"elevation_max", p.elevation_max},
        {"scale_std", p.scale_std},
        {"pose_std", p.pose_std},
        {"scale_samples", p.scale_samples},
        {"log_floor", p.log_floor},
        {"planning_particles", p.planning_particles}}},
      {"belief",
       {{"num_particles", b.num_particles},
        {"depth_spread", b.depth_spread},
        {"lateral_spread", b.lateral_spread},
        {"spreads_are_std", b.spreads_are_std},
        {"jitter_std", b.jitter_std},
        {"resample_threshold", b.resample_threshold},
        {"negative_evidence_weight", b.negative_evidence_weight},
        {"kde_bandwidth", b.kde_bandwidth},
        {"bounds_lo", vec(b.bounds.lo)},
        {"bounds_hi", vec(b.bounds.hi)}}},
      {"env",
       {{"workspace_half_extent", ctx.workspace.half_extent},
        {"workspace_min_z", ctx.workspace.min_z},
        {"workspace_max_z", ctx.workspace.max_z},
        {"image_width", ctx.model.width},
        {"image_height", ctx.model.height},
        {"vertical_fov", ctx.model.vertical_fov}}}};
}

}  // namespace viewseek
