#include "viewseek/planning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <unordered_map>

#include "viewseek/errors.hpp"

namespace viewseek {

namespace {



// Mutual information between bin and detection outcome given per-bin masses
// inside and outside the frustum.
double binary_mi(std::span<const double> in, std::span<const double> out, double prior_h,
                 double tpr, double fpr) {
  double p_det = 0.0, h_det = 0.0, h_miss = 0.0, p_miss = 0.0;
  for (std::size_t b = 0; b < in.size(); ++b) {
    p_det += tpr * in[b] + fpr * out[b];
    p_miss += (1.0 - tpr) * in[b] + (1.0 - fpr) * out[b];
  }
  if (p_det > 0.0) {
    for (std::size_t b = 0; b < in.size(); ++b) {
      const double m = (tpr * in[b] + fpr * out[b]) / p_det;
      if (m > 0.0) h_det -= m * std::log(m);
    }
  }
  if (p_miss > 0.0) {
    for (std::size_t b = 0; b < in.size(); ++b) {
      const double m = ((1.0 - tpr) * in[b] + (1.0 - fpr) * out[b]) / p_miss;
      if (m > 0.0) h_miss -= m * std::log(m);
    }
  }
  const double total = p_det + p_miss;
  return prior_h - (p_det / total) * h_det - (p_miss / total) * h_miss;
}

Vec3 draw_from_belief(const ParticleBelief& b, const std::vector<double>& cdf, Rng& rng) {
  const double u = uniform(rng, 0.0, cdf.back());
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const std::size_t i = std::min<std::size_t>(it - cdf.begin(), b.size() - 1);
  return b.particles()[i];
}

}  // namespace

WrappedNormal::WrappedNormal(double sd)
    : sd_(sd),
      inv_var_half_(0.5 / (sd * sd)),
      log_norm_(-std::log(sd) - 0.5 * std::log(kTwoPi)),
      flat_(!(sd < kPi)) {}

double WrappedNormal::operator()(double angle) const {
  if (flat_) return -std::log(kTwoPi);
  const double d = wrap_angle(angle);
  // Images more than 12 sd away vanish in double precision.
  if (kPi - std::abs(d) > 12.0 * sd_) return log_norm_ - d * d * inv_var_half_;
  double s = 0.0;
  for (int k = -3; k <= 3; ++k) {
    const double z = d + kTwoPi * k;
    s += std::exp(-z * z * inv_var_half_);
  }
  return std::log(s) + log_norm_;
}

void PlannerConfig::validate() const {
  if (num_candidates < 1) throw Error(ErrorCode::Config, "num_candidates must be >= 1");
  if (replan_interval < 1) throw Error(ErrorCode::Config, "replan_interval must be >= 1");
  if (!(step_size > 0.0)) throw Error(ErrorCode::Config, "step_size must be positive");
  if (!(importance_mix >= 0.0 && importance_mix <= 1.0)) {
    throw Error(ErrorCode::Config, "importance_mix must lie in [0, 1]");
  }
  if (!(range_min > 0.0 && range_max >= range_min)) {
    throw Error(ErrorCode::Config, "candidate range bounds are invalid");
  }
  if (!(elevation_min >= 0.0 && elevation_max <= 0.5 * kPi && elevation_max >= elevation_min)) {
    throw Error(ErrorCode::Config, "candidate elevation bounds are invalid");
  }
  if (!(scale_std > 0.0) || !(pose_std > 0.0)) {
    throw Error(ErrorCode::Config, "preference spreads must be positive");
  }
  if (scale_samples < 1) throw Error(ErrorCode::Config, "scale_samples must be >= 1");
  if (!(log_floor > 0.0)) throw Error(ErrorCode::Config, "log_floor must be positive");
  if (planning_particles < 0) throw Error(ErrorCode::Config, "planning_particles must be >= 0");
}

GoalBeliefs infer_goal(const GoalSpec& goal, const SceneSpec& scene, const Catalog& catalog,
                       const CameraModel& model, const NoiseConfig& noise, Rng& rng) {
  const CameraPose view = goal_camera_pose(goal, scene);
  const ObjectInstance& obj = scene.at(goal.target_category);

  // The goal image is a clean, unoccluded shot of the target.
  NoiseConfig n = noise;
  n.true_positive_rate = 1.0;
  n.false_positive_rate = 0.0;
  n.occlusion_enabled = false;
  SceneSpec only_target;
  only_target.objects.push_back(obj);
  const ObservationBundle obs = observe(only_target, catalog, view, model, n, rng);
  const Detection* d = obs.get(goal.target_category);

  GoalBeliefs g;
  g.target = goal.target_category;
  g.scale = scale_from_distance(goal.range);
  if (d != nullptr) {
    g.azimuth = d->pose.azimuth;
    g.elevation = d->pose.elevation;
  } else {
    g.azimuth = goal.azimuth;
    g.elevation = goal.elevation;
  }
  return g;
}

std::vector<Viewpoint> sample_candidates(const BeliefBank& bank, const GoalBeliefs* goal,
                                         const PlannerConfig& cfg, Rng& rng, const Workspace& ws) {
  if (cfg.num_candidates < 1) throw Error(ErrorCode::InvalidArgument, "num_candidates must be >= 1");
  if (bank.size() == 0) throw Error(ErrorCode::InvalidArgument, "belief bank is empty");

  std::vector<int> sources;
  if (goal != nullptr) {
    sources.push_back(goal->target);
  } else {
    for (int k = 0; k < static_cast<int>(bank.size()); ++k) sources.push_back(k);
  }
  std::vector<std::vector<double>> cdfs;
  for (int k : sources) {
    const auto& w = bank[k].position.weights();
    std::vector<double> c(w.size());
    std::partial_sum(w.begin(), w.end(), c.begin());
    cdfs.push_back(std::move(c));
  }
  const Bounds& table = bank[sources.front()].position.bounds();

  std::vector<Viewpoint> out;
  out.reserve(cfg.num_candidates);
  const long budget = 10L * cfg.num_candidates;
  long draws = 0;
  while (static_cast<int>(out.size()) < cfg.num_candidates) {
    Vec3 lookat;
    if (uniform(rng, 0.0, 1.0) < cfg.importance_mix) {
      std::size_t s = 0;
      if (sources.size() > 1) {
        s = std::uniform_int_distribution<std::size_t>(0, sources.size() - 1)(rng);
      }
      lookat = draw_from_belief(bank[sources[s]].position, cdfs[s], rng);
    } else {
      lookat = Vec3(uniform(rng, table.lo.x(), table.hi.x()), uniform(rng, table.lo.y(), table.hi.y()),
                    uniform(rng, table.lo.z(), table.hi.z()));
    }
    while (true) {
      if (++draws > budget) {
        throw Error(ErrorCode::PlacementFailure, "candidate sampling budget exhausted");
      }
      const double r = uniform(rng, cfg.range_min, cfg.range_max);
      const double el = uniform(rng, cfg.elevation_min, cfg.elevation_max);
      const double az = uniform(rng, -kPi, kPi);
      if (ws.contains(from_spherical(lookat, r, el, az))) {
        out.emplace_back(lookat, r, el, az);
        break;
      }
    }
  }
  return out;
}

double info_gain(const ParticleBelief& b, const Viewpoint& v, const CameraModel& model,
                 const NoiseConfig& noise) {
  const HistogramGrid grid(b.bounds());
  const FrustumTest frustum(viewpoint_to_camera_pose(v), model);
  std::unordered_map<int, int> index;
  std::vector<double> in, out;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const Vec3& p = b.particles()[i];
    const auto [it, fresh] = index.try_emplace(grid.bin(p), static_cast<int>(in.size()));
    if (fresh) {
      in.push_back(0.0);
      out.push_back(0.0);
    }
    (frustum.contains(p) ? in : out)[it->second] += b.weights()[i];
  }
  std::vector<double> prior(in.size());
  for (std::size_t k = 0; k < in.size(); ++k) prior[k] = in[k] + out[k];
  return binary_mi(in, out, entropy_of(prior), noise.true_positive_rate, noise.false_positive_rate);
}

EfeScorer::Snapshot EfeScorer::make_snapshot(const ParticleBelief& b, int m) {
  Snapshot s;
  if (m > 0 && static_cast<std::size_t>(m) < b.size()) {
    s.particles = b.systematic_subsample(m);
    s.weights.assign(s.particles.size(), 1.0 / m);
  } else {
    s.particles = b.particles();
    s.weights = b.weights();
    const double total = std::accumulate(s.weights.begin(), s.weights.end(), 0.0);
    for (double& w : s.weights) w /= total;
  }
  const HistogramGrid grid(b.bounds());
  std::unordered_map<int, int> index;
  s.bins.reserve(s.particles.size());
  std::vector<double> mass;
  for (std::size_t i = 0; i < s.particles.size(); ++i) {
    const auto [it, fresh] = index.try_emplace(grid.bin(s.particles[i]), static_cast<int>(mass.size()));
    if (fresh) mass.push_back(0.0);
    mass[it->second] += s.weights[i];
    s.bins.push_back(it->second);
  }
  for (const Vec3& p : s.particles) {
    s.xs.push_back(p.x());
    s.ys.push_back(p.y());
    s.zs.push_back(p.z());
  }
  s.num_bins = static_cast<int>(mass.size());
  s.entropy = entropy_of(mass);
  s.sum_plogp = 0.0;
  for (double m : mass) s.sum_plogp += m > 0.0 ? m * std::log(m) : 0.0;
  s.mass = std::move(mass);
  return s;
}

EfeScorer::EfeScorer(const BeliefBank& bank, const Catalog& catalog, const GoalBeliefs* goal,
                     const PlannerConfig& cfg, const CameraModel& model, const NoiseConfig& noise,
                     const BeliefConfig& belief_cfg)
    : cfg_(cfg),
      model_(model),
      noise_(noise),
      kde_bandwidth_(belief_cfg.kde_bandwidth),
      exploring_(goal == nullptr || !cfg.utility_enabled) {
  if (goal != nullptr) {
    if (goal->target < 0 || goal->target >= static_cast<int>(bank.size())) {
      throw Error(ErrorCode::UnknownCategory, "goal category has no belief");
    }
    goal_ = *goal;
    symmetry_ = category_of(catalog, goal->target).symmetry;
    yaw_ = bank[goal->target].yaw;
    yaw_mean_ = yaw_.mean();
    flat_azimuth_ = symmetry_.is_continuous() || !yaw_.informative();
    elevation_pref_ = WrappedNormal(cfg.pose_std);
    azimuth_pref_ = WrappedNormal(std::hypot(cfg.pose_std, yaw_.dispersion()));
    scale_log_norm_ = -std::log(cfg.scale_std) - 0.5 * std::log(kTwoPi);
  }
  kde_norm_ = std::pow(kTwoPi * kde_bandwidth_ * kde_bandwidth_, -1.5);
  if (exploring_) {
    for (std::size_t k = 0; k < bank.size(); ++k) {
      snapshots_.push_back(make_snapshot(bank[static_cast<int>(k)].position, cfg.planning_particles));
    }
  } else {
    const ParticleBelief& pb = bank[goal->target].position;
    snapshots_.push_back(make_snapshot(pb, cfg.planning_particles));
    utility_samples_ = pb.systematic_subsample(cfg.scale_samples);
  }
  int widest = 0;
  std::size_t most = 0;
  for (const auto& s : snapshots_) {
    widest = std::max(widest, s.num_bins);
    most = std::max(most, s.particles.size());
  }
  inside_.resize(most);
  scratch_in_.assign(widest, 0.0);
  touched_.reserve(widest);
}

double EfeScorer::snapshot_info_gain(const Snapshot& s, const FrustumTest& frustum) const {
  // Only bins holding in-view particles differ from the prior; the rest are
  // folded in through the precomputed prior sums.
  touched_.clear();
  const std::size_t n = s.particles.size();
  frustum.mark(s.xs.data(), s.ys.data(), s.zs.data(), n, inside_.data());
  for (std::size_t i = 0; i < n; ++i) {
    if (!inside_[i]) continue;
    const int b = s.bins[i];
    if (scratch_in_[b] == 0.0) touched_.push_back(b);
    scratch_in_[b] += s.weights[i];
  }
  auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
  const double tpr = noise_.true_positive_rate, fpr = noise_.false_positive_rate;
  double in_total = 0.0, touched_mass = 0.0, touched_plogp = 0.0, det_sum = 0.0, miss_sum = 0.0;
  for (int b : touched_) {
    const double in = scratch_in_[b];
    const double out = std::max(0.0, s.mass[b] - in);
    in_total += in;
    touched_mass += s.mass[b];
    touched_plogp += xlogx(s.mass[b]);
    det_sum += xlogx(tpr * in + fpr * out);
    miss_sum += xlogx((1.0 - tpr) * in + (1.0 - fpr) * out);
    scratch_in_[b] = 0.0;
  }
  const double rest_mass = std::max(0.0, 1.0 - touched_mass);
  const double rest_plogp = s.sum_plogp - touched_plogp;
  if (fpr > 0.0) det_sum += fpr * rest_plogp + fpr * std::log(fpr) * rest_mass;
  if (fpr < 1.0) miss_sum += (1.0 - fpr) * rest_plogp + (1.0 - fpr) * std::log(1.0 - fpr) * rest_mass;
  const double p_det = tpr * in_total + fpr * (1.0 - in_total);
  return s.entropy + det_sum + miss_sum - xlogx(p_det) - xlogx(1.0 - p_det);
}

EfeBreakdown EfeScorer::score(const Viewpoint& v) const {
  EfeBreakdown e;
  const CameraPose cam = viewpoint_to_camera_pose(v);
  const FrustumTest frustum(cam, model_);
  for (const auto& s : snapshots_) e.info_gain += snapshot_info_gain(s, frustum);

  if (!exploring_) {
    const Snapshot& s = snapshots_.front();
    const double inv2h2 = 0.5 / (kde_bandwidth_ * kde_bandwidth_);
    // Kernels beyond 8 bandwidths weigh less than exp(-32) and sit below the log floor.
    const double cutoff2 = 64.0 * kde_bandwidth_ * kde_bandwidth_;
    const double lx = v.lookat().x(), ly = v.lookat().y(), lz = v.lookat().z();
    double kde = 0.0;
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      const double dx = s.xs[i] - lx, dy = s.ys[i] - ly, dz = s.zs[i] - lz;
      const double r2 = dx * dx + dy * dy + dz * dz;
      if (r2 < cutoff2) kde += s.weights[i] * std::exp(-r2 * inv2h2);
    }
    kde *= kde_norm_;
    e.position_utility = std::log(kde + cfg_.log_floor);

    const Vec3 c = cam.position;
    const double inv_scale_sd = 1.0 / cfg_.scale_std;
    double scale_sq = 0.0, pose_sum = 0.0;
    for (const Vec3& p : utility_samples_) {
      const double dx = c.x() - p.x(), dy = c.y() - p.y(), dz = c.z() - p.z();
      const double horizontal = std::sqrt(dx * dx + dy * dy);
      const double d = std::max(std::sqrt(horizontal * horizontal + dz * dz), cfg_.log_floor);
      const double zs = (0.4 / d - goal_.scale) * inv_scale_sd;
      scale_sq += zs * zs;
      double pose = elevation_pref_(std::atan2(dz, horizontal) - goal_.elevation);
      if (!flat_azimuth_) {
        const double az = horizontal <= 1e-12 * d ? 0.0 : std::atan2(dy, dx);
        pose += azimuth_pref_(symmetry_.reduce(az - yaw_mean_ - goal_.azimuth));
      }
      pose_sum += pose;
    }
    const double n = static_cast<double>(utility_samples_.size());
    e.scale_utility = -0.5 * scale_sq / n + scale_log_norm_;
    e.pose_utility = pose_sum / n + (flat_azimuth_ ? -std::log(kTwoPi) : 0.0);
    e.total = -(cfg_.w_position * e.position_utility + cfg_.w_scale * e.scale_utility +
                cfg_.w_pose * e.pose_utility);
  }
  e.total -= cfg_.w_info * e.info_gain;
  return e;
}

EfeBreakdown score_efe(const BeliefBank& bank, const Viewpoint& v, const GoalBeliefs* goal,
                       const PlannerConfig& cfg, const CameraModel& model, const NoiseConfig& noise,
                       const Catalog& catalog, const BeliefConfig& belief_cfg) {
  return EfeScorer(bank, catalog, goal, cfg, model, noise, belief_cfg).score(v);
}

int argmin_total(const std::vector<double>& totals) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(totals.size()); ++i) {
    if (totals[i] < totals[best]) best = i;
  }
  return best;
}

Selection select_from(const std::vector<Viewpoint>& candidates, const EfeScorer& scorer) {
  if (candidates.empty()) throw Error(ErrorCode::EmptyInput, "no candidates to select from");
  Selection best;
  best.efe.total = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
    const EfeBreakdown e = scorer.score(candidates[i]);
    if (i == 0 || e.total < best.efe.total) {
      best.viewpoint = candidates[i];
      best.efe = e;
      best.index = i;
    }
  }
  return best;
}

Selection select_target_viewpoint(const BeliefBank& bank, const GoalBeliefs* goal,
                                  const PlannerConfig& cfg, const CameraModel& model,
                                  const NoiseConfig& noise, Rng& rng, const Catalog& catalog,
                                  const BeliefConfig& belief_cfg, const Workspace& ws) {
  const GoalBeliefs* g = cfg.utility_enabled ? goal : nullptr;
  const auto candidates = sample_candidates(bank, g, cfg, rng, ws);
  const EfeScorer scorer(bank, catalog, g, cfg, model, noise, belief_cfg);
  return select_from(candidates, scorer);
}

namespace {

// Rotation part of an action: the largest slerp fraction toward `desired`
// whose Euler components stay inside the action bounds.
Action make_action(const CameraPose& current, const Vec3& dpos, const Mat3& desired) {
  const Eigen::Quaterniond q0(current.orientation);
  const Eigen::Quaterniond q1(desired);
  auto euler_at = [&](double t) {
    const Mat3 r = q0.slerp(t, q1).toRotationMatrix();
    return matrix_to_euler_xyz(current.orientation.transpose() * r);
  };
  auto within = [](const Vec3& e) { return e.cwiseAbs().maxCoeff() <= Action::kLimit; };

  Vec3 drot = euler_at(1.0);
  if (!within(drot)) {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 50; ++i) {
      const double mid = 0.5 * (lo + hi);
      (within(euler_at(mid)) ? lo : hi) = mid;
    }
    drot = euler_at(lo);
  }
  Action a;
  a.dpos = dpos;
  a.drot = drot;
  return a;
}

}  // namespace

Action step_toward(const CameraPose& current, const CameraPose& target, double step_size) {
  const Vec3 delta = target.position - current.position;
  const double dist = delta.norm();
  const Vec3 dpos = dist > step_size ? Vec3(delta * (step_size / dist)) : delta;
  return make_action(current, dpos, target.orientation);
}

Action step_toward(const CameraPose& current, const Viewpoint& target, double step_size) {
  return step_toward(current, viewpoint_to_camera_pose(target), step_size);
}

}  // namespace viewseek
