#include "viewseek/belief.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "viewseek/errors.hpp"

namespace viewseek {

bool Bounds::contains(const Vec3& p) const {
  return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
}

Vec3 Bounds::clamp(const Vec3& p) const { return p.cwiseMax(lo).cwiseMin(hi); }

HistogramGrid::HistogramGrid(const Bounds& b, int nx, int ny, int nz)
    : lo_(b.lo), nx_(nx), ny_(ny), nz_(nz) {
  const Vec3 extent = b.hi - b.lo;
  const int n[3] = {nx, ny, nz};
  for (int i = 0; i < 3; ++i) inv_width_[i] = extent[i] > 0.0 ? n[i] / extent[i] : 0.0;
}

int HistogramGrid::axis_index(double v, double lo, double inv_width, int n) const {
  const int i = static_cast<int>(std::floor((v - lo) * inv_width));
  return std::clamp(i, 0, n - 1);
}

int HistogramGrid::bin(double x, double y, double z) const {
  const int ix = axis_index(x, lo_.x(), inv_width_.x(), nx_);
  const int iy = axis_index(y, lo_.y(), inv_width_.y(), ny_);
  const int iz = axis_index(z, lo_.z(), inv_width_.z(), nz_);
  return (iz * ny_ + iy) * nx_ + ix;
}

double entropy_of(std::span<const double> masses) {
  double total = 0.0;
  for (double m : masses) total += m;
  if (!(total > 0.0)) return 0.0;
  double h = 0.0;
  for (double m : masses) {
    if (m > 0.0) {
      const double p = m / total;
      h -= p * std::log(p);
    }
  }
  return h;
}

void BeliefConfig::validate() const {
  if (num_particles < 1) throw Error(ErrorCode::Config, "num_particles must be >= 1");
  if (!(depth_spread > 0.0) || !(lateral_spread > 0.0)) {
    throw Error(ErrorCode::Config, "likelihood spreads must be positive");
  }
  if (jitter_std < 0.0) throw Error(ErrorCode::Config, "jitter_std must be non-negative");
  if (resample_threshold < 0.0 || resample_threshold > 1.0) {
    throw Error(ErrorCode::Config, "resample_threshold must lie in [0, 1]");
  }
  if (!(negative_evidence_weight >= 0.0)) {
    throw Error(ErrorCode::Config, "negative_evidence_weight must be non-negative");
  }
  if (!(kde_bandwidth > 0.0)) throw Error(ErrorCode::Config, "kde_bandwidth must be positive");
  if ((bounds.hi.array() < bounds.lo.array()).any()) {
    throw Error(ErrorCode::Config, "belief bounds are inverted");
  }
}

double detection_likelihood(const RayLikelihood& rl, const Vec3& p) {
  const Vec3 d = p - rl.mean();
  const double along = d.dot(rl.ray.direction);
  const double lateral2 = std::max(0.0, d.squaredNorm() - along * along);
  const double norm = std::pow(kTwoPi, -1.5) /
                      std::sqrt(rl.variance_depth * rl.variance_lateral * rl.variance_lateral);
  return norm * std::exp(-0.5 * (along * along / rl.variance_depth + lateral2 / rl.variance_lateral));
}

RayLikelihood ray_likelihood(const Detection& d, const CameraPose& camera, const CameraModel& model,
                             const BeliefConfig& cfg) {
  RayLikelihood rl;
  rl.ray = backproject(camera, model, d.pixel_center);
  rl.depth_mean = distance_from_scale(d.scale);
  rl.variance_depth = cfg.depth_variance();
  rl.variance_lateral = cfg.lateral_variance();
  return rl;
}

ParticleBelief::ParticleBelief(std::vector<Vec3> particles, std::vector<double> weights,
                               const Bounds& bounds)
    : particles_(std::move(particles)), weights_(std::move(weights)), bounds_(bounds) {
  if (particles_.empty()) throw Error(ErrorCode::InvalidArgument, "belief needs at least one particle");
  if (weights_.size() != particles_.size()) {
    throw Error(ErrorCode::InvalidArgument, "particle and weight counts differ");
  }
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidArgument, "bad weight");
  }
  normalize();
}

ParticleBelief ParticleBelief::init_uniform(const Bounds& bounds, int n, Rng& rng) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "N must be >= 1");
  std::vector<Vec3> ps;
  ps.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double x = uniform(rng, bounds.lo.x(), bounds.hi.x());
    const double y = uniform(rng, bounds.lo.y(), bounds.hi.y());
    const double z = bounds.hi.z() > bounds.lo.z() ? uniform(rng, bounds.lo.z(), bounds.hi.z())
                                                   : bounds.lo.z();
    ps.emplace_back(x, y, z);
  }
  return ParticleBelief(std::move(ps), std::vector<double>(n, 1.0 / n), bounds);
}

void ParticleBelief::set_uniform_weights() {
  std::fill(weights_.begin(), weights_.end(), 1.0 / static_cast<double>(weights_.size()));
}

void ParticleBelief::normalize() {
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) {
    set_uniform_weights();
    return;
  }
  for (double& w : weights_) w /= total;
}

double ParticleBelief::effective_sample_size() const {
  double s = 0.0;
  for (double w : weights_) s += w * w;
  return 1.0 / s;
}

Vec3 ParticleBelief::mean() const {
  Vec3 m = Vec3::Zero();
  for (std::size_t i = 0; i < size(); ++i) m += weights_[i] * particles_[i];
  return m;
}

Mat3 ParticleBelief::covariance() const {
  const Vec3 m = mean();
  Mat3 c = Mat3::Zero();
  for (std::size_t i = 0; i < size(); ++i) {
    const Vec3 d = particles_[i] - m;
    c += weights_[i] * d * d.transpose();
  }
  return c;
}

std::vector<double> ParticleBelief::histogram() const {
  const HistogramGrid grid(bounds_);
  std::vector<double> h(grid.size(), 0.0);
  for (std::size_t i = 0; i < size(); ++i) h[grid.bin(particles_[i])] += weights_[i];
  return h;
}

SparseHistogram ParticleBelief::sparse_histogram() const {
  const std::vector<double> h = histogram();
  SparseHistogram out;
  for (int b = 0; b < static_cast<int>(h.size()); ++b) {
    if (h[b] > 0.0) out.emplace_back(b, h[b]);
  }
  return out;
}

double ParticleBelief::entropy() const {
  const std::vector<double> h = histogram();
  return entropy_of(h);
}

double ParticleBelief::density_at(const Vec3& p, double bandwidth) const {
  const double inv2h2 = 0.5 / (bandwidth * bandwidth);
  const double norm = std::pow(kTwoPi * bandwidth * bandwidth, -1.5);
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    s += weights_[i] * std::exp(-(particles_[i] - p).squaredNorm() * inv2h2);
  }
  return norm * s;
}

double ParticleBelief::marginal_likelihood(const RayLikelihood& rl) const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) s += weights_[i] * detection_likelihood(rl, particles_[i]);
  return s;
}

UpdateStatus ParticleBelief::update_detection(const RayLikelihood& rl) {
  double total = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    weights_[i] *= detection_likelihood(rl, particles_[i]);
    total += weights_[i];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    set_uniform_weights();
    return UpdateStatus::Degenerate;
  }
  for (double& w : weights_) w /= total;
  return UpdateStatus::Ok;
}

UpdateStatus ParticleBelief::update_no_detection(const CameraPose& camera, const CameraModel& model,
                                                 double nearest_depth, double floor_weight) {
  const FrustumTest frustum(camera, model);
  std::size_t affected = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    const Vec3& p = particles_[i];
    if (frustum.contains(p) && (p - camera.position).norm() < nearest_depth) {
      weights_[i] = std::min(weights_[i], floor_weight);
      ++affected;
    }
  }
  if (affected == size()) {
    set_uniform_weights();
    return UpdateStatus::Degenerate;
  }
  if (affected > 0) normalize();
  return UpdateStatus::Ok;
}

void ParticleBelief::predict_jitter(double stddev, Rng& rng) {
  if (stddev <= 0.0) return;
  std::normal_distribution<double> n(0.0, stddev);
  for (Vec3& p : particles_) {
    p = bounds_.clamp(Vec3(p.x() + n(rng), p.y() + n(rng), p.z() + n(rng)));
  }
}

void ParticleBelief::resample_systematic(Rng& rng) {
  const std::size_t n = size();
  const double step = 1.0 / static_cast<double>(n);
  const double start = uniform(rng, 0.0, step);
  std::vector<Vec3> out;
  out.reserve(n);
  double cumulative = weights_[0];
  std::size_t i = 0;
  for (std::size_t m = 0; m < n; ++m) {
    const double u = start + m * step;
    while (u > cumulative && i + 1 < n) cumulative += weights_[++i];
    out.push_back(particles_[i]);
  }
  particles_ = std::move(out);
  set_uniform_weights();
}

bool ParticleBelief::resample_if_needed(Rng& rng, double threshold_fraction) {
  if (effective_sample_size() >= threshold_fraction * static_cast<double>(size())) return false;
  resample_systematic(rng);
  return true;
}

std::vector<Vec3> ParticleBelief::systematic_subsample(int m) const {
  std::vector<Vec3> out;
  if (m <= 0) return out;
  out.reserve(m);
  const double step = 1.0 / m;
  double cumulative = weights_[0];
  std::size_t i = 0;
  for (int k = 0; k < m; ++k) {
    const double u = (k + 0.5) * step;
    while (u > cumulative && i + 1 < size()) cumulative += weights_[++i];
    out.push_back(particles_[i]);
  }
  return out;
}

double YawBelief::mean() const { return count_ == 0 ? 0.0 : std::atan2(sum_sin_, sum_cos_); }

double YawBelief::dispersion() const {
  if (count_ == 0) return kMaxDispersion;
  const double n = count_;
  const double resultant = std::min(1.0, std::hypot(sum_cos_, sum_sin_) / n);
  const double spread = resultant <= 0.0 ? std::numeric_limits<double>::infinity()
                                         : -2.0 * std::log(resultant);
  const double disp = std::sqrt((spread + sum_var_ / n) / n);
  return std::min(disp, kMaxDispersion);
}

YawBelief YawBelief::with_sample(double yaw, double sample_std) const {
  YawBelief out = *this;
  out.sum_cos_ += std::cos(yaw);
  out.sum_sin_ += std::sin(yaw);
  out.sum_var_ += sample_std * sample_std;
  ++out.count_;
  return out;
}

YawBelief update_yaw(const YawBelief& yb, const Detection& d, const CameraPose& camera,
                     const Vec3& believed_position, const Symmetry& symmetry) {
  if (symmetry.is_continuous()) return yb;
  const Spherical s = spherical_about(camera.position, believed_position);
  return yb.with_sample(wrap_angle(s.azimuth - d.pose.azimuth), d.pose.azimuth_std);
}

UpdateStatus integrate_observation(CategoryBelief& belief, const Detection* detection,
                                   const CameraPose& camera, const CameraModel& model,
                                   const Symmetry& symmetry, const BeliefConfig& cfg, Rng& rng,
                                   UpdateRecord* record) {
  ParticleBelief& pb = belief.position;
  if (record != nullptr) record->prior = pb.sparse_histogram();

  UpdateStatus status;
  if (detection != nullptr) {
    const RayLikelihood rl = ray_likelihood(*detection, camera, model, cfg);
    if (record != nullptr) {
      record->detection_nll = -std::log(std::max(pb.marginal_likelihood(rl), 1e-300));
    }
    status = pb.update_detection(rl);
    belief.has_estimate = true;
    belief.yaw = update_yaw(belief.yaw, *detection, camera, pb.mean(), symmetry);
  } else {
    const double depth = belief.has_estimate ? (pb.mean() - camera.position).norm()
                                             : std::numeric_limits<double>::infinity();
    status = pb.update_no_detection(camera, model, depth, cfg.negative_evidence_weight);
  }

  if (record != nullptr) {
    record->posterior = pb.sparse_histogram();
    record->posterior_entropy = pb.entropy();
    record->degenerate = status == UpdateStatus::Degenerate;
  }
  pb.predict_jitter(cfg.jitter_std, rng);
  pb.resample_if_needed(rng, cfg.resample_threshold);
  return status;
}

BeliefBank::BeliefBank(const Catalog& catalog, const BeliefConfig& cfg, Rng& rng) {
  entries_.reserve(catalog.size());
  for (std::size_t k = 0; k < catalog.size(); ++k) {
    entries_.push_back({ParticleBelief::init_uniform(cfg.bounds, cfg.num_particles, rng), {}, false});
  }
}

void BeliefBank::integrate(const ObservationBundle& obs, const CameraModel& model,
                           const Catalog& catalog, const BeliefConfig& cfg, Rng& rng,
                           std::vector<UpdateRecord>* records) {
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    UpdateRecord rec;
    rec.category = static_cast<int>(k);
    integrate_observation(entries_[k], obs.get(static_cast<int>(k)), obs.camera, model,
                          catalog[k].symmetry, cfg, rng, records ? &rec : nullptr);
    if (records != nullptr) records->push_back(std::move(rec));
  }
}

double BeliefBank::total_entropy() const {
  double h = 0.0;
  for (const auto& e : entries_) h += e.position.entropy();
  return h;
}

}  // namespace viewseek
