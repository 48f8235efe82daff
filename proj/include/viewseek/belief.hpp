#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "viewseek/geometry.hpp"
#include "viewseek/perception.hpp"
#include "viewseek/random.hpp"
#include "viewseek/scene.hpp"

namespace viewseek {

struct Bounds {
  Vec3 lo{-0.5, -0.5, 0.0};
  Vec3 hi{0.5, 0.5, 0.2};

  bool contains(const Vec3& p) const;
  Vec3 clamp(const Vec3& p) const;
};

/// Fixed 20x20x10 binning of a belief volume; degenerate axes collapse to one bin.
class HistogramGrid {
 public:
  explicit HistogramGrid(const Bounds& b, int nx = 20, int ny = 20, int nz = 10);

  int bin(double x, double y, double z) const;
  int bin(const Vec3& p) const { return bin(p.x(), p.y(), p.z()); }
  int size() const { return nx_ * ny_ * nz_; }

 private:
  int axis_index(double v, double lo, double inv_width, int n) const;
  Vec3 lo_;
  Vec3 inv_width_;
  int nx_, ny_, nz_;
};

/// Shannon entropy in nats of a (not necessarily normalized) mass vector; zeros skipped.
double entropy_of(std::span<const double> masses);

using SparseHistogram = std::vector<std::pair<int, double>>;

struct BeliefConfig {
  int num_particles = 10000;
  double depth_spread = 0.1973 / 2.0;
  double lateral_spread = 0.02;
  bool spreads_are_std = false;  // read the two spreads as standard deviations instead of variances
  double jitter_std = 0.00025;
  double resample_threshold = 0.5;  // resample when ESS < threshold * N
  double negative_evidence_weight = 1e-5;
  double kde_bandwidth = 0.05;
  Bounds bounds;

  double depth_variance() const { return spreads_are_std ? depth_spread * depth_spread : depth_spread; }
  double lateral_variance() const {
    return spreads_are_std ? lateral_spread * lateral_spread : lateral_spread;
  }
  void validate() const;
};

/// Gaussian ellipsoid along a back-projected ray.
struct RayLikelihood {
  Ray ray;
  double depth_mean = 0.4;
  double variance_depth = 0.1973 / 2.0;
  double variance_lateral = 0.02;

  Vec3 mean() const { return ray.at(depth_mean); }
};

double detection_likelihood(const RayLikelihood& rl, const Vec3& p);

RayLikelihood ray_likelihood(const Detection& d, const CameraPose& camera, const CameraModel& model,
                             const BeliefConfig& cfg);

enum class UpdateStatus { Ok, Degenerate };

/// Weighted particle approximation of one object's position.
class ParticleBelief {
 public:
  ParticleBelief(std::vector<Vec3> particles, std::vector<double> weights, const Bounds& bounds);

  static ParticleBelief init_uniform(const Bounds& bounds, int n, Rng& rng);

  std::size_t size() const { return particles_.size(); }
  const std::vector<Vec3>& particles() const { return particles_; }
  const std::vector<double>& weights() const { return weights_; }
  const Bounds& bounds() const { return bounds_; }

  double effective_sample_size() const;
  Vec3 mean() const;
  Mat3 covariance() const;

  std::vector<double> histogram() const;
  SparseHistogram sparse_histogram() const;
  double entropy() const;
  /// Gaussian kernel density estimate of the weighted particle set.
  double density_at(const Vec3& p, double bandwidth = 0.05) const;

  /// Posterior predictive of a detection: sum_i w_i * L(x_i).
  double marginal_likelihood(const RayLikelihood& rl) const;

  UpdateStatus update_detection(const RayLikelihood& rl);
  /// Particles in view and closer than `nearest_depth` drop to `floor_weight`
  /// (never raised) before renormalization.
  UpdateStatus update_no_detection(const CameraPose& camera, const CameraModel& model,
                                   double nearest_depth, double floor_weight = 1e-5);
  void predict_jitter(double stddev, Rng& rng);
  void resample_systematic(Rng& rng);
  bool resample_if_needed(Rng& rng, double threshold_fraction = 0.5);

  /// Deterministic equal-weight subsample by systematic selection with a fixed offset.
  std::vector<Vec3> systematic_subsample(int m) const;

 private:
  void normalize();
  void set_uniform_weights();

  std::vector<Vec3> particles_;
  std::vector<double> weights_;
  Bounds bounds_;
};

/// Running circular estimate of an object's yaw.
class YawBelief {
 public:
  static constexpr double kMaxDispersion = kPi;

  double mean() const;
  /// Standard error of the circular mean; kMaxDispersion when uninformed.
  double dispersion() const;
  int count() const { return count_; }
  bool informative() const { return count_ > 0; }

  YawBelief with_sample(double yaw, double sample_std) const;

 private:
  double sum_cos_ = 0.0;
  double sum_sin_ = 0.0;
  double sum_var_ = 0.0;
  int count_ = 0;
};

YawBelief update_yaw(const YawBelief& yb, const Detection& d, const CameraPose& camera,
                     const Vec3& believed_position, const Symmetry& symmetry);

struct CategoryBelief {
  ParticleBelief position;
  YawBelief yaw;
  bool has_estimate = false;
};

/// Per-update bookkeeping used to assemble free-energy diagnostics.
struct UpdateRecord {
  int category = 0;
  SparseHistogram prior;
  SparseHistogram posterior;
  std::optional<double> detection_nll;
  double posterior_entropy = 0.0;
  bool degenerate = false;
};

/// One observation step for a single category: positive or negative evidence,
/// yaw update, jitter, and resampling when the ESS drops below threshold.
UpdateStatus integrate_observation(CategoryBelief& belief, const Detection* detection,
                                   const CameraPose& camera, const CameraModel& model,
                                   const Symmetry& symmetry, const BeliefConfig& cfg, Rng& rng,
                                   UpdateRecord* record = nullptr);

class BeliefBank {
 public:
  BeliefBank(const Catalog& catalog, const BeliefConfig& cfg, Rng& rng);

  std::size_t size() const { return entries_.size(); }
  CategoryBelief& operator[](int category) { return entries_.at(category); }
  const CategoryBelief& operator[](int category) const { return entries_.at(category); }

  /// Integrates a bundle into every category; returns one record per category
  /// when `records` is non-null.
  void integrate(const ObservationBundle& obs, const CameraModel& model, const Catalog& catalog,
                 const BeliefConfig& cfg, Rng& rng, std::vector<UpdateRecord>* records = nullptr);

  double total_entropy() const;

 private:
  std::vector<CategoryBelief> entries_;
};

}  // namespace viewseek
