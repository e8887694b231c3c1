#pragma once

// Gesture recognition: torso-centred, amplitude-normalized hand trajectories
// scored by one left-right Gaussian-mixture HMM per action class.

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "affgest/bayesnet.hpp"

namespace affgest {

using Vec3 = std::array<double, 3>;

struct TrajectoryFrame {
  double t = 0.0;  // seconds
  Vec3 hand{};     // meters
  Vec3 torso{};    // meters
};

/// Time-ordered hand and torso samples. At least two frames with strictly
/// increasing timestamps.
class Trajectory {
 public:
  explicit Trajectory(std::vector<TrajectoryFrame> frames);

  const std::vector<TrajectoryFrame>& frames() const noexcept { return frames_; }
  std::size_t size() const noexcept { return frames_.size(); }
  double duration() const { return frames_.back().t - frames_.front().t; }

 private:
  std::vector<TrajectoryFrame> frames_;
};

struct FeatureSequence {
  std::vector<Vec3> samples;
  double rate = 30.0;  // samples per second
};

inline constexpr double kDefaultFeatureRate = 30.0;

/// Hand relative to torso, linearly resampled to `rate` over the trajectory's
/// time span, then divided by the largest sample norm. Throws
/// kDegenerateTrajectory when the hand never leaves the torso and kTooShort
/// when fewer than two samples result.
FeatureSequence preprocess(const Trajectory& trajectory, double rate = kDefaultFeatureRate);

inline constexpr double kVarianceFloor = 1e-6;

/// Diagonal-covariance Gaussian mixture over 3D features.
struct GaussianMixture {
  std::vector<double> weights;
  std::vector<Vec3> means;
  std::vector<Vec3> variances;

  std::size_t components() const noexcept { return weights.size(); }
  double component_log_density(std::size_t m, const Vec3& x) const;
  double log_density(const Vec3& x) const;
};

/// Left-right (Bakis, no skips) HMM with GMM emissions for one gesture class.
/// The chain always starts in the first state.
struct GestureHmm {
  std::string label;
  std::vector<std::vector<double>> trans;
  std::vector<double> initial;
  std::vector<GaussianMixture> emissions;

  std::size_t states() const noexcept { return emissions.size(); }

  /// Throws kInvalidArgument unless every structural invariant holds: Bakis
  /// mask, stochastic rows, initial state one-hot on state 0, normalized
  /// mixture weights, variances at or above the floor.
  void validate() const;
};

/// log p(seq | model) via the forward recursion in log space.
double forward_log_likelihood(const GestureHmm& model, const FeatureSequence& seq);

/// Same quantity via the scaled recursion used inside training.
double scaled_forward_log_likelihood(const GestureHmm& model, const FeatureSequence& seq);

struct HmmTrainingOptions {
  std::size_t states = 5;
  std::size_t mixtures = 2;
  int max_iters = 100;
  double tol = 1e-6;  // relative log-likelihood improvement
};

struct HmmTrainingResult {
  GestureHmm model;
  /// Total log-likelihood of the training set before each re-estimation and
  /// after the last one.
  std::vector<double> log_likelihood_trace;
  int iterations = 0;
  bool converged = false;
};

/// Deterministic segmental initialization followed by multi-sequence
/// Baum-Welch. Throws kEmptyTrainingSet or CollapsedStateError.
HmmTrainingResult train_hmm(std::span<const FeatureSequence> sequences,
                            const HmmTrainingOptions& options, std::string label = {});

struct GestureModelSet {
  std::vector<GestureHmm> models;  // one per Action value, canonical order
  LabelDistribution priors;
  double feature_rate = kDefaultFeatureRate;

  const GestureHmm& model(std::string_view label) const;
  void validate() const;
};

struct ModelSetTrainingResult {
  GestureModelSet models;
  std::map<std::string, HmmTrainingResult> runs;
};

/// Trains one HMM per Action label, concurrently. `sequences` must hold at
/// least one sequence for every label. Priors are uniform.
ModelSetTrainingResult train_model_set(
    const std::map<std::string, std::vector<FeatureSequence>>& sequences,
    const HmmTrainingOptions& options, double feature_rate = kDefaultFeatureRate);

/// p(a | seq) proportional to exp(log-likelihood_a) * prior(a).
LabelDistribution posterior_from_log_likelihoods(std::span<const double> log_likelihoods,
                                                 const LabelDistribution& priors);

LabelDistribution classify(const GestureModelSet& models, const FeatureSequence& seq);

}  // namespace affgest
