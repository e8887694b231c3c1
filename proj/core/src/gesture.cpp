#include "affgest/gesture.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <numeric>

#include "affgest/error.hpp"

namespace affgest {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kStochasticTolerance = 1e-12;
constexpr double kMinOccupancy = 1e-12;

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

double log_sum_exp(std::span<const double> xs) {
  double hi = kNegInf;
  for (double x : xs) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - hi);
  return hi + std::log(s);
}

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

}  // namespace

// ---------------------------------------------------------------------------
// Trajectories

Trajectory::Trajectory(std::vector<TrajectoryFrame> frames) : frames_(std::move(frames)) {
  if (frames_.size() < 2) invalid("a trajectory needs at least two frames");
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    const auto& f = frames_[i];
    bool finite = std::isfinite(f.t);
    for (int d = 0; d < 3; ++d) finite = finite && std::isfinite(f.hand[d]) && std::isfinite(f.torso[d]);
    if (!finite) invalid("trajectory frame " + std::to_string(i) + " is not finite");
    if (i > 0 && !(f.t > frames_[i - 1].t)) {
      invalid("trajectory timestamps must increase strictly (frame " + std::to_string(i) + ")");
    }
  }
}

FeatureSequence preprocess(const Trajectory& trajectory, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) invalid("sample rate must be positive");
  const auto& frames = trajectory.frames();
  const double t0 = frames.front().t;
  const double span = trajectory.duration();
  const auto count = static_cast<std::size_t>(std::floor(span * rate + 1e-9)) + 1;
  if (count < 2) {
    throw Error(ErrorCode::kTooShort, "trajectory of " + std::to_string(span) +
                                          " s yields fewer than two samples at " +
                                          std::to_string(rate) + " Hz");
  }

  FeatureSequence seq;
  seq.rate = rate;
  seq.samples.reserve(count);
  std::size_t k = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = std::min(t0 + static_cast<double>(i) / rate, frames.back().t);
    while (k + 2 < frames.size() && frames[k + 1].t < t) ++k;
    const auto& a = frames[k];
    const auto& b = frames[k + 1];
    const double u = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
    Vec3 rel{};
    for (int d = 0; d < 3; ++d) {
      const double ra = a.hand[d] - a.torso[d];
      const double rb = b.hand[d] - b.torso[d];
      rel[d] = ra + u * (rb - ra);
    }
    seq.samples.push_back(rel);
  }

  double peak = 0.0;
  for (const auto& s : seq.samples) peak = std::max(peak, norm(s));
  if (peak < 1e-9) {
    throw Error(ErrorCode::kDegenerateTrajectory, "hand coincides with torso throughout");
  }
  for (auto& s : seq.samples) {
    for (double& x : s) x /= peak;
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Emissions

double GaussianMixture::component_log_density(std::size_t m, const Vec3& x) const {
  constexpr double log_two_pi = 1.8378770664093454835606594728112;
  double acc = 0.0;
  for (int d = 0; d < 3; ++d) {
    const double diff = x[d] - means[m][d];
    acc += log_two_pi + std::log(variances[m][d]) + diff * diff / variances[m][d];
  }
  return -0.5 * acc;
}

double GaussianMixture::log_density(const Vec3& x) const {
  std::vector<double> terms(components());
  for (std::size_t m = 0; m < components(); ++m) {
    terms[m] = weights[m] > 0.0 ? std::log(weights[m]) + component_log_density(m, x) : kNegInf;
  }
  return log_sum_exp(terms);
}

void GestureHmm::validate() const {
  const std::size_t q = states();
  if (q == 0) invalid("HMM '" + label + "' has no states");
  if (trans.size() != q || initial.size() != q) invalid("HMM '" + label + "' has inconsistent sizes");
  for (std::size_t i = 0; i < q; ++i) {
    if (trans[i].size() != q) invalid("HMM '" + label + "' transition row has wrong width");
    double sum = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
      const double a = trans[i][j];
      if (!(a >= 0.0)) invalid("HMM '" + label + "' has a negative transition");
      if (a != 0.0 && j != i && j != i + 1) invalid("HMM '" + label + "' violates the left-right mask");
      sum += a;
    }
    if (std::abs(sum - 1.0) > kStochasticTolerance) invalid("HMM '" + label + "' row does not sum to 1");
    if (initial[i] != (i == 0 ? 1.0 : 0.0)) invalid("HMM '" + label + "' must start in state 0");
  }
  if (trans[q - 1][q - 1] != 1.0) invalid("HMM '" + label + "' final state must be absorbing");
  for (const auto& g : emissions) {
    const std::size_t m = g.components();
    if (m == 0 || g.means.size() != m || g.variances.size() != m) {
      invalid("HMM '" + label + "' has a malformed mixture");
    }
    double sum = 0.0;
    for (double w : g.weights) {
      if (!(w >= 0.0)) invalid("HMM '" + label + "' has a negative mixture weight");
      sum += w;
    }
    if (std::abs(sum - 1.0) > kStochasticTolerance) invalid("HMM '" + label + "' mixture weights do not sum to 1");
    for (const auto& v : g.variances) {
      for (double x : v) {
        if (!(x >= kVarianceFloor)) invalid("HMM '" + label + "' variance below floor");
      }
    }
    for (const auto& mu : g.means) {
      for (double x : mu) {
        if (!std::isfinite(x)) invalid("HMM '" + label + "' has a non-finite mean");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Scoring

double forward_log_likelihood(const GestureHmm& model, const FeatureSequence& seq) {
  if (seq.samples.empty()) invalid("cannot score an empty sequence");
  const std::size_t q = model.states();
  std::vector<double> alpha(q), next(q), terms;
  terms.reserve(q);
  for (std::size_t i = 0; i < q; ++i) {
    alpha[i] = model.initial[i] > 0.0
                   ? std::log(model.initial[i]) + model.emissions[i].log_density(seq.samples[0])
                   : kNegInf;
  }
  for (std::size_t t = 1; t < seq.samples.size(); ++t) {
    for (std::size_t j = 0; j < q; ++j) {
      terms.clear();
      for (std::size_t i = 0; i < q; ++i) {
        if (model.trans[i][j] > 0.0 && alpha[i] != kNegInf) {
          terms.push_back(alpha[i] + std::log(model.trans[i][j]));
        }
      }
      const double in = log_sum_exp(terms);
      next[j] = in == kNegInf ? kNegInf : in + model.emissions[j].log_density(seq.samples[t]);
    }
    std::swap(alpha, next);
  }
  return log_sum_exp(alpha);
}

namespace {

/// Per-sequence emission table: log b_i(x_t) and component terms
/// log w_im + log N_im(x_t).
struct EmissionTable {
  std::vector<std::vector<double>> state;                   // [t][i]
  std::vector<std::vector<std::vector<double>>> component;  // [t][i][m]
};

EmissionTable emission_table(const GestureHmm& model, const FeatureSequence& seq) {
  const std::size_t q = model.states();
  EmissionTable e;
  e.state.assign(seq.samples.size(), std::vector<double>(q));
  e.component.assign(seq.samples.size(), std::vector<std::vector<double>>(q));
  for (std::size_t t = 0; t < seq.samples.size(); ++t) {
    for (std::size_t i = 0; i < q; ++i) {
      const auto& g = model.emissions[i];
      auto& terms = e.component[t][i];
      terms.resize(g.components());
      for (std::size_t m = 0; m < g.components(); ++m) {
        terms[m] = g.weights[m] > 0.0 ? std::log(g.weights[m]) + g.component_log_density(m, seq.samples[t])
                                      : kNegInf;
      }
      e.state[t][i] = log_sum_exp(terms);
    }
  }
  return e;
}

/// Scaled forward pass. Each frame's emissions are shifted by the largest
/// log-weight reachable in that frame so the scale factor is at least one;
/// states the chain cannot occupy are masked out.
struct ScaledForward {
  std::vector<std::vector<double>> alpha;    // normalized, [t][i]
  std::vector<std::vector<double>> scaled_b;  // exp(log b - shift), masked, [t][i]
  std::vector<double> scale;                 // s_t
  double log_likelihood = 0.0;
};

ScaledForward scaled_forward(const GestureHmm& model, const EmissionTable& e) {
  const std::size_t q = model.states();
  const std::size_t len = e.state.size();
  ScaledForward f;
  f.alpha.assign(len, std::vector<double>(q, 0.0));
  f.scaled_b.assign(len, std::vector<double>(q, 0.0));
  f.scale.assign(len, 0.0);

  std::vector<double> predicted(q);
  for (std::size_t t = 0; t < len; ++t) {
    if (t == 0) {
      predicted = model.initial;
    } else {
      std::fill(predicted.begin(), predicted.end(), 0.0);
      for (std::size_t i = 0; i < q; ++i) {
        if (f.alpha[t - 1][i] == 0.0) continue;
        for (std::size_t j = i; j < std::min(q, i + 2); ++j) predicted[j] += f.alpha[t - 1][i] * model.trans[i][j];
      }
    }
    double shift = kNegInf;
    for (std::size_t j = 0; j < q; ++j) {
      if (predicted[j] > 0.0) shift = std::max(shift, std::log(predicted[j]) + e.state[t][j]);
    }
    if (shift == kNegInf) {
      f.log_likelihood = kNegInf;
      return f;
    }
    double s = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
      if (predicted[j] > 0.0) {
        f.scaled_b[t][j] = std::exp(e.state[t][j] - shift);
        f.alpha[t][j] = std::exp(std::log(predicted[j]) + e.state[t][j] - shift);
        s += f.alpha[t][j];
      }
    }
    for (double& a : f.alpha[t]) a /= s;
    f.scale[t] = s;
    f.log_likelihood += std::log(s) + shift;
  }
  return f;
}

}  // namespace

double scaled_forward_log_likelihood(const GestureHmm& model, const FeatureSequence& seq) {
  if (seq.samples.empty()) invalid("cannot score an empty sequence");
  return scaled_forward(model, emission_table(model, seq)).log_likelihood;
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct Moments {
  Vec3 mean{};
  Vec3 var{};
  std::size_t count = 0;
};

Moments moments(const std::vector<const Vec3*>& pool) {
  Moments m;
  m.count = pool.size();
  if (pool.empty()) return m;
  for (const Vec3* x : pool) {
    for (int d = 0; d < 3; ++d) m.mean[d] += (*x)[d];
  }
  for (double& v : m.mean) v /= static_cast<double>(pool.size());
  for (const Vec3* x : pool) {
    for (int d = 0; d < 3; ++d) {
      const double diff = (*x)[d] - m.mean[d];
      m.var[d] += diff * diff;
    }
  }
  for (double& v : m.var) v /= static_cast<double>(pool.size());
  return m;
}

GestureHmm initial_model(std::span<const FeatureSequence> sequences, const HmmTrainingOptions& opt,
                         const std::string& label) {
  const std::size_t q = opt.states;
  const std::size_t mix = opt.mixtures;

  std::vector<std::vector<const Vec3*>> pools(q);
  std::vector<const Vec3*> everything;
  double total_len = 0.0;
  for (const auto& seq : sequences) {
    const std::size_t len = seq.samples.size();
    total_len += static_cast<double>(len);
    for (std::size_t t = 0; t < len; ++t) {
      pools[std::min(q - 1, t * q / len)].push_back(&seq.samples[t]);
      everything.push_back(&seq.samples[t]);
    }
  }
  const Moments global = moments(everything);

  GestureHmm hmm;
  hmm.label = label;
  hmm.initial.assign(q, 0.0);
  hmm.initial[0] = 1.0;

  const double segment = total_len / static_cast<double>(sequences.size()) / static_cast<double>(q);
  const double stay = std::clamp(1.0 - 1.0 / segment, 0.5, 0.95);
  hmm.trans.assign(q, std::vector<double>(q, 0.0));
  for (std::size_t i = 0; i + 1 < q; ++i) {
    hmm.trans[i][i] = stay;
    hmm.trans[i][i + 1] = 1.0 - stay;
  }
  hmm.trans[q - 1][q - 1] = 1.0;

  for (std::size_t i = 0; i < q; ++i) {
    Moments mo = pools[i].empty() ? global : moments(pools[i]);
    for (double& v : mo.var) v = std::max(v, kVarianceFloor);
    const auto axis = static_cast<std::size_t>(std::max_element(mo.var.begin(), mo.var.end()) - mo.var.begin());
    const double sd = std::sqrt(mo.var[axis]);

    GaussianMixture g;
    g.weights.assign(mix, 1.0 / static_cast<double>(mix));
    for (std::size_t m = 0; m < mix; ++m) {
      const double offset = mix == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(m) / static_cast<double>(mix - 1);
      Vec3 mu = mo.mean;
      mu[axis] += offset * sd;
      g.means.push_back(mu);
      g.variances.push_back(mo.var);
    }
    hmm.emissions.push_back(std::move(g));
  }
  return hmm;
}

/// Sufficient statistics for one re-estimation. Component sums are centred on
/// the current means for numerical stability.
struct Accumulators {
  std::vector<double> occupancy;                    // [i]
  std::vector<std::array<double, 2>> transitions;   // [i] {stay, advance}
  std::vector<std::vector<double>> comp_occ;        // [i][m]
  std::vector<std::vector<Vec3>> comp_first;        // [i][m]
  std::vector<std::vector<Vec3>> comp_second;       // [i][m]

  explicit Accumulators(const GestureHmm& model) {
    const std::size_t q = model.states();
    occupancy.assign(q, 0.0);
    transitions.assign(q, {0.0, 0.0});
    comp_occ.resize(q);
    comp_first.resize(q);
    comp_second.resize(q);
    for (std::size_t i = 0; i < q; ++i) {
      const std::size_t mix = model.emissions[i].components();
      comp_occ[i].assign(mix, 0.0);
      comp_first[i].assign(mix, Vec3{});
      comp_second[i].assign(mix, Vec3{});
    }
  }
};

/// Forward-backward over one sequence; adds its statistics and returns its
/// log-likelihood.
double accumulate(const GestureHmm& model, const FeatureSequence& seq, Accumulators& acc) {
  const std::size_t q = model.states();
  const std::size_t len = seq.samples.size();
  const EmissionTable e = emission_table(model, seq);
  const ScaledForward f = scaled_forward(model, e);
  if (!std::isfinite(f.log_likelihood)) return f.log_likelihood;

  std::vector<std::vector<double>> beta(len, std::vector<double>(q, 0.0));
  for (std::size_t i = 0; i < q; ++i) beta[len - 1][i] = f.alpha[len - 1][i] > 0.0 ? 1.0 : 0.0;
  for (std::size_t t = len - 1; t-- > 0;) {
    for (std::size_t i = 0; i < q; ++i) {
      if (f.alpha[t][i] == 0.0) continue;
      double b = 0.0;
      for (std::size_t j = i; j < std::min(q, i + 2); ++j) {
        b += model.trans[i][j] * f.scaled_b[t + 1][j] * beta[t + 1][j];
      }
      beta[t][i] = b / f.scale[t + 1];
    }
  }

  for (std::size_t t = 0; t < len; ++t) {
    const Vec3& x = seq.samples[t];
    for (std::size_t i = 0; i < q; ++i) {
      const double gamma = f.alpha[t][i] * beta[t][i];
      if (gamma <= 0.0) continue;
      acc.occupancy[i] += gamma;
      if (t + 1 < len) {
        const double common = f.alpha[t][i] / f.scale[t + 1];
        acc.transitions[i][0] += common * model.trans[i][i] * f.scaled_b[t + 1][i] * beta[t + 1][i];
        if (i + 1 < q) {
          acc.transitions[i][1] +=
              common * model.trans[i][i + 1] * f.scaled_b[t + 1][i + 1] * beta[t + 1][i + 1];
        }
      }
      const auto& g = model.emissions[i];
      for (std::size_t m = 0; m < g.components(); ++m) {
        const double r = gamma * std::exp(e.component[t][i][m] - e.state[t][i]);
        if (r <= 0.0) continue;
        acc.comp_occ[i][m] += r;
        for (int d = 0; d < 3; ++d) {
          const double diff = x[d] - g.means[m][d];
          acc.comp_first[i][m][d] += r * diff;
          acc.comp_second[i][m][d] += r * diff * diff;
        }
      }
    }
  }
  return f.log_likelihood;
}

GestureHmm reestimate(const GestureHmm& model, const Accumulators& acc) {
  const std::size_t q = model.states();
  GestureHmm next = model;
  for (std::size_t i = 0; i < q; ++i) {
    if (acc.occupancy[i] < kMinOccupancy) throw CollapsedStateError(model.label, i);

    if (i + 1 < q) {
      const double out = acc.transitions[i][0] + acc.transitions[i][1];
      if (out > 0.0) {
        next.trans[i][i] = acc.transitions[i][0] / out;
        next.trans[i][i + 1] = 1.0 - next.trans[i][i];
      }
    }

    const auto& g = model.emissions[i];
    auto& ng = next.emissions[i];
    const double occ = std::accumulate(acc.comp_occ[i].begin(), acc.comp_occ[i].end(), 0.0);
    for (std::size_t m = 0; m < g.components(); ++m) {
      const double n = acc.comp_occ[i][m];
      ng.weights[m] = n / occ;
      if (n <= 0.0) continue;  // dead component keeps its last shape with weight 0
      for (int d = 0; d < 3; ++d) {
        const double shift = acc.comp_first[i][m][d] / n;
        ng.means[m][d] = g.means[m][d] + shift;
        ng.variances[m][d] = std::max(acc.comp_second[i][m][d] / n - shift * shift, kVarianceFloor);
      }
    }
    // Renormalize so rounding never pushes the weights off the simplex.
    const double wsum = std::accumulate(ng.weights.begin(), ng.weights.end(), 0.0);
    for (double& w : ng.weights) w /= wsum;
  }
  return next;
}

}  // namespace

HmmTrainingResult train_hmm(std::span<const FeatureSequence> sequences,
                            const HmmTrainingOptions& options, std::string label) {
  if (sequences.empty()) {
    throw Error(ErrorCode::kEmptyTrainingSet, "no training sequences for '" + label + "'");
  }
  if (options.states < 1 || options.mixtures < 1) invalid("HMM needs at least one state and one mixture");
  if (options.max_iters < 0) invalid("max_iters must be non-negative");
  for (const auto& s : sequences) {
    if (s.samples.empty()) invalid("training sequence for '" + label + "' is empty");
  }

  HmmTrainingResult result;
  result.model = initial_model(sequences, options, label);

  double previous = 0.0;
  for (int iter = 0;; ++iter) {
    Accumulators acc(result.model);
    double total = 0.0;
    for (const auto& s : sequences) total += accumulate(result.model, s, acc);
    result.log_likelihood_trace.push_back(total);

    if (!std::isfinite(total)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "training data for '" + label + "' has zero likelihood under the model");
    }
    if (iter > 0) {
      const double improvement = (total - previous) / std::max(std::abs(previous), 1e-300);
      if (improvement < options.tol) {
        result.converged = true;
        break;
      }
    }
    if (iter == options.max_iters) break;
    previous = total;
    result.model = reestimate(result.model, acc);
    result.iterations = iter + 1;
  }
  result.model.validate();
  return result;
}

// ---------------------------------------------------------------------------
// Model sets and classification

const GestureHmm& GestureModelSet::model(std::string_view label) const {
  for (const auto& m : models) {
    if (m.label == label) return m;
  }
  throw UnknownLabelError("action", std::string(label));
}

void GestureModelSet::validate() const {
  const auto& dom = action_domain();
  if (models.size() != dom.size()) invalid("model set needs exactly one HMM per action");
  for (std::size_t i = 0; i < dom.size(); ++i) {
    if (models[i].label != dom.value(i)) invalid("model set is not in canonical action order");
    models[i].validate();
  }
  if (priors.labels != dom.values() || priors.probs.size() != dom.size()) {
    invalid("model set priors must cover the action domain");
  }
  double sum = 0.0;
  for (double p : priors.probs) {
    if (!(p >= 0.0)) invalid("negative prior");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) invalid("priors do not sum to 1");
  if (!(feature_rate > 0.0)) invalid("feature rate must be positive");
}

ModelSetTrainingResult train_model_set(
    const std::map<std::string, std::vector<FeatureSequence>>& sequences,
    const HmmTrainingOptions& options, double feature_rate) {
  const auto& dom = action_domain();
  for (const auto& [label, _] : sequences) dom.require(label, "action");

  std::vector<std::future<HmmTrainingResult>> jobs;
  for (const auto& label : dom.values()) {
    auto it = sequences.find(label);
    if (it == sequences.end() || it->second.empty()) {
      throw Error(ErrorCode::kEmptyTrainingSet, "no training sequences for '" + label + "'");
    }
    jobs.push_back(std::async(std::launch::async, [&options, &seqs = it->second, label] {
      return train_hmm(seqs, options, label);
    }));
  }

  ModelSetTrainingResult out;
  out.models.priors = LabelDistribution::uniform(dom);
  out.models.feature_rate = feature_rate;
  // Collect every job before rethrowing so no thread outlives its inputs.
  std::vector<std::exception_ptr> errors;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      auto run = jobs[i].get();
      out.models.models.push_back(run.model);
      out.runs.emplace(dom.value(i), std::move(run));
    } catch (...) {
      errors.push_back(std::current_exception());
    }
  }
  if (!errors.empty()) std::rethrow_exception(errors.front());
  return out;
}

LabelDistribution posterior_from_log_likelihoods(std::span<const double> log_likelihoods,
                                                 const LabelDistribution& priors) {
  if (log_likelihoods.size() != priors.probs.size()) invalid("one log-likelihood per label required");
  std::vector<double> scores(log_likelihoods.size());
  for (std::size_t a = 0; a < scores.size(); ++a) {
    scores[a] = priors.probs[a] > 0.0 ? log_likelihoods[a] + std::log(priors.probs[a]) : kNegInf;
  }
  const double top = *std::max_element(scores.begin(), scores.end());
  if (!std::isfinite(top)) invalid("no label has positive posterior mass");
  LabelDistribution out{priors.variable, priors.labels, std::vector<double>(scores.size())};
  double z = 0.0;
  for (std::size_t a = 0; a < scores.size(); ++a) z += out.probs[a] = std::exp(scores[a] - top);
  for (double& p : out.probs) p /= z;
  return out;
}

LabelDistribution classify(const GestureModelSet& models, const FeatureSequence& seq) {
  if (seq.samples.empty()) invalid("cannot classify an empty sequence");
  std::vector<double> ll;
  ll.reserve(models.models.size());
  for (const auto& m : models.models) ll.push_back(forward_log_likelihood(m, seq));
  return posterior_from_log_likelihoods(ll, models.priors);
}

}  // namespace affgest
