#pragma once

// Synthetic stand-in for robot self-exploration data and human gesture
// recordings. Everything here is a pure function of its inputs and seed.

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "affgest/domain.hpp"
#include "affgest/gesture.hpp"

namespace affgest {

/// Seeded generator with distribution code written out explicitly, so that a
/// seed produces the same stream on every standard library. The engine is
/// std::mt19937_64, whose output sequence is fixed by the C++ standard.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  /// Standard normal via Box-Muller (one variate per call).
  double normal();
  /// Index drawn with probability proportional to `weights`.
  std::size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

/// Ground-truth effect distribution p(ObjVel | Action, Shape, Size).
struct WorldTable {
  using Key = std::array<std::string, 3>;  // action, shape, size
  std::map<Key, std::vector<double>> effect_dist;

  /// Qualitative desk physics: tapped spheres roll fast (faster when small),
  /// tapped boxes slide slowly, touched objects barely move, grasped objects
  /// are lifted at medium speed.
  static WorldTable standard();

  const std::vector<double>& row(std::string_view action, std::string_view shape,
                                 std::string_view size) const;
  void validate() const;
};

struct WordChoice {
  std::string word;
  double weight = 1.0;
};

/// Templated verbal descriptions. Template tokens of the form {action},
/// {shape}, {size} and {effect} are slots; lexicon keys are
/// "action=<a>", "shape=<s>", "size=<z>" and "effect=<a>,<objvel>,<s>".
struct UtteranceGrammar {
  std::vector<std::vector<std::string>> templates;
  std::map<std::string, std::vector<WordChoice>> lexicon;

  static UtteranceGrammar standard();
  static std::string effect_key(std::string_view action, std::string_view objvel,
                                std::string_view shape);

  /// Throws kInvalidArgument if a slot value has no choices or weights are
  /// not normalized.
  void validate() const;
  /// Every word an utterance can contain.
  std::set<std::string> words() const;
  /// Samples a template and fills its slots.
  std::string utter(const ExperimentRecord& record, Rng& rng) const;
};

struct ActionKinematics {
  Vec3 start_offset{};          // start point relative to the object (m)
  double start_spread = 0.0;    // half-width of the uniform start box (m)
  double duration_min = 1.0;    // motion time, excluding dwell (s)
  double duration_max = 1.0;
  double dwell_min = 0.0;       // time spent at the object (s)
  double dwell_max = 0.0;
};

struct GestureParams {
  ActionKinematics grasp;
  ActionKinematics tap;
  ActionKinematics touch;
  Vec3 torso{0.0, 0.0, 1.2};           // world position of the torso (m)
  Vec3 object_offset{0.0, 0.45, -0.30};  // object relative to torso (m)
  double object_spread = 0.05;
  double amplitude_min = 0.8;          // scaling of the hand excursion
  double amplitude_max = 1.25;
  double noise_sigma = 0.005;          // per-frame hand noise (m)
  double torso_jitter = 0.002;         // per-frame torso noise (m)
  double frame_rate = 30.0;

  static GestureParams standard();
  const ActionKinematics& kinematics(std::string_view action) const;
  void validate() const;
};

struct GeneratedGesture {
  Trajectory trajectory;
  Vec3 object;  // world position the gesture is aimed at
};

GeneratedGesture generate_gesture(std::string_view action, const GestureParams& params,
                                  std::uint64_t seed);

/// grasp: approach from above, stop at the object, lift. tap: lateral sweep
/// through the object at constant speed. touch: approach, hold on the object,
/// retract along the approach path.
Trajectory generate_trajectory(std::string_view action, const GestureParams& params,
                               std::uint64_t seed);

struct Corpus {
  std::vector<ExperimentRecord> records;
  std::vector<Trajectory> trajectories;  // trajectories[i] performs records[i].action
};

/// Record i is drawn from Rng(seed + i): uniform action, shape and size,
/// objvel from the table, one utterance, then a trajectory seed.
std::vector<ExperimentRecord> generate_records(std::size_t n, const WorldTable& table,
                                               const UtteranceGrammar& grammar,
                                               std::uint64_t seed);

Corpus generate_corpus(std::size_t n, const WorldTable& table, const UtteranceGrammar& grammar,
                       const GestureParams& params, std::uint64_t seed);

}  // namespace affgest
