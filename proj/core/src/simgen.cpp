#include "affgest/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "affgest/error.hpp"

namespace affgest {

namespace {

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

}  // namespace

// ---------------------------------------------------------------------------
// Rng

std::size_t Rng::index(std::size_t n) {
  if (n == 0) invalid("cannot draw an index from an empty range");
  return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
}

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::categorical(std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) invalid("categorical draw needs positive total weight");
  const double u = uniform() * total;
  double cum = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    cum += weights[i];
    last = i;
    if (u < cum) return i;
  }
  return last;
}

// ---------------------------------------------------------------------------
// World table

WorldTable WorldTable::standard() {
  WorldTable t;
  auto set = [&](const char* a, const char* sh, const char* sz, std::vector<double> p) {
    t.effect_dist[{a, sh, sz}] = std::move(p);
  };
  // ObjVel order: slow, medium, fast.
  set("tap", "sphere", "small", {0.05, 0.10, 0.85});
  set("tap", "sphere", "medium", {0.05, 0.20, 0.75});
  set("tap", "sphere", "big", {0.10, 0.25, 0.65});
  set("tap", "box", "small", {0.60, 0.30, 0.10});
  set("tap", "box", "medium", {0.70, 0.22, 0.08});
  set("tap", "box", "big", {0.80, 0.15, 0.05});
  set("touch", "sphere", "small", {0.80, 0.15, 0.05});
  set("touch", "sphere", "medium", {0.85, 0.10, 0.05});
  set("touch", "sphere", "big", {0.90, 0.07, 0.03});
  set("touch", "box", "small", {0.88, 0.08, 0.04});
  set("touch", "box", "medium", {0.90, 0.07, 0.03});
  set("touch", "box", "big", {0.92, 0.05, 0.03});
  set("grasp", "sphere", "small", {0.15, 0.75, 0.10});
  set("grasp", "sphere", "medium", {0.15, 0.75, 0.10});
  set("grasp", "sphere", "big", {0.20, 0.72, 0.08});
  set("grasp", "box", "small", {0.15, 0.75, 0.10});
  set("grasp", "box", "medium", {0.20, 0.72, 0.08});
  set("grasp", "box", "big", {0.25, 0.70, 0.05});
  return t;
}

const std::vector<double>& WorldTable::row(std::string_view action, std::string_view shape,
                                           std::string_view size) const {
  auto it = effect_dist.find({std::string(action), std::string(shape), std::string(size)});
  if (it == effect_dist.end()) {
    invalid("world table has no row for " + std::string(action) + "/" + std::string(shape) + "/" +
            std::string(size));
  }
  return it->second;
}

void WorldTable::validate() const {
  for (const auto& a : action_domain().values()) {
    for (const auto& sh : shape_domain().values()) {
      for (const auto& sz : size_domain().values()) {
        const auto& r = row(a, sh, sz);
        if (r.size() != objvel_domain().size()) invalid("world table row has wrong width");
        double sum = 0.0;
        for (double p : r) {
          if (!(p >= 0.0)) invalid("world table has a negative entry");
          sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12) invalid("world table row " + a + "/" + sh + "/" + sz + " does not sum to 1");
      }
    }
  }
  if (effect_dist.size() != 18) invalid("world table must have exactly 18 rows");
}

// ---------------------------------------------------------------------------
// Grammar

std::string UtteranceGrammar::effect_key(std::string_view action, std::string_view objvel,
                                         std::string_view shape) {
  return "effect=" + std::string(action) + "," + std::string(objvel) + "," + std::string(shape);
}

UtteranceGrammar UtteranceGrammar::standard() {
  UtteranceGrammar g;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
  };
  g.templates = {
      split("the robot {action} the {size} {shape} and it {effect}"),
      split("{action} the {shape} and it {effect}"),
      split("the {size} {shape} {effect} when the robot {action} it"),
      split("robot {action} {size} {shape} it {effect}"),
      split("the robot {action} the {shape}"),
  };

  auto& lx = g.lexicon;
  const double third = 1.0 / 3.0;
  const double sixth = 1.0 / 6.0;
  lx["action=grasp"] = {{"grasps", third}, {"grasping", third}, {"grasp", third}};
  lx["action=tap"] = {{"taps", sixth}, {"tapping", sixth}, {"tap", sixth},
                      {"pushes", sixth}, {"pushing", sixth}, {"push", sixth}};
  lx["action=touch"] = {{"touches", sixth}, {"touching", sixth}, {"touch", sixth},
                        {"pokes", sixth}, {"poking", sixth}, {"poke", sixth}};
  lx["shape=sphere"] = {{"ball", 0.6}, {"sphere", 0.4}};
  lx["shape=box"] = {{"box", 0.6}, {"cube", 0.4}};
  lx["size=small"] = {{"small", 0.7}, {"little", 0.3}};
  lx["size=medium"] = {{"medium", 1.0}};
  lx["size=big"] = {{"big", 0.7}, {"large", 0.3}};

  for (const char* shape : {"sphere", "box"}) {
    const bool sphere = std::string_view(shape) == "sphere";
    if (sphere) {
      lx[effect_key("tap", "fast", shape)] = {{"rolls", 0.45}, {"rolling", 0.25}, {"quickly", 0.30}};
      lx[effect_key("tap", "medium", shape)] = {{"rolls", 0.40}, {"rolling", 0.20}, {"roll", 0.10}, {"moves", 0.30}};
      lx[effect_key("tap", "slow", shape)] = {{"rolls", 0.30}, {"slowly", 0.40}, {"moves", 0.30}};
    } else {
      lx[effect_key("tap", "fast", shape)] = {{"slides", 0.50}, {"quickly", 0.50}};
      lx[effect_key("tap", "medium", shape)] = {{"slides", 0.60}, {"moves", 0.40}};
      lx[effect_key("tap", "slow", shape)] = {{"slides", 0.30}, {"slide", 0.10}, {"slowly", 0.60}};
    }
    lx[effect_key("touch", "slow", shape)] = {{"still", 0.70}, {"stays", 0.30}};
    lx[effect_key("touch", "medium", shape)] = {{"moves", 0.60}, {"slowly", 0.40}};
    lx[effect_key("touch", "fast", shape)] = {{"moves", 0.50}, {"quickly", 0.50}};
    lx[effect_key("grasp", "slow", shape)] = {{"moves", 0.50}, {"slowly", 0.50}};
    lx[effect_key("grasp", "medium", shape)] = {{"moves", 0.70}, {"rises", 0.30}};
    lx[effect_key("grasp", "fast", shape)] = {{"moves", 0.50}, {"quickly", 0.50}};
  }
  g.validate();
  return g;
}

void UtteranceGrammar::validate() const {
  if (templates.empty()) invalid("grammar has no templates");
  auto check = [&](const std::string& key) {
    auto it = lexicon.find(key);
    if (it == lexicon.end() || it->second.empty()) invalid("grammar has no words for '" + key + "'");
    double sum = 0.0;
    for (const auto& c : it->second) {
      if (!(c.weight >= 0.0)) invalid("negative word weight under '" + key + "'");
      if (normalize_token(c.word).empty()) invalid("empty word under '" + key + "'");
      sum += c.weight;
    }
    if (std::abs(sum - 1.0) > 1e-9) invalid("word weights under '" + key + "' do not sum to 1");
  };
  for (const auto& a : action_domain().values()) check("action=" + a);
  for (const auto& s : shape_domain().values()) check("shape=" + s);
  for (const auto& z : size_domain().values()) check("size=" + z);
  for (const auto& a : action_domain().values()) {
    for (const auto& v : objvel_domain().values()) {
      for (const auto& s : shape_domain().values()) check(effect_key(a, v, s));
    }
  }
  for (const auto& t : templates) {
    if (t.empty()) invalid("grammar has an empty template");
    for (const auto& tok : t) {
      if (tok.front() == '{' &&
          tok != "{action}" && tok != "{shape}" && tok != "{size}" && tok != "{effect}") {
        invalid("unknown template slot " + tok);
      }
    }
  }
}

std::set<std::string> UtteranceGrammar::words() const {
  std::set<std::string> out;
  for (const auto& t : templates) {
    for (const auto& tok : t) {
      if (tok.front() != '{') out.merge(tokenize_utterance(tok));
    }
  }
  for (const auto& [_, choices] : lexicon) {
    for (const auto& c : choices) out.merge(tokenize_utterance(c.word));
  }
  return out;
}

std::string UtteranceGrammar::utter(const ExperimentRecord& record, Rng& rng) const {
  const auto& tmpl = templates[rng.index(templates.size())];
  std::string out;
  for (const auto& tok : tmpl) {
    std::string key;
    if (tok == "{action}") key = "action=" + record.action;
    else if (tok == "{shape}") key = "shape=" + record.shape;
    else if (tok == "{size}") key = "size=" + record.size;
    else if (tok == "{effect}") key = effect_key(record.action, record.objvel, record.shape);

    std::string word = tok;
    if (!key.empty()) {
      const auto& choices = lexicon.at(key);
      std::vector<double> w;
      for (const auto& c : choices) w.push_back(c.weight);
      word = choices[rng.categorical(w)].word;
    }
    if (!out.empty()) out.push_back(' ');
    out += word;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gesture kinematics

GestureParams GestureParams::standard() {
  GestureParams p;
  p.grasp = {{0.15, -0.30, -0.05}, 0.04, 1.4, 2.0, 0.15, 0.35};
  p.touch = {{0.15, -0.30, -0.05}, 0.04, 1.2, 1.8, 0.60, 0.90};
  p.tap = {{-0.25, -0.02, 0.03}, 0.03, 0.7, 1.1, 0.0, 0.0};
  return p;
}

const ActionKinematics& GestureParams::kinematics(std::string_view action) const {
  if (action == "grasp") return grasp;
  if (action == "tap") return tap;
  if (action == "touch") return touch;
  throw UnknownLabelError("action", std::string(action));
}

void GestureParams::validate() const {
  for (const auto* k : {&grasp, &tap, &touch}) {
    if (!(k->duration_min > 0.0) || !(k->duration_max >= k->duration_min)) {
      invalid("gesture duration range must be positive and ordered");
    }
    if (!(k->dwell_min >= 0.0) || !(k->dwell_max >= k->dwell_min)) invalid("bad dwell range");
    if (!(k->start_spread >= 0.0)) invalid("start spread must be non-negative");
  }
  if (!(noise_sigma >= 0.0) || !(torso_jitter >= 0.0)) invalid("noise sigma must be non-negative");
  if (!(object_spread >= 0.0)) invalid("object spread must be non-negative");
  if (!(amplitude_min > 0.0) || !(amplitude_max >= amplitude_min)) invalid("bad amplitude range");
  if (!(frame_rate > 0.0)) invalid("frame rate must be positive");
}

namespace {

enum class Profile { kMinJerk, kLinear, kEaseIn, kEaseOut };

struct Segment {
  Vec3 from{};
  Vec3 to{};
  double duration = 0.0;
  Profile profile = Profile::kMinJerk;
};

double shape_of(Profile p, double u) {
  switch (p) {
    case Profile::kMinJerk: return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
    case Profile::kLinear: return u;
    case Profile::kEaseIn: return u * u;
    case Profile::kEaseOut: return 1.0 - (1.0 - u) * (1.0 - u);
  }
  return u;
}

double distance(const Vec3& a, const Vec3& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                   (a[2] - b[2]) * (a[2] - b[2]));
}

Vec3 position_at(const std::vector<Segment>& path, double t) {
  for (const auto& s : path) {
    if (t <= s.duration) {
      const double u = s.duration > 0.0 ? std::clamp(t / s.duration, 0.0, 1.0) : 1.0;
      const double k = shape_of(s.profile, u);
      return {s.from[0] + k * (s.to[0] - s.from[0]), s.from[1] + k * (s.to[1] - s.from[1]),
              s.from[2] + k * (s.to[2] - s.from[2])};
    }
    t -= s.duration;
  }
  return path.back().to;
}

/// Waypoints are offsets from the object, before amplitude scaling.
std::vector<Segment> plan(std::string_view action, const Vec3& start,
                          double motion, double dwell) {
  const Vec3 at{0.0, 0.0, 0.0};
  std::vector<Segment> path;
  auto add = [&](Vec3 from, Vec3 to, double duration, Profile p) {
    path.push_back({from, to, duration, p});
  };
  if (action == "grasp") {
    const Vec3 above{0.0, 0.0, 0.15};
    const Vec3 lifted{0.0, 0.0, 0.20};
    add(start, above, 0.40 * motion, Profile::kMinJerk);
    add(above, at, 0.25 * motion, Profile::kMinJerk);
    add(at, at, dwell, Profile::kLinear);
    add(at, lifted, 0.35 * motion, Profile::kMinJerk);
  } else if (action == "touch") {
    const Vec3 front{0.0, -0.12, 0.02};
    add(start, front, 0.35 * motion, Profile::kMinJerk);
    add(front, at, 0.15 * motion, Profile::kMinJerk);
    add(at, at, dwell, Profile::kLinear);
    add(at, front, 0.15 * motion, Profile::kMinJerk);
    add(front, start, 0.35 * motion, Profile::kMinJerk);
  } else {
    // Accelerate into the sweep, cross the object at constant speed, then
    // decelerate; segment times keep the speed continuous.
    const Vec3 entry{-0.10, 0.0, 0.01};
    const Vec3 exit{0.10, 0.0, 0.01};
    const Vec3 end{0.22, 0.0, 0.04};
    const double d1 = distance(start, entry), d2 = distance(entry, exit), d3 = distance(exit, end);
    const double speed = (2.0 * d1 + d2 + 2.0 * d3) / motion;
    add(start, entry, 2.0 * d1 / speed, Profile::kEaseIn);
    add(entry, exit, d2 / speed, Profile::kLinear);
    add(exit, end, 2.0 * d3 / speed, Profile::kEaseOut);
  }
  return path;
}

}  // namespace

GeneratedGesture generate_gesture(std::string_view action, const GestureParams& params,
                                  std::uint64_t seed) {
  params.validate();
  const ActionKinematics& k = params.kinematics(action);
  Rng rng(seed);

  Vec3 object = params.object_offset;
  object[0] += rng.uniform(-params.object_spread, params.object_spread);
  object[1] += rng.uniform(-params.object_spread, params.object_spread);
  object[2] += rng.uniform(-0.5 * params.object_spread, 0.5 * params.object_spread);
  Vec3 start = k.start_offset;
  for (double& x : start) x += rng.uniform(-k.start_spread, k.start_spread);
  const double amplitude = rng.uniform(params.amplitude_min, params.amplitude_max);
  const double motion = rng.uniform(k.duration_min, k.duration_max);
  const double dwell = rng.uniform(k.dwell_min, k.dwell_max);

  const auto path = plan(action, start, motion, dwell);
  double total = 0.0;
  for (const auto& s : path) total += s.duration;
  const auto frames = static_cast<std::size_t>(std::floor(total * params.frame_rate)) + 1;

  Vec3 object_world{};
  for (int d = 0; d < 3; ++d) object_world[d] = params.torso[d] + object[d];

  std::vector<TrajectoryFrame> out;
  out.reserve(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const double t = static_cast<double>(f) / params.frame_rate;
    const Vec3 offset = position_at(path, t);
    TrajectoryFrame frame;
    frame.t = t;
    for (int d = 0; d < 3; ++d) {
      frame.hand[d] = object_world[d] + amplitude * offset[d];
    }
    if (params.noise_sigma > 0.0) {
      for (double& x : frame.hand) x += params.noise_sigma * rng.normal();
    }
    frame.torso = params.torso;
    if (params.torso_jitter > 0.0) {
      for (double& x : frame.torso) x += params.torso_jitter * rng.normal();
    }
    out.push_back(frame);
  }
  return {Trajectory(std::move(out)), object_world};
}

Trajectory generate_trajectory(std::string_view action, const GestureParams& params,
                               std::uint64_t seed) {
  return generate_gesture(action, params, seed).trajectory;
}

// ---------------------------------------------------------------------------
// Corpora

namespace {

ExperimentRecord draw_record(const WorldTable& table, const UtteranceGrammar& grammar, Rng& rng) {
  ExperimentRecord r;
  r.action = action_domain().value(rng.index(action_domain().size()));
  r.shape = shape_domain().value(rng.index(shape_domain().size()));
  r.size = size_domain().value(rng.index(size_domain().size()));
  r.objvel = objvel_domain().value(rng.categorical(table.row(r.action, r.shape, r.size)));
  r.words = tokenize_utterance(grammar.utter(r, rng));
  return r;
}

}  // namespace

std::vector<ExperimentRecord> generate_records(std::size_t n, const WorldTable& table,
                                               const UtteranceGrammar& grammar,
                                               std::uint64_t seed) {
  if (n < 1) invalid("corpus size must be at least 1");
  table.validate();
  grammar.validate();
  std::vector<ExperimentRecord> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(seed + i);
    records.push_back(draw_record(table, grammar, rng));
  }
  return records;
}

Corpus generate_corpus(std::size_t n, const WorldTable& table, const UtteranceGrammar& grammar,
                       const GestureParams& params, std::uint64_t seed) {
  if (n < 1) invalid("corpus size must be at least 1");
  table.validate();
  grammar.validate();
  params.validate();
  Corpus c;
  c.records.reserve(n);
  c.trajectories.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(seed + i);
    auto record = draw_record(table, grammar, rng);
    c.trajectories.push_back(generate_trajectory(record.action, params, rng.next()));
    c.records.push_back(std::move(record));
  }
  return c;
}

}  // namespace affgest
