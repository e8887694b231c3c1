// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.
//
// usage: acceptance <path-to-affgest-binary> <scratch-dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "affgest/bayesnet.hpp"
#include "affgest/error.hpp"
#include "affgest/fusion.hpp"
#include "affgest/gesture.hpp"
#include "affgest/io.hpp"
#include "affgest/simgen.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace affgest;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

constexpr std::uint64_t kCorpusSeed = 7;
constexpr std::size_t kCorpusSize = 3000;

const AffordanceNetwork& default_network() {
  static const AffordanceNetwork net = [] {
    const auto rs = generate_records(kCorpusSize, WorldTable::standard(), UtteranceGrammar::standard(), kCorpusSeed);
    return learn_cpts(rs, NetworkStructure::standard(build_vocabulary(rs)), 1.0);
  }();
  return net;
}

std::vector<FeatureSequence> sequences(const std::string& action, int n, std::uint64_t seed) {
  std::vector<FeatureSequence> out;
  const auto p = GestureParams::standard();
  for (int i = 0; i < n; ++i) out.push_back(preprocess(generate_trajectory(action, p, seed + i)));
  return out;
}

Outcome bn_exactness() {
  std::mt19937_64 rng(1);
  double worst = 0.0;
  int cases = 0, zero = 0, mismatched_zero = 0;
  while (cases < 1000) {
    testing::RandomNetOptions o;
    o.max_variables = 4;
    o.max_domain = 3;
    o.max_words = 20;
    o.zero_fraction = cases % 5 == 0 ? 0.3 : 0.0;
    const auto spec = testing::random_net_spec(rng, o);
    const auto net = testing::build_network(spec);
    const auto ev = testing::random_evidence(rng, spec, 10);
    std::vector<std::string> free;
    for (const auto& n : spec.names) {
      if (!ev.hard.contains(n)) free.push_back(n);
    }
    for (const auto& w : spec.words) {
      if (!ev.hard.contains(w)) free.push_back(w);
    }
    if (free.empty()) continue;
    const auto& q = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
    const auto expected = testing::joint_enumeration_posterior(spec, ev, q);
    ++cases;
    if (expected.empty()) {
      ++zero;
      try {
        posterior(net, ev, q);
        ++mismatched_zero;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kZeroProbabilityEvidence) ++mismatched_zero;
      }
      continue;
    }
    const auto got = posterior(net, ev, q);
    for (std::size_t i = 0; i < expected.size(); ++i) worst = std::max(worst, std::abs(got.probs[i] - expected[i]));
  }
  std::ostringstream s;
  s << cases << " networks, max |error| " << worst << ", " << zero << " impossible-evidence cases";
  return {worst <= 1e-9 && mismatched_zero == 0, s.str()};
}

Outcome forward_exactness() {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t q = 1 + k % 3;
    const std::size_t t = 1 + (k / 3) % 6;
    const auto h = testing::random_bakis_hmm(rng, q, 1 + k % 2);
    const auto s = testing::random_sequence(rng, t);
    const double ref = testing::path_enumeration_log_likelihood(h, s);
    worst = std::max({worst, std::abs(forward_log_likelihood(h, s) - ref),
                      std::abs(scaled_forward_log_likelihood(h, s) - ref)});
  }
  std::ostringstream s;
  s << "200 cases, max |error| " << worst;
  return {worst <= 1e-9, s.str()};
}

Outcome em_monotonicity() {
  double worst = INFINITY;
  std::size_t steps = 0;
  for (int run = 0; run < 20; ++run) {
    const std::string action = action_domain().value(run % 3);
    HmmTrainingOptions o;  // Q = 5, M = 2
    o.tol = 0.0;
    o.max_iters = 40;
    const auto r = train_hmm(sequences(action, 15, 100000 + 1000 * run), o, action);
    for (std::size_t k = 1; k < r.log_likelihood_trace.size(); ++k) {
      worst = std::min(worst, r.log_likelihood_trace[k] - r.log_likelihood_trace[k - 1]);
      ++steps;
    }
  }
  std::ostringstream s;
  s << "20 runs, " << steps << " steps, smallest delta " << worst;
  return {worst >= -1e-8, s.str()};
}

struct GestureExperiment {
  GestureModelSet models;
  std::vector<std::vector<int>> confusion;
  double accuracy = 0.0;
  FeatureSequence tap_probe;
};

GestureExperiment gesture_experiment() {
  GestureExperiment g;
  std::map<std::string, std::vector<FeatureSequence>> train;
  for (std::size_t a = 0; a < 3; ++a) train[action_domain().value(a)] = sequences(action_domain().value(a), 100, 1000000 + 10000 * a);
  g.models = train_model_set(train, HmmTrainingOptions{}).models;
  g.confusion.assign(3, std::vector<int>(3, 0));
  int correct = 0;
  for (std::size_t a = 0; a < 3; ++a) {
    for (const auto& s : sequences(action_domain().value(a), 50, 2000000 + 10000 * a)) {
      const auto guess = classify(g.models, s).argmax();
      ++g.confusion[a][guess];
      correct += guess == a;
    }
  }
  g.accuracy = correct / 150.0;
  g.tap_probe = sequences("tap", 1, 3000000)[0];
  return g;
}

Outcome gesture_recognition(const GestureExperiment& g) {
  std::ostringstream s;
  s << "accuracy " << std::fixed << std::setprecision(4) << g.accuracy << "; confusion (rows truth)";
  for (std::size_t a = 0; a < 3; ++a) {
    s << " " << action_domain().value(a) << "=[" << g.confusion[a][0] << "," << g.confusion[a][1] << ","
      << g.confusion[a][2] << "]";
  }
  return {g.accuracy >= 0.95, s.str()};
}

Outcome effect_pattern(const GestureExperiment& g) {
  const auto hmm = classify(g.models, g.tap_probe);
  const auto table = WorldTable::standard();
  bool ok = hmm.argmax_label() == "tap";
  std::ostringstream s;
  s << "probe classified as " << hmm.argmax_label();
  for (auto [shape, size, want] : {std::tuple{"sphere", "small", "fast"}, std::tuple{"box", "big", "slow"}}) {
    Evidence ev;
    ev.hard = {{"Shape", shape}, {"Size", size}};
    const auto p = predict_downstream(hmm, default_network(), ev, vars::kObjVel, FusionStrategy::kHard);
    const auto& row = table.row("tap", shape, size);
    const auto truth = objvel_domain().value(static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()));
    ok = ok && p.argmax_label() == want && p.argmax_label() == truth;
    s << "; " << size << " " << shape << " -> " << p.argmax_label() << " (p=" << std::setprecision(3)
      << p.probs[p.argmax()] << ", table argmax " << truth << ")";
  }
  return {ok, s.str()};
}

/// The learned network restricted to the symbolic variables and one word.
/// Other words are leaves, so summing them out leaves the joint unchanged.
testing::RandomNetSpec single_word_spec(const AffordanceNetwork& net, const std::string& token) {
  testing::RandomNetSpec spec;
  auto index = [&](const std::string& name) {
    for (std::size_t v = 0; v < net.variables().size(); ++v) {
      if (net.variables()[v].name() == name) return v;
    }
    throw std::runtime_error("unknown parent " + name);
  };
  for (const auto& v : net.variables()) {
    spec.names.push_back(v.name());
    spec.sizes.push_back(v.size());
    std::vector<std::size_t> ps;
    for (const auto& p : net.cpt(v.name()).parents) ps.push_back(index(p));
    spec.parents.push_back(ps);
    spec.tables.push_back(net.cpt(v.name()).rows);
  }
  spec.words = {token};
  std::vector<std::size_t> ps;
  for (const auto& p : net.cpt(token).parents) ps.push_back(index(p));
  spec.word_parents = {ps};
  spec.tables.push_back(net.cpt(token).rows);
  return spec;
}

/// The network's symbolic labels are names, the oracle's are "v<index>".
Evidence to_oracle_labels(const AffordanceNetwork& net, const Evidence& ev) {
  Evidence out;
  for (const auto& [k, v] : ev.hard) out.hard[k] = "v" + std::to_string(*net.domain_of(k).index_of(v));
  return out;
}

Outcome word_pattern() {
  const auto& net = default_network();
  const std::map<std::string, std::string> f{{"Shape", "sphere"}, {"Size", "big"}};
  const std::map<std::string, std::string> e{{"ObjVel", "fast"}};
  const auto deltas = word_delta(net, f, e, "tap");
  std::map<std::string, double> by_word;
  for (const auto& d : deltas) by_word[d.token] = d.delta;

  Evidence fe;
  fe.hard = {{"Shape", "sphere"}, {"Size", "big"}, {"ObjVel", "fast"}};
  Evidence fea = fe;
  fea.hard["Action"] = "tap";

  bool ok = true;
  std::ostringstream s;
  auto check = [&](const std::string& w, int sign) {
    if (!by_word.contains(w)) {
      ok = false;
      s << " " << w << ":missing";
      return;
    }
    const auto spec = single_word_spec(net, w);
    const double with = testing::joint_enumeration_posterior(spec, to_oracle_labels(net, fea), w)[1];
    const double without = testing::joint_enumeration_posterior(spec, to_oracle_labels(net, fe), w)[1];
    const double oracle = with - without;
    const bool good = (sign > 0 ? by_word[w] > 0 : by_word[w] < 0) && (sign > 0 ? oracle > 0 : oracle < 0) &&
                      std::abs(oracle - by_word[w]) <= 1e-12;
    ok = ok && good;
    s << " " << w << (by_word[w] >= 0 ? "+" : "") << std::fixed << std::setprecision(4) << by_word[w]
      << (good ? "" : "(!)");
  };
  for (const char* w : {"tap", "taps", "tapping", "push", "pushes", "pushing"}) check(w, +1);
  for (const char* w : {"touch", "touches", "touching", "poke", "pokes", "poking"}) check(w, -1);
  check("rolls", +1);
  return {ok, "A=tap, F={big sphere}, E={fast}:" + s.str()};
}

Outcome fusion_degeneracies() {
  const auto& net = default_network();
  double onehot = 0.0, uniform = 0.0;
  std::vector<std::string> queries{"ObjVel"};
  for (const auto& t : net.vocabulary().tokens()) queries.push_back(t);
  for (const auto& shape : shape_domain().values()) {
    for (const auto& size : size_domain().values()) {
      Evidence ev;
      ev.hard = {{"Shape", shape}, {"Size", size}};
      for (const auto& a : action_domain().values()) {
        const auto oh = LabelDistribution::one_hot(action_domain(), a);
        for (const auto& q : queries) {
          const auto h = predict_downstream(oh, net, ev, q, FusionStrategy::kHard);
          const auto s = predict_downstream(oh, net, ev, q, FusionStrategy::kSoft);
          for (std::size_t i = 0; i < h.probs.size(); ++i) onehot = std::max(onehot, std::abs(h.probs[i] - s.probs[i]));
        }
      }
      const auto bn = posterior(net, ev, vars::kAction);
      const auto prod = fuse_action(LabelDistribution::uniform(action_domain()), net, ev, FusionStrategy::kProduct);
      for (std::size_t i = 0; i < 3; ++i) uniform = std::max(uniform, std::abs(bn.probs[i] - prod.probs[i]));
    }
  }
  // Worked example: a network whose Action prior is (0.5, 0.25, 0.25).
  auto st = NetworkStructure::standard(Vocabulary({"w"}));
  auto cpts = learn_cpts(std::vector<ExperimentRecord>{}, st, 1.0).cpts();
  cpts[0].rows[0] = {0.5, 0.25, 0.25};
  const AffordanceNetwork prior_net(st, cpts);
  const auto worked = fuse_action(LabelDistribution::from_weights(action_domain(), {0.7, 0.2, 0.1}), prior_net, {},
                                  FusionStrategy::kProduct);
  const std::array<double, 3> want{0.8235, 0.1176, 0.0588};
  double worked_err = 0.0;
  for (std::size_t i = 0; i < 3; ++i) worked_err = std::max(worked_err, std::abs(worked.probs[i] - want[i]));
  std::ostringstream s;
  s << "one-hot soft vs hard " << onehot << "; uniform product vs BN " << uniform << "; worked example ("
    << std::fixed << std::setprecision(4) << worked.probs[0] << ", " << worked.probs[1] << ", " << worked.probs[2]
    << ")";
  return {onehot <= 1e-12 && uniform <= 1e-12 && worked_err <= 1e-4, s.str()};
}

Outcome determinism(const std::string& binary, const fs::path& work) {
  auto pipeline = [&](const fs::path& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string b = "\"" + binary + "\"";
    const std::string d = "\"" + dir.string() + "\"";
    const std::string quiet = " > " + d + "/log.txt 2>&1";
    return std::system((b + " --seed 11 gen --n 240 --out " + d + "/train" + quiet).c_str()) == 0 &&
           std::system((b + " --seed 12 gen --n 60 --out " + d + "/held" + " >> " + d + "/log.txt 2>&1").c_str()) ==
               0 &&
           std::system((b + " train --data " + d + "/train --models " + d + "/models --max-iters 25" + " >> " + d +
                        "/log.txt 2>&1")
                           .c_str()) == 0 &&
           std::system((b + " --seed 13 eval --models " + d + "/models --data " + d + "/held --report " + d +
                        "/report.json --checks 100" + " >> " + d + "/log.txt 2>&1")
                           .c_str()) == 0;
  };
  const auto a = work / "run_a";
  const auto b = work / "run_b";
  if (!pipeline(a) || !pipeline(b)) return {false, "pipeline command failed; see " + work.string()};
  bool same = true;
  std::ostringstream s;
  for (const char* f : {"models/network.json", "models/gestures.json", "report.json", "train/records.jsonl",
                        "train/trajectories/000100.csv"}) {
    const bool eq = read_text_file(a / f) == read_text_file(b / f);
    same = same && eq;
    s << (s.tellp() > 0 ? "; " : "") << f << (eq ? " identical" : " DIFFERS");
  }
  return {same, s.str()};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <affgest-binary> <scratch-dir>\n";
    return 2;
  }
  const std::string binary = argv[1];
  const fs::path work = argv[2];
  fs::create_directories(work);

  int failures = 0;
  // limit: allowed wall time in seconds, 0 for none.
  auto report = [&](int id, const char* title, double limit, const std::function<Outcome()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit > 0 && secs > limit) {
      o.pass = false;
      o.detail += "; exceeded " + std::to_string(static_cast<int>(limit)) + " s";
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << title << " (" << std::fixed
              << std::setprecision(1) << secs << " s): " << o.detail << std::endl;
  };

  report(1, "BN exactness vs full-joint enumeration", 60, bn_exactness);
  report(2, "forward algorithm vs path enumeration", 10, forward_exactness);
  report(3, "EM log-likelihood monotonicity", 0, em_monotonicity);
  GestureExperiment g;
  report(4, "gesture recognition held-out accuracy >= 0.95", 120, [&] {
    g = gesture_experiment();
    return gesture_recognition(g);
  });
  report(5, "object velocity prediction from a tap gesture", 0, [&] {
    if (g.models.models.empty()) return Outcome{false, "gesture models unavailable"};
    return effect_pattern(g);
  });
  report(6, "word probability deltas under tap evidence", 0, word_pattern);
  report(7, "fusion degeneracies", 0, fusion_degeneracies);
  report(8, "gen+train+eval byte determinism", 0, [&] { return determinism(binary, work); });

  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
