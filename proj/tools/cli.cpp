#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "affgest/bayesnet.hpp"
#include "affgest/error.hpp"
#include "affgest/fusion.hpp"
#include "affgest/gesture.hpp"
#include "affgest/io.hpp"
#include "affgest/simgen.hpp"

namespace affgest::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kRecordsFile = "records.jsonl";
constexpr const char* kGesturesManifest = "gestures.jsonl";
constexpr const char* kCorpusManifest = "manifest.json";
constexpr const char* kNetworkFile = "network.json";
constexpr const char* kGestureModelFile = "gestures.json";

/// Everything a command may need. Defaults, then the --config file, then
/// explicit flags.
struct RunConfig {
  std::uint64_t seed = 7;
  FusionStrategy fusion = FusionStrategy::kHard;
  std::size_t n = 3000;
  double alpha = 1.0;
  int min_count = 1;
  std::optional<std::map<std::string, std::vector<std::string>>> structure;
  HmmTrainingOptions hmm;
  double rate = kDefaultFeatureRate;
  double threshold = 0.005;
  int checks = 500;
};

/// Flags as parsed; unset optionals leave the config value alone.
struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> fusion;
  std::optional<std::size_t> n;
  std::optional<double> alpha;
  std::optional<int> min_count;
  std::optional<std::size_t> states;
  std::optional<std::size_t> mixtures;
  std::optional<double> rate;
  std::optional<double> tol;
  std::optional<int> max_iters;
  std::optional<double> threshold;
  std::optional<int> checks;

  std::string out_dir, data_dir, models_dir, trajectory, json_path, report;
  std::string shape, size, objvel, action;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

FusionStrategy fusion_from(const std::string& name) {
  if (auto s = parse_fusion_strategy(name)) return *s;
  throw UsageError("unknown fusion strategy '" + name + "' (expected hard, soft or product)");
}

RunConfig resolve_config(const Flags& f) {
  RunConfig c;
  if (!f.config.empty()) {
    json j;
    try {
      j = json::parse(read_text_file(f.config));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, "config '" + f.config + "': " + e.what());
    }
    try {
      if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
      if (j.contains("fusion")) c.fusion = fusion_from(j.at("fusion").get<std::string>());
      if (j.contains("n")) c.n = j.at("n").get<std::size_t>();
      if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
      if (j.contains("min_count")) c.min_count = j.at("min_count").get<int>();
      if (j.contains("structure")) {
        c.structure = j.at("structure").get<std::map<std::string, std::vector<std::string>>>();
      }
      if (j.contains("states")) c.hmm.states = j.at("states").get<std::size_t>();
      if (j.contains("mixtures")) c.hmm.mixtures = j.at("mixtures").get<std::size_t>();
      if (j.contains("rate")) c.rate = j.at("rate").get<double>();
      if (j.contains("tol")) c.hmm.tol = j.at("tol").get<double>();
      if (j.contains("max_iters")) c.hmm.max_iters = j.at("max_iters").get<int>();
      if (j.contains("threshold")) c.threshold = j.at("threshold").get<double>();
      if (j.contains("checks")) c.checks = j.at("checks").get<int>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, "config '" + f.config + "': " + e.what());
    }
  }
  if (f.seed) c.seed = *f.seed;
  if (f.fusion) c.fusion = fusion_from(*f.fusion);
  if (f.n) c.n = *f.n;
  if (f.alpha) c.alpha = *f.alpha;
  if (f.min_count) c.min_count = *f.min_count;
  if (f.states) c.hmm.states = *f.states;
  if (f.mixtures) c.hmm.mixtures = *f.mixtures;
  if (f.rate) c.rate = *f.rate;
  if (f.tol) c.hmm.tol = *f.tol;
  if (f.max_iters) c.hmm.max_iters = *f.max_iters;
  if (f.threshold) c.threshold = *f.threshold;
  if (f.checks) c.checks = *f.checks;

  if (c.n < 1) throw UsageError("--n must be at least 1");
  if (!(c.alpha >= 0.0)) throw UsageError("--alpha must be >= 0");
  if (c.min_count < 1) throw UsageError("--min-count must be >= 1");
  if (c.hmm.states < 1 || c.hmm.mixtures < 1) throw UsageError("--states and --mixtures must be >= 1");
  if (!(c.rate > 0.0)) throw UsageError("--rate must be positive");
  if (!(c.hmm.tol >= 0.0) || c.hmm.max_iters < 0) throw UsageError("bad --tol or --max-iters");
  if (!(c.threshold >= 0.0)) throw UsageError("--threshold must be >= 0");
  if (c.checks < 0) throw UsageError("--checks must be >= 0");
  return c;
}

NetworkStructure make_structure(const RunConfig& c, Vocabulary vocab) {
  if (!c.structure) return NetworkStructure::standard(std::move(vocab));
  std::map<std::string, std::vector<std::string>> symbolic;
  std::vector<std::string> word_parents;
  bool have_word_parents = false;
  for (const auto& [child, parents] : *c.structure) {
    if (child == "*") {
      word_parents = parents;
      have_word_parents = true;
    } else {
      symbolic[child] = parents;
    }
  }
  NetworkStructure s;
  s.variables = standard_domains();
  s.vocabulary = std::move(vocab);
  s.parents = symbolic;
  for (const auto& v : s.variables) s.parents.try_emplace(v.name());
  for (const auto& t : s.vocabulary.tokens()) {
    if (!s.parents.contains(t)) {
      if (!have_word_parents) {
        throw Error(ErrorCode::kInvalidArgument,
                    "config structure gives no parents for word '" + t + "' (use the \"*\" key)");
      }
      s.parents[t] = word_parents;
    }
  }
  s.validate();
  return s;
}

std::string fixed(double x, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << x;
  return s.str();
}

json distribution_json(const LabelDistribution& d) {
  return {{"variable", d.variable}, {"labels", d.labels}, {"probs", d.probs}, {"argmax", d.argmax_label()}};
}

void print_distribution(std::ostream& out, const LabelDistribution& d) {
  const auto best = d.argmax();
  for (std::size_t i = 0; i < d.labels.size(); ++i) {
    out << "  " << std::left << std::setw(10) << d.labels[i] << fixed(d.probs[i])
        << (i == best ? "  <- argmax" : "") << '\n';
  }
}

void emit_json(const Flags& f, const json& j, std::ostream& out) {
  if (f.json_path.empty()) return;
  if (f.json_path == "-") {
    out << j.dump() << '\n';
  } else {
    write_text_file(f.json_path, j.dump(1) + "\n");
  }
}

/// Trajectory files that cannot be read or parsed are bad input (exit 4),
/// unlike unreadable model or corpus files (exit 2).
FeatureSequence load_features(const std::string& path, double rate) {
  try {
    return preprocess(trajectory_from_csv(read_text_file(path)), rate);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw Error(ErrorCode::kParse, e.what());
    throw;
  }
}

struct Models {
  AffordanceNetwork network;
  GestureModelSet gestures;
};

Models load_models(const std::string& dir) {
  if (dir.empty()) throw UsageError("--models is required");
  return {network_from_json(read_text_file(fs::path(dir) / kNetworkFile)),
          model_set_from_json(read_text_file(fs::path(dir) / kGestureModelFile))};
}

// ---------------------------------------------------------------------------
// gen

int cmd_gen(const RunConfig& c, const Flags& f, std::ostream& out) {
  const fs::path dir = f.out_dir;
  std::error_code ec;
  fs::create_directories(dir / "trajectories", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create '" + (dir / "trajectories").string() + "': " + ec.message());

  const auto table = WorldTable::standard();
  const auto grammar = UtteranceGrammar::standard();
  const auto params = GestureParams::standard();
  const Corpus corpus = generate_corpus(c.n, table, grammar, params, c.seed);

  std::vector<DatasetEntry> entries;
  const int width = std::max<int>(6, static_cast<int>(std::to_string(c.n - 1).size()));
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    std::ostringstream name;
    name << "trajectories/" << std::setw(width) << std::setfill('0') << i << ".csv";
    write_text_file(dir / name.str(), trajectory_to_csv(corpus.trajectories[i]));
    entries.push_back({name.str(), corpus.records[i].action});
  }
  write_text_file(dir / kRecordsFile, records_to_jsonl(corpus.records));
  write_text_file(dir / kGesturesManifest, dataset_manifest_to_jsonl(entries));
  write_text_file(dir / kCorpusManifest, corpus_manifest_to_json(c.seed, c.n, table, grammar, params));
  out << "wrote " << corpus.records.size() << " records and " << corpus.trajectories.size()
      << " trajectories to " << dir.string() << " (seed " << c.seed << ", " << Rng::kAlgorithm << ")\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// train

std::map<std::string, std::vector<FeatureSequence>> load_gesture_set(const fs::path& data_dir,
                                                                     double rate) {
  const auto entries = dataset_manifest_from_jsonl(read_text_file(data_dir / kGesturesManifest));
  std::map<std::string, std::vector<FeatureSequence>> by_action;
  for (const auto& e : entries) {
    by_action[e.action].push_back(preprocess(trajectory_from_csv(read_text_file(data_dir / e.file)), rate));
  }
  return by_action;
}

int cmd_train(const RunConfig& c, const Flags& f, std::ostream& out) {
  if (f.models_dir.empty()) throw UsageError("--models is required");
  const fs::path data = f.data_dir;
  const auto records = records_from_jsonl(read_text_file(data / kRecordsFile));
  if (records.empty()) throw Error(ErrorCode::kEmptyTrainingSet, "records file is empty");

  const auto vocab = build_vocabulary(records, c.min_count);
  const auto net = learn_cpts(records, make_structure(c, vocab), c.alpha);
  out << "affordance network: " << records.size() << " records, " << vocab.size()
      << " words, alpha " << c.alpha << '\n';

  const auto sequences = load_gesture_set(data, c.rate);
  const auto trained = train_model_set(sequences, c.hmm, c.rate);
  for (const auto& [label, run] : trained.runs) {
    out << "hmm " << label << ": " << sequences.at(label).size() << " sequences, "
        << run.iterations << " iterations, " << (run.converged ? "converged" : "stopped at max_iters")
        << '\n';
    for (std::size_t k = 0; k < run.log_likelihood_trace.size(); ++k) {
      out << "  iter " << k << " loglik " << std::setprecision(17) << run.log_likelihood_trace[k] << '\n';
    }
  }

  std::error_code ec;
  fs::create_directories(f.models_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create '" + f.models_dir + "': " + ec.message());
  write_text_file(fs::path(f.models_dir) / kNetworkFile, network_to_json(net));
  write_text_file(fs::path(f.models_dir) / kGestureModelFile, model_set_to_json(trained.models));
  out << "wrote " << (fs::path(f.models_dir) / kNetworkFile).string() << " and "
      << (fs::path(f.models_dir) / kGestureModelFile).string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// classify / predict-effect / word-delta

int cmd_classify(const RunConfig&, const Flags& f, std::ostream& out) {
  const auto models = load_models(f.models_dir);
  const auto seq = load_features(f.trajectory, models.gestures.feature_rate);
  const auto post = classify(models.gestures, seq);
  out << "gesture posterior over Action\n";
  print_distribution(out, post);
  emit_json(f, {{"trajectory", f.trajectory}, {"posterior", distribution_json(post)}}, out);
  return kOk;
}

int cmd_predict_effect(const RunConfig& c, const Flags& f, std::ostream& out) {
  shape_domain().require(f.shape, "shape");
  size_domain().require(f.size, "size");
  const auto models = load_models(f.models_dir);
  const auto seq = load_features(f.trajectory, models.gestures.feature_rate);
  const auto gesture = classify(models.gestures, seq);

  Evidence ev;
  ev.hard[std::string(vars::kShape)] = f.shape;
  ev.hard[std::string(vars::kSize)] = f.size;
  const auto post = predict_downstream(gesture, models.network, ev, vars::kObjVel, c.fusion);

  out << "gesture posterior: ";
  for (std::size_t i = 0; i < gesture.labels.size(); ++i) {
    out << (i ? " " : "") << gesture.labels[i] << "=" << fixed(gesture.probs[i]);
  }
  out << "\nfusion: " << to_string(c.fusion) << "\nObjVel | Shape=" << f.shape << ", Size=" << f.size << '\n';
  print_distribution(out, post);
  emit_json(f,
            {{"trajectory", f.trajectory},
             {"fusion", to_string(c.fusion)},
             {"evidence", ev.hard},
             {"gesture_posterior", distribution_json(gesture)},
             {"posterior", distribution_json(post)}},
            out);
  return kOk;
}

int cmd_word_delta(const RunConfig& c, const Flags& f, std::ostream& out) {
  shape_domain().require(f.shape, "shape");
  size_domain().require(f.size, "size");
  objvel_domain().require(f.objvel, "objvel");
  if (f.action.empty() == f.trajectory.empty()) {
    throw UsageError("word-delta needs exactly one of --action or --trajectory");
  }
  if (!f.action.empty()) action_domain().require(f.action, "action");
  const auto models = load_models(f.models_dir);
  const auto& net = models.network;

  const std::map<std::string, std::string> features{{std::string(vars::kShape), f.shape},
                                                    {std::string(vars::kSize), f.size}};
  const std::map<std::string, std::string> effects{{std::string(vars::kObjVel), f.objvel}};

  std::vector<WordDelta> deltas;
  json source;
  if (!f.action.empty()) {
    deltas = word_delta(net, features, effects, f.action);
    source = {{"action", f.action}};
  } else {
    const auto gesture = classify(models.gestures, load_features(f.trajectory, models.gestures.feature_rate));
    source = {{"trajectory", f.trajectory},
              {"fusion", to_string(c.fusion)},
              {"gesture_posterior", distribution_json(gesture)}};
    if (c.fusion == FusionStrategy::kHard) {
      deltas = word_delta(net, features, effects, gesture.argmax_label());
      source["action"] = gesture.argmax_label();
    } else {
      Evidence base;
      base.hard.insert(features.begin(), features.end());
      base.hard.insert(effects.begin(), effects.end());
      for (const auto& token : net.vocabulary().tokens()) {
        const double with = predict_downstream(gesture, net, base, token, c.fusion).probs[1];
        deltas.push_back({token, with - word_posterior(net, base, token)});
      }
      std::stable_sort(deltas.begin(), deltas.end(), [](const WordDelta& a, const WordDelta& b) {
        return std::abs(a.delta) > std::abs(b.delta);
      });
    }
  }

  out << "word probability change when adding the action evidence"
      << " (Shape=" << f.shape << ", Size=" << f.size << ", ObjVel=" << f.objvel << ")\n";
  json rows = json::array();
  std::size_t omitted = 0;
  for (const auto& d : deltas) {
    if (std::abs(d.delta) < c.threshold) {
      ++omitted;
      continue;
    }
    out << "  " << std::left << std::setw(12) << d.token << (d.delta >= 0 ? "+" : "") << fixed(d.delta)
        << '\n';
    rows.push_back({{"word", d.token}, {"delta", d.delta}});
  }
  out << "(" << omitted << " words with |delta| < " << c.threshold << " omitted)\n";
  emit_json(f,
            {{"source", source},
             {"evidence", {{"Shape", f.shape}, {"Size", f.size}, {"ObjVel", f.objvel}}},
             {"threshold", c.threshold},
             {"deltas", rows},
             {"omitted", omitted}},
            out);
  return kOk;
}

// ---------------------------------------------------------------------------
// eval

/// Random queries against the exhaustive reference; returns the largest
/// absolute difference and how many cases were compared.
std::pair<double, int> bn_self_check(const AffordanceNetwork& net, int cases, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  int compared = 0;
  const std::size_t nsym = net.symbolic_count();
  const std::size_t nwords = net.vocabulary().size();
  for (int k = 0; k < cases; ++k) {
    Evidence ev;
    for (std::size_t v = 0; v < nsym; ++v) {
      const auto& dom = net.node_domain(v);
      const double u = rng.uniform();
      if (u < 0.35) {
        ev.hard[dom.name()] = dom.value(rng.index(dom.size()));
      } else if (u < 0.5) {
        std::vector<double> lik(dom.size());
        for (double& x : lik) x = rng.uniform(0.05, 1.0);
        ev.soft[dom.name()] = lik;
      }
    }
    const std::size_t observed_words = nwords == 0 ? 0 : rng.index(std::min<std::size_t>(4, nwords + 1));
    for (std::size_t w = 0; w < observed_words; ++w) {
      const auto& token = net.vocabulary().tokens()[rng.index(nwords)];
      ev.hard[token] = rng.uniform() < 0.5 ? std::string(kWordAbsent) : std::string(kWordPresent);
    }
    std::vector<std::string> candidates;
    for (std::size_t v = 0; v < nsym; ++v) {
      if (!ev.hard.contains(net.node_domain(v).name())) candidates.push_back(net.node_domain(v).name());
    }
    for (std::size_t w = 0; w < nwords; ++w) {
      if (!ev.hard.contains(net.vocabulary().tokens()[w])) candidates.push_back(net.vocabulary().tokens()[w]);
    }
    if (candidates.empty()) continue;
    const auto& query = candidates[rng.index(candidates.size())];
    try {
      const auto a = posterior(net, ev, query);
      const auto b = enumerate_posterior(net, ev, query);
      for (std::size_t i = 0; i < a.probs.size(); ++i) worst = std::max(worst, std::abs(a.probs[i] - b.probs[i]));
      ++compared;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kZeroProbabilityEvidence) throw;
    }
  }
  return {worst, compared};
}

json fusion_checks(const AffordanceNetwork& net) {
  const auto& actions = net.domain_of(vars::kAction);
  double onehot = 0.0;
  double uniform_product = 0.0;
  for (const auto& shape : shape_domain().values()) {
    for (const auto& size : size_domain().values()) {
      Evidence ev;
      ev.hard[std::string(vars::kShape)] = shape;
      ev.hard[std::string(vars::kSize)] = size;
      for (const auto& a : actions.values()) {
        const auto oh = LabelDistribution::one_hot(actions, a);
        const auto hard = predict_downstream(oh, net, ev, vars::kObjVel, FusionStrategy::kHard);
        const auto soft = predict_downstream(oh, net, ev, vars::kObjVel, FusionStrategy::kSoft);
        for (std::size_t i = 0; i < hard.probs.size(); ++i) {
          onehot = std::max(onehot, std::abs(hard.probs[i] - soft.probs[i]));
        }
      }
      const auto bn = posterior(net, ev, vars::kAction);
      const auto prod = fuse_action(LabelDistribution::uniform(actions), net, ev, FusionStrategy::kProduct);
      for (std::size_t i = 0; i < bn.probs.size(); ++i) {
        uniform_product = std::max(uniform_product, std::abs(bn.probs[i] - prod.probs[i]));
      }
    }
  }
  return {{"onehot_soft_vs_hard_max_diff", onehot}, {"uniform_product_vs_bn_max_diff", uniform_product}};
}

int cmd_eval(const RunConfig& c, const Flags& f, std::ostream& out) {
  const auto models = load_models(f.models_dir);
  const fs::path data = f.data_dir;
  const auto entries = dataset_manifest_from_jsonl(read_text_file(data / kGesturesManifest));
  const auto& actions = action_domain();
  const std::size_t k = actions.size();

  std::vector<std::vector<int>> confusion(k, std::vector<int>(k, 0));
  int correct = 0;
  for (const auto& e : entries) {
    const auto seq = preprocess(trajectory_from_csv(read_text_file(data / e.file)), models.gestures.feature_rate);
    const auto post = classify(models.gestures, seq);
    const auto truth = *actions.index_of(e.action);
    const auto guess = post.argmax();
    ++confusion[truth][guess];
    if (truth == guess) ++correct;
  }
  std::vector<int> per_class(k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    for (int n : confusion[i]) per_class[i] += n;
  }
  const double accuracy = entries.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(entries.size());
  const auto [bn_error, bn_cases] = bn_self_check(models.network, c.checks, c.seed);
  const json fusion = fusion_checks(models.network);

  const json report{{"test_count", entries.size()},
                    {"accuracy", accuracy},
                    {"labels", actions.values()},
                    {"confusion", confusion},
                    {"per_class_counts", per_class},
                    {"bn_oracle_max_error", bn_error},
                    {"bn_oracle_cases", bn_cases},
                    {"fusion", fusion},
                    {"seed", c.seed}};

  out << "gesture accuracy: " << fixed(accuracy) << " (" << correct << "/" << entries.size() << ")\n";
  out << "confusion (rows = truth, columns = predicted):\n";
  out << "  " << std::setw(8) << "";
  for (const auto& l : actions.values()) out << std::setw(8) << l;
  out << '\n';
  for (std::size_t i = 0; i < k; ++i) {
    out << "  " << std::setw(8) << actions.value(i);
    for (int n : confusion[i]) out << std::setw(8) << n;
    out << '\n';
  }
  out << "network vs exhaustive reference: max error " << bn_error << " over " << bn_cases << " queries\n";
  out << "fusion: one-hot soft vs hard max diff " << fusion["onehot_soft_vs_hard_max_diff"].get<double>()
      << ", uniform product vs network max diff " << fusion["uniform_product_vs_bn_max_diff"].get<double>()
      << '\n';
  if (!f.report.empty()) write_text_file(f.report, report.dump(1) + "\n");
  return kOk;
}

// ---------------------------------------------------------------------------

int exit_code_for(ErrorCode code, bool training) {
  switch (code) {
    case ErrorCode::kIo: return kIoFailure;
    case ErrorCode::kUnknownLabel: return kBadLabel;
    case ErrorCode::kEmptyTrainingSet:
    case ErrorCode::kCollapsedState:
    case ErrorCode::kEmptyVocabulary:
    case ErrorCode::kEmptyRow: return kTrainingFailure;
    case ErrorCode::kInvalidStrategy: return kUsage;
    default: return training ? kTrainingFailure : kBadInput;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Affordance-words network fused with gesture HMMs", "affgest"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", f.seed, "Random seed");
  app.add_option("--fusion", f.fusion, "Fusion strategy: hard, soft or product");

  auto* gen = app.add_subcommand("gen", "Generate a synthetic corpus");
  gen->add_option("--n", f.n, "Number of records (default 3000)");
  gen->add_option("--out", f.out_dir, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train the affordance network and gesture HMMs");
  train->add_option("--data", f.data_dir, "Corpus directory")->required();
  train->add_option("--models", f.models_dir, "Output model directory")->required();
  train->add_option("--alpha", f.alpha, "CPT smoothing pseudo-count (default 1)");
  train->add_option("--min-count", f.min_count, "Minimum records per vocabulary word (default 1)");
  train->add_option("--states", f.states, "HMM states per class (default 5)");
  train->add_option("--mixtures", f.mixtures, "Gaussians per state (default 2)");
  train->add_option("--rate", f.rate, "Feature sample rate in Hz (default 30)");
  train->add_option("--tol", f.tol, "Relative log-likelihood tolerance (default 1e-6)");
  train->add_option("--max-iters", f.max_iters, "Maximum Baum-Welch iterations (default 100)");

  auto* cls = app.add_subcommand("classify", "Classify a gesture trajectory");
  cls->add_option("--models", f.models_dir, "Model directory")->required();
  cls->add_option("--trajectory", f.trajectory, "Trajectory CSV")->required();
  cls->add_option("--json", f.json_path, "Write JSON here ('-' for stdout)");

  auto* effect = app.add_subcommand("predict-effect", "Predict object velocity from a gesture");
  effect->add_option("--models", f.models_dir, "Model directory")->required();
  effect->add_option("--trajectory", f.trajectory, "Trajectory CSV")->required();
  effect->add_option("--shape", f.shape, "Object shape")->required();
  effect->add_option("--size", f.size, "Object size")->required();
  effect->add_option("--json", f.json_path, "Write JSON here ('-' for stdout)");

  auto* delta = app.add_subcommand("word-delta", "Change in word probabilities from action evidence");
  delta->add_option("--models", f.models_dir, "Model directory")->required();
  delta->add_option("--trajectory", f.trajectory, "Trajectory CSV of the observed gesture");
  delta->add_option("--action", f.action, "Explicit action label");
  delta->add_option("--shape", f.shape, "Object shape")->required();
  delta->add_option("--size", f.size, "Object size")->required();
  delta->add_option("--objvel", f.objvel, "Observed object velocity")->required();
  delta->add_option("--threshold", f.threshold, "Omit words with |delta| below this (default 0.005)");
  delta->add_option("--json", f.json_path, "Write JSON here ('-' for stdout)");

  auto* eval = app.add_subcommand("eval", "Evaluate models on a held-out corpus");
  eval->add_option("--models", f.models_dir, "Model directory")->required();
  eval->add_option("--data", f.data_dir, "Held-out corpus directory")->required();
  eval->add_option("--report", f.report, "Write the JSON report here");
  eval->add_option("--checks", f.checks, "Random network self-check queries (default 500)");

  std::vector<const char*> argv{"affgest"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kUsage;
  }

  const bool training = train->parsed();
  try {
    const RunConfig config = resolve_config(f);
    if (gen->parsed()) return cmd_gen(config, f, out);
    if (train->parsed()) return cmd_train(config, f, out);
    if (cls->parsed()) return cmd_classify(config, f, out);
    if (effect->parsed()) return cmd_predict_effect(config, f, out);
    if (delta->parsed()) return cmd_word_delta(config, f, out);
    if (eval->parsed()) return cmd_eval(config, f, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return exit_code_for(e.code(), training);
  }
  return kUsage;
}

}  // namespace affgest::cli
