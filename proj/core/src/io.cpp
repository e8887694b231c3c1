#include "affgest/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "affgest/error.hpp"

namespace affgest {

using nlohmann::json;

namespace {

constexpr std::string_view kCsvHeader = "t,hx,hy,hz,tx,ty,tz";
constexpr std::string_view kNetworkFormat = "affgest-network/1";
constexpr std::string_view kGestureFormat = "affgest-gestures/1";

[[noreturn]] void parse_error(const std::string& message) {
  throw Error(ErrorCode::kParse, message);
}

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    parse_error("malformed " + std::string(what) + ": " + e.what());
  }
}

template <typename T>
T field(const json& j, const char* key, std::string_view what) {
  if (!j.is_object() || !j.contains(key)) {
    parse_error(std::string(what) + " is missing '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    parse_error(std::string(what) + " has a bad '" + key + "': " + e.what());
  }
}

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    auto nl = text.find('\n');
    out.push_back(trim(text.substr(0, nl)));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

json vec3_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

Vec3 vec3_from(const json& j, std::string_view what) {
  auto v = j.get<std::vector<double>>();
  if (v.size() != 3) parse_error(std::string(what) + " must have three components");
  return {v[0], v[1], v[2]};
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIo, "failed reading '" + path.string() + "'");
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Records

std::string record_to_json_line(const ExperimentRecord& record) {
  json j;
  j["action"] = record.action;
  j["shape"] = record.shape;
  j["size"] = record.size;
  j["objvel"] = record.objvel;
  j["words"] = std::vector<std::string>(record.words.begin(), record.words.end());
  return j.dump();
}

ExperimentRecord record_from_json_line(std::string_view line) {
  const json j = parse_json(line, "record");
  ExperimentRecord r;
  r.action = field<std::string>(j, "action", "record");
  r.shape = field<std::string>(j, "shape", "record");
  r.size = field<std::string>(j, "size", "record");
  r.objvel = field<std::string>(j, "objvel", "record");
  for (const auto& w : field<std::vector<std::string>>(j, "words", "record")) {
    auto token = normalize_token(w);
    if (!token.empty()) r.words.insert(std::move(token));
  }
  validate_record(r);
  return r;
}

std::string records_to_jsonl(std::span<const ExperimentRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += record_to_json_line(r);
    out += '\n';
  }
  return out;
}

std::vector<ExperimentRecord> records_from_jsonl(std::string_view text) {
  std::vector<ExperimentRecord> out;
  for (auto line : lines_of(text)) {
    if (!line.empty()) out.push_back(record_from_json_line(line));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trajectories

std::string trajectory_to_csv(const Trajectory& trajectory) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& f : trajectory.frames()) {
    out += format_double(f.t);
    for (double x : f.hand) (out += ',') += format_double(x);
    for (double x : f.torso) (out += ',') += format_double(x);
    out += '\n';
  }
  return out;
}

Trajectory trajectory_from_csv(std::string_view text) {
  const auto lines = lines_of(text);
  std::size_t i = 0;
  while (i < lines.size() && lines[i].empty()) ++i;
  if (i == lines.size() || lines[i] != kCsvHeader) {
    parse_error("trajectory CSV must start with header '" + std::string(kCsvHeader) + "'");
  }
  std::vector<TrajectoryFrame> frames;
  for (++i; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (line.empty()) continue;
    double v[7];
    for (int k = 0; k < 7; ++k) {
      auto comma = line.find(',');
      if ((comma == std::string_view::npos) != (k == 6)) {
        parse_error("trajectory CSV line " + std::to_string(i + 1) + " needs 7 columns");
      }
      auto cell = trim(line.substr(0, comma));
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v[k]);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        parse_error("trajectory CSV line " + std::to_string(i + 1) + " has a bad number '" +
                    std::string(cell) + "'");
      }
      if (comma != std::string_view::npos) line.remove_prefix(comma + 1);
    }
    frames.push_back({v[0], {v[1], v[2], v[3]}, {v[4], v[5], v[6]}});
  }
  try {
    return Trajectory(std::move(frames));
  } catch (const Error& e) {
    parse_error(std::string("invalid trajectory: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Dataset manifest

std::string dataset_manifest_to_jsonl(std::span<const DatasetEntry> entries) {
  std::string out;
  for (const auto& e : entries) {
    json j;
    j["file"] = e.file;
    j["action"] = e.action;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<DatasetEntry> dataset_manifest_from_jsonl(std::string_view text) {
  std::vector<DatasetEntry> out;
  for (auto line : lines_of(text)) {
    if (line.empty()) continue;
    const json j = parse_json(line, "dataset entry");
    DatasetEntry e{field<std::string>(j, "file", "dataset entry"),
                   field<std::string>(j, "action", "dataset entry")};
    action_domain().require(e.action, "action");
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Affordance network

std::string network_to_json(const AffordanceNetwork& net) {
  json j;
  j["format"] = kNetworkFormat;
  j["variables"] = json::array();
  for (const auto& v : net.variables()) {
    j["variables"].push_back({{"name", v.name()}, {"values", v.values()}});
  }
  j["vocabulary"] = net.vocabulary().tokens();
  j["structure"] = net.structure().parents;
  j["cpts"] = json::array();
  for (const auto& c : net.cpts()) {
    j["cpts"].push_back({{"child", c.child}, {"parents", c.parents}, {"rows", c.rows}});
  }
  return j.dump(1) + "\n";
}

AffordanceNetwork network_from_json(std::string_view text) {
  const json j = parse_json(text, "network file");
  if (field<std::string>(j, "format", "network file") != kNetworkFormat) {
    parse_error("network file has an unsupported format tag");
  }
  NetworkStructure s;
  try {
    for (const auto& v : field<json>(j, "variables", "network file")) {
      s.variables.emplace_back(field<std::string>(v, "name", "variable"),
                               field<std::vector<std::string>>(v, "values", "variable"));
    }
    s.vocabulary = Vocabulary(field<std::vector<std::string>>(j, "vocabulary", "network file"));
    s.parents = field<std::map<std::string, std::vector<std::string>>>(j, "structure", "network file");
    std::vector<Cpt> cpts;
    for (const auto& c : field<json>(j, "cpts", "network file")) {
      cpts.push_back({field<std::string>(c, "child", "cpt"),
                      field<std::vector<std::string>>(c, "parents", "cpt"),
                      field<std::vector<std::vector<double>>>(c, "rows", "cpt")});
    }
    return AffordanceNetwork(std::move(s), std::move(cpts));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) throw;
    parse_error(std::string("invalid network file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Gesture models

std::string model_set_to_json(const GestureModelSet& models) {
  json j;
  j["format"] = kGestureFormat;
  j["feature_rate"] = models.feature_rate;
  j["priors"] = {{"labels", models.priors.labels}, {"probs", models.priors.probs}};
  j["models"] = json::array();
  for (const auto& m : models.models) {
    json jm;
    jm["label"] = m.label;
    jm["initial"] = m.initial;
    jm["trans"] = m.trans;
    jm["emissions"] = json::array();
    for (const auto& g : m.emissions) {
      json jg;
      jg["weights"] = g.weights;
      jg["means"] = json::array();
      jg["variances"] = json::array();
      for (const auto& mu : g.means) jg["means"].push_back(vec3_json(mu));
      for (const auto& v : g.variances) jg["variances"].push_back(vec3_json(v));
      jm["emissions"].push_back(std::move(jg));
    }
    j["models"].push_back(std::move(jm));
  }
  return j.dump(1) + "\n";
}

GestureModelSet model_set_from_json(std::string_view text) {
  const json j = parse_json(text, "gesture model file");
  if (field<std::string>(j, "format", "gesture model file") != kGestureFormat) {
    parse_error("gesture model file has an unsupported format tag");
  }
  GestureModelSet set;
  try {
    set.feature_rate = field<double>(j, "feature_rate", "gesture model file");
    const auto& pj = field<json>(j, "priors", "gesture model file");
    set.priors = {std::string(vars::kAction), field<std::vector<std::string>>(pj, "labels", "priors"),
                  field<std::vector<double>>(pj, "probs", "priors")};
    for (const auto& jm : field<json>(j, "models", "gesture model file")) {
      GestureHmm m;
      m.label = field<std::string>(jm, "label", "model");
      m.initial = field<std::vector<double>>(jm, "initial", "model");
      m.trans = field<std::vector<std::vector<double>>>(jm, "trans", "model");
      for (const auto& jg : field<json>(jm, "emissions", "model")) {
        GaussianMixture g;
        g.weights = field<std::vector<double>>(jg, "weights", "emission");
        for (const auto& mu : field<json>(jg, "means", "emission")) g.means.push_back(vec3_from(mu, "mean"));
        for (const auto& v : field<json>(jg, "variances", "emission")) {
          g.variances.push_back(vec3_from(v, "variance"));
        }
        m.emissions.push_back(std::move(g));
      }
      set.models.push_back(std::move(m));
    }
    set.validate();
  } catch (const json::exception& e) {
    parse_error(std::string("invalid gesture model file: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) throw;
    parse_error(std::string("invalid gesture model file: ") + e.what());
  }
  return set;
}

// ---------------------------------------------------------------------------
// Corpus manifest

std::string corpus_manifest_to_json(std::uint64_t seed, std::size_t n, const WorldTable& table,
                                    const UtteranceGrammar& grammar, const GestureParams& params) {
  json j;
  j["generator"] = Rng::kAlgorithm;
  j["stream_derivation"] = "record i draws from a generator seeded with seed + i";
  j["seed"] = seed;
  j["n"] = n;
  j["table"] = json::array();
  for (const auto& [key, probs] : table.effect_dist) {
    j["table"].push_back({{"action", key[0]}, {"shape", key[1]}, {"size", key[2]}, {"objvel", probs}});
  }
  json g;
  g["templates"] = json::array();
  for (const auto& t : grammar.templates) g["templates"].push_back(t);
  g["lexicon"] = json::object();
  for (const auto& [key, choices] : grammar.lexicon) {
    json cj = json::array();
    for (const auto& c : choices) cj.push_back({{"word", c.word}, {"weight", c.weight}});
    g["lexicon"][key] = std::move(cj);
  }
  j["grammar"] = std::move(g);

  auto kin = [](const ActionKinematics& k) {
    return json{{"start_offset", vec3_json(k.start_offset)},
                {"start_spread", k.start_spread},
                {"duration", {k.duration_min, k.duration_max}},
                {"dwell", {k.dwell_min, k.dwell_max}}};
  };
  j["gesture_params"] = {{"grasp", kin(params.grasp)},
                         {"tap", kin(params.tap)},
                         {"touch", kin(params.touch)},
                         {"torso", vec3_json(params.torso)},
                         {"object_offset", vec3_json(params.object_offset)},
                         {"object_spread", params.object_spread},
                         {"amplitude", {params.amplitude_min, params.amplitude_max}},
                         {"noise_sigma", params.noise_sigma},
                         {"torso_jitter", params.torso_jitter},
                         {"frame_rate", params.frame_rate}};
  return j.dump(1) + "\n";
}

}  // namespace affgest
