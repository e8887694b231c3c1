#include "affgest/domain.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "affgest/error.hpp"

namespace affgest {

SymbolicDomain::SymbolicDomain(std::string name, std::vector<std::string> values)
    : name_(std::move(name)), values_(std::move(values)) {
  if (name_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "domain name must not be empty");
  }
  if (values_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "domain '" + name_ + "' has no values");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    for (std::size_t j = i + 1; j < values_.size(); ++j) {
      if (values_[i] == values_[j]) {
        throw Error(ErrorCode::kInvalidArgument,
                    "domain '" + name_ + "' repeats value '" + values_[i] + "'");
      }
    }
  }
}

std::optional<std::size_t> SymbolicDomain::index_of(std::string_view label) const {
  auto it = std::find(values_.begin(), values_.end(), label);
  if (it == values_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - values_.begin());
}

std::size_t SymbolicDomain::require(std::string_view label, std::string_view field) const {
  if (auto idx = index_of(label)) return *idx;
  throw UnknownLabelError(std::string(field), std::string(label));
}

const SymbolicDomain& action_domain() {
  static const SymbolicDomain d{"Action", {"grasp", "tap", "touch"}};
  return d;
}
const SymbolicDomain& shape_domain() {
  static const SymbolicDomain d{"Shape", {"sphere", "box"}};
  return d;
}
const SymbolicDomain& size_domain() {
  static const SymbolicDomain d{"Size", {"small", "medium", "big"}};
  return d;
}
const SymbolicDomain& objvel_domain() {
  static const SymbolicDomain d{"ObjVel", {"slow", "medium", "fast"}};
  return d;
}

const std::vector<SymbolicDomain>& standard_domains() {
  static const std::vector<SymbolicDomain> all{action_domain(), shape_domain(), size_domain(),
                                               objvel_domain()};
  return all;
}

namespace {

std::string_view record_field_name(std::string_view variable) {
  if (variable == vars::kAction) return "action";
  if (variable == vars::kShape) return "shape";
  if (variable == vars::kSize) return "size";
  if (variable == vars::kObjVel) return "objvel";
  return {};
}

}  // namespace

const std::string& ExperimentRecord::value_of(std::string_view variable) const {
  if (variable == vars::kAction) return action;
  if (variable == vars::kShape) return shape;
  if (variable == vars::kSize) return size;
  if (variable == vars::kObjVel) return objvel;
  throw Error(ErrorCode::kInvalidArgument,
              "records carry no variable named '" + std::string(variable) + "'");
}

std::string normalize_token(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (unsigned char c : raw) {
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::set<std::string> tokenize_utterance(std::string_view utterance) {
  std::set<std::string> words;
  std::istringstream in{std::string(utterance)};
  std::string raw;
  while (in >> raw) {
    auto token = normalize_token(raw);
    if (!token.empty()) words.insert(std::move(token));
  }
  return words;
}

const ExperimentRecord& validate_record(const ExperimentRecord& record,
                                        std::span<const SymbolicDomain> domains) {
  for (const auto& domain : domains) {
    auto field = record_field_name(domain.name());
    if (field.empty()) continue;
    domain.require(record.value_of(domain.name()), field);
  }
  return record;
}

const ExperimentRecord& validate_record(const ExperimentRecord& record) {
  return validate_record(record, standard_domains());
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  auto sorted = tokens_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorCode::kInvalidArgument, "vocabulary tokens must be unique");
  }
  for (const auto& t : tokens_) {
    if (t.empty()) throw Error(ErrorCode::kInvalidArgument, "empty vocabulary token");
  }
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view token) const {
  auto it = std::find(tokens_.begin(), tokens_.end(), token);
  if (it == tokens_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - tokens_.begin());
}

Vocabulary build_vocabulary(std::span<const ExperimentRecord> records, int min_count) {
  if (min_count < 1) {
    throw Error(ErrorCode::kInvalidArgument, "min_count must be at least 1");
  }
  std::map<std::string, int> counts;
  for (const auto& r : records) {
    for (const auto& w : r.words) ++counts[w];
  }
  std::vector<std::string> tokens;
  for (const auto& [word, count] : counts) {
    if (count >= min_count) tokens.push_back(word);
  }
  if (tokens.empty()) {
    throw Error(ErrorCode::kEmptyVocabulary,
                "no token occurs in at least " + std::to_string(min_count) + " records");
  }
  return Vocabulary(std::move(tokens));
}

}  // namespace affgest
