#pragma once

// Symbolic world model shared by the whole pipeline: the discrete variable
// domains (actions, object features, effects), experiment records and the
// word vocabulary.

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace affgest {

/// A named, ordered set of discrete labels. The order given at construction
/// is canonical: every probability vector over this domain uses it.
class SymbolicDomain {
 public:
  SymbolicDomain(std::string name, std::vector<std::string> values);

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  const std::string& value(std::size_t index) const { return values_.at(index); }

  std::optional<std::size_t> index_of(std::string_view label) const;
  bool contains(std::string_view label) const { return index_of(label).has_value(); }

  /// Index of `label`; throws UnknownLabelError naming `field` otherwise.
  std::size_t require(std::string_view label, std::string_view field) const;

  friend bool operator==(const SymbolicDomain&, const SymbolicDomain&) = default;

 private:
  std::string name_;
  std::vector<std::string> values_;
};

namespace vars {
inline constexpr std::string_view kAction = "Action";
inline constexpr std::string_view kShape = "Shape";
inline constexpr std::string_view kSize = "Size";
inline constexpr std::string_view kObjVel = "ObjVel";
}  // namespace vars

const SymbolicDomain& action_domain();
const SymbolicDomain& shape_domain();
const SymbolicDomain& size_domain();
const SymbolicDomain& objvel_domain();

/// Action, Shape, Size, ObjVel in that order.
const std::vector<SymbolicDomain>& standard_domains();

/// One interaction with the world plus the words of its verbal description.
struct ExperimentRecord {
  std::string action;
  std::string shape;
  std::string size;
  std::string objvel;
  std::set<std::string> words;

  /// Field value for one of the four symbolic variables, by variable name.
  const std::string& value_of(std::string_view variable) const;

  friend bool operator==(const ExperimentRecord&, const ExperimentRecord&) = default;
};

/// Lowercases and strips everything that is not a letter or digit. May
/// return an empty string.
std::string normalize_token(std::string_view raw);

/// Splits an utterance on whitespace and normalizes each token.
std::set<std::string> tokenize_utterance(std::string_view utterance);

/// Returns `record` unchanged when every symbolic field belongs to its
/// domain in `domains` (matched by variable name); throws UnknownLabelError
/// naming the record field ("action", "shape", "size", "objvel") otherwise.
const ExperimentRecord& validate_record(const ExperimentRecord& record,
                                        std::span<const SymbolicDomain> domains);
const ExperimentRecord& validate_record(const ExperimentRecord& record);

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  std::optional<std::size_t> index_of(std::string_view token) const;
  bool contains(std::string_view token) const { return index_of(token).has_value(); }

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;

 private:
  std::vector<std::string> tokens_;
};

/// Tokens that occur in at least `min_count` records, sorted
/// lexicographically. Throws kEmptyVocabulary when nothing survives.
Vocabulary build_vocabulary(std::span<const ExperimentRecord> records, int min_count = 1);

}  // namespace affgest
