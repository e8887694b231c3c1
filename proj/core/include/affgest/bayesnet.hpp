#pragma once

// Discrete Bayesian network over the symbolic world variables with one binary
// leaf per vocabulary word. Parameters are learned by smoothed counting and
// queries are answered exactly by enumerating the joint assignments of the
// symbolic variables; word leaves are folded in analytically.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "affgest/domain.hpp"

namespace affgest {

/// Values of a word node, in canonical order.
inline constexpr std::string_view kWordAbsent = "absent";
inline constexpr std::string_view kWordPresent = "present";

/// Normalized probability vector over a named domain.
struct LabelDistribution {
  std::string variable;
  std::vector<std::string> labels;
  std::vector<double> probs;

  /// First index of the maximum (canonical order breaks ties).
  std::size_t argmax() const;
  const std::string& argmax_label() const { return labels.at(argmax()); }
  double prob(std::string_view label) const;

  /// Normalizes non-negative `weights` over `domain`. Throws
  /// kInvalidArgument on size mismatch, negative entries or zero mass.
  static LabelDistribution from_weights(const SymbolicDomain& domain,
                                        std::vector<double> weights);
  static LabelDistribution uniform(const SymbolicDomain& domain);
  static LabelDistribution one_hot(const SymbolicDomain& domain, std::string_view label);
};

/// Hard values and Pearl-style likelihood (virtual) evidence, keyed by
/// variable name or word token.
struct Evidence {
  std::map<std::string, std::string> hard;
  std::map<std::string, std::vector<double>> soft;
};

/// DAG over the symbolic variables plus word leaves.
struct NetworkStructure {
  std::vector<SymbolicDomain> variables;
  Vocabulary vocabulary;
  /// Parent list for every node (symbolic variable or word token). Only
  /// symbolic variables may appear as parents.
  std::map<std::string, std::vector<std::string>> parents;

  /// Action, Shape, Size as roots; ObjVel <- {Action, Shape, Size}; every
  /// word <- {Action, Shape, Size, ObjVel}.
  static NetworkStructure standard(Vocabulary vocabulary);

  static NetworkStructure with_shared_word_parents(
      std::vector<SymbolicDomain> variables,
      std::map<std::string, std::vector<std::string>> symbolic_parents,
      Vocabulary vocabulary, std::vector<std::string> word_parents);

  /// Throws kInvalidArgument on cycles, missing nodes, unknown or word parents.
  void validate() const;
};

/// Conditional table of one node. Rows are indexed by the parent assignment
/// in mixed radix with the first parent most significant.
struct Cpt {
  std::string child;
  std::vector<std::string> parents;
  std::vector<std::vector<double>> rows;
};

class AffordanceNetwork {
 public:
  /// `cpts` must hold one table per node: symbolic variables in structure
  /// order followed by words in vocabulary order.
  AffordanceNetwork(NetworkStructure structure, std::vector<Cpt> cpts);

  const NetworkStructure& structure() const noexcept { return structure_; }
  const std::vector<SymbolicDomain>& variables() const noexcept { return structure_.variables; }
  const Vocabulary& vocabulary() const noexcept { return structure_.vocabulary; }
  const std::vector<Cpt>& cpts() const noexcept { return cpts_; }

  std::size_t symbolic_count() const noexcept { return structure_.variables.size(); }
  std::size_t node_count() const noexcept { return node_domains_.size(); }
  std::optional<std::size_t> node_index(std::string_view name) const;
  bool is_word_node(std::size_t node) const noexcept { return node >= symbolic_count(); }
  const SymbolicDomain& node_domain(std::size_t node) const { return node_domains_.at(node); }
  const SymbolicDomain& domain_of(std::string_view name) const;
  const Cpt& cpt(std::string_view name) const;
  std::span<const std::size_t> parent_nodes(std::size_t node) const { return parents_.at(node); }

  /// p(node = value | parents) with parent values read from a full
  /// assignment of the symbolic variables.
  double conditional(std::size_t node, std::size_t value,
                     std::span<const std::size_t> symbolic_assignment) const;

  /// Row of `node`'s table selected by `symbolic_assignment`.
  std::span<const double> row(std::size_t node,
                              std::span<const std::size_t> symbolic_assignment) const;

 private:
  NetworkStructure structure_;
  std::vector<Cpt> cpts_;
  std::vector<SymbolicDomain> node_domains_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> strides_;
};

/// Laplace-style estimate: (count(v, row) + alpha) / (count(row) + alpha * |domain|).
/// Words outside the structure's vocabulary are ignored. With alpha = 0 an
/// unobserved parent configuration raises kEmptyRow.
AffordanceNetwork learn_cpts(std::span<const ExperimentRecord> records,
                             const NetworkStructure& structure, double alpha = 1.0);

/// Exact posterior over `query` (symbolic variable or word token).
/// Throws kZeroProbabilityEvidence when the evidence is impossible.
LabelDistribution posterior(const AffordanceNetwork& net, const Evidence& evidence,
                            std::string_view query);

/// p(token present | evidence). Throws kUnknownWord for tokens outside the
/// vocabulary.
double word_posterior(const AffordanceNetwork& net, const Evidence& evidence,
                      std::string_view token);

struct WordDelta {
  std::string token;
  double delta;
};

/// For every word: p(w | features, effects, Action=action) - p(w | features,
/// effects), sorted by |delta| descending (vocabulary order on ties).
std::vector<WordDelta> word_delta(const AffordanceNetwork& net,
                                  const std::map<std::string, std::string>& features,
                                  const std::map<std::string, std::string>& effects,
                                  std::string_view action);

/// Reference posterior computed by materializing the joint over the symbolic
/// variables and every word named in the evidence or the query, then summing.
/// Slow, but shares no code with `posterior`; used for self-checks in `eval`.
LabelDistribution enumerate_posterior(const AffordanceNetwork& net, const Evidence& evidence,
                                      std::string_view query);

}  // namespace affgest
