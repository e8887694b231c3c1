#pragma once

// Reference implementations used only by tests. They share no code with the
// library's inference or scoring routines.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "affgest/bayesnet.hpp"
#include "affgest/gesture.hpp"

namespace affgest::testing {

/// Network description owned by the test, from which both the library
/// network and the brute-force joint are built.
struct RandomNetSpec {
  std::vector<std::string> names;                 // symbolic variables, topological order
  std::vector<std::size_t> sizes;                 // domain size per variable
  std::vector<std::vector<std::size_t>> parents;  // symbolic parents per symbolic variable
  std::vector<std::string> words;
  std::vector<std::vector<std::size_t>> word_parents;
  std::vector<std::vector<std::vector<double>>> tables;  // one per node, rows mixed radix
};

struct RandomNetOptions {
  std::size_t max_variables = 4;
  std::size_t max_domain = 3;
  std::size_t max_words = 20;
  /// Adds exact zeros to some rows so impossible evidence gets exercised.
  double zero_fraction = 0.0;
};

RandomNetSpec random_net_spec(std::mt19937_64& rng, const RandomNetOptions& options);
AffordanceNetwork build_network(const RandomNetSpec& spec);

/// Random evidence: hard and soft entries on symbolic variables and words.
/// Leaves at most `max_free_words` words unobserved so the oracle stays small.
Evidence random_evidence(std::mt19937_64& rng, const RandomNetSpec& spec, std::size_t max_free_words);

/// Posterior of `query` by summing the full joint over every node that is not
/// fixed by hard evidence. Returns an empty vector for zero-probability evidence.
std::vector<double> joint_enumeration_posterior(const RandomNetSpec& spec, const Evidence& evidence,
                                                const std::string& query);

/// log p(seq | model) by summing over every state path.
double path_enumeration_log_likelihood(const GestureHmm& model, const FeatureSequence& seq);

/// Random left-right HMM with Q states and M components per state.
GestureHmm random_bakis_hmm(std::mt19937_64& rng, std::size_t q, std::size_t m);

FeatureSequence random_sequence(std::mt19937_64& rng, std::size_t t);

}  // namespace affgest::testing
