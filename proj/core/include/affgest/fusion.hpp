#pragma once

// Combining the gesture recognizer's action posterior with the affordance
// network.

#include <optional>
#include <string>
#include <string_view>

#include "affgest/bayesnet.hpp"

namespace affgest {

enum class FusionStrategy {
  kHard,     // clamp Action to the recognizer's top label
  kSoft,     // recognizer posterior enters as virtual evidence on Action
  kProduct,  // p_HMM(a) * p_BN(a | evidence), renormalized; Action queries only
};

std::string_view to_string(FusionStrategy strategy);
std::optional<FusionStrategy> parse_fusion_strategy(std::string_view name);

/// Action posterior combining `hmm_posterior` with the network under
/// `evidence`, which must not mention Action. Throws kZeroFusion when the two
/// sources put all their mass on disjoint actions.
LabelDistribution fuse_action(const LabelDistribution& hmm_posterior, const AffordanceNetwork& net,
                              const Evidence& evidence, FusionStrategy strategy);

/// Posterior of a non-Action variable or word given the recognizer output and
/// `evidence`. Word queries return the {absent, present} distribution. The
/// product strategy is rejected with kInvalidStrategy.
LabelDistribution predict_downstream(const LabelDistribution& hmm_posterior,
                                     const AffordanceNetwork& net, const Evidence& evidence,
                                     std::string_view query, FusionStrategy strategy);

}  // namespace affgest
