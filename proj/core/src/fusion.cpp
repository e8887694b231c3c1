#include "affgest/fusion.hpp"

#include "affgest/error.hpp"

namespace affgest {

namespace {

const std::string kActionVar{vars::kAction};

void check_inputs(const LabelDistribution& hmm_posterior, const AffordanceNetwork& net,
                  const Evidence& evidence) {
  const auto& dom = net.domain_of(kActionVar);
  if (hmm_posterior.labels != dom.values()) {
    throw Error(ErrorCode::kInvalidArgument, "gesture posterior must be over the Action domain");
  }
  if (evidence.hard.contains(kActionVar) || evidence.soft.contains(kActionVar)) {
    throw Error(ErrorCode::kInvalidArgument, "evidence must not already constrain Action");
  }
}

Evidence with_action(const LabelDistribution& hmm_posterior, Evidence evidence,
                     FusionStrategy strategy) {
  if (strategy == FusionStrategy::kHard) {
    evidence.hard[kActionVar] = hmm_posterior.argmax_label();
  } else {
    evidence.soft[kActionVar] = hmm_posterior.probs;
  }
  return evidence;
}

}  // namespace

std::string_view to_string(FusionStrategy strategy) {
  switch (strategy) {
    case FusionStrategy::kHard: return "hard";
    case FusionStrategy::kSoft: return "soft";
    case FusionStrategy::kProduct: return "product";
  }
  return "unknown";
}

std::optional<FusionStrategy> parse_fusion_strategy(std::string_view name) {
  if (name == "hard") return FusionStrategy::kHard;
  if (name == "soft") return FusionStrategy::kSoft;
  if (name == "product") return FusionStrategy::kProduct;
  return std::nullopt;
}

LabelDistribution fuse_action(const LabelDistribution& hmm_posterior, const AffordanceNetwork& net,
                              const Evidence& evidence, FusionStrategy strategy) {
  check_inputs(hmm_posterior, net, evidence);
  const auto& dom = net.domain_of(kActionVar);
  switch (strategy) {
    case FusionStrategy::kHard:
      return LabelDistribution::one_hot(dom, hmm_posterior.argmax_label());
    case FusionStrategy::kSoft:
      try {
        return posterior(net, with_action(hmm_posterior, evidence, strategy), kActionVar);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kZeroProbabilityEvidence) throw;
        // Distinguish impossible evidence from disjoint sources.
        posterior(net, evidence, kActionVar);
        throw Error(ErrorCode::kZeroFusion, "gesture and network posteriors have disjoint support");
      }
    case FusionStrategy::kProduct: {
      const auto bn = posterior(net, evidence, kActionVar);
      std::vector<double> w(dom.size());
      double total = 0.0;
      for (std::size_t a = 0; a < w.size(); ++a) {
        w[a] = hmm_posterior.probs[a] * bn.probs[a];
        total += w[a];
      }
      if (!(total > 0.0)) {
        throw Error(ErrorCode::kZeroFusion, "gesture and network posteriors have disjoint support");
      }
      for (double& x : w) x /= total;
      return {dom.name(), dom.values(), std::move(w)};
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown fusion strategy");
}

LabelDistribution predict_downstream(const LabelDistribution& hmm_posterior,
                                     const AffordanceNetwork& net, const Evidence& evidence,
                                     std::string_view query, FusionStrategy strategy) {
  if (query == kActionVar) {
    throw Error(ErrorCode::kInvalidArgument, "use fuse_action to query Action");
  }
  if (strategy == FusionStrategy::kProduct) {
    throw Error(ErrorCode::kInvalidStrategy,
                "product fusion only answers Action queries, not '" + std::string(query) + "'");
  }
  check_inputs(hmm_posterior, net, evidence);
  const std::string q(query);
  if (evidence.hard.contains(q) || evidence.soft.contains(q)) {
    throw Error(ErrorCode::kInvalidArgument, "query '" + q + "' already carries evidence");
  }
  return posterior(net, with_action(hmm_posterior, evidence, strategy), query);
}

}  // namespace affgest
