#include "affgest/bayesnet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "affgest/error.hpp"

namespace affgest {

namespace {

constexpr double kRowTolerance = 1e-12;

SymbolicDomain word_domain(const std::string& token) {
  return SymbolicDomain(token, {std::string(kWordAbsent), std::string(kWordPresent)});
}

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

}  // namespace

// ---------------------------------------------------------------------------
// LabelDistribution

std::size_t LabelDistribution::argmax() const {
  if (probs.empty()) invalid("argmax of an empty distribution");
  return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

double LabelDistribution::prob(std::string_view label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw UnknownLabelError(variable, std::string(label));
  return probs[static_cast<std::size_t>(it - labels.begin())];
}

LabelDistribution LabelDistribution::from_weights(const SymbolicDomain& domain,
                                                  std::vector<double> weights) {
  if (weights.size() != domain.size()) {
    invalid("distribution over " + domain.name() + " needs " + std::to_string(domain.size()) +
            " entries, got " + std::to_string(weights.size()));
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) invalid("negative or non-finite weight over " + domain.name());
    total += w;
  }
  if (!(total > 0.0)) invalid("weights over " + domain.name() + " have zero mass");
  for (double& w : weights) w /= total;
  return {domain.name(), domain.values(), std::move(weights)};
}

LabelDistribution LabelDistribution::uniform(const SymbolicDomain& domain) {
  return from_weights(domain, std::vector<double>(domain.size(), 1.0));
}

LabelDistribution LabelDistribution::one_hot(const SymbolicDomain& domain, std::string_view label) {
  std::vector<double> w(domain.size(), 0.0);
  w[domain.require(label, domain.name())] = 1.0;
  return {domain.name(), domain.values(), std::move(w)};
}

// ---------------------------------------------------------------------------
// NetworkStructure

NetworkStructure NetworkStructure::standard(Vocabulary vocabulary) {
  const std::string a(vars::kAction), sh(vars::kShape), sz(vars::kSize), v(vars::kObjVel);
  return with_shared_word_parents(standard_domains(), {{a, {}}, {sh, {}}, {sz, {}}, {v, {a, sh, sz}}},
                                  std::move(vocabulary), {a, sh, sz, v});
}

NetworkStructure NetworkStructure::with_shared_word_parents(
    std::vector<SymbolicDomain> variables,
    std::map<std::string, std::vector<std::string>> symbolic_parents, Vocabulary vocabulary,
    std::vector<std::string> word_parents) {
  NetworkStructure s;
  s.variables = std::move(variables);
  s.vocabulary = std::move(vocabulary);
  s.parents = std::move(symbolic_parents);
  for (const auto& var : s.variables) s.parents.try_emplace(var.name());
  for (const auto& token : s.vocabulary.tokens()) s.parents[token] = word_parents;
  s.validate();
  return s;
}

void NetworkStructure::validate() const {
  if (variables.empty()) invalid("network needs at least one symbolic variable");
  std::map<std::string, std::size_t> symbolic;
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (!symbolic.emplace(variables[i].name(), i).second) {
      invalid("duplicate variable '" + variables[i].name() + "'");
    }
  }
  for (const auto& token : vocabulary.tokens()) {
    if (symbolic.contains(token)) invalid("word '" + token + "' collides with a variable name");
  }
  const std::size_t expected = variables.size() + vocabulary.size();
  if (parents.size() != expected) {
    for (const auto& [child, _] : parents) {
      if (!symbolic.contains(child) && !vocabulary.contains(child)) {
        invalid("structure names unknown node '" + child + "'");
      }
    }
    invalid("structure must list parents for every variable and word");
  }
  for (const auto& [child, ps] : parents) {
    if (!symbolic.contains(child) && !vocabulary.contains(child)) {
      invalid("structure names unknown node '" + child + "'");
    }
    std::set<std::string> seen;
    for (const auto& p : ps) {
      if (!symbolic.contains(p)) {
        invalid("parent '" + p + "' of '" + child + "' is not a symbolic variable");
      }
      if (p == child) invalid("node '" + child + "' is its own parent");
      if (!seen.insert(p).second) invalid("node '" + child + "' lists parent '" + p + "' twice");
    }
  }
  // Cycle check over the symbolic sub-graph (words are leaves by construction).
  std::vector<int> mark(variables.size(), 0);
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    if (mark[v] == 2) return;
    if (mark[v] == 1) invalid("structure contains a cycle through '" + variables[v].name() + "'");
    mark[v] = 1;
    for (const auto& p : parents.at(variables[v].name())) visit(symbolic.at(p));
    mark[v] = 2;
  };
  for (std::size_t v = 0; v < variables.size(); ++v) visit(v);
}

// ---------------------------------------------------------------------------
// AffordanceNetwork

AffordanceNetwork::AffordanceNetwork(NetworkStructure structure, std::vector<Cpt> cpts)
    : structure_(std::move(structure)), cpts_(std::move(cpts)) {
  structure_.validate();
  for (const auto& v : structure_.variables) node_domains_.push_back(v);
  for (const auto& t : structure_.vocabulary.tokens()) node_domains_.push_back(word_domain(t));

  if (cpts_.size() != node_domains_.size()) {
    invalid("expected " + std::to_string(node_domains_.size()) + " CPTs, got " +
            std::to_string(cpts_.size()));
  }
  parents_.resize(node_count());
  strides_.resize(node_count());
  for (std::size_t n = 0; n < node_count(); ++n) {
    const Cpt& cpt = cpts_[n];
    const std::string& name = node_domains_[n].name();
    if (cpt.child != name) invalid("CPT " + std::to_string(n) + " is for '" + cpt.child + "', expected '" + name + "'");
    if (cpt.parents != structure_.parents.at(name)) {
      invalid("CPT parents of '" + name + "' disagree with the structure");
    }
    std::size_t rows = 1;
    for (const auto& p : cpt.parents) {
      parents_[n].push_back(*node_index(p));
      rows *= node_domains_[parents_[n].back()].size();
    }
    strides_[n].assign(parents_[n].size(), 1);
    for (std::size_t k = parents_[n].size(); k-- > 1;) {
      strides_[n][k - 1] = strides_[n][k] * node_domains_[parents_[n][k]].size();
    }
    if (cpt.rows.size() != rows) {
      invalid("CPT of '" + name + "' has " + std::to_string(cpt.rows.size()) + " rows, expected " +
              std::to_string(rows));
    }
    for (const auto& r : cpt.rows) {
      if (r.size() != node_domains_[n].size()) invalid("CPT row of '" + name + "' has wrong width");
      double sum = 0.0;
      for (double p : r) {
        if (!(p >= 0.0) || !std::isfinite(p)) invalid("CPT of '" + name + "' has a negative entry");
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowTolerance) invalid("CPT row of '" + name + "' does not sum to 1");
    }
  }
}

std::optional<std::size_t> AffordanceNetwork::node_index(std::string_view name) const {
  for (std::size_t i = 0; i < structure_.variables.size(); ++i) {
    if (structure_.variables[i].name() == name) return i;
  }
  if (auto w = structure_.vocabulary.index_of(name)) return symbolic_count() + *w;
  return std::nullopt;
}

const SymbolicDomain& AffordanceNetwork::domain_of(std::string_view name) const {
  auto idx = node_index(name);
  if (!idx) invalid("unknown node '" + std::string(name) + "'");
  return node_domains_[*idx];
}

const Cpt& AffordanceNetwork::cpt(std::string_view name) const {
  auto idx = node_index(name);
  if (!idx) invalid("unknown node '" + std::string(name) + "'");
  return cpts_[*idx];
}

std::span<const double> AffordanceNetwork::row(std::size_t node,
                                               std::span<const std::size_t> assignment) const {
  std::size_t r = 0;
  const auto& ps = parents_[node];
  for (std::size_t k = 0; k < ps.size(); ++k) r += assignment[ps[k]] * strides_[node][k];
  return cpts_[node].rows[r];
}

double AffordanceNetwork::conditional(std::size_t node, std::size_t value,
                                      std::span<const std::size_t> assignment) const {
  return row(node, assignment)[value];
}

// ---------------------------------------------------------------------------
// Learning

AffordanceNetwork learn_cpts(std::span<const ExperimentRecord> records,
                             const NetworkStructure& structure, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) invalid("alpha must be a finite value >= 0");
  if (records.empty() && alpha == 0.0) invalid("learning with alpha = 0 needs at least one record");
  structure.validate();

  const std::size_t nsym = structure.variables.size();
  const std::size_t nwords = structure.vocabulary.size();

  // Encode records once: symbolic value indices and word presence.
  std::vector<std::vector<std::size_t>> assignments;
  std::vector<std::vector<bool>> presence;
  assignments.reserve(records.size());
  presence.reserve(records.size());
  for (const auto& rec : records) {
    validate_record(rec, structure.variables);
    std::vector<std::size_t> a(nsym);
    for (std::size_t v = 0; v < nsym; ++v) {
      a[v] = *structure.variables[v].index_of(rec.value_of(structure.variables[v].name()));
    }
    std::vector<bool> p(nwords, false);
    for (const auto& w : rec.words) {
      if (auto idx = structure.vocabulary.index_of(w)) p[*idx] = true;
    }
    assignments.push_back(std::move(a));
    presence.push_back(std::move(p));
  }

  auto domain_index = [&](const std::string& name) {
    for (std::size_t v = 0; v < nsym; ++v) {
      if (structure.variables[v].name() == name) return v;
    }
    invalid("unknown variable '" + name + "'");
  };

  std::vector<Cpt> cpts;
  cpts.reserve(nsym + nwords);
  for (std::size_t n = 0; n < nsym + nwords; ++n) {
    const bool is_word = n >= nsym;
    const std::string& name =
        is_word ? structure.vocabulary.tokens()[n - nsym] : structure.variables[n].name();
    const std::size_t width = is_word ? 2 : structure.variables[n].size();
    const auto& parent_names = structure.parents.at(name);

    std::vector<std::size_t> pidx, sizes;
    for (const auto& p : parent_names) {
      pidx.push_back(domain_index(p));
      sizes.push_back(structure.variables[pidx.back()].size());
    }
    std::size_t nrows = 1;
    for (auto s : sizes) nrows *= s;

    std::vector<std::vector<double>> counts(nrows, std::vector<double>(width, 0.0));
    for (std::size_t r = 0; r < assignments.size(); ++r) {
      std::size_t row = 0;
      for (std::size_t k = 0; k < pidx.size(); ++k) row = row * sizes[k] + assignments[r][pidx[k]];
      const std::size_t value = is_word ? (presence[r][n - nsym] ? 1 : 0) : assignments[r][n];
      counts[row][value] += 1.0;
    }

    Cpt cpt{name, parent_names, {}};
    cpt.rows.reserve(nrows);
    for (std::size_t row = 0; row < nrows; ++row) {
      const double total = std::accumulate(counts[row].begin(), counts[row].end(), 0.0);
      const double denom = total + alpha * static_cast<double>(width);
      if (denom == 0.0) {
        std::ostringstream msg;
        msg << "no records for " << name << " given";
        std::size_t rem = row;
        std::vector<std::size_t> digits(pidx.size());
        for (std::size_t k = pidx.size(); k-- > 0;) {
          digits[k] = rem % sizes[k];
          rem /= sizes[k];
        }
        for (std::size_t k = 0; k < pidx.size(); ++k) {
          msg << (k ? ", " : " ") << parent_names[k] << "="
              << structure.variables[pidx[k]].value(digits[k]);
        }
        throw Error(ErrorCode::kEmptyRow, msg.str());
      }
      std::vector<double> probs(width);
      for (std::size_t v = 0; v < width; ++v) probs[v] = (counts[row][v] + alpha) / denom;
      cpt.rows.push_back(std::move(probs));
    }
    cpts.push_back(std::move(cpt));
  }
  return AffordanceNetwork(structure, std::move(cpts));
}

// ---------------------------------------------------------------------------
// Inference by enumeration

namespace {

/// Evidence resolved to node indices. `symbolic_factor[v]` multiplies the
/// joint by a per-value weight (hard evidence becomes an indicator); word
/// evidence becomes a likelihood over {absent, present}.
struct ResolvedEvidence {
  std::vector<std::vector<double>> symbolic_factor;
  std::vector<std::pair<std::size_t, std::array<double, 2>>> word_factor;
  std::vector<bool> observed;
};

std::vector<double> checked_likelihood(const SymbolicDomain& domain, const std::vector<double>& lik) {
  if (lik.size() != domain.size()) {
    invalid("soft evidence on '" + domain.name() + "' needs " + std::to_string(domain.size()) +
            " entries");
  }
  bool positive = false;
  for (double x : lik) {
    if (!(x >= 0.0) || !std::isfinite(x)) invalid("soft evidence on '" + domain.name() + "' is negative");
    positive = positive || x > 0.0;
  }
  if (!positive) invalid("soft evidence on '" + domain.name() + "' has no positive entry");
  return lik;
}

ResolvedEvidence resolve(const AffordanceNetwork& net, const Evidence& evidence) {
  ResolvedEvidence r;
  r.symbolic_factor.resize(net.symbolic_count());
  r.observed.assign(net.node_count(), false);

  auto add = [&](const std::string& name, std::vector<double> factor) {
    const auto idx = net.node_index(name);
    r.observed[*idx] = true;
    if (net.is_word_node(*idx)) {
      r.word_factor.push_back({*idx, {factor[0], factor[1]}});
    } else {
      r.symbolic_factor[*idx] = std::move(factor);
    }
  };

  auto require_node = [&](const std::string& name) {
    auto idx = net.node_index(name);
    if (!idx) invalid("evidence on unknown variable or word '" + name + "'");
    return *idx;
  };

  for (const auto& [name, label] : evidence.hard) {
    if (evidence.soft.contains(name)) invalid("'" + name + "' has both hard and soft evidence");
    const auto idx = require_node(name);
    const auto& dom = net.node_domain(idx);
    std::vector<double> indicator(dom.size(), 0.0);
    indicator[dom.require(label, name)] = 1.0;
    add(name, std::move(indicator));
  }
  for (const auto& [name, lik] : evidence.soft) {
    add(name, checked_likelihood(net.node_domain(require_node(name)), lik));
  }
  return r;
}

/// Visits every symbolic assignment with its unnormalized weight under the
/// evidence. Assignments with zero weight are skipped.
template <typename Visitor>
void enumerate_joint(const AffordanceNetwork& net, const ResolvedEvidence& ev, Visitor&& visit) {
  const std::size_t n = net.symbolic_count();
  std::vector<std::size_t> a(n, 0);
  while (true) {
    double w = 1.0;
    for (std::size_t v = 0; v < n && w > 0.0; ++v) {
      if (!ev.symbolic_factor[v].empty()) w *= ev.symbolic_factor[v][a[v]];
      if (w > 0.0) w *= net.conditional(v, a[v], a);
    }
    for (std::size_t k = 0; k < ev.word_factor.size() && w > 0.0; ++k) {
      const auto& [node, lik] = ev.word_factor[k];
      const auto row = net.row(node, a);
      w *= lik[0] * row[0] + lik[1] * row[1];
    }
    if (w > 0.0) visit(std::span<const std::size_t>(a), w);

    std::size_t v = n;
    while (v-- > 0) {
      if (++a[v] < net.node_domain(v).size()) break;
      a[v] = 0;
    }
    if (v == static_cast<std::size_t>(-1)) break;
  }
}

}  // namespace

LabelDistribution posterior(const AffordanceNetwork& net, const Evidence& evidence,
                            std::string_view query) {
  auto q = net.node_index(query);
  if (!q) invalid("unknown query variable or word '" + std::string(query) + "'");
  if (evidence.hard.contains(std::string(query))) {
    invalid("query '" + std::string(query) + "' is clamped by hard evidence");
  }
  const auto& dom = net.node_domain(*q);

  // Soft evidence on a word query multiplies its own distribution; keep it
  // out of the resolved word factors and apply it at the end.
  Evidence rest = evidence;
  std::vector<double> query_lik;
  if (net.is_word_node(*q)) {
    if (auto it = rest.soft.find(std::string(query)); it != rest.soft.end()) {
      query_lik = checked_likelihood(dom, it->second);
      rest.soft.erase(it);
    }
  }
  const ResolvedEvidence ev = resolve(net, rest);

  std::vector<double> acc(dom.size(), 0.0);
  double total = 0.0;
  if (net.is_word_node(*q)) {
    enumerate_joint(net, ev, [&](std::span<const std::size_t> a, double w) {
      const auto row = net.row(*q, a);
      acc[0] += w * row[0];
      acc[1] += w * row[1];
    });
    if (!query_lik.empty()) {
      acc[0] *= query_lik[0];
      acc[1] *= query_lik[1];
    }
    total = acc[0] + acc[1];
  } else {
    enumerate_joint(net, ev, [&](std::span<const std::size_t> a, double w) {
      acc[a[*q]] += w;
      total += w;
    });
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kZeroProbabilityEvidence,
                "evidence has probability zero under the model");
  }
  for (double& p : acc) p /= total;
  return {dom.name(), dom.values(), std::move(acc)};
}

double word_posterior(const AffordanceNetwork& net, const Evidence& evidence,
                      std::string_view token) {
  if (!net.vocabulary().contains(token)) {
    throw Error(ErrorCode::kUnknownWord, "unknown word '" + std::string(token) + "'");
  }
  return posterior(net, evidence, token).probs[1];
}

std::vector<WordDelta> word_delta(const AffordanceNetwork& net,
                                  const std::map<std::string, std::string>& features,
                                  const std::map<std::string, std::string>& effects,
                                  std::string_view action) {
  const std::string action_var(vars::kAction);
  net.domain_of(action_var).require(action, "action");

  Evidence base;
  for (const auto& [k, v] : features) base.hard[k] = v;
  for (const auto& [k, v] : effects) base.hard[k] = v;
  if (base.hard.contains(action_var)) invalid("feature/effect evidence must not include Action");
  Evidence with_action = base;
  with_action.hard[action_var] = std::string(action);

  std::vector<WordDelta> out;
  out.reserve(net.vocabulary().size());
  for (const auto& token : net.vocabulary().tokens()) {
    out.push_back({token, word_posterior(net, with_action, token) - word_posterior(net, base, token)});
  }
  std::stable_sort(out.begin(), out.end(), [](const WordDelta& a, const WordDelta& b) {
    return std::abs(a.delta) > std::abs(b.delta);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Reference enumeration

LabelDistribution enumerate_posterior(const AffordanceNetwork& net, const Evidence& evidence,
                                      std::string_view query) {
  // Nodes carried explicitly: all symbolic variables, then every word that is
  // observed or queried. Other words are leaves whose tables sum to one.
  std::vector<std::size_t> nodes;
  for (std::size_t v = 0; v < net.symbolic_count(); ++v) nodes.push_back(v);
  std::set<std::string> words;
  for (const auto& [k, _] : evidence.hard) words.insert(k);
  for (const auto& [k, _] : evidence.soft) words.insert(k);
  words.insert(std::string(query));
  for (const auto& w : words) {
    auto idx = net.node_index(w);
    if (!idx) invalid("unknown node '" + w + "'");
    if (net.is_word_node(*idx)) nodes.push_back(*idx);
  }
  if (evidence.hard.contains(std::string(query))) {
    invalid("query '" + std::string(query) + "' is clamped by hard evidence");
  }
  const auto q = *net.node_index(query);
  const auto qpos = static_cast<std::size_t>(std::find(nodes.begin(), nodes.end(), q) - nodes.begin());

  std::vector<std::size_t> sizes;
  std::size_t joint = 1;
  for (auto n : nodes) {
    sizes.push_back(net.node_domain(n).size());
    joint *= sizes.back();
  }

  // Likelihood vectors per carried node (empty = unconstrained).
  std::vector<std::vector<double>> lik(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& dom = net.node_domain(nodes[i]);
    if (auto h = evidence.hard.find(dom.name()); h != evidence.hard.end()) {
      lik[i].assign(dom.size(), 0.0);
      lik[i][dom.require(h->second, dom.name())] = 1.0;
    } else if (auto s = evidence.soft.find(dom.name()); s != evidence.soft.end()) {
      lik[i] = checked_likelihood(dom, s->second);
    }
  }

  std::vector<double> table(joint, 0.0);
  std::vector<std::size_t> digits(nodes.size());
  for (std::size_t flat = 0; flat < joint; ++flat) {
    std::size_t rem = flat;
    for (std::size_t i = nodes.size(); i-- > 0;) {
      digits[i] = rem % sizes[i];
      rem /= sizes[i];
    }
    double p = 1.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Cpt& cpt = net.cpts()[nodes[i]];
      std::size_t row = 0;
      for (const auto& pname : cpt.parents) {
        const auto pn = *net.node_index(pname);
        row = row * net.node_domain(pn).size() + digits[pn];  // symbolic nodes lead `nodes`
      }
      p *= cpt.rows[row][digits[i]];
      if (!lik[i].empty()) p *= lik[i][digits[i]];
    }
    table[flat] = p;
  }

  const auto& qdom = net.node_domain(q);
  std::vector<double> marginal(qdom.size(), 0.0);
  for (std::size_t flat = 0; flat < joint; ++flat) {
    std::size_t rem = flat;
    for (std::size_t i = nodes.size(); i-- > 0;) {
      if (i == qpos) {
        marginal[rem % sizes[i]] += table[flat];
        break;
      }
      rem /= sizes[i];
    }
  }
  double total = std::accumulate(marginal.begin(), marginal.end(), 0.0);
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kZeroProbabilityEvidence, "evidence has probability zero under the model");
  }
  for (double& m : marginal) m /= total;
  return {qdom.name(), qdom.values(), std::move(marginal)};
}

}  // namespace affgest
