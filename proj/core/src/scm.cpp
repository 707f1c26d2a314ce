#include "causal_audit/scm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "causal_audit/errors.hpp"
#include "causal_audit/rng.hpp"

namespace causal_audit {

namespace {

std::uint32_t draw_index(StreamRng& rng, const std::vector<double>& probs) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    cumulative += probs[i];
    if (u < cumulative) return static_cast<std::uint32_t>(i);
  }
  // Land on the last value with positive mass.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return static_cast<std::uint32_t>(i);
  }
  return 0;
}

std::uint32_t label_code(const std::vector<std::string>& domain, std::string_view label,
                         std::string_view node) {
  for (std::size_t i = 0; i < domain.size(); ++i) {
    if (domain[i] == label) return static_cast<std::uint32_t>(i);
  }
  throw DomainError("value '" + std::string(label) + "' is not in the domain of '" +
                    std::string(node) + "'");
}

}  // namespace

DiscreteScm DiscreteScm::build(CausalGraph graph, std::vector<DiscreteNode> nodes,
                               bool structural) {
  DiscreteScm scm;
  const std::size_t n = graph.size();
  if (nodes.size() != n) {
    throw ModelError("model defines " + std::to_string(nodes.size()) + " nodes, graph has " +
                     std::to_string(n));
  }
  scm.nodes_.resize(n);
  std::vector<bool> filled(n, false);
  for (auto& node : nodes) {
    const std::size_t i = graph.index(node.name);
    if (filled[i]) throw ModelError("node '" + node.name + "' defined twice");
    filled[i] = true;
    scm.nodes_[i] = std::move(node);
  }

  scm.layout_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const DiscreteNode& node = scm.nodes_[i];
    if (node.domain.empty()) throw ModelError("node '" + node.name + "' has an empty domain");
    if (std::set<std::string>(node.domain.begin(), node.domain.end()).size() !=
        node.domain.size()) {
      throw ModelError("node '" + node.name + "' repeats a domain value");
    }

    NodeList declared = node.parents;
    std::sort(declared.begin(), declared.end());
    if (declared != graph.parent_names(node.name)) {
      throw ModelError("mechanism of '" + node.name + "' does not take exactly its graph parents");
    }

    const auto& exo = node.exogenous;
    if (exo.support.empty() || exo.support.size() != exo.probs.size()) {
      throw ModelError("exogenous '" + exo.name + "' needs one probability per support value");
    }
    double total = 0.0;
    for (double p : exo.probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw ModelError("exogenous '" + exo.name + "' has a negative or non-finite probability");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
      throw ModelError("probabilities of exogenous '" + exo.name + "' sum to " +
                       format_double(total));
    }

    Layout& layout = scm.layout_[i];
    for (const auto& p : node.parents) layout.parents.push_back(graph.index(p));
    layout.radix.assign(layout.parents.size(), 0);
  }

  for (std::size_t i = 0; i < n; ++i) {
    Layout& layout = scm.layout_[i];
    std::size_t rows = 1;
    for (std::size_t k = 0; k < layout.parents.size(); ++k) {
      layout.radix[k] = scm.nodes_[layout.parents[k]].domain.size();
      rows *= layout.radix[k];
    }
    const DiscreteNode& node = scm.nodes_[i];
    const std::size_t expected = rows * node.exogenous.support.size();
    if (node.table.size() != expected) {
      throw ModelError("mechanism of '" + node.name + "' covers " +
                       std::to_string(node.table.size()) + " of " + std::to_string(expected) +
                       " (parents, exogenous) combinations");
    }
    for (std::uint32_t v : node.table) {
      if (v >= node.domain.size()) {
        throw DomainError("mechanism of '" + node.name + "' yields a value outside its domain");
      }
    }
  }

  std::uint64_t configurations = 1;
  for (const auto& node : scm.nodes_) {
    configurations *= node.exogenous.support.size();
    if (configurations > kEnumerationBudget) {
      throw BudgetExceededError("joint exogenous support exceeds " +
                                std::to_string(kEnumerationBudget) + " configurations");
    }
  }
  scm.configurations_ = configurations;
  scm.graph_ = std::move(graph);
  scm.structural_ = structural;
  return scm;
}

DiscreteNode coupled_node(const std::string& name, const std::vector<std::string>& domain,
                          const NodeList& parents,
                          const std::vector<std::size_t>& parent_cardinalities,
                          const std::vector<std::vector<double>>& cpt) {
  const std::size_t configs = std::accumulate(parent_cardinalities.begin(),
                                              parent_cardinalities.end(), std::size_t{1},
                                              std::multiplies<>());
  if (cpt.size() != configs) {
    throw ModelError("CPT of '" + name + "' has " + std::to_string(cpt.size()) +
                     " parent configurations, expected " + std::to_string(configs));
  }
  std::vector<std::vector<double>> cumulative(configs);
  std::set<double> cuts{0.0, 1.0};
  for (std::size_t c = 0; c < configs; ++c) {
    const auto& dist = cpt[c];
    if (dist.size() != domain.size()) {
      throw ModelError("CPT row of '" + name + "' does not match its domain size");
    }
    double total = 0.0;
    for (double p : dist) {
      if (!(p >= 0.0 && p <= 1.0)) throw ModelError("CPT of '" + name + "' has p outside [0,1]");
      total += p;
      cumulative[c].push_back(total);
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
      throw ModelError("CPT row of '" + name + "' sums to " + format_double(total));
    }
    for (std::size_t v = 0; v + 1 < dist.size(); ++v) {
      cuts.insert(std::clamp(cumulative[c][v], 0.0, 1.0));
    }
  }

  const std::vector<double> points(cuts.begin(), cuts.end());
  DiscreteNode node;
  node.name = name;
  node.domain = domain;
  node.parents = parents;
  node.exogenous.name = "U_" + name;
  const std::size_t intervals = points.size() - 1;
  for (std::size_t k = 0; k < intervals; ++k) {
    node.exogenous.support.push_back("u" + std::to_string(k));
    node.exogenous.probs.push_back(points[k + 1] - points[k]);
  }
  node.table.resize(configs * intervals);
  for (std::size_t c = 0; c < configs; ++c) {
    for (std::size_t k = 0; k < intervals; ++k) {
      const double mid = 0.5 * (points[k] + points[k + 1]);
      std::uint32_t value = static_cast<std::uint32_t>(domain.size() - 1);
      for (std::size_t v = 0; v + 1 < domain.size(); ++v) {
        if (mid < cumulative[c][v]) {
          value = static_cast<std::uint32_t>(v);
          break;
        }
      }
      node.table[c * intervals + k] = value;
    }
  }
  return node;
}

DiscreteScm DiscreteScm::from_cpts(
    CausalGraph graph, const std::map<std::string, std::vector<std::string>>& domains,
    const std::map<std::string, std::vector<std::vector<double>>>& cpts) {
  std::vector<DiscreteNode> nodes;
  for (const auto& name : graph.nodes()) {
    auto parents = graph.parent_names(name);
    std::vector<std::size_t> cards;
    for (const auto& p : parents) cards.push_back(domains.at(p).size());
    auto it = cpts.find(name);
    if (it == cpts.end()) throw ModelError("no CPT for node '" + name + "'");
    nodes.push_back(coupled_node(name, domains.at(name), parents, cards, it->second));
  }
  return build(std::move(graph), std::move(nodes), false);
}

std::uint32_t DiscreteScm::code_of(std::string_view node, std::string_view label) const {
  return label_code(this->node(node).domain, label, node);
}

DiscreteScm DiscreteScm::intervene(const Intervention& assignments) const {
  DiscreteScm out = *this;
  for (const auto& [name, label] : assignments) {
    const std::size_t i = graph_.index(name);
    DiscreteNode& node = out.nodes_[i];
    const std::uint32_t code = label_code(node.domain, label, name);
    std::fill(node.table.begin(), node.table.end(), code);
  }
  return out;
}

std::uint32_t DiscreteScm::evaluate(std::size_t node, const std::vector<std::uint32_t>& values,
                                    std::uint32_t u) const {
  return evaluate_with(node, u, [&](std::size_t p) { return values[p]; });
}

void DiscreteScm::for_each_configuration(
    const std::function<void(const std::vector<std::uint32_t>&, double)>& visit) const {
  const std::size_t n = nodes_.size();
  std::vector<std::uint32_t> u(n, 0);
  while (true) {
    double p = 1.0;
    for (std::size_t i = 0; i < n && p > 0.0; ++i) p *= nodes_[i].exogenous.probs[u[i]];
    if (p > 0.0) visit(u, p);
    std::size_t i = 0;
    for (; i < n; ++i) {
      if (++u[i] < nodes_[i].exogenous.support.size()) break;
      u[i] = 0;
    }
    if (i == n) break;
  }
}

std::vector<std::uint32_t> DiscreteScm::propagate(const std::vector<std::uint32_t>& u,
                                                  const std::vector<std::int32_t>& overrides) const {
  std::vector<std::uint32_t> values(nodes_.size(), 0);
  for (std::size_t v : graph_.topological_order()) {
    values[v] = overrides[v] >= 0 ? static_cast<std::uint32_t>(overrides[v])
                                  : evaluate(v, values, u[v]);
  }
  return values;
}

JointDistribution::JointDistribution(NodeList variables,
                                     std::vector<std::vector<std::string>> domains)
    : variables_(std::move(variables)), domains_(std::move(domains)) {
  strides_.resize(variables_.size());
  std::size_t cells = 1;
  for (std::size_t i = variables_.size(); i-- > 0;) {
    strides_[i] = cells;
    cells *= domains_[i].size();
    if (cells > kEnumerationBudget) {
      throw BudgetExceededError("joint table would exceed " +
                                std::to_string(kEnumerationBudget) + " cells");
    }
  }
  probs_.assign(cells, 0.0);
}

std::size_t JointDistribution::index_of(const std::vector<std::uint32_t>& values) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < values.size(); ++i) idx += values[i] * strides_[i];
  return idx;
}

std::vector<std::uint32_t> JointDistribution::decode(std::size_t cell) const {
  std::vector<std::uint32_t> values(variables_.size());
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    values[i] = static_cast<std::uint32_t>((cell / strides_[i]) % domains_[i].size());
  }
  return values;
}

double JointDistribution::probability(const std::map<std::string, std::string>& assignment) const {
  std::vector<std::pair<std::size_t, std::uint32_t>> fixed;
  for (const auto& [name, label] : assignment) {
    auto it = std::find(variables_.begin(), variables_.end(), name);
    if (it == variables_.end()) throw UnknownNodeError("unknown node '" + name + "'");
    const auto i = static_cast<std::size_t>(it - variables_.begin());
    fixed.emplace_back(i, label_code(domains_[i], label, name));
  }
  double total = 0.0;
  for (std::size_t c = 0; c < probs_.size(); ++c) {
    bool match = true;
    for (auto [i, code] : fixed) {
      if ((c / strides_[i]) % domains_[i].size() != code) {
        match = false;
        break;
      }
    }
    if (match) total += probs_[c];
  }
  return total;
}

double JointDistribution::probability(const Event& event) const {
  return probability({{event.node, event.value}});
}

double JointDistribution::conditional(const Event& event,
                                      const std::map<std::string, std::string>& given) const {
  const double denominator = probability(given);
  if (denominator <= 0.0) throw EmptyStratumError("conditioning event has probability zero");
  auto joint = given;
  if (auto it = joint.find(event.node); it != joint.end()) {
    return it->second == event.value ? 1.0 : 0.0;
  }
  joint[event.node] = event.value;
  return probability(joint) / denominator;
}

double JointDistribution::total() const {
  return std::accumulate(probs_.begin(), probs_.end(), 0.0);
}

JointDistribution joint_distribution(const DiscreteScm& scm) {
  const auto& g = scm.graph();
  std::vector<std::vector<std::string>> domains;
  for (std::size_t i = 0; i < scm.size(); ++i) domains.push_back(scm.node(i).domain);
  JointDistribution joint(g.nodes(), domains);
  const std::vector<std::int32_t> none(scm.size(), -1);
  scm.for_each_configuration([&](const std::vector<std::uint32_t>& u, double p) {
    joint.cell(joint.index_of(scm.propagate(u, none))) += p;
  });
  return joint;
}

namespace {

std::vector<std::uint32_t> draw_row(const DiscreteScm& scm, StreamRng& rng) {
  std::vector<std::uint32_t> values(scm.size(), 0);
  for (std::size_t v : scm.graph().topological_order()) {
    const std::uint32_t u = draw_index(rng, scm.node(v).exogenous.probs);
    values[v] = scm.evaluate(v, values, u);
  }
  return values;
}

Dataset to_dataset(const DiscreteScm& scm, const std::vector<std::vector<std::int32_t>>& codes) {
  Dataset data;
  for (std::size_t i = 0; i < scm.size(); ++i) {
    const auto& node = scm.node(i);
    data.add_categorical(ColumnSchema{node.name, ColumnType::categorical, node.domain}, codes[i]);
  }
  return data;
}

}  // namespace

Dataset sample(const DiscreteScm& scm, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("sample size must be at least 1");
  std::vector<std::vector<std::int32_t>> codes(scm.size(), std::vector<std::int32_t>(n));
  for (std::size_t r = 0; r < n; ++r) {
    StreamRng rng(seed, r);
    const auto values = draw_row(scm, rng);
    for (std::size_t i = 0; i < scm.size(); ++i) codes[i][r] = static_cast<std::int32_t>(values[i]);
  }
  return to_dataset(scm, codes);
}

Dataset sample_selected(const DiscreteScm& scm, std::size_t n, std::uint64_t seed,
                        const Event& condition) {
  if (n == 0) throw ConfigError("sample size must be at least 1");
  const std::size_t target = scm.graph().index(condition.node);
  const std::uint32_t wanted = scm.code_of(condition.node, condition.value);
  std::vector<std::vector<std::int32_t>> codes(scm.size());
  std::size_t accepted = 0;
  // Give up if the selection event is (numerically) impossible.
  const std::uint64_t max_draws = std::max<std::uint64_t>(1000 * n, 1'000'000);
  for (std::uint64_t draw = 0; accepted < n; ++draw) {
    if (draw >= max_draws) {
      throw ImpossibleObservationError("selection event " + condition.node + "=" +
                                       condition.value + " is too rare to sample");
    }
    StreamRng rng(seed, draw);
    const auto values = draw_row(scm, rng);
    if (values[target] != wanted) continue;
    for (std::size_t i = 0; i < scm.size(); ++i) {
      codes[i].push_back(static_cast<std::int32_t>(values[i]));
    }
    ++accepted;
  }
  return to_dataset(scm, codes);
}

namespace {

std::vector<std::int32_t> override_vector(const DiscreteScm& scm, const Intervention& assignments) {
  std::vector<std::int32_t> overrides(scm.size(), -1);
  for (const auto& [name, label] : assignments) {
    overrides[scm.graph().index(name)] = static_cast<std::int32_t>(scm.code_of(name, label));
  }
  return overrides;
}

void require_structural(const DiscreteScm& scm, std::string_view what) {
  if (!scm.structural()) {
    throw UnsupportedModelError(std::string(what) +
                                " needs explicit structural functions; this model only "
                                "determines conditional probability tables");
  }
}

}  // namespace

double interventional_prob(const DiscreteScm& scm, const Intervention& assignments,
                           const Event& event) {
  if (assignments.contains(event.node)) {
    throw DomainError("event node '" + event.node + "' is itself intervened on");
  }
  const std::size_t target = scm.graph().index(event.node);
  const std::uint32_t wanted = scm.code_of(event.node, event.value);
  const auto overrides = override_vector(scm, assignments);
  double total = 0.0;
  scm.for_each_configuration([&](const std::vector<std::uint32_t>& u, double p) {
    if (scm.propagate(u, overrides)[target] == wanted) total += p;
  });
  return total;
}

double counterfactual_prob(const DiscreteScm& scm, const CounterfactualQuery& query) {
  require_structural(scm, "counterfactual_prob");
  const auto& g = scm.graph();
  const std::size_t target = g.index(query.outcome.node);
  const std::uint32_t wanted = scm.code_of(query.outcome.node, query.outcome.value);
  const auto reference = override_vector(scm, query.reference);
  auto primary = override_vector(scm, query.primary);
  std::vector<std::size_t> carried;
  for (const auto& z : query.reference_nodes) {
    const std::size_t zi = g.index(z);
    if (zi == target) throw DomainError("outcome node cannot be a reference node");
    if (primary[zi] >= 0) {
      throw DomainError("node '" + z + "' is both intervened on and carried from the reference");
    }
    carried.push_back(zi);
  }

  double total = 0.0;
  scm.for_each_configuration([&](const std::vector<std::uint32_t>& u, double p) {
    auto overrides = primary;
    if (!carried.empty()) {
      const auto natural = scm.propagate(u, reference);
      for (std::size_t z : carried) overrides[z] = static_cast<std::int32_t>(natural[z]);
    }
    if (scm.propagate(u, overrides)[target] == wanted) total += p;
  });
  return total;
}

void validate_selection(const CausalGraph& g, const PathSelection& selection) {
  const std::size_t a = g.index(selection.source);
  const std::size_t y = g.index(selection.target);
  if (a == y) throw InvalidPathSelectionError("source and target must differ");
  const auto from_a = g.descendants(a);
  const auto to_y = g.ancestors(y);
  std::set<Edge> seen;
  for (const auto& e : selection.edges) {
    if (!g.contains(e.from) || !g.contains(e.to) || !g.has_edge(e.from, e.to)) {
      throw InvalidPathSelectionError("edge " + to_string(e) + " is not in the graph");
    }
    if (!from_a[g.index(e.from)] || !to_y[g.index(e.to)]) {
      throw InvalidPathSelectionError("edge " + to_string(e) + " lies on no directed path " +
                                      selection.source + " -> " + selection.target);
    }
    if (!seen.insert(e).second) {
      throw InvalidPathSelectionError("edge " + to_string(e) + " selected twice");
    }
  }
}

PathSelection all_causal_edges(const CausalGraph& g, std::string_view source,
                               std::string_view target) {
  const auto from_a = g.descendants(g.index(source));
  const auto to_y = g.ancestors(g.index(target));
  PathSelection sel{std::string(source), std::string(target), {}};
  for (const auto& e : g.edges()) {
    if (from_a[g.index(e.from)] && to_y[g.index(e.to)]) sel.edges.push_back(e);
  }
  return sel;
}

double path_specific_prob(const DiscreteScm& scm, const PathSelection& selection,
                          std::string_view a1, std::string_view a0, const Event& event) {
  require_structural(scm, "path_specific_prob");
  const auto& g = scm.graph();
  validate_selection(g, selection);
  if (event.node != selection.target) {
    throw InvalidPathSelectionError("event node must be the selection target");
  }
  const std::size_t n = g.size();
  const std::size_t a = g.index(selection.source);
  const std::size_t y = g.index(selection.target);
  const std::uint32_t code_a1 = scm.code_of(selection.source, a1);
  const std::uint32_t code_a0 = scm.code_of(selection.source, a0);
  const std::uint32_t wanted = scm.code_of(event.node, event.value);

  std::vector<std::vector<bool>> selected(n, std::vector<bool>(n, false));
  for (const auto& e : selection.edges) selected[g.index(e.from)][g.index(e.to)] = true;

  std::vector<std::int32_t> baseline(n, -1);
  baseline[a] = static_cast<std::int32_t>(code_a0);

  double total = 0.0;
  std::vector<std::uint32_t> active(n, 0);
  scm.for_each_configuration([&](const std::vector<std::uint32_t>& u, double p) {
    const auto reference = scm.propagate(u, baseline);
    for (std::size_t v : g.topological_order()) {
      if (v == a) {
        active[v] = code_a1;
        continue;
      }
      active[v] = scm.evaluate_with(v, u[v], [&](std::size_t parent) {
        return selected[parent][v] ? active[parent] : reference[parent];
      });
    }
    if (active[y] == wanted) total += p;
  });
  return total;
}

std::vector<double> unit_counterfactual(const DiscreteScm& scm,
                                        const std::map<std::string, std::string>& observation,
                                        const Intervention& assignments,
                                        std::string_view outcome) {
  require_structural(scm, "unit_counterfactual");
  const auto& g = scm.graph();
  const std::size_t n = g.size();
  std::vector<std::int32_t> observed(n, -1);
  for (const auto& [name, label] : observation) {
    observed[g.index(name)] = static_cast<std::int32_t>(scm.code_of(name, label));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (observed[i] < 0) {
      throw ImpossibleObservationError("observation must assign every node; '" + g.name(i) +
                                       "' is missing");
    }
  }
  const std::size_t target = g.index(outcome);
  const auto overrides = override_vector(scm, assignments);
  const std::vector<std::int32_t> none(n, -1);

  std::vector<double> posterior(scm.node(target).domain.size(), 0.0);
  double evidence = 0.0;
  scm.for_each_configuration([&](const std::vector<std::uint32_t>& u, double p) {
    const auto factual = scm.propagate(u, none);
    for (std::size_t i = 0; i < n; ++i) {
      if (factual[i] != static_cast<std::uint32_t>(observed[i])) return;
    }
    evidence += p;
    posterior[scm.propagate(u, overrides)[target]] += p;
  });
  if (evidence <= 0.0) {
    throw ImpossibleObservationError("observation has probability zero under the model");
  }
  for (double& q : posterior) q /= evidence;
  return posterior;
}

}  // namespace causal_audit
