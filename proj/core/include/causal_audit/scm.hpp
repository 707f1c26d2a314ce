#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "causal_audit/dataset.hpp"
#include "causal_audit/graph.hpp"

namespace causal_audit {

// Largest number of joint exogenous configurations a model may have; exact
// queries enumerate all of them.
inline constexpr std::uint64_t kEnumerationBudget = 10'000'000;

// Tolerance on probability tables summing to one.
inline constexpr double kProbabilityTolerance = 1e-9;

struct ExogenousVariable {
  std::string name;
  std::vector<std::string> support;
  std::vector<double> probs;

  bool operator==(const ExogenousVariable&) const = default;
};

// A node's structural function. `table` maps every (parent values..., u)
// combination to a domain index: parents are laid out in `parents` order,
// first parent slowest, with the exogenous index varying fastest.
struct DiscreteNode {
  std::string name;
  std::vector<std::string> domain;
  NodeList parents;
  ExogenousVariable exogenous;
  std::vector<std::uint32_t> table;

  bool operator==(const DiscreteNode&) const = default;
};

// node -> fixed value label
using Intervention = std::map<std::string, std::string>;

struct Event {
  std::string node;
  std::string value;
};

// Markovian discrete SCM: one independent finite exogenous variable per node
// and a total deterministic mechanism. Models built from conditional
// probability tables alone are flagged non-structural and refuse
// counterfactual queries.
class DiscreteScm {
 public:
  DiscreteScm() = default;

  // Throws ModelError on inconsistent tables, DomainError on out-of-range
  // entries and BudgetExceededError past kEnumerationBudget.
  static DiscreteScm build(CausalGraph graph, std::vector<DiscreteNode> nodes,
                           bool structural = true);

  // CPT-only model. cpts[node][parent_config] is a distribution over the
  // node's domain; parent configurations follow the graph's parent order
  // (lexicographic, first parent slowest).
  static DiscreteScm from_cpts(CausalGraph graph,
                               const std::map<std::string, std::vector<std::string>>& domains,
                               const std::map<std::string, std::vector<std::vector<double>>>& cpts);

  const CausalGraph& graph() const noexcept { return graph_; }
  bool structural() const noexcept { return structural_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const DiscreteNode& node(std::size_t i) const { return nodes_.at(i); }
  const DiscreteNode& node(std::string_view name) const { return nodes_.at(graph_.index(name)); }
  std::uint32_t code_of(std::string_view node, std::string_view label) const;
  std::uint64_t exogenous_configurations() const noexcept { return configurations_; }

  // Mechanisms of intervened nodes replaced by constants.
  DiscreteScm intervene(const Intervention& assignments) const;

  // Node value given the full vector of current values (graph index order)
  // and the node's exogenous index.
  std::uint32_t evaluate(std::size_t node, const std::vector<std::uint32_t>& values,
                         std::uint32_t u) const;
  // Same, with parent values gathered per parent slot by `parent_value(p)`.
  template <typename ParentValue>
  std::uint32_t evaluate_with(std::size_t node, std::uint32_t u, ParentValue&& parent_value) const {
    const auto& layout = layout_[node];
    std::size_t offset = 0;
    for (std::size_t k = 0; k < layout.parents.size(); ++k) {
      offset = offset * layout.radix[k] + parent_value(layout.parents[k]);
    }
    return nodes_[node].table[offset * nodes_[node].exogenous.support.size() + u];
  }

  // Calls visit(u, probability) for every joint exogenous configuration with
  // positive probability; u is indexed by graph node index.
  void for_each_configuration(
      const std::function<void(const std::vector<std::uint32_t>&, double)>& visit) const;

  // Propagates one exogenous configuration; overrides[i] >= 0 pins node i.
  std::vector<std::uint32_t> propagate(const std::vector<std::uint32_t>& u,
                                       const std::vector<std::int32_t>& overrides) const;

 private:
  struct Layout {
    std::vector<std::size_t> parents;  // graph indices in mechanism order
    std::vector<std::size_t> radix;
  };

  CausalGraph graph_;
  std::vector<DiscreteNode> nodes_;
  std::vector<Layout> layout_;
  std::uint64_t configurations_ = 1;
  bool structural_ = true;
};

// Builds a node whose exogenous variable is a uniform draw cut at the
// cumulative breakpoints of every conditional distribution: the monotone
// (comonotone) coupling of the given CPT. Exogenous support labels are
// u0, u1, ...; the exogenous variable is named U_<name>.
DiscreteNode coupled_node(const std::string& name, const std::vector<std::string>& domain,
                          const NodeList& parents,
                          const std::vector<std::size_t>& parent_cardinalities,
                          const std::vector<std::vector<double>>& cpt);

// Exact probability table over the endogenous variables.
class JointDistribution {
 public:
  JointDistribution(NodeList variables, std::vector<std::vector<std::string>> domains);

  const NodeList& variables() const noexcept { return variables_; }
  const std::vector<std::vector<std::string>>& domains() const noexcept { return domains_; }
  std::size_t cells() const noexcept { return probs_.size(); }
  double cell(std::size_t i) const { return probs_[i]; }
  double& cell(std::size_t i) { return probs_[i]; }
  std::size_t index_of(const std::vector<std::uint32_t>& values) const;
  std::vector<std::uint32_t> decode(std::size_t cell) const;

  // Probability of a partial assignment (node -> label).
  double probability(const std::map<std::string, std::string>& assignment) const;
  double probability(const Event& event) const;
  double conditional(const Event& event, const std::map<std::string, std::string>& given) const;
  double total() const;

 private:
  NodeList variables_;
  std::vector<std::vector<std::string>> domains_;
  std::vector<std::size_t> strides_;
  std::vector<double> probs_;
};

JointDistribution joint_distribution(const DiscreteScm& scm);

// n i.i.d. rows; row r uses the generator stream (seed, r).
Dataset sample(const DiscreteScm& scm, std::size_t n, std::uint64_t seed);

// n rows drawn from the sub-population where `condition` holds (rejection
// sampling; stream index counts every candidate draw).
Dataset sample_selected(const DiscreteScm& scm, std::size_t n, std::uint64_t seed,
                        const Event& condition);

double interventional_prob(const DiscreteScm& scm, const Intervention& assignments,
                           const Event& event);

// P(outcome had `primary` held and `reference_nodes` taken the values they
// would naturally take under `reference`).
struct CounterfactualQuery {
  Event outcome;
  Intervention primary;
  Intervention reference;
  NodeList reference_nodes;
};

double counterfactual_prob(const DiscreteScm& scm, const CounterfactualQuery& query);

// Edges designating the paths of interest between source and target.
struct PathSelection {
  std::string source;
  std::string target;
  std::vector<Edge> edges;
};

// InvalidPathSelectionError unless every edge exists and lies on a directed
// source -> target path.
void validate_selection(const CausalGraph& g, const PathSelection& selection);

// Every edge on some directed source -> target path.
PathSelection all_causal_edges(const CausalGraph& g, std::string_view source,
                               std::string_view target);

// P(target = event.value) with the source at a1 along the selected edges and
// at a0 along every other edge.
double path_specific_prob(const DiscreteScm& scm, const PathSelection& selection,
                          std::string_view a1, std::string_view a0, const Event& event);

// Posterior over `outcome` labels (domain order) for one fully observed unit
// after abduction, action and prediction.
std::vector<double> unit_counterfactual(const DiscreteScm& scm,
                                        const std::map<std::string, std::string>& observation,
                                        const Intervention& assignments, std::string_view outcome);

}  // namespace causal_audit
