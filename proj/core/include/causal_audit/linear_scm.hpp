#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "causal_audit/dataset.hpp"
#include "causal_audit/graph.hpp"
#include "causal_audit/scm.hpp"

namespace causal_audit {

// V := intercept + sum_p coefficient_p * p + N(0, noise_variance), or, for
// root nodes only, V ~ Bernoulli(bernoulli_p) on {0, 1}.
struct LinearNode {
  std::string name;
  double intercept = 0.0;
  std::map<std::string, double> coefficients;
  double noise_variance = 0.0;
  std::optional<double> bernoulli_p;

  bool operator==(const LinearNode&) const = default;
};

class LinearGaussianScm {
 public:
  LinearGaussianScm() = default;

  // ModelError unless coefficients match graph parents exactly, variances are
  // finite and non-negative, and Bernoulli nodes are roots with p in [0, 1].
  static LinearGaussianScm build(CausalGraph graph, std::vector<LinearNode> nodes);

  const CausalGraph& graph() const noexcept { return graph_; }
  const LinearNode& node(std::size_t i) const { return nodes_.at(i); }
  const LinearNode& node(std::string_view name) const { return nodes_.at(graph_.index(name)); }
  double coefficient(std::string_view from, std::string_view to) const;

  LinearGaussianScm intervene(const std::map<std::string, double>& assignments) const;

 private:
  CausalGraph graph_;
  std::vector<LinearNode> nodes_;
};

// E[node] for every node, graph index order.
std::vector<double> node_means(const LinearGaussianScm& scm);

double interventional_mean(const LinearGaussianScm& scm,
                           const std::map<std::string, double>& assignments,
                           std::string_view outcome);

// E[target] with the source at a1 along the selected edges and a0 elsewhere.
double path_specific_mean(const LinearGaussianScm& scm, const PathSelection& selection,
                          double a1, double a0);

// E[outcome] under do(source = a1) with `reference_nodes` held at their
// natural values under do(source = a0). Linear mechanisms make the mean of
// the nested counterfactual a function of reference-world means only.
double counterfactual_mean(const LinearGaussianScm& scm, std::string_view source, double a1,
                           double a0, const NodeList& reference_nodes, std::string_view outcome);

struct LinearPathEffects {
  double total = 0.0;
  double direct = 0.0;
  std::vector<std::pair<Path, double>> per_path;
};

// Path tracing: each causal path contributes the product of its edge
// coefficients.
LinearPathEffects linear_path_effects(const LinearGaussianScm& scm, std::string_view a,
                                      std::string_view y);

// Numeric columns, one per node; row r uses generator stream (seed, r).
Dataset sample(const LinearGaussianScm& scm, std::size_t n, std::uint64_t seed);

}  // namespace causal_audit
