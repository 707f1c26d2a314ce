#include "causal_audit/linear_scm.hpp"

#include <cmath>

#include "causal_audit/errors.hpp"
#include "causal_audit/rng.hpp"

namespace causal_audit {

LinearGaussianScm LinearGaussianScm::build(CausalGraph graph, std::vector<LinearNode> nodes) {
  LinearGaussianScm scm;
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

    const auto parents = graph.parent_names(node.name);
    NodeList declared;
    for (const auto& [p, c] : node.coefficients) {
      if (!std::isfinite(c)) throw ModelError("coefficient " + p + "->" + node.name + " is not finite");
      declared.push_back(p);
    }
    if (node.bernoulli_p) {
      if (!parents.empty()) {
        throw ModelError("Bernoulli node '" + node.name + "' must be a root");
      }
      if (!(*node.bernoulli_p >= 0.0 && *node.bernoulli_p <= 1.0)) {
        throw ModelError("Bernoulli parameter of '" + node.name + "' is outside [0, 1]");
      }
    } else if (declared != parents) {
      throw ModelError("coefficients of '" + node.name + "' must cover exactly its graph parents");
    }
    if (!(node.noise_variance >= 0.0) || !std::isfinite(node.noise_variance) ||
        !std::isfinite(node.intercept)) {
      throw ModelError("node '" + node.name + "' has an invalid intercept or noise variance");
    }
    scm.nodes_[i] = std::move(node);
  }
  scm.graph_ = std::move(graph);
  return scm;
}

double LinearGaussianScm::coefficient(std::string_view from, std::string_view to) const {
  const auto& coefs = node(to).coefficients;
  auto it = coefs.find(std::string(from));
  return it == coefs.end() ? 0.0 : it->second;
}

LinearGaussianScm LinearGaussianScm::intervene(
    const std::map<std::string, double>& assignments) const {
  LinearGaussianScm out = *this;
  std::vector<Edge> edges;
  for (const auto& e : graph_.edges()) {
    if (!assignments.contains(e.to)) edges.push_back(e);
  }
  out.graph_ = CausalGraph::build(graph_.nodes(), edges, graph_.unobserved_nodes());
  for (const auto& [name, value] : assignments) {
    LinearNode& node = out.nodes_[graph_.index(name)];
    node.intercept = value;
    node.coefficients.clear();
    node.noise_variance = 0.0;
    node.bernoulli_p.reset();
  }
  return out;
}

std::vector<double> node_means(const LinearGaussianScm& scm) {
  const auto& g = scm.graph();
  std::vector<double> mean(g.size(), 0.0);
  for (std::size_t v : g.topological_order()) {
    const LinearNode& node = scm.node(v);
    if (node.bernoulli_p) {
      mean[v] = *node.bernoulli_p;
      continue;
    }
    double m = node.intercept;
    for (const auto& [p, c] : node.coefficients) m += c * mean[g.index(p)];
    mean[v] = m;
  }
  return mean;
}

double interventional_mean(const LinearGaussianScm& scm,
                           const std::map<std::string, double>& assignments,
                           std::string_view outcome) {
  const auto mutilated = scm.intervene(assignments);
  return node_means(mutilated)[mutilated.graph().index(outcome)];
}

double path_specific_mean(const LinearGaussianScm& scm, const PathSelection& selection,
                          double a1, double a0) {
  const auto& g = scm.graph();
  validate_selection(g, selection);
  const std::size_t a = g.index(selection.source);
  const auto reference = node_means(scm.intervene({{selection.source, a0}}));

  std::vector<double> active(g.size(), 0.0);
  for (std::size_t v : g.topological_order()) {
    if (v == a) {
      active[v] = a1;
      continue;
    }
    const LinearNode& node = scm.node(v);
    if (node.bernoulli_p) {
      active[v] = *node.bernoulli_p;
      continue;
    }
    double m = node.intercept;
    for (const auto& [p, c] : node.coefficients) {
      const std::size_t pi = g.index(p);
      const bool on = std::find(selection.edges.begin(), selection.edges.end(),
                                Edge{p, node.name}) != selection.edges.end();
      m += c * (on ? active[pi] : reference[pi]);
    }
    active[v] = m;
  }
  return active[g.index(selection.target)];
}

double counterfactual_mean(const LinearGaussianScm& scm, std::string_view source, double a1,
                           double a0, const NodeList& reference_nodes, std::string_view outcome) {
  const std::string a(source);
  const auto reference = node_means(scm.intervene({{a, a0}}));
  std::map<std::string, double> assignments{{a, a1}};
  for (const auto& z : reference_nodes) {
    if (z == a || z == outcome) throw DomainError("reference nodes exclude source and outcome");
    assignments[z] = reference[scm.graph().index(z)];
  }
  return interventional_mean(scm, assignments, outcome);
}

LinearPathEffects linear_path_effects(const LinearGaussianScm& scm, std::string_view a,
                                      std::string_view y) {
  const auto& g = scm.graph();
  LinearPathEffects out;
  for (auto& path : causal_paths(g, a, y)) {
    double product = 1.0;
    for (const auto& e : path.edges()) product *= scm.coefficient(e.from, e.to);
    if (path.length() == 1) out.direct = product;
    out.total += product;
    out.per_path.emplace_back(std::move(path), product);
  }
  return out;
}

Dataset sample(const LinearGaussianScm& scm, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("sample size must be at least 1");
  const auto& g = scm.graph();
  std::vector<std::vector<double>> columns(g.size(), std::vector<double>(n));
  std::vector<double> row(g.size());
  for (std::size_t r = 0; r < n; ++r) {
    StreamRng rng(seed, r);
    for (std::size_t v : g.topological_order()) {
      const LinearNode& node = scm.node(v);
      if (node.bernoulli_p) {
        row[v] = rng.uniform() < *node.bernoulli_p ? 1.0 : 0.0;
        continue;
      }
      double x = node.intercept;
      for (const auto& [p, c] : node.coefficients) x += c * row[g.index(p)];
      if (node.noise_variance > 0.0) x += std::sqrt(node.noise_variance) * rng.normal();
      row[v] = x;
    }
    for (std::size_t v = 0; v < g.size(); ++v) columns[v][r] = row[v];
  }
  Dataset data;
  for (std::size_t v = 0; v < g.size(); ++v) data.add_numeric(g.name(v), std::move(columns[v]));
  return data;
}

}  // namespace causal_audit
