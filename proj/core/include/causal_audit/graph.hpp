#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace causal_audit {

using NodeList = std::vector<std::string>;

struct Edge {
  std::string from;
  std::string to;

  auto operator<=>(const Edge&) const = default;
  bool operator==(const Edge&) const = default;
};

std::string to_string(const Edge& edge);

// Directed acyclic graph over named variables. Nodes are stored in
// lexicographic order and every index-based accessor refers to that order.
// Immutable once built.
class CausalGraph {
 public:
  CausalGraph() = default;

  // Validates and builds the graph. Throws CycleError (naming one cycle),
  // UnknownNodeError or DuplicateEdgeError. Nodes listed in `unobserved`
  // carry observed = false.
  static CausalGraph build(const NodeList& nodes, const std::vector<Edge>& edges,
                           const NodeList& unobserved = {});

  std::size_t size() const noexcept { return names_.size(); }
  const NodeList& nodes() const noexcept { return names_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  bool contains(std::string_view name) const;
  // Throws UnknownNodeError.
  std::size_t index(std::string_view name) const;
  const std::string& name(std::size_t index) const { return names_.at(index); }

  const std::vector<std::size_t>& parents(std::size_t node) const { return parents_.at(node); }
  const std::vector<std::size_t>& children(std::size_t node) const { return children_.at(node); }
  NodeList parent_names(std::string_view node) const;
  bool has_edge(std::string_view from, std::string_view to) const;

  bool observed(std::size_t node) const { return observed_.at(node); }
  bool observed(std::string_view node) const { return observed_.at(index(node)); }
  NodeList unobserved_nodes() const;

  // Kahn's algorithm, ties broken by smallest node index.
  const std::vector<std::size_t>& topological_order() const noexcept { return topo_; }
  NodeList topological_names() const;

  // Reflexive: a node is its own descendant / ancestor.
  std::vector<bool> descendants(std::size_t node) const;
  std::vector<bool> ancestors(std::size_t node) const;

  CausalGraph without_outgoing(const NodeList& sources) const;

  bool operator==(const CausalGraph& other) const;

 private:
  NodeList names_;
  std::vector<Edge> edges_;
  std::vector<bool> observed_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> topo_;
};

// d-separation of node sets X and Y given Z. Sets must be pairwise disjoint
// (OverlapError) and name graph nodes (UnknownNodeError).
bool d_separated(const CausalGraph& g, const NodeList& x, const NodeList& y, const NodeList& z);

enum class PathKind { causal, backdoor, other };

std::string_view to_string(PathKind kind);

struct Path {
  NodeList nodes;
  // forward[i] is true when the step nodes[i] -> nodes[i+1] follows the edge.
  std::vector<bool> forward;
  PathKind kind = PathKind::other;

  std::size_t length() const noexcept { return forward.size(); }
  // Edges traversed, oriented as they appear in the graph.
  std::vector<Edge> edges() const;
  // Interior nodes (excludes both endpoints).
  NodeList interior() const;

  bool operator==(const Path&) const = default;
};

// Renders a path as e.g. "Nationality<-Age->Visa".
std::string to_string(const Path& path);

// Hard cap on the number of simple paths enumerated between two nodes.
inline constexpr std::size_t kMaxPaths = 10000;

// All simple paths between a and y in the skeleton, sorted by node sequence.
// Throws PathExplosionError past kMaxPaths.
std::vector<Path> all_paths(const CausalGraph& g, std::string_view a, std::string_view y);
std::vector<Path> causal_paths(const CausalGraph& g, std::string_view a, std::string_view y);
std::vector<Path> backdoor_paths(const CausalGraph& g, std::string_view a, std::string_view y);

// Nodes lying on some directed a -> ... -> y path, a and y excluded.
NodeList mediators(const CausalGraph& g, std::string_view a, std::string_view y);

struct AdjustmentSet {
  NodeList nodes;
  std::string criterion = "backdoor";

  bool operator==(const AdjustmentSet&) const = default;
};

// True when `set` satisfies the backdoor criterion for (a, y).
bool satisfies_backdoor(const CausalGraph& g, std::string_view a, std::string_view y,
                        const NodeList& set);

// Smallest backdoor adjustment set among observed nodes; ties broken
// lexicographically. std::nullopt when no such set exists.
std::optional<AdjustmentSet> minimal_adjustment_set(const CausalGraph& g, std::string_view a,
                                                    std::string_view y);

struct IndependenceStatement {
  std::string x;
  std::string y;
  NodeList given;

  bool operator==(const IndependenceStatement&) const = default;
};

std::string to_string(const IndependenceStatement& s);

// Local Markov statements: each node against each non-descendant that is not
// a parent, given its parents.
std::vector<IndependenceStatement> implied_independencies(const CausalGraph& g);

enum class Role { neutral, explaining, proxy };
using RoleTags = std::map<std::string, Role>;

std::string_view to_string(Role role);
std::optional<Role> parse_role(std::string_view text);

enum class PathLabel {
  direct,
  indirect_explaining,
  indirect_proxy,
  indirect_neutral,
  backdoor,
  non_causal,
};

std::string_view to_string(PathLabel label);

struct ClassifiedPath {
  Path path;
  PathLabel label;
};

std::vector<ClassifiedPath> classify_paths(const CausalGraph& g, std::string_view a,
                                           std::string_view y, const RoleTags& roles = {});

}  // namespace causal_audit
