#include "causal_audit/graph.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <deque>
#include <set>
#include <tuple>

#include "causal_audit/errors.hpp"

namespace causal_audit {

std::string to_string(const Edge& edge) { return edge.from + "->" + edge.to; }

namespace {

bool valid_identifier(std::string_view name) {
  if (name.empty()) return false;
  auto head = static_cast<unsigned char>(name.front());
  if (!(std::isalpha(head) || head == '_')) return false;
  return std::all_of(name.begin(), name.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_';
  });
}

// Returns one directed cycle among `remaining` nodes (those Kahn could not
// schedule), rendered as "A->B->A".
std::string find_cycle(const std::vector<std::vector<std::size_t>>& children,
                       const std::vector<bool>& remaining, const NodeList& names) {
  const std::size_t n = names.size();
  std::vector<int> state(n, 0);
  std::vector<std::size_t> stack;
  std::string rendered;

  auto dfs = [&](auto&& self, std::size_t v) -> bool {
    state[v] = 1;
    stack.push_back(v);
    for (std::size_t c : children[v]) {
      if (!remaining[c]) continue;
      if (state[c] == 1) {
        auto it = std::find(stack.begin(), stack.end(), c);
        for (; it != stack.end(); ++it) rendered += names[*it] + "->";
        rendered += names[c];
        return true;
      }
      if (state[c] == 0 && self(self, c)) return true;
    }
    stack.pop_back();
    state[v] = 2;
    return false;
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (remaining[v] && state[v] == 0 && dfs(dfs, v)) break;
  }
  return rendered;
}

}  // namespace

CausalGraph CausalGraph::build(const NodeList& nodes, const std::vector<Edge>& edges,
                               const NodeList& unobserved) {
  CausalGraph g;
  g.names_ = nodes;
  std::sort(g.names_.begin(), g.names_.end());
  if (auto dup = std::adjacent_find(g.names_.begin(), g.names_.end()); dup != g.names_.end()) {
    throw ModelError("node '" + *dup + "' declared twice");
  }
  for (const auto& name : g.names_) {
    if (!valid_identifier(name)) throw UnknownNodeError("invalid node name '" + name + "'");
  }

  const std::size_t n = g.names_.size();
  g.observed_.assign(n, true);
  for (const auto& name : unobserved) g.observed_[g.index(name)] = false;

  g.parents_.assign(n, {});
  g.children_.assign(n, {});
  std::set<Edge> seen;
  for (const auto& edge : edges) {
    const std::size_t from = g.index(edge.from);
    const std::size_t to = g.index(edge.to);
    if (from == to) throw CycleError("self-loop " + edge.from + "->" + edge.to);
    if (!seen.insert(edge).second) throw DuplicateEdgeError("duplicate edge " + to_string(edge));
    g.parents_[to].push_back(from);
    g.children_[from].push_back(to);
  }
  g.edges_.assign(seen.begin(), seen.end());
  for (auto& p : g.parents_) std::sort(p.begin(), p.end());
  for (auto& c : g.children_) std::sort(c.begin(), c.end());

  std::vector<std::size_t> in_degree(n);
  std::set<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v) {
    in_degree[v] = g.parents_[v].size();
    if (in_degree[v] == 0) ready.insert(v);
  }
  while (!ready.empty()) {
    const std::size_t v = *ready.begin();
    ready.erase(ready.begin());
    g.topo_.push_back(v);
    for (std::size_t c : g.children_[v]) {
      if (--in_degree[c] == 0) ready.insert(c);
    }
  }
  if (g.topo_.size() != n) {
    std::vector<bool> remaining(n, false);
    for (std::size_t v = 0; v < n; ++v) remaining[v] = in_degree[v] > 0;
    throw CycleError("graph has a cycle: " + find_cycle(g.children_, remaining, g.names_));
  }
  return g;
}

bool CausalGraph::contains(std::string_view name) const {
  return std::binary_search(names_.begin(), names_.end(), name);
}

std::size_t CausalGraph::index(std::string_view name) const {
  auto it = std::lower_bound(names_.begin(), names_.end(), name);
  if (it == names_.end() || *it != name) {
    throw UnknownNodeError("unknown node '" + std::string(name) + "'");
  }
  return static_cast<std::size_t>(it - names_.begin());
}

NodeList CausalGraph::parent_names(std::string_view node) const {
  NodeList out;
  for (std::size_t p : parents_[index(node)]) out.push_back(names_[p]);
  return out;
}

bool CausalGraph::has_edge(std::string_view from, std::string_view to) const {
  const auto& c = children_[index(from)];
  return std::binary_search(c.begin(), c.end(), index(to));
}

NodeList CausalGraph::unobserved_nodes() const {
  NodeList out;
  for (std::size_t v = 0; v < size(); ++v) {
    if (!observed_[v]) out.push_back(names_[v]);
  }
  return out;
}

NodeList CausalGraph::topological_names() const {
  NodeList out;
  for (std::size_t v : topo_) out.push_back(names_[v]);
  return out;
}

std::vector<bool> CausalGraph::descendants(std::size_t node) const {
  std::vector<bool> mark(size(), false);
  std::vector<std::size_t> stack{node};
  mark[node] = true;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t c : children_[v]) {
      if (!mark[c]) {
        mark[c] = true;
        stack.push_back(c);
      }
    }
  }
  return mark;
}

std::vector<bool> CausalGraph::ancestors(std::size_t node) const {
  std::vector<bool> mark(size(), false);
  std::vector<std::size_t> stack{node};
  mark[node] = true;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t p : parents_[v]) {
      if (!mark[p]) {
        mark[p] = true;
        stack.push_back(p);
      }
    }
  }
  return mark;
}

CausalGraph CausalGraph::without_outgoing(const NodeList& sources) const {
  std::vector<Edge> kept;
  for (const auto& e : edges_) {
    if (std::find(sources.begin(), sources.end(), e.from) == sources.end()) kept.push_back(e);
  }
  return build(names_, kept, unobserved_nodes());
}

bool CausalGraph::operator==(const CausalGraph& other) const {
  return names_ == other.names_ && edges_ == other.edges_ && observed_ == other.observed_;
}

bool d_separated(const CausalGraph& g, const NodeList& x, const NodeList& y, const NodeList& z) {
  const std::size_t n = g.size();
  std::vector<int> owner(n, -1);
  auto claim = [&](const NodeList& set, int tag) {
    for (const auto& name : set) {
      const std::size_t v = g.index(name);
      if (owner[v] != -1 && owner[v] != tag) {
        throw OverlapError("node '" + name + "' appears in more than one of X, Y, Z");
      }
      owner[v] = tag;
    }
  };
  claim(x, 0);
  claim(y, 1);
  claim(z, 2);

  // Ancestors of the conditioning set (reflexive) decide which colliders open.
  std::vector<bool> z_ancestor(n, false);
  for (const auto& name : z) {
    auto anc = g.ancestors(g.index(name));
    for (std::size_t v = 0; v < n; ++v) z_ancestor[v] = z_ancestor[v] || anc[v];
  }

  // Reachability over (node, direction): up = entered from a child,
  // down = entered from a parent.
  enum Dir { up = 0, down = 1 };
  std::vector<std::array<bool, 2>> visited(n, {false, false});
  std::deque<std::pair<std::size_t, Dir>> queue;
  for (const auto& name : x) queue.emplace_back(g.index(name), up);

  while (!queue.empty()) {
    auto [v, dir] = queue.front();
    queue.pop_front();
    if (visited[v][dir]) continue;
    visited[v][dir] = true;
    const bool in_z = owner[v] == 2;
    if (!in_z && owner[v] == 1) return false;
    if (dir == up && !in_z) {
      for (std::size_t p : g.parents(v)) queue.emplace_back(p, up);
      for (std::size_t c : g.children(v)) queue.emplace_back(c, down);
    } else if (dir == down) {
      if (!in_z) {
        for (std::size_t c : g.children(v)) queue.emplace_back(c, down);
      }
      if (z_ancestor[v]) {
        for (std::size_t p : g.parents(v)) queue.emplace_back(p, up);
      }
    }
  }
  return true;
}

std::string_view to_string(PathKind kind) {
  switch (kind) {
    case PathKind::causal: return "causal";
    case PathKind::backdoor: return "backdoor";
    case PathKind::other: return "other";
  }
  return "other";
}

std::vector<Edge> Path::edges() const {
  std::vector<Edge> out;
  for (std::size_t i = 0; i < forward.size(); ++i) {
    if (forward[i]) {
      out.push_back({nodes[i], nodes[i + 1]});
    } else {
      out.push_back({nodes[i + 1], nodes[i]});
    }
  }
  return out;
}

NodeList Path::interior() const {
  if (nodes.size() < 3) return {};
  return NodeList(nodes.begin() + 1, nodes.end() - 1);
}

std::string to_string(const Path& path) {
  std::string out;
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    if (i > 0) out += path.forward[i - 1] ? "->" : "<-";
    out += path.nodes[i];
  }
  return out;
}

std::vector<Path> all_paths(const CausalGraph& g, std::string_view a, std::string_view y) {
  const std::size_t source = g.index(a);
  const std::size_t target = g.index(y);
  std::vector<Path> out;
  if (source == target) return out;

  std::vector<bool> on_path(g.size(), false);
  std::vector<std::size_t> nodes{source};
  std::vector<bool> forward;
  on_path[source] = true;

  auto emit = [&] {
    if (out.size() >= kMaxPaths) {
      throw PathExplosionError("more than " + std::to_string(kMaxPaths) + " paths between " +
                               std::string(a) + " and " + std::string(y));
    }
    Path p;
    for (std::size_t v : nodes) p.nodes.push_back(g.name(v));
    p.forward = forward;
    if (std::all_of(forward.begin(), forward.end(), [](bool f) { return f; })) {
      p.kind = PathKind::causal;
    } else if (!forward.front()) {
      p.kind = PathKind::backdoor;
    } else {
      p.kind = PathKind::other;
    }
    out.push_back(std::move(p));
  };

  auto step = [&](auto&& self, std::size_t v, std::size_t next, bool fwd) -> void {
    if (on_path[next]) return;
    nodes.push_back(next);
    forward.push_back(fwd);
    if (next == target) {
      emit();
    } else {
      on_path[next] = true;
      for (std::size_t c : g.children(next)) self(self, next, c, true);
      for (std::size_t p : g.parents(next)) self(self, next, p, false);
      on_path[next] = false;
    }
    nodes.pop_back();
    forward.pop_back();
    (void)v;
  };
  for (std::size_t c : g.children(source)) step(step, source, c, true);
  for (std::size_t p : g.parents(source)) step(step, source, p, false);

  std::sort(out.begin(), out.end(),
            [](const Path& l, const Path& r) { return l.nodes < r.nodes; });
  return out;
}

namespace {

std::vector<Path> paths_of_kind(const CausalGraph& g, std::string_view a, std::string_view y,
                                PathKind kind) {
  auto paths = all_paths(g, a, y);
  std::erase_if(paths, [kind](const Path& p) { return p.kind != kind; });
  return paths;
}

}  // namespace

std::vector<Path> causal_paths(const CausalGraph& g, std::string_view a, std::string_view y) {
  return paths_of_kind(g, a, y, PathKind::causal);
}

std::vector<Path> backdoor_paths(const CausalGraph& g, std::string_view a, std::string_view y) {
  return paths_of_kind(g, a, y, PathKind::backdoor);
}

NodeList mediators(const CausalGraph& g, std::string_view a, std::string_view y) {
  const std::size_t ai = g.index(a);
  const std::size_t yi = g.index(y);
  auto desc = g.descendants(ai);
  auto anc = g.ancestors(yi);
  NodeList out;
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (v != ai && v != yi && desc[v] && anc[v]) out.push_back(g.name(v));
  }
  return out;
}

bool satisfies_backdoor(const CausalGraph& g, std::string_view a, std::string_view y,
                        const NodeList& set) {
  const auto desc = g.descendants(g.index(a));
  for (const auto& w : set) {
    if (desc[g.index(w)] || w == y) return false;
  }
  const std::string source(a);
  return d_separated(g.without_outgoing({source}), {source}, {std::string(y)}, set);
}

std::optional<AdjustmentSet> minimal_adjustment_set(const CausalGraph& g, std::string_view a,
                                                    std::string_view y) {
  const std::size_t ai = g.index(a);
  const std::size_t yi = g.index(y);
  if (ai == yi) throw OverlapError("treatment and outcome must differ");
  const auto desc = g.descendants(ai);
  std::vector<std::size_t> candidates;
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (v != yi && !desc[v] && g.observed(v)) candidates.push_back(v);
  }

  const CausalGraph cut = g.without_outgoing({std::string(a)});
  const NodeList source{std::string(a)};
  const NodeList target{std::string(y)};
  const std::size_t m = candidates.size();
  // Combinations of each size in lexicographic index order, which is also
  // lexicographic name order since nodes are sorted.
  for (std::size_t k = 0; k <= m; ++k) {
    std::vector<std::size_t> pick(k);
    for (std::size_t i = 0; i < k; ++i) pick[i] = i;
    while (true) {
      NodeList set;
      for (std::size_t i : pick) set.push_back(g.name(candidates[i]));
      if (d_separated(cut, source, target, set)) return AdjustmentSet{set, "backdoor"};
      std::size_t i = k;
      while (i > 0 && pick[i - 1] == m - k + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return std::nullopt;
}

std::string to_string(const IndependenceStatement& s) {
  std::string out = s.x + " _||_ " + s.y + " | {";
  for (std::size_t i = 0; i < s.given.size(); ++i) {
    if (i > 0) out += ", ";
    out += s.given[i];
  }
  return out + "}";
}

std::vector<IndependenceStatement> implied_independencies(const CausalGraph& g) {
  std::vector<IndependenceStatement> out;
  std::set<std::tuple<std::string, std::string, NodeList>> seen;
  for (std::size_t v = 0; v < g.size(); ++v) {
    const auto desc = g.descendants(v);
    const auto& pa = g.parents(v);
    NodeList given;
    for (std::size_t p : pa) given.push_back(g.name(p));
    for (std::size_t w = 0; w < g.size(); ++w) {
      if (desc[w] || std::binary_search(pa.begin(), pa.end(), w)) continue;
      const auto& x = g.name(v);
      const auto& y = g.name(w);
      auto key = std::make_tuple(std::min(x, y), std::max(x, y), given);
      if (!seen.insert(key).second) continue;
      out.push_back({x, y, given});
    }
  }
  return out;
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::neutral: return "neutral";
    case Role::explaining: return "explaining";
    case Role::proxy: return "proxy";
  }
  return "neutral";
}

std::optional<Role> parse_role(std::string_view text) {
  if (text == "neutral") return Role::neutral;
  if (text == "explaining") return Role::explaining;
  if (text == "proxy") return Role::proxy;
  return std::nullopt;
}

std::string_view to_string(PathLabel label) {
  switch (label) {
    case PathLabel::direct: return "direct";
    case PathLabel::indirect_explaining: return "indirect-explaining";
    case PathLabel::indirect_proxy: return "indirect-proxy";
    case PathLabel::indirect_neutral: return "indirect-neutral";
    case PathLabel::backdoor: return "backdoor";
    case PathLabel::non_causal: return "non-causal";
  }
  return "non-causal";
}

std::vector<ClassifiedPath> classify_paths(const CausalGraph& g, std::string_view a,
                                           std::string_view y, const RoleTags& roles) {
  for (const auto& [node, role] : roles) g.index(node);
  auto role_of = [&](const std::string& node) {
    auto it = roles.find(node);
    return it == roles.end() ? Role::neutral : it->second;
  };

  std::vector<ClassifiedPath> out;
  for (auto& path : all_paths(g, a, y)) {
    PathLabel label = PathLabel::non_causal;
    if (path.kind == PathKind::backdoor) {
      label = PathLabel::backdoor;
    } else if (path.kind == PathKind::causal) {
      const auto inner = path.interior();
      if (inner.empty()) {
        label = PathLabel::direct;
      } else if (std::any_of(inner.begin(), inner.end(),
                             [&](const auto& m) { return role_of(m) == Role::proxy; })) {
        label = PathLabel::indirect_proxy;
      } else if (std::all_of(inner.begin(), inner.end(),
                             [&](const auto& m) { return role_of(m) == Role::explaining; })) {
        label = PathLabel::indirect_explaining;
      } else {
        label = PathLabel::indirect_neutral;
      }
    }
    out.push_back({std::move(path), label});
  }
  return out;
}

}  // namespace causal_audit
