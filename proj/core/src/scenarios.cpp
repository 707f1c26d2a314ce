#include "causal_audit/scenarios.hpp"

#include <algorithm>
#include <cmath>

#include "causal_audit/errors.hpp"

namespace causal_audit {

namespace {

struct Influence {
  std::string parent;
  int sign;
  double strength;
};

struct NodeDef {
  std::string name;
  double base;
  std::vector<Influence> influences;
};

struct ScenarioDef {
  std::string name;
  std::string summary;
  std::vector<NodeDef> nodes;
  std::string sensitive;
  std::string outcome;
  RoleTags roles;
  std::vector<Edge> pi;
  std::optional<Event> selection;
  GroundTruth truth;
};

const std::vector<ScenarioDef>& definitions() {
  static const std::vector<ScenarioDef> defs = {
      {"visa",
       "Working-visa decisions: Age confounds Nationality and Visa; Skill explains and "
       "FamilyStatus proxies the effect of Nationality.",
       {{"Age", 0.5, {}},
        {"Nationality", 0.3, {{"Age", +1, 0.4}}},
        {"Skill", 0.25, {{"Nationality", +1, 0.4}}},
        {"FamilyStatus", 0.75, {{"Nationality", -1, 0.5}}},
        {"Visa", 0.27,
         {{"Age", +1, 0.3}, {"Nationality", +1, 0.15}, {"Skill", +1, 0.25},
          {"FamilyStatus", -1, 0.25}}}},
       "Nationality",
       "Visa",
       {{"Skill", Role::explaining}, {"FamilyStatus", Role::proxy}},
       {{"Nationality", "FamilyStatus"}, {"FamilyStatus", "Visa"}},
       std::nullopt,
       {0.495, 0.375, 0.375, 0.15, 0.225, 0.125}},
      {"hiring",
       "Hiring: Race acts directly, through Skill (explaining) and through LastName (proxy).",
       {{"Race", 0.6, {}},
        {"LastName", 0.1, {{"Race", +1, 0.7}}},
        {"Skill", 0.3, {{"Race", +1, 0.3}}},
        {"Hired", 0.1, {{"Race", +1, 0.15}, {"Skill", +1, 0.35}, {"LastName", +1, 0.3}}}},
       "Race",
       "Hired",
       {{"Skill", Role::explaining}, {"LastName", Role::proxy}},
       {{"Race", "LastName"}, {"LastName", "Hired"}},
       std::nullopt,
       {0.465, 0.465, 0.465, 0.15, 0.315, 0.21}},
      {"district",
       "Poor districts (District=1) have fewer majority residents (Race=1) and lower school "
       "ratings; predictions use the rating only, so Race has no causal effect.",
       {{"District", 0.4, {}},
        {"Race", 0.8, {{"District", -1, 0.5}}},
        {"SchoolRating", 0.8, {{"District", -1, 0.6}}},
        {"PredictedAbility", 0.15, {{"SchoolRating", +1, 0.7}}}},
       "Race",
       "PredictedAbility",
       {},
       {},
       std::nullopt,
       {0.21, 0.0, 0.0, 0.0, 0.0, 0.0}},
      {"banknote-collider",
       "Fame depends on Gender and Talent; among the famous, Gender and Talent become "
       "dependent.",
       {{"Gender", 0.5, {}},
        {"Talent", 0.3, {}},
        {"Fame", 0.05, {{"Gender", +1, 0.35}, {"Talent", +1, 0.5}}}},
       "Gender",
       "Fame",
       {},
       {{"Gender", "Fame"}},
       Event{"Fame", "1"},
       {0.35, 0.35, 0.35, 0.35, 0.0, 0.35}},
      {"love-confounder",
       "Being in love drives both compulsive phone checking and a happy glow.",
       {{"Love", 0.4, {}},
        {"Behavior", 0.1, {{"Love", +1, 0.6}}},
        {"Glow", 0.2, {{"Love", +1, 0.6}}}},
       "Behavior",
       "Glow",
       {},
       {},
       std::nullopt,
       {72.0 / 187.0, 0.0, 0.0, 0.0, 0.0, 0.0}},
      {"popularity-mediation",
       "Happiness makes people popular directly and through smiling and helping others.",
       {{"Happy", 0.5, {}},
        {"Smile", 0.2, {{"Happy", +1, 0.5}}},
        {"Help", 0.3, {{"Happy", +1, 0.4}}},
        {"Popular", 0.1, {{"Happy", +1, 0.1}, {"Smile", +1, 0.4}, {"Help", +1, 0.3}}}},
       "Happy",
       "Popular",
       {},
       {{"Happy", "Smile"}, {"Smile", "Popular"}},
       std::nullopt,
       {0.42, 0.42, 0.42, 0.1, 0.32, 0.2}},
  };
  return defs;
}

const ScenarioDef& definition(std::string_view name) {
  for (const auto& d : definitions()) {
    if (d.name == name) return d;
  }
  std::string known;
  for (const auto& d : definitions()) known += (known.empty() ? "" : ", ") + d.name;
  throw ConfigError("unknown scenario '" + std::string(name) + "' (known: " + known + ")");
}

ScenarioParams defaults_of(const ScenarioDef& def) {
  ScenarioParams params;
  for (const auto& node : def.nodes) {
    params[node.name + ".base"] = node.base;
    for (const auto& inf : node.influences) params[node.name + "." + inf.parent] = inf.strength;
  }
  return params;
}

ScenarioParams merge(const ScenarioDef& def, const ScenarioParams& overrides) {
  ScenarioParams params = defaults_of(def);
  for (const auto& [key, value] : overrides) {
    auto it = params.find(key);
    if (it == params.end()) {
      throw ParameterRangeError("scenario '" + def.name + "' has no parameter '" + key + "'");
    }
    if (!(value >= 0.0 && value <= 1.0)) {
      throw ParameterRangeError("parameter '" + key + "' = " + format_double(value) +
                                " is outside [0, 1]");
    }
    it->second = value;
  }
  return params;
}

DiscreteScm build_scm(const ScenarioDef& def, const ScenarioParams& params) {
  NodeList names;
  std::vector<Edge> edges;
  for (const auto& node : def.nodes) {
    names.push_back(node.name);
    for (const auto& inf : node.influences) edges.push_back({inf.parent, node.name});
  }
  CausalGraph graph = CausalGraph::build(names, edges);
  const std::vector<std::string> binary{"0", "1"};
  std::vector<DiscreteNode> nodes;
  for (const auto& node : def.nodes) {
    const NodeList parents = graph.parent_names(node.name);
    std::vector<double> slope(parents.size(), 0.0);
    for (const auto& inf : node.influences) {
      const auto pos = std::find(parents.begin(), parents.end(), inf.parent) - parents.begin();
      slope[static_cast<std::size_t>(pos)] = inf.sign * params.at(node.name + "." + inf.parent);
    }
    const double base = params.at(node.name + ".base");
    std::vector<std::vector<double>> cpt;
    for (std::size_t config = 0; config < (std::size_t{1} << parents.size()); ++config) {
      double p = base;
      for (std::size_t k = 0; k < parents.size(); ++k) {
        if ((config >> (parents.size() - 1 - k)) & 1U) p += slope[k];
      }
      if (p < -1e-12 || p > 1.0 + 1e-12) {
        throw ParameterRangeError("parameters give P(" + node.name + "=1) = " + format_double(p) +
                                  " for some parent values; it must lie in [0, 1]");
      }
      p = std::clamp(p, 0.0, 1.0);
      cpt.push_back({1.0 - p, p});
    }
    nodes.push_back(
        coupled_node(node.name, binary, parents, std::vector<std::size_t>(parents.size(), 2), cpt));
  }
  return DiscreteScm::build(std::move(graph), std::move(nodes), true);
}

}  // namespace

std::vector<std::string> scenario_names() {
  std::vector<std::string> out;
  for (const auto& d : definitions()) out.push_back(d.name);
  return out;
}

bool is_scenario(std::string_view name) {
  const auto& defs = definitions();
  return std::any_of(defs.begin(), defs.end(), [&](const ScenarioDef& d) { return d.name == name; });
}

ScenarioParams default_parameters(std::string_view name) { return defaults_of(definition(name)); }

Scenario make_scenario(std::string_view name, const ScenarioParams& overrides) {
  const ScenarioDef& def = definition(name);
  Scenario s;
  s.name = def.name;
  s.summary = def.summary;
  s.parameters = merge(def, overrides);
  s.scm = build_scm(def, s.parameters);
  s.query = {def.sensitive, "0", "1", def.outcome, "1"};
  s.roles = def.roles;
  s.pi = {def.sensitive, def.outcome, def.pi};
  s.selection = def.selection;
  return s;
}

GroundTruth ground_truth(std::string_view name) { return definition(name).truth; }

DiscreteScm visa_scenario(const ScenarioParams& overrides) {
  return make_scenario("visa", overrides).scm;
}
DiscreteScm hiring_scenario(const ScenarioParams& overrides) {
  return make_scenario("hiring", overrides).scm;
}
DiscreteScm district_scenario(const ScenarioParams& overrides) {
  return make_scenario("district", overrides).scm;
}
DiscreteScm banknote_collider_scenario(const ScenarioParams& overrides) {
  return make_scenario("banknote-collider", overrides).scm;
}
DiscreteScm love_confounder_scenario(const ScenarioParams& overrides) {
  return make_scenario("love-confounder", overrides).scm;
}
DiscreteScm popularity_mediation_scenario(const ScenarioParams& overrides) {
  return make_scenario("popularity-mediation", overrides).scm;
}

Dataset scenario_sample(const Scenario& scenario, std::size_t n, std::uint64_t seed,
                        bool selected) {
  if (selected && scenario.selection) return sample_selected(scenario.scm, n, seed, *scenario.selection);
  return sample(scenario.scm, n, seed);
}

}  // namespace causal_audit
