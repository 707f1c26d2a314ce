#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "causal_audit/estimators.hpp"
#include "causal_audit/graph.hpp"
#include "causal_audit/scm.hpp"

namespace causal_audit {

// Every scenario variable is binary ("0"/"1") with
//   P(V = 1 | parents) = base + sum(sign * strength * parent),
// where each edge has a fixed sign. Parameters are named "<Node>.base" and
// "<Node>.<Parent>" and hold the base rate or the edge strength, all in [0,1].
using ScenarioParams = std::map<std::string, double>;

struct Scenario {
  std::string name;
  std::string summary;
  DiscreteScm scm;
  EffectQuery query;
  RoleTags roles;
  // Default path selection for the path-specific effect.
  PathSelection pi;
  // Sub-population filter the scenario is about, if any.
  std::optional<Event> selection;
  ScenarioParams parameters;
};

// Exact effects at the default parameters.
struct GroundTruth {
  double tv = 0.0;
  double te = 0.0;
  double ate = 0.0;
  double nde = 0.0;
  double nie = 0.0;
  double pse = 0.0;
};

std::vector<std::string> scenario_names();
bool is_scenario(std::string_view name);

// ConfigError for an unknown scenario.
ScenarioParams default_parameters(std::string_view name);

// ParameterRangeError for unknown parameter names, values outside [0,1] or
// combinations that push a conditional probability outside [0,1].
Scenario make_scenario(std::string_view name, const ScenarioParams& overrides = {});

GroundTruth ground_truth(std::string_view name);

DiscreteScm visa_scenario(const ScenarioParams& overrides = {});
DiscreteScm hiring_scenario(const ScenarioParams& overrides = {});
DiscreteScm district_scenario(const ScenarioParams& overrides = {});
DiscreteScm banknote_collider_scenario(const ScenarioParams& overrides = {});
DiscreteScm love_confounder_scenario(const ScenarioParams& overrides = {});
DiscreteScm popularity_mediation_scenario(const ScenarioParams& overrides = {});

// Rows from the scenario's selected sub-population, or the whole population
// when it has none.
Dataset scenario_sample(const Scenario& scenario, std::size_t n, std::uint64_t seed,
                        bool selected = false);

}  // namespace causal_audit
