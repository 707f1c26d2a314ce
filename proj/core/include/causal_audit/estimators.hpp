#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "causal_audit/dataset.hpp"
#include "causal_audit/graph.hpp"
#include "causal_audit/linear_scm.hpp"
#include "causal_audit/scm.hpp"

namespace causal_audit {

enum class Metric { tv, te, ate, nde, nie, pse };
enum class Backend { exact, plugin };

std::string_view to_string(Metric metric);
std::string_view to_string(Backend backend);
std::optional<Metric> parse_metric(std::string_view text);
// "eq1" ... "eq6"
std::string_view equation_tag(Metric metric);

// Sensitive attribute A with baseline a0 and comparison a1; outcome Y with
// positive value y+. For linear models the values are decimal numbers and
// `positive` is ignored (effects are mean differences).
struct EffectQuery {
  std::string sensitive;
  std::string a0;
  std::string a1;
  std::string outcome;
  std::string positive;

  EffectQuery swapped() const { return {sensitive, a1, a0, outcome, positive}; }
};

struct MediationSpec {
  NodeList mediators;
};

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  std::size_t replicates = 0;
  std::size_t degenerate = 0;
  std::uint64_t seed = 0;
};

struct EffectEstimate {
  double value = 0.0;
  Metric metric = Metric::tv;
  Backend backend = Backend::exact;
  std::vector<std::string> assumptions;
  std::optional<ConfidenceInterval> ci;
};

struct PluginOptions {
  // Add-alpha smoothing of empirical conditionals; 0 disables it.
  double laplace_alpha = 0.0;
  // Back-door adjustment skips covariate strata missing a0 or a1 instead of
  // throwing PositivityError; the estimand becomes the overlap population.
  bool overlap_only = false;
};

// The (data, graph) pair a plug-in estimate is computed from.
struct ObservationalSource {
  const Dataset& data;
  const CausalGraph& graph;
};

// Every mediator of (A, Y) in the graph; used when a MediationSpec is empty.
MediationSpec default_mediation(const CausalGraph& g, const EffectQuery& q);

// Throws DomainError / UnknownNodeError for malformed queries.
void validate_query(const CausalGraph& g, const EffectQuery& q);
void validate_mediation(const CausalGraph& g, const EffectQuery& q, const MediationSpec& m);

// Empirical risk difference P(y+|a1) - P(y+|a0); EmptyStratumError if a
// stratum is empty.
EffectEstimate total_variation(const Dataset& data, const EffectQuery& q,
                               const PluginOptions& options = {});
// Observational risk difference computed from the model's exact joint.
EffectEstimate total_variation(const DiscreteScm& scm, const EffectQuery& q);

// P(y+|do(a1)) - P(y+|do(a0)).
EffectEstimate total_effect(const DiscreteScm& scm, const EffectQuery& q);
EffectEstimate total_effect(const ObservationalSource& source, const EffectQuery& q,
                            const PluginOptions& options = {});
EffectEstimate total_effect(const LinearGaussianScm& scm, const EffectQuery& q);

// Mean unit-level difference Y_{a1} - Y_{a0}.
EffectEstimate average_treatment_effect(const DiscreteScm& scm, const EffectQuery& q);
EffectEstimate average_treatment_effect(const ObservationalSource& source, const EffectQuery& q,
                                        const PluginOptions& options = {});
EffectEstimate average_treatment_effect(const LinearGaussianScm& scm, const EffectQuery& q);

// Direct effect with mediators held at their a0-world values.
EffectEstimate natural_direct_effect(const DiscreteScm& scm, const EffectQuery& q,
                                     const MediationSpec& m);
EffectEstimate natural_direct_effect(const ObservationalSource& source, const EffectQuery& q,
                                     const MediationSpec& m, const PluginOptions& options = {});
EffectEstimate natural_direct_effect(const LinearGaussianScm& scm, const EffectQuery& q,
                                     const MediationSpec& m);

// Indirect effect: A at a0, mediators at their a1-world values.
EffectEstimate natural_indirect_effect(const DiscreteScm& scm, const EffectQuery& q,
                                       const MediationSpec& m);
EffectEstimate natural_indirect_effect(const ObservationalSource& source, const EffectQuery& q,
                                       const MediationSpec& m, const PluginOptions& options = {});
EffectEstimate natural_indirect_effect(const LinearGaussianScm& scm, const EffectQuery& q,
                                       const MediationSpec& m);

// Effect transmitted along the selected edges only.
EffectEstimate path_specific_effect(const DiscreteScm& scm, const EffectQuery& q,
                                    const PathSelection& selection);
EffectEstimate path_specific_effect(const ObservationalSource& source, const EffectQuery& q,
                                    const PathSelection& selection,
                                    const PluginOptions& options = {});
EffectEstimate path_specific_effect(const LinearGaussianScm& scm, const EffectQuery& q,
                                    const PathSelection& selection);

// Covariate set W used by the plug-in mediation formula: observed
// non-descendants of A that block A-Y, A-Z and (with A) Z-Y back-door paths.
// NotIdentifiableError when no such set exists.
NodeList mediation_adjustment_set(const CausalGraph& g, const EffectQuery& q,
                                  const MediationSpec& m);

// First node that carries both a selected and an unselected path segment to
// the target, if any.
std::optional<std::string> recanting_witness(const CausalGraph& g, const PathSelection& selection);

inline constexpr std::size_t kMinBootstrapReplicates = 100;

using DatasetMetric = std::function<double(const Dataset&)>;

// Percentile bootstrap of a plug-in metric. Replicates whose metric throws
// EmptyStratumError or PositivityError are discarded and counted;
// TooManyDegenerateReplicatesError past 20%. `estimate` is the point value
// on the full data; the interval is widened to contain it.
ConfidenceInterval bootstrap_ci(const DatasetMetric& metric, const Dataset& data,
                                std::size_t replicates, double level, std::uint64_t seed,
                                std::optional<double> estimate = std::nullopt);

// Deterministic bootstrap resample of a dataset (weighted multinomial when
// the data is categorical, row resampling otherwise).
Dataset bootstrap_resample(const Dataset& data, std::uint64_t seed, std::uint64_t replicate);

}  // namespace causal_audit
