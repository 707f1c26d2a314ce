#include "causal_audit/estimators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <memory>
#include <set>

#include "causal_audit/errors.hpp"
#include "count_table.hpp"

namespace causal_audit {

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::tv: return "tv";
    case Metric::te: return "te";
    case Metric::ate: return "ate";
    case Metric::nde: return "nde";
    case Metric::nie: return "nie";
    case Metric::pse: return "pse";
  }
  return "tv";
}

std::string_view to_string(Backend backend) {
  return backend == Backend::exact ? "exact" : "plugin";
}

std::optional<Metric> parse_metric(std::string_view text) {
  for (Metric m : {Metric::tv, Metric::te, Metric::ate, Metric::nde, Metric::nie, Metric::pse}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

std::string_view equation_tag(Metric metric) {
  switch (metric) {
    case Metric::tv: return "eq1";
    case Metric::te: return "eq2";
    case Metric::ate: return "eq3";
    case Metric::nde: return "eq4";
    case Metric::nie: return "eq5";
    case Metric::pse: return "eq6";
  }
  return "eq1";
}

namespace {

using detail::CountTable;

std::string join(const NodeList& names) {
  std::string out = "{";
  for (std::size_t i = 0; i < names.size(); ++i) out += (i ? ", " : "") + names[i];
  return out + "}";
}

EffectEstimate make(double value, Metric metric, Backend backend,
                    std::vector<std::string> assumptions) {
  EffectEstimate e;
  e.value = value;
  e.metric = metric;
  e.backend = backend;
  e.assumptions = std::move(assumptions);
  return e;
}

void note_smoothing(std::vector<std::string>& assumptions, const PluginOptions& options) {
  if (options.laplace_alpha > 0.0) {
    assumptions.push_back("laplace smoothing alpha=" + format_double(options.laplace_alpha));
  }
}

double ratio(double numerator, double denominator, double alpha, std::size_t categories) {
  if (alpha > 0.0) {
    return (numerator + alpha) / (denominator + alpha * static_cast<double>(categories));
  }
  return numerator / denominator;
}

std::uint32_t code_in(const Column& c, std::string_view label) {
  return static_cast<std::uint32_t>(c.code_of(label));
}

struct QueryCodes {
  std::uint32_t a0;
  std::uint32_t a1;
  std::uint32_t positive;
  std::size_t outcome_cardinality;
};

QueryCodes resolve(const Dataset& data, const EffectQuery& q) {
  if (q.sensitive == q.outcome) throw DomainError("sensitive attribute and outcome must differ");
  if (q.a0 == q.a1) throw DomainError("a0 and a1 must differ");
  const Column& a = data.column(q.sensitive);
  const Column& y = data.column(q.outcome);
  if (!a.categorical() || !y.categorical()) {
    throw MixedTypeError("plug-in estimators need categorical sensitive and outcome columns");
  }
  return {code_in(a, q.a0), code_in(a, q.a1), code_in(y, q.positive), y.cardinality()};
}

// Every listed node must be observed in the graph and present in the data.
void require_observed(const ObservationalSource& source, const NodeList& nodes,
                      std::string_view metric) {
  NodeList hidden;
  for (const auto& n : nodes) {
    if (!source.graph.observed(n)) hidden.push_back(n);
  }
  if (!hidden.empty()) {
    throw NotIdentifiableError(std::string(metric) + " is not identifiable: " + join(hidden) +
                               " unobserved");
  }
  for (const auto& n : nodes) {
    if (!source.data.has_column(n)) {
      throw ColumnGraphMismatchError("dataset has no column for observed node '" + n + "'");
    }
  }
}

std::string describe_stratum(const CountTable& table, const std::vector<std::uint32_t>& codes,
                             const Dataset& data) {
  std::string out;
  for (std::size_t j = 0; j < codes.size() && j < table.names().size(); ++j) {
    const Column& c = data.column(table.names()[j]);
    out += (j ? ", " : "") + c.name() + "=" + c.schema.domain[codes[j]];
  }
  return out.empty() ? "(all rows)" : out;
}

double risk_difference(const Dataset& data, const EffectQuery& q, const PluginOptions& options) {
  const auto codes = resolve(data, q);
  CountTable table(data, {q.sensitive, q.outcome});
  auto risk = [&](std::uint32_t a) {
    double stratum = 0.0;
    for (std::uint32_t y = 0; y < codes.outcome_cardinality; ++y) stratum += table.at({a, y});
    if (stratum <= 0.0) {
      throw EmptyStratumError("no rows with " + q.sensitive + "=" +
                              data.column(q.sensitive).schema.domain[a]);
    }
    return ratio(table.at({a, codes.positive}), stratum, options.laplace_alpha,
                 codes.outcome_cardinality);
  };
  return risk(codes.a1) - risk(codes.a0);
}

// sum_w P(w) [P(y+|a1,w) - P(y+|a0,w)]
double backdoor_difference(const Dataset& data, const EffectQuery& q, const NodeList& adjust,
                           const PluginOptions& options) {
  if (adjust.empty()) return risk_difference(data, q, options);
  const auto codes = resolve(data, q);
  NodeList columns = adjust;
  columns.push_back(q.sensitive);
  columns.push_back(q.outcome);
  CountTable table(data, columns);
  const std::size_t k = adjust.size();
  std::vector<std::size_t> w_radix(table.radix().begin(), table.radix().begin() + k);
  const std::size_t a_card = table.radix()[k];
  const double n = table.total();

  double total1 = 0.0;
  double total0 = 0.0;
  double kept = 0.0;
  detail::for_each_config(w_radix, [&](const std::vector<std::uint32_t>& w) {
    auto key = w;
    key.push_back(0);
    key.push_back(0);
    auto count = [&](std::uint32_t a, std::optional<std::uint32_t> y) {
      key[k] = a;
      if (y) {
        key[k + 1] = *y;
        return table.at(key);
      }
      double s = 0.0;
      for (std::uint32_t v = 0; v < codes.outcome_cardinality; ++v) {
        key[k + 1] = v;
        s += table.at(key);
      }
      return s;
    };
    double n_w = 0.0;
    for (std::uint32_t a = 0; a < a_card; ++a) n_w += count(a, std::nullopt);
    if (n_w <= 0.0) return;
    if (options.overlap_only && (count(codes.a0, std::nullopt) <= 0.0 ||
                                 count(codes.a1, std::nullopt) <= 0.0)) {
      return;
    }
    const double weight = n_w / n;
    kept += weight;
    auto conditional = [&](std::uint32_t a) {
      const double n_aw = count(a, std::nullopt);
      if (n_aw <= 0.0 && options.laplace_alpha <= 0.0) {
        auto stratum = w;
        throw PositivityError("positivity violated: no rows with " + q.sensitive + "=" +
                              data.column(q.sensitive).schema.domain[a] + " in stratum " +
                              describe_stratum(table, stratum, data));
      }
      return ratio(count(a, codes.positive), n_aw, options.laplace_alpha,
                   codes.outcome_cardinality);
    };
    total1 += weight * conditional(codes.a1);
    total0 += weight * conditional(codes.a0);
  });
  if (kept <= 0.0) {
    throw PositivityError("positivity violated: no covariate stratum contains both " +
                          q.sensitive + "=" + q.a0 + " and " + q.sensitive + "=" + q.a1);
  }
  return (total1 - total0) / kept;
}

NodeList adjustment_for(const ObservationalSource& source, const EffectQuery& q,
                        std::string_view metric) {
  require_observed(source, {q.sensitive, q.outcome}, metric);
  auto set = minimal_adjustment_set(source.graph, q.sensitive, q.outcome);
  if (!set) {
    const auto hidden = source.graph.unobserved_nodes();
    throw NotIdentifiableError(std::string(metric) + " is not identifiable: no observed back-door "
                               "adjustment set for " + q.sensitive + " -> " + q.outcome +
                               (hidden.empty() ? "" : " (unobserved: " + join(hidden) + ")"));
  }
  require_observed(source, set->nodes, metric);
  return set->nodes;
}

std::vector<std::string> backdoor_assumptions(const NodeList& adjust, const PluginOptions& options) {
  std::vector<std::string> out{
      "back-door adjustment set " + join(adjust),
      "ignorability given the adjustment set",
      "positivity within adjustment strata",
  };
  if (options.overlap_only) {
    out.push_back("averaged over covariate strata that contain both sensitive values only");
  }
  note_smoothing(out, options);
  return out;
}

Event positive_event(const EffectQuery& q) { return {q.outcome, q.positive}; }

double parse_number(const std::string& text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DomainError("'" + text + "' is not a number; linear models take numeric a0/a1");
  }
  return v;
}

void validate_scm_query(const DiscreteScm& scm, const EffectQuery& q) {
  validate_query(scm.graph(), q);
  scm.code_of(q.sensitive, q.a0);
  scm.code_of(q.sensitive, q.a1);
  scm.code_of(q.outcome, q.positive);
}

double do_prob(const DiscreteScm& scm, const EffectQuery& q, const std::string& a) {
  return interventional_prob(scm, {{q.sensitive, a}}, positive_event(q));
}

}  // namespace

MediationSpec default_mediation(const CausalGraph& g, const EffectQuery& q) {
  return {mediators(g, q.sensitive, q.outcome)};
}

void validate_query(const CausalGraph& g, const EffectQuery& q) {
  g.index(q.sensitive);
  g.index(q.outcome);
  if (q.sensitive == q.outcome) throw DomainError("sensitive attribute and outcome must differ");
  if (q.a0 == q.a1) throw DomainError("a0 and a1 must differ");
}

void validate_mediation(const CausalGraph& g, const EffectQuery& q, const MediationSpec& m) {
  const auto allowed = mediators(g, q.sensitive, q.outcome);
  std::set<std::string> seen;
  for (const auto& z : m.mediators) {
    g.index(z);
    if (!std::binary_search(allowed.begin(), allowed.end(), z)) {
      throw DomainError("'" + z + "' is not on a directed path " + q.sensitive + " -> " +
                        q.outcome);
    }
    if (!seen.insert(z).second) throw DomainError("mediator '" + z + "' listed twice");
  }
}

EffectEstimate total_variation(const Dataset& data, const EffectQuery& q,
                               const PluginOptions& options) {
  std::vector<std::string> assumptions{"observational association (no causal adjustment)"};
  note_smoothing(assumptions, options);
  return make(risk_difference(data, q, options), Metric::tv, Backend::plugin,
              std::move(assumptions));
}

EffectEstimate total_variation(const DiscreteScm& scm, const EffectQuery& q) {
  validate_scm_query(scm, q);
  const auto joint = joint_distribution(scm);
  const auto y = positive_event(q);
  const double value = joint.conditional(y, {{q.sensitive, q.a1}}) -
                       joint.conditional(y, {{q.sensitive, q.a0}});
  return make(value, Metric::tv, Backend::exact,
              {"observational association (no causal adjustment)"});
}

EffectEstimate total_effect(const DiscreteScm& scm, const EffectQuery& q) {
  validate_scm_query(scm, q);
  return make(do_prob(scm, q, q.a1) - do_prob(scm, q, q.a0), Metric::te, Backend::exact,
              {"fully specified causal model"});
}

EffectEstimate total_effect(const ObservationalSource& source, const EffectQuery& q,
                            const PluginOptions& options) {
  validate_query(source.graph, q);
  const auto adjust = adjustment_for(source, q, "TE");
  return make(backdoor_difference(source.data, q, adjust, options), Metric::te, Backend::plugin,
              backdoor_assumptions(adjust, options));
}

EffectEstimate total_effect(const LinearGaussianScm& scm, const EffectQuery& q) {
  validate_query(scm.graph(), q);
  const double a1 = parse_number(q.a1);
  const double a0 = parse_number(q.a0);
  const double value = interventional_mean(scm, {{q.sensitive, a1}}, q.outcome) -
                       interventional_mean(scm, {{q.sensitive, a0}}, q.outcome);
  return make(value, Metric::te, Backend::exact,
              {"fully specified linear model", "effect on the mean of the outcome"});
}

EffectEstimate average_treatment_effect(const DiscreteScm& scm, const EffectQuery& q) {
  validate_scm_query(scm, q);
  if (!scm.structural()) {
    return make(do_prob(scm, q, q.a1) - do_prob(scm, q, q.a0), Metric::ate, Backend::exact,
                {"model given by conditional tables: unit outcomes averaged through do()"});
  }
  // Average over units of Y^{a1} - Y^{a0}: every exogenous configuration is a
  // unit, weighted by its probability (abduction over the observational joint).
  const auto& g = scm.graph();
  const std::size_t y = g.index(q.outcome);
  const std::uint32_t positive = scm.code_of(q.outcome, q.positive);
  std::vector<std::int32_t> treated(scm.size(), -1);
  std::vector<std::int32_t> control(scm.size(), -1);
  treated[g.index(q.sensitive)] = static_cast<std::int32_t>(scm.code_of(q.sensitive, q.a1));
  control[g.index(q.sensitive)] = static_cast<std::int32_t>(scm.code_of(q.sensitive, q.a0));
  double value = 0.0;
  scm.for_each_configuration([&](const std::vector<std::uint32_t>& u, double p) {
    const double y1 = scm.propagate(u, treated)[y] == positive ? 1.0 : 0.0;
    const double y0 = scm.propagate(u, control)[y] == positive ? 1.0 : 0.0;
    value += p * (y1 - y0);
  });
  return make(value, Metric::ate, Backend::exact, {"fully specified causal model"});
}

EffectEstimate average_treatment_effect(const ObservationalSource& source, const EffectQuery& q,
                                        const PluginOptions& options) {
  auto e = total_effect(source, q, options);
  e.metric = Metric::ate;
  e.assumptions.push_back("ATE identified by the TE adjustment formula");
  return e;
}

EffectEstimate average_treatment_effect(const LinearGaussianScm& scm, const EffectQuery& q) {
  auto e = total_effect(scm, q);
  e.metric = Metric::ate;
  return e;
}

EffectEstimate natural_direct_effect(const DiscreteScm& scm, const EffectQuery& q,
                                     const MediationSpec& m) {
  validate_scm_query(scm, q);
  validate_mediation(scm.graph(), q, m);
  const double nested = counterfactual_prob(
      scm, {positive_event(q), {{q.sensitive, q.a1}}, {{q.sensitive, q.a0}}, m.mediators});
  return make(nested - do_prob(scm, q, q.a0), Metric::nde, Backend::exact,
              {"fully specified causal model", "mediators " + join(m.mediators)});
}

EffectEstimate natural_indirect_effect(const DiscreteScm& scm, const EffectQuery& q,
                                       const MediationSpec& m) {
  validate_scm_query(scm, q);
  validate_mediation(scm.graph(), q, m);
  const double nested = counterfactual_prob(
      scm, {positive_event(q), {{q.sensitive, q.a0}}, {{q.sensitive, q.a1}}, m.mediators});
  return make(nested - do_prob(scm, q, q.a0), Metric::nie, Backend::exact,
              {"fully specified causal model", "mediators " + join(m.mediators)});
}

EffectEstimate path_specific_effect(const DiscreteScm& scm, const EffectQuery& q,
                                    const PathSelection& selection) {
  validate_scm_query(scm, q);
  if (selection.source != q.sensitive || selection.target != q.outcome) {
    throw InvalidPathSelectionError("path selection must run from the sensitive attribute to the "
                                    "outcome");
  }
  const double nested = path_specific_prob(scm, selection, q.a1, q.a0, positive_event(q));
  std::string edges;
  for (const auto& e : selection.edges) edges += (edges.empty() ? "" : ", ") + to_string(e);
  return make(nested - do_prob(scm, q, q.a0), Metric::pse, Backend::exact,
              {"fully specified causal model", "selected edges {" + edges + "}"});
}

EffectEstimate natural_direct_effect(const LinearGaussianScm& scm, const EffectQuery& q,
                                     const MediationSpec& m) {
  validate_query(scm.graph(), q);
  validate_mediation(scm.graph(), q, m);
  const double a1 = parse_number(q.a1);
  const double a0 = parse_number(q.a0);
  const double value = counterfactual_mean(scm, q.sensitive, a1, a0, m.mediators, q.outcome) -
                       interventional_mean(scm, {{q.sensitive, a0}}, q.outcome);
  return make(value, Metric::nde, Backend::exact,
              {"fully specified linear model", "effect on the mean of the outcome"});
}

EffectEstimate natural_indirect_effect(const LinearGaussianScm& scm, const EffectQuery& q,
                                       const MediationSpec& m) {
  validate_query(scm.graph(), q);
  validate_mediation(scm.graph(), q, m);
  const double a1 = parse_number(q.a1);
  const double a0 = parse_number(q.a0);
  const double value = counterfactual_mean(scm, q.sensitive, a0, a1, m.mediators, q.outcome) -
                       interventional_mean(scm, {{q.sensitive, a0}}, q.outcome);
  return make(value, Metric::nie, Backend::exact,
              {"fully specified linear model", "effect on the mean of the outcome"});
}

EffectEstimate path_specific_effect(const LinearGaussianScm& scm, const EffectQuery& q,
                                    const PathSelection& selection) {
  validate_query(scm.graph(), q);
  const double a1 = parse_number(q.a1);
  const double a0 = parse_number(q.a0);
  const double value = path_specific_mean(scm, selection, a1, a0) -
                       interventional_mean(scm, {{q.sensitive, a0}}, q.outcome);
  return make(value, Metric::pse, Backend::exact,
              {"fully specified linear model", "effect on the mean of the outcome"});
}

NodeList mediation_adjustment_set(const CausalGraph& g, const EffectQuery& q,
                                  const MediationSpec& m) {
  const auto desc = g.descendants(g.index(q.sensitive));
  NodeList candidates;
  for (std::size_t v = 0; v < g.size(); ++v) {
    const auto& name = g.name(v);
    if (desc[v] || name == q.outcome || !g.observed(v)) continue;
    candidates.push_back(name);
  }
  const NodeList source{q.sensitive};
  const NodeList target{q.outcome};
  const CausalGraph cut_a = g.without_outgoing(source);
  const CausalGraph cut_z = g.without_outgoing(m.mediators);

  auto valid = [&](const NodeList& w) {
    if (!d_separated(cut_a, source, target, w)) return false;
    if (m.mediators.empty()) return true;
    if (!d_separated(cut_a, source, m.mediators, w)) return false;
    NodeList given = w;
    given.push_back(q.sensitive);
    return d_separated(cut_z, m.mediators, target, given);
  };

  const std::size_t n = candidates.size();
  for (std::size_t k = 0; k <= n; ++k) {
    std::vector<std::size_t> pick(k);
    for (std::size_t i = 0; i < k; ++i) pick[i] = i;
    while (true) {
      NodeList w;
      for (std::size_t i : pick) w.push_back(candidates[i]);
      if (valid(w)) return w;
      std::size_t i = k;
      while (i > 0 && pick[i - 1] == n - k + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  const auto hidden = g.unobserved_nodes();
  throw NotIdentifiableError("natural effects are not identifiable: no observed covariate set "
                             "deconfounds " + q.sensitive + ", mediators " + join(m.mediators) +
                             " and " + q.outcome +
                             (hidden.empty() ? "" : " (unobserved: " + join(hidden) + ")"));
}

namespace {

// sum_{w,z} P(w) * f(z, w) with the mediator and outcome conditionals of the
// mediation formula. `direct` selects NDE (true) or NIE (false).
double mediation_formula(const Dataset& data, const EffectQuery& q, const NodeList& mediators,
                         const NodeList& adjust, const PluginOptions& options, bool direct) {
  const auto codes = resolve(data, q);
  NodeList columns = adjust;
  columns.insert(columns.end(), mediators.begin(), mediators.end());
  columns.push_back(q.sensitive);
  columns.push_back(q.outcome);
  CountTable table(data, columns);
  const std::size_t kw = adjust.size();
  const std::size_t kz = mediators.size();
  const auto& radix = table.radix();
  std::vector<std::size_t> w_radix(radix.begin(), radix.begin() + kw);
  std::vector<std::size_t> z_radix(radix.begin() + kw, radix.begin() + kw + kz);
  std::size_t z_configs = 1;
  for (std::size_t r : z_radix) z_configs *= r;
  const std::size_t a_card = radix[kw + kz];
  const double n = table.total();
  const double alpha = options.laplace_alpha;

  std::vector<std::uint32_t> key(columns.size(), 0);
  auto count = [&](const std::vector<std::uint32_t>& w, const std::vector<std::uint32_t>* z,
                   std::optional<std::uint32_t> a, std::optional<std::uint32_t> y) {
    double s = 0.0;
    std::copy(w.begin(), w.end(), key.begin());
    auto over_z = [&](const std::vector<std::uint32_t>& zz) {
      std::copy(zz.begin(), zz.end(), key.begin() + kw);
      for (std::uint32_t av = 0; av < a_card; ++av) {
        if (a && av != *a) continue;
        key[kw + kz] = av;
        for (std::uint32_t yv = 0; yv < codes.outcome_cardinality; ++yv) {
          if (y && yv != *y) continue;
          key[kw + kz + 1] = yv;
          s += table.at(key);
        }
      }
    };
    if (z) {
      over_z(*z);
    } else {
      detail::for_each_config(z_radix, over_z);
    }
    return s;
  };

  auto positivity = [&](const std::vector<std::uint32_t>& w, const std::vector<std::uint32_t>* z,
                        std::uint32_t a) {
    auto stratum = w;
    if (z) stratum.insert(stratum.end(), z->begin(), z->end());
    throw PositivityError("positivity violated: no rows with " + q.sensitive + "=" +
                          data.column(q.sensitive).schema.domain[a] + " in stratum " +
                          describe_stratum(table, stratum, data));
  };

  double total = 0.0;
  detail::for_each_config(w_radix, [&](const std::vector<std::uint32_t>& w) {
    const double n_w = count(w, nullptr, std::nullopt, std::nullopt);
    if (n_w <= 0.0) return;
    const double p_w = n_w / n;
    const double n_a0w = count(w, nullptr, codes.a0, std::nullopt);
    const double n_a1w = count(w, nullptr, codes.a1, std::nullopt);
    if (alpha <= 0.0) {
      if (n_a0w <= 0.0) positivity(w, nullptr, codes.a0);
      if (!direct && n_a1w <= 0.0) positivity(w, nullptr, codes.a1);
    }
    double inner = 0.0;
    detail::for_each_config(z_radix, [&](const std::vector<std::uint32_t>& z) {
      const double pz0 = ratio(count(w, &z, codes.a0, std::nullopt), n_a0w, alpha, z_configs);
      auto outcome = [&](std::uint32_t a) {
        const double n_azw = count(w, &z, a, std::nullopt);
        if (n_azw <= 0.0 && alpha <= 0.0) positivity(w, &z, a);
        return ratio(count(w, &z, a, codes.positive), n_azw, alpha, codes.outcome_cardinality);
      };
      if (direct) {
        if (pz0 <= 0.0) return;
        inner += pz0 * (outcome(codes.a1) - outcome(codes.a0));
      } else {
        const double pz1 = ratio(count(w, &z, codes.a1, std::nullopt), n_a1w, alpha, z_configs);
        if (pz0 <= 0.0 && pz1 <= 0.0) return;
        inner += outcome(codes.a0) * (pz1 - pz0);
      }
    });
    total += p_w * inner;
  });
  return total;
}

EffectEstimate natural_effect_plugin(const ObservationalSource& source, const EffectQuery& q,
                                     const MediationSpec& m, const PluginOptions& options,
                                     bool direct) {
  validate_query(source.graph, q);
  validate_mediation(source.graph, q, m);
  const char* metric = direct ? "NDE" : "NIE";
  NodeList needed{q.sensitive, q.outcome};
  needed.insert(needed.end(), m.mediators.begin(), m.mediators.end());
  require_observed(source, needed, metric);
  const auto adjust = mediation_adjustment_set(source.graph, q, m);
  require_observed(source, adjust, metric);
  std::vector<std::string> assumptions{
      "mediation formula over mediators " + join(m.mediators),
      "covariates " + join(adjust),
      "sequential ignorability (Markovian model over observed nodes)",
      "positivity within covariate and mediator strata",
  };
  note_smoothing(assumptions, options);
  return make(mediation_formula(source.data, q, m.mediators, adjust, options, direct),
              direct ? Metric::nde : Metric::nie, Backend::plugin, std::move(assumptions));
}

// Which world(s) each ancestor of the target must be evaluated in.
struct WorldNeeds {
  std::vector<bool> active;     // reachable from the source along selected edges
  std::vector<bool> selected;   // needed in the selected (a1) world
  std::vector<bool> reference;  // needed in the reference (a0) world
  std::vector<std::vector<bool>> on;
};

WorldNeeds world_needs(const CausalGraph& g, const PathSelection& selection) {
  const std::size_t n = g.size();
  const std::size_t a = g.index(selection.source);
  const std::size_t y = g.index(selection.target);
  WorldNeeds needs{std::vector<bool>(n, false), std::vector<bool>(n, false),
                   std::vector<bool>(n, false),
                   std::vector<std::vector<bool>>(n, std::vector<bool>(n, false))};
  for (const auto& e : selection.edges) needs.on[g.index(e.from)][g.index(e.to)] = true;
  needs.active[a] = true;
  for (std::size_t v : g.topological_order()) {
    for (std::size_t p : g.parents(v)) {
      if (needs.active[p] && needs.on[p][v]) needs.active[v] = true;
    }
  }
  needs.selected[y] = true;
  const auto& order = g.topological_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t v = *it;
    if (v == a) continue;
    if (!needs.active[v] && needs.selected[v]) {
      needs.selected[v] = false;
      needs.reference[v] = true;
    }
    for (std::size_t p : g.parents(v)) {
      if (needs.selected[v]) {
        if (needs.on[p][v]) {
          needs.selected[p] = true;
        } else {
          needs.reference[p] = true;
        }
      }
      if (needs.reference[v]) needs.reference[p] = true;
    }
  }
  return needs;
}

// Edge g-formula: sum over ancestors of the target of prod_V P(v | pa(v)),
// with the source's value chosen per consuming node.
double edge_g_formula(const ObservationalSource& source, const EffectQuery& q,
                      const PathSelection& selection, const PluginOptions& options) {
  const auto& g = source.graph;
  const auto& data = source.data;
  const auto codes = resolve(data, q);
  const std::size_t a = g.index(q.sensitive);
  const std::size_t y = g.index(q.outcome);
  const auto needs = world_needs(g, selection);
  const auto anc = g.ancestors(y);

  std::vector<std::size_t> order;
  for (std::size_t v : g.topological_order()) {
    if (anc[v] && v != a) order.push_back(v);
  }

  struct Factor {
    std::unique_ptr<CountTable> table;
    std::vector<std::size_t> parents;
    std::size_t cardinality = 0;
    std::uint32_t source_value = 0;
  };
  std::vector<Factor> factors(g.size());
  for (std::size_t v : order) {
    NodeList columns;
    Factor& f = factors[v];
    for (std::size_t p : g.parents(v)) {
      columns.push_back(g.name(p));
      f.parents.push_back(p);
    }
    columns.push_back(g.name(v));
    f.table = std::make_unique<CountTable>(data, columns);
    f.cardinality = f.table->radix().back();
    const bool a1_here = needs.active[v] && needs.selected[v] && needs.on[a][v];
    f.source_value = a1_here ? codes.a1 : codes.a0;
  }

  std::vector<std::uint32_t> values(g.size(), 0);
  const double alpha = options.laplace_alpha;
  double total = 0.0;
  auto descend = [&](auto&& self, std::size_t depth, double weight) -> void {
    if (depth == order.size()) {
      if (values[y] == codes.positive) total += weight;
      return;
    }
    const std::size_t v = order[depth];
    const Factor& f = factors[v];
    std::vector<std::uint32_t> key;
    for (std::size_t p : f.parents) key.push_back(p == a ? f.source_value : values[p]);
    key.push_back(0);
    double stratum = 0.0;
    for (std::uint32_t x = 0; x < f.cardinality; ++x) {
      key.back() = x;
      stratum += f.table->at(key);
    }
    if (stratum <= 0.0 && alpha <= 0.0) {
      key.pop_back();
      throw PositivityError("positivity violated: no rows in stratum " +
                            describe_stratum(*f.table, key, data) + " needed for " + g.name(v));
    }
    for (std::uint32_t x = 0; x < f.cardinality; ++x) {
      key.back() = x;
      const double p = ratio(f.table->at(key), stratum, alpha, f.cardinality);
      if (p <= 0.0) continue;
      values[v] = x;
      self(self, depth + 1, weight * p);
    }
  };
  descend(descend, 0, 1.0);
  return total;
}

}  // namespace

EffectEstimate natural_direct_effect(const ObservationalSource& source, const EffectQuery& q,
                                     const MediationSpec& m, const PluginOptions& options) {
  return natural_effect_plugin(source, q, m, options, true);
}

EffectEstimate natural_indirect_effect(const ObservationalSource& source, const EffectQuery& q,
                                       const MediationSpec& m, const PluginOptions& options) {
  return natural_effect_plugin(source, q, m, options, false);
}

std::optional<std::string> recanting_witness(const CausalGraph& g,
                                             const PathSelection& selection) {
  validate_selection(g, selection);
  const auto needs = world_needs(g, selection);
  const std::size_t a = g.index(selection.source);
  for (std::size_t v : g.topological_order()) {
    if (v != a && needs.active[v] && needs.selected[v] && needs.reference[v]) return g.name(v);
  }
  return std::nullopt;
}

EffectEstimate path_specific_effect(const ObservationalSource& source, const EffectQuery& q,
                                    const PathSelection& selection,
                                    const PluginOptions& options) {
  validate_query(source.graph, q);
  if (selection.source != q.sensitive || selection.target != q.outcome) {
    throw InvalidPathSelectionError("path selection must run from the sensitive attribute to the "
                                    "outcome");
  }
  validate_selection(source.graph, selection);
  if (auto witness = recanting_witness(source.graph, selection)) {
    throw NotIdentifiableError("PSE is not identifiable from observational data: '" + *witness +
                               "' is a recanting witness (it transmits both selected and "
                               "unselected path segments)");
  }
  const auto anc = source.graph.ancestors(source.graph.index(q.outcome));
  NodeList needed;
  for (std::size_t v = 0; v < source.graph.size(); ++v) {
    if (anc[v]) needed.push_back(source.graph.name(v));
  }
  require_observed(source, needed, "PSE");

  const PathSelection none{q.sensitive, q.outcome, {}};
  const double value = edge_g_formula(source, q, selection, options) -
                       edge_g_formula(source, q, none, options);
  std::vector<std::string> assumptions{
      "edge g-formula over ancestors of " + q.outcome,
      "no recanting witness",
      "Markovian model over observed nodes",
      "positivity within parent strata",
  };
  note_smoothing(assumptions, options);
  return make(value, Metric::pse, Backend::plugin, std::move(assumptions));
}

}  // namespace causal_audit
