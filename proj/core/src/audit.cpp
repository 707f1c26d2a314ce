#include "causal_audit/audit.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <set>

#include "causal_audit/errors.hpp"

namespace causal_audit {

std::string_view tool_version() { return CAUSAL_AUDIT_VERSION; }

std::string_view to_string(MetricStatus status) {
  switch (status) {
    case MetricStatus::ok: return "ok";
    case MetricStatus::degraded: return "degraded";
    case MetricStatus::failed: return "failed";
  }
  return "failed";
}

std::vector<Edge> parse_edge_list(std::string_view text) {
  std::vector<Edge> edges;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string_view item = text.substr(start, comma - start);
    const std::size_t gt = item.find('>');
    if (gt == std::string_view::npos || gt == 0 || gt + 1 == item.size() ||
        item.find('>', gt + 1) != std::string_view::npos) {
      throw ConfigError("malformed edge '" + std::string(item) + "' (expected From>To)");
    }
    edges.push_back({std::string(item.substr(0, gt)), std::string(item.substr(gt + 1))});
    start = comma + 1;
  }
  return edges;
}

namespace {

CheckReport untestable(std::string assumption, std::string why) {
  CheckReport r;
  r.assumption = std::move(assumption);
  r.status = CheckStatus::untestable;
  r.explanation = std::move(why);
  return r;
}

void check_value(const GraphSpec& spec, const std::string& node, const std::string& value) {
  auto d = spec.domains.find(node);
  if (d != spec.domains.end()) {
    if (std::find(d->second.begin(), d->second.end(), value) == d->second.end()) {
      throw DomainError("value '" + value + "' is not in the domain of " + node);
    }
    return;
  }
  double parsed = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw DomainError("node " + node + " is numeric; '" + value + "' is not a number");
  }
}

Backend choose_backend(const AuditConfig& config, const GraphSpec& spec,
                       const std::optional<Dataset>& data) {
  switch (config.backend) {
    case BackendChoice::exact:
      if (!spec.has_model()) {
        throw ConfigError("the exact backend needs a spec that defines a full model");
      }
      return Backend::exact;
    case BackendChoice::plugin:
      if (!data && config.run_metrics) throw ConfigError("the plugin backend needs --data");
      return Backend::plugin;
    case BackendChoice::automatic:
      if (spec.has_model()) return Backend::exact;
      if (!data && config.run_metrics) {
        throw ConfigError("the spec defines no model, so a dataset is required (--data)");
      }
      return Backend::plugin;
  }
  return Backend::plugin;
}

// Edges of every proxy path when roles name proxies, else every indirect edge.
PathSelection default_selection(const std::vector<ClassifiedPath>& paths, const EffectQuery& q) {
  std::set<Edge> proxy;
  std::set<Edge> indirect;
  for (const auto& cp : paths) {
    if (cp.path.kind != PathKind::causal || cp.label == PathLabel::direct) continue;
    for (const auto& e : cp.path.edges()) {
      indirect.insert(e);
      if (cp.label == PathLabel::indirect_proxy) proxy.insert(e);
    }
  }
  const auto& chosen = proxy.empty() ? indirect : proxy;
  return {q.sensitive, q.outcome, {chosen.begin(), chosen.end()}};
}

class MetricRunner {
 public:
  MetricRunner(const AuditConfig& config, const GraphSpec& spec, const std::optional<Dataset>& data,
               Backend backend, PathSelection selection)
      : config_(config), spec_(spec), data_(data), backend_(backend),
        selection_(std::move(selection)),
        mediation_(default_mediation(spec.graph, config.query)) {}

  EffectEstimate compute(Metric metric, const PluginOptions& options) const {
    return compute(metric, options, selection_, data_ ? &*data_ : nullptr);
  }

  EffectEstimate compute(Metric metric, const PluginOptions& options,
                         const PathSelection& selection, const Dataset* data) const {
    const EffectQuery& q = config_.query;
    if (backend_ == Backend::exact && spec_.discrete) {
      const DiscreteScm& scm = *spec_.discrete;
      switch (metric) {
        case Metric::tv: return total_variation(scm, q);
        case Metric::te: return total_effect(scm, q);
        case Metric::ate: return average_treatment_effect(scm, q);
        case Metric::nde: return natural_direct_effect(scm, q, mediation_);
        case Metric::nie: return natural_indirect_effect(scm, q, mediation_);
        case Metric::pse: return path_specific_effect(scm, q, selection);
      }
    }
    if (backend_ == Backend::exact) {
      const LinearGaussianScm& scm = *spec_.linear;
      switch (metric) {
        case Metric::tv:
          throw UnsupportedModelError(
              "TV compares outcome rates and needs a discrete model or a dataset");
        case Metric::te: return total_effect(scm, q);
        case Metric::ate: return average_treatment_effect(scm, q);
        case Metric::nde: return natural_direct_effect(scm, q, mediation_);
        case Metric::nie: return natural_indirect_effect(scm, q, mediation_);
        case Metric::pse: return path_specific_effect(scm, q, selection);
      }
    }
    const ObservationalSource source{*data, spec_.graph};
    switch (metric) {
      case Metric::tv: return total_variation(*data, q, options);
      case Metric::te: return total_effect(source, q, options);
      case Metric::ate: return average_treatment_effect(source, q, options);
      case Metric::nde: return natural_direct_effect(source, q, mediation_, options);
      case Metric::nie: return natural_indirect_effect(source, q, mediation_, options);
      case Metric::pse: return path_specific_effect(source, q, selection, options);
    }
    throw ConfigError("unknown metric");
  }

  MetricResult run(Metric metric, std::vector<std::string>& warnings, bool& unidentifiable) const {
    MetricResult result;
    result.metric = metric;
    PluginOptions options;
    options.laplace_alpha = config_.laplace_alpha;
    const std::string label = upper(metric);
    try {
      try {
        result.estimate = compute(metric, options);
      } catch (const PositivityError& e) {
        if (backend_ != Backend::plugin || (metric != Metric::te && metric != Metric::ate)) throw;
        options.overlap_only = true;
        result.estimate = compute(metric, options);
        result.status = MetricStatus::degraded;
        result.notes.push_back(std::string("positivity violated (") + e.what() +
                               "); estimated on the overlap population");
        warnings.push_back(label + ": positivity violated; reported on the overlap population");
      }
    } catch (const NotIdentifiableError& e) {
      return failure(result, e, label, warnings, unidentifiable, true);
    } catch (const PositivityError& e) {
      return failure(result, e, label, warnings, unidentifiable, true);
    } catch (const Error& e) {
      return failure(result, e, label, warnings, unidentifiable, false);
    }
    if (backend_ == Backend::plugin && config_.bootstrap > 0) {
      const DatasetMetric fn = [this, metric, options](const Dataset& d) {
        return compute(metric, options, selection_, &d).value;
      };
      try {
        result.estimate->ci = bootstrap_ci(fn, *data_, config_.bootstrap, config_.confidence,
                                           config_.seed, result.estimate->value);
      } catch (const Error& e) {
        result.status = MetricStatus::degraded;
        result.notes.push_back(std::string("no confidence interval: ") + e.what());
        warnings.push_back(label + ": bootstrap failed: " + e.what());
      }
    }
    return result;
  }

  PathEffect path_effect(const ClassifiedPath& cp) const {
    PathEffect pe;
    pe.path = cp;
    for (const auto& v : cp.path.interior()) {
      auto it = spec_.roles.find(v);
      pe.roles[v] = it == spec_.roles.end() ? Role::neutral : it->second;
    }
    PluginOptions options;
    options.laplace_alpha = config_.laplace_alpha;
    const PathSelection selection{config_.query.sensitive, config_.query.outcome,
                                  cp.path.edges()};
    try {
      pe.pse = compute(Metric::pse, options, selection, data_ ? &*data_ : nullptr).value;
    } catch (const Error& e) {
      pe.error = e.what();
    }
    return pe;
  }

  const PathSelection& selection() const { return selection_; }

 private:
  static std::string upper(Metric metric) {
    std::string s(to_string(metric));
    for (char& c : s) c = static_cast<char>(c - 'a' + 'A');
    return s;
  }

  static MetricResult failure(MetricResult& result, const Error& e, const std::string& label,
                              std::vector<std::string>& warnings, bool& unidentifiable,
                              bool identification) {
    result.status = MetricStatus::failed;
    result.estimate.reset();
    result.error_kind = e.kind();
    result.error = e.what();
    warnings.push_back(label + ": " + e.what());
    if (identification) unidentifiable = true;
    return result;
  }

  const AuditConfig& config_;
  const GraphSpec& spec_;
  const std::optional<Dataset>& data_;
  Backend backend_;
  PathSelection selection_;
  MediationSpec mediation_;
};

std::vector<CheckReport> run_checks(const AuditConfig& config, const GraphSpec& spec,
                                    const std::optional<Dataset>& data) {
  std::vector<CheckReport> out;
  const CausalGraph& g = spec.graph;
  const EffectQuery& q = config.query;
  if (!data) {
    const std::string why = "no dataset supplied; data-driven checks were not run";
    for (const char* name : {"positivity", "causal Markov condition", "faithfulness", "linearity"}) {
      out.push_back(untestable(name, why));
    }
  } else {
    const CheckOptions options{config.alpha, config.min_effect, 5.0};
    auto guarded = [&](const char* name, const std::function<CheckReport()>& run) {
      try {
        out.push_back(run());
      } catch (const NoNumericChildError& e) {
        out.push_back(untestable(name, e.what()));
      } catch (const Error& e) {
        out.push_back(untestable(name, std::string("check could not run: ") + e.what()));
      }
    };
    guarded("positivity", [&] {
      const auto set = minimal_adjustment_set(g, q.sensitive, q.outcome);
      if (!set) {
        return untestable("positivity",
                          "no observed back-door adjustment set exists, so there are no "
                          "covariate strata to examine");
      }
      auto report = check_positivity(*data, q.sensitive, set->nodes, options.min_count);
      std::string covariates;
      for (const auto& n : set->nodes) covariates += (covariates.empty() ? "" : ", ") + n;
      report.explanation += " Covariates: the back-door adjustment set {" + covariates + "}.";
      return report;
    });
    guarded("causal Markov condition", [&] { return check_markov(*data, g, options); });
    guarded("faithfulness", [&] { return check_faithfulness(*data, g, options); });
    guarded("linearity", [&] { return check_linearity(*data, g, options); });
  }
  for (auto& r : untestable_disclosures(g, std::pair{q.sensitive, q.outcome})) {
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

AuditReport run_audit(const AuditConfig& config, const GraphSpec& spec,
                      const std::optional<Dataset>& data) {
  const CausalGraph& g = spec.graph;
  const EffectQuery& q = config.query;
  g.index(q.sensitive);
  g.index(q.outcome);
  if (q.sensitive == q.outcome) throw ConfigError("sensitive attribute and outcome must differ");
  if (config.run_metrics) {
    if (q.a0 == q.a1) throw ConfigError("a0 and a1 must differ");
    check_value(spec, q.sensitive, q.a0);
    check_value(spec, q.sensitive, q.a1);
    if (spec.domains.count(q.outcome)) check_value(spec, q.outcome, q.positive);
    if (config.metrics.empty()) throw ConfigError("no metrics requested");
  }
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(config.min_effect >= 0.0)) throw ConfigError("min-effect must be non-negative");
  if (!(config.confidence > 0.0 && config.confidence < 1.0)) {
    throw ConfigError("confidence level must lie in (0, 1)");
  }
  if (config.bootstrap > 0 && config.bootstrap < kMinBootstrapReplicates) {
    throw ConfigError("--bootstrap needs at least " + std::to_string(kMinBootstrapReplicates) +
                      " replicates (or 0 to skip intervals)");
  }
  if (!(config.laplace_alpha >= 0.0)) throw ConfigError("smoothing must be non-negative");

  AuditReport report;
  report.config = config;
  report.backend = choose_backend(config, spec, data);
  report.graph = g;
  report.domains = spec.domains;
  report.paths = classify_paths(g, q.sensitive, q.outcome, spec.roles);

  if (config.run_checks) {
    report.assumptions = run_checks(config, spec, data);
    for (const auto& c : report.assumptions) {
      if (c.status == CheckStatus::fail) {
        report.warnings.push_back("assumption check failed: " + c.assumption);
      }
    }
  }
  if (!config.run_metrics) return report;

  PathSelection selection = config.pi ? PathSelection{q.sensitive, q.outcome, *config.pi}
                                      : default_selection(report.paths, q);
  validate_selection(g, selection);
  const MetricRunner runner(config, spec, data, report.backend, std::move(selection));

  const bool positivity_failed =
      std::any_of(report.assumptions.begin(), report.assumptions.end(), [](const CheckReport& c) {
        return c.assumption == "positivity" && c.status == CheckStatus::fail;
      });
  for (Metric m : config.metrics) {
    MetricResult r = runner.run(m, report.warnings, report.unidentifiable);
    if (positivity_failed && report.backend == Backend::plugin && m != Metric::tv &&
        r.status == MetricStatus::ok) {
      r.status = MetricStatus::degraded;
      r.notes.push_back("positivity check failed: some covariate strata are sparse or empty");
    }
    report.metrics.push_back(std::move(r));
  }

  if (std::find(config.metrics.begin(), config.metrics.end(), Metric::pse) !=
      config.metrics.end()) {
    for (const auto& cp : report.paths) {
      if (cp.path.kind == PathKind::causal) report.business_necessity.push_back(runner.path_effect(cp));
    }
  }
  return report;
}

int exit_code(const AuditReport& report) { return report.unidentifiable ? 2 : 0; }

}  // namespace causal_audit
