#include <cstdio>
#include <sstream>

#include "causal_audit/audit.hpp"

namespace causal_audit {

using nlohmann::json;

namespace {

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string_view format_name(OutputFormat f) { return f == OutputFormat::json ? "json" : "markdown"; }

std::string_view backend_choice_name(BackendChoice b) {
  switch (b) {
    case BackendChoice::automatic: return "auto";
    case BackendChoice::exact: return "exact";
    case BackendChoice::plugin: return "plugin";
  }
  return "auto";
}

json config_json(const AuditConfig& c) {
  json metrics = json::array();
  for (Metric m : c.metrics) metrics.push_back(std::string(to_string(m)));
  json pi = nullptr;
  if (c.pi) {
    pi = json::array();
    for (const auto& e : *c.pi) pi.push_back(to_string(e));
  }
  return {
      {"spec", c.spec_path},
      {"data", c.data_path ? json(*c.data_path) : json(nullptr)},
      {"sensitive", {{"name", c.query.sensitive}, {"a0", c.query.a0}, {"a1", c.query.a1}}},
      {"outcome", {{"name", c.query.outcome}, {"positive", c.query.positive}}},
      {"metrics", metrics},
      {"pi", pi},
      {"alpha", c.alpha},
      {"min_effect", c.min_effect},
      {"bootstrap", c.bootstrap},
      {"confidence", c.confidence},
      {"seed", c.seed},
      {"backend", std::string(backend_choice_name(c.backend))},
      {"format", std::string(format_name(c.format))},
      {"smoothing", c.laplace_alpha},
  };
}

json path_json(const ClassifiedPath& cp) {
  return {
      {"path", to_string(cp.path)},
      {"nodes", cp.path.nodes},
      {"kind", std::string(to_string(cp.path.kind))},
      {"label", std::string(to_string(cp.label))},
      {"length", cp.path.length()},
  };
}

json graph_json(const AuditReport& r) {
  json nodes = json::array();
  for (const auto& name : r.graph.nodes()) {
    auto d = r.domains.find(name);
    nodes.push_back({
        {"name", name},
        {"observed", r.graph.observed(name)},
        {"type", d == r.domains.end() ? "numeric" : "categorical"},
        {"domain", d == r.domains.end() ? json(nullptr) : json(d->second)},
    });
  }
  json edges = json::array();
  for (const auto& e : r.graph.edges()) edges.push_back(to_string(e));
  json paths = json::array();
  std::map<std::string, std::size_t> counts{{"causal", 0}, {"backdoor", 0}, {"other", 0}};
  for (const auto& cp : r.paths) {
    paths.push_back(path_json(cp));
    ++counts[std::string(to_string(cp.path.kind))];
  }
  return {{"nodes", nodes}, {"edges", edges}, {"paths", paths}, {"path_counts", counts}};
}

json metric_json(const MetricResult& m) {
  json out = {
      {"metric", std::string(to_string(m.metric))},
      {"equation", std::string(equation_tag(m.metric))},
      {"status", std::string(to_string(m.status))},
      {"value", nullptr},
      {"backend", nullptr},
      {"assumptions", json::array()},
      {"ci", nullptr},
      {"error", nullptr},
      {"notes", m.notes},
  };
  if (m.estimate) {
    out["value"] = m.estimate->value;
    out["backend"] = std::string(to_string(m.estimate->backend));
    out["assumptions"] = m.estimate->assumptions;
    if (const auto& ci = m.estimate->ci) {
      out["ci"] = {{"lower", ci->lower},           {"upper", ci->upper},
                   {"level", ci->level},           {"replicates", ci->replicates},
                   {"degenerate", ci->degenerate}, {"seed", ci->seed}};
    }
  }
  if (m.status == MetricStatus::failed) {
    out["error"] = {{"kind", m.error_kind}, {"message", m.error}};
  }
  return out;
}

json check_json(const CheckReport& c) {
  json violations = json::array();
  for (const auto& v : c.violations) {
    violations.push_back({{"subject", v.subject},
                          {"detail", v.detail},
                          {"statistic", v.statistic},
                          {"p_value", v.p_value}});
  }
  return {
      {"assumption", c.assumption},
      {"status", std::string(to_string(c.status))},
      {"explanation", c.explanation},
      {"violations", violations},
      {"parameters", c.parameters},
      {"skipped", c.skipped},
  };
}

const MetricResult* find_metric(const AuditReport& r, Metric m) {
  for (const auto& res : r.metrics) {
    if (res.metric == m && res.estimate) return &res;
  }
  return nullptr;
}

json placed(const AuditReport& r, std::initializer_list<Metric> metrics) {
  json out = json::array();
  for (Metric m : metrics) {
    if (const MetricResult* res = find_metric(r, m)) {
      out.push_back({{"metric", std::string(to_string(m))},
                     {"equation", std::string(equation_tag(m))},
                     {"value", res->estimate->value},
                     {"status", std::string(to_string(res->status))}});
    }
  }
  return out;
}

const char* kImpactNote =
    "Disparate impact concerns a seemingly neutral policy that disproportionately harms a "
    "protected group. TV measures the raw disparity but would exaggerate the effect by "
    "including non-causal paths; TE and ATE keep only the causal part.";
const char* kTreatmentNote =
    "Disparate treatment follows the but-for causation standard: would the decision have "
    "differed had only the protected attribute changed? NDE isolates that direct channel.";
const char* kNecessityNote =
    "Business necessity lets a decision maker rebut a disparate impact claim path by path. "
    "Paths through explaining variables may be justified; paths through proxy variables are "
    "not. The tool reports magnitudes only and draws no legal conclusion.";

json legal_json(const AuditReport& r) {
  json paths = json::array();
  for (const auto& pe : r.business_necessity) {
    json roles = json::object();
    for (const auto& [node, role] : pe.roles) roles[node] = std::string(to_string(role));
    paths.push_back({
        {"path", to_string(pe.path.path)},
        {"label", std::string(to_string(pe.path.label))},
        {"roles", roles},
        {"pse", nullable(pe.pse)},
        {"equation", "eq6"},
        {"error", pe.error.empty() ? json(nullptr) : json(pe.error)},
    });
  }
  return {
      {"disparate_impact",
       {{"framework", "Disparate Impact"},
        {"metrics", placed(r, {Metric::tv, Metric::te, Metric::ate})},
        {"note", kImpactNote}}},
      {"disparate_treatment",
       {{"framework", "Disparate Treatment (but-for causation)"},
        {"metrics", placed(r, {Metric::nde})},
        {"note", kTreatmentNote}}},
      {"business_necessity",
       {{"framework", "Business Necessity Analysis"},
        {"metrics", placed(r, {Metric::pse})},
        {"paths", paths},
        {"note", kNecessityNote}}},
  };
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string cell(std::string s) {
  for (std::size_t i = 0; (i = s.find('|', i)) != std::string::npos; i += 2) s.replace(i, 1, "\\|");
  return s;
}

}  // namespace

json to_json(const AuditReport& r) {
  json metrics = json::array();
  for (const auto& m : r.metrics) metrics.push_back(metric_json(m));
  json checks = json::array();
  for (const auto& c : r.assumptions) checks.push_back(check_json(c));
  json out = {
      {"schema_version", kReportSchemaVersion},
      {"tool", {{"name", "causal-audit"}, {"version", std::string(tool_version())}}},
      {"config", config_json(r.config)},
      {"backend", std::string(to_string(r.backend))},
      {"graph", graph_json(r)},
      {"metrics", metrics},
      {"assumptions", checks},
      {"legal_mapping", r.config.run_metrics ? legal_json(r) : json(nullptr)},
      {"warnings", r.warnings},
      {"exit_code", exit_code(r)},
  };
  return out;
}

std::string render_json(const AuditReport& report) { return to_json(report).dump(2) + "\n"; }

std::string render_markdown(const AuditReport& r) {
  std::ostringstream out;
  const auto& q = r.config.query;
  out << "# Causal fairness audit\n\n";
  out << "- Tool: causal-audit " << tool_version() << "\n";
  out << "- Spec: `" << r.config.spec_path << "`\n";
  if (r.config.data_path) out << "- Data: `" << *r.config.data_path << "`\n";
  out << "- Sensitive attribute: " << q.sensitive << " (a0=" << q.a0 << ", a1=" << q.a1 << ")\n";
  out << "- Outcome: " << q.outcome << " (positive=" << q.positive << ")\n";
  out << "- Backend: " << to_string(r.backend) << "\n\n";

  out << "## Paths from " << q.sensitive << " to " << q.outcome << "\n\n";
  out << "| Path | Kind | Label |\n|---|---|---|\n";
  for (const auto& cp : r.paths) {
    out << "| " << cell(to_string(cp.path)) << " | " << to_string(cp.path.kind) << " | "
        << to_string(cp.label) << " |\n";
  }
  out << "\n";

  if (r.config.run_metrics) {
    out << "## Metrics\n\n";
    out << "| Metric | Equation | Status | Value | CI | Backend |\n|---|---|---|---|---|---|\n";
    for (const auto& m : r.metrics) {
      std::string value = "n/a";
      std::string ci = "";
      std::string backend = "";
      if (m.estimate) {
        value = fixed(m.estimate->value);
        backend = std::string(to_string(m.estimate->backend));
        if (m.estimate->ci) {
          ci = "[" + fixed(m.estimate->ci->lower) + ", " + fixed(m.estimate->ci->upper) + "]";
        }
      }
      out << "| " << to_string(m.metric) << " | " << equation_tag(m.metric) << " | "
          << to_string(m.status) << " | " << value << " | " << ci << " | " << backend << " |\n";
    }
    out << "\n";
    for (const auto& m : r.metrics) {
      if (!m.error.empty()) out << "- **" << to_string(m.metric) << "**: " << m.error << "\n";
      for (const auto& n : m.notes) out << "- **" << to_string(m.metric) << "**: " << n << "\n";
    }
    out << "\n";
  }

  if (r.config.run_checks) {
    out << "## Assumptions\n\n| Assumption | Status |\n|---|---|\n";
    for (const auto& c : r.assumptions) {
      out << "| " << c.assumption << " | " << to_string(c.status) << " |\n";
    }
    out << "\n";
    for (const auto& c : r.assumptions) {
      out << "### " << c.assumption << "\n\n" << c.explanation << "\n\n";
      for (const auto& v : c.violations) out << "- " << v.subject << ": " << v.detail << "\n";
      if (!c.violations.empty()) out << "\n";
    }
  }

  if (r.config.run_metrics) {
    out << "## Legal framework mapping\n\n";
    auto list = [&](const char* title, const char* note, std::initializer_list<Metric> ms) {
      out << "### " << title << "\n\n" << note << "\n\n";
      for (Metric m : ms) {
        if (const MetricResult* res = find_metric(r, m)) {
          out << "- " << to_string(m) << " (" << equation_tag(m) << "): "
              << fixed(res->estimate->value) << "\n";
        }
      }
      out << "\n";
    };
    list("Disparate Impact", kImpactNote, {Metric::tv, Metric::te, Metric::ate});
    list("Disparate Treatment (but-for causation)", kTreatmentNote, {Metric::nde});
    list("Business Necessity Analysis", kNecessityNote, {Metric::pse});
    if (!r.business_necessity.empty()) {
      out << "| Path | Label | Roles | PSE |\n|---|---|---|---|\n";
      for (const auto& pe : r.business_necessity) {
        std::string roles;
        for (const auto& [node, role] : pe.roles) {
          roles += (roles.empty() ? "" : ", ") + node + "=" + std::string(to_string(role));
        }
        out << "| " << cell(to_string(pe.path.path)) << " | " << to_string(pe.path.label) << " | "
            << roles << " | " << (pe.pse ? fixed(*pe.pse) : "n/a: " + cell(pe.error)) << " |\n";
      }
      out << "\n";
    }
  }

  if (!r.warnings.empty()) {
    out << "## Warnings\n\n";
    for (const auto& w : r.warnings) out << "- " << w << "\n";
  }
  return out.str();
}

}  // namespace causal_audit
