#pragma once

#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "causal_audit/checks.hpp"
#include "causal_audit/dataset.hpp"
#include "causal_audit/estimators.hpp"
#include "causal_audit/graph_spec.hpp"

namespace causal_audit {

inline constexpr const char* kReportSchemaVersion = "1.0";

std::string_view tool_version();

enum class OutputFormat { json, markdown };
enum class BackendChoice { automatic, exact, plugin };

struct AuditConfig {
  std::string spec_path;
  std::optional<std::string> data_path;
  EffectQuery query;
  std::vector<Metric> metrics{Metric::tv, Metric::te, Metric::ate,
                              Metric::nde, Metric::nie, Metric::pse};
  std::optional<std::vector<Edge>> pi;
  double alpha = 0.01;
  double min_effect = 0.02;
  std::size_t bootstrap = 0;
  double confidence = 0.95;
  std::uint64_t seed = 1;
  OutputFormat format = OutputFormat::json;
  BackendChoice backend = BackendChoice::automatic;
  double laplace_alpha = 0.0;
  bool run_metrics = true;
  bool run_checks = true;
};

enum class MetricStatus { ok, degraded, failed };
std::string_view to_string(MetricStatus status);

struct MetricResult {
  Metric metric = Metric::tv;
  MetricStatus status = MetricStatus::ok;
  std::optional<EffectEstimate> estimate;
  std::string error_kind;
  std::string error;
  std::vector<std::string> notes;
};

struct PathEffect {
  ClassifiedPath path;
  std::map<std::string, Role> roles;
  std::optional<double> pse;
  std::string error;
};

struct AuditReport {
  AuditConfig config;
  Backend backend = Backend::exact;
  CausalGraph graph;
  std::map<std::string, std::vector<std::string>> domains;
  std::vector<ClassifiedPath> paths;
  std::vector<MetricResult> metrics;
  std::vector<CheckReport> assumptions;
  std::vector<PathEffect> business_necessity;
  std::vector<std::string> warnings;
  // Some requested metric could not be identified from the inputs.
  bool unidentifiable = false;
};

// ConfigError / DomainError / UnknownNodeError for invalid configurations;
// metric and check failures are captured in the report.
AuditReport run_audit(const AuditConfig& config, const GraphSpec& spec,
                      const std::optional<Dataset>& data);

// 0 on success, 2 when a requested metric was not identifiable.
int exit_code(const AuditReport& report);

nlohmann::json to_json(const AuditReport& report);
// Sorted keys, two-space indent, trailing newline.
std::string render_json(const AuditReport& report);
std::string render_markdown(const AuditReport& report);

// Edge list "A>B,B>C".
std::vector<Edge> parse_edge_list(std::string_view text);

}  // namespace causal_audit
