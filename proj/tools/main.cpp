#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <unistd.h>

#include "causal_audit/audit.hpp"
#include "causal_audit/errors.hpp"
#include "causal_audit/graph_spec.hpp"
#include "causal_audit/scenarios.hpp"

namespace ca = causal_audit;

namespace {

constexpr const char* kSynopsis =
    "usage:\n"
    "  causal-audit audit    --spec F [--data F] --sensitive A=a0,a1 --outcome Y=y\n"
    "                        [--metrics tv,te,ate,nde,nie,pse] [--pi A>B,B>C] [--alpha X]\n"
    "                        [--bootstrap B] [--seed S] [--format json|markdown] [--out F]\n"
    "  causal-audit effects  (audit options, metrics only)\n"
    "  causal-audit check    --spec F --data F --sensitive A --outcome Y [--alpha X]\n"
    "  causal-audit paths    --spec F --sensitive A --outcome Y\n"
    "  causal-audit generate --scenario NAME|--spec F --n N [--seed S] --out F.csv\n"
    "                        [--emit-spec F]\n";

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename F>
auto in_context(const std::string& context, F&& f) {
  try {
    return f();
  } catch (const ca::Error& e) {
    throw InputError(context + ": " + e.what());
  }
}

struct Options {
  std::string spec;
  std::string data;
  std::string sensitive;
  std::string outcome;
  std::string metrics = "all";
  std::string pi;
  double alpha = 0.01;
  double min_effect = 0.02;
  std::size_t bootstrap = 0;
  double confidence = 0.95;
  std::uint64_t seed = 1;
  std::string format = "json";
  std::string out;
  std::string backend = "auto";
  double smoothing = 0.0;
};

std::pair<std::string, std::string> split_once(const std::string& text, char sep) {
  const auto pos = text.find(sep);
  if (pos == std::string::npos) return {text, ""};
  return {text.substr(0, pos), text.substr(pos + 1)};
}

std::vector<ca::Metric> parse_metrics(const std::string& text) {
  if (text == "all") {
    return {ca::Metric::tv, ca::Metric::te, ca::Metric::ate,
            ca::Metric::nde, ca::Metric::nie, ca::Metric::pse};
  }
  std::vector<ca::Metric> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = std::min(text.find(',', start), text.size());
    const std::string name = text.substr(start, comma - start);
    const auto metric = ca::parse_metric(name);
    if (!metric) {
      throw InputError("unknown metric '" + name + "' (expected tv, te, ate, nde, nie, pse or all)");
    }
    if (std::find(out.begin(), out.end(), *metric) != out.end()) {
      throw InputError("metric '" + name + "' listed twice");
    }
    out.push_back(*metric);
    start = comma + 1;
  }
  return out;
}

ca::AuditConfig make_config(const Options& o) {
  ca::AuditConfig c;
  c.spec_path = o.spec;
  if (!o.data.empty()) c.data_path = o.data;
  auto [a, values] = split_once(o.sensitive, '=');
  auto [a0, a1] = split_once(values, ',');
  auto [y, positive] = split_once(o.outcome, '=');
  c.query = {a, a0, a1, y, positive};
  c.metrics = parse_metrics(o.metrics);
  if (!o.pi.empty()) c.pi = in_context("--pi", [&] { return ca::parse_edge_list(o.pi); });
  c.alpha = o.alpha;
  c.min_effect = o.min_effect;
  c.bootstrap = o.bootstrap;
  c.confidence = o.confidence;
  c.seed = o.seed;
  c.format = o.format == "markdown" ? ca::OutputFormat::markdown : ca::OutputFormat::json;
  c.backend = o.backend == "exact"    ? ca::BackendChoice::exact
              : o.backend == "plugin" ? ca::BackendChoice::plugin
                                      : ca::BackendChoice::automatic;
  c.laplace_alpha = o.smoothing;
  return c;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError("failed writing '" + path + "'");
}

ca::GraphSpec read_spec(const std::string& path) {
  return in_context(path, [&] { return ca::load_graph_spec(path); });
}

std::optional<ca::Dataset> read_data(const std::string& path, const ca::GraphSpec& spec) {
  if (path.empty()) return std::nullopt;
  return in_context(path, [&] { return ca::load_dataset(path, spec.schema()); });
}

int run_report(const Options& o, bool metrics, bool checks) {
  ca::AuditConfig config = make_config(o);
  config.run_metrics = metrics;
  config.run_checks = checks;
  const ca::GraphSpec spec = read_spec(o.spec);
  const auto data = read_data(o.data, spec);
  const ca::AuditReport report =
      in_context("audit", [&] { return ca::run_audit(config, spec, data); });
  emit(config.format == ca::OutputFormat::markdown ? ca::render_markdown(report)
                                                   : ca::render_json(report),
       o.out);
  return ca::exit_code(report);
}

bool use_color() {
  const char* no_color = std::getenv("NO_COLOR");
  if (no_color != nullptr && *no_color != '\0') return false;
  return isatty(fileno(stdout)) != 0;
}

const char* color_of(ca::PathLabel label) {
  switch (label) {
    case ca::PathLabel::direct: return "\033[31m";
    case ca::PathLabel::indirect_proxy: return "\033[33m";
    case ca::PathLabel::indirect_explaining: return "\033[32m";
    case ca::PathLabel::indirect_neutral: return "\033[36m";
    case ca::PathLabel::backdoor: return "\033[35m";
    case ca::PathLabel::non_causal: return "\033[2m";
  }
  return "";
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

int run_paths(const Options& o) {
  const ca::GraphSpec spec = read_spec(o.spec);
  const std::string a = split_once(o.sensitive, '=').first;
  const std::string y = split_once(o.outcome, '=').first;
  const auto paths =
      in_context("paths", [&] { return ca::classify_paths(spec.graph, a, y, spec.roles); });
  std::size_t width = 4;
  for (const auto& cp : paths) width = std::max(width, ca::to_string(cp.path).size() + 2);
  const bool color = use_color();
  std::string text = pad("PATH", width) + pad("KIND", 10) + pad("LABEL", 21) + "ROLES\n";
  for (const auto& cp : paths) {
    std::string roles;
    for (const auto& v : cp.path.interior()) {
      auto it = spec.roles.find(v);
      const ca::Role role = it == spec.roles.end() ? ca::Role::neutral : it->second;
      roles += (roles.empty() ? "" : ", ") + v + "=" + std::string(ca::to_string(role));
    }
    const std::string label = pad(std::string(ca::to_string(cp.label)), 21);
    text += pad(ca::to_string(cp.path), width) + pad(std::string(ca::to_string(cp.path.kind)), 10) +
            (color ? color_of(cp.label) + label + "\033[0m" : label) +
            (roles.empty() ? "-" : roles) + "\n";
  }
  emit(text, o.out);
  return 0;
}

ca::Dataset observed_columns(const ca::Dataset& data, const ca::CausalGraph& g) {
  ca::Dataset out;
  for (std::size_t j = 0; j < data.columns(); ++j) {
    const ca::Column& c = data.column(j);
    if (!g.observed(c.name())) continue;
    if (c.categorical()) {
      out.add_categorical(c.schema, c.codes);
    } else {
      out.add_numeric(c.name(), c.values);
    }
  }
  return out;
}

struct GenerateOptions {
  std::string scenario;
  std::string spec;
  std::size_t n = 0;
  std::uint64_t seed = 1;
  std::string out;
  std::string emit_spec;
  bool selected = false;
  std::vector<std::string> params;
};

int run_generate(const GenerateOptions& o) {
  if (o.scenario.empty() == o.spec.empty()) {
    throw InputError("generate needs exactly one of --scenario and --spec");
  }
  if (o.n == 0) throw InputError("--n must be positive");
  ca::Dataset data;
  std::string spec_text;
  if (!o.scenario.empty()) {
    ca::ScenarioParams params;
    for (const auto& p : o.params) {
      auto [key, value] = split_once(p, '=');
      char* end = nullptr;
      const double v = std::strtod(value.c_str(), &end);
      if (value.empty() || *end != '\0') throw InputError("malformed --param '" + p + "'");
      params[key] = v;
    }
    const ca::Scenario s =
        in_context("scenario " + o.scenario, [&] { return ca::make_scenario(o.scenario, params); });
    data = ca::scenario_sample(s, o.n, o.seed, o.selected);
    spec_text = ca::export_graph_spec(s.scm, s.roles,
                                      {{"scenario", s.name},
                                       {"sensitive", s.query.sensitive},
                                       {"outcome", s.query.outcome}});
  } else {
    if (!o.params.empty()) throw InputError("--param applies to --scenario only");
    if (o.selected) throw InputError("--selected applies to --scenario only");
    const ca::GraphSpec spec = read_spec(o.spec);
    if (spec.discrete) {
      data = ca::sample(*spec.discrete, o.n, o.seed);
    } else if (spec.linear) {
      data = ca::sample(*spec.linear, o.n, o.seed);
    } else {
      throw InputError(o.spec + ": spec defines a graph but no model to sample from");
    }
    data = observed_columns(data, spec.graph);
    spec_text = ca::export_graph_spec(spec);
  }
  emit(ca::to_csv(data), o.out);
  if (!o.emit_spec.empty()) emit(spec_text, o.emit_spec);
  return 0;
}

void add_query_options(CLI::App* cmd, Options& o, bool values) {
  cmd->add_option("--spec", o.spec, "Graph-spec file")->required();
  cmd->add_option("--sensitive", o.sensitive,
                  values ? "Sensitive attribute and values, A=a0,a1" : "Sensitive attribute")
      ->required();
  cmd->add_option("--outcome", o.outcome, values ? "Outcome and positive value, Y=y" : "Outcome")
      ->required();
  cmd->add_option("--out", o.out, "Write output to this file instead of stdout");
}

void add_report_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--alpha", o.alpha, "Significance level for assumption checks");
  cmd->add_option("--min-effect", o.min_effect, "Smallest dependence counted as faithful");
  cmd->add_option("--format", o.format, "Report format")
      ->check(CLI::IsMember({"json", "markdown"}));
}

void add_metric_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--metrics", o.metrics, "Comma-separated metrics or 'all'");
  cmd->add_option("--pi", o.pi, "Edges selected for the path-specific effect, A>B,B>C");
  cmd->add_option("--bootstrap", o.bootstrap, "Bootstrap replicates for plug-in estimates");
  cmd->add_option("--confidence", o.confidence, "Bootstrap confidence level");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--backend", o.backend, "Estimation backend")
      ->check(CLI::IsMember({"auto", "exact", "plugin"}));
  cmd->add_option("--smoothing", o.smoothing, "Add-alpha smoothing of plug-in conditionals");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal fairness auditing toolkit", "causal-audit"};
  app.set_version_flag("--version", std::string(ca::tool_version()));
  app.require_subcommand(1);

  Options audit_opts;
  auto* audit = app.add_subcommand("audit", "Compute metrics and assumption checks");
  add_query_options(audit, audit_opts, true);
  audit->add_option("--data", audit_opts.data, "CSV dataset");
  add_report_options(audit, audit_opts);
  add_metric_options(audit, audit_opts);

  Options effects_opts;
  auto* effects = app.add_subcommand("effects", "Compute metrics only");
  add_query_options(effects, effects_opts, true);
  effects->add_option("--data", effects_opts.data, "CSV dataset");
  add_report_options(effects, effects_opts);
  add_metric_options(effects, effects_opts);

  Options check_opts;
  auto* check = app.add_subcommand("check", "Run assumption checks only");
  add_query_options(check, check_opts, false);
  check->add_option("--data", check_opts.data, "CSV dataset");
  add_report_options(check, check_opts);

  Options paths_opts;
  auto* paths = app.add_subcommand("paths", "Classify paths between attribute and outcome");
  add_query_options(paths, paths_opts, false);

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Sample a dataset from a scenario or spec");
  generate->add_option("--scenario", gen.scenario, "Bundled scenario name");
  generate->add_option("--spec", gen.spec, "Graph-spec file with a full model");
  generate->add_option("--n", gen.n, "Number of rows")->required();
  generate->add_option("--seed", gen.seed, "Random seed");
  generate->add_option("--out", gen.out, "Output CSV file")->required();
  generate->add_option("--emit-spec", gen.emit_spec, "Also write the model as a graph spec");
  generate->add_flag("--selected", gen.selected, "Sample the scenario's selected sub-population");
  generate->add_option("--param", gen.params, "Scenario parameter override, key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "causal-audit: " << e.what() << "\n\n" << kSynopsis;
    return 1;
  }

  try {
    if (audit->parsed()) return run_report(audit_opts, true, true);
    if (effects->parsed()) return run_report(effects_opts, true, false);
    if (check->parsed()) return run_report(check_opts, false, true);
    if (paths->parsed()) return run_paths(paths_opts);
    if (generate->parsed()) return run_generate(gen);
  } catch (const InputError& e) {
    std::cerr << "causal-audit: error: " << e.what() << "\n";
    return 1;
  } catch (const ca::Error& e) {
    std::cerr << "causal-audit: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "causal-audit: error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << kSynopsis;
  return 1;
}
