#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>
#include <set>

#include "causal_audit/checks.hpp"
#include "causal_audit/errors.hpp"
#include "count_table.hpp"

namespace causal_audit {

std::string_view to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::untestable: return "untestable";
    case CheckStatus::underpowered: return "underpowered";
  }
  return "untestable";
}

namespace {

void require_columns(const Dataset& data, const CausalGraph& g) {
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (g.observed(v) && !data.has_column(g.name(v))) {
      throw ColumnGraphMismatchError("dataset has no column for observed node '" + g.name(v) +
                                     "'");
    }
  }
}

bool all_observed(const CausalGraph& g, const IndependenceStatement& s) {
  if (!g.observed(s.x) || !g.observed(s.y)) return false;
  return std::all_of(s.given.begin(), s.given.end(),
                     [&](const std::string& z) { return g.observed(z); });
}

std::string describe(const CiTestResult& r) {
  return std::string(to_string(r.family)) + " statistic " + format_double(r.statistic) +
         ", p-value " + format_double(r.p_value) + ", effect " + format_double(r.effect);
}

void settle(CheckReport& report, std::size_t tested) {
  if (!report.violations.empty()) {
    report.status = CheckStatus::fail;
  } else if (tested == 0 && !report.skipped.empty()) {
    report.status = CheckStatus::underpowered;
  } else {
    report.status = CheckStatus::pass;
  }
}

// Runs ci_test, recording statements that cannot be judged as skipped.
std::optional<CiTestResult> try_test(const Dataset& data, const IndependenceStatement& s,
                                     double alpha, CheckReport& report) {
  try {
    auto r = ci_test(data, s.x, s.y, s.given, alpha);
    if (r.underpowered) {
      report.skipped.push_back(to_string(s) + ": a conditioning stratum has fewer than 5 rows");
      return std::nullopt;
    }
    return r;
  } catch (const MixedTypeError&) {
    report.skipped.push_back(to_string(s) + ": mixes categorical and numeric columns");
  } catch (const InsufficientDataError& e) {
    report.skipped.push_back(to_string(s) + ": " + e.what());
  }
  return std::nullopt;
}

}  // namespace

CheckReport check_positivity(const Dataset& data, const std::string& sensitive,
                             const NodeList& covariates, double min_count) {
  CheckReport report;
  report.assumption = "positivity";
  report.explanation =
      "Every covariate stratum should contain each value of the sensitive attribute; strata "
      "where a value is missing or rare make adjusted effects rest on extrapolation.";
  report.parameters["min_count"] = min_count;
  const Column& a = data.column(sensitive);
  for (const auto& c : covariates) data.column(c);
  if (!a.categorical()) throw MixedTypeError("sensitive column '" + sensitive + "' is numeric");
  if (covariates.empty()) {
    report.status = CheckStatus::pass;
    return report;
  }
  NodeList columns = covariates;
  columns.push_back(sensitive);
  detail::CountTable table(data, columns);
  const std::size_t k = covariates.size();
  const std::vector<std::size_t> w_radix(table.radix().begin(), table.radix().begin() + k);
  detail::for_each_config(w_radix, [&](const std::vector<std::uint32_t>& w) {
    auto key = w;
    key.push_back(0);
    double stratum = 0.0;
    std::string missing;
    double smallest = 0.0;
    bool first = true;
    for (std::uint32_t v = 0; v < a.cardinality(); ++v) {
      key[k] = v;
      const double c = table.at(key);
      stratum += c;
      if (c < min_count) {
        missing += (missing.empty() ? "" : ", ") + sensitive + "=" + a.schema.domain[v] + ": " +
                   format_double(c) + " rows";
        smallest = first ? c : std::min(smallest, c);
        first = false;
      }
    }
    if (stratum <= 0.0 || missing.empty()) return;
    std::string subject;
    for (std::size_t j = 0; j < k; ++j) {
      subject += (j ? ", " : "") + covariates[j] + "=" +
                 data.column(covariates[j]).schema.domain[w[j]];
    }
    report.violations.push_back({subject, missing, smallest, 0.0});
  });
  report.status = report.violations.empty() ? CheckStatus::pass : CheckStatus::fail;
  return report;
}

CheckReport check_markov(const Dataset& data, const CausalGraph& g, const CheckOptions& options) {
  require_columns(data, g);
  CheckReport report;
  report.assumption = "causal Markov condition";
  report.explanation =
      "Each variable should be independent of its non-descendants given its parents; every "
      "independence the graph implies is tested against the data.";
  std::vector<CiTestResult> results;
  for (const auto& s : implied_independencies(g)) {
    if (!all_observed(g, s)) {
      report.skipped.push_back(to_string(s) + ": involves unobserved nodes");
      continue;
    }
    if (auto r = try_test(data, s, options.alpha, report)) results.push_back(*r);
  }
  const double corrected = results.empty() ? options.alpha
                                           : options.alpha / static_cast<double>(results.size());
  for (const auto& r : results) {
    if (r.p_value < corrected) {
      report.violations.push_back(
          {to_string(r.statement), "independence rejected: " + describe(r), r.statistic,
           r.p_value});
    }
  }
  report.parameters["alpha"] = options.alpha;
  report.parameters["bonferroni_alpha"] = corrected;
  report.parameters["tests"] = static_cast<double>(results.size());
  settle(report, results.size());
  return report;
}

CheckReport check_faithfulness(const Dataset& data, const CausalGraph& g,
                               const CheckOptions& options) {
  require_columns(data, g);
  CheckReport report;
  report.assumption = "faithfulness";
  report.explanation =
      "Variables the graph connects should be measurably dependent; an apparent independence "
      "suggests paths that cancel each other out.";
  std::size_t tested = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      if (!g.observed(i) || !g.observed(j)) continue;
      const auto& x = g.name(i);
      const auto& y = g.name(j);
      std::set<NodeList> sets{{}};
      for (auto [node, other] : {std::pair{i, j}, std::pair{j, i}}) {
        NodeList z;
        for (std::size_t p : g.parents(node)) {
          if (p != other) z.push_back(g.name(p));
        }
        sets.insert(z);
      }
      for (const auto& z : sets) {
        const IndependenceStatement s{x, y, z};
        if (!all_observed(g, s) || d_separated(g, {x}, {y}, z)) continue;
        auto r = try_test(data, s, options.alpha, report);
        if (!r) continue;
        ++tested;
        if (r->p_value > options.alpha && r->effect < options.min_effect) {
          report.violations.push_back(
              {to_string(s), "graph connects the pair but the data look independent: " +
                                 describe(*r),
               r->statistic, r->p_value});
        }
      }
    }
  }
  report.parameters["alpha"] = options.alpha;
  report.parameters["min_effect"] = options.min_effect;
  report.parameters["tests"] = static_cast<double>(tested);
  settle(report, tested);
  return report;
}

namespace {

struct Fit {
  double rss = 0.0;
  Eigen::Index rank = 0;
};

Fit least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::VectorXd beta = qr.solve(y);
  return {(y - x * beta).squaredNorm(), qr.rank()};
}

std::vector<double> quintile_cuts(const std::vector<double>& values) {
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  for (double p : {0.2, 0.4, 0.6, 0.8}) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    cuts.push_back(sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]));
  }
  return cuts;
}

}  // namespace

CheckReport check_linearity(const Dataset& data, const CausalGraph& g,
                            const CheckOptions& options) {
  require_columns(data, g);
  std::vector<std::size_t> children;
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (!g.observed(v) || data.column(g.name(v)).categorical() || g.parents(v).empty()) continue;
    const auto& ps = g.parents(v);
    if (std::all_of(ps.begin(), ps.end(), [&](std::size_t p) { return g.observed(p); })) {
      children.push_back(v);
    }
  }
  if (children.empty()) {
    throw NoNumericChildError("no numeric variable with observed parents to test for linearity");
  }

  CheckReport report;
  report.assumption = "linearity";
  report.explanation =
      "Numeric variables should be a linear function of their parents plus noise; the linear "
      "fit is compared with per-stratum means of the parents.";
  const std::size_t n = data.rows();
  struct Outcome {
    std::string child;
    double f;
    double p;
    double df1;
    double df2;
  };
  std::vector<Outcome> outcomes;
  for (std::size_t v : children) {
    const auto& child = g.name(v);
    std::vector<Eigen::VectorXd> linear_cols{Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n))};
    std::vector<std::vector<std::uint32_t>> keys(n);
    for (std::size_t p : g.parents(v)) {
      const Column& c = data.column(g.name(p));
      if (c.categorical()) {
        for (std::size_t level = 1; level < c.cardinality(); ++level) {
          Eigen::VectorXd col(static_cast<Eigen::Index>(n));
          for (std::size_t r = 0; r < n; ++r) {
            col[static_cast<Eigen::Index>(r)] = static_cast<std::size_t>(c.codes[r]) == level;
          }
          linear_cols.push_back(std::move(col));
        }
        for (std::size_t r = 0; r < n; ++r) keys[r].push_back(static_cast<std::uint32_t>(c.codes[r]));
      } else {
        linear_cols.push_back(Eigen::Map<const Eigen::VectorXd>(c.values.data(),
                                                                static_cast<Eigen::Index>(n)));
        const auto cuts = quintile_cuts(c.values);
        for (std::size_t r = 0; r < n; ++r) {
          keys[r].push_back(static_cast<std::uint32_t>(
              std::upper_bound(cuts.begin(), cuts.end(), c.values[r]) - cuts.begin()));
        }
      }
    }
    std::map<std::vector<std::uint32_t>, Eigen::Index> strata;
    for (const auto& key : keys) strata.emplace(key, 0);
    Eigen::Index next = 0;
    for (auto& [key, index] : strata) index = next++;

    const auto nr = static_cast<Eigen::Index>(n);
    const auto nl = static_cast<Eigen::Index>(linear_cols.size());
    Eigen::MatrixXd reduced(nr, nl);
    for (Eigen::Index j = 0; j < nl; ++j) reduced.col(j) = linear_cols[static_cast<std::size_t>(j)];
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(nr, nl + next);
    full.leftCols(nl) = reduced;
    for (std::size_t r = 0; r < n; ++r) full(static_cast<Eigen::Index>(r), nl + strata[keys[r]]) = 1.0;
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(data.column(child).values.data(), nr);
    if (data.weighted()) {
      for (std::size_t r = 0; r < n; ++r) {
        const double s = std::sqrt(data.weight(r));
        const auto i = static_cast<Eigen::Index>(r);
        reduced.row(i) *= s;
        full.row(i) *= s;
        y[i] *= s;
      }
    }
    const Fit r = least_squares(reduced, y);
    const Fit f = least_squares(full, y);
    const double df1 = static_cast<double>(f.rank - r.rank);
    const double df2 = data.total_weight() - static_cast<double>(f.rank);
    if (df1 <= 0.0) {
      outcomes.push_back({child, 0.0, 1.0, df1, df2});
      continue;
    }
    if (df2 <= 0.0 || f.rss <= 0.0) {
      report.skipped.push_back(child + ": too few rows for the stratified fit");
      continue;
    }
    const double stat = std::max((r.rss - f.rss) / df1, 0.0) / (f.rss / df2);
    boost::math::fisher_f dist(df1, df2);
    outcomes.push_back({child, stat, boost::math::cdf(boost::math::complement(dist, stat)), df1,
                        df2});
  }
  const double corrected =
      outcomes.empty() ? options.alpha : options.alpha / static_cast<double>(outcomes.size());
  for (const auto& o : outcomes) {
    if (o.p < corrected) {
      report.violations.push_back({o.child,
                                   "lack of fit: F(" + format_double(o.df1) + ", " +
                                       format_double(o.df2) + ") = " + format_double(o.f) +
                                       ", p-value " + format_double(o.p),
                                   o.f, o.p});
    }
  }
  report.parameters["alpha"] = options.alpha;
  report.parameters["bonferroni_alpha"] = corrected;
  report.parameters["tests"] = static_cast<double>(outcomes.size());
  settle(report, outcomes.size());
  return report;
}

std::vector<CheckReport> untestable_disclosures(
    const CausalGraph& g, const std::optional<std::pair<std::string, std::string>>& query) {
  CheckReport sutva;
  sutva.assumption = "SUTVA";
  sutva.explanation =
      "One individual's attributes must not change another individual's outcome, and each "
      "attribute value must denote a single version of the treatment. Observational data "
      "cannot confirm this.";
  CheckReport ignorability;
  ignorability.assumption = "ignorability";
  ignorability.explanation =
      "Potential outcomes must be independent of the sensitive attribute given the observed "
      "covariates. This depends on variables that were never measured and cannot be confirmed "
      "from data.";
  CheckReport sufficiency;
  sufficiency.assumption = "causal sufficiency";
  sufficiency.explanation =
      "No hidden variable may be a common cause of two modelled variables. Latent confounders "
      "leave no trace the data alone can rule out.";

  std::set<std::string> hidden;
  if (query) {
    for (const auto& path : backdoor_paths(g, query->first, query->second)) {
      for (const auto& v : path.interior()) {
        if (!g.observed(v)) hidden.insert(v);
      }
    }
  } else {
    for (const auto& v : g.unobserved_nodes()) {
      if (g.children(g.index(v)).size() >= 2) hidden.insert(v);
    }
  }
  for (const auto& v : hidden) {
    ignorability.violations.push_back(
        {v, "unobserved variable '" + v + "' lies on a confounding path", 0.0, 0.0});
  }
  ignorability.status = hidden.empty() ? CheckStatus::untestable : CheckStatus::fail;
  return {sutva, ignorability, sufficiency};
}

}  // namespace causal_audit
