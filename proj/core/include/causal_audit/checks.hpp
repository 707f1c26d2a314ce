#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "causal_audit/dataset.hpp"
#include "causal_audit/graph.hpp"

namespace causal_audit {

enum class TestFamily { g_test, fisher_z };
std::string_view to_string(TestFamily family);

struct CiTestResult {
  IndependenceStatement statement;
  TestFamily family = TestFamily::g_test;
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  // G-test: total-variation distance between the joint and its conditional
  // independence factorization. Fisher-z: |partial correlation|.
  double effect = 0.0;
  double sample_size = 0.0;
  // Some non-empty conditioning stratum has fewer than kMinStratumRows rows.
  bool underpowered = false;
  bool rejected = false;
};

inline constexpr double kMinStratumRows = 5.0;

// G-test when X, Y, Z are all categorical, Fisher-z when all numeric.
// Throws MixedTypeError otherwise, InsufficientDataError when Fisher-z has
// no residual degrees of freedom.
CiTestResult ci_test(const Dataset& data, const std::string& x, const std::string& y,
                     const NodeList& given, double alpha = 0.01);

enum class CheckStatus { pass, fail, untestable, underpowered };
std::string_view to_string(CheckStatus status);

struct Violation {
  std::string subject;
  std::string detail;
  double statistic = 0.0;
  double p_value = 0.0;
};

struct CheckReport {
  std::string assumption;
  CheckStatus status = CheckStatus::untestable;
  std::string explanation;
  std::vector<Violation> violations;
  std::map<std::string, double> parameters;
  // Statements skipped as underpowered or mixed-type.
  std::vector<std::string> skipped;
};

struct CheckOptions {
  double alpha = 0.01;
  double min_effect = 0.02;
  double min_count = 5.0;
};

// Fails on every observed covariate stratum where some value of A has fewer
// than min_count rows. An empty covariate list passes.
CheckReport check_positivity(const Dataset& data, const std::string& sensitive,
                             const NodeList& covariates, double min_count = 5.0);

// Tests every independence the graph implies among observed nodes,
// Bonferroni-corrected.
CheckReport check_markov(const Dataset& data, const CausalGraph& g,
                         const CheckOptions& options = {});

// For d-connected pairs under the canonical sets {}, pa(X)\{Y}, pa(Y)\{X}:
// flags pairs that look independent (p > alpha and effect < min_effect).
CheckReport check_faithfulness(const Dataset& data, const CausalGraph& g,
                               const CheckOptions& options = {});

// Lack-of-fit F-test per numeric child with parents: the linear model on the
// parents against the same model augmented with per-stratum means (numeric
// parents binned into quintiles). Throws NoNumericChildError.
CheckReport check_linearity(const Dataset& data, const CausalGraph& g,
                            const CheckOptions& options = {});

// SUTVA, ignorability and causal sufficiency. With a query, ignorability fails
// when unobserved nodes sit on back-door paths; without one, when an
// unobserved node has two or more children.
std::vector<CheckReport> untestable_disclosures(
    const CausalGraph& g,
    const std::optional<std::pair<std::string, std::string>>& query = std::nullopt);

}  // namespace causal_audit
