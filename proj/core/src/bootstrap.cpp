#include <algorithm>
#include <boost/random/binomial_distribution.hpp>
#include <cmath>

#include "causal_audit/errors.hpp"
#include "causal_audit/estimators.hpp"
#include "causal_audit/rng.hpp"

namespace causal_audit {

namespace {

bool all_categorical(const Dataset& data) {
  for (std::size_t j = 0; j < data.columns(); ++j) {
    if (!data.column(j).categorical()) return false;
  }
  return true;
}

// Type-7 sample quantile of sorted values.
double quantile(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

Dataset bootstrap_resample(const Dataset& data, std::uint64_t seed, std::uint64_t replicate) {
  StreamRng rng(seed, replicate);
  if (all_categorical(data)) {
    // Multinomial draw over the distinct rows, one binomial per cell.
    Dataset cells = data.compress();
    auto remaining = static_cast<long long>(std::llround(cells.total_weight()));
    double mass = cells.total_weight();
    std::vector<double> weights(cells.rows(), 0.0);
    for (std::size_t i = 0; i < cells.rows() && remaining > 0; ++i) {
      const double w = cells.weight(i);
      if (i + 1 == cells.rows() || w >= mass) {
        weights[i] = static_cast<double>(remaining);
        break;
      }
      boost::random::binomial_distribution<long long, double> draw(remaining, w / mass);
      const long long k = draw(rng);
      weights[i] = static_cast<double>(k);
      remaining -= k;
      mass -= w;
    }
    cells.set_weights(std::move(weights));
    return cells;
  }
  const std::size_t n = data.rows();
  std::vector<std::size_t> rows(n);
  if (!data.weighted()) {
    for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
    return data.take(rows);
  }
  std::vector<double> cumulative(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) cumulative[i] = acc += data.weight(i);
  rows.resize(static_cast<std::size_t>(std::llround(acc)));
  for (auto& r : rows) {
    const double u = rng.uniform() * acc;
    r = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                 cumulative.begin());
    r = std::min(r, n - 1);
  }
  return data.take(rows);
}

ConfidenceInterval bootstrap_ci(const DatasetMetric& metric, const Dataset& data,
                                std::size_t replicates, double level, std::uint64_t seed,
                                std::optional<double> estimate) {
  if (replicates < kMinBootstrapReplicates) {
    throw ConfigError("bootstrap needs at least " + std::to_string(kMinBootstrapReplicates) +
                      " replicates");
  }
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
  ConfidenceInterval ci;
  ci.level = level;
  ci.replicates = replicates;
  ci.seed = seed;
  std::vector<double> values;
  values.reserve(replicates);
  for (std::size_t b = 0; b < replicates; ++b) {
    const Dataset resample = bootstrap_resample(data, seed, b);
    try {
      values.push_back(metric(resample));
    } catch (const EmptyStratumError&) {
      ++ci.degenerate;
    } catch (const PositivityError&) {
      ++ci.degenerate;
    }
  }
  if (static_cast<double>(ci.degenerate) > 0.2 * static_cast<double>(replicates)) {
    throw TooManyDegenerateReplicatesError(
        std::to_string(ci.degenerate) + " of " + std::to_string(replicates) +
        " bootstrap replicates had an empty stratum or a positivity violation");
  }
  std::sort(values.begin(), values.end());
  const double tail = (1.0 - level) / 2.0;
  ci.lower = quantile(values, tail);
  ci.upper = quantile(values, 1.0 - tail);
  if (estimate) {
    ci.lower = std::min(ci.lower, *estimate);
    ci.upper = std::max(ci.upper, *estimate);
  }
  return ci;
}

}  // namespace causal_audit
