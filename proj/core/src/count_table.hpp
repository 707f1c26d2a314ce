#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "causal_audit/dataset.hpp"
#include "causal_audit/errors.hpp"
#include "causal_audit/scm.hpp"

namespace causal_audit::detail {

// Weighted contingency table over a set of categorical columns, stored
// densely in mixed radix (first variable slowest).
class CountTable {
 public:
  CountTable(const Dataset& data, const std::vector<std::string>& columns) : names_(columns) {
    std::vector<const Column*> cols;
    for (const auto& name : columns) {
      const Column& c = data.column(name);
      if (!c.categorical()) {
        throw MixedTypeError("column '" + name + "' is numeric; a categorical column is required");
      }
      cols.push_back(&c);
      radix_.push_back(c.cardinality());
    }
    init_strides();
    for (std::size_t r = 0; r < data.rows(); ++r) {
      std::size_t idx = 0;
      for (std::size_t j = 0; j < cols.size(); ++j) {
        idx += static_cast<std::size_t>(cols[j]->codes[r]) * strides_[j];
      }
      counts_[idx] += data.weight(r);
    }
  }

  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<std::size_t>& radix() const noexcept { return radix_; }
  std::size_t cells() const noexcept { return counts_.size(); }
  double cell(std::size_t i) const { return counts_[i]; }

  double at(const std::vector<std::uint32_t>& codes) const {
    std::size_t idx = 0;
    for (std::size_t j = 0; j < codes.size(); ++j) idx += codes[j] * strides_[j];
    return counts_[idx];
  }

  std::vector<std::uint32_t> decode(std::size_t cell) const {
    std::vector<std::uint32_t> codes(radix_.size());
    for (std::size_t j = 0; j < radix_.size(); ++j) {
      codes[j] = static_cast<std::uint32_t>((cell / strides_[j]) % radix_[j]);
    }
    return codes;
  }

  double total() const {
    double t = 0.0;
    for (double c : counts_) t += c;
    return t;
  }

 private:
  void init_strides() {
    strides_.resize(radix_.size());
    std::size_t cells = 1;
    for (std::size_t j = radix_.size(); j-- > 0;) {
      strides_[j] = cells;
      cells *= radix_[j];
      if (cells > kEnumerationBudget) {
        throw BudgetExceededError("contingency table over too many cells");
      }
    }
    counts_.assign(cells, 0.0);
  }

  std::vector<std::string> names_;
  std::vector<std::size_t> radix_;
  std::vector<std::size_t> strides_;
  std::vector<double> counts_;
};

// Iterates every configuration of a mixed-radix counter; first digit slowest.
template <typename Visit>
void for_each_config(const std::vector<std::size_t>& radix, Visit&& visit) {
  std::vector<std::uint32_t> digits(radix.size(), 0);
  for (std::size_t r : radix) {
    if (r == 0) return;
  }
  while (true) {
    visit(digits);
    std::size_t j = radix.size();
    while (j > 0) {
      --j;
      if (++digits[j] < radix[j]) break;
      digits[j] = 0;
      if (j == 0) return;
    }
    if (radix.empty()) return;
  }
}

}  // namespace causal_audit::detail
