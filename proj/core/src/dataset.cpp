#include <algorithm>
#include <charconv>
#include <map>
#include <numeric>

#include "causal_audit/dataset.hpp"
#include "causal_audit/errors.hpp"

namespace causal_audit {

std::int32_t Column::code_of(std::string_view label) const {
  for (std::size_t i = 0; i < schema.domain.size(); ++i) {
    if (schema.domain[i] == label) return static_cast<std::int32_t>(i);
  }
  throw DomainError("value '" + std::string(label) + "' is not in the domain of column '" +
                    schema.name + "'");
}

void Dataset::add_categorical(ColumnSchema schema, std::vector<std::int32_t> codes) {
  if (has_column(schema.name)) throw SchemaMismatchError("duplicate column '" + schema.name + "'");
  if (!columns_.empty() && codes.size() != rows_) {
    throw SchemaMismatchError("column '" + schema.name + "' has " + std::to_string(codes.size()) +
                              " rows, expected " + std::to_string(rows_));
  }
  const auto k = static_cast<std::int32_t>(schema.domain.size());
  for (std::size_t r = 0; r < codes.size(); ++r) {
    if (codes[r] < 0 || codes[r] >= k) {
      throw DomainError("row " + std::to_string(r + 1) + ", column '" + schema.name +
                        "': code out of domain");
    }
  }
  schema.type = ColumnType::categorical;
  rows_ = codes.size();
  columns_.push_back(Column{std::move(schema), std::move(codes), {}});
}

void Dataset::add_numeric(std::string name, std::vector<double> values) {
  if (has_column(name)) throw SchemaMismatchError("duplicate column '" + name + "'");
  if (!columns_.empty() && values.size() != rows_) {
    throw SchemaMismatchError("column '" + name + "' has " + std::to_string(values.size()) +
                              " rows, expected " + std::to_string(rows_));
  }
  rows_ = values.size();
  columns_.push_back(Column{ColumnSchema{std::move(name), ColumnType::numeric, {}}, {},
                            std::move(values)});
}

double Dataset::total_weight() const {
  if (weights_.empty()) return static_cast<double>(rows_);
  return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

bool Dataset::has_column(std::string_view name) const {
  return std::any_of(columns_.begin(), columns_.end(),
                     [&](const Column& c) { return c.name() == name; });
}

const Column& Dataset::column(std::string_view name) const {
  for (const auto& c : columns_) {
    if (c.name() == name) return c;
  }
  throw UnknownColumnError("no column named '" + std::string(name) + "'");
}

std::vector<std::string> Dataset::column_names() const {
  std::vector<std::string> out;
  for (const auto& c : columns_) out.push_back(c.name());
  return out;
}

void Dataset::set_weights(std::vector<double> weights) {
  if (!weights.empty() && weights.size() != rows_) {
    throw SchemaMismatchError("weight vector length does not match row count");
  }
  weights_ = std::move(weights);
}

Dataset Dataset::take(const std::vector<std::size_t>& rows) const {
  Dataset out;
  for (const auto& c : columns_) {
    Column copy{c.schema, {}, {}};
    if (c.categorical()) {
      copy.codes.reserve(rows.size());
      for (std::size_t r : rows) copy.codes.push_back(c.codes.at(r));
    } else {
      copy.values.reserve(rows.size());
      for (std::size_t r : rows) copy.values.push_back(c.values.at(r));
    }
    out.columns_.push_back(std::move(copy));
  }
  out.rows_ = rows.size();
  if (!weights_.empty()) {
    for (std::size_t r : rows) out.weights_.push_back(weights_[r]);
  }
  return out;
}

Dataset Dataset::filter(std::string_view column_name, std::string_view label) const {
  const Column& c = column(column_name);
  if (!c.categorical()) throw MixedTypeError("cannot filter on numeric column '" + c.name() + "'");
  const std::int32_t code = c.code_of(label);
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < rows_; ++r) {
    if (c.codes[r] == code) keep.push_back(r);
  }
  return take(keep);
}

Dataset Dataset::compress() const {
  std::map<std::vector<std::int32_t>, double> cells;
  for (const auto& c : columns_) {
    if (!c.categorical()) throw MixedTypeError("compress() needs categorical columns only");
  }
  std::vector<std::int32_t> key(columns_.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t j = 0; j < columns_.size(); ++j) key[j] = columns_[j].codes[r];
    cells[key] += weight(r);
  }
  Dataset out;
  for (const auto& c : columns_) out.columns_.push_back(Column{c.schema, {}, {}});
  for (const auto& [cell, w] : cells) {
    for (std::size_t j = 0; j < cell.size(); ++j) out.columns_[j].codes.push_back(cell[j]);
    out.weights_.push_back(w);
  }
  out.rows_ = cells.size();
  return out;
}

std::string format_double(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, end);
}

}  // namespace causal_audit
