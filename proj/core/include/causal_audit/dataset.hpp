#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace causal_audit {

enum class ColumnType { categorical, numeric };

struct ColumnSchema {
  std::string name;
  ColumnType type = ColumnType::categorical;
  // Ordered value labels; empty for numeric columns.
  std::vector<std::string> domain;

  bool operator==(const ColumnSchema&) const = default;
};

// One column of a Dataset. Categorical cells are stored as indices into
// `schema.domain`; numeric cells as doubles.
struct Column {
  ColumnSchema schema;
  std::vector<std::int32_t> codes;
  std::vector<double> values;

  const std::string& name() const noexcept { return schema.name; }
  bool categorical() const noexcept { return schema.type == ColumnType::categorical; }
  std::size_t cardinality() const noexcept { return schema.domain.size(); }
  // Index of `label` in the domain; throws DomainError.
  std::int32_t code_of(std::string_view label) const;

  bool operator==(const Column&) const = default;
};

// Rectangular table of observations. Rows may carry integer frequency
// weights (a compressed table); every count-based statistic honors them.
class Dataset {
 public:
  Dataset() = default;

  void add_categorical(ColumnSchema schema, std::vector<std::int32_t> codes);
  void add_numeric(std::string name, std::vector<double> values);

  // Number of stored rows (ignores weights).
  std::size_t rows() const noexcept { return rows_; }
  // Total weight, i.e. the number of observations represented.
  double total_weight() const;
  std::size_t columns() const noexcept { return columns_.size(); }

  bool has_column(std::string_view name) const;
  const Column& column(std::string_view name) const;  // UnknownColumnError
  const Column& column(std::size_t i) const { return columns_.at(i); }
  std::vector<std::string> column_names() const;

  bool weighted() const noexcept { return !weights_.empty(); }
  double weight(std::size_t row) const { return weights_.empty() ? 1.0 : weights_[row]; }
  void set_weights(std::vector<double> weights);

  // Subset of rows in the given order (duplicates allowed).
  Dataset take(const std::vector<std::size_t>& rows) const;
  // Rows where categorical `column` equals `label`.
  Dataset filter(std::string_view column, std::string_view label) const;
  // Collapses identical rows into one weighted row each; categorical-only.
  Dataset compress() const;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<Column> columns_;
  std::vector<double> weights_;
  std::size_t rows_ = 0;
};

// RFC-4180 CSV with a header row. Categorical columns are written by label;
// numeric columns use the shortest round-trip decimal form.
std::string to_csv(const Dataset& data);
void write_csv(const Dataset& data, const std::string& path);

// Parses CSV text against a declared schema. Columns are matched by name;
// schema entries marked optional may be absent. Throws EmptyFileError,
// SchemaMismatchError (names missing / extra columns) and DomainError
// (reports 1-based data row and column).
struct DeclaredColumn {
  ColumnSchema schema;
  bool required = true;
};
Dataset parse_csv(std::string_view text, const std::vector<DeclaredColumn>& schema);
Dataset load_dataset(const std::string& path, const std::vector<DeclaredColumn>& schema);

// Low-level RFC-4180 record splitter, exposed for tests.
std::vector<std::vector<std::string>> split_csv(std::string_view text);

std::string format_double(double value);

}  // namespace causal_audit
