#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "causal_audit/dataset.hpp"
#include "causal_audit/errors.hpp"

namespace causal_audit {

namespace {

bool needs_quoting(std::string_view field) {
  return field.find_first_of(",\"\r\n") != std::string_view::npos;
}

void append_field(std::string& out, std::string_view field) {
  if (!needs_quoting(field)) {
    out += field;
    return;
  }
  out += '"';
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

std::vector<std::vector<std::string>> split_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // A lone empty field is a blank line, not a record.
    if (!(record.size() == 1 && record.front().empty())) records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) {
          throw SchemaMismatchError("line " + std::to_string(line) +
                                    ": quote inside an unquoted field");
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        ++line;
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (in_quotes) throw SchemaMismatchError("unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

std::string to_csv(const Dataset& data) {
  std::string out;
  const std::size_t k = data.columns();
  for (std::size_t j = 0; j < k; ++j) {
    if (j > 0) out += ',';
    append_field(out, data.column(j).name());
  }
  out += "\r\n";
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t j = 0; j < k; ++j) {
      if (j > 0) out += ',';
      const Column& c = data.column(j);
      if (c.categorical()) {
        append_field(out, c.schema.domain[static_cast<std::size_t>(c.codes[r])]);
      } else {
        out += format_double(c.values[r]);
      }
    }
    out += "\r\n";
  }
  return out;
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << to_csv(data);
}

Dataset parse_csv(std::string_view text, const std::vector<DeclaredColumn>& schema) {
  auto records = split_csv(text);
  if (records.empty()) throw EmptyFileError("CSV input is empty (a header row is required)");
  if (records.size() == 1) throw EmptyFileError("CSV input has a header but no data rows");

  const auto& header = records.front();
  std::vector<std::string> missing;
  std::vector<std::string> extra;
  std::set<std::string> seen;
  for (const auto& name : header) {
    if (!seen.insert(name).second) throw SchemaMismatchError("duplicate column '" + name + "'");
    const bool declared = std::any_of(schema.begin(), schema.end(),
                                      [&](const DeclaredColumn& d) { return d.schema.name == name; });
    if (!declared) extra.push_back(name);
  }
  for (const auto& d : schema) {
    if (d.required && !seen.contains(d.schema.name)) missing.push_back(d.schema.name);
  }
  if (!missing.empty() || !extra.empty()) {
    std::string message = "CSV columns do not match the declared schema";
    auto list = [](const std::vector<std::string>& names) {
      std::string s;
      for (std::size_t i = 0; i < names.size(); ++i) s += (i ? ", " : "") + names[i];
      return s;
    };
    if (!missing.empty()) message += "; missing: " + list(missing);
    if (!extra.empty()) message += "; extra: " + list(extra);
    throw SchemaMismatchError(message);
  }

  const std::size_t n = records.size() - 1;
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != header.size()) {
      throw SchemaMismatchError("row " + std::to_string(r) + " has " +
                                std::to_string(records[r].size()) + " fields, expected " +
                                std::to_string(header.size()));
    }
  }

  Dataset data;
  for (const auto& d : schema) {
    auto it = std::find(header.begin(), header.end(), d.schema.name);
    if (it == header.end()) continue;
    const auto j = static_cast<std::size_t>(it - header.begin());
    if (d.schema.type == ColumnType::categorical) {
      Column probe{d.schema, {}, {}};
      std::vector<std::int32_t> codes(n);
      for (std::size_t r = 0; r < n; ++r) {
        const auto& cell = records[r + 1][j];
        try {
          codes[r] = probe.code_of(cell);
        } catch (const DomainError&) {
          throw DomainError("row " + std::to_string(r + 1) + ", column '" + d.schema.name +
                            "': value '" + cell + "' is outside the declared domain");
        }
      }
      data.add_categorical(d.schema, std::move(codes));
    } else {
      std::vector<double> values(n);
      for (std::size_t r = 0; r < n; ++r) {
        const auto& cell = records[r + 1][j];
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
          throw DomainError("row " + std::to_string(r + 1) + ", column '" + d.schema.name +
                            "': '" + cell + "' is not a decimal number");
        }
        values[r] = v;
      }
      data.add_numeric(d.schema.name, std::move(values));
    }
  }
  return data;
}

Dataset load_dataset(const std::string& path, const std::vector<DeclaredColumn>& schema) {
  return parse_csv(read_file(path), schema);
}

}  // namespace causal_audit
