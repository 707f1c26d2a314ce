#include <gtest/gtest.h>

#include "causal_audit/dataset.hpp"
#include "causal_audit/errors.hpp"
#include "causal_audit/scenarios.hpp"

using namespace causal_audit;

namespace {

std::vector<DeclaredColumn> ay_schema() {
  return {{{"A", ColumnType::categorical, {"0", "1"}}, true},
          {{"Y", ColumnType::categorical, {"no", "yes"}}, true}};
}

}  // namespace

TEST(Csv, ParsesByHeaderName) {
  auto d = parse_csv("Y,A\nyes,1\nno,0\n", ay_schema());
  ASSERT_EQ(d.rows(), 2u);
  EXPECT_EQ(d.column("A").codes, (std::vector<std::int32_t>{1, 0}));
  EXPECT_EQ(d.column("Y").codes, (std::vector<std::int32_t>{1, 0}));
}

TEST(Csv, QuotedFields) {
  std::vector<DeclaredColumn> schema{{{"Name", ColumnType::categorical, {"a,b", "say \"hi\""}}, true}};
  auto d = parse_csv("Name\n\"a,b\"\n\"say \"\"hi\"\"\"\n", schema);
  EXPECT_EQ(d.column("Name").codes, (std::vector<std::int32_t>{0, 1}));
}

TEST(Csv, HeaderOnlyIsEmpty) {
  EXPECT_THROW(parse_csv("A,Y\n", ay_schema()), EmptyFileError);
  EXPECT_THROW(parse_csv("", ay_schema()), EmptyFileError);
}

TEST(Csv, DomainErrorReportsRow) {
  std::string text = "A,Y\n";
  for (int r = 1; r <= 6; ++r) text += "0,no\n";
  text += "2,no\n";
  try {
    parse_csv(text, ay_schema());
    FAIL();
  } catch (const DomainError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("row 7"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'A'"), std::string::npos) << msg;
  }
}

TEST(Csv, SchemaMismatch) {
  EXPECT_THROW(parse_csv("A\n0\n", ay_schema()), SchemaMismatchError);
  EXPECT_THROW(parse_csv("A,Y,Z\n0,no,1\n", ay_schema()), SchemaMismatchError);
  EXPECT_THROW(parse_csv("A,Y\n0\n", ay_schema()), SchemaMismatchError);
}

TEST(Csv, OptionalColumnMayBeAbsent) {
  auto schema = ay_schema();
  schema.push_back({{"Age", ColumnType::categorical, {"0", "1"}}, false});
  auto d = parse_csv("A,Y\n0,no\n", schema);
  EXPECT_FALSE(d.has_column("Age"));
}

TEST(Csv, NumericColumns) {
  std::vector<DeclaredColumn> schema{{{"X", ColumnType::numeric, {}}, true}};
  auto d = parse_csv("X\n1.5\n-2e3\n", schema);
  EXPECT_EQ(d.column("X").values, (std::vector<double>{1.5, -2000.0}));
  EXPECT_THROW(parse_csv("X\nabc\n", schema), DomainError);
}

TEST(Csv, GenerateLoadRoundTrip) {
  auto s = make_scenario("visa");
  auto d = scenario_sample(s, 300, 9);
  std::vector<DeclaredColumn> schema;
  for (std::size_t i = 0; i < d.columns(); ++i) schema.push_back({d.column(i).schema, true});
  const std::string text = to_csv(d);
  auto back = parse_csv(text, schema);
  EXPECT_EQ(to_csv(back), text);
  for (std::size_t i = 0; i < d.columns(); ++i) {
    EXPECT_EQ(back.column(d.column(i).name()).codes, d.column(i).codes);
  }
}

TEST(DatasetOps, FilterTakeCompress) {
  Dataset d;
  d.add_categorical({"A", ColumnType::categorical, {"0", "1"}}, {0, 1, 1, 0, 1});
  d.add_categorical({"Y", ColumnType::categorical, {"0", "1"}}, {0, 1, 0, 0, 1});
  EXPECT_EQ(d.filter("A", "1").rows(), 3u);
  EXPECT_EQ(d.take({4, 4}).column("A").codes, (std::vector<std::int32_t>{1, 1}));
  auto c = d.compress();
  EXPECT_EQ(c.rows(), 3u);
  EXPECT_DOUBLE_EQ(c.total_weight(), 5.0);
  EXPECT_THROW(d.column("Q"), UnknownColumnError);
  EXPECT_THROW(d.filter("A", "7"), DomainError);
}
