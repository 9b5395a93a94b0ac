#include <cmath>

#include <gtest/gtest.h>

#include "maxfield/io.hpp"

using namespace maxfield;

TEST(Io, DetectsHeaderAndSkipsBlankLines) {
  const CsvTable t = parse_csv("a,b\n1,2\n\n3,4\r\n");
  ASSERT_EQ(t.header.size(), 2u);
  EXPECT_EQ(t.header[0], "a");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0].line, 2u);
  EXPECT_EQ(t.rows[1].line, 4u);
  EXPECT_EQ(t.rows[1].fields[1], "4");
}

TEST(Io, NumericFirstRowIsData) {
  const CsvTable t = parse_csv("1,2\n3,4\n");
  EXPECT_TRUE(t.header.empty());
  EXPECT_EQ(t.rows.size(), 2u);
}

TEST(Io, ParseErrorsCarryLine) {
  EXPECT_DOUBLE_EQ(parse_double("2.5", 3, 0), 2.5);
  EXPECT_EQ(parse_integer("-7", 3, 0), -7);
  try {
    parse_double("abc", 17, 2);
    FAIL() << "expected CsvError";
  } catch (const CsvError& e) {
    EXPECT_EQ(e.line(), 17u);
    EXPECT_NE(std::string(e.what()).find("17"), std::string::npos);
  }
  EXPECT_THROW(parse_integer("1.5", 2, 0), CsvError);
  EXPECT_THROW(parse_double("", 2, 0), CsvError);
}

TEST(Io, FormatRoundTrips) {
  for (double x : {0.1, -1.0 / 3.0, 1e-300, 12345.678, std::exp(1.0)}) {
    EXPECT_EQ(parse_double(format_double(x), 1, 0), x);
  }
  EXPECT_EQ(format_double(2.0), "2");
}
