#include <doctest.h>

#include <cstdint>
#include <stdexcept>

#include "cpr/table.hpp"

using cpr::Table;

TEST_CASE("number cells use shortest round-trip formatting") {
  CHECK(Table::num(0.5) == "0.5");
  CHECK(Table::num(1.0) == "1");
  CHECK(Table::num(2.0) == "2");
  CHECK(Table::num(-3.25) == "-3.25");
  CHECK(Table::num(0.0) == "0");
  CHECK(Table::num(0.1) == "0.1");
  CHECK(Table::num(100.0) == "100");
  CHECK(Table::num(1e300) == "1e+300");
  CHECK(Table::num(1.5e-9) == "1.5e-09");

  CHECK(Table::num(std::uint64_t{0}) == "0");
  CHECK(Table::num(std::uint64_t{42}) == "42");
  CHECK(Table::num(std::uint64_t{18446744073709551615ull}) == "18446744073709551615");

  CHECK(Table::boolean(true) == "1");
  CHECK(Table::boolean(false) == "0");
}

TEST_CASE("csv rendering quotes cells containing separators") {
  Table t({"name", "value"});
  t.add_row({"plain", "1"});
  t.add_row({"a,b", "2"});
  t.add_row({"q\"uote", "3"});
  t.add_row({"line\nbreak", "4"});
  CHECK(t.to_csv() ==
        "name,value\n"
        "plain,1\n"
        "\"a,b\",2\n"
        "\"q\"\"uote\",3\n"
        "\"line\nbreak\",4\n");
}

TEST_CASE("json rendering keeps column order and escapes strings") {
  Table t({"k", "note"});
  t.add_row({"1", "hi"});
  t.add_row({"2", "say \"hi\"\n"});
  CHECK(t.to_json() ==
        "[\n"
        " {\"k\": \"1\", \"note\": \"hi\"},\n"
        " {\"k\": \"2\", \"note\": \"say \\\"hi\\\"\\n\"}\n"
        "]\n");

  Table empty({"a"});
  CHECK(empty.to_json() == "[]\n");

  Table control({"c"});
  control.add_row({std::string("\x01", 1)});
  CHECK(control.to_json() == "[\n {\"c\": \"\\u0001\"}\n]\n");
}

TEST_CASE("gnuplot rendering aligns columns without trailing padding") {
  Table t({"k", "mse"});
  t.add_row({"10", "0.5"});
  t.add_row({"7", "1.25"});
  CHECK(t.to_gnuplot() ==
        "# k  mse\n"
        "  10 0.5\n"
        "  7  1.25\n");
}

TEST_CASE("table rejects malformed construction and access") {
  CHECK_THROWS_AS(Table(std::vector<std::string>{}), std::invalid_argument);

  Table t({"a", "b"});
  CHECK_THROWS_AS(t.add_row({"only one"}), std::invalid_argument);
  CHECK_THROWS_AS(t.cell(0, 0), std::invalid_argument);
  t.add_row({"1", "2"});
  CHECK(t.cell(0, 1) == "2");
  CHECK_THROWS_AS(t.cell(0, 2), std::invalid_argument);
  CHECK_THROWS_AS(t.cell(1, 0), std::invalid_argument);
}
