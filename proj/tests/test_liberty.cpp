#include <algorithm>

#include "doctest.h"
#include "lib2vec/liberty.hpp"
#include "support/toy_library.hpp"

using namespace lib2vec;
using testsupport::toy_library;

TEST_CASE("cell type keys via suffix stripping") {
  CHECK(cell_type_of("AND2x2_ASAP7_75t_R") == "AND2");
  CHECK(cell_type_of("INVxp33_ASAP7_75t_SL") == "INV");
  CHECK(cell_type_of("NAND2x1") == "NAND2");
  CHECK(cell_type_of("BUFx12") == "BUF");
  CHECK(cell_type_of("XOR2") == "XOR2");
  TypeRules strip_all{{".*"}};
  CHECK_THROWS_AS(cell_type_of("INVx1", strip_all), NamingError);
}

TEST_CASE("toy library parses fully") {
  Library lib = toy_library();
  CHECK(lib.name == "toy");
  CHECK(lib.cells.size() == 20);
  CHECK(cell_type_groups(lib).size() == 8);

  const Cell& nand = lib.cells.at("NAND2x1");
  CHECK(nand.cell_type == "NAND2");
  CHECK(nand.input_pins == std::vector<std::string>{"A", "B"});
  REQUIRE(nand.single_output());
  CHECK(nand.output_pins[0].name == "Y");
  REQUIRE(nand.output_pins[0].function);
  CHECK(nand.arcs.size() == 2);
  for (const auto& arc : nand.arcs) CHECK(arc.complete());

  TruthTable tt = cell_truth_table(nand);
  CHECK(tt.bits == std::vector<std::uint8_t>{1, 1, 1, 0});
}

TEST_CASE("lut query interpolates bilinearly and clamps") {
  LookupTable2D t;
  t.index1 = {1.0, 2.0};
  t.index2 = {10.0, 20.0};
  t.values = {1.0, 3.0, 5.0, 7.0};
  CHECK(lut_query(t, 1.0, 10.0) == doctest::Approx(1.0));
  CHECK(lut_query(t, 2.0, 20.0) == doctest::Approx(7.0));
  CHECK(lut_query(t, 1.5, 15.0) == doctest::Approx(4.0));
  CHECK(lut_query(t, 1.0, 15.0) == doctest::Approx(2.0));
  // out-of-range clamps to the boundary
  CHECK(lut_query(t, 0.0, 10.0) == doctest::Approx(1.0));
  CHECK(lut_query(t, 3.0, 25.0) == doctest::Approx(7.0));
}

TEST_CASE("single point axes behave as constants") {
  LookupTable2D t;
  t.index1 = {1.0};
  t.index2 = {1.0};
  t.values = {4.2};
  CHECK(lut_query(t, 0.5, 99.0) == doctest::Approx(4.2));
}

TEST_CASE("comments, continuations, and scalar templates") {
  const char* text = R"(
library(mini) { /* block
comment */
  time_unit : "1ns"; // trailing comment
  cell(INVx1) {
    pin(A) { direction : input; }
    pin(Y) {
      direction : output;
      function : "!A";
      timing() {
        related_pin : A;
        cell_rise(scalar) { values("0.5"); }
      }
    }
  }
}
)";
  Library lib = parse_liberty(text);
  const Cell& inv = lib.cells.at("INVx1");
  REQUIRE(inv.arcs.size() == 1);
  const auto& table = inv.arcs[0].tables.at(Property::RiseDelay);
  CHECK(lut_query(table, 1.0, 1.0) == doctest::Approx(0.5));
  CHECK_FALSE(inv.arcs[0].complete());
}

TEST_CASE("function referencing an undeclared pin is rejected") {
  const char* text = R"(
library(bad) {
  cell(ANDx1) {
    pin(A) { direction : input; }
    pin(Y) { direction : output; function : "A*B"; }
  }
}
)";
  CHECK_THROWS_AS(parse_liberty(text), SemanticError);
}

TEST_CASE("duplicate tables keep the first and warn") {
  const char* text = R"(
library(dup) {
  cell(BUFx1) {
    pin(A) { direction : input; }
    pin(Y) {
      direction : output;
      function : "A";
      timing() {
        related_pin : A;
        cell_rise(scalar) { values("1.0"); }
        cell_rise(scalar) { values("9.0"); }
      }
    }
  }
}
)";
  Library lib = parse_liberty(text);
  const auto& table = lib.cells.at("BUFx1").arcs[0].tables.at(Property::RiseDelay);
  CHECK(lut_query(table, 1.0, 1.0) == doctest::Approx(1.0));
  bool warned = std::any_of(lib.warnings.begin(), lib.warnings.end(), [](const std::string& w) {
    return w.find("duplicate") != std::string::npos;
  });
  CHECK(warned);
}

TEST_CASE("sequential cells are kept without a parsed function") {
  const char* text = R"(
library(seq) {
  cell(DFFx1) {
    ff(IQ, IQN) { next_state : "D"; clocked_on : "CLK"; }
    pin(D) { direction : input; }
    pin(CLK) { direction : input; }
    pin(Q) { direction : output; function : "IQ"; }
  }
}
)";
  Library lib = parse_liberty(text);
  const Cell& dff = lib.cells.at("DFFx1");
  CHECK_FALSE(dff.output_pins.at(0).function);
  CHECK(dff.output_pins.at(0).function_text == "IQ");
}

TEST_CASE("syntax errors carry line context") {
  try {
    parse_liberty("library(x) {\n  cell {\n}\n}");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("merging libraries keeps the first duplicate and warns") {
  Library a = toy_library();
  Library b = toy_library();
  std::size_t n = a.cells.size();
  std::vector<Library> libs;
  libs.push_back(std::move(a));
  libs.push_back(std::move(b));
  Library merged = merge_libraries(std::move(libs));
  CHECK(merged.cells.size() == n);
  CHECK(!merged.warnings.empty());
  CHECK_THROWS_AS(merge_libraries({}), EmptyLibrary);
}

TEST_CASE("load-major templates are transposed to slew x load") {
  const char* text = R"(
library(tr) {
  lu_table_template(t2) {
    variable_1 : total_output_net_capacitance;
    variable_2 : input_net_transition;
    index_1("10, 20");
    index_2("1, 2");
  }
  cell(BUFx1) {
    pin(A) { direction : input; }
    pin(Y) {
      direction : output;
      function : "A";
      timing() {
        related_pin : A;
        cell_rise(t2) { values("1, 3", "5, 7"); }
      }
    }
  }
}
)";
  Library lib = parse_liberty(text);
  const auto& table = lib.cells.at("BUFx1").arcs[0].tables.at(Property::RiseDelay);
  CHECK(table.index1 == std::vector<double>{1, 2});
  CHECK(table.index2 == std::vector<double>{10, 20});
  // original rows ran over load: (load=20, slew=1) was 5, (load=10, slew=2) was 3
  CHECK(lut_query(table, 1.0, 20.0) == doctest::Approx(5.0));
  CHECK(lut_query(table, 2.0, 10.0) == doctest::Approx(3.0));
}
