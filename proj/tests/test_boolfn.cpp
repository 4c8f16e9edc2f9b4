#include <random>

#include "doctest.h"
#include "lib2vec/boolfn.hpp"

using namespace lib2vec;

TEST_CASE("expression parsing and printing") {
  CHECK(to_string(*parse_bool_expr("A*B+C")) == "((A * B) + C)");
  CHECK(to_string(*parse_bool_expr("A+B*C")) == "(A + (B * C))");
  CHECK(to_string(*parse_bool_expr("A^B+C")) == "((A ^ B) + C)");
  CHECK(to_string(*parse_bool_expr("!A")) == "!A");
  CHECK(to_string(*parse_bool_expr("A'")) == "!A");
  CHECK(to_string(*parse_bool_expr("(A+B)'")) == "!(A + B)");
  CHECK(to_string(*parse_bool_expr("A B")) == "(A * B)");
  CHECK(to_string(*parse_bool_expr("A(B+C)")) == "(A * (B + C))");
  CHECK(to_string(*parse_bool_expr("A & B | C")) == "((A * B) + C)");
  CHECK(to_string(*parse_bool_expr("1")) == "1");
  CHECK(to_string(*parse_bool_expr("0")) == "0");
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_bool_expr(""), SyntaxError);
  CHECK_THROWS_AS(parse_bool_expr("A+"), SyntaxError);
  CHECK_THROWS_AS(parse_bool_expr("(A"), SyntaxError);
  CHECK_THROWS_AS(parse_bool_expr("A)"), SyntaxError);
}

TEST_CASE("eval honours precedence not > and > xor > or") {
  auto e = parse_bool_expr("!A*B^C+D");
  // parsed as (((!A)*B)^C)+D
  std::map<std::string, bool> a{{"A", false}, {"B", true}, {"C", true}, {"D", false}};
  CHECK(eval(*e, a) == ((((!false) && true) != true) || false));
  a = {{"A", true}, {"B", true}, {"C", false}, {"D", false}};
  CHECK(eval(*e, a) == ((((!true) && true) != false) || false));
}

TEST_CASE("eval throws on unassigned pin") {
  auto e = parse_bool_expr("A*B");
  CHECK_THROWS_AS(eval(*e, {{"A", true}}), MissingPin);
}

TEST_CASE("truth table over canonical pin order") {
  auto tt = truth_table(*parse_bool_expr("!(A*B)"));
  CHECK(tt.input_pins == std::vector<std::string>{"A", "B"});
  CHECK(tt.bits == std::vector<std::uint8_t>{1, 1, 1, 0});

  // pins[0] is the most significant index bit
  auto tt2 = truth_table(*parse_bool_expr("A * !B"));
  CHECK(tt2.bits == std::vector<std::uint8_t>{0, 0, 1, 0});

  // unsorted explicit pin list is canonicalized
  auto tt3 = truth_table(*parse_bool_expr("A"), {"B", "A"});
  CHECK(tt3.input_pins == std::vector<std::string>{"A", "B"});
  CHECK(tt3.bits == std::vector<std::uint8_t>{0, 0, 1, 1});
}

TEST_CASE("truth table input limit") {
  std::string expr = "I0";
  std::vector<std::string> pins{"I0"};
  for (int i = 1; i <= 10; ++i) {
    expr += "+I" + std::to_string(i);
    pins.push_back("I" + std::to_string(i));
  }
  CHECK_THROWS_AS(truth_table(*parse_bool_expr(expr)), TooManyInputs);
  CHECK_NOTHROW(truth_table(*parse_bool_expr(expr), pins, 11));
}

TEST_CASE("fun_sim reference values") {
  auto nand2 = truth_table(*parse_bool_expr("!(A*B)"));
  auto nor2 = truth_table(*parse_bool_expr("!(A+B)"));
  auto xor2 = truth_table(*parse_bool_expr("A^B"));
  auto and2 = truth_table(*parse_bool_expr("A*B"));
  CHECK(fun_sim(nand2, nor2) == doctest::Approx(2.0 / 4.0));
  CHECK(fun_sim(xor2, nor2) == doctest::Approx(1.0 / 4.0));
  CHECK(fun_sim(nand2, nand2) == 1.0);
  CHECK(is_inverting_pair(nand2, and2));
  CHECK_FALSE(is_inverting_pair(nand2, nor2));
}

TEST_CASE("fun_sim requires matching pins") {
  auto a = truth_table(*parse_bool_expr("A*B"));
  auto b = truth_table(*parse_bool_expr("A*C"));
  CHECK_THROWS_AS(fun_sim(a, b), PinMismatch);
}

TEST_CASE("eval_words agrees with scalar eval lane by lane") {
  auto e = parse_bool_expr("(A^B) * !C + A*C");
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 8; ++trial) {
    std::map<std::string, std::uint64_t> words{{"A", rng()}, {"B", rng()}, {"C", rng()}};
    std::uint64_t out = eval_words(*e, words);
    for (int bit = 0; bit < 64; ++bit) {
      std::map<std::string, bool> a;
      for (const auto& [pin, w] : words) a[pin] = (w >> bit) & 1;
      CHECK(((out >> bit) & 1) == static_cast<std::uint64_t>(eval(*e, a)));
    }
  }
}

TEST_CASE("collect_pins is sorted and distinct") {
  auto e = parse_bool_expr("B*A + A*C + B");
  CHECK(collect_pins(*e) == std::vector<std::string>{"A", "B", "C"});
}
