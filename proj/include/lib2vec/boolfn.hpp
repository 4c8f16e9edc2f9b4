#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lib2vec/errors.hpp"

namespace lib2vec {

// Boolean expression AST over library function expressions.
// Supported operators: ! (prefix not), ' (postfix not), * or & (and),
// ^ (xor), + or | (or), parentheses and pin-name leaves.
// Precedence: not > and > xor > or.
struct BoolExpr {
  enum class Kind { Pin, Not, And, Or, Xor, Const };

  Kind kind = Kind::Const;
  std::string pin;             // Kind::Pin
  bool value = false;          // Kind::Const
  std::shared_ptr<const BoolExpr> lhs, rhs;  // rhs unused for Not

  static std::shared_ptr<const BoolExpr> make_pin(std::string name);
  static std::shared_ptr<const BoolExpr> make_const(bool v);
  static std::shared_ptr<const BoolExpr> make_not(std::shared_ptr<const BoolExpr> a);
  static std::shared_ptr<const BoolExpr> make_binary(Kind k,
                                                     std::shared_ptr<const BoolExpr> a,
                                                     std::shared_ptr<const BoolExpr> b);
};

using BoolExprPtr = std::shared_ptr<const BoolExpr>;

// Parses a Liberty function expression. Throws SyntaxError on malformed input.
BoolExprPtr parse_bool_expr(const std::string& text);

// Prints with explicit parentheses on every binary node.
std::string to_string(const BoolExpr& e);

// Collects the sorted set of distinct pin names referenced by the expression.
std::vector<std::string> collect_pins(const BoolExpr& e);

// Evaluates under an assignment; throws MissingPin on an unassigned leaf.
bool eval(const BoolExpr& e, const std::map<std::string, bool>& assignment);

// Bitwise-parallel evaluation: each pin maps to a 64-bit lane word.
std::uint64_t eval_words(const BoolExpr& e,
                         const std::map<std::string, std::uint64_t>& words);

struct TruthTable {
  std::vector<std::string> input_pins;  // canonical lexicographic order
  std::vector<std::uint8_t> bits;       // 2^n entries; index i = binary expansion
                                        // of i over input_pins, pins[0] most significant

  std::size_t num_inputs() const { return input_pins.size(); }
  bool operator==(const TruthTable&) const = default;
};

inline constexpr std::size_t kDefaultMaxTruthTableInputs = 10;

// Enumerates all assignments of the expression's pins (or an explicit pin list).
TruthTable truth_table(const BoolExpr& expr,
                       std::size_t max_inputs = kDefaultMaxTruthTableInputs);
TruthTable truth_table(const BoolExpr& expr,
                       const std::vector<std::string>& input_pins,
                       std::size_t max_inputs = kDefaultMaxTruthTableInputs);

// Ratio of matching outputs over all input combinations; requires identical pins.
double fun_sim(const TruthTable& a, const TruthTable& b);

// True iff the outputs complement on every assignment (fun_sim == 0).
bool is_inverting_pair(const TruthTable& a, const TruthTable& b);

}  // namespace lib2vec
