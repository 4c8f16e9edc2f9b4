#include "lib2vec/boolfn.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace lib2vec {

BoolExprPtr BoolExpr::make_pin(std::string name) {
  auto e = std::make_shared<BoolExpr>();
  e->kind = Kind::Pin;
  e->pin = std::move(name);
  return e;
}

BoolExprPtr BoolExpr::make_const(bool v) {
  auto e = std::make_shared<BoolExpr>();
  e->kind = Kind::Const;
  e->value = v;
  return e;
}

BoolExprPtr BoolExpr::make_not(BoolExprPtr a) {
  auto e = std::make_shared<BoolExpr>();
  e->kind = Kind::Not;
  e->lhs = std::move(a);
  return e;
}

BoolExprPtr BoolExpr::make_binary(Kind k, BoolExprPtr a, BoolExprPtr b) {
  auto e = std::make_shared<BoolExpr>();
  e->kind = k;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}

namespace {

class ExprParser {
 public:
  explicit ExprParser(const std::string& text) : text_(text) {}

  BoolExprPtr parse() {
    auto e = parse_or();
    skip_ws();
    if (pos_ != text_.size()) throw SyntaxError(1, "end of expression");
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek_is(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool consume(char c) {
    if (peek_is(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  BoolExprPtr parse_or() {
    auto lhs = parse_xor();
    while (consume('+') || consume('|')) lhs = BoolExpr::make_binary(BoolExpr::Kind::Or, lhs, parse_xor());
    return lhs;
  }

  BoolExprPtr parse_xor() {
    auto lhs = parse_and();
    while (consume('^')) lhs = BoolExpr::make_binary(BoolExpr::Kind::Xor, lhs, parse_and());
    return lhs;
  }

  BoolExprPtr parse_and() {
    auto lhs = parse_unary();
    for (;;) {
      if (consume('*') || consume('&')) {
        lhs = BoolExpr::make_binary(BoolExpr::Kind::And, lhs, parse_unary());
        continue;
      }
      // Liberty allows implicit AND by juxtaposition: "A B" or "A(B+C)".
      skip_ws();
      if (pos_ < text_.size() &&
          (text_[pos_] == '(' || text_[pos_] == '!' ||
           std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        lhs = BoolExpr::make_binary(BoolExpr::Kind::And, lhs, parse_unary());
        continue;
      }
      return lhs;
    }
  }

  BoolExprPtr parse_unary() {
    if (consume('!')) return BoolExpr::make_not(parse_unary());
    auto e = parse_atom();
    while (consume('\'')) e = BoolExpr::make_not(e);
    return e;
  }

  BoolExprPtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError(1, "operand");
    if (consume('(')) {
      auto e = parse_or();
      if (!consume(')')) throw SyntaxError(1, "')'");
      while (consume('\'')) e = BoolExpr::make_not(e);
      return e;
    }
    char c = text_[pos_];
    if (c == '0' || c == '1') {
      // A bare constant only if not the start of an identifier.
      if (pos_ + 1 == text_.size() ||
          !(std::isalnum(static_cast<unsigned char>(text_[pos_ + 1])) || text_[pos_ + 1] == '_')) {
        ++pos_;
        return BoolExpr::make_const(c == '1');
      }
    }
    if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_' || std::isdigit(static_cast<unsigned char>(c))))
      throw SyntaxError(1, "operand");
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
            text_[pos_] == '['))
      pos_ += text_[pos_] == '[' ? consume_bracket() : 1;
    return BoolExpr::make_pin(text_.substr(start, pos_ - start));
  }

  std::size_t consume_bracket() {
    std::size_t n = 0;
    while (pos_ + n < text_.size() && text_[pos_ + n] != ']') ++n;
    return n + 1;  // include ']'
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

void collect_pins_rec(const BoolExpr& e, std::set<std::string>& out) {
  switch (e.kind) {
    case BoolExpr::Kind::Pin:
      out.insert(e.pin);
      break;
    case BoolExpr::Kind::Const:
      break;
    case BoolExpr::Kind::Not:
      collect_pins_rec(*e.lhs, out);
      break;
    default:
      collect_pins_rec(*e.lhs, out);
      collect_pins_rec(*e.rhs, out);
  }
}

}  // namespace

BoolExprPtr parse_bool_expr(const std::string& text) { return ExprParser(text).parse(); }

std::string to_string(const BoolExpr& e) {
  switch (e.kind) {
    case BoolExpr::Kind::Pin:
      return e.pin;
    case BoolExpr::Kind::Const:
      return e.value ? "1" : "0";
    case BoolExpr::Kind::Not:
      // binary children already carry their own parentheses
      return "!" + to_string(*e.lhs);
    case BoolExpr::Kind::And:
      return "(" + to_string(*e.lhs) + " * " + to_string(*e.rhs) + ")";
    case BoolExpr::Kind::Or:
      return "(" + to_string(*e.lhs) + " + " + to_string(*e.rhs) + ")";
    case BoolExpr::Kind::Xor:
      return "(" + to_string(*e.lhs) + " ^ " + to_string(*e.rhs) + ")";
  }
  return {};
}

std::vector<std::string> collect_pins(const BoolExpr& e) {
  std::set<std::string> s;
  collect_pins_rec(e, s);
  return {s.begin(), s.end()};
}

bool eval(const BoolExpr& e, const std::map<std::string, bool>& assignment) {
  switch (e.kind) {
    case BoolExpr::Kind::Pin: {
      auto it = assignment.find(e.pin);
      if (it == assignment.end()) throw MissingPin("unassigned pin: " + e.pin);
      return it->second;
    }
    case BoolExpr::Kind::Const:
      return e.value;
    case BoolExpr::Kind::Not:
      return !eval(*e.lhs, assignment);
    case BoolExpr::Kind::And:
      return eval(*e.lhs, assignment) && eval(*e.rhs, assignment);
    case BoolExpr::Kind::Or:
      return eval(*e.lhs, assignment) || eval(*e.rhs, assignment);
    case BoolExpr::Kind::Xor:
      return eval(*e.lhs, assignment) != eval(*e.rhs, assignment);
  }
  return false;
}

std::uint64_t eval_words(const BoolExpr& e, const std::map<std::string, std::uint64_t>& words) {
  switch (e.kind) {
    case BoolExpr::Kind::Pin: {
      auto it = words.find(e.pin);
      if (it == words.end()) throw MissingPin("unassigned pin: " + e.pin);
      return it->second;
    }
    case BoolExpr::Kind::Const:
      return e.value ? ~0ull : 0ull;
    case BoolExpr::Kind::Not:
      return ~eval_words(*e.lhs, words);
    case BoolExpr::Kind::And:
      return eval_words(*e.lhs, words) & eval_words(*e.rhs, words);
    case BoolExpr::Kind::Or:
      return eval_words(*e.lhs, words) | eval_words(*e.rhs, words);
    case BoolExpr::Kind::Xor:
      return eval_words(*e.lhs, words) ^ eval_words(*e.rhs, words);
  }
  return 0;
}

TruthTable truth_table(const BoolExpr& expr, std::size_t max_inputs) {
  return truth_table(expr, collect_pins(expr), max_inputs);
}

TruthTable truth_table(const BoolExpr& expr, const std::vector<std::string>& input_pins,
                       std::size_t max_inputs) {
  std::vector<std::string> pins = input_pins;
  std::sort(pins.begin(), pins.end());
  if (pins.size() > max_inputs)
    throw TooManyInputs("truth table over " + std::to_string(pins.size()) + " inputs exceeds limit " +
                        std::to_string(max_inputs));
  const std::size_t n = pins.size();
  TruthTable tt;
  tt.input_pins = pins;
  tt.bits.resize(std::size_t{1} << n);
  std::map<std::string, bool> assignment;
  for (std::size_t i = 0; i < tt.bits.size(); ++i) {
    for (std::size_t k = 0; k < n; ++k)
      assignment[pins[k]] = (i >> (n - 1 - k)) & 1u;  // pins[0] most significant
    tt.bits[i] = eval(expr, assignment) ? 1 : 0;
  }
  return tt;
}

double fun_sim(const TruthTable& a, const TruthTable& b) {
  if (a.input_pins != b.input_pins)
    throw PinMismatch("fun_sim requires identical input pins");
  std::size_t match = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) match += a.bits[i] == b.bits[i];
  return static_cast<double>(match) / static_cast<double>(a.bits.size());
}

bool is_inverting_pair(const TruthTable& a, const TruthTable& b) {
  return fun_sim(a, b) == 0.0;
}

}  // namespace lib2vec
