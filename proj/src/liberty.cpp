#include "lib2vec/liberty.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

namespace lib2vec {

const std::vector<Property>& all_properties() {
  static const std::vector<Property> props{
      Property::RiseDelay,          Property::FallDelay,
      Property::RiseTransition,     Property::FallTransition,
      Property::RiseInternalPower,  Property::FallInternalPower,
  };
  return props;
}

std::string property_name(Property p) {
  switch (p) {
    case Property::RiseDelay: return "rise_delay";
    case Property::FallDelay: return "fall_delay";
    case Property::RiseTransition: return "rise_transition";
    case Property::FallTransition: return "fall_transition";
    case Property::RiseInternalPower: return "rise_internal_power";
    case Property::FallInternalPower: return "fall_internal_power";
  }
  return {};
}

std::optional<Property> property_from_name(const std::string& name) {
  for (Property p : all_properties())
    if (property_name(p) == name) return p;
  return std::nullopt;
}

double lut_query(const LookupTable2D& table, double slew, double load) {
  auto segment = [](const std::vector<double>& axis, double x) {
    // Clamp to the boundary interval; never extrapolate.
    if (axis.size() == 1) return std::pair<std::size_t, double>{0, 0.0};
    std::size_t i = 0;
    while (i + 2 < axis.size() && x >= axis[i + 1]) ++i;
    double t = (x - axis[i]) / (axis[i + 1] - axis[i]);
    t = std::clamp(t, 0.0, 1.0);
    return std::pair<std::size_t, double>{i, t};
  };
  auto [i, u] = segment(table.index1, slew);
  auto [j, v] = segment(table.index2, load);
  std::size_t i2 = table.index1.size() == 1 ? i : i + 1;
  std::size_t j2 = table.index2.size() == 1 ? j : j + 1;
  double a = table.at(i, j), b = table.at(i, j2);
  double c = table.at(i2, j), d = table.at(i2, j2);
  return (1 - u) * ((1 - v) * a + v * b) + u * ((1 - v) * c + v * d);
}

std::string cell_type_of(const std::string& name, const TypeRules& rules) {
  std::string key = name;
  for (const auto& pat : rules.strip_patterns)
    key = std::regex_replace(key, std::regex(pat), "");
  if (key.empty()) throw NamingError("cell name '" + name + "' strips to an empty type key");
  return key;
}

const TimingArcTables* Cell::find_arc(const std::string& out, const std::string& related) const {
  for (const auto& a : arcs)
    if (a.output_pin == out && a.related_pin == related) return &a;
  return nullptr;
}

namespace {

// ---------------------------------------------------------------------------
// Generic Liberty syntax: group(args) { attr : value; complex(args); group... }
// ---------------------------------------------------------------------------

enum class TokKind { Ident, String, Punct, Eof };

struct Token {
  TokKind kind = TokKind::Eof;
  std::string text;
  int line = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  Token next() {
    skip_trivia();
    Token t;
    t.line = line_;
    if (pos_ >= src_.size()) return t;
    char c = src_[pos_];
    if (c == '(' || c == ')' || c == '{' || c == '}' || c == ':' || c == ';' || c == ',') {
      t.kind = TokKind::Punct;
      t.text = std::string(1, c);
      ++pos_;
      return t;
    }
    if (c == '"') {
      t.kind = TokKind::String;
      ++pos_;
      while (pos_ < src_.size() && src_[pos_] != '"') {
        if (src_[pos_] == '\\' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') {
          pos_ += 2;  // line continuation inside a string
          ++line_;
          continue;
        }
        if (src_[pos_] == '\n') ++line_;
        t.text += src_[pos_++];
      }
      if (pos_ >= src_.size()) throw SyntaxError(t.line, "closing '\"'");
      ++pos_;
      return t;
    }
    t.kind = TokKind::Ident;
    while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_])) &&
           std::string("(){}:;,\"").find(src_[pos_]) == std::string::npos)
      t.text += src_[pos_++];
    if (t.text.empty()) throw SyntaxError(line_, "token");
    return t;
  }

 private:
  void skip_trivia() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
        if (src_[pos_] == '\n') ++line_;
        ++pos_;
      }
      if (pos_ + 1 < src_.size() && src_[pos_] == '/' && src_[pos_ + 1] == '*') {
        pos_ += 2;
        while (pos_ + 1 < src_.size() && !(src_[pos_] == '*' && src_[pos_ + 1] == '/')) {
          if (src_[pos_] == '\n') ++line_;
          ++pos_;
        }
        pos_ = std::min(pos_ + 2, src_.size());
        continue;
      }
      if (pos_ + 1 < src_.size() && src_[pos_] == '/' && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        continue;
      }
      if (pos_ < src_.size() && src_[pos_] == '\\' && pos_ + 1 < src_.size() &&
          (src_[pos_ + 1] == '\n' || src_[pos_ + 1] == '\r')) {
        pos_ += 2;
        ++line_;
        continue;
      }
      return;
    }
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

struct GroupNode {
  std::string name;
  std::vector<std::string> args;
  int line = 0;
  std::vector<std::pair<std::string, std::string>> attrs;                 // simple attributes
  std::vector<std::pair<std::string, std::vector<std::string>>> complex;  // complex attributes
  std::vector<GroupNode> groups;

  const std::string* attr(const std::string& key) const {
    for (const auto& [k, v] : attrs)
      if (k == key) return &v;
    return nullptr;
  }
};

class GroupParser {
 public:
  explicit GroupParser(const std::string& src) : lex_(src) { advance(); }

  GroupNode parse_top() {
    GroupNode g = parse_group();
    if (cur_.kind != TokKind::Eof) throw SyntaxError(cur_.line, "end of file");
    return g;
  }

 private:
  void advance() { cur_ = lex_.next(); }

  void expect_punct(const char* p) {
    if (cur_.kind != TokKind::Punct || cur_.text != p) throw SyntaxError(cur_.line, std::string("'") + p + "'");
    advance();
  }

  GroupNode parse_group() {
    if (cur_.kind != TokKind::Ident) throw SyntaxError(cur_.line, "group name");
    GroupNode g;
    g.name = cur_.text;
    g.line = cur_.line;
    advance();
    expect_punct("(");
    while (!(cur_.kind == TokKind::Punct && cur_.text == ")")) {
      if (cur_.kind == TokKind::Punct && cur_.text == ",") {
        advance();
        continue;
      }
      if (cur_.kind != TokKind::Ident && cur_.kind != TokKind::String)
        throw SyntaxError(cur_.line, "group argument");
      g.args.push_back(cur_.text);
      advance();
    }
    advance();  // ')'
    expect_punct("{");
    while (!(cur_.kind == TokKind::Punct && cur_.text == "}")) {
      parse_statement(g);
    }
    advance();  // '}'
    return g;
  }

  void parse_statement(GroupNode& g) {
    if (cur_.kind != TokKind::Ident) throw SyntaxError(cur_.line, "statement");
    std::string name = cur_.text;
    int line = cur_.line;
    advance();
    if (cur_.kind == TokKind::Punct && cur_.text == ":") {
      advance();
      std::string value;
      // Values may be multi-token up to ';' (e.g. "1.5 ;", unquoted units).
      bool first = true;
      while (!(cur_.kind == TokKind::Punct && (cur_.text == ";" || cur_.text == "}"))) {
        if (cur_.kind == TokKind::Eof) throw SyntaxError(line, "';'");
        if (!first) value += " ";
        value += cur_.text;
        first = false;
        advance();
      }
      if (cur_.text == ";") advance();
      g.attrs.emplace_back(std::move(name), std::move(value));
      return;
    }
    if (cur_.kind == TokKind::Punct && cur_.text == "(") {
      advance();
      std::vector<std::string> args;
      while (!(cur_.kind == TokKind::Punct && cur_.text == ")")) {
        if (cur_.kind == TokKind::Punct && cur_.text == ",") {
          advance();
          continue;
        }
        if (cur_.kind == TokKind::Eof) throw SyntaxError(line, "')'");
        args.push_back(cur_.text);
        advance();
      }
      advance();  // ')'
      if (cur_.kind == TokKind::Punct && cur_.text == "{") {
        GroupNode sub;
        sub.name = std::move(name);
        sub.args = std::move(args);
        sub.line = line;
        advance();
        while (!(cur_.kind == TokKind::Punct && cur_.text == "}")) parse_statement(sub);
        advance();
        g.groups.push_back(std::move(sub));
        return;
      }
      if (cur_.kind == TokKind::Punct && cur_.text == ";") advance();
      g.complex.emplace_back(std::move(name), std::move(args));
      return;
    }
    throw SyntaxError(line, "':' or '('");
  }

  Lexer lex_;
  Token cur_;
};

// ---------------------------------------------------------------------------
// Semantic pass
// ---------------------------------------------------------------------------

std::vector<double> parse_number_list(const std::vector<std::string>& args, int line) {
  std::vector<double> out;
  for (const auto& arg : args) {
    std::stringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const char* begin = item.c_str();
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) continue;  // whitespace-only fragment
      out.push_back(v);
    }
  }
  if (out.empty()) throw SyntaxError(line, "numeric list");
  return out;
}

struct TemplateDef {
  std::vector<double> index1, index2;
  bool var1_is_load = false;  // variable_1 == total_output_net_capacitance
};

class LibraryBuilder {
 public:
  explicit LibraryBuilder(const TypeRules& rules) : rules_(rules) {}

  Library build(const GroupNode& top) {
    if (top.name != "library") throw SemanticError("top-level group must be 'library'");
    Library lib;
    lib.name = top.args.empty() ? "" : top.args[0];
    if (const auto* u = top.attr("time_unit")) lib.time_unit = *u;
    if (const auto* u = top.attr("capacitive_load_unit")) lib.load_unit = *u;
    for (const auto& [k, v] : top.complex)
      if (k == "capacitive_load_unit") {
        std::string joined;
        for (const auto& a : v) joined += (joined.empty() ? "" : " ") + a;
        lib.load_unit = joined;
      }
    if (const auto* u = top.attr("slew_derate_from_library")) lib.slew_unit = *u;
    if (lib.slew_unit.empty()) lib.slew_unit = lib.time_unit;

    for (const auto& g : top.groups) {
      if (g.name == "lu_table_template" || g.name == "power_lut_template") {
        add_template(g);
      } else if (g.name == "cell") {
        add_cell(g, lib);
      } else {
        lib.warnings.push_back("skipped library group '" + g.name + "'");
      }
    }
    lib.warnings.insert(lib.warnings.end(), warnings_.begin(), warnings_.end());
    return lib;
  }

 private:
  void add_template(const GroupNode& g) {
    if (g.args.empty()) throw SemanticError("lu_table_template without a name");
    TemplateDef def;
    const std::string* v1 = g.attr("variable_1");
    def.var1_is_load = v1 && *v1 == "total_output_net_capacitance";
    for (const auto& [k, args] : g.complex) {
      if (k == "index_1") def.index1 = parse_number_list(args, g.line);
      if (k == "index_2") def.index2 = parse_number_list(args, g.line);
    }
    templates_[g.args[0]] = std::move(def);
  }

  LookupTable2D read_table(const GroupNode& g) {
    if (g.args.empty()) throw SemanticError("table group '" + g.name + "' missing template name");
    auto it = templates_.find(g.args[0]);
    if (it == templates_.end() && g.args[0] != "scalar")
      throw SemanticError("table references unknown template '" + g.args[0] + "'");
    LookupTable2D t;
    bool transpose = false;
    if (it != templates_.end()) {
      t.index1 = it->second.index1;
      t.index2 = it->second.index2;
      transpose = it->second.var1_is_load;
    }
    std::vector<double> flat;
    std::size_t nrows = 0;
    for (const auto& [k, args] : g.complex) {
      if (k == "index_1") t.index1 = parse_number_list(args, g.line);
      if (k == "index_2") t.index2 = parse_number_list(args, g.line);
      if (k == "values") {
        nrows = args.size();
        flat = parse_number_list(args, g.line);
      }
    }
    if (g.args[0] == "scalar" && t.index1.empty()) {
      t.index1 = {1.0};
      t.index2 = {1.0};
    }
    if (t.index1.empty() || t.index2.empty())
      throw SemanticError("table '" + g.name + "' has unresolved indices");
    if (transpose) std::swap(t.index1, t.index2);
    if (flat.size() != t.index1.size() * t.index2.size())
      throw SemanticError("table '" + g.name + "' values shape mismatch");
    if (transpose && nrows > 1) {
      // values were given row-major over (load, slew); re-layout to (slew, load)
      LookupTable2D src = t;
      std::size_t r = t.index2.size(), c = t.index1.size();
      t.values.resize(flat.size());
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) t.values[j * r + i] = flat[i * c + j];
    } else {
      t.values = std::move(flat);
    }
    for (const auto& axis : {t.index1, t.index2})
      for (std::size_t i = 1; i < axis.size(); ++i)
        if (!(axis[i] > axis[i - 1]))
          throw SemanticError("table '" + g.name + "' breakpoints not strictly ascending");
    for (double v : t.values)
      if (!std::isfinite(v)) throw SemanticError("table '" + g.name + "' has non-finite values");
    return t;
  }

  void add_cell(const GroupNode& g, Library& lib) {
    if (g.args.empty()) throw SemanticError("cell without a name");
    Cell cell;
    cell.name = g.args[0];
    cell.cell_type = cell_type_of(cell.name, rules_);

    std::map<std::pair<std::string, std::string>, std::map<Property, LookupTable2D>> arc_tables;
    bool sequential = false;
    for (const auto& sub : g.groups)
      if (sub.name == "ff" || sub.name == "latch") sequential = true;
    if (sequential)
      warnings_.push_back("cell '" + cell.name + "' is sequential; kept without functional data");

    for (const auto& pin_g : g.groups) {
      if (pin_g.name != "pin") {
        if (pin_g.name != "ff" && pin_g.name != "latch")
          warnings_.push_back("skipped cell group '" + pin_g.name + "' in " + cell.name);
        continue;
      }
      if (pin_g.args.empty()) throw SemanticError("pin without a name in cell " + cell.name);
      const std::string pin_name = pin_g.args[0];
      const std::string* dir = pin_g.attr("direction");
      if (dir && *dir == "input") {
        cell.input_pins.push_back(pin_name);
        if (const auto* cap = pin_g.attr("capacitance"))
          cell.input_capacitance[pin_name] = std::strtod(cap->c_str(), nullptr);
        continue;
      }
      if (!dir || *dir != "output") {
        warnings_.push_back("skipped pin '" + pin_name + "' with direction '" +
                            (dir ? *dir : "?") + "' in " + cell.name);
        continue;
      }
      OutputPin out;
      out.name = pin_name;
      if (const auto* fn = pin_g.attr("function")) {
        out.function_text = *fn;
        if (!sequential) out.function = parse_bool_expr(*fn);
      }
      cell.output_pins.push_back(out);

      for (const auto& tg : pin_g.groups) {
        if (tg.name == "timing") {
          const std::string* rel = tg.attr("related_pin");
          if (!rel) {
            warnings_.push_back("timing group without related_pin in " + cell.name);
            continue;
          }
          auto& slot = arc_tables[{pin_name, *rel}];
          for (const auto& table_g : tg.groups) {
            Property p;
            if (table_g.name == "cell_rise") p = Property::RiseDelay;
            else if (table_g.name == "cell_fall") p = Property::FallDelay;
            else if (table_g.name == "rise_transition") p = Property::RiseTransition;
            else if (table_g.name == "fall_transition") p = Property::FallTransition;
            else continue;
            if (slot.count(p)) {
              warnings_.push_back("duplicate " + property_name(p) + " for arc (" + cell.name +
                                  "," + pin_name + "," + *rel + "); keeping the first");
              continue;
            }
            slot[p] = read_table(table_g);
          }
        } else if (tg.name == "internal_power") {
          const std::string* rel = tg.attr("related_pin");
          if (!rel) {
            warnings_.push_back("internal_power group without related_pin in " + cell.name);
            continue;
          }
          auto& slot = arc_tables[{pin_name, *rel}];
          for (const auto& table_g : tg.groups) {
            Property p;
            if (table_g.name == "rise_power") p = Property::RiseInternalPower;
            else if (table_g.name == "fall_power") p = Property::FallInternalPower;
            else continue;
            if (slot.count(p)) {
              warnings_.push_back("duplicate " + property_name(p) + " for arc (" + cell.name +
                                  "," + pin_name + "," + *rel + "); keeping the first");
              continue;
            }
            slot[p] = read_table(table_g);
          }
        }
      }
    }

    // Function expressions may only reference declared input pins.
    for (const auto& out : cell.output_pins) {
      if (!out.function) continue;
      for (const auto& p : collect_pins(*out.function)) {
        if (std::find(cell.input_pins.begin(), cell.input_pins.end(), p) == cell.input_pins.end())
          throw SemanticError("function of " + cell.name + "/" + out.name +
                              " references undeclared pin '" + p + "'");
      }
    }

    for (auto& [key, tables] : arc_tables) {
      TimingArcTables arc;
      arc.output_pin = key.first;
      arc.related_pin = key.second;
      arc.tables = std::move(tables);
      if (!arc.complete())
        warnings_.push_back("arc (" + cell.name + "," + arc.output_pin + "," + arc.related_pin +
                            ") is missing tables; excluded from electrical datasets");
      cell.arcs.push_back(std::move(arc));
    }

    if (lib.cells.count(cell.name)) throw SemanticError("duplicate cell '" + cell.name + "'");
    lib.cells.emplace(cell.name, std::move(cell));
  }

  const TypeRules& rules_;
  std::map<std::string, TemplateDef> templates_;
  std::vector<std::string> warnings_;
};

}  // namespace

Library parse_liberty(const std::string& text, const TypeRules& rules) {
  GroupParser parser(text);
  GroupNode top = parser.parse_top();
  return LibraryBuilder(rules).build(top);
}

Library parse_liberty_file(const std::string& path, const TypeRules& rules) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_liberty(ss.str(), rules);
}

Library merge_libraries(std::vector<Library> libs) {
  if (libs.empty()) throw EmptyLibrary("no libraries to merge");
  Library out = std::move(libs.front());
  for (std::size_t i = 1; i < libs.size(); ++i) {
    for (auto& [name, cell] : libs[i].cells) {
      if (out.cells.count(name)) {
        out.warnings.push_back("duplicate cell '" + name + "' across files; keeping the first");
        continue;
      }
      out.cells.emplace(name, std::move(cell));
    }
    out.warnings.insert(out.warnings.end(), libs[i].warnings.begin(), libs[i].warnings.end());
  }
  return out;
}

std::vector<CellTypeGroup> cell_type_groups(const Library& lib) {
  std::map<std::string, std::vector<std::string>> by_type;
  for (const auto& [name, cell] : lib.cells) by_type[cell.cell_type].push_back(name);
  std::vector<CellTypeGroup> out;
  for (auto& [type, cells] : by_type) out.push_back({type, std::move(cells)});
  return out;
}

TruthTable cell_truth_table(const Cell& cell, std::size_t max_inputs) {
  if (cell.output_pins.size() != 1)
    throw MultiOutput("cell '" + cell.name + "' has " + std::to_string(cell.output_pins.size()) +
                      " output pins");
  if (!cell.output_pins[0].function)
    throw SemanticError("cell '" + cell.name + "' has no function expression");
  return truth_table(*cell.output_pins[0].function, cell.input_pins, max_inputs);
}

}  // namespace lib2vec
