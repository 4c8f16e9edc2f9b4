#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lib2vec/boolfn.hpp"
#include "lib2vec/errors.hpp"

namespace lib2vec {

enum class Property {
  RiseDelay,
  FallDelay,
  RiseTransition,
  FallTransition,
  RiseInternalPower,
  FallInternalPower,
};

inline constexpr int kNumProperties = 6;

const std::vector<Property>& all_properties();
std::string property_name(Property p);
std::optional<Property> property_from_name(const std::string& name);

// 2-D NLDM table indexed by input slew (index1) and output load (index2).
struct LookupTable2D {
  std::vector<double> index1;  // strictly ascending
  std::vector<double> index2;  // strictly ascending
  std::vector<double> values;  // row-major, |index1| x |index2|

  double at(std::size_t i, std::size_t j) const { return values[i * index2.size() + j]; }
  bool operator==(const LookupTable2D&) const = default;
};

// Bilinear interpolation; out-of-range queries clamp to the boundary interval.
double lut_query(const LookupTable2D& table, double slew, double load);

struct TimingArcTables {
  std::string output_pin;
  std::string related_pin;
  std::map<Property, LookupTable2D> tables;

  bool complete() const { return tables.size() == static_cast<std::size_t>(kNumProperties); }
  bool operator==(const TimingArcTables&) const = default;
};

struct OutputPin {
  std::string name;
  std::string function_text;
  BoolExprPtr function;
};

struct Cell {
  std::string name;
  std::string cell_type;
  std::vector<std::string> input_pins;  // declaration order
  std::vector<OutputPin> output_pins;
  std::vector<TimingArcTables> arcs;
  std::map<std::string, double> input_capacitance;

  bool single_output() const { return output_pins.size() == 1; }
  const TimingArcTables* find_arc(const std::string& out, const std::string& related) const;
};

struct Library {
  std::string name;
  std::map<std::string, Cell> cells;  // keyed by cell name (deterministic order)
  std::string time_unit;
  std::string load_unit;
  std::string slew_unit;
  std::vector<std::string> warnings;
};

// Ordered suffix-stripping rules (ECMAScript regexes, applied in order) used to
// map a cell name to its type key, e.g. AND2x2_ASAP7_75t_R -> AND2.
struct TypeRules {
  std::vector<std::string> strip_patterns{"_ASAP7_.*$", "x[0-9p]+$"};
};

std::string cell_type_of(const std::string& name, const TypeRules& rules = {});

// Parses the supported Liberty subset. Unrecognized groups/attributes are
// skipped and recorded in Library::warnings.
Library parse_liberty(const std::string& text, const TypeRules& rules = {});
Library parse_liberty_file(const std::string& path, const TypeRules& rules = {});

// Merges several parsed files (e.g. per-VT Liberty files of one library).
Library merge_libraries(std::vector<Library> libs);

struct CellTypeGroup {
  std::string type;
  std::vector<std::string> cells;  // sorted member cell names
};

// Groups cells by type key, sorted by type name.
std::vector<CellTypeGroup> cell_type_groups(const Library& lib);

// Truth table of a single-output cell over its canonical (sorted) input pins.
TruthTable cell_truth_table(const Cell& cell,
                            std::size_t max_inputs = kDefaultMaxTruthTableInputs);

}  // namespace lib2vec
