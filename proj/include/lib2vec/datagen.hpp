#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lib2vec/testgen.hpp"

namespace lib2vec {

struct FuncOutExample {
  std::string cell;
  std::string output_pin;
  std::map<std::string, bool> assignment;
  int target = 0;  // {0,1}
};

struct FuncDiffExample {
  std::string cell_a;
  std::string cell_b;
  std::string output_pin_a;
  std::string output_pin_b;
  std::map<std::string, bool> assignment;
  int target = 0;  // {-1,0,1}
};

struct ElecOutExample {
  ArcRef arc;
  Property property = Property::RiseDelay;
  std::vector<double> target;  // log-domain response vector
};

struct ElecDiffExample {
  ArcRef arc_a;
  ArcRef arc_b;
  Property property = Property::RiseDelay;
  std::vector<double> target;  // elementwise response_a - response_b
};

struct FunctionalDatasets {
  std::vector<FuncOutExample> out_examples;
  std::vector<FuncDiffExample> diff_examples;
  std::size_t skipped_cells = 0;  // sequential / multi-output
};

struct ElectricalDatasets {
  std::vector<ElecOutExample> out_examples;
  std::vector<ElecDiffExample> diff_examples;
  std::vector<std::string> warnings;
};

struct DatagenConfig {
  std::uint64_t seed = 1;
  std::size_t func_diff_pair_cap = 5000;  // unordered same-pin-set cell pairs
  std::size_t elec_diff_partners = 4;     // partners sampled per arc per property
};

FunctionalDatasets gen_functional(const Library& lib, const DatagenConfig& cfg = {});
ElectricalDatasets gen_electrical(const Library& lib, const ResponseCache& cache,
                                  const DatagenConfig& cfg = {});

// JSON-lines serialization. When `binary_targets` is set, electrical target
// vectors go to a sidecar file of little-endian 32-bit floats and each JSON
// line carries {"target_ref": {"offset": ..., "len": ...}} instead.
std::string to_jsonl(const std::vector<FuncOutExample>& xs);
std::string to_jsonl(const std::vector<FuncDiffExample>& xs);
std::string to_jsonl(const std::vector<ElecOutExample>& xs);
std::string to_jsonl(const std::vector<ElecDiffExample>& xs);

void write_electrical_jsonl(const std::vector<ElecOutExample>& xs, const std::string& jsonl_path,
                            bool binary_targets);
void write_electrical_jsonl(const std::vector<ElecDiffExample>& xs, const std::string& jsonl_path,
                            bool binary_targets);

std::vector<FuncOutExample> func_out_from_jsonl(const std::string& text);
std::vector<FuncDiffExample> func_diff_from_jsonl(const std::string& text);
std::vector<ElecOutExample> elec_out_from_jsonl_file(const std::string& jsonl_path);
std::vector<ElecDiffExample> elec_diff_from_jsonl_file(const std::string& jsonl_path);

}  // namespace lib2vec
