#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lib2vec/evalkit.hpp"
#include "lib2vec/liberty.hpp"

namespace lib2vec {

inline constexpr const char* kVersionString = "lib2vec 0.1.0";

// Full run configuration; serialized into every output directory.
struct RunConfig {
  std::vector<std::string> lib_paths;
  std::string out_dir;
  std::size_t d = 32;
  std::size_t grid_s = 16;
  std::size_t grid_l = 16;
  std::uint64_t seed = 1;
  std::size_t functional_epochs = 200;
  std::size_t electrical_epochs = 100;
  std::size_t batch_size = 256;
  double lr = 1e-3;
  std::size_t electrical_test_cap = 1000;
  std::size_t func_diff_pair_cap = 5000;
  std::size_t elec_diff_partners = 4;
  std::size_t elec_hidden = 64;
  std::vector<std::size_t> k_list{1, 3, 10};
  bool binary_targets = false;
  TypeRules type_rules;

  static RunConfig from_json(const std::string& text);
  std::string to_json() const;
  void validate() const;
};

struct PipelineResult {
  std::vector<std::string> stages_run;
  std::vector<std::string> stages_skipped;
  std::string scores_json;
};

// parse -> testgen -> datagen -> train -> eval -> export, with content-hashed
// stage caching inside cfg.out_dir.
PipelineResult run_pipeline(const RunConfig& cfg);

// Stable JSON dump of a parsed library (schema library.v1).
std::string library_to_json(const Library& lib);

// FNV-1a 64-bit, used for stage caching and report hashes.
std::uint64_t fnv1a(const std::string& bytes, std::uint64_t seed = 0xcbf29ce484222325ull);

// Writes via a temp file + rename so readers never see partial output.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// Checkpoint manifests carry everything needed to rebuild the model shell.
std::string functional_manifest(const FunctionalModel& model, const Library& lib,
                                const RunConfig& cfg);
std::string electrical_manifest(const ElectricalModel& model, const Library& lib,
                                const RunConfig& cfg);
FunctionalModel functional_from_manifest(const std::string& manifest_json);
ElectricalModel electrical_from_manifest(const std::string& manifest_json);
std::map<std::string, std::string> cell_types_from_manifest(const std::string& manifest_json);

}  // namespace lib2vec
