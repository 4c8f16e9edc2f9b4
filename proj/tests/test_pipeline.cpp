#include <filesystem>
#include <fstream>
#include <map>

#include "doctest.h"
#include "lib2vec/pipeline.hpp"
#include "support/toy_library.hpp"

using namespace lib2vec;
namespace fs = std::filesystem;

namespace {

std::string write_toy_lib(const fs::path& dir) {
  fs::create_directories(dir);
  fs::path p = dir / "toy.lib";
  std::ofstream out(p, std::ios::binary);
  out << testsupport::toy_liberty_text();
  return p.string();
}

RunConfig small_config(const std::string& lib_path, const std::string& out_dir) {
  RunConfig cfg;
  cfg.lib_paths = {lib_path};
  cfg.out_dir = out_dir;
  cfg.d = 6;
  cfg.grid_s = 3;
  cfg.grid_l = 3;
  cfg.seed = 1;
  cfg.functional_epochs = 2;
  cfg.electrical_epochs = 1;
  cfg.batch_size = 64;
  cfg.electrical_test_cap = 20;
  cfg.elec_hidden = 8;
  cfg.k_list = {1, 3};
  return cfg;
}

std::map<std::string, std::uint64_t> hash_tree(const fs::path& root) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::string rel = fs::relative(entry.path(), root).string();
    if (rel == "config.json" || rel == "stage_hashes.json") continue;  // embed out_dir
    out[rel] = fnv1a(read_file(entry.path().string()));
  }
  return out;
}

}  // namespace

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a("ab") != fnv1a("ba"));
}

TEST_CASE("atomic_write creates parents and never leaves the temp file") {
  fs::path dir = fs::temp_directory_path() / "lib2vec_pipeline_io";
  fs::remove_all(dir);
  std::string path = (dir / "a" / "b.txt").string();
  atomic_write(path, "hello");
  CHECK(read_file(path) == "hello");
  CHECK_FALSE(fs::exists(path + ".tmp"));
  atomic_write(path, "world");
  CHECK(read_file(path) == "world");
  CHECK_THROWS_AS(read_file((dir / "missing").string()), IoError);
  fs::remove_all(dir);
}

TEST_CASE("run config json round trips and validates") {
  RunConfig cfg = small_config("x.lib", "out");
  cfg.type_rules.strip_patterns = {"foo$"};
  RunConfig back = RunConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  CHECK(back.type_rules.strip_patterns == cfg.type_rules.strip_patterns);

  RunConfig bad = cfg;
  bad.lib_paths.clear();
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.grid_s = 1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.k_list.clear();
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("pipeline produces all artifacts, caches stages, and is deterministic") {
  fs::path base = fs::temp_directory_path() / "lib2vec_pipeline_test";
  fs::remove_all(base);
  std::string lib_path = write_toy_lib(base / "libs");

  RunConfig cfg1 = small_config(lib_path, (base / "run1").string());
  PipelineResult r1 = run_pipeline(cfg1);
  CHECK(r1.stages_run.size() == 6);
  CHECK(r1.stages_skipped.empty());
  for (const char* rel :
       {"config.json", "version.txt", "parsed/library.json", "tests/inverting.jsonl",
        "tests/funsim.jsonl", "tests/electrical.jsonl", "data/func_out.jsonl",
        "data/func_diff.jsonl", "data/elec_out.jsonl", "data/elec_diff.jsonl",
        "checkpoints/functional.ckpt", "checkpoints/functional.ckpt.json",
        "checkpoints/electrical.ckpt", "eval/scores.json", "report/cells.csv",
        "report/types.csv", "report/arcs.csv"})
    CHECK_MESSAGE(fs::exists(base / "run1" / rel), rel);
  CHECK(read_file((base / "run1" / "version.txt").string()) ==
        std::string(kVersionString) + "\n");
  CHECK(!r1.scores_json.empty());

  // identical rerun skips every stage
  PipelineResult r2 = run_pipeline(cfg1);
  CHECK(r2.stages_run.empty());
  CHECK(r2.stages_skipped.size() == 6);
  CHECK(r2.scores_json == r1.scores_json);

  // a fresh directory reproduces every artifact byte for byte
  RunConfig cfg2 = small_config(lib_path, (base / "run2").string());
  run_pipeline(cfg2);
  CHECK(hash_tree(base / "run1") == hash_tree(base / "run2"));

  // changing the seed invalidates the cache and changes results
  RunConfig cfg3 = small_config(lib_path, (base / "run1").string());
  cfg3.seed = 2;
  PipelineResult r3 = run_pipeline(cfg3);
  CHECK(r3.stages_run.size() == 6);
  fs::remove_all(base);
}

TEST_CASE("checkpoint manifests rebuild matching model shells") {
  fs::path base = fs::temp_directory_path() / "lib2vec_manifest_test";
  fs::remove_all(base);
  std::string lib_path = write_toy_lib(base / "libs");
  RunConfig cfg = small_config(lib_path, (base / "run").string());
  run_pipeline(cfg);

  std::string fpath = (base / "run" / "checkpoints" / "functional.ckpt").string();
  FunctionalModel func = functional_from_manifest(load_checkpoint_manifest(fpath));
  CHECK(func.dim() == cfg.d);
  CHECK(func.vocab().cells.size() == 20);
  load_checkpoint(fpath, func.store());

  std::string epath = (base / "run" / "checkpoints" / "electrical.ckpt").string();
  ElectricalModel elec = electrical_from_manifest(load_checkpoint_manifest(epath));
  CHECK(elec.conditions() == cfg.grid_s * cfg.grid_l);
  load_checkpoint(epath, elec.store());

  auto types = cell_types_from_manifest(load_checkpoint_manifest(fpath));
  CHECK(types.at("NAND2x1") == "NAND2");

  // a shell with the wrong width rejects the blob
  FunctionalModel wrong(func.vocab(), cfg.d + 1, 1);
  CHECK_THROWS_AS(load_checkpoint(fpath, wrong.store()), IoError);
  CHECK_THROWS_AS(functional_from_manifest(load_checkpoint_manifest(epath)), IoError);
  fs::remove_all(base);
}
