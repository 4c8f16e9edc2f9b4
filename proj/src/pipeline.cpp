#include "lib2vec/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lib2vec {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void atomic_write(const std::string& path, const std::string& content) {
  fs::create_directories(fs::path(path).parent_path());
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp);
    out << content;
  }
  fs::rename(tmp, path);
}

RunConfig RunConfig::from_json(const std::string& text) {
  json j = json::parse(text);
  RunConfig cfg;
  cfg.lib_paths = j.value("lib_paths", cfg.lib_paths);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.d = j.value("d", cfg.d);
  cfg.grid_s = j.value("grid_s", cfg.grid_s);
  cfg.grid_l = j.value("grid_l", cfg.grid_l);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.functional_epochs = j.value("functional_epochs", cfg.functional_epochs);
  cfg.electrical_epochs = j.value("electrical_epochs", cfg.electrical_epochs);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.lr = j.value("lr", cfg.lr);
  cfg.electrical_test_cap = j.value("electrical_test_cap", cfg.electrical_test_cap);
  cfg.func_diff_pair_cap = j.value("func_diff_pair_cap", cfg.func_diff_pair_cap);
  cfg.elec_diff_partners = j.value("elec_diff_partners", cfg.elec_diff_partners);
  cfg.elec_hidden = j.value("elec_hidden", cfg.elec_hidden);
  cfg.k_list = j.value("k_list", cfg.k_list);
  cfg.binary_targets = j.value("binary_targets", cfg.binary_targets);
  if (j.contains("type_strip_patterns"))
    cfg.type_rules.strip_patterns = j["type_strip_patterns"].get<std::vector<std::string>>();
  return cfg;
}

std::string RunConfig::to_json() const {
  json j{{"lib_paths", lib_paths},
         {"out_dir", out_dir},
         {"d", d},
         {"grid_s", grid_s},
         {"grid_l", grid_l},
         {"seed", seed},
         {"functional_epochs", functional_epochs},
         {"electrical_epochs", electrical_epochs},
         {"batch_size", batch_size},
         {"lr", lr},
         {"electrical_test_cap", electrical_test_cap},
         {"func_diff_pair_cap", func_diff_pair_cap},
         {"elec_diff_partners", elec_diff_partners},
         {"elec_hidden", elec_hidden},
         {"k_list", k_list},
         {"binary_targets", binary_targets},
         {"type_strip_patterns", type_rules.strip_patterns}};
  return j.dump(2) + "\n";
}

void RunConfig::validate() const {
  if (lib_paths.empty()) throw Error("config: lib_paths must not be empty");
  if (out_dir.empty()) throw Error("config: out_dir must not be empty");
  if (d == 0) throw Error("config: d must be positive");
  if (grid_s < 2 || grid_l < 2) throw Error("config: grid dims must be >= 2");
  if (batch_size == 0) throw Error("config: batch_size must be positive");
  if (k_list.empty()) throw Error("config: k_list must not be empty");
}

std::string library_to_json(const Library& lib) {
  json cells = json::array();
  for (const auto& [name, cell] : lib.cells) {
    json outputs = json::array();
    for (const auto& out : cell.output_pins)
      outputs.push_back(json{{"pin", out.name}, {"function", out.function_text}});
    json arcs = json::array();
    for (const auto& arc : cell.arcs) {
      json tables = json::object();
      for (const auto& [p, t] : arc.tables)
        tables[property_name(p)] =
            json{{"index1", t.index1}, {"index2", t.index2}, {"values", t.values}};
      arcs.push_back(json{{"out", arc.output_pin},
                          {"rel", arc.related_pin},
                          {"complete", arc.complete()},
                          {"tables", tables}});
    }
    cells.push_back(json{{"name", name},
                         {"type", cell.cell_type},
                         {"inputs", cell.input_pins},
                         {"outputs", outputs},
                         {"arcs", arcs}});
  }
  json j{{"schema", "library.v1"},
         {"name", lib.name},
         {"units", json{{"time", lib.time_unit}, {"load", lib.load_unit}, {"slew", lib.slew_unit}}},
         {"cells", cells},
         {"warnings", lib.warnings}};
  return j.dump(2) + "\n";
}

std::string functional_manifest(const FunctionalModel& model, const Library& lib,
                                const RunConfig& cfg) {
  json types = json::object();
  for (const auto& [name, cell] : lib.cells) types[name] = cell.cell_type;
  json j{{"schema", "checkpoint.v1"},
         {"model", "functional"},
         {"d", model.dim()},
         {"seed", cfg.seed},
         {"cells", model.vocab().cells},
         {"pins", model.vocab().pins},
         {"cell_types", types}};
  return j.dump(2) + "\n";
}

std::string electrical_manifest(const ElectricalModel& model, const Library& lib,
                                const RunConfig& cfg) {
  json types = json::object();
  for (const auto& [name, cell] : lib.cells) types[name] = cell.cell_type;
  json props = json::array();
  for (Property p : all_properties()) props.push_back(property_name(p));
  json j{{"schema", "checkpoint.v1"},
         {"model", "electrical"},
         {"d", model.dim()},
         {"conditions", model.conditions()},
         {"hidden", cfg.elec_hidden},
         {"seed", cfg.seed},
         {"cells", model.vocab().cells},
         {"pins", model.vocab().pins},
         {"properties", props},
         {"cell_types", types}};
  return j.dump(2) + "\n";
}

namespace {

Vocab vocab_from_manifest(const json& j) {
  Vocab v;
  v.cells = j.at("cells").get<std::vector<std::string>>();
  v.pins = j.at("pins").get<std::vector<std::string>>();
  return v;
}

}  // namespace

FunctionalModel functional_from_manifest(const std::string& manifest_json) {
  json j = json::parse(manifest_json);
  if (j.at("model") != "functional") throw IoError("manifest is not a functional checkpoint");
  return FunctionalModel(vocab_from_manifest(j), j.at("d"), j.at("seed"));
}

ElectricalModel electrical_from_manifest(const std::string& manifest_json) {
  json j = json::parse(manifest_json);
  if (j.at("model") != "electrical") throw IoError("manifest is not an electrical checkpoint");
  return ElectricalModel(vocab_from_manifest(j), j.at("d"), j.at("conditions"), j.at("seed"),
                         j.at("hidden"));
}

std::map<std::string, std::string> cell_types_from_manifest(const std::string& manifest_json) {
  json j = json::parse(manifest_json);
  std::map<std::string, std::string> out;
  for (auto it = j.at("cell_types").begin(); it != j.at("cell_types").end(); ++it)
    out[it.key()] = it.value().get<std::string>();
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

namespace {

struct StageCache {
  fs::path hashes_path;
  json hashes = json::object();
  std::string input_hash;

  bool fresh(const std::string& stage, const std::vector<fs::path>& outputs) const {
    auto it = hashes.find(stage);
    if (it == hashes.end() || it->get<std::string>() != input_hash) return false;
    for (const auto& p : outputs)
      if (!fs::exists(p)) return false;
    return true;
  }

  void mark(const std::string& stage) {
    hashes[stage] = input_hash;
    atomic_write(hashes_path.string(), hashes.dump(2) + "\n");
  }
};

}  // namespace

PipelineResult run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  PipelineResult result;
  fs::path out(cfg.out_dir);
  fs::create_directories(out);

  atomic_write((out / "config.json").string(), cfg.to_json());
  atomic_write((out / "version.txt").string(), std::string(kVersionString) + "\n");

  std::uint64_t h = fnv1a(cfg.to_json());
  for (const auto& path : cfg.lib_paths) h = fnv1a(read_file(path), h);
  StageCache cache;
  cache.hashes_path = out / "stage_hashes.json";
  cache.input_hash = std::to_string(h);
  if (fs::exists(cache.hashes_path)) cache.hashes = json::parse(read_file(cache.hashes_path.string()));

  auto run_stage = [&](const std::string& name, const std::vector<fs::path>& outputs,
                       auto&& body) {
    if (cache.fresh(name, outputs)) {
      result.stages_skipped.push_back(name);
      return;
    }
    body();
    cache.mark(name);
    result.stages_run.push_back(name);
  };

  // parse
  std::vector<Library> parsed;
  for (const auto& path : cfg.lib_paths) parsed.push_back(parse_liberty_file(path, cfg.type_rules));
  Library lib = merge_libraries(std::move(parsed));
  run_stage("parse", {out / "parsed" / "library.json"}, [&] {
    atomic_write((out / "parsed" / "library.json").string(), library_to_json(lib));
  });

  ConditionGrid grid = build_condition_grid(lib, cfg.grid_s, cfg.grid_l);
  ResponseCache responses = build_response_cache(lib, grid);

  // testgen
  fs::path tests_dir = out / "tests";
  run_stage("testgen",
            {tests_dir / "inverting.jsonl", tests_dir / "funsim.jsonl",
             tests_dir / "electrical.jsonl"},
            [&] {
              atomic_write((tests_dir / "inverting.jsonl").string(),
                           to_jsonl(generate_inverting_tests(lib)));
              atomic_write((tests_dir / "funsim.jsonl").string(),
                           to_jsonl(generate_funsim_tests(lib)));
              atomic_write((tests_dir / "electrical.jsonl").string(),
                           to_jsonl(generate_electrical_tests(lib, responses, cfg.seed,
                                                              cfg.electrical_test_cap)));
            });

  // datagen
  DatagenConfig dg{cfg.seed, cfg.func_diff_pair_cap, cfg.elec_diff_partners};
  FunctionalDatasets func_data = gen_functional(lib, dg);
  ElectricalDatasets elec_data = gen_electrical(lib, responses, dg);
  fs::path data_dir = out / "data";
  run_stage("datagen",
            {data_dir / "func_out.jsonl", data_dir / "func_diff.jsonl",
             data_dir / "elec_out.jsonl", data_dir / "elec_diff.jsonl"},
            [&] {
              atomic_write((data_dir / "func_out.jsonl").string(), to_jsonl(func_data.out_examples));
              atomic_write((data_dir / "func_diff.jsonl").string(),
                           to_jsonl(func_data.diff_examples));
              fs::create_directories(data_dir);
              write_electrical_jsonl(elec_data.out_examples,
                                     (data_dir / "elec_out.jsonl").string(), cfg.binary_targets);
              write_electrical_jsonl(elec_data.diff_examples,
                                     (data_dir / "elec_diff.jsonl").string(), cfg.binary_targets);
            });

  // train
  TrainConfig tc;
  tc.d = cfg.d;
  tc.seed = cfg.seed;
  tc.functional_epochs = cfg.functional_epochs;
  tc.electrical_epochs = cfg.electrical_epochs;
  tc.batch_size = cfg.batch_size;
  tc.lr = cfg.lr;
  tc.elec_hidden = cfg.elec_hidden;

  Vocab vocab = Vocab::from_library(lib);
  FunctionalModel func_model(vocab, cfg.d, cfg.seed);
  const bool has_electrical = !elec_data.out_examples.empty();
  ElectricalModel elec_model(vocab, cfg.d, grid.size(), cfg.seed + 1, cfg.elec_hidden);
  fs::path ckpt_dir = out / "checkpoints";
  run_stage("train", {ckpt_dir / "functional.ckpt"}, [&] {
    std::vector<double> func_losses = train_functional(func_model, func_data, tc);
    fs::create_directories(ckpt_dir);
    save_checkpoint((ckpt_dir / "functional.ckpt").string(), func_model.store(),
                    functional_manifest(func_model, lib, cfg));
    json losses{{"functional", func_losses}};
    if (has_electrical) {
      std::vector<double> elec_losses = train_electrical(elec_model, elec_data, tc);
      save_checkpoint((ckpt_dir / "electrical.ckpt").string(), elec_model.store(),
                      electrical_manifest(elec_model, lib, cfg));
      losses["electrical"] = elec_losses;
    }
    atomic_write((ckpt_dir / "losses.json").string(), losses.dump(2) + "\n");
  });
  // Later stages always reload from the checkpoints so cached and fresh runs
  // see identical (float32-rounded) parameters.
  load_checkpoint((ckpt_dir / "functional.ckpt").string(), func_model.store());
  if (has_electrical) load_checkpoint((ckpt_dir / "electrical.ckpt").string(), elec_model.store());

  EmbeddingReport report =
      build_report(lib, func_model, has_electrical ? &elec_model : nullptr,
                   has_electrical ? &responses : nullptr, tc);

  // eval
  fs::path eval_dir = out / "eval";
  run_stage("eval", {eval_dir / "scores.json"}, [&] {
    auto inverting = inverting_tests_from_jsonl(read_file((tests_dir / "inverting.jsonl").string()));
    auto funsim = funsim_tests_from_jsonl(read_file((tests_dir / "funsim.jsonl").string()));
    auto electrical =
        electrical_tests_from_jsonl(read_file((tests_dir / "electrical.jsonl").string()));
    json scores;
    json inv = json::object();
    for (std::size_t k : cfg.k_list)
      inv["top" + std::to_string(k)] = score_inverting(inverting, report.type_vectors, k);
    scores["inverting"] = inv;
    FunSimScore fs_score = score_funsim(funsim, report.type_vectors);
    scores["funsim"] = json{{"easy", fs_score.easy_accuracy},
                            {"hard", fs_score.hard_accuracy},
                            {"easy_total", fs_score.easy_total},
                            {"hard_total", fs_score.hard_total}};
    if (has_electrical) {
      json elec = json::object();
      for (std::size_t k : cfg.k_list) {
        ElectricalScore es = score_electrical(electrical, report.arc_vectors, k);
        json per = json::object();
        for (const auto& [p, acc] : es.per_property) per[property_name(p)] = acc;
        elec["top" + std::to_string(k)] =
            json{{"per_property", per}, {"macro", es.macro_average}, {"micro", es.micro_average}};
      }
      scores["electrical"] = elec;
    } else {
      scores["electrical"] = nullptr;
    }
    scores["counts"] = json{{"inverting", inverting.size()},
                            {"funsim", funsim.size()},
                            {"electrical", electrical.size()}};
    atomic_write((eval_dir / "scores.json").string(), scores.dump(2) + "\n");
  });
  result.scores_json = read_file((eval_dir / "scores.json").string());

  // export
  fs::path report_dir = out / "report";
  run_stage("export",
            {report_dir / "cells.csv", report_dir / "types.csv", report_dir / "arcs.csv"}, [&] {
              export_vectors(report, report_dir.string());
              atomic_write((report_dir / "metadata.json").string(), report.metadata_json + "\n");
            });

  return result;
}

}  // namespace lib2vec
