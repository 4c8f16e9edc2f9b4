#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lib2vec/datagen.hpp"
#include "lib2vec/evalkit.hpp"
#include "lib2vec/netgen.hpp"
#include "lib2vec/pipeline.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace lib2vec;

namespace {

Library load_libs(const std::vector<std::string>& paths, const TypeRules& rules) {
  if (paths.empty()) throw Error("no library files given");
  std::vector<Library> libs;
  for (const auto& p : paths) libs.push_back(parse_liberty_file(p, rules));
  return merge_libraries(std::move(libs));
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-")
    std::cout << content;
  else
    atomic_write(path, content);
}

TypeVectors type_vectors_of(const FunctionalModel& model,
                            const std::map<std::string, std::string>& cell_types) {
  std::map<std::string, std::vector<std::vector<double>>> members;
  for (const auto& cell : model.vocab().cells) {
    auto it = cell_types.find(cell);
    if (it == cell_types.end()) continue;
    members[it->second].push_back(model.cell_vector(cell));
  }
  TypeVectors out;
  for (const auto& [type, vecs] : members) {
    std::vector<double> mean(vecs[0].size(), 0.0);
    for (const auto& v : vecs)
      for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i];
    for (double& x : mean) x /= static_cast<double>(vecs.size());
    out[type] = std::move(mean);
  }
  return out;
}

ArcVectors arc_vectors_for_tests(const ElectricalModel& model,
                                 const std::vector<ElectricalSimilarityTest>& tests) {
  ArcVectors out;
  auto add = [&](const ArcRef& arc, Property p) {
    ArcPropKey key{arc, p};
    if (out.count(key)) return;
    out[key] = model.arc_vector(arc.cell, arc.output_pin, arc.related_pin, p);
  };
  for (const auto& t : tests) {
    add(t.query_arc, t.property);
    for (const auto& c : t.candidates) add(c, t.property);
  }
  return out;
}

std::vector<std::size_t> parse_k_list(const std::string& csv) {
  std::vector<std::size_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoul(item));
  if (out.empty()) throw Error("empty k list");
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Library cell embedding toolkit"};
  app.require_subcommand(1);
  argv = app.ensure_utf8(argv);

  std::vector<std::string> lib_paths;
  std::vector<std::string> type_patterns;
  auto add_lib_opts = [&](CLI::App* sub, bool required = true) {
    auto* o = sub->add_option("--lib", lib_paths, "Liberty file paths");
    if (required) o->required();
    sub->add_option("--type-pattern", type_patterns,
                    "suffix-strip regexes for cell type keys (override defaults)");
  };
  auto rules = [&] {
    TypeRules r;
    if (!type_patterns.empty()) r.strip_patterns = type_patterns;
    return r;
  };

  // parse
  auto* cmd_parse = app.add_subcommand("parse", "parse Liberty files and report/dump the model");
  std::string json_out;
  add_lib_opts(cmd_parse);
  cmd_parse->add_option("--json-out", json_out, "write the parsed library as JSON ('-' = stdout)");
  cmd_parse->callback([&] {
    Library lib = load_libs(lib_paths, rules());
    if (!json_out.empty()) emit(json_out, library_to_json(lib));
    std::cerr << "parsed " << lib.cells.size() << " cells, " << cell_type_groups(lib).size()
              << " types, " << lib.warnings.size() << " warnings\n";
    for (const auto& w : lib.warnings) std::cerr << "warning: " << w << "\n";
  });

  // truthtable
  auto* cmd_tt = app.add_subcommand("truthtable", "print a cell's truth table bit vector");
  std::string tt_cell;
  add_lib_opts(cmd_tt);
  cmd_tt->add_option("cell", tt_cell, "cell name")->required();
  cmd_tt->callback([&] {
    Library lib = load_libs(lib_paths, rules());
    auto it = lib.cells.find(tt_cell);
    if (it == lib.cells.end()) throw Error("unknown cell " + tt_cell);
    TruthTable tt = cell_truth_table(it->second);
    std::cout << "pins:";
    for (const auto& p : tt.input_pins) std::cout << " " << p;
    std::cout << "\nbits: ";
    for (auto b : tt.bits) std::cout << int(b);
    std::cout << "\n";
  });

  // testgen
  auto* cmd_testgen = app.add_subcommand("testgen", "generate the three regularity test families");
  std::string tg_out;
  std::uint64_t tg_seed = 1;
  std::size_t tg_grid_s = 16, tg_grid_l = 16, tg_cap = kDefaultElectricalTestCap;
  add_lib_opts(cmd_testgen);
  cmd_testgen->add_option("--out", tg_out, "output directory")->required();
  cmd_testgen->add_option("--seed", tg_seed, "sampling seed");
  cmd_testgen->add_option("--grid-s", tg_grid_s, "slew grid points");
  cmd_testgen->add_option("--grid-l", tg_grid_l, "load grid points");
  cmd_testgen->add_option("--cap", tg_cap, "per-property electrical test cap");
  cmd_testgen->callback([&] {
    Library lib = load_libs(lib_paths, rules());
    ConditionGrid grid = build_condition_grid(lib, tg_grid_s, tg_grid_l);
    ResponseCache cache = build_response_cache(lib, grid);
    for (const auto& w : cache.warnings) std::cerr << "warning: " << w << "\n";
    fs::path out(tg_out);
    auto inv = generate_inverting_tests(lib);
    auto fsim = generate_funsim_tests(lib);
    auto elec = generate_electrical_tests(lib, cache, tg_seed, tg_cap);
    atomic_write((out / "inverting.jsonl").string(), to_jsonl(inv));
    atomic_write((out / "funsim.jsonl").string(), to_jsonl(fsim));
    atomic_write((out / "electrical.jsonl").string(), to_jsonl(elec));
    std::cerr << "inverting: " << inv.size() << "  funsim: " << fsim.size()
              << "  electrical: " << elec.size() << "\n";
  });

  // datagen
  auto* cmd_datagen = app.add_subcommand("datagen", "generate self-supervised training datasets");
  std::string dg_out;
  DatagenConfig dg_cfg;
  std::size_t dg_grid_s = 16, dg_grid_l = 16;
  bool dg_binary = false;
  add_lib_opts(cmd_datagen);
  cmd_datagen->add_option("--out", dg_out, "output directory")->required();
  cmd_datagen->add_option("--seed", dg_cfg.seed, "sampling seed");
  cmd_datagen->add_option("--grid-s", dg_grid_s, "slew grid points");
  cmd_datagen->add_option("--grid-l", dg_grid_l, "load grid points");
  cmd_datagen->add_option("--pair-cap", dg_cfg.func_diff_pair_cap, "functional diff pair cap");
  cmd_datagen->add_option("--partners", dg_cfg.elec_diff_partners,
                          "electrical diff partners per arc");
  cmd_datagen->add_flag("--binary-targets", dg_binary,
                        "store electrical targets in a float32 sidecar");
  cmd_datagen->callback([&] {
    Library lib = load_libs(lib_paths, rules());
    ConditionGrid grid = build_condition_grid(lib, dg_grid_s, dg_grid_l);
    ResponseCache cache = build_response_cache(lib, grid);
    FunctionalDatasets fd = gen_functional(lib, dg_cfg);
    ElectricalDatasets ed = gen_electrical(lib, cache, dg_cfg);
    fs::path out(dg_out);
    fs::create_directories(out);
    atomic_write((out / "func_out.jsonl").string(), to_jsonl(fd.out_examples));
    atomic_write((out / "func_diff.jsonl").string(), to_jsonl(fd.diff_examples));
    write_electrical_jsonl(ed.out_examples, (out / "elec_out.jsonl").string(), dg_binary);
    write_electrical_jsonl(ed.diff_examples, (out / "elec_diff.jsonl").string(), dg_binary);
    std::cerr << "func_out: " << fd.out_examples.size() << "  func_diff: " << fd.diff_examples.size()
              << "  elec_out: " << ed.out_examples.size()
              << "  elec_diff: " << ed.diff_examples.size() << "\n";
  });

  // train
  auto* cmd_train = app.add_subcommand("train", "train models per a JSON run configuration");
  std::string train_config;
  cmd_train->add_option("--config", train_config, "JSON run configuration")->required();
  cmd_train->callback([&] {
    RunConfig cfg = RunConfig::from_json(read_file(train_config));
    PipelineResult res = run_pipeline(cfg);
    std::cerr << "stages run:";
    for (const auto& s : res.stages_run) std::cerr << " " << s;
    std::cerr << "\n";
  });

  // eval
  auto* cmd_eval = app.add_subcommand("eval", "score a checkpoint against generated tests");
  std::string ev_ckpt, ev_elec_ckpt, ev_tests, ev_k = "1,3,10", ev_out;
  cmd_eval->add_option("--checkpoint", ev_ckpt, "functional checkpoint")->required();
  cmd_eval->add_option("--elec-checkpoint", ev_elec_ckpt, "electrical checkpoint");
  cmd_eval->add_option("--tests", ev_tests, "directory holding the .jsonl test files")->required();
  cmd_eval->add_option("--k", ev_k, "comma-separated top-K list");
  cmd_eval->add_option("--out", ev_out, "write scores JSON here instead of stdout");
  cmd_eval->callback([&] {
    auto k_list = parse_k_list(ev_k);
    std::string manifest = load_checkpoint_manifest(ev_ckpt);
    FunctionalModel func = functional_from_manifest(manifest);
    load_checkpoint(ev_ckpt, func.store());
    TypeVectors type_vectors = type_vectors_of(func, cell_types_from_manifest(manifest));

    fs::path tests(ev_tests);
    auto inv = inverting_tests_from_jsonl(read_file((tests / "inverting.jsonl").string()));
    auto fsim = funsim_tests_from_jsonl(read_file((tests / "funsim.jsonl").string()));

    json scores;
    json inv_scores = json::object();
    for (std::size_t k : k_list)
      inv_scores["top" + std::to_string(k)] = score_inverting(inv, type_vectors, k);
    scores["inverting"] = inv_scores;
    FunSimScore fscore = score_funsim(fsim, type_vectors);
    scores["funsim"] = json{{"easy", fscore.easy_accuracy},
                            {"hard", fscore.hard_accuracy},
                            {"easy_total", fscore.easy_total},
                            {"hard_total", fscore.hard_total}};

    fs::path elec_path = tests / "electrical.jsonl";
    if (!ev_elec_ckpt.empty() && fs::exists(elec_path)) {
      ElectricalModel elec = electrical_from_manifest(load_checkpoint_manifest(ev_elec_ckpt));
      load_checkpoint(ev_elec_ckpt, elec.store());
      auto etests = electrical_tests_from_jsonl(read_file(elec_path.string()));
      ArcVectors arc_vectors = arc_vectors_for_tests(elec, etests);
      json elec_scores = json::object();
      for (std::size_t k : k_list) {
        ElectricalScore es = score_electrical(etests, arc_vectors, k);
        json per = json::object();
        for (const auto& [p, acc] : es.per_property) per[property_name(p)] = acc;
        elec_scores["top" + std::to_string(k)] =
            json{{"per_property", per}, {"macro", es.macro_average}, {"micro", es.micro_average}};
      }
      scores["electrical"] = elec_scores;
    }
    emit(ev_out, scores.dump(2) + "\n");
  });

  // export
  auto* cmd_export = app.add_subcommand("export", "export embedding vectors as CSV");
  std::string ex_ckpt, ex_elec_ckpt, ex_out;
  cmd_export->add_option("--checkpoint", ex_ckpt, "functional checkpoint")->required();
  cmd_export->add_option("--elec-checkpoint", ex_elec_ckpt, "electrical checkpoint");
  add_lib_opts(cmd_export, false);
  cmd_export->add_option("--out", ex_out, "output directory")->required();
  cmd_export->callback([&] {
    std::string manifest = load_checkpoint_manifest(ex_ckpt);
    FunctionalModel func = functional_from_manifest(manifest);
    load_checkpoint(ex_ckpt, func.store());

    EmbeddingReport report;
    report.d = func.dim();
    report.cell_types = cell_types_from_manifest(manifest);
    for (const auto& cell : func.vocab().cells) report.cell_vectors[cell] = func.cell_vector(cell);
    report.type_vectors = type_vectors_of(func, report.cell_types);

    if (!ex_elec_ckpt.empty()) {
      if (lib_paths.empty()) throw Error("--elec-checkpoint requires --lib for arc enumeration");
      ElectricalModel elec = electrical_from_manifest(load_checkpoint_manifest(ex_elec_ckpt));
      load_checkpoint(ex_elec_ckpt, elec.store());
      Library lib = load_libs(lib_paths, rules());
      for (const auto& [name, cell] : lib.cells) {
        for (const auto& arc : cell.arcs) {
          if (!arc.complete()) continue;
          ArcRef ref{name, arc.output_pin, arc.related_pin};
          for (Property p : all_properties())
            report.arc_vectors[{ref, p}] =
                elec.arc_vector(ref.cell, ref.output_pin, ref.related_pin, p);
        }
      }
    }
    json meta{{"version", kVersionString}, {"d", report.d}};
    report.metadata_json = meta.dump(2);
    export_vectors(report, ex_out);
    std::cerr << "wrote " << report.cell_vectors.size() << " cell, "
              << report.type_vectors.size() << " type, " << report.arc_vectors.size()
              << " arc vectors\n";
  });

  // analogy
  auto* cmd_analogy = app.add_subcommand("analogy", "rank types by vec(xbar) - vec(x) + vec(y)");
  std::string an_types, an_x, an_xbar, an_y;
  std::size_t an_top = 10;
  cmd_analogy->add_option("--types", an_types, "types.csv from export")->required();
  cmd_analogy->add_option("--x", an_x, "base type X")->required();
  cmd_analogy->add_option("--xbar", an_xbar, "inverted type of X")->required();
  cmd_analogy->add_option("--y", an_y, "probe type Y")->required();
  cmd_analogy->add_option("--top", an_top, "how many ranked types to print");
  cmd_analogy->callback([&] {
    TypeVectors tv = type_vectors_from_csv(an_types);
    auto ranked = analogy(tv, an_x, an_xbar, an_y);
    for (std::size_t i = 0; i < ranked.size() && i < an_top; ++i)
      std::cout << i + 1 << " " << ranked[i].first << " " << ranked[i].second << "\n";
  });

  // netgen
  auto* cmd_netgen = app.add_subcommand("netgen", "generate artificial netlists");
  std::string ng_out;
  std::size_t ng_count = 1;
  std::uint64_t ng_seed = 1;
  add_lib_opts(cmd_netgen);
  cmd_netgen->add_option("--count", ng_count, "number of netlists");
  cmd_netgen->add_option("--seed", ng_seed, "base seed; netlist i uses seed + i");
  cmd_netgen->add_option("--out", ng_out, "output directory")->required();
  cmd_netgen->callback([&] {
    Library lib = load_libs(lib_paths, rules());
    fs::path out(ng_out);
    for (std::size_t i = 0; i < ng_count; ++i) {
      Netlist nl = generate_netlist(lib, ng_seed + i);
      atomic_write((out / (nl.name + ".json")).string(), netlist_to_json(nl));
    }
    std::cerr << "wrote " << ng_count << " netlists to " << ng_out << "\n";
  });

  // simulate
  auto* cmd_sim = app.add_subcommand("simulate", "zero-delay logic simulation of a netlist");
  std::string sm_netlist, sm_out;
  std::size_t sm_vectors = kDefaultSimVectors;
  std::uint64_t sm_seed = 1;
  bool sm_force_random = false;
  add_lib_opts(cmd_sim);
  cmd_sim->add_option("--netlist", sm_netlist, "netlist JSON file")->required();
  cmd_sim->add_option("--vectors", sm_vectors, "Monte-Carlo vector count");
  cmd_sim->add_option("--seed", sm_seed, "vector seed");
  cmd_sim->add_flag("--random", sm_force_random, "force Monte-Carlo even when exhaustive fits");
  cmd_sim->add_option("--out", sm_out, "write label JSON-lines here instead of stdout");
  cmd_sim->callback([&] {
    Library lib = load_libs(lib_paths, rules());
    Netlist nl = netlist_from_json(read_file(sm_netlist));
    LogicLabels labels = sm_force_random ? simulate_random(lib, nl, sm_vectors, sm_seed)
                                         : simulate_auto(lib, nl, sm_vectors, sm_seed);
    emit(sm_out, labels_to_jsonl(labels));
  });

  // pipeline
  auto* cmd_pipe = app.add_subcommand("pipeline", "run every stage end to end");
  std::string pp_config;
  RunConfig pp_cfg;
  cmd_pipe->add_option("--config", pp_config, "JSON run configuration (flags override it)");
  cmd_pipe->add_option("--lib", pp_cfg.lib_paths, "Liberty file paths");
  cmd_pipe->add_option("--out", pp_cfg.out_dir, "run directory");
  cmd_pipe->add_option("--d", pp_cfg.d, "embedding size");
  cmd_pipe->add_option("--grid-s", pp_cfg.grid_s, "slew grid points");
  cmd_pipe->add_option("--grid-l", pp_cfg.grid_l, "load grid points");
  cmd_pipe->add_option("--seed", pp_cfg.seed, "seed");
  cmd_pipe->add_option("--functional-epochs", pp_cfg.functional_epochs, "functional epochs");
  cmd_pipe->add_option("--electrical-epochs", pp_cfg.electrical_epochs, "electrical epochs");
  cmd_pipe->add_option("--batch-size", pp_cfg.batch_size, "batch size");
  cmd_pipe->add_option("--lr", pp_cfg.lr, "learning rate");
  cmd_pipe->callback([&] {
    RunConfig cfg = pp_config.empty() ? RunConfig{} : RunConfig::from_json(read_file(pp_config));
    auto* o = cmd_pipe;
    if (o->count("--lib")) cfg.lib_paths = pp_cfg.lib_paths;
    if (o->count("--out")) cfg.out_dir = pp_cfg.out_dir;
    if (o->count("--d")) cfg.d = pp_cfg.d;
    if (o->count("--grid-s")) cfg.grid_s = pp_cfg.grid_s;
    if (o->count("--grid-l")) cfg.grid_l = pp_cfg.grid_l;
    if (o->count("--seed")) cfg.seed = pp_cfg.seed;
    if (o->count("--functional-epochs")) cfg.functional_epochs = pp_cfg.functional_epochs;
    if (o->count("--electrical-epochs")) cfg.electrical_epochs = pp_cfg.electrical_epochs;
    if (o->count("--batch-size")) cfg.batch_size = pp_cfg.batch_size;
    if (o->count("--lr")) cfg.lr = pp_cfg.lr;
    PipelineResult res = run_pipeline(cfg);
    std::cerr << "stages run:";
    for (const auto& s : res.stages_run) std::cerr << " " << s;
    std::cerr << "\nstages skipped:";
    for (const auto& s : res.stages_skipped) std::cerr << " " << s;
    std::cerr << "\n";
    std::cout << res.scores_json;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    json err{{"error", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    json err{{"error", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
}
