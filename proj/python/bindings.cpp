#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

#include "lib2vec/datagen.hpp"
#include "lib2vec/evalkit.hpp"
#include "lib2vec/netgen.hpp"
#include "lib2vec/pipeline.hpp"

namespace py = pybind11;
using namespace lib2vec;

namespace {

Library load_libs(const std::vector<std::string>& paths) {
  std::vector<Library> libs;
  for (const auto& p : paths) libs.push_back(parse_liberty_file(p));
  return merge_libraries(std::move(libs));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Library cell embedding toolkit core";

  py::register_exception<Error>(m, "Lib2VecError");

  m.def("version", [] { return std::string(kVersionString); });

  m.def(
      "parse_library_json",
      [](const std::vector<std::string>& paths) { return library_to_json(load_libs(paths)); },
      py::arg("paths"), "Parse Liberty files and return the stable JSON dump.");

  m.def(
      "cell_truth_table",
      [](const std::vector<std::string>& paths, const std::string& cell) {
        Library lib = load_libs(paths);
        auto it = lib.cells.find(cell);
        if (it == lib.cells.end()) throw Error("unknown cell " + cell);
        TruthTable tt = cell_truth_table(it->second);
        std::vector<int> bits(tt.bits.begin(), tt.bits.end());
        return py::make_tuple(tt.input_pins, bits);
      },
      py::arg("paths"), py::arg("cell"),
      "Truth table of a cell as (input_pins, bits), pins[0] most significant.");

  m.def(
      "expr_truth_table",
      [](const std::string& expr) {
        TruthTable tt = truth_table(*parse_bool_expr(expr));
        std::vector<int> bits(tt.bits.begin(), tt.bits.end());
        return py::make_tuple(tt.input_pins, bits);
      },
      py::arg("expr"), "Truth table of a boolean expression string.");

  m.def(
      "fun_sim",
      [](const std::string& expr_a, const std::string& expr_b) {
        auto a = parse_bool_expr(expr_a);
        auto b = parse_bool_expr(expr_b);
        std::vector<std::string> pins = collect_pins(*a);
        for (const auto& p : collect_pins(*b))
          if (std::find(pins.begin(), pins.end(), p) == pins.end()) pins.push_back(p);
        std::sort(pins.begin(), pins.end());
        return fun_sim(truth_table(*a, pins), truth_table(*b, pins));
      },
      py::arg("expr_a"), py::arg("expr_b"),
      "Fraction of matching outputs between two expressions over their pin union.");

  m.def(
      "generate_tests",
      [](const std::vector<std::string>& paths, const std::string& out_dir, std::uint64_t seed,
         std::size_t grid_s, std::size_t grid_l, std::size_t cap) {
        Library lib = load_libs(paths);
        ConditionGrid grid = build_condition_grid(lib, grid_s, grid_l);
        ResponseCache cache = build_response_cache(lib, grid);
        auto inv = generate_inverting_tests(lib);
        auto fsim = generate_funsim_tests(lib);
        auto elec = generate_electrical_tests(lib, cache, seed, cap);
        atomic_write(out_dir + "/inverting.jsonl", to_jsonl(inv));
        atomic_write(out_dir + "/funsim.jsonl", to_jsonl(fsim));
        atomic_write(out_dir + "/electrical.jsonl", to_jsonl(elec));
        return py::make_tuple(inv.size(), fsim.size(), elec.size());
      },
      py::arg("paths"), py::arg("out_dir"), py::arg("seed") = 1, py::arg("grid_s") = 16,
      py::arg("grid_l") = 16, py::arg("cap") = kDefaultElectricalTestCap,
      "Write the three regularity test families; returns their sizes.");

  m.def(
      "run_pipeline",
      [](const std::string& config_json) {
        RunConfig cfg = RunConfig::from_json(config_json);
        PipelineResult res = run_pipeline(cfg);
        return py::make_tuple(res.stages_run, res.stages_skipped, res.scores_json);
      },
      py::arg("config_json"),
      "Run every stage; returns (stages_run, stages_skipped, scores_json).");

  m.def(
      "generate_netlist_json",
      [](const std::vector<std::string>& paths, std::uint64_t seed) {
        return netlist_to_json(generate_netlist(load_libs(paths), seed));
      },
      py::arg("paths"), py::arg("seed") = 1, "Generate one artificial netlist as JSON.");

  m.def(
      "simulate_netlist",
      [](const std::vector<std::string>& paths, const std::string& netlist_json,
         std::size_t vectors, std::uint64_t seed) {
        Library lib = load_libs(paths);
        return labels_to_jsonl(simulate_auto(lib, netlist_from_json(netlist_json), vectors, seed));
      },
      py::arg("paths"), py::arg("netlist_json"), py::arg("vectors") = kDefaultSimVectors,
      py::arg("seed") = 1, "Simulate a netlist; returns per-net labels as JSON-lines.");

  m.def(
      "analogy_from_csv",
      [](const std::string& types_csv, const std::string& x, const std::string& xbar,
         const std::string& y, std::size_t top) {
        auto ranked = analogy(type_vectors_from_csv(types_csv), x, xbar, y);
        if (ranked.size() > top) ranked.resize(top);
        return ranked;
      },
      py::arg("types_csv"), py::arg("x"), py::arg("xbar"), py::arg("y"), py::arg("top") = 10,
      "Rank types nearest to vec(xbar) - vec(x) + vec(y) from an exported CSV.");
}
