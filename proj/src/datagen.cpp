#include "lib2vec/datagen.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace lib2vec {

using json = nlohmann::ordered_json;

namespace {

std::map<std::string, bool> assignment_at(const std::vector<std::string>& sorted_pins,
                                          std::size_t index) {
  std::map<std::string, bool> a;
  const std::size_t n = sorted_pins.size();
  for (std::size_t k = 0; k < n; ++k) a[sorted_pins[k]] = (index >> (n - 1 - k)) & 1u;
  return a;
}

}  // namespace

FunctionalDatasets gen_functional(const Library& lib, const DatagenConfig& cfg) {
  FunctionalDatasets out;

  struct Entry {
    const Cell* cell;
    std::vector<std::string> pins;  // sorted
    TruthTable tt;
  };
  std::vector<Entry> entries;
  for (const auto& [name, cell] : lib.cells) {
    if (!cell.single_output() || !cell.output_pins[0].function ||
        cell.input_pins.size() > kDefaultMaxTruthTableInputs) {
      ++out.skipped_cells;
      continue;
    }
    Entry e;
    e.cell = &cell;
    e.tt = cell_truth_table(cell);
    e.pins = e.tt.input_pins;
    entries.push_back(std::move(e));
  }

  for (const auto& e : entries) {
    for (std::size_t i = 0; i < e.tt.bits.size(); ++i) {
      FuncOutExample ex;
      ex.cell = e.cell->name;
      ex.output_pin = e.cell->output_pins[0].name;
      ex.assignment = assignment_at(e.pins, i);
      ex.target = e.tt.bits[i];
      out.out_examples.push_back(std::move(ex));
    }
  }

  // Unordered pairs of distinct cells sharing a pin set.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < entries.size(); ++i)
    for (std::size_t j = i + 1; j < entries.size(); ++j)
      if (entries[i].pins == entries[j].pins) pairs.emplace_back(i, j);
  if (pairs.size() > cfg.func_diff_pair_cap) {
    std::mt19937_64 rng(cfg.seed);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    pairs.resize(cfg.func_diff_pair_cap);
    std::sort(pairs.begin(), pairs.end());
  }
  for (const auto& [i, j] : pairs) {
    const Entry& a = entries[i];
    const Entry& b = entries[j];
    for (std::size_t k = 0; k < a.tt.bits.size(); ++k) {
      FuncDiffExample ex;
      ex.cell_a = a.cell->name;
      ex.cell_b = b.cell->name;
      ex.output_pin_a = a.cell->output_pins[0].name;
      ex.output_pin_b = b.cell->output_pins[0].name;
      ex.assignment = assignment_at(a.pins, k);
      ex.target = static_cast<int>(a.tt.bits[k]) - static_cast<int>(b.tt.bits[k]);
      out.diff_examples.push_back(std::move(ex));
    }
  }
  return out;
}

ElectricalDatasets gen_electrical(const Library& lib, const ResponseCache& cache,
                                  const DatagenConfig& cfg) {
  ElectricalDatasets out;
  out.warnings = cache.warnings;

  std::vector<ArcRef> arcs;
  for (const auto& [ref, resp] : cache.responses) arcs.push_back(ref);

  for (const auto& arc : arcs) {
    for (Property p : all_properties()) {
      ElecOutExample ex;
      ex.arc = arc;
      ex.property = p;
      ex.target = cache.get(arc, p);
      out.out_examples.push_back(std::move(ex));
    }
  }

  if (arcs.size() > 1) {
    for (Property p : all_properties()) {
      std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(p) * 0x9e3779b97f4a7c15ull);
      for (std::size_t i = 0; i < arcs.size(); ++i) {
        std::size_t partners = std::min(cfg.elec_diff_partners, arcs.size() - 1);
        std::vector<std::size_t> chosen;
        while (chosen.size() < partners) {
          std::size_t j = rng() % arcs.size();
          if (j == i || std::find(chosen.begin(), chosen.end(), j) != chosen.end()) continue;
          chosen.push_back(j);
        }
        std::sort(chosen.begin(), chosen.end());
        const auto& resp_a = cache.get(arcs[i], p);
        for (std::size_t j : chosen) {
          ElecDiffExample ex;
          ex.arc_a = arcs[i];
          ex.arc_b = arcs[j];
          ex.property = p;
          const auto& resp_b = cache.get(arcs[j], p);
          ex.target.resize(resp_a.size());
          for (std::size_t k = 0; k < resp_a.size(); ++k) ex.target[k] = resp_a[k] - resp_b[k];
          out.diff_examples.push_back(std::move(ex));
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

json assignment_to_json(const std::map<std::string, bool>& a) {
  json j = json::object();
  for (const auto& [pin, v] : a) j[pin] = v ? 1 : 0;
  return j;
}

std::map<std::string, bool> assignment_from_json(const json& j) {
  std::map<std::string, bool> a;
  for (auto it = j.begin(); it != j.end(); ++it) a[it.key()] = it.value().get<int>() != 0;
  return a;
}

json arc_json(const ArcRef& a) {
  return json{{"cell", a.cell}, {"out", a.output_pin}, {"rel", a.related_pin}};
}

ArcRef arc_from(const json& j) {
  return {j.at("cell").get<std::string>(), j.at("out").get<std::string>(),
          j.at("rel").get<std::string>()};
}

template <typename T, typename Fn>
std::vector<T> parse_jsonl(const std::string& text, Fn&& fn) {
  std::vector<T> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(fn(json::parse(line)));
  }
  return out;
}

void append_f32(std::ofstream& bin, const std::vector<double>& v) {
  for (double x : v) {
    float f = static_cast<float>(x);
    bin.write(reinterpret_cast<const char*>(&f), sizeof(float));
  }
}

std::vector<double> read_f32(std::ifstream& bin, std::size_t offset, std::size_t len) {
  bin.seekg(static_cast<std::streamoff>(offset * sizeof(float)));
  std::vector<double> out(len);
  for (std::size_t i = 0; i < len; ++i) {
    float f = 0;
    bin.read(reinterpret_cast<char*>(&f), sizeof(float));
    out[i] = f;
  }
  return out;
}

json elec_out_json(const ElecOutExample& x) {
  return json{{"task", "elec_out"},
              {"arc", arc_json(x.arc)},
              {"property", property_name(x.property)},
              {"target", x.target}};
}

json elec_diff_json(const ElecDiffExample& x) {
  return json{{"task", "elec_diff"},
              {"arc_a", arc_json(x.arc_a)},
              {"arc_b", arc_json(x.arc_b)},
              {"property", property_name(x.property)},
              {"target", x.target}};
}

std::string sidecar_path(const std::string& jsonl_path) { return jsonl_path + ".f32"; }

template <typename T, typename MakeJson>
void write_elec(const std::vector<T>& xs, const std::string& jsonl_path, bool binary_targets,
                MakeJson&& make_json) {
  std::ofstream out(jsonl_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + jsonl_path);
  if (!binary_targets) {
    for (const auto& x : xs) out << make_json(x).dump() << "\n";
    return;
  }
  std::ofstream bin(sidecar_path(jsonl_path), std::ios::binary);
  if (!bin) throw IoError("cannot write " + sidecar_path(jsonl_path));
  std::size_t offset = 0;
  for (const auto& x : xs) {
    json j = make_json(x);
    j.erase("target");
    j["target_ref"] = json{{"offset", offset}, {"len", x.target.size()}};
    out << j.dump() << "\n";
    append_f32(bin, x.target);
    offset += x.target.size();
  }
}

template <typename T, typename FromJson>
std::vector<T> read_elec(const std::string& jsonl_path, FromJson&& from_json) {
  std::ifstream in(jsonl_path, std::ios::binary);
  if (!in) throw IoError("cannot read " + jsonl_path);
  std::ifstream bin;  // opened lazily when a target_ref appears
  std::vector<T> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    T x = from_json(j);
    if (j.contains("target_ref")) {
      if (!bin.is_open()) {
        bin.open(sidecar_path(jsonl_path), std::ios::binary);
        if (!bin) throw IoError("cannot read " + sidecar_path(jsonl_path));
      }
      x.target = read_f32(bin, j["target_ref"]["offset"], j["target_ref"]["len"]);
    } else {
      x.target = j.at("target").get<std::vector<double>>();
    }
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace

std::string to_jsonl(const std::vector<FuncOutExample>& xs) {
  std::string out;
  for (const auto& x : xs) {
    json j{{"task", "func_out"},
           {"cell", x.cell},
           {"out", x.output_pin},
           {"pins", assignment_to_json(x.assignment)},
           {"target", x.target}};
    out += j.dump() + "\n";
  }
  return out;
}

std::string to_jsonl(const std::vector<FuncDiffExample>& xs) {
  std::string out;
  for (const auto& x : xs) {
    json j{{"task", "func_diff"},
           {"cell_a", x.cell_a},
           {"cell_b", x.cell_b},
           {"out_a", x.output_pin_a},
           {"out_b", x.output_pin_b},
           {"pins", assignment_to_json(x.assignment)},
           {"target", x.target}};
    out += j.dump() + "\n";
  }
  return out;
}

std::string to_jsonl(const std::vector<ElecOutExample>& xs) {
  std::string out;
  for (const auto& x : xs) out += elec_out_json(x).dump() + "\n";
  return out;
}

std::string to_jsonl(const std::vector<ElecDiffExample>& xs) {
  std::string out;
  for (const auto& x : xs) out += elec_diff_json(x).dump() + "\n";
  return out;
}

void write_electrical_jsonl(const std::vector<ElecOutExample>& xs, const std::string& jsonl_path,
                            bool binary_targets) {
  write_elec(xs, jsonl_path, binary_targets, elec_out_json);
}

void write_electrical_jsonl(const std::vector<ElecDiffExample>& xs, const std::string& jsonl_path,
                            bool binary_targets) {
  write_elec(xs, jsonl_path, binary_targets, elec_diff_json);
}

std::vector<FuncOutExample> func_out_from_jsonl(const std::string& text) {
  return parse_jsonl<FuncOutExample>(text, [](const json& j) {
    FuncOutExample x;
    x.cell = j.at("cell");
    x.output_pin = j.at("out");
    x.assignment = assignment_from_json(j.at("pins"));
    x.target = j.at("target");
    return x;
  });
}

std::vector<FuncDiffExample> func_diff_from_jsonl(const std::string& text) {
  return parse_jsonl<FuncDiffExample>(text, [](const json& j) {
    FuncDiffExample x;
    x.cell_a = j.at("cell_a");
    x.cell_b = j.at("cell_b");
    x.output_pin_a = j.at("out_a");
    x.output_pin_b = j.at("out_b");
    x.assignment = assignment_from_json(j.at("pins"));
    x.target = j.at("target");
    return x;
  });
}

std::vector<ElecOutExample> elec_out_from_jsonl_file(const std::string& jsonl_path) {
  return read_elec<ElecOutExample>(jsonl_path, [](const json& j) {
    ElecOutExample x;
    x.arc = arc_from(j.at("arc"));
    x.property = *property_from_name(j.at("property"));
    return x;
  });
}

std::vector<ElecDiffExample> elec_diff_from_jsonl_file(const std::string& jsonl_path) {
  return read_elec<ElecDiffExample>(jsonl_path, [](const json& j) {
    ElecDiffExample x;
    x.arc_a = arc_from(j.at("arc_a"));
    x.arc_b = arc_from(j.at("arc_b"));
    x.property = *property_from_name(j.at("property"));
    return x;
  });
}

}  // namespace lib2vec
