#include "lib2vec/testgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace lib2vec {

using json = nlohmann::ordered_json;

ConditionGrid build_condition_grid(const Library& lib, std::size_t s, std::size_t l) {
  if (s < 2 || l < 2) throw Error("condition grid needs at least 2 points per axis");
  double slew_min = 0, slew_max = 0, load_min = 0, load_max = 0;
  bool any = false;
  for (const auto& [name, cell] : lib.cells) {
    for (const auto& arc : cell.arcs) {
      if (!arc.complete()) continue;
      for (const auto& [p, t] : arc.tables) {
        if (t.index1.size() < 2 || t.index2.size() < 2) continue;
        if (!any) {
          slew_min = t.index1.front();
          slew_max = t.index1.back();
          load_min = t.index2.front();
          load_max = t.index2.back();
          any = true;
        } else {
          slew_min = std::min(slew_min, t.index1.front());
          slew_max = std::max(slew_max, t.index1.back());
          load_min = std::min(load_min, t.index2.front());
          load_max = std::max(load_max, t.index2.back());
        }
      }
    }
  }
  if (!any) throw EmptyLibrary("library has no complete arcs with 2-D tables");
  if (slew_min <= 0 || load_min <= 0) throw Error("breakpoint ranges must be positive for log sampling");

  auto log_linspace = [](double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    double la = std::log(lo), lb = std::log(hi);
    for (std::size_t k = 0; k < n; ++k)
      out[k] = std::exp(la + static_cast<double>(k) * (lb - la) / static_cast<double>(n - 1));
    return out;
  };
  return {log_linspace(slew_min, slew_max, s), log_linspace(load_min, load_max, l)};
}

std::vector<double> response_vector(const TimingArcTables& arc, Property property,
                                    const ConditionGrid& grid) {
  auto it = arc.tables.find(property);
  if (it == arc.tables.end())
    throw Error("arc " + arc.output_pin + "/" + arc.related_pin + " has no " + property_name(property) +
                " table");
  std::vector<double> out(grid.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto [slew, load] = grid.condition(k);
    double v = lut_query(it->second, slew, load);
    if (!(v > 0))
      throw NonPositiveValue(k, "non-positive " + property_name(property) + " value at condition " +
                                    std::to_string(k));
    out[k] = std::log(v);
  }
  return out;
}

const std::vector<double>& ResponseCache::get(const ArcRef& arc, Property p) const {
  auto it = responses.find(arc);
  if (it == responses.end()) throw MissingVector("no response vectors for arc " + arc.str());
  return it->second[static_cast<std::size_t>(p)];
}

ResponseCache build_response_cache(const Library& lib, const ConditionGrid& grid) {
  ResponseCache cache;
  for (const auto& [name, cell] : lib.cells) {
    for (const auto& arc : cell.arcs) {
      if (!arc.complete()) continue;
      ArcRef ref{name, arc.output_pin, arc.related_pin};
      std::array<std::vector<double>, kNumProperties> resp;
      bool ok = true;
      for (Property p : all_properties()) {
        try {
          resp[static_cast<std::size_t>(p)] = response_vector(arc, p, grid);
        } catch (const NonPositiveValue& e) {
          cache.warnings.push_back("arc " + ref.str() + " excluded: " + e.what());
          ok = false;
          break;
        }
      }
      if (ok) cache.responses.emplace(std::move(ref), std::move(resp));
    }
  }
  return cache;
}

std::vector<CellTypeInfo> cell_type_infos(const Library& lib, std::vector<std::string>* warnings) {
  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back(msg);
  };
  std::vector<CellTypeInfo> out;
  for (const auto& group : cell_type_groups(lib)) {
    CellTypeInfo info;
    info.type = group.type;
    info.cells = group.cells;
    const Cell& first = lib.cells.at(group.cells.front());
    if (!first.single_output()) {
      warn("type " + group.type + " skipped: multiple output pins");
      continue;
    }
    if (!first.output_pins[0].function) {
      warn("type " + group.type + " skipped: no combinational function");
      continue;
    }
    if (first.input_pins.size() > kDefaultMaxTruthTableInputs) {
      warn("type " + group.type + " skipped: too many inputs");
      continue;
    }
    info.tt = cell_truth_table(first);
    info.input_pins = info.tt.input_pins;
    // Type-key consistency: every member must match the representative.
    for (std::size_t i = 1; i < group.cells.size(); ++i) {
      const Cell& other = lib.cells.at(group.cells[i]);
      if (!other.single_output() || !other.output_pins[0].function)
        throw SemanticError("type " + group.type + " mixes combinational and other cells");
      TruthTable tt = cell_truth_table(other);
      if (tt != info.tt)
        throw SemanticError("cells " + group.cells.front() + " and " + group.cells[i] +
                            " share type key " + group.type + " but differ in function or pins");
    }
    out.push_back(std::move(info));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> inverting_pairs(
    const std::vector<CellTypeInfo>& types) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < types.size(); ++i) {
    for (std::size_t j = i + 1; j < types.size(); ++j) {
      if (types[i].input_pins != types[j].input_pins) continue;
      if (is_inverting_pair(types[i].tt, types[j].tt))
        pairs.emplace_back(types[i].type, types[j].type);
    }
  }
  return pairs;
}

std::vector<InvertingAnalogyTest> generate_inverting_tests(const Library& lib) {
  auto types = cell_type_infos(lib);
  auto pairs = inverting_pairs(types);
  std::vector<InvertingAnalogyTest> tests;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      if (i == j) continue;
      tests.push_back({pairs[i].first, pairs[i].second, pairs[j].first, pairs[j].second});
    }
  }
  return tests;
}

std::vector<FunctionalSimilarityTest> generate_funsim_tests(const Library& lib) {
  auto types = cell_type_infos(lib);
  std::vector<FunctionalSimilarityTest> tests;
  for (const auto& c : types) {
    for (std::size_t i = 0; i < types.size(); ++i) {
      if (types[i].type == c.type || types[i].input_pins != c.input_pins) continue;
      for (std::size_t j = i + 1; j < types.size(); ++j) {
        if (types[j].type == c.type || types[j].input_pins != c.input_pins) continue;
        double sim_a = fun_sim(types[i].tt, c.tt);
        double sim_b = fun_sim(types[j].tt, c.tt);
        double margin = std::abs(sim_a - sim_b);
        if (margin <= 0) continue;
        FunctionalSimilarityTest t;
        t.anchor = c.type;
        t.option_a = types[i].type;
        t.option_b = types[j].type;
        t.answer = sim_a > sim_b ? t.option_a : t.option_b;
        t.margin = margin;
        t.easy = margin >= 0.5;
        tests.push_back(std::move(t));
      }
    }
  }
  return tests;
}

std::vector<ElectricalSimilarityTest> generate_electrical_tests(const Library& lib,
                                                                const ResponseCache& cache,
                                                                std::uint64_t seed,
                                                                std::size_t per_property_cap) {
  // Eligible arcs grouped by cell type, in deterministic order.
  std::map<std::string, std::vector<ArcRef>> arcs_by_type;
  std::vector<ArcRef> arcs;
  for (const auto& [ref, resp] : cache.responses) {
    arcs.push_back(ref);
    arcs_by_type[lib.cells.at(ref.cell).cell_type].push_back(ref);
  }

  std::vector<ElectricalSimilarityTest> tests;
  for (Property p : all_properties()) {
    std::vector<std::pair<ArcRef, std::string>> eligible;
    for (const auto& q : arcs) {
      const std::string& qtype = lib.cells.at(q.cell).cell_type;
      for (const auto& [type, members] : arcs_by_type) {
        if (type == qtype) continue;
        eligible.emplace_back(q, type);
      }
    }
    std::vector<std::size_t> pick(eligible.size());
    std::iota(pick.begin(), pick.end(), 0);
    if (eligible.size() > per_property_cap) {
      std::mt19937_64 rng(seed + static_cast<std::uint64_t>(p) * 0x9e3779b97f4a7c15ull);
      std::shuffle(pick.begin(), pick.end(), rng);
      pick.resize(per_property_cap);
      std::sort(pick.begin(), pick.end());
    }
    for (std::size_t idx : pick) {
      const auto& [q, type] = eligible[idx];
      ElectricalSimilarityTest t;
      t.property = p;
      t.query_arc = q;
      t.candidate_type = type;
      t.candidates = arcs_by_type.at(type);
      const auto& qvec = cache.get(q, p);
      double best = 0;
      bool first = true;
      for (const auto& c : t.candidates) {
        double d = euclidean_distance(qvec, cache.get(c, p));
        if (first || d < best) {
          best = d;
          t.answer_arc = c;
          first = false;
        }
      }
      tests.push_back(std::move(t));
    }
  }
  return tests;
}

double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error("vector length mismatch in distance");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

namespace {

const std::vector<double>& require_vector(const TypeVectors& vecs, const std::string& name) {
  auto it = vecs.find(name);
  if (it == vecs.end()) throw MissingVector("no vector for type " + name);
  return it->second;
}

}  // namespace

double score_inverting(const std::vector<InvertingAnalogyTest>& tests,
                       const TypeVectors& type_vectors, std::size_t k) {
  if (tests.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& t : tests) {
    const auto& vx = require_vector(type_vectors, t.given_type);
    const auto& vxb = require_vector(type_vectors, t.given_inverted);
    const auto& vy = require_vector(type_vectors, t.probe_type);
    require_vector(type_vectors, t.answer);
    std::vector<double> target(vx.size());
    for (std::size_t i = 0; i < target.size(); ++i) target[i] = vxb[i] - vx[i] + vy[i];
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& [name, vec] : type_vectors) {
      if (name == t.given_type || name == t.given_inverted || name == t.probe_type) continue;
      ranked.emplace_back(euclidean_distance(target, vec), name);
    }
    std::sort(ranked.begin(), ranked.end());
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
      if (ranked[i].second == t.answer) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(tests.size());
}

FunSimScore score_funsim(const std::vector<FunctionalSimilarityTest>& tests,
                         const TypeVectors& type_vectors) {
  FunSimScore score;
  std::size_t easy_hits = 0, hard_hits = 0;
  for (const auto& t : tests) {
    const auto& vc = require_vector(type_vectors, t.anchor);
    double da = euclidean_distance(require_vector(type_vectors, t.option_a), vc);
    double db = euclidean_distance(require_vector(type_vectors, t.option_b), vc);
    std::string predicted;
    if (da < db) predicted = t.option_a;
    else if (db < da) predicted = t.option_b;
    else predicted = std::min(t.option_a, t.option_b);  // tie-break: lexicographic
    bool hit = predicted == t.answer;
    if (t.easy) {
      ++score.easy_total;
      easy_hits += hit;
    } else {
      ++score.hard_total;
      hard_hits += hit;
    }
  }
  if (score.easy_total) score.easy_accuracy = static_cast<double>(easy_hits) / score.easy_total;
  if (score.hard_total) score.hard_accuracy = static_cast<double>(hard_hits) / score.hard_total;
  return score;
}

ElectricalScore score_electrical(const std::vector<ElectricalSimilarityTest>& tests,
                                 const ArcVectors& arc_vectors, std::size_t k) {
  std::map<Property, std::size_t> hits, totals;
  std::size_t all_hits = 0;
  for (const auto& t : tests) {
    auto qit = arc_vectors.find({t.query_arc, t.property});
    if (qit == arc_vectors.end())
      throw MissingVector("no arc vector for query " + t.query_arc.str());
    std::vector<std::pair<double, ArcRef>> ranked;
    for (const auto& c : t.candidates) {
      auto cit = arc_vectors.find({c, t.property});
      if (cit == arc_vectors.end()) throw MissingVector("no arc vector for candidate " + c.str());
      ranked.emplace_back(euclidean_distance(qit->second, cit->second), c);
    }
    std::sort(ranked.begin(), ranked.end());
    ++totals[t.property];
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
      if (ranked[i].second == t.answer_arc) {
        ++hits[t.property];
        ++all_hits;
        break;
      }
    }
  }
  ElectricalScore score;
  double macro_sum = 0;
  std::size_t total = 0;
  for (const auto& [p, n] : totals) {
    double acc = static_cast<double>(hits[p]) / static_cast<double>(n);
    score.per_property[p] = acc;
    score.counts[p] = n;
    macro_sum += acc;
    total += n;
  }
  if (!totals.empty()) score.macro_average = macro_sum / static_cast<double>(totals.size());
  if (total) score.micro_average = static_cast<double>(all_hits) / static_cast<double>(total);
  return score;
}

// ---------------------------------------------------------------------------
// JSON lines serialization
// ---------------------------------------------------------------------------

namespace {

json arc_to_json(const ArcRef& a) {
  return json{{"cell", a.cell}, {"out", a.output_pin}, {"rel", a.related_pin}};
}

ArcRef arc_from_json(const json& j) {
  return {j.at("cell").get<std::string>(), j.at("out").get<std::string>(),
          j.at("rel").get<std::string>()};
}

template <typename T, typename Fn>
std::vector<T> parse_lines(const std::string& text, Fn&& fn) {
  std::vector<T> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(fn(json::parse(line)));
  }
  return out;
}

}  // namespace

std::string to_jsonl(const std::vector<InvertingAnalogyTest>& tests) {
  std::string out;
  for (const auto& t : tests) {
    json j{{"schema", "inverting.v1"},
           {"given", {t.given_type, t.given_inverted}},
           {"probe", t.probe_type},
           {"answer", t.answer}};
    out += j.dump() + "\n";
  }
  return out;
}

std::string to_jsonl(const std::vector<FunctionalSimilarityTest>& tests) {
  std::string out;
  for (const auto& t : tests) {
    json j{{"schema", "funsim.v1"},   {"anchor", t.anchor}, {"a", t.option_a},
           {"b", t.option_b},         {"answer", t.answer}, {"margin", t.margin},
           {"difficulty", t.easy ? "easy" : "hard"}};
    out += j.dump() + "\n";
  }
  return out;
}

std::string to_jsonl(const std::vector<ElectricalSimilarityTest>& tests) {
  std::string out;
  for (const auto& t : tests) {
    json cands = json::array();
    for (const auto& c : t.candidates) cands.push_back(arc_to_json(c));
    json j{{"schema", "electrical.v1"},
           {"property", property_name(t.property)},
           {"query", arc_to_json(t.query_arc)},
           {"candidate_type", t.candidate_type},
           {"candidates", cands},
           {"answer", arc_to_json(t.answer_arc)}};
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<InvertingAnalogyTest> inverting_tests_from_jsonl(const std::string& text) {
  return parse_lines<InvertingAnalogyTest>(text, [](const json& j) {
    return InvertingAnalogyTest{j.at("given").at(0), j.at("given").at(1), j.at("probe"),
                                j.at("answer")};
  });
}

std::vector<FunctionalSimilarityTest> funsim_tests_from_jsonl(const std::string& text) {
  return parse_lines<FunctionalSimilarityTest>(text, [](const json& j) {
    FunctionalSimilarityTest t;
    t.anchor = j.at("anchor");
    t.option_a = j.at("a");
    t.option_b = j.at("b");
    t.answer = j.at("answer");
    t.margin = j.at("margin");
    t.easy = j.at("difficulty") == "easy";
    return t;
  });
}

std::vector<ElectricalSimilarityTest> electrical_tests_from_jsonl(const std::string& text) {
  return parse_lines<ElectricalSimilarityTest>(text, [](const json& j) {
    ElectricalSimilarityTest t;
    t.property = *property_from_name(j.at("property"));
    t.query_arc = arc_from_json(j.at("query"));
    t.candidate_type = j.at("candidate_type");
    for (const auto& c : j.at("candidates")) t.candidates.push_back(arc_from_json(c));
    t.answer_arc = arc_from_json(j.at("answer"));
    return t;
  });
}

}  // namespace lib2vec
