#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "lib2vec/testgen.hpp"
#include "support/toy_library.hpp"

using namespace lib2vec;
using testsupport::toy_library;

namespace {

const Library& lib() {
  static Library l = toy_library();
  return l;
}

const ConditionGrid& grid() {
  static ConditionGrid g = build_condition_grid(lib(), 8, 8);
  return g;
}

const ResponseCache& cache() {
  static ResponseCache c = build_response_cache(lib(), grid());
  return c;
}

}  // namespace

TEST_CASE("condition grid spans the global breakpoint range log-uniformly") {
  const ConditionGrid& g = grid();
  REQUIRE(g.slew_points.size() == 8);
  REQUIRE(g.load_points.size() == 8);
  CHECK(g.size() == 64);
  CHECK(g.slew_points.front() == doctest::Approx(0.01));
  CHECK(g.slew_points.back() == doctest::Approx(0.2));
  CHECK(g.load_points.front() == doctest::Approx(0.001));
  CHECK(g.load_points.back() == doctest::Approx(0.1));
  // equal ratios between consecutive points
  double r = g.slew_points[1] / g.slew_points[0];
  for (std::size_t i = 2; i < g.slew_points.size(); ++i)
    CHECK(g.slew_points[i] / g.slew_points[i - 1] == doctest::Approx(r));
  CHECK_THROWS_AS(build_condition_grid(lib(), 1, 8), Error);
}

TEST_CASE("response vector is the log of interpolated table values") {
  const Cell& inv = lib().cells.at("INVx1");
  const TimingArcTables& arc = inv.arcs.at(0);
  auto resp = response_vector(arc, Property::RiseDelay, grid());
  REQUIRE(resp.size() == grid().size());
  for (std::size_t k = 0; k < resp.size(); ++k) {
    auto [slew, load] = grid().condition(k);
    CHECK(resp[k] == doctest::Approx(std::log(lut_query(arc.tables.at(Property::RiseDelay), slew, load))));
  }
}

TEST_CASE("non-positive interpolated values are rejected with the condition index") {
  TimingArcTables arc;
  arc.output_pin = "Y";
  arc.related_pin = "A";
  LookupTable2D t;
  t.index1 = {0.01, 0.2};
  t.index2 = {0.001, 0.1};
  t.values = {1.0, 1.0, 1.0, -1.0};
  arc.tables[Property::RiseDelay] = t;
  CHECK_THROWS_AS(response_vector(arc, Property::RiseDelay, grid()), NonPositiveValue);
}

TEST_CASE("response cache covers every complete arc of the toy library") {
  // 5 one-input cells with 1 arc, 15 two-input cells with 2 arcs
  CHECK(cache().responses.size() == 5 + 15 * 2);
  CHECK(cache().warnings.empty());
}

TEST_CASE("cell type infos include all eight toy types") {
  auto infos = cell_type_infos(lib());
  REQUIRE(infos.size() == 8);
  std::set<std::string> names;
  for (const auto& i : infos) names.insert(i.type);
  CHECK(names == std::set<std::string>{"AND2", "BUF", "INV", "NAND2", "NOR2", "OR2", "XNOR2", "XOR2"});
}

TEST_CASE("inverting pairs and analogy test count follow P(P-1)") {
  auto infos = cell_type_infos(lib());
  auto pairs = inverting_pairs(infos);
  std::set<std::pair<std::string, std::string>> expected{
      {"AND2", "NAND2"}, {"BUF", "INV"}, {"NOR2", "OR2"}, {"XNOR2", "XOR2"}};
  CHECK(std::set<std::pair<std::string, std::string>>(pairs.begin(), pairs.end()) == expected);
  auto tests = generate_inverting_tests(lib());
  CHECK(tests.size() == pairs.size() * (pairs.size() - 1));
  for (const auto& t : tests) {
    CHECK(t.given_type != t.probe_type);
    CHECK(t.answer != t.given_inverted);
  }
}

TEST_CASE("funsim tests label difficulty by margin and answers by truth tables") {
  auto infos = cell_type_infos(lib());
  std::map<std::string, TruthTable> tt;
  for (const auto& i : infos) tt[i.type] = i.tt;
  auto tests = generate_funsim_tests(lib());
  REQUIRE(!tests.empty());
  for (const auto& t : tests) {
    double sa = fun_sim(tt.at(t.option_a), tt.at(t.anchor));
    double sb = fun_sim(tt.at(t.option_b), tt.at(t.anchor));
    CHECK(t.answer == (sa > sb ? t.option_a : t.option_b));
    CHECK(t.margin == doctest::Approx(std::abs(sa - sb)));
    CHECK(t.easy == (t.margin >= 0.5));
  }
}

TEST_CASE("truth-table bit vectors solve every easy funsim test") {
  // Euclidean distance on raw bit vectors is monotone in Hamming distance.
  auto infos = cell_type_infos(lib());
  TypeVectors vecs;
  for (const auto& i : infos) {
    std::vector<double> v(i.tt.bits.begin(), i.tt.bits.end());
    if (i.input_pins.size() == 1) v = {v[0], v[1], v[0], v[1]};  // pad to shared length
    vecs[i.type] = v;
  }
  auto tests = generate_funsim_tests(lib());
  FunSimScore score = score_funsim(tests, vecs);
  CHECK(score.easy_accuracy == doctest::Approx(1.0));
  CHECK(score.hard_accuracy == doctest::Approx(1.0));
}

TEST_CASE("electrical tests store the exhaustive-search answer") {
  auto tests = generate_electrical_tests(lib(), cache(), 42, 100);
  REQUIRE(!tests.empty());
  for (const auto& t : tests) {
    const auto& qvec = cache().get(t.query_arc, t.property);
    ArcRef best;
    double best_d = 0;
    bool first = true;
    for (const auto& c : t.candidates) {
      double d = euclidean_distance(qvec, cache().get(c, t.property));
      if (first || d < best_d) {
        best = c;
        best_d = d;
        first = false;
      }
    }
    CHECK(t.answer_arc == best);
    CHECK(lib().cells.at(t.query_arc.cell).cell_type != t.candidate_type);
  }
}

TEST_CASE("electrical test generation is deterministic and capped") {
  auto a = generate_electrical_tests(lib(), cache(), 7, 50);
  auto b = generate_electrical_tests(lib(), cache(), 7, 50);
  CHECK(to_jsonl(a) == to_jsonl(b));
  CHECK(a.size() == 6 * 50);
  auto c = generate_electrical_tests(lib(), cache(), 8, 50);
  CHECK(to_jsonl(a) != to_jsonl(c));
}

TEST_CASE("scores are invariant under a common rigid transform") {
  auto infos = cell_type_infos(lib());
  TypeVectors vecs;
  std::mt19937_64 rng(3);
  auto rnd = [&] { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1p-53) - 1.0; };
  const std::size_t d = 6;
  for (const auto& i : infos) {
    std::vector<double> v(d);
    for (double& x : v) x = rnd();
    vecs[i.type] = v;
  }
  // Householder reflection + translation preserves all pairwise distances.
  std::vector<double> u(d), shift(d);
  double norm = 0;
  for (double& x : u) {
    x = rnd();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (double& x : u) x /= norm;
  for (double& x : shift) x = rnd();
  TypeVectors moved;
  for (const auto& [name, v] : vecs) {
    double dot = 0;
    for (std::size_t j = 0; j < d; ++j) dot += u[j] * v[j];
    std::vector<double> w(d);
    for (std::size_t j = 0; j < d; ++j) w[j] = v[j] - 2.0 * dot * u[j] + shift[j];
    moved[name] = w;
  }
  auto inv = generate_inverting_tests(lib());
  auto fsim = generate_funsim_tests(lib());
  for (std::size_t k : {std::size_t{1}, std::size_t{3}})
    CHECK(score_inverting(inv, vecs, k) == doctest::Approx(score_inverting(inv, moved, k)));
  FunSimScore s1 = score_funsim(fsim, vecs);
  FunSimScore s2 = score_funsim(fsim, moved);
  CHECK(s1.easy_accuracy == doctest::Approx(s2.easy_accuracy));
  CHECK(s1.hard_accuracy == doctest::Approx(s2.hard_accuracy));
}

TEST_CASE("jsonl round trips for all three families") {
  auto inv = generate_inverting_tests(lib());
  auto fsim = generate_funsim_tests(lib());
  auto elec = generate_electrical_tests(lib(), cache(), 1, 30);
  CHECK(to_jsonl(inverting_tests_from_jsonl(to_jsonl(inv))) == to_jsonl(inv));
  CHECK(to_jsonl(funsim_tests_from_jsonl(to_jsonl(fsim))) == to_jsonl(fsim));
  CHECK(to_jsonl(electrical_tests_from_jsonl(to_jsonl(elec))) == to_jsonl(elec));
}

TEST_CASE("scoring throws on a missing vector") {
  auto inv = generate_inverting_tests(lib());
  TypeVectors empty;
  CHECK_THROWS_AS(score_inverting(inv, empty, 1), MissingVector);
}
