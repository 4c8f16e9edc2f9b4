#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lib2vec/liberty.hpp"

namespace lib2vec {

struct ArcRef {
  std::string cell;
  std::string output_pin;
  std::string related_pin;

  auto operator<=>(const ArcRef&) const = default;
  std::string str() const { return cell + "/" + output_pin + "/" + related_pin; }
};

// Log-uniform sample of (slew, load) conditions shared by all arcs.
struct ConditionGrid {
  std::vector<double> slew_points;
  std::vector<double> load_points;

  std::size_t size() const { return slew_points.size() * load_points.size(); }
  std::pair<double, double> condition(std::size_t k) const {
    return {slew_points[k / load_points.size()], load_points[k % load_points.size()]};
  }
};

ConditionGrid build_condition_grid(const Library& lib, std::size_t s, std::size_t l);

// Element k = log(lut_query(table, conditions[k])). Throws NonPositiveValue when
// any interpolated value is <= 0.
std::vector<double> response_vector(const TimingArcTables& arc, Property property,
                                    const ConditionGrid& grid);

// Per-arc log-response vectors for every complete arc with positive responses.
// Arcs failing the positivity check are excluded and listed in warnings.
struct ResponseCache {
  std::map<ArcRef, std::array<std::vector<double>, kNumProperties>> responses;
  std::vector<std::string> warnings;

  const std::vector<double>& get(const ArcRef& arc, Property p) const;
  bool has(const ArcRef& arc) const { return responses.count(arc) != 0; }
};

ResponseCache build_response_cache(const Library& lib, const ConditionGrid& grid);

// Per-type summary used by the functional test families: representative truth
// table and the sorted input pin list, taken from single-output member cells.
struct CellTypeInfo {
  std::string type;
  std::vector<std::string> cells;
  std::vector<std::string> input_pins;  // sorted
  TruthTable tt;
};

// Single-output combinational types only; skipped types recorded in warnings.
std::vector<CellTypeInfo> cell_type_infos(const Library& lib, std::vector<std::string>* warnings = nullptr);

struct InvertingAnalogyTest {
  std::string given_type;      // X
  std::string given_inverted;  // X-bar
  std::string probe_type;      // Y
  std::string answer;          // Y-bar
};

struct FunctionalSimilarityTest {
  std::string anchor;  // C
  std::string option_a;
  std::string option_b;
  std::string answer;
  double margin = 0.0;
  bool easy = false;  // margin >= 0.5
};

struct ElectricalSimilarityTest {
  Property property = Property::RiseDelay;
  ArcRef query_arc;
  std::string candidate_type;
  std::vector<ArcRef> candidates;  // eligible arcs of candidate_type, sorted
  ArcRef answer_arc;               // argmin response-vector distance
};

// Inverting-functionality pairs (lexicographically oriented, first < second).
std::vector<std::pair<std::string, std::string>> inverting_pairs(const std::vector<CellTypeInfo>& types);

std::vector<InvertingAnalogyTest> generate_inverting_tests(const Library& lib);
std::vector<FunctionalSimilarityTest> generate_funsim_tests(const Library& lib);

inline constexpr std::size_t kDefaultElectricalTestCap = 1000;

std::vector<ElectricalSimilarityTest> generate_electrical_tests(
    const Library& lib, const ResponseCache& cache, std::uint64_t seed,
    std::size_t per_property_cap = kDefaultElectricalTestCap);

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

using TypeVectors = std::map<std::string, std::vector<double>>;

struct ArcPropKey {
  ArcRef arc;
  Property property;
  auto operator<=>(const ArcPropKey&) const = default;
};

using ArcVectors = std::map<ArcPropKey, std::vector<double>>;

double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b);

// Fraction of tests whose answer ranks within the top K types nearest to
// vec(X-bar) - vec(X) + vec(Y); X, X-bar, Y excluded from the candidates.
double score_inverting(const std::vector<InvertingAnalogyTest>& tests,
                       const TypeVectors& type_vectors, std::size_t k);

struct FunSimScore {
  double easy_accuracy = 0.0;
  double hard_accuracy = 0.0;
  std::size_t easy_total = 0;
  std::size_t hard_total = 0;

  double overall() const {
    std::size_t n = easy_total + hard_total;
    return n == 0 ? 0.0
                  : (easy_accuracy * easy_total + hard_accuracy * hard_total) / static_cast<double>(n);
  }
};

FunSimScore score_funsim(const std::vector<FunctionalSimilarityTest>& tests,
                         const TypeVectors& type_vectors);

struct ElectricalScore {
  std::map<Property, double> per_property;
  std::map<Property, std::size_t> counts;
  double macro_average = 0.0;  // mean over properties present
  double micro_average = 0.0;  // mean over all tests
};

ElectricalScore score_electrical(const std::vector<ElectricalSimilarityTest>& tests,
                                 const ArcVectors& arc_vectors, std::size_t k);

// ---------------------------------------------------------------------------
// Serialization (JSON lines, one test per line)
// ---------------------------------------------------------------------------

std::string to_jsonl(const std::vector<InvertingAnalogyTest>& tests);
std::string to_jsonl(const std::vector<FunctionalSimilarityTest>& tests);
std::string to_jsonl(const std::vector<ElectricalSimilarityTest>& tests);

std::vector<InvertingAnalogyTest> inverting_tests_from_jsonl(const std::string& text);
std::vector<FunctionalSimilarityTest> funsim_tests_from_jsonl(const std::string& text);
std::vector<ElectricalSimilarityTest> electrical_tests_from_jsonl(const std::string& text);

}  // namespace lib2vec
