#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "lib2vec/evalkit.hpp"
#include "support/toy_library.hpp"

using namespace lib2vec;
using testsupport::toy_library;

namespace {

const Library& lib() {
  static Library l = toy_library();
  return l;
}

}  // namespace

TEST_CASE("functional training reduces the loss and is seed-deterministic") {
  FunctionalDatasets data = gen_functional(lib());
  TrainConfig cfg;
  cfg.d = 8;
  cfg.seed = 3;
  cfg.functional_epochs = 15;
  cfg.batch_size = 64;

  FunctionalModel model(Vocab::from_library(lib()), cfg.d, cfg.seed);
  auto losses = train_functional(model, data, cfg);
  REQUIRE(losses.size() == 15);
  CHECK(losses.back() < losses.front());

  FunctionalModel again(Vocab::from_library(lib()), cfg.d, cfg.seed);
  auto losses2 = train_functional(again, data, cfg);
  CHECK(losses == losses2);
  for (std::size_t p = 0; p < model.store().size(); ++p)
    CHECK(model.store().param(p).v == again.store().param(p).v);
}

TEST_CASE("electrical training reduces the loss") {
  ConditionGrid grid = build_condition_grid(lib(), 3, 3);
  ResponseCache cache = build_response_cache(lib(), grid);
  ElectricalDatasets data = gen_electrical(lib(), cache);
  TrainConfig cfg;
  cfg.d = 8;
  cfg.seed = 3;
  cfg.electrical_epochs = 8;
  cfg.batch_size = 64;
  cfg.elec_hidden = 16;
  ElectricalModel model(Vocab::from_library(lib()), cfg.d, grid.size(), cfg.seed, cfg.elec_hidden);
  auto losses = train_electrical(model, data, cfg);
  REQUIRE(losses.size() == 8);
  CHECK(losses.back() < losses.front());
}

TEST_CASE("report aggregates type vectors as member centroids") {
  TrainConfig cfg;
  cfg.d = 6;
  cfg.seed = 1;
  FunctionalModel model(Vocab::from_library(lib()), cfg.d, cfg.seed);
  EmbeddingReport report = build_report(lib(), model, nullptr, nullptr, cfg);
  CHECK(report.cell_vectors.size() == 20);
  CHECK(report.type_vectors.size() == 8);
  CHECK(report.arc_vectors.empty());
  for (const auto& group : cell_type_groups(lib())) {
    std::vector<double> centroid(cfg.d, 0.0);
    for (const auto& member : group.cells)
      for (std::size_t j = 0; j < cfg.d; ++j)
        centroid[j] += report.cell_vectors.at(member)[j] / static_cast<double>(group.cells.size());
    for (std::size_t j = 0; j < cfg.d; ++j)
      CHECK(report.type_vectors.at(group.type)[j] == doctest::Approx(centroid[j]));
  }
}

TEST_CASE("analogy ranks all other types and excludes the query triple") {
  TypeVectors tv = random_type_vectors({"A", "B", "C", "D", "E"}, 4, 1);
  auto ranked = analogy(tv, "A", "B", "C");
  CHECK(ranked.size() == 2);
  for (const auto& [name, dist] : ranked) {
    CHECK(name != "A");
    CHECK(name != "B");
    CHECK(name != "C");
    CHECK(dist >= 0.0);
  }
  CHECK(ranked[0].second <= ranked[1].second);
  CHECK_THROWS_AS(analogy(tv, "A", "B", "missing"), MissingVector);
}

TEST_CASE("vector export and import round trip") {
  namespace fs = std::filesystem;
  TrainConfig cfg;
  cfg.d = 5;
  cfg.seed = 2;
  FunctionalModel func(Vocab::from_library(lib()), cfg.d, cfg.seed);
  ConditionGrid grid = build_condition_grid(lib(), 2, 2);
  ResponseCache cache = build_response_cache(lib(), grid);
  ElectricalModel elec(Vocab::from_library(lib()), cfg.d, grid.size(), cfg.seed, 8);
  EmbeddingReport report = build_report(lib(), func, &elec, &cache, cfg);

  fs::path dir = fs::temp_directory_path() / "lib2vec_evalkit_test";
  export_vectors(report, dir.string());
  TypeVectors types = type_vectors_from_csv((dir / "types.csv").string());
  REQUIRE(types.size() == report.type_vectors.size());
  for (const auto& [name, vec] : report.type_vectors) {
    REQUIRE(types.count(name));
    for (std::size_t j = 0; j < vec.size(); ++j)
      CHECK(types.at(name)[j] == doctest::Approx(vec[j]).epsilon(1e-12));
  }
  ArcVectors arcs = arc_vectors_from_csv((dir / "arcs.csv").string());
  CHECK(arcs.size() == report.arc_vectors.size());
  fs::remove_all(dir);
}

TEST_CASE("random baseline vectors are seeded") {
  auto a = random_type_vectors({"X", "Y"}, 3, 7);
  auto b = random_type_vectors({"Y", "X"}, 3, 7);
  CHECK(a == b);
  auto c = random_type_vectors({"X", "Y"}, 3, 8);
  CHECK(a != c);
  for (const auto& [name, v] : a)
    for (double x : v) CHECK(std::abs(x) <= 1.0);
}

TEST_CASE("first principal component recovers a one-dimensional ordering") {
  std::vector<std::vector<double>> vecs;
  std::vector<double> ts{0.5, 2.0, 1.0, 3.5, 0.1};
  for (double t : ts) vecs.push_back({t * 1.0 + 0.3, t * -2.0, t * 0.5 - 1.0});
  auto scores = pca_first_component(vecs);
  REQUIRE(scores.size() == ts.size());
  double rho = spearman_rho(scores, ts);
  CHECK(std::abs(rho) == doctest::Approx(1.0));
}

TEST_CASE("spearman rho on monotone and reversed sequences") {
  std::vector<double> a{1, 2, 3, 4, 5};
  std::vector<double> b{2, 4, 8, 16, 32};
  std::vector<double> r{5, 4, 3, 2, 1};
  CHECK(spearman_rho(a, b) == doctest::Approx(1.0));
  CHECK(spearman_rho(a, r) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(spearman_rho(a, {1.0}), Error);
}

TEST_CASE("func_out accuracy of an untrained model is between 0 and 1") {
  FunctionalDatasets data = gen_functional(lib());
  FunctionalModel model(Vocab::from_library(lib()), 4, 9);
  double acc = func_out_accuracy(model, data.out_examples);
  CHECK(acc >= 0.0);
  CHECK(acc <= 1.0);
}
