#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lib2vec/datagen.hpp"
#include "lib2vec/model.hpp"
#include "lib2vec/testgen.hpp"

namespace lib2vec {

struct TrainConfig {
  std::size_t d = 32;
  std::uint64_t seed = 1;
  std::size_t functional_epochs = 200;
  std::size_t electrical_epochs = 100;
  std::size_t batch_size = 256;
  double lr = 1e-3;
  double weight_decay = 0.0;
  std::size_t elec_hidden = kDefaultElecHidden;
};

struct EmbeddingReport {
  std::size_t d = 0;
  std::uint64_t seed = 0;
  std::map<std::string, std::vector<double>> cell_vectors;  // functional, per cell
  TypeVectors type_vectors;                                 // centroids over member cells
  ArcVectors arc_vectors;                                   // electrical, per (arc, property)
  std::map<std::string, std::string> cell_types;
  std::string metadata_json;
};

// Per-epoch mean losses; throws NonFiniteLoss with epoch/batch context.
std::vector<double> train_functional(FunctionalModel& model, const FunctionalDatasets& data,
                                     const TrainConfig& cfg);
std::vector<double> train_electrical(ElectricalModel& model, const ElectricalDatasets& data,
                                     const TrainConfig& cfg);

// Fraction of FuncOut examples the model classifies correctly.
double func_out_accuracy(const FunctionalModel& model, const std::vector<FuncOutExample>& xs);

EmbeddingReport build_report(const Library& lib, const FunctionalModel& func,
                             const ElectricalModel* elec, const ResponseCache* cache,
                             const TrainConfig& cfg);

// Cell types ranked by distance to vec(x_inv) - vec(x) + vec(y); the three
// query types are excluded from the candidates.
std::vector<std::pair<std::string, double>> analogy(const TypeVectors& type_vectors,
                                                    const std::string& x, const std::string& x_inv,
                                                    const std::string& y);

// CSV export: one file per vector family (cells.csv, types.csv, arcs.csv),
// header "name,type,v0,...,v{d-1}", deterministic row order.
void export_vectors(const EmbeddingReport& report, const std::string& dir);

TypeVectors type_vectors_from_csv(const std::string& path);
ArcVectors arc_vectors_from_csv(const std::string& path);

// Seeded random vectors for baseline scoring.
TypeVectors random_type_vectors(const std::vector<std::string>& names, std::size_t d,
                                std::uint64_t seed);
ArcVectors random_arc_vectors(const std::vector<ArcPropKey>& keys, std::size_t d,
                              std::uint64_t seed);

// First principal component scores of a set of vectors (power iteration).
std::vector<double> pca_first_component(const std::vector<std::vector<double>>& vectors);

double spearman_rho(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace lib2vec
