#include "lib2vec/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace lib2vec {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

double check_finite(double loss, std::size_t epoch, std::size_t batch) {
  if (!std::isfinite(loss))
    throw NonFiniteLoss("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                        std::to_string(batch));
  return loss;
}

}  // namespace

std::vector<double> train_functional(FunctionalModel& model, const FunctionalDatasets& data,
                                     const TrainConfig& cfg) {
  const Vocab& vocab = model.vocab();

  struct OutItem {
    std::size_t cell, out_pin;
    std::vector<PinValue> inputs;
    int target;
  };
  struct DiffItem {
    std::size_t cell_a, out_a, cell_b, out_b;
    std::vector<PinValue> inputs;
    std::size_t klass;  // target + 1
  };
  std::vector<OutItem> outs;
  for (const auto& x : data.out_examples)
    outs.push_back({vocab.cell_index(x.cell), vocab.pin_index(x.output_pin),
                    model.resolve(x.assignment), x.target});
  std::vector<DiffItem> diffs;
  for (const auto& x : data.diff_examples)
    diffs.push_back({vocab.cell_index(x.cell_a), vocab.pin_index(x.output_pin_a),
                     vocab.cell_index(x.cell_b), vocab.pin_index(x.output_pin_b),
                     model.resolve(x.assignment), static_cast<std::size_t>(x.target + 1)});

  std::vector<std::pair<int, std::size_t>> order;  // (0=out,1=diff, index)
  for (std::size_t i = 0; i < outs.size(); ++i) order.emplace_back(0, i);
  for (std::size_t i = 0; i < diffs.size(); ++i) order.emplace_back(1, i);

  Adam adam(model.store(), {.lr = cfg.lr, .weight_decay = cfg.weight_decay});
  std::vector<double> losses;
  for (std::size_t epoch = 0; epoch < cfg.functional_epochs; ++epoch) {
    std::mt19937_64 rng(cfg.seed * 0x100000001b3ull + epoch);
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
      std::size_t end = std::min(start + cfg.batch_size, order.size());
      double inv = 1.0 / static_cast<double>(end - start);
      double batch_loss = 0;
      for (std::size_t i = start; i < end; ++i) {
        Tape tape;
        int loss;
        if (order[i].first == 0) {
          const OutItem& it = outs[order[i].second];
          int z = model.logit(tape, it.cell, it.out_pin, it.inputs);
          loss = tape.bce_with_logit(z, it.target);
        } else {
          const DiffItem& it = diffs[order[i].second];
          int z = model.diff_logits(tape, it.cell_a, it.out_a, it.cell_b, it.out_b, it.inputs);
          loss = tape.cross_entropy(z, it.klass);
        }
        batch_loss += tape.value(loss).at(0, 0);
        tape.backward(loss, inv);
      }
      check_finite(batch_loss * inv, epoch, batch_index);
      epoch_loss += batch_loss;
      adam.step();
    }
    losses.push_back(order.empty() ? 0.0 : epoch_loss / static_cast<double>(order.size()));
  }
  return losses;
}

std::vector<double> train_electrical(ElectricalModel& model, const ElectricalDatasets& data,
                                     const TrainConfig& cfg) {
  const Vocab& vocab = model.vocab();

  struct OutItem {
    std::size_t cell, out_pin, rel_pin;
    Property property;
    Tensor target;
  };
  struct DiffItem {
    std::size_t cell_a, out_a, rel_a, cell_b, out_b, rel_b;
    Property property;
    Tensor target;
  };
  auto to_tensor = [](const std::vector<double>& v) {
    Tensor t(1, v.size());
    t.v = v;
    return t;
  };
  std::vector<OutItem> outs;
  for (const auto& x : data.out_examples)
    outs.push_back({vocab.cell_index(x.arc.cell), vocab.pin_index(x.arc.output_pin),
                    vocab.pin_index(x.arc.related_pin), x.property, to_tensor(x.target)});
  std::vector<DiffItem> diffs;
  for (const auto& x : data.diff_examples)
    diffs.push_back({vocab.cell_index(x.arc_a.cell), vocab.pin_index(x.arc_a.output_pin),
                     vocab.pin_index(x.arc_a.related_pin), vocab.cell_index(x.arc_b.cell),
                     vocab.pin_index(x.arc_b.output_pin), vocab.pin_index(x.arc_b.related_pin),
                     x.property, to_tensor(x.target)});

  std::vector<std::pair<int, std::size_t>> order;
  for (std::size_t i = 0; i < outs.size(); ++i) order.emplace_back(0, i);
  for (std::size_t i = 0; i < diffs.size(); ++i) order.emplace_back(1, i);

  Adam adam(model.store(), {.lr = cfg.lr, .weight_decay = cfg.weight_decay});
  std::vector<double> losses;
  for (std::size_t epoch = 0; epoch < cfg.electrical_epochs; ++epoch) {
    std::mt19937_64 rng(cfg.seed * 0x100000001b3ull + 0x517cc1b727220a95ull + epoch);
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
      std::size_t end = std::min(start + cfg.batch_size, order.size());
      double inv = 1.0 / static_cast<double>(end - start);
      double batch_loss = 0;
      for (std::size_t i = start; i < end; ++i) {
        Tape tape;
        int loss;
        if (order[i].first == 0) {
          const OutItem& it = outs[order[i].second];
          int pred = model.prediction(tape, it.cell, it.out_pin, it.rel_pin, it.property);
          loss = tape.mse(pred, it.target);
        } else {
          const DiffItem& it = diffs[order[i].second];
          int pred = model.diff_prediction(tape, it.cell_a, it.out_a, it.rel_a, it.cell_b,
                                           it.out_b, it.rel_b, it.property);
          loss = tape.mse(pred, it.target);
        }
        batch_loss += tape.value(loss).at(0, 0);
        tape.backward(loss, inv);
      }
      check_finite(batch_loss * inv, epoch, batch_index);
      epoch_loss += batch_loss;
      adam.step();
    }
    losses.push_back(order.empty() ? 0.0 : epoch_loss / static_cast<double>(order.size()));
  }
  return losses;
}

double func_out_accuracy(const FunctionalModel& model, const std::vector<FuncOutExample>& xs) {
  if (xs.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& x : xs) {
    double p = model.predict_prob(x.cell, x.output_pin, x.assignment);
    hits += (p >= 0.5 ? 1 : 0) == x.target;
  }
  return static_cast<double>(hits) / static_cast<double>(xs.size());
}

EmbeddingReport build_report(const Library& lib, const FunctionalModel& func,
                             const ElectricalModel* elec, const ResponseCache* cache,
                             const TrainConfig& cfg) {
  EmbeddingReport report;
  report.d = cfg.d;
  report.seed = cfg.seed;
  for (const auto& [name, cell] : lib.cells) {
    report.cell_vectors[name] = func.cell_vector(name);
    report.cell_types[name] = cell.cell_type;
  }
  for (const auto& group : cell_type_groups(lib)) {
    std::vector<double> centroid(cfg.d, 0.0);
    for (const auto& member : group.cells) {
      const auto& v = report.cell_vectors.at(member);
      for (std::size_t j = 0; j < centroid.size(); ++j) centroid[j] += v[j];
    }
    for (double& x : centroid) x /= static_cast<double>(group.cells.size());
    report.type_vectors[group.type] = std::move(centroid);
  }
  if (elec && cache) {
    for (const auto& [arc, resp] : cache->responses) {
      for (Property p : all_properties())
        report.arc_vectors[{arc, p}] =
            elec->arc_vector(arc.cell, arc.output_pin, arc.related_pin, p);
    }
  }
  json meta{{"d", cfg.d},
            {"seed", cfg.seed},
            {"functional_epochs", cfg.functional_epochs},
            {"electrical_epochs", cfg.electrical_epochs},
            {"cells", report.cell_vectors.size()},
            {"types", report.type_vectors.size()},
            {"arc_vectors", report.arc_vectors.size()}};
  report.metadata_json = meta.dump();
  return report;
}

std::vector<std::pair<std::string, double>> analogy(const TypeVectors& type_vectors,
                                                    const std::string& x, const std::string& x_inv,
                                                    const std::string& y) {
  auto get = [&](const std::string& name) -> const std::vector<double>& {
    auto it = type_vectors.find(name);
    if (it == type_vectors.end()) throw MissingVector("no vector for type " + name);
    return it->second;
  };
  const auto& vx = get(x);
  const auto& vxi = get(x_inv);
  const auto& vy = get(y);
  std::vector<double> target(vx.size());
  for (std::size_t j = 0; j < target.size(); ++j) target[j] = vxi[j] - vx[j] + vy[j];
  std::vector<std::pair<std::string, double>> ranked;
  for (const auto& [name, vec] : type_vectors) {
    if (name == x || name == x_inv || name == y) continue;
    ranked.emplace_back(name, euclidean_distance(target, vec));
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return std::tie(a.second, a.first) < std::tie(b.second, b.first); });
  return ranked;
}

namespace {

void write_csv(const std::string& path, const std::vector<std::array<std::string, 2>>& keys,
               const std::vector<const std::vector<double>*>& rows, std::size_t d) {
  std::ostringstream out;
  out << "name,type";
  for (std::size_t j = 0; j < d; ++j) out << ",v" << j;
  out << "\n";
  out.precision(17);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    out << keys[i][0] << "," << keys[i][1];
    for (double v : *rows[i]) out << "," << v;
    out << "\n";
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f << out.str();
}

std::vector<std::pair<std::array<std::string, 2>, std::vector<double>>> read_csv(
    const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path);
  std::string line;
  if (!std::getline(f, line)) throw IoError(path + " is empty");
  std::vector<std::pair<std::array<std::string, 2>, std::vector<double>>> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string item;
    std::array<std::string, 2> key;
    std::getline(ss, key[0], ',');
    std::getline(ss, key[1], ',');
    std::vector<double> vec;
    while (std::getline(ss, item, ',')) vec.push_back(std::stod(item));
    out.emplace_back(std::move(key), std::move(vec));
  }
  return out;
}

}  // namespace

void export_vectors(const EmbeddingReport& report, const std::string& dir) {
  fs::create_directories(dir);
  {
    std::vector<std::array<std::string, 2>> keys;
    std::vector<const std::vector<double>*> rows;
    for (const auto& [name, vec] : report.cell_vectors) {
      keys.push_back({name, report.cell_types.at(name)});
      rows.push_back(&vec);
    }
    write_csv((fs::path(dir) / "cells.csv").string(), keys, rows, report.d);
  }
  {
    std::vector<std::array<std::string, 2>> keys;
    std::vector<const std::vector<double>*> rows;
    for (const auto& [name, vec] : report.type_vectors) {
      keys.push_back({name, name});
      rows.push_back(&vec);
    }
    write_csv((fs::path(dir) / "types.csv").string(), keys, rows, report.d);
  }
  {
    std::vector<std::array<std::string, 2>> keys;
    std::vector<const std::vector<double>*> rows;
    for (const auto& [key, vec] : report.arc_vectors) {
      keys.push_back({key.arc.str(), property_name(key.property)});
      rows.push_back(&vec);
    }
    write_csv((fs::path(dir) / "arcs.csv").string(), keys, rows, report.d);
  }
}

TypeVectors type_vectors_from_csv(const std::string& path) {
  TypeVectors out;
  for (auto& [key, vec] : read_csv(path)) out[key[0]] = std::move(vec);
  return out;
}

ArcVectors arc_vectors_from_csv(const std::string& path) {
  ArcVectors out;
  for (auto& [key, vec] : read_csv(path)) {
    std::stringstream ss(key[0]);
    std::string cell, out_pin, rel;
    std::getline(ss, cell, '/');
    std::getline(ss, out_pin, '/');
    std::getline(ss, rel, '/');
    auto prop = property_from_name(key[1]);
    if (!prop) throw IoError("unknown property in " + path + ": " + key[1]);
    out[{{cell, out_pin, rel}, *prop}] = std::move(vec);
  }
  return out;
}

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t d) {
  std::vector<double> v(d);
  for (double& x : v) x = 2.0 * (static_cast<double>(rng() >> 11) * 0x1p-53) - 1.0;
  return v;
}

}  // namespace

TypeVectors random_type_vectors(const std::vector<std::string>& names, std::size_t d,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TypeVectors out;
  std::vector<std::string> sorted = names;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& name : sorted) out[name] = random_vector(rng, d);
  return out;
}

ArcVectors random_arc_vectors(const std::vector<ArcPropKey>& keys, std::size_t d,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ArcVectors out;
  std::vector<ArcPropKey> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& key : sorted) out[key] = random_vector(rng, d);
  return out;
}

std::vector<double> pca_first_component(const std::vector<std::vector<double>>& vectors) {
  if (vectors.empty()) return {};
  const std::size_t n = vectors.size(), d = vectors[0].size();
  std::vector<double> mean(d, 0.0);
  for (const auto& v : vectors)
    for (std::size_t j = 0; j < d; ++j) mean[j] += v[j] / static_cast<double>(n);
  std::vector<std::vector<double>> centered(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) centered[i][j] = vectors[i][j] - mean[j];

  // Power iteration on X^T X; deterministic start direction.
  std::vector<double> w(d, 1.0 / std::sqrt(static_cast<double>(d)));
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<double> next(d, 0.0);
    for (const auto& row : centered) {
      double dot = std::inner_product(row.begin(), row.end(), w.begin(), 0.0);
      for (std::size_t j = 0; j < d; ++j) next[j] += dot * row[j];
    }
    double norm = std::sqrt(std::inner_product(next.begin(), next.end(), next.begin(), 0.0));
    if (norm == 0) break;
    for (double& x : next) x /= norm;
    w = std::move(next);
  }
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i)
    scores[i] = std::inner_product(centered[i].begin(), centered[i].end(), w.begin(), 0.0);
  return scores;
}

double spearman_rho(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw Error("spearman_rho needs matched samples");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t k = 0; k < idx.size(); ++k) r[idx[k]] = static_cast<double>(k);
    return r;
  };
  auto ra = ranks(a), rb = ranks(b);
  double n = static_cast<double>(a.size());
  double ma = (n - 1) / 2, sum_ab = 0, sum_a2 = 0, sum_b2 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum_ab += (ra[i] - ma) * (rb[i] - ma);
    sum_a2 += (ra[i] - ma) * (ra[i] - ma);
    sum_b2 += (rb[i] - ma) * (rb[i] - ma);
  }
  return sum_ab / std::sqrt(sum_a2 * sum_b2);
}

}  // namespace lib2vec
