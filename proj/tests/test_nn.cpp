#include <cmath>
#include <filesystem>
#include <functional>

#include "doctest.h"
#include "lib2vec/model.hpp"

using namespace lib2vec;

namespace {

Vocab tiny_vocab() {
  Vocab v;
  v.cells = {"c0", "c1"};
  v.pins = {"A", "B", "Y"};
  return v;
}

// Max relative error between analytic gradients and central differences.
double gradcheck(ParamStore& store, const std::function<double(Tape&)>& loss_of) {
  store.zero_grads();
  {
    Tape tape;
    loss_of(tape);
  }
  // snapshot the analytic gradients; the probing passes below also backprop
  std::vector<Tensor> analytic;
  for (std::size_t p = 0; p < store.size(); ++p) analytic.push_back(store.grad(p));
  const double h = 1e-5;
  double worst = 0;
  for (std::size_t p = 0; p < store.size(); ++p) {
    Tensor& param = store.param(p);
    for (std::size_t j = 0; j < param.size(); ++j) {
      double saved = param.v[j];
      param.v[j] = saved + h;
      Tape tp;
      double up = loss_of(tp);
      param.v[j] = saved - h;
      Tape tm;
      double down = loss_of(tm);
      param.v[j] = saved;
      double numeric = (up - down) / (2 * h);
      double exact = analytic[p].v[j];
      double denom = std::max({1e-6, std::abs(numeric), std::abs(exact)});
      worst = std::max(worst, std::abs(numeric - exact) / denom);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("vocab lookups are sorted and strict") {
  Vocab v = tiny_vocab();
  CHECK(v.cell_index("c1") == 1);
  CHECK(v.pin_index("B") == 1);
  CHECK_THROWS_AS(v.cell_index("nope"), UnknownToken);
  CHECK_THROWS_AS(v.pin_index("nope"), UnknownToken);
}

TEST_CASE("functional forward paths pass a finite-difference gradient check") {
  FunctionalModel model(tiny_vocab(), 4, 11);
  std::vector<PinValue> inputs{{0, true}, {1, false}};

  SUBCASE("output logit with binary cross entropy") {
    auto loss = [&](Tape& tape) {
      int z = model.logit(tape, 0, 2, inputs);
      int l = tape.bce_with_logit(z, 1);
      tape.backward(l);
      return tape.value(l).at(0, 0);
    };
    CHECK(gradcheck(model.store(), loss) < 1e-4);
  }

  SUBCASE("difference logits with cross entropy") {
    auto loss = [&](Tape& tape) {
      int z = model.diff_logits(tape, 0, 2, 1, 2, inputs);
      int l = tape.cross_entropy(z, 2);
      tape.backward(l);
      return tape.value(l).at(0, 0);
    };
    CHECK(gradcheck(model.store(), loss) < 1e-4);
  }
}

TEST_CASE("electrical forward paths pass a finite-difference gradient check") {
  ElectricalModel model(tiny_vocab(), 4, 5, 13, 6);
  Tensor target(1, 5);
  for (std::size_t j = 0; j < 5; ++j) target.at(0, j) = 0.3 * static_cast<double>(j) - 0.4;

  SUBCASE("response prediction with mse") {
    auto loss = [&](Tape& tape) {
      int pred = model.prediction(tape, 0, 2, 0, Property::FallDelay);
      int l = tape.mse(pred, target);
      tape.backward(l);
      return tape.value(l).at(0, 0);
    };
    CHECK(gradcheck(model.store(), loss) < 1e-4);
  }

  SUBCASE("response difference with mse") {
    auto loss = [&](Tape& tape) {
      int pred = model.diff_prediction(tape, 0, 2, 0, 1, 2, 1, Property::RiseInternalPower);
      int l = tape.mse(pred, target);
      tape.backward(l);
      return tape.value(l).at(0, 0);
    };
    CHECK(gradcheck(model.store(), loss) < 1e-4);
  }
}

TEST_CASE("attention weights form a distribution over the tokens") {
  FunctionalModel model(tiny_vocab(), 8, 1);
  std::vector<PinValue> inputs{{0, false}, {1, true}};
  Tape tape;
  int attn = -1;
  model.output_embedding(tape, 1, 2, inputs, &attn);
  REQUIRE(attn >= 0);
  const Tensor& w = tape.value(attn);
  CHECK(w.rows == 1);
  CHECK(w.cols == inputs.size() + 2);  // cell token + inputs + output pin token
  double sum = 0;
  for (std::size_t j = 0; j < w.cols; ++j) {
    CHECK(w.at(0, j) >= 0.0);
    sum += w.at(0, j);
  }
  CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("initialization is deterministic per seed and bounded") {
  FunctionalModel a(tiny_vocab(), 8, 42);
  FunctionalModel b(tiny_vocab(), 8, 42);
  FunctionalModel c(tiny_vocab(), 8, 43);
  bool identical = true, differs = false;
  double bound = 1.0 / std::sqrt(8.0);
  for (std::size_t p = 0; p < a.store().size(); ++p) {
    for (std::size_t j = 0; j < a.store().param(p).size(); ++j) {
      identical &= a.store().param(p).v[j] == b.store().param(p).v[j];
      differs |= a.store().param(p).v[j] != c.store().param(p).v[j];
      CHECK(std::abs(a.store().param(p).v[j]) <= bound);
    }
  }
  CHECK(identical);
  CHECK(differs);
}

TEST_CASE("adam reduces the loss on a convex problem") {
  ParamStore store;
  Tensor init(1, 3);
  init.at(0, 0) = 1.0;
  init.at(0, 1) = -2.0;
  init.at(0, 2) = 0.5;
  std::size_t x = store.add("x", init);
  Tensor target(1, 3);
  Adam adam(store, {.lr = 0.05});
  auto loss_value = [&] {
    Tape tape;
    int p = tape.leaf(&store.param(x), &store.grad(x));
    int l = tape.mse(p, target);
    tape.backward(l);
    return tape.value(l).at(0, 0);
  };
  double first = loss_value();
  adam.step();
  for (int i = 0; i < 200; ++i) {
    loss_value();
    adam.step();
  }
  double last = loss_value();
  CHECK(last < first * 1e-2);
}

TEST_CASE("checkpoints round trip through float32 and validate shapes") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "lib2vec_nn_test";
  fs::create_directories(dir);
  std::string path = (dir / "model.ckpt").string();

  FunctionalModel model(tiny_vocab(), 8, 5);
  save_checkpoint(path, model.store(), "{\"model\":\"functional\"}");
  CHECK(load_checkpoint_manifest(path) == "{\"model\":\"functional\"}");

  FunctionalModel other(tiny_vocab(), 8, 99);
  load_checkpoint(path, other.store());
  for (std::size_t p = 0; p < model.store().size(); ++p)
    for (std::size_t j = 0; j < model.store().param(p).size(); ++j)
      CHECK(other.store().param(p).v[j] ==
            static_cast<double>(static_cast<float>(model.store().param(p).v[j])));

  FunctionalModel wrong_d(tiny_vocab(), 4, 5);
  CHECK_THROWS_AS(load_checkpoint(path, wrong_d.store()), IoError);
  CHECK_THROWS_AS(load_checkpoint((dir / "missing.ckpt").string(), other.store()), IoError);
  fs::remove_all(dir);
}

TEST_CASE("predictions are pure functions of the parameters") {
  FunctionalModel model(tiny_vocab(), 8, 21);
  std::map<std::string, bool> a{{"A", true}, {"B", false}};
  double p1 = model.predict_prob("c0", "Y", a);
  double p2 = model.predict_prob("c0", "Y", a);
  CHECK(p1 == p2);
  CHECK(p1 > 0.0);
  CHECK(p1 < 1.0);
  int k = model.predict_diff_class("c0", "Y", "c1", "Y", a);
  CHECK(k >= -1);
  CHECK(k <= 1);
  CHECK(model.predict_diff_class("c0", "Y", "c0", "Y", a) ==
        model.predict_diff_class("c0", "Y", "c0", "Y", a));
}
