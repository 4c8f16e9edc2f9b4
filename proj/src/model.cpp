#include "lib2vec/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <set>

namespace lib2vec {

Vocab Vocab::from_library(const Library& lib) {
  Vocab v;
  std::set<std::string> pins;
  for (const auto& [name, cell] : lib.cells) {
    v.cells.push_back(name);
    for (const auto& p : cell.input_pins) pins.insert(p);
    for (const auto& p : cell.output_pins) pins.insert(p.name);
  }
  v.pins.assign(pins.begin(), pins.end());
  return v;
}

std::size_t Vocab::cell_index(const std::string& name) const {
  auto it = std::lower_bound(cells.begin(), cells.end(), name);
  if (it == cells.end() || *it != name) throw UnknownToken("unknown cell: " + name);
  return static_cast<std::size_t>(it - cells.begin());
}

std::size_t Vocab::pin_index(const std::string& name) const {
  auto it = std::lower_bound(pins.begin(), pins.end(), name);
  if (it == pins.end() || *it != name) throw UnknownToken("unknown pin: " + name);
  return static_cast<std::size_t>(it - pins.begin());
}

std::size_t ParamStore::add(const std::string& name, Tensor t) {
  if (by_name_.count(name)) throw Error("duplicate parameter " + name);
  grads_.emplace_back(t.rows, t.cols);
  params_.push_back(std::move(t));
  names_.push_back(name);
  by_name_[name] = params_.size() - 1;
  return params_.size() - 1;
}

std::size_t ParamStore::index_of(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw Error("unknown parameter " + name);
  return it->second;
}

void ParamStore::zero_grads() {
  for (auto& g : grads_) g.zero();
}

Adam::Adam(ParamStore& store, AdamConfig cfg) : store_(store), cfg_(cfg) {
  for (std::size_t i = 0; i < store.size(); ++i) {
    m_.emplace_back(store.param(i).rows, store.param(i).cols);
    v_.emplace_back(store.param(i).rows, store.param(i).cols);
    // decay attention/FCL weight matrices only; embeddings and biases are exempt
    const std::string& name = store.name(i);
    std::size_t dot = name.rfind('.');
    decay_.push_back(dot != std::string::npos && name[dot + 1] == 'w');
  }
}

void Adam::step() {
  ++t_;
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < store_.size(); ++i) {
    Tensor& p = store_.param(i);
    Tensor& g = store_.grad(i);
    for (std::size_t j = 0; j < p.size(); ++j) {
      m_[i].v[j] = cfg_.beta1 * m_[i].v[j] + (1 - cfg_.beta1) * g.v[j];
      v_[i].v[j] = cfg_.beta2 * v_[i].v[j] + (1 - cfg_.beta2) * g.v[j] * g.v[j];
      double mhat = m_[i].v[j] / bc1;
      double vhat = v_[i].v[j] / bc2;
      double decay = decay_[i] ? cfg_.weight_decay * p.v[j] : 0.0;
      p.v[j] -= cfg_.lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + decay);
    }
  }
  store_.zero_grads();
}

namespace {

// Portable uniform in [-scale, scale] derived directly from the generator.
class UniformInit {
 public:
  UniformInit(std::uint64_t seed, double scale) : rng_(seed), scale_(scale) {}
  Tensor make(std::size_t r, std::size_t c) {
    Tensor t(r, c);
    for (double& x : t.v) {
      double u = static_cast<double>(rng_() >> 11) * 0x1p-53;
      x = (2.0 * u - 1.0) * scale_;
    }
    return t;
  }

 private:
  std::mt19937_64 rng_;
  double scale_;
};

int fcl(Tape& tape, int x, int w1, int b1, int w2, int b2) {
  int h = tape.tanh_op(tape.add(tape.matmul(x, w1), b1));
  return tape.add(tape.matmul(h, w2), b2);
}

int attention(Tape& tape, int query, const std::vector<int>& tokens, int wq, int wk, int wv,
              std::size_t d, int* attn_node) {
  int keys = tape.matmul(tape.stack_rows(tokens), wk);
  int vals = tape.matmul(tape.stack_rows(tokens), wv);
  int q = tape.matmul(query, wq);
  int scores = tape.scale(tape.matmul_nt(q, keys), 1.0 / std::sqrt(static_cast<double>(d)));
  int weights = tape.softmax_row(scores);
  if (attn_node) *attn_node = weights;
  return tape.matmul(weights, vals);
}

}  // namespace

FunctionalModel::FunctionalModel(Vocab vocab, std::size_t d, std::uint64_t seed,
                                 std::size_t hidden)
    : vocab_(std::move(vocab)), d_(d), hidden_(hidden == 0 ? d : hidden) {
  UniformInit init(seed, 1.0 / std::sqrt(static_cast<double>(d)));
  cell_emb = store_.add("func.cell_emb", init.make(vocab_.cells.size(), d));
  pin_emb = store_.add("func.pin_emb", init.make(vocab_.pins.size(), d));
  val_emb = store_.add("func.val_emb", init.make(2, d));
  wq = store_.add("func.att.wq", init.make(d, d));
  wk = store_.add("func.att.wk", init.make(d, d));
  wv = store_.add("func.att.wv", init.make(d, d));
  fo_w1 = store_.add("func.out.w1", init.make(d, hidden_));
  fo_b1 = store_.add("func.out.b1", init.make(1, hidden_));
  fo_w2 = store_.add("func.out.w2", init.make(hidden_, 1));
  fo_b2 = store_.add("func.out.b2", init.make(1, 1));
  fd_w1 = store_.add("func.diff.w1", init.make(d, hidden_));
  fd_b1 = store_.add("func.diff.b1", init.make(1, hidden_));
  fd_w2 = store_.add("func.diff.w2", init.make(hidden_, 3));
  fd_b2 = store_.add("func.diff.b2", init.make(1, 3));
}

int FunctionalModel::output_embedding(Tape& tape, std::size_t cell, std::size_t out_pin,
                                      const std::vector<PinValue>& inputs, int* attn_node) const {
  ParamStore& store = store_;
  auto leaf = [&](std::size_t i) { return tape.leaf(&store.param(i), &store.grad(i)); };
  int cells = leaf(cell_emb);
  int pins = leaf(pin_emb);
  int vals = leaf(val_emb);
  std::vector<int> tokens;
  tokens.push_back(tape.row(cells, cell));
  for (const auto& pv : inputs)
    tokens.push_back(tape.add(tape.row(pins, pv.pin), tape.row(vals, pv.value ? 1 : 0)));
  int out_tok = tape.row(pins, out_pin);
  tokens.push_back(out_tok);
  return attention(tape, out_tok, tokens, leaf(wq), leaf(wk), leaf(wv), d_, attn_node);
}

int FunctionalModel::logit(Tape& tape, std::size_t cell, std::size_t out_pin,
                           const std::vector<PinValue>& inputs) const {
  ParamStore& store = store_;
  auto leaf = [&](std::size_t i) { return tape.leaf(&store.param(i), &store.grad(i)); };
  int emb = output_embedding(tape, cell, out_pin, inputs);
  return fcl(tape, emb, leaf(fo_w1), leaf(fo_b1), leaf(fo_w2), leaf(fo_b2));
}

int FunctionalModel::diff_logits(Tape& tape, std::size_t cell_a, std::size_t out_pin_a,
                                 std::size_t cell_b, std::size_t out_pin_b,
                                 const std::vector<PinValue>& inputs) const {
  ParamStore& store = store_;
  auto leaf = [&](std::size_t i) { return tape.leaf(&store.param(i), &store.grad(i)); };
  int emb_a = output_embedding(tape, cell_a, out_pin_a, inputs);
  int emb_b = output_embedding(tape, cell_b, out_pin_b, inputs);
  return fcl(tape, tape.sub(emb_a, emb_b), leaf(fd_w1), leaf(fd_b1), leaf(fd_w2), leaf(fd_b2));
}

std::vector<PinValue> FunctionalModel::resolve(const std::map<std::string, bool>& assignment) const {
  std::vector<PinValue> out;
  for (const auto& [pin, value] : assignment) out.push_back({vocab_.pin_index(pin), value});
  return out;
}

double FunctionalModel::predict_prob(const std::string& cell, const std::string& out_pin,
                                     const std::map<std::string, bool>& assignment) const {
  Tape tape;
  int z = logit(tape, vocab_.cell_index(cell), vocab_.pin_index(out_pin), resolve(assignment));
  return 1.0 / (1.0 + std::exp(-tape.value(z).at(0, 0)));
}

int FunctionalModel::predict_diff_class(const std::string& cell_a, const std::string& out_pin_a,
                                        const std::string& cell_b, const std::string& out_pin_b,
                                        const std::map<std::string, bool>& assignment) const {
  Tape tape;
  int z = diff_logits(tape, vocab_.cell_index(cell_a), vocab_.pin_index(out_pin_a),
                      vocab_.cell_index(cell_b), vocab_.pin_index(out_pin_b), resolve(assignment));
  const Tensor& logits = tape.value(z);
  std::size_t best = 0;
  for (std::size_t j = 1; j < 3; ++j)
    if (logits.at(0, j) > logits.at(0, best)) best = j;
  return static_cast<int>(best) - 1;  // classes ordered {-1, 0, 1}
}

std::vector<double> FunctionalModel::cell_vector(const std::string& cell) const {
  std::size_t i = vocab_.cell_index(cell);
  const Tensor& emb = store_.param(cell_emb);
  std::vector<double> out(d_);
  for (std::size_t j = 0; j < d_; ++j) out[j] = emb.at(i, j);
  return out;
}

ElectricalModel::ElectricalModel(Vocab vocab, std::size_t d, std::size_t conditions,
                                 std::uint64_t seed, std::size_t hidden)
    : vocab_(std::move(vocab)), d_(d), conditions_(conditions), hidden_(hidden) {
  UniformInit init(seed, 1.0 / std::sqrt(static_cast<double>(d)));
  cell_emb = store_.add("elec.cell_emb", init.make(vocab_.cells.size(), d));
  pin_emb = store_.add("elec.pin_emb", init.make(vocab_.pins.size(), d));
  prop_emb = store_.add("elec.prop_emb", init.make(kNumProperties, d));
  pf_w1 = store_.add("elec.prop_fcl.w1", init.make(2 * d, d));
  pf_b1 = store_.add("elec.prop_fcl.b1", init.make(1, d));
  pf_w2 = store_.add("elec.prop_fcl.w2", init.make(d, d));
  pf_b2 = store_.add("elec.prop_fcl.b2", init.make(1, d));
  wq = store_.add("elec.att.wq", init.make(d, d));
  wk = store_.add("elec.att.wk", init.make(d, d));
  wv = store_.add("elec.att.wv", init.make(d, d));
  eo_w1 = store_.add("elec.out.w1", init.make(d, hidden));
  eo_b1 = store_.add("elec.out.b1", init.make(1, hidden));
  eo_w2 = store_.add("elec.out.w2", init.make(hidden, conditions));
  eo_b2 = store_.add("elec.out.b2", init.make(1, conditions));
  ed_w1 = store_.add("elec.diff.w1", init.make(d, hidden));
  ed_b1 = store_.add("elec.diff.b1", init.make(1, hidden));
  ed_w2 = store_.add("elec.diff.w2", init.make(hidden, conditions));
  ed_b2 = store_.add("elec.diff.b2", init.make(1, conditions));
}

int ElectricalModel::arc_embedding(Tape& tape, std::size_t cell, std::size_t out_pin,
                                   std::size_t related_pin, Property property,
                                   int* attn_node) const {
  ParamStore& store = store_;
  auto leaf = [&](std::size_t i) { return tape.leaf(&store.param(i), &store.grad(i)); };
  int cells = leaf(cell_emb);
  int pins = leaf(pin_emb);
  int props = leaf(prop_emb);
  int joined = tape.concat_cols(tape.row(cells, cell),
                                tape.row(props, static_cast<std::size_t>(property)));
  int p_cell = fcl(tape, joined, leaf(pf_w1), leaf(pf_b1), leaf(pf_w2), leaf(pf_b2));
  std::vector<int> tokens{p_cell, tape.row(pins, related_pin), tape.row(pins, out_pin)};
  return attention(tape, p_cell, tokens, leaf(wq), leaf(wk), leaf(wv), d_, attn_node);
}

int ElectricalModel::prediction(Tape& tape, std::size_t cell, std::size_t out_pin,
                                std::size_t related_pin, Property property) const {
  ParamStore& store = store_;
  auto leaf = [&](std::size_t i) { return tape.leaf(&store.param(i), &store.grad(i)); };
  int emb = arc_embedding(tape, cell, out_pin, related_pin, property);
  return fcl(tape, emb, leaf(eo_w1), leaf(eo_b1), leaf(eo_w2), leaf(eo_b2));
}

int ElectricalModel::diff_prediction(Tape& tape, std::size_t cell_a, std::size_t out_a,
                                     std::size_t rel_a, std::size_t cell_b, std::size_t out_b,
                                     std::size_t rel_b, Property property) const {
  ParamStore& store = store_;
  auto leaf = [&](std::size_t i) { return tape.leaf(&store.param(i), &store.grad(i)); };
  int emb_a = arc_embedding(tape, cell_a, out_a, rel_a, property);
  int emb_b = arc_embedding(tape, cell_b, out_b, rel_b, property);
  return fcl(tape, tape.sub(emb_a, emb_b), leaf(ed_w1), leaf(ed_b1), leaf(ed_w2), leaf(ed_b2));
}

std::vector<double> ElectricalModel::arc_vector(const std::string& cell, const std::string& out_pin,
                                                const std::string& related_pin,
                                                Property property) const {
  Tape tape;
  int emb = arc_embedding(tape, vocab_.cell_index(cell), vocab_.pin_index(out_pin),
                          vocab_.pin_index(related_pin), property);
  return tape.value(emb).v;
}

std::vector<double> ElectricalModel::predict(const std::string& cell, const std::string& out_pin,
                                             const std::string& related_pin,
                                             Property property) const {
  Tape tape;
  int pred = prediction(tape, vocab_.cell_index(cell), vocab_.pin_index(out_pin),
                        vocab_.pin_index(related_pin), property);
  return tape.value(pred).v;
}

// ---------------------------------------------------------------------------
// Checkpoint IO
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'L', '2', 'V', 'C'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32(std::ofstream& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  write_u32(out, bits);
}

float read_f32(std::ifstream& in) {
  std::uint32_t bits = read_u32(in);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& store,
                     const std::string& manifest_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(store.size()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    const std::string& name = store.name(i);
    const Tensor& t = store.param(i);
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(out, static_cast<std::uint32_t>(t.rows));
    write_u32(out, static_cast<std::uint32_t>(t.cols));
    for (double x : t.v) write_f32(out, static_cast<float>(x));
  }
  std::ofstream manifest(path + ".json", std::ios::binary);
  if (!manifest) throw IoError("cannot write " + path + ".json");
  manifest << manifest_json;
}

void load_checkpoint(const std::string& path, ParamStore& store) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw IoError(path + " is not a lib2vec checkpoint");
  std::uint32_t version = read_u32(in);
  if (version != kVersion) throw IoError("unsupported checkpoint version");
  std::uint32_t count = read_u32(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t len = read_u32(in);
    std::string name(len, '\0');
    in.read(name.data(), len);
    std::uint32_t rows = read_u32(in);
    std::uint32_t cols = read_u32(in);
    Tensor& t = store.param(store.index_of(name));
    if (t.rows != rows || t.cols != cols)
      throw IoError("checkpoint tensor " + name + " shape mismatch: expected " +
                    std::to_string(t.rows) + "x" + std::to_string(t.cols) + ", got " +
                    std::to_string(rows) + "x" + std::to_string(cols));
    for (std::size_t j = 0; j < t.size(); ++j) t.v[j] = read_f32(in);
  }
}

std::string load_checkpoint_manifest(const std::string& path) {
  std::ifstream in(path + ".json", std::ios::binary);
  if (!in) throw IoError("cannot read " + path + ".json");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace lib2vec
