#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lib2vec/autodiff.hpp"
#include "lib2vec/liberty.hpp"

namespace lib2vec {

// Name <-> row-index mapping for cell and pin-name embedding tables.
struct Vocab {
  std::vector<std::string> cells;  // sorted
  std::vector<std::string> pins;   // sorted, shared across cells

  static Vocab from_library(const Library& lib);

  std::size_t cell_index(const std::string& name) const;
  std::size_t pin_index(const std::string& name) const;
};

// Named parameter tensors with paired gradient buffers.
class ParamStore {
 public:
  std::size_t add(const std::string& name, Tensor t);
  std::size_t size() const { return params_.size(); }
  Tensor& param(std::size_t i) { return params_[i]; }
  const Tensor& param(std::size_t i) const { return params_[i]; }
  Tensor& grad(std::size_t i) { return grads_[i]; }
  const std::string& name(std::size_t i) const { return names_[i]; }
  std::size_t index_of(const std::string& name) const;
  void zero_grads();

 private:
  std::vector<Tensor> params_;
  std::vector<Tensor> grads_;
  std::vector<std::string> names_;
  std::map<std::string, std::size_t> by_name_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled (AdamW)
};

class Adam {
 public:
  Adam(ParamStore& store, AdamConfig cfg = {});
  void step();  // applies accumulated gradients, then zeroes them

 private:
  ParamStore& store_;
  AdamConfig cfg_;
  std::vector<Tensor> m_, v_;
  std::vector<bool> decay_;
  std::uint64_t t_ = 0;
};

// One logical input pin with its logic value token.
struct PinValue {
  std::size_t pin = 0;  // index into Vocab::pins
  bool value = false;
};

// Functional model: per-cell embedding + shared pin embeddings + additive
// logic-value embeddings, single-head attention, two-layer heads.
class FunctionalModel {
 public:
  // hidden = 0 selects the default FCL hidden width (= d)
  FunctionalModel(Vocab vocab, std::size_t d, std::uint64_t seed, std::size_t hidden = 0);

  const Vocab& vocab() const { return vocab_; }
  std::size_t dim() const { return d_; }
  ParamStore& store() { return store_; }
  const ParamStore& store() const { return store_; }

  // Attention output for an output pin (pre-head); attn_node, when given,
  // receives the softmax node for weight inspection.
  int output_embedding(Tape& tape, std::size_t cell, std::size_t out_pin,
                       const std::vector<PinValue>& inputs, int* attn_node = nullptr) const;
  int logit(Tape& tape, std::size_t cell, std::size_t out_pin,
            const std::vector<PinValue>& inputs) const;
  int diff_logits(Tape& tape, std::size_t cell_a, std::size_t out_pin_a, std::size_t cell_b,
                  std::size_t out_pin_b, const std::vector<PinValue>& inputs) const;

  // Inference conveniences (fresh tape, no gradients kept).
  double predict_prob(const std::string& cell, const std::string& out_pin,
                      const std::map<std::string, bool>& assignment) const;
  int predict_diff_class(const std::string& cell_a, const std::string& out_pin_a,
                         const std::string& cell_b, const std::string& out_pin_b,
                         const std::map<std::string, bool>& assignment) const;  // {-1,0,1}

  std::vector<double> cell_vector(const std::string& cell) const;
  std::vector<PinValue> resolve(const std::map<std::string, bool>& assignment) const;

  std::size_t cell_emb, pin_emb, val_emb;
  std::size_t wq, wk, wv;
  std::size_t fo_w1, fo_b1, fo_w2, fo_b2;
  std::size_t fd_w1, fd_b1, fd_w2, fd_b2;

 private:
  Vocab vocab_;
  std::size_t d_;
  std::size_t hidden_;
  mutable ParamStore store_;
};

inline constexpr std::size_t kDefaultElecHidden = 64;

// Electrical model: property-specific cell embedding via Property-FCL, then
// attention over {property cell token, related input pin, output pin}.
class ElectricalModel {
 public:
  ElectricalModel(Vocab vocab, std::size_t d, std::size_t conditions, std::uint64_t seed,
                  std::size_t hidden = kDefaultElecHidden);

  const Vocab& vocab() const { return vocab_; }
  std::size_t dim() const { return d_; }
  std::size_t conditions() const { return conditions_; }
  ParamStore& store() { return store_; }
  const ParamStore& store() const { return store_; }

  int arc_embedding(Tape& tape, std::size_t cell, std::size_t out_pin, std::size_t related_pin,
                    Property property, int* attn_node = nullptr) const;
  int prediction(Tape& tape, std::size_t cell, std::size_t out_pin, std::size_t related_pin,
                 Property property) const;  // 1 x conditions
  int diff_prediction(Tape& tape, std::size_t cell_a, std::size_t out_a, std::size_t rel_a,
                      std::size_t cell_b, std::size_t out_b, std::size_t rel_b,
                      Property property) const;

  std::vector<double> arc_vector(const std::string& cell, const std::string& out_pin,
                                 const std::string& related_pin, Property property) const;
  std::vector<double> predict(const std::string& cell, const std::string& out_pin,
                              const std::string& related_pin, Property property) const;

  std::size_t cell_emb, pin_emb, prop_emb;
  std::size_t pf_w1, pf_b1, pf_w2, pf_b2;
  std::size_t wq, wk, wv;
  std::size_t eo_w1, eo_b1, eo_w2, eo_b2;
  std::size_t ed_w1, ed_b1, ed_w2, ed_b2;

 private:
  Vocab vocab_;
  std::size_t d_;
  std::size_t conditions_;
  std::size_t hidden_;
  mutable ParamStore store_;
};

// Versioned binary checkpoint: header + named little-endian float32 blobs,
// plus a JSON manifest (written next to it as <path>.json).
void save_checkpoint(const std::string& path, const ParamStore& store,
                     const std::string& manifest_json);
void load_checkpoint(const std::string& path, ParamStore& store);
std::string load_checkpoint_manifest(const std::string& path);

}  // namespace lib2vec
