#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lib2vec/errors.hpp"

namespace lib2vec {

// Dense row-major matrix of doubles. Vectors are 1 x n.
struct Tensor {
  std::size_t rows = 0, cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return v[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return v[i * cols + j]; }
  std::size_t size() const { return v.size(); }
  void zero() { std::fill(v.begin(), v.end(), 0.0); }
};

// Reverse-mode tape over the op set needed by the embedding models.
// Leaves reference external parameter tensors; backward() accumulates into the
// paired gradient tensors, so one pass per example composes into batch grads.
class Tape {
 public:
  int leaf(const Tensor* param, Tensor* grad);
  int constant(Tensor value);

  int row(int a, std::size_t i);                // select row i as 1 x cols
  int stack_rows(const std::vector<int>& ids);  // T row vectors -> T x d
  int concat_cols(int a, int b);                // 1 x (ca + cb)
  int matmul(int a, int b);                     // (r x k) * (k x c)
  int matmul_nt(int a, int b);                  // (r x k) * (c x k)^T
  int add(int a, int b);
  int sub(int a, int b);
  int scale(int a, double c);
  int tanh_op(int a);
  int softmax_row(int a);  // row-wise softmax

  // Loss heads; each returns a 1 x 1 scalar node.
  int bce_with_logit(int logit, int target01);
  int cross_entropy(int logits, std::size_t klass);
  int mse(int pred, const Tensor& target);

  const Tensor& value(int id) const { return nodes_[id].value; }
  void backward(int id, double seed = 1.0);

 private:
  enum class Op {
    Leaf, Const, Row, StackRows, ConcatCols, MatMul, MatMulNT, Add, Sub,
    Scale, Tanh, SoftmaxRow, BceLogit, CrossEntropy, Mse,
  };

  struct Node {
    Op op;
    std::vector<int> inputs;
    Tensor value;
    Tensor grad;
    // op-specific payload
    const Tensor* param = nullptr;
    Tensor* param_grad = nullptr;
    std::size_t index = 0;  // Row / CrossEntropy
    double scalar = 0;      // Scale / BceLogit target
    Tensor aux;             // Mse target
  };

  int push(Node n);
  std::vector<Node> nodes_;
};

}  // namespace lib2vec
