#include "lib2vec/autodiff.hpp"

#include <algorithm>
#include <cmath>

namespace lib2vec {

namespace {

void matmul_into(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate) {
  if (!accumulate) out.zero();
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k) {
      double av = a.at(i, k);
      if (av == 0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) out.at(i, j) += av * b.at(k, j);
    }
}

// out += a * b^T
void matmul_nt_into(const Tensor& a, const Tensor& b, Tensor& out) {
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.rows; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < a.cols; ++k) s += a.at(i, k) * b.at(j, k);
      out.at(i, j) += s;
    }
}

// out += a^T * b
void matmul_tn_into(const Tensor& a, const Tensor& b, Tensor& out) {
  for (std::size_t k = 0; k < a.rows; ++k)
    for (std::size_t i = 0; i < a.cols; ++i) {
      double av = a.at(k, i);
      if (av == 0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) out.at(i, j) += av * b.at(k, j);
    }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::leaf(const Tensor* param, Tensor* grad) {
  Node n;
  n.op = Op::Leaf;
  n.value = *param;
  n.param = param;
  n.param_grad = grad;
  return push(std::move(n));
}

int Tape::constant(Tensor value) {
  Node n;
  n.op = Op::Const;
  n.value = std::move(value);
  return push(std::move(n));
}

int Tape::row(int a, std::size_t i) {
  Node n;
  n.op = Op::Row;
  n.inputs = {a};
  n.index = i;
  const Tensor& src = nodes_[a].value;
  n.value = Tensor(1, src.cols);
  for (std::size_t j = 0; j < src.cols; ++j) n.value.at(0, j) = src.at(i, j);
  return push(std::move(n));
}

int Tape::stack_rows(const std::vector<int>& ids) {
  Node n;
  n.op = Op::StackRows;
  n.inputs = ids;
  std::size_t cols = nodes_[ids[0]].value.cols;
  n.value = Tensor(ids.size(), cols);
  for (std::size_t r = 0; r < ids.size(); ++r)
    for (std::size_t j = 0; j < cols; ++j) n.value.at(r, j) = nodes_[ids[r]].value.at(0, j);
  return push(std::move(n));
}

int Tape::concat_cols(int a, int b) {
  Node n;
  n.op = Op::ConcatCols;
  n.inputs = {a, b};
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  n.value = Tensor(1, ta.cols + tb.cols);
  for (std::size_t j = 0; j < ta.cols; ++j) n.value.at(0, j) = ta.at(0, j);
  for (std::size_t j = 0; j < tb.cols; ++j) n.value.at(0, ta.cols + j) = tb.at(0, j);
  return push(std::move(n));
}

int Tape::matmul(int a, int b) {
  Node n;
  n.op = Op::MatMul;
  n.inputs = {a, b};
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  n.value = Tensor(ta.rows, tb.cols);
  matmul_into(ta, tb, n.value, true);
  return push(std::move(n));
}

int Tape::matmul_nt(int a, int b) {
  Node n;
  n.op = Op::MatMulNT;
  n.inputs = {a, b};
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  n.value = Tensor(ta.rows, tb.rows);
  matmul_nt_into(ta, tb, n.value);
  return push(std::move(n));
}

int Tape::add(int a, int b) {
  Node n;
  n.op = Op::Add;
  n.inputs = {a, b};
  n.value = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value.v[i] += tb.v[i];
  return push(std::move(n));
}

int Tape::sub(int a, int b) {
  Node n;
  n.op = Op::Sub;
  n.inputs = {a, b};
  n.value = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value.v[i] -= tb.v[i];
  return push(std::move(n));
}

int Tape::scale(int a, double c) {
  Node n;
  n.op = Op::Scale;
  n.inputs = {a};
  n.scalar = c;
  n.value = nodes_[a].value;
  for (double& x : n.value.v) x *= c;
  return push(std::move(n));
}

int Tape::tanh_op(int a) {
  Node n;
  n.op = Op::Tanh;
  n.inputs = {a};
  n.value = nodes_[a].value;
  for (double& x : n.value.v) x = std::tanh(x);
  return push(std::move(n));
}

int Tape::softmax_row(int a) {
  Node n;
  n.op = Op::SoftmaxRow;
  n.inputs = {a};
  n.value = nodes_[a].value;
  for (std::size_t i = 0; i < n.value.rows; ++i) {
    double mx = n.value.at(i, 0);
    for (std::size_t j = 1; j < n.value.cols; ++j) mx = std::max(mx, n.value.at(i, j));
    double sum = 0;
    for (std::size_t j = 0; j < n.value.cols; ++j) {
      double e = std::exp(n.value.at(i, j) - mx);
      n.value.at(i, j) = e;
      sum += e;
    }
    for (std::size_t j = 0; j < n.value.cols; ++j) n.value.at(i, j) /= sum;
  }
  return push(std::move(n));
}

int Tape::bce_with_logit(int logit, int target01) {
  Node n;
  n.op = Op::BceLogit;
  n.inputs = {logit};
  n.scalar = static_cast<double>(target01);
  double z = nodes_[logit].value.at(0, 0);
  // log(1 + e^-|z|) formulation for numerical stability
  double loss = std::max(z, 0.0) - z * n.scalar + std::log1p(std::exp(-std::abs(z)));
  n.value = Tensor(1, 1);
  n.value.at(0, 0) = loss;
  return push(std::move(n));
}

int Tape::cross_entropy(int logits, std::size_t klass) {
  Node n;
  n.op = Op::CrossEntropy;
  n.inputs = {logits};
  n.index = klass;
  const Tensor& z = nodes_[logits].value;
  double mx = z.at(0, 0);
  for (std::size_t j = 1; j < z.cols; ++j) mx = std::max(mx, z.at(0, j));
  double lse = 0;
  for (std::size_t j = 0; j < z.cols; ++j) lse += std::exp(z.at(0, j) - mx);
  lse = mx + std::log(lse);
  n.value = Tensor(1, 1);
  n.value.at(0, 0) = lse - z.at(0, klass);
  return push(std::move(n));
}

int Tape::mse(int pred, const Tensor& target) {
  Node n;
  n.op = Op::Mse;
  n.inputs = {pred};
  n.aux = target;
  const Tensor& p = nodes_[pred].value;
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double d = p.v[i] - target.v[i];
    s += d * d;
  }
  n.value = Tensor(1, 1);
  n.value.at(0, 0) = s / static_cast<double>(p.size());
  return push(std::move(n));
}

void Tape::backward(int id, double seed) {
  for (auto& n : nodes_) {
    n.grad = Tensor(n.value.rows, n.value.cols);
  }
  nodes_[id].grad.at(0, 0) = seed;
  for (int i = id; i >= 0; --i) {
    Node& n = nodes_[i];
    bool nonzero = std::any_of(n.grad.v.begin(), n.grad.v.end(), [](double x) { return x != 0; });
    if (!nonzero) continue;
    switch (n.op) {
      case Op::Leaf:
        for (std::size_t j = 0; j < n.grad.size(); ++j) n.param_grad->v[j] += n.grad.v[j];
        break;
      case Op::Const:
        break;
      case Op::Row: {
        Tensor& g = nodes_[n.inputs[0]].grad;
        for (std::size_t j = 0; j < n.grad.cols; ++j) g.at(n.index, j) += n.grad.at(0, j);
        break;
      }
      case Op::StackRows:
        for (std::size_t r = 0; r < n.inputs.size(); ++r) {
          Tensor& g = nodes_[n.inputs[r]].grad;
          for (std::size_t j = 0; j < n.grad.cols; ++j) g.at(0, j) += n.grad.at(r, j);
        }
        break;
      case Op::ConcatCols: {
        Tensor& ga = nodes_[n.inputs[0]].grad;
        Tensor& gb = nodes_[n.inputs[1]].grad;
        for (std::size_t j = 0; j < ga.cols; ++j) ga.at(0, j) += n.grad.at(0, j);
        for (std::size_t j = 0; j < gb.cols; ++j) gb.at(0, j) += n.grad.at(0, ga.cols + j);
        break;
      }
      case Op::MatMul:
        matmul_nt_into(n.grad, nodes_[n.inputs[1]].value, nodes_[n.inputs[0]].grad);
        matmul_tn_into(nodes_[n.inputs[0]].value, n.grad, nodes_[n.inputs[1]].grad);
        break;
      case Op::MatMulNT:
        // C = A * B^T: dA += dC * B; dB += dC^T * A
        matmul_into(n.grad, nodes_[n.inputs[1]].value, nodes_[n.inputs[0]].grad, true);
        matmul_tn_into(n.grad, nodes_[n.inputs[0]].value, nodes_[n.inputs[1]].grad);
        break;
      case Op::Add:
        for (std::size_t j = 0; j < n.grad.size(); ++j) {
          nodes_[n.inputs[0]].grad.v[j] += n.grad.v[j];
          nodes_[n.inputs[1]].grad.v[j] += n.grad.v[j];
        }
        break;
      case Op::Sub:
        for (std::size_t j = 0; j < n.grad.size(); ++j) {
          nodes_[n.inputs[0]].grad.v[j] += n.grad.v[j];
          nodes_[n.inputs[1]].grad.v[j] -= n.grad.v[j];
        }
        break;
      case Op::Scale:
        for (std::size_t j = 0; j < n.grad.size(); ++j)
          nodes_[n.inputs[0]].grad.v[j] += n.scalar * n.grad.v[j];
        break;
      case Op::Tanh:
        for (std::size_t j = 0; j < n.grad.size(); ++j)
          nodes_[n.inputs[0]].grad.v[j] += n.grad.v[j] * (1.0 - n.value.v[j] * n.value.v[j]);
        break;
      case Op::SoftmaxRow: {
        Tensor& g = nodes_[n.inputs[0]].grad;
        for (std::size_t r = 0; r < n.value.rows; ++r) {
          double dot = 0;
          for (std::size_t j = 0; j < n.value.cols; ++j) dot += n.grad.at(r, j) * n.value.at(r, j);
          for (std::size_t j = 0; j < n.value.cols; ++j)
            g.at(r, j) += n.value.at(r, j) * (n.grad.at(r, j) - dot);
        }
        break;
      }
      case Op::BceLogit: {
        double z = nodes_[n.inputs[0]].value.at(0, 0);
        nodes_[n.inputs[0]].grad.at(0, 0) += n.grad.at(0, 0) * (sigmoid(z) - n.scalar);
        break;
      }
      case Op::CrossEntropy: {
        const Tensor& z = nodes_[n.inputs[0]].value;
        Tensor& g = nodes_[n.inputs[0]].grad;
        double mx = z.at(0, 0);
        for (std::size_t j = 1; j < z.cols; ++j) mx = std::max(mx, z.at(0, j));
        double sum = 0;
        for (std::size_t j = 0; j < z.cols; ++j) sum += std::exp(z.at(0, j) - mx);
        for (std::size_t j = 0; j < z.cols; ++j) {
          double p = std::exp(z.at(0, j) - mx) / sum;
          g.at(0, j) += n.grad.at(0, 0) * (p - (j == n.index ? 1.0 : 0.0));
        }
        break;
      }
      case Op::Mse: {
        const Tensor& p = nodes_[n.inputs[0]].value;
        Tensor& g = nodes_[n.inputs[0]].grad;
        double scale = 2.0 * n.grad.at(0, 0) / static_cast<double>(p.size());
        for (std::size_t j = 0; j < p.size(); ++j) g.v[j] += scale * (p.v[j] - n.aux.v[j]);
        break;
      }
    }
  }
}

}  // namespace lib2vec
