#include "upbench/numerics/graph.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "upbench/error.hpp"
#include "upbench/numerics/layers.hpp"

namespace upbench::nn {

namespace {

constexpr double kProbClip = 1e-7;

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::Input: return "input";
    case OpKind::Param: return "param";
    case OpKind::Constant: return "constant";
    case OpKind::MatMul: return "matmul";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::Div: return "div";
    case OpKind::AddRow: return "add_row";
    case OpKind::MulRow: return "mul_row";
    case OpKind::MulCol: return "mul_col";
    case OpKind::Scale: return "scale";
    case OpKind::AddScalar: return "add_scalar";
    case OpKind::Elu: return "elu";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::Tanh: return "tanh";
    case OpKind::Exp: return "exp";
    case OpKind::Log: return "log";
    case OpKind::Square: return "square";
    case OpKind::Sum: return "sum";
    case OpKind::Mean: return "mean";
    case OpKind::RowSum: return "row_sum";
    case OpKind::ColMean: return "col_mean";
    case OpKind::ConcatCols: return "concat_cols";
    case OpKind::SliceCols: return "slice_cols";
    case OpKind::Transpose: return "transpose";
    case OpKind::SoftmaxRows: return "softmax_rows";
    case OpKind::Detach: return "detach";
    case OpKind::Clip: return "clip";
    case OpKind::GroupMean: return "group_mean";
    case OpKind::FillCol: return "fill_col";
    case OpKind::BatchNorm: return "batchnorm";
  }
  return "unknown";
}

Graph::Node& Graph::node(Var v) {
  if (v.id >= nodes_.size()) throw ShapeError("invalid graph node handle");
  return nodes_[v.id];
}

const Graph::Node& Graph::node(Var v) const {
  if (v.id >= nodes_.size()) throw ShapeError("invalid graph node handle");
  return nodes_[v.id];
}

Var Graph::push(OpKind op, std::vector<std::size_t> inputs) {
  Node n;
  n.op = op;
  for (std::size_t in : inputs) {
    if (in >= nodes_.size()) throw ShapeError(std::string(op_name(op)) + ": invalid input handle");
    n.requires_grad = n.requires_grad || nodes_[in].requires_grad;
  }
  n.inputs = std::move(inputs);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Graph::input(std::string name, bool requires_grad) {
  Var v = push(OpKind::Input, {});
  nodes_[v.id].name = std::move(name);
  nodes_[v.id].requires_grad = requires_grad;
  return v;
}

Var Graph::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var{it->second};
  Var v = push(OpKind::Param, {});
  nodes_[v.id].param = &p;
  nodes_[v.id].name = p.name;
  nodes_[v.id].requires_grad = true;
  param_nodes_.emplace(&p, v.id);
  return v;
}

Var Graph::constant(Tensor value) {
  Var v = push(OpKind::Constant, {});
  nodes_[v.id].value = std::move(value);
  return v;
}

Var Graph::matmul(Var a, Var b) { return push(OpKind::MatMul, {a.id, b.id}); }
Var Graph::add(Var a, Var b) { return push(OpKind::Add, {a.id, b.id}); }
Var Graph::sub(Var a, Var b) { return push(OpKind::Sub, {a.id, b.id}); }
Var Graph::mul(Var a, Var b) { return push(OpKind::Mul, {a.id, b.id}); }
Var Graph::div(Var a, Var b) { return push(OpKind::Div, {a.id, b.id}); }
Var Graph::add_row(Var a, Var row) { return push(OpKind::AddRow, {a.id, row.id}); }
Var Graph::mul_row(Var a, Var row) { return push(OpKind::MulRow, {a.id, row.id}); }
Var Graph::mul_col(Var a, Var col) { return push(OpKind::MulCol, {a.id, col.id}); }

Var Graph::scale(Var a, double factor) {
  Var v = push(OpKind::Scale, {a.id});
  nodes_[v.id].a = factor;
  return v;
}

Var Graph::add_scalar(Var a, double offset) {
  Var v = push(OpKind::AddScalar, {a.id});
  nodes_[v.id].a = offset;
  return v;
}

Var Graph::elu(Var a) { return push(OpKind::Elu, {a.id}); }
Var Graph::sigmoid(Var a) { return push(OpKind::Sigmoid, {a.id}); }
Var Graph::tanh(Var a) { return push(OpKind::Tanh, {a.id}); }
Var Graph::exp(Var a) { return push(OpKind::Exp, {a.id}); }
Var Graph::log(Var a) { return push(OpKind::Log, {a.id}); }
Var Graph::square(Var a) { return push(OpKind::Square, {a.id}); }

Var Graph::clip(Var a, double lo, double hi) {
  if (!(lo <= hi)) throw ShapeError("clip: lo must not exceed hi");
  Var v = push(OpKind::Clip, {a.id});
  nodes_[v.id].a = lo;
  nodes_[v.id].b = hi;
  return v;
}

Var Graph::sum(Var a) { return push(OpKind::Sum, {a.id}); }
Var Graph::mean(Var a) { return push(OpKind::Mean, {a.id}); }
Var Graph::row_sum(Var a) { return push(OpKind::RowSum, {a.id}); }
Var Graph::col_mean(Var a) { return push(OpKind::ColMean, {a.id}); }

Var Graph::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  std::vector<std::size_t> ids;
  ids.reserve(parts.size());
  for (Var p : parts) ids.push_back(p.id);
  return push(OpKind::ConcatCols, std::move(ids));
}

Var Graph::slice_cols(Var a, Index begin, Index count) {
  if (begin < 0 || count < 1) throw ShapeError("slice_cols: invalid range");
  Var v = push(OpKind::SliceCols, {a.id});
  nodes_[v.id].begin = begin;
  nodes_[v.id].count = count;
  return v;
}

Var Graph::transpose(Var a) { return push(OpKind::Transpose, {a.id}); }
Var Graph::softmax_rows(Var a) { return push(OpKind::SoftmaxRows, {a.id}); }

Var Graph::detach(Var a) {
  Var v = push(OpKind::Detach, {a.id});
  nodes_[v.id].requires_grad = false;
  return v;
}

Var Graph::group_mean(Var a, Var weights) { return push(OpKind::GroupMean, {a.id, weights.id}); }

Var Graph::fill_col(Var like, double value) {
  Var v = push(OpKind::FillCol, {like.id});
  nodes_[v.id].a = value;
  nodes_[v.id].requires_grad = false;
  return v;
}

Var Graph::batchnorm(BatchNormLayer& layer, Var x) {
  Var gamma = param(layer.gamma());
  Var beta = param(layer.beta());
  Var v = push(OpKind::BatchNorm, {x.id, gamma.id, beta.id});
  nodes_[v.id].bn = &layer;
  return v;
}

Var Graph::bce(Var prob, Var target) {
  Var p = clip(prob, kProbClip, 1.0 - kProbClip);
  Var pos = mul(target, log(p));
  Var neg_part = mul(one_minus(target), log(one_minus(p)));
  return neg(mean(add(pos, neg_part)));
}

Var Graph::select(Var t, Var if_one, Var if_zero) {
  return add(mul(t, if_one), mul(one_minus(t), if_zero));
}

void Graph::shape_error(std::size_t id, const std::string& detail) const {
  throw ShapeError(std::string(op_name(nodes_[id].op)) + " (node " + std::to_string(id) +
                   "): " + detail);
}

const Tensor& Graph::value(Var v) const {
  const Node& n = node(v);
  if (n.op != OpKind::Constant && n.forward_generation != generation_) {
    throw ShapeError("node " + std::to_string(v.id) + " (" + std::string(op_name(n.op)) +
                     ") was not evaluated by the latest forward pass");
  }
  return n.value;
}

const Tensor& Graph::grad(Var v) const {
  const Node& n = node(v);
  if (n.backward_generation != backward_generation_ || backward_generation_ == 0) {
    throw ShapeError("node " + std::to_string(v.id) + " has no gradient from the latest backward");
  }
  return n.grad;
}

std::vector<Parameter*> Graph::parameters() const {
  std::vector<Parameter*> out;
  for (const Node& n : nodes_) {
    if (n.op == OpKind::Param) out.push_back(n.param);
  }
  return out;
}

void Graph::forward(const Feed& inputs, std::span<const Var> targets, Mode mode) {
  if (targets.empty()) throw ShapeError("forward: no targets requested");
  std::vector<char> needed(nodes_.size(), 0);
  std::size_t last = 0;
  for (Var t : targets) {
    if (t.id >= nodes_.size()) throw ShapeError("forward: invalid target handle");
    needed[t.id] = 1;
    last = std::max(last, t.id);
  }
  for (std::size_t id = last + 1; id-- > 0;) {
    if (!needed[id]) continue;
    for (std::size_t in : nodes_[id].inputs) needed[in] = 1;
  }
  ++generation_;
  mode_ = mode;
  for (std::size_t id = 0; id <= last; ++id) {
    if (needed[id]) evaluate(id, inputs);
  }
}

void Graph::evaluate(std::size_t id, const Feed& inputs) {
  Node& n = nodes_[id];
  auto in = [&](std::size_t k) -> const Tensor& { return nodes_[n.inputs[k]].value; };
  auto same_shape = [&](const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
      shape_error(id, "operand shapes differ: " + shape_string(a) + " vs " + shape_string(b));
    }
  };

  switch (n.op) {
    case OpKind::Input: {
      auto it = inputs.find(n.name);
      if (it == inputs.end()) shape_error(id, "missing input '" + n.name + "'");
      if (!it->second.allFinite()) {
        throw NonFiniteError("input '" + n.name + "' contains non-finite values");
      }
      n.value = it->second;
      break;
    }
    case OpKind::Param:
      n.value = n.param->value;
      break;
    case OpKind::Constant:
      break;
    case OpKind::MatMul:
      if (in(0).cols() != in(1).rows()) {
        shape_error(id, "inner dimensions differ: " + shape_string(in(0)) + " x " +
                            shape_string(in(1)));
      }
      n.value.noalias() = in(0) * in(1);
      break;
    case OpKind::Add:
      same_shape(in(0), in(1));
      n.value = in(0) + in(1);
      break;
    case OpKind::Sub:
      same_shape(in(0), in(1));
      n.value = in(0) - in(1);
      break;
    case OpKind::Mul:
      same_shape(in(0), in(1));
      n.value = in(0).cwiseProduct(in(1));
      break;
    case OpKind::Div:
      same_shape(in(0), in(1));
      n.value = in(0).cwiseQuotient(in(1));
      break;
    case OpKind::AddRow:
      if (in(1).rows() != 1 || in(1).cols() != in(0).cols()) {
        shape_error(id, "row operand " + shape_string(in(1)) + " does not match " +
                            shape_string(in(0)));
      }
      n.value = in(0).rowwise() + in(1).row(0);
      break;
    case OpKind::MulRow:
      if (in(1).rows() != 1 || in(1).cols() != in(0).cols()) {
        shape_error(id, "row operand " + shape_string(in(1)) + " does not match " +
                            shape_string(in(0)));
      }
      n.value = (in(0).array().rowwise() * in(1).row(0).array()).matrix();
      break;
    case OpKind::MulCol:
      if (in(1).cols() != 1 || in(1).rows() != in(0).rows()) {
        shape_error(id, "column operand " + shape_string(in(1)) + " does not match " +
                            shape_string(in(0)));
      }
      n.value = (in(0).array().colwise() * in(1).col(0).array()).matrix();
      break;
    case OpKind::Scale:
      n.value = n.a * in(0);
      break;
    case OpKind::AddScalar:
      n.value = (in(0).array() + n.a).matrix();
      break;
    case OpKind::Elu:
      n.value = in(0).unaryExpr([](double x) { return x > 0.0 ? x : std::expm1(x); });
      break;
    case OpKind::Sigmoid:
      n.value = in(0).unaryExpr([](double x) { return stable_sigmoid(x); });
      break;
    case OpKind::Tanh:
      n.value = in(0).array().tanh().matrix();
      break;
    case OpKind::Exp:
      n.value = in(0).array().exp().matrix();
      break;
    case OpKind::Log:
      if ((in(0).array() <= 0.0).any()) {
        throw NonFiniteError("log (node " + std::to_string(id) + "): non-positive argument");
      }
      n.value = in(0).array().log().matrix();
      break;
    case OpKind::Square:
      n.value = in(0).array().square().matrix();
      break;
    case OpKind::Clip:
      n.value = in(0).cwiseMax(n.a).cwiseMin(n.b);
      break;
    case OpKind::Sum:
      n.value = Tensor::Constant(1, 1, in(0).sum());
      break;
    case OpKind::Mean:
      if (in(0).size() == 0) shape_error(id, "mean of an empty tensor");
      n.value = Tensor::Constant(1, 1, in(0).mean());
      break;
    case OpKind::RowSum:
      n.value = in(0).rowwise().sum();
      break;
    case OpKind::ColMean:
      if (in(0).rows() == 0) shape_error(id, "column mean of an empty tensor");
      n.value = in(0).colwise().sum() / static_cast<double>(in(0).rows());
      break;
    case OpKind::ConcatCols: {
      const Index rows = in(0).rows();
      Index cols = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        if (in(k).rows() != rows) {
          shape_error(id, "row counts differ: " + shape_string(in(0)) + " vs " +
                              shape_string(in(k)));
        }
        cols += in(k).cols();
      }
      n.value.resize(rows, cols);
      Index offset = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        n.value.middleCols(offset, in(k).cols()) = in(k);
        offset += in(k).cols();
      }
      break;
    }
    case OpKind::SliceCols:
      if (n.begin + n.count > in(0).cols()) {
        shape_error(id, "slice [" + std::to_string(n.begin) + ", " +
                            std::to_string(n.begin + n.count) + ") out of range for " +
                            shape_string(in(0)));
      }
      n.value = in(0).middleCols(n.begin, n.count);
      break;
    case OpKind::Transpose:
      n.value = in(0).transpose();
      break;
    case OpKind::SoftmaxRows: {
      const Tensor& x = in(0);
      n.value.resize(x.rows(), x.cols());
      for (Index r = 0; r < x.rows(); ++r) {
        const double mx = x.row(r).maxCoeff();
        auto e = (x.row(r).array() - mx).exp();
        n.value.row(r) = (e / e.sum()).matrix();
      }
      break;
    }
    case OpKind::Detach:
      if (!(freeze_detached_ && n.value.rows() == in(0).rows() && n.value.cols() == in(0).cols())) {
        n.value = in(0);
      }
      break;
    case OpKind::GroupMean: {
      const Tensor& w = in(1);
      if (w.cols() != 1 || w.rows() != in(0).rows()) {
        shape_error(id, "weight column " + shape_string(w) + " does not match " +
                            shape_string(in(0)));
      }
      const double total = w.sum();
      n.a = total;
      if (total <= 0.0) {
        ++empty_group_events_;
        if (!warned_empty_group_) {
          warned_empty_group_ = true;
          std::cerr << "warning: group_mean over an empty group; contributing zeros\n";
        }
        n.value = Tensor::Zero(1, in(0).cols());
      } else {
        n.value.noalias() = w.transpose() * in(0);
        n.value /= total;
      }
      break;
    }
    case OpKind::FillCol:
      n.value = Tensor::Constant(in(0).rows(), 1, n.a);
      break;
    case OpKind::BatchNorm:
      n.value = n.bn->forward(in(0), mode_, &n.cache, &n.cache_aux);
      break;
  }
  n.forward_generation = generation_;
}

void Graph::backward(Var loss) {
  Node& root = node(loss);
  if (root.forward_generation != generation_ || generation_ == 0) {
    throw ShapeError("backward called before forward evaluated the loss node");
  }
  if (root.value.rows() != 1 || root.value.cols() != 1) {
    throw ShapeError("backward requires a scalar loss, got " + shape_string(root.value));
  }
  ++backward_generation_;
  for (Node& n : nodes_) {
    if (n.op == OpKind::Param) n.param->grad.setZero(n.param->value.rows(), n.param->value.cols());
  }
  if (!root.requires_grad) return;
  root.grad = Tensor::Ones(1, 1);
  root.backward_generation = backward_generation_;
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.backward_generation != backward_generation_) continue;
    if (n.op == OpKind::Param) {
      n.param->grad += n.grad;
      continue;
    }
    propagate(id);
  }
}

void Graph::propagate(std::size_t id) {
  Node& n = nodes_[id];
  const Tensor& g = n.grad;
  auto accumulate = [&](std::size_t k, const auto& contribution) {
    Node& target = nodes_[n.inputs[k]];
    if (!target.requires_grad) return;
    if (target.backward_generation != backward_generation_) {
      target.grad = contribution;
      target.backward_generation = backward_generation_;
    } else {
      target.grad += contribution;
    }
  };
  auto wants = [&](std::size_t k) { return nodes_[n.inputs[k]].requires_grad; };
  auto in = [&](std::size_t k) -> const Tensor& { return nodes_[n.inputs[k]].value; };

  switch (n.op) {
    case OpKind::Input:
    case OpKind::Param:
    case OpKind::Constant:
    case OpKind::Detach:
    case OpKind::FillCol:
      break;
    case OpKind::MatMul:
      if (wants(0)) accumulate(0, Tensor(g * in(1).transpose()));
      if (wants(1)) accumulate(1, Tensor(in(0).transpose() * g));
      break;
    case OpKind::Add:
      accumulate(0, g);
      accumulate(1, g);
      break;
    case OpKind::Sub:
      accumulate(0, g);
      if (wants(1)) accumulate(1, Tensor(-g));
      break;
    case OpKind::Mul:
      if (wants(0)) accumulate(0, Tensor(g.cwiseProduct(in(1))));
      if (wants(1)) accumulate(1, Tensor(g.cwiseProduct(in(0))));
      break;
    case OpKind::Div:
      if (wants(0)) accumulate(0, Tensor(g.cwiseQuotient(in(1))));
      if (wants(1)) {
        accumulate(1, Tensor(-(g.array() * in(0).array() / in(1).array().square()).matrix()));
      }
      break;
    case OpKind::AddRow:
      accumulate(0, g);
      if (wants(1)) accumulate(1, Tensor(g.colwise().sum()));
      break;
    case OpKind::MulRow:
      if (wants(0)) accumulate(0, Tensor((g.array().rowwise() * in(1).row(0).array()).matrix()));
      if (wants(1)) accumulate(1, Tensor(g.cwiseProduct(in(0)).colwise().sum()));
      break;
    case OpKind::MulCol:
      if (wants(0)) accumulate(0, Tensor((g.array().colwise() * in(1).col(0).array()).matrix()));
      if (wants(1)) accumulate(1, Tensor(g.cwiseProduct(in(0)).rowwise().sum()));
      break;
    case OpKind::Scale:
      accumulate(0, Tensor(n.a * g));
      break;
    case OpKind::AddScalar:
      accumulate(0, g);
      break;
    case OpKind::Elu:
      accumulate(0, Tensor(g.binaryExpr(in(0), [](double gv, double x) {
        return x > 0.0 ? gv : gv * std::exp(x);
      })));
      break;
    case OpKind::Sigmoid:
      accumulate(0, Tensor((g.array() * n.value.array() * (1.0 - n.value.array())).matrix()));
      break;
    case OpKind::Tanh:
      accumulate(0, Tensor((g.array() * (1.0 - n.value.array().square())).matrix()));
      break;
    case OpKind::Exp:
      accumulate(0, Tensor(g.cwiseProduct(n.value)));
      break;
    case OpKind::Log:
      accumulate(0, Tensor(g.cwiseQuotient(in(0))));
      break;
    case OpKind::Square:
      accumulate(0, Tensor(2.0 * g.cwiseProduct(in(0))));
      break;
    case OpKind::Clip: {
      const double lo = n.a;
      const double hi = n.b;
      accumulate(0, Tensor(g.binaryExpr(in(0), [lo, hi](double gv, double x) {
        return (x >= lo && x <= hi) ? gv : 0.0;
      })));
      break;
    }
    case OpKind::Sum:
      accumulate(0, Tensor(Tensor::Constant(in(0).rows(), in(0).cols(), g(0, 0))));
      break;
    case OpKind::Mean:
      accumulate(0, Tensor(Tensor::Constant(in(0).rows(), in(0).cols(),
                                            g(0, 0) / static_cast<double>(in(0).size()))));
      break;
    case OpKind::RowSum:
      accumulate(0, Tensor(g.col(0).replicate(1, in(0).cols())));
      break;
    case OpKind::ColMean:
      accumulate(0, Tensor(g.row(0).replicate(in(0).rows(), 1) /
                           static_cast<double>(in(0).rows())));
      break;
    case OpKind::ConcatCols: {
      Index offset = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        const Index cols = in(k).cols();
        if (wants(k)) accumulate(k, Tensor(g.middleCols(offset, cols)));
        offset += cols;
      }
      break;
    }
    case OpKind::SliceCols: {
      Tensor full = Tensor::Zero(in(0).rows(), in(0).cols());
      full.middleCols(n.begin, n.count) = g;
      accumulate(0, full);
      break;
    }
    case OpKind::Transpose:
      accumulate(0, Tensor(g.transpose()));
      break;
    case OpKind::SoftmaxRows: {
      const Tensor& y = n.value;
      Tensor inner = g.cwiseProduct(y).rowwise().sum();
      accumulate(0, Tensor(((g.colwise() - inner.col(0)).array() * y.array()).matrix()));
      break;
    }
    case OpKind::GroupMean:
      if (wants(0) && n.a > 0.0) accumulate(0, Tensor(in(1) * g / n.a));
      break;
    case OpKind::BatchNorm: {
      const Tensor& xhat = n.cache;
      const Tensor& inv = n.cache_aux;
      const Tensor& gamma = in(1);
      if (wants(1)) accumulate(1, Tensor(g.cwiseProduct(xhat).colwise().sum()));
      if (wants(2)) accumulate(2, Tensor(g.colwise().sum()));
      if (wants(0)) {
        Tensor dxhat = (g.array().rowwise() * gamma.row(0).array()).matrix();
        if (mode_ == Mode::Train) {
          const double rows = static_cast<double>(g.rows());
          Tensor sum_d = dxhat.colwise().sum();
          Tensor sum_dx = dxhat.cwiseProduct(xhat).colwise().sum();
          Tensor centered = (rows * dxhat).rowwise() - sum_d.row(0);
          centered -= (xhat.array().rowwise() * sum_dx.row(0).array()).matrix();
          accumulate(0, Tensor(((centered.array().rowwise() * inv.row(0).array()) / rows).matrix()));
        } else {
          accumulate(0, Tensor((dxhat.array().rowwise() * inv.row(0).array()).matrix()));
        }
      }
      break;
    }
  }
}

}  // namespace upbench::nn
