#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "upbench/numerics/tensor.hpp"

namespace upbench::nn {

// A learnable tensor. Owned by a model's ParameterSet; graphs refer to it.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Index size() const { return value.size(); }
};

class BatchNormLayer;

enum class Mode { Train, Infer };

// Handle to a node inside a Graph.
struct Var {
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::size_t id = kNone;
  bool valid() const { return id != kNone; }
};

enum class OpKind {
  Input,
  Param,
  Constant,
  MatMul,
  Add,
  Sub,
  Mul,
  Div,
  AddRow,
  MulRow,
  MulCol,
  Scale,
  AddScalar,
  Elu,
  Sigmoid,
  Tanh,
  Exp,
  Log,
  Square,
  Sum,
  Mean,
  RowSum,
  ColMean,
  ConcatCols,
  SliceCols,
  Transpose,
  SoftmaxRows,
  Detach,
  Clip,
  GroupMean,
  FillCol,
  BatchNorm,
};

std::string_view op_name(OpKind kind);

using Feed = std::map<std::string, Tensor, std::less<>>;

// Static reverse-mode autodiff graph over dense 2-D tensors.
//
// Nodes are appended in construction order, which is also a valid
// topological order. forward() evaluates only the ancestors of the requested
// targets, so one graph can hold a training loss and inference outputs that
// need fewer inputs. backward() writes d(loss)/d(param) into Parameter::grad
// for every parameter in the graph (zero for parameters the loss does not
// reach).
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) = default;
  Graph& operator=(Graph&&) = default;

  // Leaves.
  Var input(std::string name, bool requires_grad = false);
  Var param(Parameter& p);
  Var constant(Tensor value);

  // Binary ops on equal shapes, except where noted.
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var add_row(Var a, Var row);   // a: n x d, row: 1 x d
  Var mul_row(Var a, Var row);   // a: n x d, row: 1 x d
  Var mul_col(Var a, Var col);   // a: n x d, col: n x 1

  // Unary elementwise ops.
  Var scale(Var a, double factor);
  Var add_scalar(Var a, double offset);
  Var elu(Var a);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var square(Var a);
  Var clip(Var a, double lo, double hi);

  // Reductions and reshaping.
  Var sum(Var a);        // -> 1 x 1
  Var mean(Var a);       // -> 1 x 1
  Var row_sum(Var a);    // n x d -> n x 1
  Var col_mean(Var a);   // n x d -> 1 x d
  Var concat_cols(const std::vector<Var>& parts);
  Var slice_cols(Var a, Index begin, Index count);
  Var transpose(Var a);
  Var softmax_rows(Var a);

  // Value passes through, gradient does not.
  Var detach(Var a);

  // Weighted column mean (w^T a) / sum(w) with w an n x 1 non-negative weight
  // column. Returns zeros (and counts an empty-group event) if sum(w) == 0.
  Var group_mean(Var a, Var weights);

  // n x 1 column filled with `value`, n taken from `like`.
  Var fill_col(Var like, double value);

  Var batchnorm(BatchNormLayer& layer, Var x);

  // Composites.
  Var neg(Var a) { return scale(a, -1.0); }
  Var one_minus(Var a) { return add_scalar(neg(a), 1.0); }
  Var mse(Var pred, Var target) { return mean(square(sub(pred, target))); }
  // Mean binary cross-entropy; `prob` is clipped to [1e-7, 1 - 1e-7].
  Var bce(Var prob, Var target);
  // Row-wise branch selection: t * if_one + (1 - t) * if_zero, t in {0,1}.
  Var select(Var t, Var if_one, Var if_zero);

  void forward(const Feed& inputs, std::span<const Var> targets, Mode mode = Mode::Train);
  void forward(const Feed& inputs, Var target, Mode mode = Mode::Train) {
    forward(inputs, std::span<const Var>(&target, 1), mode);
  }

  // Requires `loss` to be a 1x1 node evaluated by the latest forward().
  void backward(Var loss);

  const Tensor& value(Var v) const;
  // Gradient of a node after backward(); only nodes on a path from a
  // gradient-requiring leaf to the loss have one.
  const Tensor& grad(Var v) const;
  double scalar(Var v) const { return value(v)(0, 0); }

  // While frozen, detach nodes keep the value of the last unfrozen forward
  // pass, which makes the loss a function whose exact gradient is what
  // backward() computes. Used by finite-difference checks.
  void freeze_detached(bool frozen) { freeze_detached_ = frozen; }

  std::size_t size() const { return nodes_.size(); }
  std::vector<Parameter*> parameters() const;
  std::uint64_t empty_group_events() const { return empty_group_events_; }

 private:
  struct Node {
    OpKind op = OpKind::Input;
    std::vector<std::size_t> inputs;
    double a = 0.0;
    double b = 0.0;
    Index begin = 0;
    Index count = 0;
    std::string name;
    Parameter* param = nullptr;
    BatchNormLayer* bn = nullptr;
    bool requires_grad = false;
    Tensor value;
    Tensor grad;
    Tensor cache;       // op-specific saved tensor (e.g. BN normalized input)
    Tensor cache_aux;   // op-specific saved tensor (e.g. BN inverse std)
    std::uint64_t forward_generation = 0;
    std::uint64_t backward_generation = 0;
  };

  Var push(OpKind op, std::vector<std::size_t> inputs);
  Node& node(Var v);
  const Node& node(Var v) const;
  void evaluate(std::size_t id, const Feed& inputs);
  void propagate(std::size_t id);
  [[noreturn]] void shape_error(std::size_t id, const std::string& detail) const;

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
  std::uint64_t generation_ = 0;
  std::uint64_t backward_generation_ = 0;
  std::uint64_t empty_group_events_ = 0;
  bool warned_empty_group_ = false;
  bool freeze_detached_ = false;
  Mode mode_ = Mode::Train;
};

}  // namespace upbench::nn
