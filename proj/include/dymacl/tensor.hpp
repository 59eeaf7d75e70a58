#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dymacl/errors.hpp"
#include "dymacl/rng.hpp"

namespace dymacl {

// Dense 64-bit float tensor. Rank 0 (scalar, stored as one value), 1 or 2 is
// all the network needs.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;
  bool requires_grad = false;

  static Tensor scalar(double v) { return Tensor{{}, {v}, false}; }
  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor vector(std::vector<double> v);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
  bool is_scalar() const { return values.size() == 1 && shape.empty(); }

  std::size_t rows() const { return shape.empty() ? 1 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(std::size_t i) { return values[i]; }
  double at(std::size_t i) const { return values[i]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }

  bool all_finite() const;
  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

enum class Activation { Identity, Relu, Tanh, Sigmoid };
enum class Aggregation { Sum, Mean, Max };

std::string to_string(Activation a);
std::string to_string(Aggregation a);
Activation activation_from_string(const std::string& s);
Aggregation aggregation_from_string(const std::string& s);

// Numerically stable softmax with temperature: exp(x_i/w) / sum_j exp(x_j/w),
// computed with a max shift. Throws DomainError for w <= 0.
std::vector<double> softmax_with_temperature(const std::vector<double>& logits, double omega);
// log(softmax_with_temperature(logits, omega)), stable form.
std::vector<double> log_softmax_with_temperature(const std::vector<double>& logits, double omega);

// Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
Tensor init_matrix(std::size_t rows, std::size_t cols, Rng& rng);
Tensor init_vector(std::size_t n, std::size_t fan_in, Rng& rng);

// Reverse-mode autodiff tape. Nodes are op records holding the op kind, the
// input node ids and the forward value; construction order is the topological
// order. Every op checks its output for NaN/Inf and throws NumericError.
class Graph {
 public:
  using NodeId = std::int32_t;

  // Leaf that participates in gradients.
  NodeId leaf(const Tensor& t);
  // Leaf treated as a constant (no gradient tracked through it).
  NodeId constant(const Tensor& t);
  NodeId constant_scalar(double v) { return constant(Tensor::scalar(v)); }
  NodeId constant_vector(std::vector<double> v) { return constant(Tensor::vector(std::move(v))); }

  // w: (out, in) matrix, x: (in) vector -> (out) vector.
  NodeId matvec(NodeId w, NodeId x);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);  // elementwise
  NodeId scale(NodeId a, double c);
  NodeId add_scalar(NodeId a, double c);
  NodeId activation(NodeId a, Activation act);
  NodeId concat(const std::vector<NodeId>& parts);
  // Set aggregation over equal-shape vectors. `width` defines the output
  // width when `items` is empty (result is a zero vector for all kinds).
  NodeId aggregate(Aggregation kind, const std::vector<NodeId>& items, std::size_t width);
  NodeId softmax_t(NodeId logits, double omega);
  NodeId log_softmax_t(NodeId logits, double omega);
  NodeId dot(NodeId a, NodeId b);  // scalar
  NodeId sum(NodeId a);            // scalar
  NodeId pick(NodeId v, std::size_t index);  // scalar v[index]
  NodeId square(NodeId a);

  // act(w x + b); shape-checked.
  NodeId dense(NodeId x, NodeId w, NodeId b, Activation act);

  struct GruNodes {
    NodeId wz, uz, bz;
    NodeId wr, ur, br;
    NodeId wh, uh, bh;
  };
  // Standard GRU cell:
  //   z = sigmoid(Wz x + Uz h + bz), r = sigmoid(Wr x + Ur h + br),
  //   hh = tanh(Wh x + Uh (r*h) + bh), h' = (1-z)*h + z*hh.
  NodeId gru_step(NodeId x, NodeId h, const GruNodes& p);

  const Tensor& value(NodeId id) const { return nodes_[check(id)].value; }
  std::size_t node_count() const { return nodes_.size(); }

  // Reverse-mode pass from a scalar loss. Calling it twice on the same graph
  // without rebuilding is a ContractError.
  void backward(NodeId loss);
  const Tensor& grad(NodeId id) const;

 private:
  enum class Op {
    Leaf, MatVec, Add, Sub, Mul, Scale, AddScalar, Act, Concat, Agg,
    SoftmaxT, LogSoftmaxT, Dot, Sum, Pick, Square
  };

  struct Node {
    Op op;
    Activation act = Activation::Identity;
    Aggregation agg = Aggregation::Sum;
    double aux = 0.0;       // scale factor, temperature, ...
    std::size_t index = 0;  // pick index
    std::vector<NodeId> inputs;
    Tensor value;
    Tensor grad_buf;
    bool needs_grad = false;
  };

  NodeId push(Node n);
  NodeId check(NodeId id) const;
  bool any_needs_grad(const std::vector<NodeId>& ids) const;
  void backward_node(Node& n);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

enum class OptimizerKind { Adam, RmsProp };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 1e-4;
  double beta1 = 0.9;    // Adam
  double beta2 = 0.999;  // Adam
  double alpha = 0.99;   // RMSProp smoothing
  double epsilon = 1e-8;
};

OptimizerKind optimizer_kind_from_string(const std::string& s);
std::string to_string(OptimizerKind k);

// Per-parameter moment buffers plus a step counter. Buffers are created to
// match the parameter shapes at construction and shape-checked on every step.
class OptimizerState {
 public:
  OptimizerState(OptimizerConfig cfg, const std::vector<const Tensor*>& params);
  OptimizerState(OptimizerConfig cfg, const std::vector<Tensor*>& params)
      : OptimizerState(cfg, std::vector<const Tensor*>(params.begin(), params.end())) {}

  void step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads);

  std::uint64_t step_count() const { return step_count_; }
  const OptimizerConfig& config() const { return cfg_; }

 private:
  OptimizerConfig cfg_;
  std::vector<Tensor> m_;  // Adam first moment / RMSProp square average
  std::vector<Tensor> v_;  // Adam second moment (unused for RMSProp)
  std::uint64_t step_count_ = 0;
};

// In-place global L2 norm clip; returns the pre-clip norm.
// Throws NumericError on non-finite gradients.
double clip_grad_norm(std::vector<Tensor>& grads, double max_norm);

}  // namespace dymacl
