#include "dymacl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dymacl {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

}  // namespace

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  Tensor t;
  t.values.assign(product(shape), 0.0);
  t.shape = std::move(shape);
  return t;
}

Tensor Tensor::vector(std::vector<double> v) {
  Tensor t;
  t.shape = {v.size()};
  t.values = std::move(v);
  return t;
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
  if (v.size() != rows * cols) throw ShapeError("matrix: rows*cols != value count");
  Tensor t;
  t.shape = {rows, cols};
  t.values = std::move(v);
  return t;
}

bool Tensor::all_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "identity";
}

std::string to_string(Aggregation a) {
  switch (a) {
    case Aggregation::Sum: return "sum";
    case Aggregation::Mean: return "mean";
    case Aggregation::Max: return "max";
  }
  return "sum";
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::Identity;
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  if (s == "sigmoid") return Activation::Sigmoid;
  throw ParseError("unknown activation: " + s);
}

Aggregation aggregation_from_string(const std::string& s) {
  if (s == "sum") return Aggregation::Sum;
  if (s == "mean") return Aggregation::Mean;
  if (s == "max") return Aggregation::Max;
  throw ParseError("unknown aggregation: " + s);
}

std::vector<double> softmax_with_temperature(const std::vector<double>& logits, double omega) {
  std::vector<double> out = log_softmax_with_temperature(logits, omega);
  for (double& v : out) v = std::exp(v);
  return out;
}

std::vector<double> log_softmax_with_temperature(const std::vector<double>& logits, double omega) {
  if (omega <= 0.0) throw DomainError("softmax temperature must be > 0");
  if (logits.empty()) throw ContractError("softmax of empty vector");
  double mx = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = (logits[i] - mx) / omega;
    denom += std::exp(out[i]);
  }
  double log_denom = std::log(denom);
  for (double& v : out) v -= log_denom;
  return out;
}

Tensor init_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  Tensor t = Tensor::zeros({rows, cols});
  for (double& v : t.values) v = rng.uniform(-bound, bound);
  t.requires_grad = true;
  return t;
}

Tensor init_vector(std::size_t n, std::size_t fan_in, Rng& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t = Tensor::zeros({n});
  for (double& v : t.values) v = rng.uniform(-bound, bound);
  t.requires_grad = true;
  return t;
}

// ---------------------------------------------------------------------------
// Graph

Graph::NodeId Graph::check(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
    throw ContractError("graph node id out of range");
  return id;
}

bool Graph::any_needs_grad(const std::vector<NodeId>& ids) const {
  for (NodeId id : ids) {
    if (nodes_[check(id)].needs_grad) return true;
  }
  return false;
}

Graph::NodeId Graph::push(Node n) {
  if (!n.value.all_finite()) throw NumericError("non-finite value in graph op");
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

Graph::NodeId Graph::leaf(const Tensor& t) {
  Node n;
  n.op = Op::Leaf;
  n.value = t;
  n.needs_grad = true;
  return push(std::move(n));
}

Graph::NodeId Graph::constant(const Tensor& t) {
  Node n;
  n.op = Op::Leaf;
  n.value = t;
  n.needs_grad = false;
  return push(std::move(n));
}

Graph::NodeId Graph::matvec(NodeId w, NodeId x) {
  const Tensor& wm = value(w);
  const Tensor& xv = value(x);
  if (wm.shape.size() != 2 || xv.shape.size() != 1 || wm.cols() != xv.size())
    throw ShapeError("matvec: expected (out,in) x (in)");
  Node n;
  n.op = Op::MatVec;
  n.inputs = {w, x};
  n.needs_grad = any_needs_grad(n.inputs);
  n.value = Tensor::zeros({wm.rows()});
  for (std::size_t r = 0; r < wm.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < wm.cols(); ++c) acc += wm.at(r, c) * xv.at(c);
    n.value.at(r) = acc;
  }
  return push(std::move(n));
}

Graph::NodeId Graph::add(NodeId a, NodeId b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (!av.same_shape(bv)) throw ShapeError("add: shape mismatch");
  Node n;
  n.op = Op::Add;
  n.inputs = {a, b};
  n.needs_grad = any_needs_grad(n.inputs);
  n.value = av;
  for (std::size_t i = 0; i < bv.size(); ++i) n.value.at(i) += bv.at(i);
  return push(std::move(n));
}

Graph::NodeId Graph::sub(NodeId a, NodeId b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (!av.same_shape(bv)) throw ShapeError("sub: shape mismatch");
  Node n;
  n.op = Op::Sub;
  n.inputs = {a, b};
  n.needs_grad = any_needs_grad(n.inputs);
  n.value = av;
  for (std::size_t i = 0; i < bv.size(); ++i) n.value.at(i) -= bv.at(i);
  return push(std::move(n));
}

Graph::NodeId Graph::mul(NodeId a, NodeId b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (!av.same_shape(bv)) throw ShapeError("mul: shape mismatch");
  Node n;
  n.op = Op::Mul;
  n.inputs = {a, b};
  n.needs_grad = any_needs_grad(n.inputs);
  n.value = av;
  for (std::size_t i = 0; i < bv.size(); ++i) n.value.at(i) *= bv.at(i);
  return push(std::move(n));
}

Graph::NodeId Graph::scale(NodeId a, double c) {
  Node n;
  n.op = Op::Scale;
  n.aux = c;
  n.inputs = {a};
  n.needs_grad = any_needs_grad(n.inputs);
  n.value = value(a);
  for (double& v : n.value.values) v *= c;
  return push(std::move(n));
}

Graph::NodeId Graph::add_scalar(NodeId a, double c) {
  Node n;
  n.op = Op::AddScalar;
  n.aux = c;
  n.inputs = {a};
  n.needs_grad = any_needs_grad(n.inputs);
  n.value = value(a);
  for (double& v : n.value.values) v += c;
  return push(std::move(n));
}

Graph::NodeId Graph::activation(NodeId a, Activation act) {
  Node n;
  n.op = Op::Act;
  n.act = act;
  n.inputs = {a};
  n.needs_grad = any_needs_grad(n.inputs);
  n.value = value(a);
  for (double& v : n.value.values) {
    switch (act) {
      case Activation::Identity: break;
      case Activation::Relu: v = v > 0.0 ? v : 0.0; break;
      case Activation::Tanh: v = std::tanh(v); break;
      case Activation::Sigmoid: v = 1.0 / (1.0 + std::exp(-v)); break;
    }
  }
  return push(std::move(n));
}

Graph::NodeId Graph::concat(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw ContractError("concat of zero parts");
  Node n;
  n.op = Op::Concat;
  n.inputs = parts;
  n.needs_grad = any_needs_grad(n.inputs);
  std::size_t total = 0;
  for (NodeId id : parts) {
    const Tensor& t = value(id);
    if (t.shape.size() > 1) throw ShapeError("concat: vectors only");
    total += t.size();
  }
  n.value = Tensor::zeros({total});
  std::size_t off = 0;
  for (NodeId id : parts) {
    const Tensor& t = value(id);
    std::copy(t.values.begin(), t.values.end(), n.value.values.begin() + off);
    off += t.size();
  }
  return push(std::move(n));
}

Graph::NodeId Graph::aggregate(Aggregation kind, const std::vector<NodeId>& items, std::size_t width) {
  Node n;
  n.op = Op::Agg;
  n.agg = kind;
  n.inputs = items;
  n.needs_grad = any_needs_grad(n.inputs);
  for (NodeId id : items) {
    const Tensor& t = value(id);
    if (t.shape.size() != 1 || t.size() != width)
      throw ShapeError("aggregate: all items must be vectors of the given width");
  }
  n.value = Tensor::zeros({width});
  if (!items.empty()) {
    switch (kind) {
      case Aggregation::Sum:
      case Aggregation::Mean: {
        for (NodeId id : items) {
          const Tensor& t = value(id);
          for (std::size_t i = 0; i < width; ++i) n.value.at(i) += t.at(i);
        }
        if (kind == Aggregation::Mean) {
          double inv = 1.0 / static_cast<double>(items.size());
          for (double& v : n.value.values) v *= inv;
        }
        break;
      }
      case Aggregation::Max: {
        const Tensor& first = value(items[0]);
        n.value.values = first.values;
        for (std::size_t k = 1; k < items.size(); ++k) {
          const Tensor& t = value(items[k]);
          for (std::size_t i = 0; i < width; ++i)
            if (t.at(i) > n.value.at(i)) n.value.at(i) = t.at(i);
        }
        break;
      }
    }
  }
  return push(std::move(n));
}

Graph::NodeId Graph::softmax_t(NodeId logits, double omega) {
  const Tensor& x = value(logits);
  if (x.shape.size() != 1) throw ShapeError("softmax_t: vector expected");
  Node n;
  n.op = Op::SoftmaxT;
  n.aux = omega;
  n.inputs = {logits};
  n.needs_grad = any_needs_grad(n.inputs);
  n.value = Tensor::vector(softmax_with_temperature(x.values, omega));
  return push(std::move(n));
}

Graph::NodeId Graph::log_softmax_t(NodeId logits, double omega) {
  const Tensor& x = value(logits);
  if (x.shape.size() != 1) throw ShapeError("log_softmax_t: vector expected");
  Node n;
  n.op = Op::LogSoftmaxT;
  n.aux = omega;
  n.inputs = {logits};
  n.needs_grad = any_needs_grad(n.inputs);
  n.value = Tensor::vector(log_softmax_with_temperature(x.values, omega));
  return push(std::move(n));
}

Graph::NodeId Graph::dot(NodeId a, NodeId b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (!av.same_shape(bv)) throw ShapeError("dot: shape mismatch");
  Node n;
  n.op = Op::Dot;
  n.inputs = {a, b};
  n.needs_grad = any_needs_grad(n.inputs);
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += av.at(i) * bv.at(i);
  n.value = Tensor::scalar(acc);
  return push(std::move(n));
}

Graph::NodeId Graph::sum(NodeId a) {
  Node n;
  n.op = Op::Sum;
  n.inputs = {a};
  n.needs_grad = any_needs_grad(n.inputs);
  double acc = 0.0;
  for (double v : value(a).values) acc += v;
  n.value = Tensor::scalar(acc);
  return push(std::move(n));
}

Graph::NodeId Graph::pick(NodeId v, std::size_t index) {
  const Tensor& t = value(v);
  if (index >= t.size()) throw ShapeError("pick: index out of range");
  Node n;
  n.op = Op::Pick;
  n.index = index;
  n.inputs = {v};
  n.needs_grad = any_needs_grad(n.inputs);
  n.value = Tensor::scalar(t.at(index));
  return push(std::move(n));
}

Graph::NodeId Graph::square(NodeId a) {
  Node n;
  n.op = Op::Square;
  n.inputs = {a};
  n.needs_grad = any_needs_grad(n.inputs);
  n.value = value(a);
  for (double& v : n.value.values) v *= v;
  return push(std::move(n));
}

Graph::NodeId Graph::dense(NodeId x, NodeId w, NodeId b, Activation act) {
  const Tensor& wm = value(w);
  const Tensor& bv = value(b);
  if (bv.size() != wm.rows()) throw ShapeError("dense: bias width mismatch");
  return activation(add(matvec(w, x), b), act);
}

Graph::NodeId Graph::gru_step(NodeId x, NodeId h, const GruNodes& p) {
  const Tensor& hv = value(h);
  if (value(p.uz).cols() != hv.size()) throw ShapeError("gru_step: hidden width mismatch");
  NodeId z = activation(add(add(matvec(p.wz, x), matvec(p.uz, h)), p.bz), Activation::Sigmoid);
  NodeId r = activation(add(add(matvec(p.wr, x), matvec(p.ur, h)), p.br), Activation::Sigmoid);
  NodeId rh = mul(r, h);
  NodeId hh = activation(add(add(matvec(p.wh, x), matvec(p.uh, rh)), p.bh), Activation::Tanh);
  NodeId one_minus_z = add_scalar(scale(z, -1.0), 1.0);
  return add(mul(one_minus_z, h), mul(z, hh));
}

void Graph::backward(NodeId loss) {
  check(loss);
  if (backward_done_) throw ContractError("backward called twice without rebuilding the graph");
  if (!nodes_[loss].value.is_scalar() && nodes_[loss].value.size() != 1)
    throw ContractError("backward: loss must be scalar");
  backward_done_ = true;

  for (Node& n : nodes_) {
    if (n.needs_grad) {
      n.grad_buf = Tensor::zeros(n.value.shape);
      n.grad_buf.values.assign(n.value.size(), 0.0);
    }
  }
  if (!nodes_[loss].needs_grad) return;  // loss is constant w.r.t. all leaves
  nodes_[loss].grad_buf.values[0] = 1.0;

  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.op == Op::Leaf) continue;
    if (n.grad_buf.values.empty()) continue;
    backward_node(n);
  }
}

void Graph::backward_node(Node& n) {
  auto g = [&](NodeId id) -> Tensor& { return nodes_[id].grad_buf; };
  auto wants = [&](NodeId id) { return nodes_[id].needs_grad; };
  const std::vector<double>& up = n.grad_buf.values;

  switch (n.op) {
    case Op::Leaf:
      break;
    case Op::MatVec: {
      NodeId w = n.inputs[0], x = n.inputs[1];
      const Tensor& wm = nodes_[w].value;
      const Tensor& xv = nodes_[x].value;
      if (wants(w)) {
        Tensor& gw = g(w);
        for (std::size_t r = 0; r < wm.rows(); ++r)
          for (std::size_t c = 0; c < wm.cols(); ++c) gw.at(r, c) += up[r] * xv.at(c);
      }
      if (wants(x)) {
        Tensor& gx = g(x);
        for (std::size_t r = 0; r < wm.rows(); ++r)
          for (std::size_t c = 0; c < wm.cols(); ++c) gx.at(c) += wm.at(r, c) * up[r];
      }
      break;
    }
    case Op::Add:
      for (int k = 0; k < 2; ++k) {
        NodeId in = n.inputs[k];
        if (!wants(in)) continue;
        Tensor& gi = g(in);
        for (std::size_t i = 0; i < up.size(); ++i) gi.at(i) += up[i];
      }
      break;
    case Op::Sub: {
      if (wants(n.inputs[0])) {
        Tensor& ga = g(n.inputs[0]);
        for (std::size_t i = 0; i < up.size(); ++i) ga.at(i) += up[i];
      }
      if (wants(n.inputs[1])) {
        Tensor& gb = g(n.inputs[1]);
        for (std::size_t i = 0; i < up.size(); ++i) gb.at(i) -= up[i];
      }
      break;
    }
    case Op::Mul: {
      NodeId a = n.inputs[0], b = n.inputs[1];
      if (wants(a)) {
        Tensor& ga = g(a);
        const Tensor& bv = nodes_[b].value;
        for (std::size_t i = 0; i < up.size(); ++i) ga.at(i) += up[i] * bv.at(i);
      }
      if (wants(b)) {
        Tensor& gb = g(b);
        const Tensor& av = nodes_[a].value;
        for (std::size_t i = 0; i < up.size(); ++i) gb.at(i) += up[i] * av.at(i);
      }
      break;
    }
    case Op::Scale: {
      if (wants(n.inputs[0])) {
        Tensor& ga = g(n.inputs[0]);
        for (std::size_t i = 0; i < up.size(); ++i) ga.at(i) += n.aux * up[i];
      }
      break;
    }
    case Op::AddScalar: {
      if (wants(n.inputs[0])) {
        Tensor& ga = g(n.inputs[0]);
        for (std::size_t i = 0; i < up.size(); ++i) ga.at(i) += up[i];
      }
      break;
    }
    case Op::Act: {
      if (!wants(n.inputs[0])) break;
      Tensor& ga = g(n.inputs[0]);
      const Tensor& x = nodes_[n.inputs[0]].value;
      const Tensor& y = n.value;
      for (std::size_t i = 0; i < up.size(); ++i) {
        double d = 1.0;
        switch (n.act) {
          case Activation::Identity: d = 1.0; break;
          case Activation::Relu: d = x.at(i) > 0.0 ? 1.0 : 0.0; break;
          case Activation::Tanh: d = 1.0 - y.at(i) * y.at(i); break;
          case Activation::Sigmoid: d = y.at(i) * (1.0 - y.at(i)); break;
        }
        ga.at(i) += d * up[i];
      }
      break;
    }
    case Op::Concat: {
      std::size_t off = 0;
      for (NodeId in : n.inputs) {
        const Tensor& t = nodes_[in].value;
        if (wants(in)) {
          Tensor& gi = g(in);
          for (std::size_t i = 0; i < t.size(); ++i) gi.at(i) += up[off + i];
        }
        off += t.size();
      }
      break;
    }
    case Op::Agg: {
      if (n.inputs.empty()) break;
      switch (n.agg) {
        case Aggregation::Sum:
          for (NodeId in : n.inputs) {
            if (!wants(in)) continue;
            Tensor& gi = g(in);
            for (std::size_t i = 0; i < up.size(); ++i) gi.at(i) += up[i];
          }
          break;
        case Aggregation::Mean: {
          double inv = 1.0 / static_cast<double>(n.inputs.size());
          for (NodeId in : n.inputs) {
            if (!wants(in)) continue;
            Tensor& gi = g(in);
            for (std::size_t i = 0; i < up.size(); ++i) gi.at(i) += inv * up[i];
          }
          break;
        }
        case Aggregation::Max: {
          // Route each element's gradient to the first item attaining the max.
          for (std::size_t i = 0; i < up.size(); ++i) {
            NodeId best = n.inputs[0];
            double best_v = nodes_[best].value.at(i);
            for (std::size_t k = 1; k < n.inputs.size(); ++k) {
              double v = nodes_[n.inputs[k]].value.at(i);
              if (v > best_v) {
                best_v = v;
                best = n.inputs[k];
              }
            }
            if (wants(best)) g(best).at(i) += up[i];
          }
          break;
        }
      }
      break;
    }
    case Op::SoftmaxT: {
      if (!wants(n.inputs[0])) break;
      Tensor& gx = g(n.inputs[0]);
      const Tensor& y = n.value;
      double dot_gy = 0.0;
      for (std::size_t i = 0; i < up.size(); ++i) dot_gy += up[i] * y.at(i);
      for (std::size_t i = 0; i < up.size(); ++i)
        gx.at(i) += y.at(i) * (up[i] - dot_gy) / n.aux;
      break;
    }
    case Op::LogSoftmaxT: {
      if (!wants(n.inputs[0])) break;
      Tensor& gx = g(n.inputs[0]);
      const Tensor& ls = n.value;
      double gsum = 0.0;
      for (double v : up) gsum += v;
      for (std::size_t i = 0; i < up.size(); ++i)
        gx.at(i) += (up[i] - std::exp(ls.at(i)) * gsum) / n.aux;
      break;
    }
    case Op::Dot: {
      double s = up[0];
      NodeId a = n.inputs[0], b = n.inputs[1];
      if (wants(a)) {
        Tensor& ga = g(a);
        const Tensor& bv = nodes_[b].value;
        for (std::size_t i = 0; i < bv.size(); ++i) ga.at(i) += s * bv.at(i);
      }
      if (wants(b)) {
        Tensor& gb = g(b);
        const Tensor& av = nodes_[a].value;
        for (std::size_t i = 0; i < av.size(); ++i) gb.at(i) += s * av.at(i);
      }
      break;
    }
    case Op::Sum: {
      if (!wants(n.inputs[0])) break;
      Tensor& ga = g(n.inputs[0]);
      for (std::size_t i = 0; i < ga.size(); ++i) ga.at(i) += up[0];
      break;
    }
    case Op::Pick: {
      if (!wants(n.inputs[0])) break;
      g(n.inputs[0]).at(n.index) += up[0];
      break;
    }
    case Op::Square: {
      if (!wants(n.inputs[0])) break;
      Tensor& ga = g(n.inputs[0]);
      const Tensor& x = nodes_[n.inputs[0]].value;
      for (std::size_t i = 0; i < up.size(); ++i) ga.at(i) += 2.0 * x.at(i) * up[i];
      break;
    }
  }
}

const Tensor& Graph::grad(NodeId id) const {
  const Node& n = nodes_[check(id)];
  if (!backward_done_) throw ContractError("grad queried before backward");
  if (!n.needs_grad) throw ContractError("grad queried on a constant node");
  return n.grad_buf;
}

// ---------------------------------------------------------------------------
// Optimizers

OptimizerKind optimizer_kind_from_string(const std::string& s) {
  if (s == "adam") return OptimizerKind::Adam;
  if (s == "rmsprop") return OptimizerKind::RmsProp;
  throw ParseError("unknown optimizer: " + s);
}

std::string to_string(OptimizerKind k) {
  return k == OptimizerKind::Adam ? "adam" : "rmsprop";
}

OptimizerState::OptimizerState(OptimizerConfig cfg, const std::vector<const Tensor*>& params)
    : cfg_(cfg) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Tensor* p : params) {
    m_.push_back(Tensor::zeros(p->shape));
    v_.push_back(Tensor::zeros(p->shape));
  }
}

void OptimizerState::step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw ShapeError("optimizer_step: parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->size() != m_[i].size() || grads[i].size() != m_[i].size())
      throw ShapeError("optimizer_step: parameter shape mismatch");
  }
  ++step_count_;
  if (cfg_.kind == OptimizerKind::Adam) {
    double b1t = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
    double b2t = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor& p = *params[i];
      const Tensor& grd = grads[i];
      for (std::size_t j = 0; j < p.size(); ++j) {
        double gj = grd.at(j);
        m_[i].at(j) = cfg_.beta1 * m_[i].at(j) + (1.0 - cfg_.beta1) * gj;
        v_[i].at(j) = cfg_.beta2 * v_[i].at(j) + (1.0 - cfg_.beta2) * gj * gj;
        double mhat = m_[i].at(j) / b1t;
        double vhat = v_[i].at(j) / b2t;
        p.at(j) -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
      }
    }
  } else {
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor& p = *params[i];
      const Tensor& grd = grads[i];
      for (std::size_t j = 0; j < p.size(); ++j) {
        double gj = grd.at(j);
        v_[i].at(j) = cfg_.alpha * v_[i].at(j) + (1.0 - cfg_.alpha) * gj * gj;
        p.at(j) -= cfg_.learning_rate * gj / (std::sqrt(v_[i].at(j)) + cfg_.epsilon);
      }
    }
  }
}

double clip_grad_norm(std::vector<Tensor>& grads, double max_norm) {
  double sq = 0.0;
  for (const Tensor& grd : grads) {
    for (double v : grd.values) {
      if (!std::isfinite(v)) throw NumericError("non-finite gradient in clip_grad_norm");
      sq += v * v;
    }
  }
  double norm = std::sqrt(sq);
  if (norm > max_norm) {
    double s = max_norm / norm;
    for (Tensor& grd : grads)
      for (double& v : grd.values) v *= s;
  }
  return norm;
}

}  // namespace dymacl
