#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "framespan/params.hpp"
#include "framespan/tensor.hpp"

namespace framespan {

// Handle into one Graph. Only valid for the graph that created it.
struct Node {
  int id = -1;
};

// Reverse-mode tape. Nodes are appended during the forward pass; inputs of a
// node always precede it, so a single reverse sweep over the node list is a
// valid backward pass. One graph = one forward/backward over one training
// unit; graphs over read-only shared parameters may run concurrently, but a
// single graph is not thread-safe.
class Graph {
 public:
  // ---- forward ops ----

  // Constant input; receives no gradient.
  Node input(Tensor t) {
    Rec r(Op::kInput);
    r.value = std::move(t);
    return push(std::move(r));
  }

  Node constant(double x) { return input(Tensor::scalar(x)); }

  // Leaf bound to a parameter; backward adds into p.grad. Memoized so that
  // repeated uses inside one graph share a node.
  Node parameter(Parameter& p) {
    auto it = param_nodes_.find(&p);
    if (it != param_nodes_.end()) return Node{it->second};
    Rec r(Op::kParam);
    r.value = p.value;
    r.param = &p;
    Node n = push(std::move(r));
    param_nodes_[&p] = n.id;
    return n;
  }

  // One row of a 2-D parameter table; backward adds into that row's grad.
  Node lookup(Parameter& table, int row) {
    if (!table.value.is_matrix())
      throw error(detail::cat("lookup: ", table.name, " is not a table, shape ", shape_str(table.value.shape)));
    if (row < 0 || row >= table.value.rows())
      throw error(detail::cat("lookup: row ", row, " out of range for ", table.name, " with ",
                              table.value.rows(), " rows"));
    auto key = std::make_pair(&table, row);
    auto it = lookup_nodes_.find(key);
    if (it != lookup_nodes_.end()) return Node{it->second};
    Rec r(Op::kLookup);
    const int d = table.value.cols();
    r.value = Tensor({d});
    for (int k = 0; k < d; ++k) r.value.at(k) = table.value.at(row, k);
    r.param = &table;
    r.row = row;
    Node n = push(std::move(r));
    lookup_nodes_[key] = n.id;
    return n;
  }

  // Row of a fixed table (pretrained embeddings); constant, no gradient.
  Node lookup_const(const Tensor& table, int row) {
    if (!table.is_matrix()) throw error("lookup_const: not a table");
    if (row < 0 || row >= table.rows())
      throw error(detail::cat("lookup_const: row ", row, " out of range (", table.rows(), " rows)"));
    const int d = table.cols();
    Tensor t({d});
    for (int k = 0; k < d; ++k) t.at(k) = table.at(row, k);
    return input(std::move(t));
  }

  Node add(Node a, Node b) { return elementwise2(Op::kAdd, "add", a, b); }
  Node sub(Node a, Node b) { return elementwise2(Op::kSub, "sub", a, b); }
  Node cmult(Node a, Node b) { return elementwise2(Op::kCMult, "cmult", a, b); }

  Node matvec(Node m, Node x) {
    const Tensor& mv = value(m);
    const Tensor& xv = value(x);
    if (!mv.is_matrix() || !xv.is_vector() || mv.cols() != static_cast<int>(xv.size()))
      throw error(detail::cat("matvec: shape mismatch ", shape_str(mv.shape), " vs ", shape_str(xv.shape)));
    Rec r(Op::kMatVec);
    r.args = {m.id, x.id};
    r.value = Tensor({mv.rows()});
    for (int i = 0; i < mv.rows(); ++i) {
      double acc = 0.0;
      for (int j = 0; j < mv.cols(); ++j) acc += mv.at(i, j) * xv.at(j);
      r.value.at(i) = acc;
    }
    return push(std::move(r));
  }

  Node dot(Node a, Node b) {
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    if (!av.is_vector() || !bv.is_vector() || av.size() != bv.size())
      throw error(detail::cat("dot: shape mismatch ", shape_str(av.shape), " vs ", shape_str(bv.shape)));
    Rec r(Op::kDot);
    r.args = {a.id, b.id};
    double acc = 0.0;
    for (size_t k = 0; k < av.size(); ++k) acc += av.v[k] * bv.v[k];
    r.value = Tensor::scalar(acc);
    return push(std::move(r));
  }

  Node concat(std::span<const Node> parts) {
    if (parts.empty()) throw error("concat: empty argument list");
    Rec r(Op::kConcat);
    int total = 0;
    for (Node p : parts) {
      const Tensor& t = value(p);
      if (!t.is_vector()) throw error(detail::cat("concat: non-vector operand ", shape_str(t.shape)));
      r.args.push_back(p.id);
      total += static_cast<int>(t.size());
    }
    r.value = Tensor({total});
    int off = 0;
    for (Node p : parts) {
      const Tensor& t = value(p);
      for (size_t k = 0; k < t.size(); ++k) r.value.at(off++) = t.v[k];
    }
    return push(std::move(r));
  }

  Node concat(std::initializer_list<Node> parts) {
    return concat(std::span<const Node>(parts.begin(), parts.size()));
  }

  Node relu(Node x) { return unary(Op::kRelu, x, [](double a) { return a > 0.0 ? a : 0.0; }); }

  Node logistic(Node x) {
    return unary(Op::kLogistic, x, [](double a) { return 1.0 / (1.0 + std::exp(-a)); });
  }

  Node tanh(Node x) { return unary(Op::kTanh, x, [](double a) { return std::tanh(a); }); }

  // log(sum_k exp(a_k)) over scalar nodes, computed with a max shift.
  Node logsumexp(std::span<const Node> xs) {
    if (xs.empty()) throw error("logsumexp: empty argument list");
    Rec r(Op::kLogSumExp);
    double mx = -std::numeric_limits<double>::infinity();
    for (Node x : xs) {
      r.args.push_back(x.id);
      mx = std::max(mx, scalar_check(x, "logsumexp"));
    }
    double acc = 0.0;
    for (Node x : xs) acc += std::exp(value(x).v[0] - mx);
    r.value = Tensor::scalar(mx + std::log(acc));
    return push(std::move(r));
  }

  Node logsumexp(std::initializer_list<Node> xs) {
    return logsumexp(std::span<const Node>(xs.begin(), xs.size()));
  }

  // Scalar element of a vector.
  Node pick(Node x, int index) {
    const Tensor& xv = value(x);
    if (!xv.is_vector())
      throw error(detail::cat("pick: operand is not a vector, shape ", shape_str(xv.shape)));
    if (index < 0 || index >= static_cast<int>(xv.size()))
      throw error(detail::cat("pick: index ", index, " out of range ", shape_str(xv.shape)));
    Rec r(Op::kPick);
    r.args = {x.id};
    r.row = index;
    r.value = Tensor::scalar(xv.at(index));
    return push(std::move(r));
  }

  Node scale(Node x, double c) {
    Rec r(Op::kScale);
    r.args = {x.id};
    r.c = c;
    r.value = value(x);
    for (double& w : r.value.v) w *= c;
    return push(std::move(r));
  }

  Node add_const(Node x, double c) {
    Rec r(Op::kAddConst);
    r.args = {x.id};
    r.value = value(x);
    for (double& w : r.value.v) w += c;
    return push(std::move(r));
  }

  // Sum of scalar nodes; empty list yields the constant 0.
  Node sum(std::span<const Node> xs) {
    if (xs.empty()) return constant(0.0);
    Rec r(Op::kSum);
    double acc = 0.0;
    for (Node x : xs) {
      r.args.push_back(x.id);
      acc += scalar_check(x, "sum");
    }
    r.value = Tensor::scalar(acc);
    return push(std::move(r));
  }

  Node sum(std::initializer_list<Node> xs) {
    return sum(std::span<const Node>(xs.begin(), xs.size()));
  }

  // ---- access ----

  const Tensor& value(Node n) const { return rec(n).value; }

  double scalar_value(Node n) const { return scalar_check(n, "scalar_value"); }

  // Node-level gradient, valid after backward().
  const Tensor& grad(Node n) const {
    if (!backward_done_) throw error("grad: backward has not run");
    return rec(n).grad;
  }

  size_t size() const { return nodes_.size(); }

  bool values_finite() const {
    for (const Rec& r : nodes_)
      if (!r.value.finite()) return false;
    return true;
  }

  // ---- backward ----

  // Reverse sweep from a designated scalar loss node. Gradients accumulate
  // into Parameter::grad for parameter and lookup leaves; parameters not
  // reachable from the loss are left untouched (zero if the caller cleared
  // them). May be called once per graph.
  void backward(Node loss) {
    const Tensor& lv = value(loss);
    if (!lv.is_scalar())
      throw error(detail::cat("backward: loss node must be scalar, got shape ", shape_str(lv.shape)));
    if (backward_done_) throw error("backward: already run on this graph");
    backward_done_ = true;

    for (Rec& r : nodes_) r.grad = Tensor(r.value.shape);
    nodes_[loss.id].grad.v[0] = 1.0;

    for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
      Rec& r = nodes_[id];
      const Tensor& g = r.grad;
      switch (r.op) {
        case Op::kInput:
          break;
        case Op::kParam:
          for (size_t k = 0; k < g.size(); ++k) r.param->grad.v[k] += g.v[k];
          break;
        case Op::kLookup: {
          const int d = r.param->value.cols();
          for (int k = 0; k < d; ++k) r.param->grad.at(r.row, k) += g.at(k);
          break;
        }
        case Op::kAdd:
          acc(r.args[0], g, +1.0);
          acc(r.args[1], g, +1.0);
          break;
        case Op::kSub:
          acc(r.args[0], g, +1.0);
          acc(r.args[1], g, -1.0);
          break;
        case Op::kCMult: {
          Rec& a = nodes_[r.args[0]];
          Rec& b = nodes_[r.args[1]];
          for (size_t k = 0; k < g.size(); ++k) {
            a.grad.v[k] += g.v[k] * b.value.v[k];
            b.grad.v[k] += g.v[k] * a.value.v[k];
          }
          break;
        }
        case Op::kMatVec: {
          Rec& m = nodes_[r.args[0]];
          Rec& x = nodes_[r.args[1]];
          const int rows = m.value.rows(), cols = m.value.cols();
          for (int i = 0; i < rows; ++i) {
            const double gi = g.at(i);
            for (int j = 0; j < cols; ++j) {
              m.grad.at(i, j) += gi * x.value.at(j);
              x.grad.at(j) += gi * m.value.at(i, j);
            }
          }
          break;
        }
        case Op::kDot: {
          Rec& a = nodes_[r.args[0]];
          Rec& b = nodes_[r.args[1]];
          const double gs = g.v[0];
          for (size_t k = 0; k < a.value.size(); ++k) {
            a.grad.v[k] += gs * b.value.v[k];
            b.grad.v[k] += gs * a.value.v[k];
          }
          break;
        }
        case Op::kConcat: {
          size_t off = 0;
          for (int a : r.args) {
            Rec& p = nodes_[a];
            for (size_t k = 0; k < p.value.size(); ++k) p.grad.v[k] += g.v[off + k];
            off += p.value.size();
          }
          break;
        }
        case Op::kRelu: {
          Rec& x = nodes_[r.args[0]];
          for (size_t k = 0; k < g.size(); ++k)
            if (x.value.v[k] > 0.0) x.grad.v[k] += g.v[k];
          break;
        }
        case Op::kLogistic: {
          Rec& x = nodes_[r.args[0]];
          for (size_t k = 0; k < g.size(); ++k) {
            const double y = r.value.v[k];
            x.grad.v[k] += g.v[k] * y * (1.0 - y);
          }
          break;
        }
        case Op::kTanh: {
          Rec& x = nodes_[r.args[0]];
          for (size_t k = 0; k < g.size(); ++k) {
            const double y = r.value.v[k];
            x.grad.v[k] += g.v[k] * (1.0 - y * y);
          }
          break;
        }
        case Op::kLogSumExp: {
          const double s = r.value.v[0];
          const double gs = g.v[0];
          for (int a : r.args) {
            Rec& x = nodes_[a];
            x.grad.v[0] += gs * std::exp(x.value.v[0] - s);
          }
          break;
        }
        case Op::kPick:
          nodes_[r.args[0]].grad.at(r.row) += g.v[0];
          break;
        case Op::kScale:
          acc(r.args[0], g, r.c);
          break;
        case Op::kAddConst:
          acc(r.args[0], g, 1.0);
          break;
        case Op::kSum:
          for (int a : r.args) nodes_[a].grad.v[0] += g.v[0];
          break;
      }
    }
  }

 private:
  enum class Op {
    kInput,
    kParam,
    kLookup,
    kAdd,
    kSub,
    kCMult,
    kMatVec,
    kDot,
    kConcat,
    kRelu,
    kLogistic,
    kTanh,
    kLogSumExp,
    kPick,
    kScale,
    kAddConst,
    kSum,
  };

  struct Rec {
    explicit Rec(Op o) : op(o) {}
    Op op;
    Tensor value;
    Tensor grad;
    std::vector<int> args;
    Parameter* param = nullptr;
    int row = -1;
    double c = 0.0;
  };

  Node push(Rec&& r) {
    nodes_.push_back(std::move(r));
    return Node{static_cast<int>(nodes_.size()) - 1};
  }

  const Rec& rec(Node n) const {
    if (n.id < 0 || n.id >= static_cast<int>(nodes_.size()))
      throw error(detail::cat("Graph: invalid node id ", n.id));
    return nodes_[n.id];
  }

  double scalar_check(Node n, const char* op) const {
    const Tensor& t = rec(n).value;
    if (!t.is_scalar())
      throw error(detail::cat(op, ": operand is not scalar, shape ", shape_str(t.shape)));
    return t.v[0];
  }

  Node elementwise2(Op op, const char* name, Node a, Node b) {
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    if (av.shape != bv.shape)
      throw error(detail::cat(name, ": shape mismatch ", shape_str(av.shape), " vs ", shape_str(bv.shape)));
    Rec r(op);
    r.args = {a.id, b.id};
    r.value = Tensor(av.shape);
    for (size_t k = 0; k < av.size(); ++k) {
      switch (op) {
        case Op::kAdd: r.value.v[k] = av.v[k] + bv.v[k]; break;
        case Op::kSub: r.value.v[k] = av.v[k] - bv.v[k]; break;
        case Op::kCMult: r.value.v[k] = av.v[k] * bv.v[k]; break;
        default: throw error("elementwise2: bad op");
      }
    }
    return push(std::move(r));
  }

  template <class F>
  Node unary(Op op, Node x, F f) {
    Rec r(op);
    r.args = {x.id};
    r.value = value(x);
    for (double& w : r.value.v) w = f(w);
    return push(std::move(r));
  }

  void acc(int arg, const Tensor& g, double c) {
    Rec& a = nodes_[arg];
    for (size_t k = 0; k < g.size(); ++k) a.grad.v[k] += c * g.v[k];
  }

  std::vector<Rec> nodes_;
  std::map<Parameter*, int> param_nodes_;
  std::map<std::pair<Parameter*, int>, int> lookup_nodes_;
  bool backward_done_ = false;
};

}  // namespace framespan
