#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace jointqa {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

using Mask = std::vector<unsigned char>;  // 1 = real column, 0 = padded

/// One learnable tensor. Lives in a ParameterStore, referenced by graphs.
template <typename S>
struct Parameter {
  std::string name;
  Mat<S> value;
  Mat<S> grad;
  // Adam moments, managed by the optimizer.
  Mat<S> m;
  Mat<S> v;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

/// Owns parameters in creation order. Creation order fixes RNG consumption,
/// checkpoint layout, and optimizer iteration order.
template <typename S>
class ParameterStore {
 public:
  Parameter<S>& create(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    if (by_name_.count(name)) throw std::invalid_argument("duplicate parameter: " + name);
    auto p = std::make_unique<Parameter<S>>();
    p->name = name;
    p->value.setZero(rows, cols);
    p->grad.setZero(rows, cols);
    Parameter<S>* raw = p.get();
    by_name_[name] = raw;
    params_.push_back(std::move(p));
    return *raw;
  }

  Parameter<S>* find(const std::string& name) {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : it->second;
  }
  const Parameter<S>* find(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : it->second;
  }
  Parameter<S>& at(const std::string& name) {
    auto* p = find(name);
    if (!p) throw std::out_of_range("no such parameter: " + name);
    return *p;
  }

  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grads() {
    for (auto& p : params_) p->zero_grad();
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
    return n;
  }

 private:
  std::vector<std::unique_ptr<Parameter<S>>> params_;
  std::unordered_map<std::string, Parameter<S>*> by_name_;
};

template <typename S>
class Graph;

/// Handle to a node in a Graph. Cheap to copy.
template <typename S>
struct Expr {
  Graph<S>* g = nullptr;
  int i = -1;

  bool valid() const { return g != nullptr && i >= 0; }
  const Mat<S>& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

/// Dynamically built computation tape. Nodes are appended in topological
/// order; backward() walks them in reverse. One graph per forward pass.
template <typename S>
class Graph {
 public:
  struct Node {
    Mat<S> value;
    Mat<S> grad;  // allocated lazily during backward
    bool needs_grad = false;
    std::function<void(Graph&, int)> backprop;  // (graph, own index)
  };

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Expr<S> make(Mat<S> v, bool needs_grad, std::function<void(Graph&, int)> bp = {}) {
    Node n;
    n.value = std::move(v);
    n.needs_grad = needs_grad;
    if (needs_grad) n.backprop = std::move(bp);
    nodes_.push_back(std::move(n));
    return Expr<S>{this, static_cast<int>(nodes_.size()) - 1};
  }

  Expr<S> constant(Mat<S> v) { return make(std::move(v), false); }
  Expr<S> zeros(Eigen::Index r, Eigen::Index c) { return constant(Mat<S>::Zero(r, c)); }
  Expr<S> scalar(S x) {
    Mat<S> m(1, 1);
    m(0, 0) = x;
    return constant(std::move(m));
  }

  Expr<S> param(Parameter<S>& p) {
    Expr<S> e = make(p.value, true);
    bindings_.emplace_back(e.i, &p);
    return e;
  }

  /// Reverse-mode accumulation from a scalar node; flushes leaf gradients
  /// into their bound parameters (adding onto whatever is there).
  void backward(Expr<S> loss) {
    if (loss.g != this) throw std::invalid_argument("backward: expr from another graph");
    const auto& lv = nodes_[loss.i].value;
    if (lv.rows() != 1 || lv.cols() != 1)
      throw std::invalid_argument("backward: loss must be a 1x1 node");
    ensure_grad(loss.i);
    nodes_[loss.i].grad(0, 0) += S(1);
    for (int k = loss.i; k >= 0; --k) {
      Node& n = nodes_[k];
      if (n.needs_grad && n.backprop && n.grad.size() > 0) n.backprop(*this, k);
    }
    for (auto& [idx, p] : bindings_) {
      if (nodes_[idx].grad.size() > 0) p->grad += nodes_[idx].grad;
    }
  }

  const Mat<S>& value(int i) const { return nodes_[i].value; }
  std::size_t size() const { return nodes_.size(); }
  bool needs_grad(int i) const { return nodes_[i].needs_grad; }

  void ensure_grad(int i) {
    Node& n = nodes_[i];
    if (n.grad.size() == 0) n.grad.setZero(n.value.rows(), n.value.cols());
  }

  /// Adds `delta` into node i's gradient (no-op for non-grad nodes).
  template <typename D>
  void accum(int i, const D& delta) {
    if (!nodes_[i].needs_grad) return;
    ensure_grad(i);
    nodes_[i].grad += delta;
  }

  const Mat<S>& grad(int i) {
    ensure_grad(i);
    return nodes_[i].grad;
  }

  Mat<S>& grad_ref(int i) {
    ensure_grad(i);
    return nodes_[i].grad;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<std::pair<int, Parameter<S>*>> bindings_;
};

template <typename S>
const Mat<S>& Expr<S>::value() const {
  return g->value(i);
}

namespace detail {
inline void gcheck(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}
template <typename S>
Graph<S>& same_graph(Expr<S> a, Expr<S> b) {
  gcheck(a.g == b.g, "expressions belong to different graphs");
  return *a.g;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Primitive ops. Backprop closures capture indices and op constants only;
// values and grads are read back through the graph at backward time.
// ---------------------------------------------------------------------------

template <typename S>
Expr<S> matmul(Expr<S> a, Expr<S> b) {
  Graph<S>& g = detail::same_graph(a, b);
  detail::gcheck(a.value().cols() == b.value().rows(), "matmul: inner dims disagree");
  bool ng = g.needs_grad(a.i) || g.needs_grad(b.i);
  int ai = a.i, bi = b.i;
  return g.make(a.value() * b.value(), ng, [ai, bi](Graph<S>& gr, int self) {
    const Mat<S>& dy = gr.grad(self);
    gr.accum(ai, dy * gr.value(bi).transpose());
    gr.accum(bi, gr.value(ai).transpose() * dy);
  });
}

template <typename S>
Expr<S> add(Expr<S> a, Expr<S> b) {
  Graph<S>& g = detail::same_graph(a, b);
  detail::gcheck(a.rows() == b.rows() && a.cols() == b.cols(), "add: shape mismatch");
  bool ng = g.needs_grad(a.i) || g.needs_grad(b.i);
  int ai = a.i, bi = b.i;
  return g.make(a.value() + b.value(), ng, [ai, bi](Graph<S>& gr, int self) {
    const Mat<S>& dy = gr.grad(self);
    gr.accum(ai, dy);
    gr.accum(bi, dy);
  });
}

template <typename S>
Expr<S> sub(Expr<S> a, Expr<S> b) {
  Graph<S>& g = detail::same_graph(a, b);
  detail::gcheck(a.rows() == b.rows() && a.cols() == b.cols(), "sub: shape mismatch");
  bool ng = g.needs_grad(a.i) || g.needs_grad(b.i);
  int ai = a.i, bi = b.i;
  return g.make(a.value() - b.value(), ng, [ai, bi](Graph<S>& gr, int self) {
    const Mat<S>& dy = gr.grad(self);
    gr.accum(ai, dy);
    gr.accum(bi, -dy);
  });
}

/// Elementwise (Hadamard) product.
template <typename S>
Expr<S> cmul(Expr<S> a, Expr<S> b) {
  Graph<S>& g = detail::same_graph(a, b);
  detail::gcheck(a.rows() == b.rows() && a.cols() == b.cols(), "cmul: shape mismatch");
  bool ng = g.needs_grad(a.i) || g.needs_grad(b.i);
  int ai = a.i, bi = b.i;
  return g.make(a.value().cwiseProduct(b.value()), ng, [ai, bi](Graph<S>& gr, int self) {
    const Mat<S>& dy = gr.grad(self);
    gr.accum(ai, dy.cwiseProduct(gr.value(bi)));
    gr.accum(bi, dy.cwiseProduct(gr.value(ai)));
  });
}

template <typename S>
Expr<S> scale(Expr<S> a, S k) {
  Graph<S>& g = *a.g;
  int ai = a.i;
  return g.make(a.value() * k, g.needs_grad(ai), [ai, k](Graph<S>& gr, int self) {
    gr.accum(ai, gr.grad(self) * k);
  });
}

/// Adds a column vector to every column of a matrix (bias broadcast).
template <typename S>
Expr<S> add_cols(Expr<S> m, Expr<S> bias) {
  Graph<S>& g = detail::same_graph(m, bias);
  detail::gcheck(bias.cols() == 1 && bias.rows() == m.rows(), "add_cols: bias must be [rows x 1]");
  bool ng = g.needs_grad(m.i) || g.needs_grad(bias.i);
  int mi = m.i, bi = bias.i;
  Mat<S> v = m.value();
  v.colwise() += bias.value().col(0);
  return g.make(std::move(v), ng, [mi, bi](Graph<S>& gr, int self) {
    const Mat<S>& dy = gr.grad(self);
    gr.accum(mi, dy);
    gr.accum(bi, dy.rowwise().sum());
  });
}

template <typename S>
Expr<S> transpose(Expr<S> a) {
  Graph<S>& g = *a.g;
  int ai = a.i;
  return g.make(a.value().transpose(), g.needs_grad(ai), [ai](Graph<S>& gr, int self) {
    gr.accum(ai, gr.grad(self).transpose());
  });
}

/// Vertical concatenation (stack rows).
template <typename S>
Expr<S> vcat(std::vector<Expr<S>> parts) {
  detail::gcheck(!parts.empty(), "vcat: empty");
  Graph<S>& g = *parts[0].g;
  Eigen::Index cols = parts[0].cols(), rows = 0;
  bool ng = false;
  for (auto& p : parts) {
    detail::gcheck(p.cols() == cols, "vcat: column counts disagree");
    rows += p.rows();
    ng = ng || g.needs_grad(p.i);
  }
  Mat<S> v(rows, cols);
  Eigen::Index r = 0;
  std::vector<std::pair<int, Eigen::Index>> spans;  // (node, row offset)
  for (auto& p : parts) {
    v.middleRows(r, p.rows()) = p.value();
    spans.emplace_back(p.i, r);
    r += p.rows();
  }
  return g.make(std::move(v), ng, [spans](Graph<S>& gr, int self) {
    const Mat<S>& dy = gr.grad(self);
    for (auto& [idx, off] : spans) {
      gr.accum(idx, dy.middleRows(off, gr.value(idx).rows()));
    }
  });
}

/// Horizontal concatenation (stack columns).
template <typename S>
Expr<S> hcat(std::vector<Expr<S>> parts) {
  detail::gcheck(!parts.empty(), "hcat: empty");
  Graph<S>& g = *parts[0].g;
  Eigen::Index rows = parts[0].rows(), cols = 0;
  bool ng = false;
  for (auto& p : parts) {
    detail::gcheck(p.rows() == rows, "hcat: row counts disagree");
    cols += p.cols();
    ng = ng || g.needs_grad(p.i);
  }
  Mat<S> v(rows, cols);
  Eigen::Index c = 0;
  std::vector<std::pair<int, Eigen::Index>> spans;
  for (auto& p : parts) {
    v.middleCols(c, p.cols()) = p.value();
    spans.emplace_back(p.i, c);
    c += p.cols();
  }
  return g.make(std::move(v), ng, [spans](Graph<S>& gr, int self) {
    const Mat<S>& dy = gr.grad(self);
    for (auto& [idx, off] : spans) {
      gr.accum(idx, dy.middleCols(off, gr.value(idx).cols()));
    }
  });
}

template <typename S>
Expr<S> slice_rows(Expr<S> a, Eigen::Index r0, Eigen::Index n) {
  Graph<S>& g = *a.g;
  detail::gcheck(r0 >= 0 && n >= 0 && r0 + n <= a.rows(), "slice_rows: out of range");
  int ai = a.i;
  return g.make(a.value().middleRows(r0, n), g.needs_grad(ai), [ai, r0, n](Graph<S>& gr, int self) {
    if (!gr.needs_grad(ai)) return;
    gr.grad_ref(ai).middleRows(r0, n) += gr.grad(self);
  });
}

template <typename S>
Expr<S> slice_cols(Expr<S> a, Eigen::Index c0, Eigen::Index n) {
  Graph<S>& g = *a.g;
  detail::gcheck(c0 >= 0 && n >= 0 && c0 + n <= a.cols(), "slice_cols: out of range");
  int ai = a.i;
  return g.make(a.value().middleCols(c0, n), g.needs_grad(ai), [ai, c0, n](Graph<S>& gr, int self) {
    if (!gr.needs_grad(ai)) return;
    gr.grad_ref(ai).middleCols(c0, n) += gr.grad(self);
  });
}

template <typename S>
Expr<S> sigmoid(Expr<S> a) {
  Graph<S>& g = *a.g;
  int ai = a.i;
  Mat<S> v = a.value().unaryExpr([](S x) { return S(1) / (S(1) + std::exp(-x)); });
  return g.make(std::move(v), g.needs_grad(ai), [ai](Graph<S>& gr, int self) {
    const Mat<S>& y = gr.value(self);
    gr.accum(ai, gr.grad(self).cwiseProduct(y.cwiseProduct((Mat<S>::Ones(y.rows(), y.cols()) - y))));
  });
}

template <typename S>
Expr<S> tanh_(Expr<S> a) {
  Graph<S>& g = *a.g;
  int ai = a.i;
  Mat<S> v = a.value().unaryExpr([](S x) { return std::tanh(x); });
  return g.make(std::move(v), g.needs_grad(ai), [ai](Graph<S>& gr, int self) {
    const Mat<S>& y = gr.value(self);
    gr.accum(ai, gr.grad(self).cwiseProduct((Mat<S>::Ones(y.rows(), y.cols()) - y.cwiseProduct(y))));
  });
}

/// Exact (erf-based) GELU; smooth, which keeps finite-difference checks tight.
template <typename S>
Expr<S> gelu(Expr<S> a) {
  Graph<S>& g = *a.g;
  int ai = a.i;
  const S inv_sqrt2 = S(1) / std::sqrt(S(2));
  Mat<S> v = a.value().unaryExpr(
      [inv_sqrt2](S x) { return S(0.5) * x * (S(1) + std::erf(x * inv_sqrt2)); });
  return g.make(std::move(v), g.needs_grad(ai), [ai, inv_sqrt2](Graph<S>& gr, int self) {
    const Mat<S>& x = gr.value(ai);
    const S inv_sqrt2pi = S(1) / std::sqrt(S(2) * S(M_PI));
    Mat<S> dx = x.unaryExpr([inv_sqrt2, inv_sqrt2pi](S t) {
      S phi = S(0.5) * (S(1) + std::erf(t * inv_sqrt2));
      S dens = inv_sqrt2pi * std::exp(S(-0.5) * t * t);
      return phi + t * dens;
    });
    gr.accum(ai, gr.grad(self).cwiseProduct(dx));
  });
}

/// Elementwise log(max(x, floor)); zero gradient below the floor.
template <typename S>
Expr<S> log_floor(Expr<S> a, S floor_val) {
  Graph<S>& g = *a.g;
  int ai = a.i;
  Mat<S> v = a.value().unaryExpr([floor_val](S x) { return std::log(std::max(x, floor_val)); });
  return g.make(std::move(v), g.needs_grad(ai), [ai, floor_val](Graph<S>& gr, int self) {
    const Mat<S>& x = gr.value(ai);
    Mat<S> dx = x.unaryExpr([floor_val](S t) { return t > floor_val ? S(1) / t : S(0); });
    gr.accum(ai, gr.grad(self).cwiseProduct(dx));
  });
}

/// Row-wise masked softmax: every row becomes a distribution over the
/// columns where mask==1; masked-out columns get exactly 0.
template <typename S>
Expr<S> softmax_rows(Expr<S> a, const Mask& mask) {
  Graph<S>& g = *a.g;
  detail::gcheck(static_cast<Eigen::Index>(mask.size()) == a.cols(), "softmax_rows: mask size");
  Eigen::Index live = 0;
  for (auto m : mask) live += (m != 0);
  detail::gcheck(live > 0, "softmax_rows: all columns masked");
  const Mat<S>& x = a.value();
  Mat<S> y = Mat<S>::Zero(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    S mx = -std::numeric_limits<S>::infinity();
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      if (mask[c]) mx = std::max(mx, x(r, c));
    S z = S(0);
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      if (mask[c]) {
        y(r, c) = std::exp(x(r, c) - mx);
        z += y(r, c);
      }
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      if (mask[c]) y(r, c) /= z;
  }
  int ai = a.i;
  return g.make(std::move(y), g.needs_grad(ai), [ai, mask](Graph<S>& gr, int self) {
    const Mat<S>& yv = gr.value(self);
    const Mat<S>& dy = gr.grad(self);
    Mat<S> dx = Mat<S>::Zero(yv.rows(), yv.cols());
    for (Eigen::Index r = 0; r < yv.rows(); ++r) {
      S dot = S(0);
      for (Eigen::Index c = 0; c < yv.cols(); ++c)
        if (mask[c]) dot += dy(r, c) * yv(r, c);
      for (Eigen::Index c = 0; c < yv.cols(); ++c)
        if (mask[c]) dx(r, c) = yv(r, c) * (dy(r, c) - dot);
    }
    gr.accum(ai, dx);
  });
}

/// Unmasked row-wise softmax.
template <typename S>
Expr<S> softmax_rows(Expr<S> a) {
  return softmax_rows(a, Mask(static_cast<std::size_t>(a.cols()), 1));
}

/// Row-wise max over mask==1 columns -> [rows x 1]. Gradient flows to the
/// first attaining column of each row.
template <typename S>
Expr<S> rowwise_max(Expr<S> a, const Mask& mask) {
  Graph<S>& g = *a.g;
  detail::gcheck(static_cast<Eigen::Index>(mask.size()) == a.cols(), "rowwise_max: mask size");
  const Mat<S>& x = a.value();
  Mat<S> v(x.rows(), 1);
  std::vector<Eigen::Index> arg(x.rows(), -1);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    S best = -std::numeric_limits<S>::infinity();
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      if (mask[c] && x(r, c) > best) {
        best = x(r, c);
        arg[r] = c;
      }
    detail::gcheck(arg[r] >= 0, "rowwise_max: all columns masked");
    v(r, 0) = best;
  }
  int ai = a.i;
  return g.make(std::move(v), g.needs_grad(ai), [ai, arg](Graph<S>& gr, int self) {
    const Mat<S>& dy = gr.grad(self);
    Mat<S> dx = Mat<S>::Zero(gr.value(ai).rows(), gr.value(ai).cols());
    for (Eigen::Index r = 0; r < dx.rows(); ++r) dx(r, arg[r]) += dy(r, 0);
    gr.accum(ai, dx);
  });
}

template <typename S>
Expr<S> rowwise_max(Expr<S> a) {
  return rowwise_max(a, Mask(static_cast<std::size_t>(a.cols()), 1));
}

template <typename S>
Expr<S> sum_all(Expr<S> a) {
  Graph<S>& g = *a.g;
  int ai = a.i;
  Mat<S> v(1, 1);
  v(0, 0) = a.value().sum();
  return g.make(std::move(v), g.needs_grad(ai), [ai](Graph<S>& gr, int self) {
    S dy = gr.grad(self)(0, 0);
    const Mat<S>& x = gr.value(ai);
    gr.accum(ai, Mat<S>::Constant(x.rows(), x.cols(), dy));
  });
}

/// Extracts one entry as a 1x1 node.
template <typename S>
Expr<S> pick(Expr<S> a, Eigen::Index r, Eigen::Index c) {
  Graph<S>& g = *a.g;
  detail::gcheck(r >= 0 && r < a.rows() && c >= 0 && c < a.cols(), "pick: index out of range");
  int ai = a.i;
  Mat<S> v(1, 1);
  v(0, 0) = a.value()(r, c);
  return g.make(std::move(v), g.needs_grad(ai), [ai, r, c](Graph<S>& gr, int self) {
    const Mat<S>& x = gr.value(ai);
    Mat<S> dx = Mat<S>::Zero(x.rows(), x.cols());
    dx(r, c) = gr.grad(self)(0, 0);
    gr.accum(ai, dx);
  });
}

/// Gathers columns of an embedding table: table [d x V], ids in [0, V).
template <typename S>
Expr<S> embed(Expr<S> table, const std::vector<int>& ids) {
  Graph<S>& g = *table.g;
  const Mat<S>& t = table.value();
  Mat<S> v(t.rows(), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t k = 0; k < ids.size(); ++k) {
    detail::gcheck(ids[k] >= 0 && ids[k] < t.cols(), "embed: id out of range");
    v.col(static_cast<Eigen::Index>(k)) = t.col(ids[k]);
  }
  int ti = table.i;
  return g.make(std::move(v), g.needs_grad(ti), [ti, ids](Graph<S>& gr, int self) {
    const Mat<S>& dy = gr.grad(self);
    Mat<S> dt = Mat<S>::Zero(gr.value(ti).rows(), gr.value(ti).cols());
    for (std::size_t k = 0; k < ids.size(); ++k)
      dt.col(ids[k]) += dy.col(static_cast<Eigen::Index>(k));
    gr.accum(ti, dt);
  });
}

/// 1-D convolution over columns with 'same' zero padding.
/// x: [C x n], w: [F x C*K] (kernel tap k occupies columns k*C..k*C+C-1),
/// bias: [F x 1]. Output [F x n].
template <typename S>
Expr<S> conv1d_same(Expr<S> x, Expr<S> w, Expr<S> bias, int kernel) {
  Graph<S>& g = detail::same_graph(x, w);
  detail::gcheck(kernel >= 1 && kernel % 2 == 1, "conv1d_same: kernel must be odd and >= 1");
  const Eigen::Index C = x.rows(), n = x.cols(), F = w.rows();
  detail::gcheck(w.cols() == C * kernel, "conv1d_same: weight shape");
  detail::gcheck(bias.rows() == F && bias.cols() == 1, "conv1d_same: bias shape");
  const int pad = kernel / 2;
  const Mat<S>& xv = x.value();
  const Mat<S>& wv = w.value();
  Mat<S> v = bias.value().col(0).replicate(1, n);
  for (int k = 0; k < kernel; ++k) {
    auto wk = wv.middleCols(static_cast<Eigen::Index>(k) * C, C);  // [F x C]
    for (Eigen::Index t = 0; t < n; ++t) {
      Eigen::Index src = t + k - pad;
      if (src < 0 || src >= n) continue;
      v.col(t) += wk * xv.col(src);
    }
  }
  bool ng = g.needs_grad(x.i) || g.needs_grad(w.i) || g.needs_grad(bias.i);
  int xi = x.i, wi = w.i, bi = bias.i;
  return g.make(std::move(v), ng, [xi, wi, bi, kernel, pad, C](Graph<S>& gr, int self) {
    const Mat<S>& dy = gr.grad(self);
    const Mat<S>& xv2 = gr.value(xi);
    const Mat<S>& wv2 = gr.value(wi);
    const Eigen::Index n2 = xv2.cols();
    Mat<S> dx = Mat<S>::Zero(xv2.rows(), xv2.cols());
    Mat<S> dw = Mat<S>::Zero(wv2.rows(), wv2.cols());
    for (int k = 0; k < kernel; ++k) {
      auto wk = wv2.middleCols(static_cast<Eigen::Index>(k) * C, C);
      auto dwk = dw.middleCols(static_cast<Eigen::Index>(k) * C, C);
      for (Eigen::Index t = 0; t < n2; ++t) {
        Eigen::Index src = t + k - pad;
        if (src < 0 || src >= n2) continue;
        dx.col(src) += wk.transpose() * dy.col(t);
        dwk += dy.col(t) * xv2.col(src).transpose();
      }
    }
    gr.accum(xi, dx);
    gr.accum(wi, dw);
    gr.accum(bi, dy.rowwise().sum());
  });
}

/// Layer normalization over the rows of each column (features per position),
/// followed by the affine (gamma, beta), both [d x 1].
template <typename S>
Expr<S> layer_norm(Expr<S> x, Expr<S> gamma, Expr<S> beta, S eps = S(1e-5)) {
  Graph<S>& g = detail::same_graph(x, gamma);
  const Eigen::Index d = x.rows(), n = x.cols();
  detail::gcheck(gamma.rows() == d && gamma.cols() == 1, "layer_norm: gamma shape");
  detail::gcheck(beta.rows() == d && beta.cols() == 1, "layer_norm: beta shape");
  const Mat<S>& xv = x.value();
  Mat<S> v(d, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    S mean = xv.col(c).mean();
    S var = (xv.col(c).array() - mean).square().mean();
    S inv = S(1) / std::sqrt(var + eps);
    v.col(c) = ((xv.col(c).array() - mean) * inv).matrix().cwiseProduct(gamma.value().col(0)) +
               beta.value().col(0);
  }
  bool ng = g.needs_grad(x.i) || g.needs_grad(gamma.i) || g.needs_grad(beta.i);
  int xi = x.i, gi = gamma.i, bi = beta.i;
  return g.make(std::move(v), ng, [xi, gi, bi, eps](Graph<S>& gr, int self) {
    const Mat<S>& xv2 = gr.value(xi);
    const Mat<S>& gam = gr.value(gi);
    const Mat<S>& dy = gr.grad(self);
    const Eigen::Index d2 = xv2.rows(), n2 = xv2.cols();
    Mat<S> dx(d2, n2);
    Mat<S> dgam = Mat<S>::Zero(d2, 1);
    Mat<S> dbet = Mat<S>::Zero(d2, 1);
    for (Eigen::Index c = 0; c < n2; ++c) {
      S mean = xv2.col(c).mean();
      auto centered = (xv2.col(c).array() - mean).eval();
      S var = centered.square().mean();
      S inv = S(1) / std::sqrt(var + eps);
      auto xhat = (centered * inv).eval();
      auto dyc = dy.col(c).array().eval();
      dgam.col(0).array() += dyc * xhat;
      dbet.col(0).array() += dyc;
      auto dxhat = (dyc * gam.col(0).array()).eval();
      S m1 = dxhat.mean();
      S m2 = (dxhat * xhat).mean();
      dx.col(c).array() = inv * (dxhat - m1 - xhat * m2);
    }
    gr.accum(xi, dx);
    gr.accum(gi, dgam);
    gr.accum(bi, dbet);
  });
}

/// Inverted dropout with an externally provided mask-scale matrix (entries
/// are 0 or 1/(1-p)); identity when keep is empty.
template <typename S>
Expr<S> dropout_mask(Expr<S> a, Mat<S> keep) {
  Graph<S>& g = *a.g;
  detail::gcheck(keep.rows() == a.rows() && keep.cols() == a.cols(), "dropout_mask: shape");
  int ai = a.i;
  auto keep_ptr = std::make_shared<Mat<S>>(std::move(keep));
  return g.make(a.value().cwiseProduct(*keep_ptr), g.needs_grad(ai),
                [ai, keep_ptr](Graph<S>& gr, int self) {
                  gr.accum(ai, gr.grad(self).cwiseProduct(*keep_ptr));
                });
}

}  // namespace jointqa
