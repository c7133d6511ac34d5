#include "movrp/ad/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "movrp/common/error.hpp"

namespace movrp::ad {

namespace {

[[noreturn]] void shape_error(OpKind kind, const std::string& detail) {
  throw ShapeError(std::string(op_name(kind)) + ": " + detail);
}

Tape& tape_of(OpKind kind, std::initializer_list<const Tensor*> inputs) {
  Tape* tape = nullptr;
  for (const Tensor* t : inputs) {
    if (!t->defined()) shape_error(kind, "undefined input tensor");
    if (tape == nullptr) tape = t->tape();
    if (t->tape() != tape) shape_error(kind, "inputs live on different tapes");
  }
  return *tape;
}

Tape& tape_of(OpKind kind, std::span<const Tensor> inputs) {
  if (inputs.empty()) shape_error(kind, "no inputs");
  Tape* tape = nullptr;
  for (const Tensor& t : inputs) {
    if (!t.defined()) shape_error(kind, "undefined input tensor");
    if (tape == nullptr) tape = t.tape();
    if (t.tape() != tape) shape_error(kind, "inputs live on different tapes");
  }
  return *tape;
}

Tape::Node make_node(OpKind kind, Shape shape, std::vector<double> value) {
  Tape::Node n;
  n.kind = kind;
  n.shape = shape;
  n.value = std::move(value);
  return n;
}

void check_mask(OpKind kind, const Mask& mask, std::size_t cols) {
  if (mask.empty()) return;
  if (mask.size() != cols) {
    shape_error(kind, "mask of length " + std::to_string(mask.size()) + " for " +
                          std::to_string(cols) + " columns");
  }
  if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; })) {
    shape_error(kind, "every entry is blocked");
  }
}

}  // namespace

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::Leaf: return "leaf";
    case OpKind::MatMul: return "matmul";
    case OpKind::Add: return "add";
    case OpKind::Mul: return "mul";
    case OpKind::Scale: return "scale";
    case OpKind::ConcatCols: return "concat_cols";
    case OpKind::ConcatRows: return "concat_rows";
    case OpKind::MeanRows: return "mean_rows";
    case OpKind::MeanCols: return "mean_cols";
    case OpKind::Sum: return "sum";
    case OpKind::Relu: return "relu";
    case OpKind::Tanh: return "tanh";
    case OpKind::Exp: return "exp";
    case OpKind::Log: return "log";
    case OpKind::MaskedSoftmax: return "masked_softmax";
    case OpKind::MaskedLogSoftmax: return "masked_log_softmax";
    case OpKind::BatchNorm: return "batch_norm";
    case OpKind::SliceRows: return "slice_rows";
    case OpKind::SliceCols: return "slice_cols";
    case OpKind::SelectRows: return "select_rows";
    case OpKind::Transpose: return "transpose";
  }
  return "unknown";
}

// ---- Tensor ---------------------------------------------------------------

const Shape& Tensor::shape() const { return tape_->node(id_).shape; }

std::span<const double> Tensor::values() const { return tape_->node(id_).value; }

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item: tensor of shape " + to_string(shape()) + " is not a scalar");
  return values()[0];
}

bool Tensor::requires_grad() const { return tape_->node(id_).requires_grad; }

// ---- Tape -----------------------------------------------------------------

Tensor Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Tensor(this, static_cast<int>(nodes_.size() - 1));
}

bool Tape::any_requires_grad(std::initializer_list<Tensor> inputs) const {
  if (!record_) return false;
  return std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
}

bool Tape::any_requires_grad(std::span<const Tensor> inputs) const {
  if (!record_) return false;
  return std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
}

Tensor Tape::constant(Shape shape, std::vector<double> values) {
  if (values.size() != shape.size()) {
    throw ShapeError("constant: " + std::to_string(values.size()) + " values for shape " + to_string(shape));
  }
  return push(make_node(OpKind::Leaf, shape, std::move(values)));
}

Tensor Tape::param(const ParamStore& store, std::size_t slot) {
  auto it = std::find_if(param_nodes_.begin(), param_nodes_.end(),
                         [&](const auto& p) { return p.first == &store; });
  if (it == param_nodes_.end()) {
    param_nodes_.emplace_back(&store, std::vector<int>(store.size(), -1));
    it = std::prev(param_nodes_.end());
  }
  if (it->second.size() < store.size()) it->second.resize(store.size(), -1);
  int& cached = it->second[slot];
  if (cached >= 0) return Tensor(this, cached);

  const Parameter& p = store[slot];
  Node n = make_node(OpKind::Leaf, p.shape, p.values);
  n.requires_grad = record_ && p.trainable;
  n.store = &store;
  n.slot = slot;
  Tensor t = push(std::move(n));
  cached = t.node_id();
  return t;
}

Tensor Tape::param(const ParamStore& store, std::string_view name) {
  auto slot = store.find(name);
  if (!slot) throw Error("tape: unknown parameter '" + std::string(name) + "'");
  return param(store, *slot);
}

std::vector<double>& Tape::grad_of(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

ParamStore Tape::backward(const Tensor& loss, const ParamStore& store, Retain retain) {
  if (!loss.defined() || loss.tape() != this) throw Error("backward: loss does not belong to this tape");
  if (consumed_) throw Error("backward: tape already consumed");
  if (loss.size() != 1) throw ShapeError("backward: loss of shape " + to_string(loss.shape()) + " is not a scalar");
  if (!record_) throw Error("backward: tape was created without recording");

  for (Node& n : nodes_) n.grad.clear();
  ParamStore grads = store.zeros_like();
  const auto root = static_cast<std::size_t>(loss.node_id());
  if (nodes_[root].requires_grad) {
    grad_of(loss.node_id())[0] = 1.0;
    for (std::size_t i = root + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.grad.empty() || !n.requires_grad) continue;
      if (n.kind == OpKind::Leaf) {
        if (n.store == &store) {
          auto& g = grads[n.slot].values;
          for (std::size_t k = 0; k < g.size(); ++k) g[k] += n.grad[k];
        }
        continue;
      }
      backprop_node(i);
    }
  }
  for (Node& n : nodes_) {
    n.grad.clear();
    n.grad.shrink_to_fit();
  }
  if (retain == Retain::No) consumed_ = true;
  return grads;
}

void Tape::backprop_node(std::size_t id) {
  // Copy what is needed from `n` before touching other nodes' grads: grad_of
  // never reallocates nodes_, so references stay valid.
  Node& n = nodes_[id];
  const std::vector<double>& g = n.grad;
  auto in_grad = [&](std::size_t k) -> std::vector<double>* {
    const int src = n.inputs[k];
    if (!nodes_[static_cast<std::size_t>(src)].requires_grad) return nullptr;
    return &grad_of(src);
  };
  auto in_node = [&](std::size_t k) -> const Node& { return nodes_[static_cast<std::size_t>(n.inputs[k])]; };

  switch (n.kind) {
    case OpKind::Leaf:
      break;
    case OpKind::MatMul: {
      const Node& a = in_node(0);
      const Node& b = in_node(1);
      const std::size_t m = a.shape.rows, kk = a.shape.cols, cols = b.shape.cols;
      if (auto* ga = in_grad(0)) {
        // dA = dC B^T
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < kk; ++p) {
            double acc = 0.0;
            const double* brow = &b.value[p * cols];
            const double* grow = &g[i * cols];
            for (std::size_t j = 0; j < cols; ++j) acc += grow[j] * brow[j];
            (*ga)[i * kk + p] += acc;
          }
        }
      }
      if (auto* gb = in_grad(1)) {
        // dB = A^T dC
        for (std::size_t i = 0; i < m; ++i) {
          const double* grow = &g[i * cols];
          for (std::size_t p = 0; p < kk; ++p) {
            const double av = a.value[i * kk + p];
            if (av == 0.0) continue;
            double* brow = &(*gb)[p * cols];
            for (std::size_t j = 0; j < cols; ++j) brow[j] += av * grow[j];
          }
        }
      }
      break;
    }
    case OpKind::Add: {
      if (auto* ga = in_grad(0)) {
        for (std::size_t k = 0; k < g.size(); ++k) (*ga)[k] += g[k];
      }
      if (auto* gb = in_grad(1)) {
        const std::size_t bs = in_node(1).value.size();
        for (std::size_t k = 0; k < g.size(); ++k) (*gb)[k % bs] += g[k];
      }
      break;
    }
    case OpKind::Mul: {
      const Node& a = in_node(0);
      const Node& b = in_node(1);
      const std::size_t bs = b.value.size();
      if (auto* ga = in_grad(0)) {
        for (std::size_t k = 0; k < g.size(); ++k) (*ga)[k] += g[k] * b.value[k % bs];
      }
      if (auto* gb = in_grad(1)) {
        for (std::size_t k = 0; k < g.size(); ++k) (*gb)[k % bs] += g[k] * a.value[k];
      }
      break;
    }
    case OpKind::Scale: {
      if (auto* ga = in_grad(0)) {
        for (std::size_t k = 0; k < g.size(); ++k) (*ga)[k] += g[k] * n.scalar;
      }
      break;
    }
    case OpKind::ConcatCols: {
      std::size_t offset = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        const std::size_t w = in_node(k).shape.cols;
        if (auto* gi = in_grad(k)) {
          for (std::size_t r = 0; r < n.shape.rows; ++r) {
            for (std::size_t c = 0; c < w; ++c) (*gi)[r * w + c] += g[r * n.shape.cols + offset + c];
          }
        }
        offset += w;
      }
      break;
    }
    case OpKind::ConcatRows: {
      std::size_t offset = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        const std::size_t len = in_node(k).value.size();
        if (auto* gi = in_grad(k)) {
          for (std::size_t c = 0; c < len; ++c) (*gi)[c] += g[offset + c];
        }
        offset += len;
      }
      break;
    }
    case OpKind::MeanRows: {
      if (auto* ga = in_grad(0)) {
        const Shape s = in_node(0).shape;
        const double inv = 1.0 / static_cast<double>(s.rows);
        for (std::size_t r = 0; r < s.rows; ++r) {
          for (std::size_t c = 0; c < s.cols; ++c) (*ga)[r * s.cols + c] += g[c] * inv;
        }
      }
      break;
    }
    case OpKind::MeanCols: {
      if (auto* ga = in_grad(0)) {
        const Shape s = in_node(0).shape;
        const double inv = 1.0 / static_cast<double>(s.cols);
        for (std::size_t r = 0; r < s.rows; ++r) {
          for (std::size_t c = 0; c < s.cols; ++c) (*ga)[r * s.cols + c] += g[r] * inv;
        }
      }
      break;
    }
    case OpKind::Sum: {
      if (auto* ga = in_grad(0)) {
        for (double& v : *ga) v += g[0];
      }
      break;
    }
    case OpKind::Relu: {
      if (auto* ga = in_grad(0)) {
        const auto& x = in_node(0).value;
        for (std::size_t k = 0; k < g.size(); ++k) {
          if (x[k] > 0.0) (*ga)[k] += g[k];
        }
      }
      break;
    }
    case OpKind::Tanh: {
      if (auto* ga = in_grad(0)) {
        for (std::size_t k = 0; k < g.size(); ++k) (*ga)[k] += g[k] * (1.0 - n.value[k] * n.value[k]);
      }
      break;
    }
    case OpKind::Exp: {
      if (auto* ga = in_grad(0)) {
        for (std::size_t k = 0; k < g.size(); ++k) (*ga)[k] += g[k] * n.value[k];
      }
      break;
    }
    case OpKind::Log: {
      if (auto* ga = in_grad(0)) {
        const auto& x = in_node(0).value;
        for (std::size_t k = 0; k < g.size(); ++k) (*ga)[k] += g[k] / x[k];
      }
      break;
    }
    case OpKind::MaskedSoftmax: {
      if (auto* ga = in_grad(0)) {
        const std::size_t cols = n.shape.cols;
        for (std::size_t r = 0; r < n.shape.rows; ++r) {
          const double* p = &n.value[r * cols];
          const double* gp = &g[r * cols];
          double dot = 0.0;
          for (std::size_t c = 0; c < cols; ++c) dot += p[c] * gp[c];
          for (std::size_t c = 0; c < cols; ++c) (*ga)[r * cols + c] += p[c] * (gp[c] - dot);
        }
      }
      break;
    }
    case OpKind::MaskedLogSoftmax: {
      if (auto* ga = in_grad(0)) {
        // saved holds the probabilities.
        const std::size_t cols = n.shape.cols;
        for (std::size_t r = 0; r < n.shape.rows; ++r) {
          const double* p = &n.saved[r * cols];
          const double* gl = &g[r * cols];
          double total = 0.0;
          for (std::size_t c = 0; c < cols; ++c) total += gl[c];
          for (std::size_t c = 0; c < cols; ++c) (*ga)[r * cols + c] += gl[c] - p[c] * total;
        }
      }
      break;
    }
    case OpKind::BatchNorm: {
      // saved = [xhat (rows*cols), inv_std (cols)]; index[0] = 1 for train mode.
      const std::size_t rows = n.shape.rows, cols = n.shape.cols;
      const double* xhat = n.saved.data();
      const double* inv_std = n.saved.data() + rows * cols;
      const auto& gamma = in_node(1).value;
      if (auto* gg = in_grad(1)) {
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < cols; ++c) (*gg)[c] += g[r * cols + c] * xhat[r * cols + c];
        }
      }
      if (auto* gb = in_grad(2)) {
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < cols; ++c) (*gb)[c] += g[r * cols + c];
        }
      }
      if (auto* gx = in_grad(0)) {
        const bool train = n.index[0] == 1;
        if (!train) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) (*gx)[r * cols + c] += g[r * cols + c] * gamma[c] * inv_std[c];
          }
        } else {
          const double inv_n = 1.0 / static_cast<double>(rows);
          std::vector<double> sum_d(cols, 0.0), sum_dx(cols, 0.0);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
              const double d = g[r * cols + c] * gamma[c];
              sum_d[c] += d;
              sum_dx[c] += d * xhat[r * cols + c];
            }
          }
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
              const double d = g[r * cols + c] * gamma[c];
              (*gx)[r * cols + c] += inv_std[c] * (d - inv_n * sum_d[c] - xhat[r * cols + c] * inv_n * sum_dx[c]);
            }
          }
        }
      }
      break;
    }
    case OpKind::SliceRows: {
      if (auto* ga = in_grad(0)) {
        const std::size_t offset = n.index[0] * n.shape.cols;
        for (std::size_t k = 0; k < g.size(); ++k) (*ga)[offset + k] += g[k];
      }
      break;
    }
    case OpKind::SliceCols: {
      if (auto* ga = in_grad(0)) {
        const std::size_t begin = n.index[0];
        const std::size_t src_cols = in_node(0).shape.cols;
        for (std::size_t r = 0; r < n.shape.rows; ++r) {
          for (std::size_t c = 0; c < n.shape.cols; ++c) (*ga)[r * src_cols + begin + c] += g[r * n.shape.cols + c];
        }
      }
      break;
    }
    case OpKind::SelectRows: {
      if (auto* ga = in_grad(0)) {
        const std::size_t cols = n.shape.cols;
        for (std::size_t r = 0; r < n.index.size(); ++r) {
          for (std::size_t c = 0; c < cols; ++c) (*ga)[n.index[r] * cols + c] += g[r * cols + c];
        }
      }
      break;
    }
    case OpKind::Transpose: {
      if (auto* ga = in_grad(0)) {
        const std::size_t rows = n.shape.rows, cols = n.shape.cols;
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < cols; ++c) (*ga)[c * rows + r] += g[r * cols + c];
        }
      }
      break;
    }
  }
}

// ---- primitives -----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tape& tape = tape_of(OpKind::MatMul, {&a, &b});
  if (a.cols() != b.rows()) {
    shape_error(OpKind::MatMul, "cannot multiply " + to_string(a.shape()) + " by " + to_string(b.shape()));
  }
  const std::size_t m = a.rows(), kk = a.cols(), cols = b.cols();
  std::vector<double> out(m * cols, 0.0);
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = &out[i * cols];
    for (std::size_t p = 0; p < kk; ++p) {
      const double x = av[i * kk + p];
      if (x == 0.0) continue;
      const double* brow = &bv[p * cols];
      for (std::size_t j = 0; j < cols; ++j) orow[j] += x * brow[j];
    }
  }
  Tape::Node n = make_node(OpKind::MatMul, {m, cols}, std::move(out));
  n.inputs = {a.node_id(), b.node_id()};
  n.requires_grad = tape.any_requires_grad({a, b});
  return tape.push(std::move(n));
}

namespace {

void check_broadcast(OpKind kind, const Tensor& a, const Tensor& b) {
  const bool same = a.shape() == b.shape();
  const bool row = b.rows() == 1 && b.cols() == a.cols();
  if (!same && !row) {
    shape_error(kind, "incompatible shapes " + to_string(a.shape()) + " and " + to_string(b.shape()));
  }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  Tape& tape = tape_of(OpKind::Add, {&a, &b});
  check_broadcast(OpKind::Add, a, b);
  const auto av = a.values();
  const auto bv = b.values();
  const std::size_t bs = bv.size();
  std::vector<double> out(av.size());
  for (std::size_t k = 0; k < av.size(); ++k) out[k] = av[k] + bv[k % bs];
  Tape::Node n = make_node(OpKind::Add, a.shape(), std::move(out));
  n.inputs = {a.node_id(), b.node_id()};
  n.requires_grad = tape.any_requires_grad({a, b});
  return tape.push(std::move(n));
}

Tensor mul(const Tensor& a, const Tensor& b) {
  Tape& tape = tape_of(OpKind::Mul, {&a, &b});
  check_broadcast(OpKind::Mul, a, b);
  const auto av = a.values();
  const auto bv = b.values();
  const std::size_t bs = bv.size();
  std::vector<double> out(av.size());
  for (std::size_t k = 0; k < av.size(); ++k) out[k] = av[k] * bv[k % bs];
  Tape::Node n = make_node(OpKind::Mul, a.shape(), std::move(out));
  n.inputs = {a.node_id(), b.node_id()};
  n.requires_grad = tape.any_requires_grad({a, b});
  return tape.push(std::move(n));
}

Tensor scale(const Tensor& a, double factor) {
  Tape& tape = tape_of(OpKind::Scale, {&a});
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t k = 0; k < av.size(); ++k) out[k] = av[k] * factor;
  Tape::Node n = make_node(OpKind::Scale, a.shape(), std::move(out));
  n.inputs = {a.node_id()};
  n.scalar = factor;
  n.requires_grad = tape.any_requires_grad({a});
  return tape.push(std::move(n));
}

Tensor concat_cols(std::span<const Tensor> parts) {
  Tape& tape = tape_of(OpKind::ConcatCols, parts);
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  for (const Tensor& t : parts) {
    if (t.rows() != rows) {
      shape_error(OpKind::ConcatCols, "row mismatch " + to_string(parts.front().shape()) + " vs " + to_string(t.shape()));
    }
    cols += t.cols();
  }
  std::vector<double> out(rows * cols);
  std::size_t offset = 0;
  for (const Tensor& t : parts) {
    const auto v = t.values();
    const std::size_t w = t.cols();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(&v[r * w], w, &out[r * cols + offset]);
    }
    offset += w;
  }
  Tape::Node n = make_node(OpKind::ConcatCols, {rows, cols}, std::move(out));
  for (const Tensor& t : parts) n.inputs.push_back(t.node_id());
  n.requires_grad = tape.any_requires_grad(parts);
  return tape.push(std::move(n));
}

Tensor concat_rows(std::span<const Tensor> parts) {
  Tape& tape = tape_of(OpKind::ConcatRows, parts);
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  for (const Tensor& t : parts) {
    if (t.cols() != cols) {
      shape_error(OpKind::ConcatRows, "column mismatch " + to_string(parts.front().shape()) + " vs " + to_string(t.shape()));
    }
    rows += t.rows();
  }
  std::vector<double> out;
  out.reserve(rows * cols);
  for (const Tensor& t : parts) {
    const auto v = t.values();
    out.insert(out.end(), v.begin(), v.end());
  }
  Tape::Node n = make_node(OpKind::ConcatRows, {rows, cols}, std::move(out));
  for (const Tensor& t : parts) n.inputs.push_back(t.node_id());
  n.requires_grad = tape.any_requires_grad(parts);
  return tape.push(std::move(n));
}

Tensor concat_cols(std::initializer_list<Tensor> parts) { return concat_cols(std::span<const Tensor>(parts.begin(), parts.size())); }

Tensor concat_rows(std::initializer_list<Tensor> parts) { return concat_rows(std::span<const Tensor>(parts.begin(), parts.size())); }

Tensor mean_rows(const Tensor& a) {
  Tape& tape = tape_of(OpKind::MeanRows, {&a});
  if (a.rows() == 0) shape_error(OpKind::MeanRows, "empty input " + to_string(a.shape()));
  const auto v = a.values();
  std::vector<double> out(a.cols(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) out[c] += v[r * a.cols() + c];
  }
  for (double& x : out) x /= static_cast<double>(a.rows());
  Tape::Node n = make_node(OpKind::MeanRows, {1, a.cols()}, std::move(out));
  n.inputs = {a.node_id()};
  n.requires_grad = tape.any_requires_grad({a});
  return tape.push(std::move(n));
}

Tensor mean_cols(const Tensor& a) {
  Tape& tape = tape_of(OpKind::MeanCols, {&a});
  if (a.cols() == 0) shape_error(OpKind::MeanCols, "empty input " + to_string(a.shape()));
  const auto v = a.values();
  std::vector<double> out(a.rows(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) out[r] += v[r * a.cols() + c];
    out[r] /= static_cast<double>(a.cols());
  }
  Tape::Node n = make_node(OpKind::MeanCols, {a.rows(), 1}, std::move(out));
  n.inputs = {a.node_id()};
  n.requires_grad = tape.any_requires_grad({a});
  return tape.push(std::move(n));
}

Tensor sum(const Tensor& a) {
  Tape& tape = tape_of(OpKind::Sum, {&a});
  double total = 0.0;
  for (double x : a.values()) total += x;
  Tape::Node n = make_node(OpKind::Sum, {1, 1}, {total});
  n.inputs = {a.node_id()};
  n.requires_grad = tape.any_requires_grad({a});
  return tape.push(std::move(n));
}

Tensor relu(const Tensor& a) {
  Tape& tape = tape_of(OpKind::Relu, {&a});
  const auto v = a.values();
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[k] > 0.0 ? v[k] : 0.0;
  Tape::Node n = make_node(OpKind::Relu, a.shape(), std::move(out));
  n.inputs = {a.node_id()};
  n.requires_grad = tape.any_requires_grad({a});
  return tape.push(std::move(n));
}

Tensor tanh(const Tensor& a) {
  Tape& tape = tape_of(OpKind::Tanh, {&a});
  const auto v = a.values();
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = std::tanh(v[k]);
  Tape::Node n = make_node(OpKind::Tanh, a.shape(), std::move(out));
  n.inputs = {a.node_id()};
  n.requires_grad = tape.any_requires_grad({a});
  return tape.push(std::move(n));
}

Tensor exp(const Tensor& a) {
  Tape& tape = tape_of(OpKind::Exp, {&a});
  const auto v = a.values();
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = std::exp(v[k]);
  Tape::Node n = make_node(OpKind::Exp, a.shape(), std::move(out));
  n.inputs = {a.node_id()};
  n.requires_grad = tape.any_requires_grad({a});
  return tape.push(std::move(n));
}

Tensor log(const Tensor& a) {
  Tape& tape = tape_of(OpKind::Log, {&a});
  const auto v = a.values();
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!(v[k] > 0.0)) throw NumericError("log: non-positive input " + std::to_string(v[k]));
    out[k] = std::log(v[k]);
  }
  Tape::Node n = make_node(OpKind::Log, a.shape(), std::move(out));
  n.inputs = {a.node_id()};
  n.requires_grad = tape.any_requires_grad({a});
  return tape.push(std::move(n));
}

namespace {

// Fills `probs` with the row-wise masked softmax and returns per-row
// (max, log-sum-exp) pairs for the log variant.
std::vector<double> softmax_rows(const Tensor& a, const Mask& mask, std::vector<double>& probs) {
  const std::size_t rows = a.rows(), cols = a.cols();
  const auto v = a.values();
  probs.assign(rows * cols, 0.0);
  std::vector<double> shifted(rows * cols);
  std::vector<double> lse(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cols; ++c) {
      double z = v[r * cols + c];
      if (!mask.empty() && mask[c] == 0) z += kBlockedLogit;
      shifted[r * cols + c] = z;
      mx = std::max(mx, z);
    }
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double e = std::exp(shifted[r * cols + c] - mx);
      probs[r * cols + c] = e;
      total += e;
    }
    for (std::size_t c = 0; c < cols; ++c) {
      probs[r * cols + c] /= total;
      shifted[r * cols + c] -= mx;
    }
    lse[r] = std::log(total);
    for (std::size_t c = 0; c < cols; ++c) shifted[r * cols + c] -= lse[r];
  }
  return shifted;
}

}  // namespace

Tensor masked_softmax(const Tensor& a, const Mask& mask) {
  Tape& tape = tape_of(OpKind::MaskedSoftmax, {&a});
  check_mask(OpKind::MaskedSoftmax, mask, a.cols());
  std::vector<double> probs;
  softmax_rows(a, mask, probs);
  Tape::Node n = make_node(OpKind::MaskedSoftmax, a.shape(), std::move(probs));
  n.inputs = {a.node_id()};
  n.requires_grad = tape.any_requires_grad({a});
  return tape.push(std::move(n));
}

Tensor masked_log_softmax(const Tensor& a, const Mask& mask) {
  Tape& tape = tape_of(OpKind::MaskedLogSoftmax, {&a});
  check_mask(OpKind::MaskedLogSoftmax, mask, a.cols());
  std::vector<double> probs;
  std::vector<double> logp = softmax_rows(a, mask, probs);
  Tape::Node n = make_node(OpKind::MaskedLogSoftmax, a.shape(), std::move(logp));
  n.inputs = {a.node_id()};
  n.requires_grad = tape.any_requires_grad({a});
  if (n.requires_grad) n.saved = std::move(probs);
  return tape.push(std::move(n));
}

Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, NormMode mode,
                  std::span<const double> running_mean, std::span<const double> running_var,
                  BatchStats* batch_stats, double eps) {
  Tape& tape = tape_of(OpKind::BatchNorm, {&x, &gamma, &beta});
  const std::size_t rows = x.rows(), cols = x.cols();
  if (gamma.size() != cols || beta.size() != cols) {
    shape_error(OpKind::BatchNorm, "affine parameters " + to_string(gamma.shape()) + "/" + to_string(beta.shape()) +
                                       " for input " + to_string(x.shape()));
  }
  const bool train = mode == NormMode::Train;
  if (train && rows < 2) {
    shape_error(OpKind::BatchNorm, "train mode needs at least 2 rows, got " + to_string(x.shape()));
  }
  if (!train && (running_mean.size() != cols || running_var.size() != cols)) {
    shape_error(OpKind::BatchNorm, "running statistics do not match " + to_string(x.shape()));
  }
  const auto xv = x.values();
  std::vector<double> mean(cols, 0.0), var(cols, 0.0);
  if (train) {
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) mean[c] += xv[r * cols + c];
    }
    for (double& m : mean) m /= static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const double d = xv[r * cols + c] - mean[c];
        var[c] += d * d;
      }
    }
    if (batch_stats != nullptr) {
      batch_stats->mean = mean;
      batch_stats->var_unbiased.resize(cols);
      for (std::size_t c = 0; c < cols; ++c) batch_stats->var_unbiased[c] = var[c] / static_cast<double>(rows - 1);
    }
    for (double& s : var) s /= static_cast<double>(rows);
  } else {
    std::copy(running_mean.begin(), running_mean.end(), mean.begin());
    std::copy(running_var.begin(), running_var.end(), var.begin());
  }
  std::vector<double> saved(rows * cols + cols);
  double* xhat = saved.data();
  double* inv_std = saved.data() + rows * cols;
  for (std::size_t c = 0; c < cols; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + eps);
  const auto gv = gamma.values();
  const auto bv = beta.values();
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double h = (xv[r * cols + c] - mean[c]) * inv_std[c];
      xhat[r * cols + c] = h;
      out[r * cols + c] = gv[c] * h + bv[c];
    }
  }
  Tape::Node n = make_node(OpKind::BatchNorm, x.shape(), std::move(out));
  n.inputs = {x.node_id(), gamma.node_id(), beta.node_id()};
  n.requires_grad = tape.any_requires_grad({x, gamma, beta});
  if (n.requires_grad) {
    n.saved = std::move(saved);
    n.index = {train ? 1u : 0u};
  }
  return tape.push(std::move(n));
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
  Tape& tape = tape_of(OpKind::SliceRows, {&a});
  if (begin > end || end > a.rows()) {
    shape_error(OpKind::SliceRows, "range [" + std::to_string(begin) + "," + std::to_string(end) + ") of " + to_string(a.shape()));
  }
  const auto v = a.values();
  std::vector<double> out(v.begin() + static_cast<std::ptrdiff_t>(begin * a.cols()),
                          v.begin() + static_cast<std::ptrdiff_t>(end * a.cols()));
  Tape::Node n = make_node(OpKind::SliceRows, {end - begin, a.cols()}, std::move(out));
  n.inputs = {a.node_id()};
  n.index = {begin};
  n.requires_grad = tape.any_requires_grad({a});
  return tape.push(std::move(n));
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  Tape& tape = tape_of(OpKind::SliceCols, {&a});
  if (begin > end || end > a.cols()) {
    shape_error(OpKind::SliceCols, "range [" + std::to_string(begin) + "," + std::to_string(end) + ") of " + to_string(a.shape()));
  }
  const auto v = a.values();
  const std::size_t w = end - begin;
  std::vector<double> out(a.rows() * w);
  for (std::size_t r = 0; r < a.rows(); ++r) std::copy_n(&v[r * a.cols() + begin], w, &out[r * w]);
  Tape::Node n = make_node(OpKind::SliceCols, {a.rows(), w}, std::move(out));
  n.inputs = {a.node_id()};
  n.index = {begin};
  n.requires_grad = tape.any_requires_grad({a});
  return tape.push(std::move(n));
}

Tensor select_rows(const Tensor& a, std::span<const std::size_t> rows) {
  Tape& tape = tape_of(OpKind::SelectRows, {&a});
  const auto v = a.values();
  const std::size_t cols = a.cols();
  std::vector<double> out(rows.size() * cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= a.rows()) {
      shape_error(OpKind::SelectRows, "row " + std::to_string(rows[r]) + " out of range for " + to_string(a.shape()));
    }
    std::copy_n(&v[rows[r] * cols], cols, &out[r * cols]);
  }
  Tape::Node n = make_node(OpKind::SelectRows, {rows.size(), cols}, std::move(out));
  n.inputs = {a.node_id()};
  n.index.assign(rows.begin(), rows.end());
  n.requires_grad = tape.any_requires_grad({a});
  return tape.push(std::move(n));
}

Tensor transpose(const Tensor& a) {
  Tape& tape = tape_of(OpKind::Transpose, {&a});
  const auto v = a.values();
  const std::size_t rows = a.rows(), cols = a.cols();
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = v[r * cols + c];
  }
  Tape::Node n = make_node(OpKind::Transpose, {cols, rows}, std::move(out));
  n.inputs = {a.node_id()};
  n.requires_grad = tape.any_requires_grad({a});
  return tape.push(std::move(n));
}

}  // namespace movrp::ad
