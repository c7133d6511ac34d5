#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "movrp/ad/param_store.hpp"
#include "movrp/ad/shape.hpp"

namespace movrp::ad {

class Tape;

// Blocked softmax entries get this additive offset instead of -inf.
inline constexpr double kBlockedLogit = -1e18;
inline constexpr double kBatchNormEps = 1e-8;
inline constexpr double kBatchNormMomentum = 0.1;

// 1 = pass, 0 = blocked.
using Mask = std::vector<std::uint8_t>;

// Lightweight handle to a value living on a Tape. Copying a Tensor never
// copies data; the tape owns storage for its whole lifetime.
class Tensor {
 public:
  Tensor() = default;

  bool defined() const { return tape_ != nullptr; }
  const Shape& shape() const;
  std::size_t rows() const { return shape().rows; }
  std::size_t cols() const { return shape().cols; }
  std::size_t size() const { return shape().size(); }
  std::span<const double> values() const;
  double operator()(std::size_t r, std::size_t c) const { return values()[r * cols() + c]; }
  double item() const;
  bool requires_grad() const;
  int node_id() const { return id_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Tensor(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

enum class OpKind : std::uint8_t {
  Leaf,
  MatMul,
  Add,
  Mul,
  Scale,
  ConcatCols,
  ConcatRows,
  MeanRows,
  MeanCols,
  Sum,
  Relu,
  Tanh,
  Exp,
  Log,
  MaskedSoftmax,
  MaskedLogSoftmax,
  BatchNorm,
  SliceRows,
  SliceCols,
  SelectRows,
  Transpose,
};

const char* op_name(OpKind kind);

enum class NormMode { Train, Eval };

// Per-feature statistics of one train-mode batch-norm application; the caller
// folds them into the running buffers.
struct BatchStats {
  std::vector<double> mean;
  std::vector<double> var_unbiased;
};

enum class Retain { No, Yes };

// Define-by-run record of primitive applications. Node ids are assigned in
// creation order, which is a topological order of the DAG.
class Tape {
 public:
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }
  std::size_t node_count() const { return nodes_.size(); }

  Tensor constant(Shape shape, std::vector<double> values);
  Tensor scalar(double v) { return constant({1, 1}, {v}); }
  // Leaf bound to one parameter slot; repeated calls return the same node.
  Tensor param(const ParamStore& store, std::size_t slot);
  Tensor param(const ParamStore& store, std::string_view name);

  // Reverse sweep from a scalar node. Returns d(loss)/d(param) for every entry
  // of `store` (zero where unreachable). Without Retain::Yes the tape is
  // consumed and a second call throws.
  ParamStore backward(const Tensor& loss, const ParamStore& store, Retain retain = Retain::No);

  // Implementation interface for the primitive functions below.
  struct Node {
    OpKind kind = OpKind::Leaf;
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    std::vector<int> inputs;
    bool requires_grad = false;
    std::vector<double> saved;
    std::vector<std::size_t> index;
    double scalar = 0.0;
    const ParamStore* store = nullptr;
    std::size_t slot = 0;
  };
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  Tensor push(Node node);
  bool any_requires_grad(std::initializer_list<Tensor> inputs) const;
  bool any_requires_grad(std::span<const Tensor> inputs) const;

 private:
  void backprop_node(std::size_t id);
  std::vector<double>& grad_of(int id);

  bool record_;
  bool consumed_ = false;
  std::vector<Node> nodes_;
  std::vector<std::pair<const ParamStore*, std::vector<int>>> param_nodes_;
};

// ---- primitives -----------------------------------------------------------
// All inputs must live on the same tape. Shape violations throw ShapeError
// naming the primitive and the offending shapes.

Tensor matmul(const Tensor& a, const Tensor& b);
// Elementwise with optional row broadcast: b may be 1 x cols(a).
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_cols(std::initializer_list<Tensor> parts);
Tensor concat_rows(std::initializer_list<Tensor> parts);
Tensor mean_rows(const Tensor& a);  // -> 1 x cols
Tensor mean_cols(const Tensor& a);  // -> rows x 1
Tensor sum(const Tensor& a);        // -> 1 x 1
Tensor relu(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
// Row-wise softmax with the same per-column mask applied to every row. An
// empty mask passes everything.
Tensor masked_softmax(const Tensor& a, const Mask& mask = {});
Tensor masked_log_softmax(const Tensor& a, const Mask& mask = {});
// Per-column normalization over all rows. Train mode needs at least two rows.
Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, NormMode mode,
                  std::span<const double> running_mean, std::span<const double> running_var,
                  BatchStats* batch_stats = nullptr, double eps = kBatchNormEps);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
Tensor select_rows(const Tensor& a, std::span<const std::size_t> rows);
Tensor transpose(const Tensor& a);

}  // namespace movrp::ad
