#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lsam/shape.hpp"

namespace lsam {

class Tape;

// Cheap handle to a node on a Tape. Valid until the owning tape is reset.
class Value {
 public:
  Value() = default;

  const Shape& shape() const;
  std::span<const double> data() const;
  std::span<const double> grad() const;
  double scalar() const;
  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Value(Tape* t, std::int32_t i) : tape_(t), idx_(i) {}
  Tape* tape_ = nullptr;
  std::int32_t idx_ = -1;
};

// Define-by-run reverse-mode record. The graph is rebuilt every step; nodes
// are stored in creation order, which is already a topological order, so the
// backward pass is a single reverse sweep. A tape is confined to one thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves. Input data must be finite.
  Value leaf(const Shape& s, std::span<const double> init);
  Value zeros(const Shape& s);
  Value full(const Shape& s, double v);

  // [n,k]@[k,m] -> [n,m]; a rank-3 lhs [b,r,k] is treated as [(b*r),k] and
  // the result keeps the lhs leading extents.
  Value matmul(Value a, Value b);
  Value add(Value a, Value b);          // same shape
  Value sub(Value a, Value b);          // same shape
  Value add_bias(Value a, Value bias);  // bias: rank-1, broadcast over last axis
  Value mul(Value a, Value b);          // elementwise, same shape
  Value colwise_mul(Value m, Value v);  // m: [n,d], v: [d]
  Value scale(Value a, double c);
  Value add_scalar(Value a, double c);
  Value concat_cols(std::span<const Value> parts);  // rank-2, same row count
  Value stack_feats(std::span<const Value> parts);  // d x [n,e] -> [n,d,e]
  Value slice_last(Value a, std::int64_t start, std::int64_t len);
  Value sigmoid(Value a);
  Value gelu(Value a);
  Value softmax_rows(Value a);
  Value log_softmax_rows(Value a);
  Value masked_softmax(Value scores, Value gates);  // both [n,d]
  Value layer_norm(Value x, Value gain, Value bias);
  Value attn_scores(Value q, Value keys, double scale);  // [n,e],[n,d,e] -> [n,d]
  Value attn_context(Value weights, Value values);       // [n,d],[n,d,e] -> [n,e]
  Value rows_lookup(Value table, std::span<const std::int32_t> codes);
  Value broadcast_row(Value v, std::int64_t n);  // [e] -> [n,e]
  Value sum(Value a);
  Value mean(Value a);
  // -mean_i logp[i, label_i]; logp is a log-probability matrix [n,C].
  Value nll_mean(Value logp, std::span<const std::int32_t> labels);

  // Populates grads of every node reachable from `loss` (creation order).
  void backward(Value loss);

  void reset();
  std::size_t node_count() const { return nodes_.size(); }

 private:
  enum class Op : std::uint8_t {
    kLeaf, kMatmul, kAdd, kSub, kAddBias, kMul, kColwiseMul, kScale, kAddScalar,
    kConcatCols, kStackFeats, kSliceLast, kSigmoid, kGelu, kSoftmax, kLogSoftmax,
    kMaskedSoftmax, kLayerNorm, kAttnScores, kAttnContext, kRowsLookup,
    kBroadcastRow, kSum, kMean, kNllMean,
  };

  struct Node {
    Shape shape;
    Op op = Op::kLeaf;
    std::vector<double> val;
    std::vector<double> grad;
    std::array<std::int32_t, 3> parent{-1, -1, -1};
    std::int64_t i0 = 0, i1 = 0;  // op-specific (slice start/len, dims)
    double c0 = 0.0;              // op-specific scalar
    std::vector<std::int32_t> list;  // concat/stack parents, lookup codes, labels
    std::vector<double> aux;         // layer_norm mean/rstd cache
  };

  Node& node(Value v) { return nodes_[static_cast<std::size_t>(v.idx_)]; }
  const Node& node(Value v) const { return nodes_[static_cast<std::size_t>(v.idx_)]; }
  Value push(const Shape& s, Op op, Value a = {}, Value b = {}, Value c = {});
  void check_same_tape(Value v) const;
  void backward_node(std::int32_t idx);

  std::vector<Node> nodes_;

  friend class Value;
};

}  // namespace lsam
