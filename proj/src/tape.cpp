#include "lsam/tape.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "lsam/error.hpp"
#include "lsam/kernels.hpp"

namespace lsam {

namespace {

void ensure_finite(std::span<const double> x, const char* where) {
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(where) + ": non-finite value encountered");
    }
  }
}

}  // namespace

const Shape& Value::shape() const { return tape_->node(*this).shape; }
std::span<const double> Value::data() const { return tape_->node(*this).val; }
std::span<const double> Value::grad() const { return tape_->node(*this).grad; }

double Value::scalar() const {
  const auto& n = tape_->node(*this);
  if (n.shape.numel() != 1) {
    throw ShapeError("scalar(): value has shape " + n.shape.str());
  }
  return n.val[0];
}

void Tape::check_same_tape(Value v) const {
  if (v.tape_ != this) throw Error("value belongs to a different tape");
}

Value Tape::push(const Shape& s, Op op, Value a, Value b, Value c) {
  Node n;
  n.shape = s;
  n.op = op;
  n.val.assign(static_cast<std::size_t>(s.numel()), 0.0);
  n.grad.assign(static_cast<std::size_t>(s.numel()), 0.0);
  if (a.valid()) { check_same_tape(a); n.parent[0] = a.idx_; }
  if (b.valid()) { check_same_tape(b); n.parent[1] = b.idx_; }
  if (c.valid()) { check_same_tape(c); n.parent[2] = c.idx_; }
  nodes_.push_back(std::move(n));
  return Value(this, static_cast<std::int32_t>(nodes_.size() - 1));
}

Value Tape::leaf(const Shape& s, std::span<const double> init) {
  if (static_cast<std::int64_t>(init.size()) != s.numel()) {
    throw ShapeError("leaf: buffer length " + std::to_string(init.size()) +
                     " does not match shape " + s.str());
  }
  ensure_finite(init, "leaf");
  Value v = push(s, Op::kLeaf);
  std::memcpy(node(v).val.data(), init.data(), init.size() * sizeof(double));
  return v;
}

Value Tape::zeros(const Shape& s) { return push(s, Op::kLeaf); }

Value Tape::full(const Shape& s, double x) {
  Value v = push(s, Op::kLeaf);
  for (auto& e : node(v).val) e = x;
  return v;
}

Value Tape::matmul(Value a, Value b) {
  const Shape sa = a.shape();
  const Shape sb = b.shape();
  require_shape(sa.rank >= 2 && sb.rank == 2 && sa.last() == sb.d[0], "matmul", sa, sb);
  Shape out = sa;
  out.d[sa.rank - 1] = sb.d[1];
  Value v = push(out, Op::kMatmul, a, b);
  Node& n = node(v);
  n.i0 = sa.lead();     // rows of the flattened lhs
  n.i1 = sa.last();     // inner dimension
  kern::matmul(node(a).val.data(), node(b).val.data(), n.val.data(), n.i0, n.i1, sb.d[1]);
  ensure_finite(n.val, "matmul");
  return v;
}

Value Tape::add(Value a, Value b) {
  require_shape(a.shape() == b.shape(), "add", a.shape(), b.shape());
  Value v = push(a.shape(), Op::kAdd, a, b);
  kern::add(node(a).val.data(), node(b).val.data(), node(v).val.data(), a.shape().numel());
  ensure_finite(node(v).val, "add");
  return v;
}

Value Tape::sub(Value a, Value b) {
  require_shape(a.shape() == b.shape(), "sub", a.shape(), b.shape());
  Value v = push(a.shape(), Op::kSub, a, b);
  Node& n = node(v);
  const auto& av = node(a).val;
  const auto& bv = node(b).val;
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val[i] = av[i] - bv[i];
  ensure_finite(n.val, "sub");
  return v;
}

Value Tape::add_bias(Value a, Value bias) {
  require_shape(bias.shape().rank == 1 && bias.shape().d[0] == a.shape().last(),
                "add_bias", a.shape(), bias.shape());
  Value v = push(a.shape(), Op::kAddBias, a, bias);
  Node& n = node(v);
  const auto& av = node(a).val;
  const auto& bv = node(bias).val;
  const std::int64_t cols = a.shape().last();
  const std::int64_t lead = a.shape().lead();
  for (std::int64_t r = 0; r < lead; ++r)
    for (std::int64_t j = 0; j < cols; ++j)
      n.val[static_cast<std::size_t>(r * cols + j)] =
          av[static_cast<std::size_t>(r * cols + j)] + bv[static_cast<std::size_t>(j)];
  ensure_finite(n.val, "add_bias");
  return v;
}

Value Tape::mul(Value a, Value b) {
  require_shape(a.shape() == b.shape(), "mul", a.shape(), b.shape());
  Value v = push(a.shape(), Op::kMul, a, b);
  kern::mul(node(a).val.data(), node(b).val.data(), node(v).val.data(), a.shape().numel());
  ensure_finite(node(v).val, "mul");
  return v;
}

Value Tape::colwise_mul(Value m, Value vvec) {
  require_shape(m.shape().rank == 2 && vvec.shape().rank == 1 &&
                    m.shape().d[1] == vvec.shape().d[0],
                "colwise_mul", m.shape(), vvec.shape());
  Value v = push(m.shape(), Op::kColwiseMul, m, vvec);
  Node& n = node(v);
  const auto& mv = node(m).val;
  const auto& vv = node(vvec).val;
  const std::int64_t rows = m.shape().d[0], cols = m.shape().d[1];
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t j = 0; j < cols; ++j)
      n.val[static_cast<std::size_t>(r * cols + j)] =
          mv[static_cast<std::size_t>(r * cols + j)] * vv[static_cast<std::size_t>(j)];
  ensure_finite(n.val, "colwise_mul");
  return v;
}

Value Tape::scale(Value a, double c) {
  Value v = push(a.shape(), Op::kScale, a);
  node(v).c0 = c;
  kern::scale(node(a).val.data(), c, node(v).val.data(), a.shape().numel());
  ensure_finite(node(v).val, "scale");
  return v;
}

Value Tape::add_scalar(Value a, double c) {
  Value v = push(a.shape(), Op::kAddScalar, a);
  node(v).c0 = c;
  Node& n = node(v);
  const auto& av = node(a).val;
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val[i] = av[i] + c;
  ensure_finite(n.val, "add_scalar");
  return v;
}

Value Tape::concat_cols(std::span<const Value> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::int64_t rows = parts[0].shape().d[0];
  std::int64_t total = 0;
  for (const Value& p : parts) {
    require_shape(p.shape().rank == 2 && p.shape().d[0] == rows, "concat_cols",
                  parts[0].shape(), p.shape());
    total += p.shape().d[1];
  }
  Value v = push(Shape::mat(rows, total), Op::kConcatCols);
  Node& n = node(v);
  n.list.reserve(parts.size());
  for (const Value& p : parts) {
    check_same_tape(p);
    n.list.push_back(p.idx_);
  }
  std::int64_t off = 0;
  for (const Value& p : parts) {
    const std::int64_t c = p.shape().d[1];
    const auto& pv = node(p).val;
    for (std::int64_t r = 0; r < rows; ++r)
      std::memcpy(n.val.data() + r * total + off, pv.data() + r * c,
                  static_cast<std::size_t>(c) * sizeof(double));
    off += c;
  }
  return v;
}

Value Tape::stack_feats(std::span<const Value> parts) {
  if (parts.empty()) throw ShapeError("stack_feats: no inputs");
  const Shape s0 = parts[0].shape();
  for (const Value& p : parts)
    require_shape(p.shape().rank == 2 && p.shape() == s0, "stack_feats", s0, p.shape());
  const std::int64_t n_rows = s0.d[0], e = s0.d[1];
  const std::int64_t d = static_cast<std::int64_t>(parts.size());
  Value v = push(Shape::cube(n_rows, d, e), Op::kStackFeats);
  Node& n = node(v);
  for (const Value& p : parts) {
    check_same_tape(p);
    n.list.push_back(p.idx_);
  }
  for (std::int64_t j = 0; j < d; ++j) {
    const auto& pv = node(parts[static_cast<std::size_t>(j)]).val;
    for (std::int64_t r = 0; r < n_rows; ++r)
      std::memcpy(n.val.data() + (r * d + j) * e, pv.data() + r * e,
                  static_cast<std::size_t>(e) * sizeof(double));
  }
  return v;
}

Value Tape::slice_last(Value a, std::int64_t start, std::int64_t len) {
  const Shape sa = a.shape();
  if (start < 0 || len <= 0 || start + len > sa.last()) {
    throw ShapeError("slice_last: range [" + std::to_string(start) + "," +
                     std::to_string(start + len) + ") out of bounds for " + sa.str());
  }
  Shape out = sa;
  out.d[sa.rank - 1] = len;
  Value v = push(out, Op::kSliceLast, a);
  Node& n = node(v);
  n.i0 = start;
  n.i1 = len;
  const std::int64_t cols = sa.last(), lead = sa.lead();
  const auto& av = node(a).val;
  for (std::int64_t r = 0; r < lead; ++r)
    std::memcpy(n.val.data() + r * len, av.data() + r * cols + start,
                static_cast<std::size_t>(len) * sizeof(double));
  return v;
}

Value Tape::sigmoid(Value a) {
  Value v = push(a.shape(), Op::kSigmoid, a);
  kern::sigmoid(node(a).val.data(), node(v).val.data(), a.shape().numel());
  ensure_finite(node(v).val, "sigmoid");
  return v;
}

Value Tape::gelu(Value a) {
  Value v = push(a.shape(), Op::kGelu, a);
  kern::gelu(node(a).val.data(), node(v).val.data(), a.shape().numel());
  ensure_finite(node(v).val, "gelu");
  return v;
}

Value Tape::softmax_rows(Value a) {
  Value v = push(a.shape(), Op::kSoftmax, a);
  kern::softmax_rows(node(a).val.data(), node(v).val.data(), a.shape().lead(),
                     a.shape().last());
  ensure_finite(node(v).val, "softmax_rows");
  return v;
}

Value Tape::log_softmax_rows(Value a) {
  Value v = push(a.shape(), Op::kLogSoftmax, a);
  kern::log_softmax_rows(node(a).val.data(), node(v).val.data(), a.shape().lead(),
                         a.shape().last());
  ensure_finite(node(v).val, "log_softmax_rows");
  return v;
}

Value Tape::masked_softmax(Value scores, Value gates) {
  require_shape(scores.shape() == gates.shape() && scores.shape().rank == 2,
                "masked_softmax", scores.shape(), gates.shape());
  ensure_finite(node(scores).val, "masked_softmax(scores)");
  Value v = push(scores.shape(), Op::kMaskedSoftmax, scores, gates);
  kern::masked_softmax(node(scores).val.data(), node(gates).val.data(),
                       node(v).val.data(), scores.shape().d[0], scores.shape().d[1]);
  ensure_finite(node(v).val, "masked_softmax");
  return v;
}

Value Tape::layer_norm(Value x, Value gain, Value bias) {
  const std::int64_t cols = x.shape().last();
  require_shape(gain.shape().rank == 1 && gain.shape().d[0] == cols, "layer_norm",
                x.shape(), gain.shape());
  require_shape(bias.shape().rank == 1 && bias.shape().d[0] == cols, "layer_norm",
                x.shape(), bias.shape());
  Value v = push(x.shape(), Op::kLayerNorm, x, gain, bias);
  Node& n = node(v);
  n.aux.assign(static_cast<std::size_t>(2 * x.shape().lead()), 0.0);
  kern::layer_norm(node(x).val.data(), node(gain).val.data(), node(bias).val.data(),
                   n.val.data(), n.aux.data(), x.shape().lead(), cols);
  ensure_finite(n.val, "layer_norm");
  return v;
}

Value Tape::attn_scores(Value q, Value keys, double sc) {
  const Shape sq = q.shape();
  const Shape sk = keys.shape();
  require_shape(sq.rank == 2 && sk.rank == 3 && sq.d[0] == sk.d[0] && sq.d[1] == sk.d[2],
                "attn_scores", sq, sk);
  ensure_finite(node(q).val, "attn_scores(q)");
  ensure_finite(node(keys).val, "attn_scores(keys)");
  Value v = push(Shape::mat(sk.d[0], sk.d[1]), Op::kAttnScores, q, keys);
  node(v).c0 = sc;
  kern::attn_scores(node(q).val.data(), node(keys).val.data(), node(v).val.data(), sc,
                    sk.d[0], sk.d[1], sk.d[2]);
  ensure_finite(node(v).val, "attn_scores");
  return v;
}

Value Tape::attn_context(Value weights, Value values) {
  const Shape sw = weights.shape();
  const Shape sv = values.shape();
  require_shape(sw.rank == 2 && sv.rank == 3 && sw.d[0] == sv.d[0] && sw.d[1] == sv.d[1],
                "attn_context", sw, sv);
  ensure_finite(node(values).val, "attn_context(values)");
  Value v = push(Shape::mat(sv.d[0], sv.d[2]), Op::kAttnContext, weights, values);
  kern::attn_context(node(weights).val.data(), node(values).val.data(),
                     node(v).val.data(), sv.d[0], sv.d[1], sv.d[2]);
  ensure_finite(node(v).val, "attn_context");
  return v;
}

Value Tape::rows_lookup(Value table, std::span<const std::int32_t> codes) {
  const Shape st = table.shape();
  require_shape(st.rank == 2, "rows_lookup", st, st);
  for (std::int32_t c : codes) {
    if (c < 0 || c >= st.d[0]) {
      throw DataError("rows_lookup: code " + std::to_string(c) +
                      " outside table with " + std::to_string(st.d[0]) + " rows");
    }
  }
  const std::int64_t n = static_cast<std::int64_t>(codes.size());
  Value v = push(Shape::mat(n, st.d[1]), Op::kRowsLookup, table);
  Node& nd = node(v);
  nd.list.assign(codes.begin(), codes.end());
  const auto& tv = node(table).val;
  for (std::int64_t r = 0; r < n; ++r)
    std::memcpy(nd.val.data() + r * st.d[1],
                tv.data() + static_cast<std::int64_t>(codes[static_cast<std::size_t>(r)]) * st.d[1],
                static_cast<std::size_t>(st.d[1]) * sizeof(double));
  return v;
}

Value Tape::broadcast_row(Value vvec, std::int64_t n) {
  require_shape(vvec.shape().rank == 1, "broadcast_row", vvec.shape(), vvec.shape());
  const std::int64_t e = vvec.shape().d[0];
  Value v = push(Shape::mat(n, e), Op::kBroadcastRow, vvec);
  Node& nd = node(v);
  const auto& src = node(vvec).val;
  for (std::int64_t r = 0; r < n; ++r)
    std::memcpy(nd.val.data() + r * e, src.data(), static_cast<std::size_t>(e) * sizeof(double));
  return v;
}

Value Tape::sum(Value a) {
  Value v = push(Shape::vec(1), Op::kSum, a);
  node(v).val[0] = kern::reduce_sum(node(a).val.data(), a.shape().numel());
  ensure_finite(node(v).val, "sum");
  return v;
}

Value Tape::mean(Value a) {
  Value v = push(Shape::vec(1), Op::kMean, a);
  const std::int64_t n = a.shape().numel();
  node(v).val[0] = kern::reduce_sum(node(a).val.data(), n) / static_cast<double>(n);
  ensure_finite(node(v).val, "mean");
  return v;
}

Value Tape::nll_mean(Value logp, std::span<const std::int32_t> labels) {
  const Shape s = logp.shape();
  require_shape(s.rank == 2, "nll_mean", s, s);
  if (static_cast<std::int64_t>(labels.size()) != s.d[0]) {
    throw ShapeError("nll_mean: " + std::to_string(labels.size()) + " labels for " +
                     s.str() + " log-probabilities");
  }
  for (std::int32_t y : labels) {
    if (y < 0 || y >= s.d[1]) {
      throw DataError("nll_mean: label " + std::to_string(y) + " outside [0," +
                      std::to_string(s.d[1]) + ")");
    }
  }
  Value v = push(Shape::vec(1), Op::kNllMean, logp);
  Node& n = node(v);
  n.list.assign(labels.begin(), labels.end());
  const auto& lp = node(logp).val;
  double acc = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    acc -= lp[i * static_cast<std::size_t>(s.d[1]) + static_cast<std::size_t>(labels[i])];
  n.val[0] = acc / static_cast<double>(labels.size());
  ensure_finite(n.val, "nll_mean");
  return v;
}

void Tape::backward(Value loss) {
  check_same_tape(loss);
  if (loss.shape().numel() != 1) {
    throw ShapeError("backward: loss must be scalar, got " + loss.shape().str());
  }
  node(loss).grad[0] = 1.0;
  for (std::int32_t i = loss.idx_; i >= 0; --i) backward_node(i);
}

void Tape::backward_node(std::int32_t idx) {
  Node& n = nodes_[static_cast<std::size_t>(idx)];
  if (n.op == Op::kLeaf) return;
  auto P = [&](int slot) -> Node& { return nodes_[static_cast<std::size_t>(n.parent[slot])]; };
  const double* up = n.grad.data();
  switch (n.op) {
    case Op::kMatmul: {
      Node& a = P(0);
      Node& b = P(1);
      const std::int64_t rows = n.i0, inner = n.i1, m = b.shape.d[1];
      kern::matmul_acc_nt(up, b.val.data(), a.grad.data(), rows, inner, m);
      kern::matmul_acc_tn(a.val.data(), up, b.grad.data(), rows, inner, m);
      break;
    }
    case Op::kAdd: {
      Node& a = P(0);
      Node& b = P(1);
      for (std::size_t i = 0; i < n.grad.size(); ++i) {
        a.grad[i] += up[i];
        b.grad[i] += up[i];
      }
      break;
    }
    case Op::kSub: {
      Node& a = P(0);
      Node& b = P(1);
      for (std::size_t i = 0; i < n.grad.size(); ++i) {
        a.grad[i] += up[i];
        b.grad[i] -= up[i];
      }
      break;
    }
    case Op::kAddBias: {
      Node& a = P(0);
      Node& b = P(1);
      const std::int64_t cols = n.shape.last(), lead = n.shape.lead();
      for (std::int64_t r = 0; r < lead; ++r)
        for (std::int64_t j = 0; j < cols; ++j) {
          a.grad[static_cast<std::size_t>(r * cols + j)] += up[r * cols + j];
          b.grad[static_cast<std::size_t>(j)] += up[r * cols + j];
        }
      break;
    }
    case Op::kMul: {
      Node& a = P(0);
      Node& b = P(1);
      for (std::size_t i = 0; i < n.grad.size(); ++i) {
        a.grad[i] += up[i] * b.val[i];
        b.grad[i] += up[i] * a.val[i];
      }
      break;
    }
    case Op::kColwiseMul: {
      Node& a = P(0);
      Node& b = P(1);
      const std::int64_t rows = n.shape.d[0], cols = n.shape.d[1];
      for (std::int64_t r = 0; r < rows; ++r)
        for (std::int64_t j = 0; j < cols; ++j) {
          a.grad[static_cast<std::size_t>(r * cols + j)] +=
              up[r * cols + j] * b.val[static_cast<std::size_t>(j)];
          b.grad[static_cast<std::size_t>(j)] +=
              up[r * cols + j] * a.val[static_cast<std::size_t>(r * cols + j)];
        }
      break;
    }
    case Op::kScale: {
      Node& a = P(0);
      for (std::size_t i = 0; i < n.grad.size(); ++i) a.grad[i] += up[i] * n.c0;
      break;
    }
    case Op::kAddScalar: {
      Node& a = P(0);
      for (std::size_t i = 0; i < n.grad.size(); ++i) a.grad[i] += up[i];
      break;
    }
    case Op::kConcatCols: {
      const std::int64_t rows = n.shape.d[0], total = n.shape.d[1];
      std::int64_t off = 0;
      for (std::int32_t pi : n.list) {
        Node& p = nodes_[static_cast<std::size_t>(pi)];
        const std::int64_t c = p.shape.d[1];
        for (std::int64_t r = 0; r < rows; ++r)
          for (std::int64_t j = 0; j < c; ++j)
            p.grad[static_cast<std::size_t>(r * c + j)] += up[r * total + off + j];
        off += c;
      }
      break;
    }
    case Op::kStackFeats: {
      const std::int64_t rows = n.shape.d[0], d = n.shape.d[1], e = n.shape.d[2];
      for (std::int64_t j = 0; j < d; ++j) {
        Node& p = nodes_[static_cast<std::size_t>(n.list[static_cast<std::size_t>(j)])];
        for (std::int64_t r = 0; r < rows; ++r)
          for (std::int64_t q = 0; q < e; ++q)
            p.grad[static_cast<std::size_t>(r * e + q)] += up[(r * d + j) * e + q];
      }
      break;
    }
    case Op::kSliceLast: {
      Node& a = P(0);
      const std::int64_t cols = a.shape.last(), lead = a.shape.lead();
      const std::int64_t start = n.i0, len = n.i1;
      for (std::int64_t r = 0; r < lead; ++r)
        for (std::int64_t j = 0; j < len; ++j)
          a.grad[static_cast<std::size_t>(r * cols + start + j)] += up[r * len + j];
      break;
    }
    case Op::kSigmoid:
      kern::sigmoid_bwd(n.val.data(), up, P(0).grad.data(), n.shape.numel());
      break;
    case Op::kGelu:
      kern::gelu_bwd(P(0).val.data(), up, P(0).grad.data(), n.shape.numel());
      break;
    case Op::kSoftmax:
      kern::softmax_rows_bwd(n.val.data(), up, P(0).grad.data(), n.shape.lead(),
                             n.shape.last());
      break;
    case Op::kLogSoftmax:
      kern::log_softmax_rows_bwd(n.val.data(), up, P(0).grad.data(), n.shape.lead(),
                                 n.shape.last());
      break;
    case Op::kMaskedSoftmax:
      kern::masked_softmax_bwd(n.val.data(), P(1).val.data(), up, P(0).grad.data(),
                               P(1).grad.data(), n.shape.d[0], n.shape.d[1]);
      break;
    case Op::kLayerNorm:
      kern::layer_norm_bwd(P(0).val.data(), P(1).val.data(), n.aux.data(), up,
                           P(0).grad.data(), P(1).grad.data(), P(2).grad.data(),
                           n.shape.lead(), n.shape.last());
      break;
    case Op::kAttnScores: {
      Node& q = P(0);
      Node& k = P(1);
      kern::attn_scores_bwd(q.val.data(), k.val.data(), up, n.c0, q.grad.data(),
                            k.grad.data(), k.shape.d[0], k.shape.d[1], k.shape.d[2]);
      break;
    }
    case Op::kAttnContext: {
      Node& w = P(0);
      Node& v = P(1);
      kern::attn_context_bwd(w.val.data(), v.val.data(), up, w.grad.data(),
                             v.grad.data(), v.shape.d[0], v.shape.d[1], v.shape.d[2]);
      break;
    }
    case Op::kRowsLookup: {
      Node& t = P(0);
      const std::int64_t e = n.shape.d[1];
      for (std::size_t r = 0; r < n.list.size(); ++r) {
        double* dst = t.grad.data() + static_cast<std::int64_t>(n.list[r]) * e;
        const double* src = up + static_cast<std::int64_t>(r) * e;
        for (std::int64_t j = 0; j < e; ++j) dst[j] += src[j];
      }
      break;
    }
    case Op::kBroadcastRow: {
      Node& a = P(0);
      const std::int64_t rows = n.shape.d[0], e = n.shape.d[1];
      for (std::int64_t r = 0; r < rows; ++r)
        for (std::int64_t j = 0; j < e; ++j)
          a.grad[static_cast<std::size_t>(j)] += up[r * e + j];
      break;
    }
    case Op::kSum: {
      Node& a = P(0);
      const double g = up[0];
      for (auto& x : a.grad) x += g;
      break;
    }
    case Op::kMean: {
      Node& a = P(0);
      const double g = up[0] / static_cast<double>(a.shape.numel());
      for (auto& x : a.grad) x += g;
      break;
    }
    case Op::kNllMean: {
      Node& a = P(0);
      const std::int64_t cols = a.shape.d[1];
      const double g = -up[0] / static_cast<double>(n.list.size());
      for (std::size_t i = 0; i < n.list.size(); ++i)
        a.grad[i * static_cast<std::size_t>(cols) + static_cast<std::size_t>(n.list[i])] += g;
      break;
    }
    case Op::kLeaf:
      break;
  }
}

void Tape::reset() { nodes_.clear(); }

}  // namespace lsam
