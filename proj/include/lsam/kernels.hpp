#pragma once

#include <cstdint>

// Data-parallel compute kernels. Every kernel partitions work so that each
// output element is written by exactly one thread with a fixed inner
// summation order, which makes results bitwise independent of the thread
// count. Whole-tensor reductions use fixed-size chunk partials combined in
// chunk order for the same reason.
//
// kern::ref:: holds plain serial implementations of the same contracts,
// kept for testing and for the kernel benchmark.

namespace lsam::kern {

using i64 = std::int64_t;

// c[n,m] = a[n,k] @ b[k,m]
void matmul(const double* a, const double* b, double* c, i64 n, i64 k, i64 m);
// da[n,k] += up[n,m] @ b[k,m]^T
void matmul_acc_nt(const double* up, const double* b, double* da, i64 n, i64 k, i64 m);
// db[k,m] += a[n,k]^T @ up[n,m]
void matmul_acc_tn(const double* a, const double* up, double* db, i64 n, i64 k, i64 m);

void add(const double* a, const double* b, double* c, i64 n);
void mul(const double* a, const double* b, double* c, i64 n);
void scale(const double* a, double s, double* c, i64 n);

void sigmoid(const double* x, double* y, i64 n);
void sigmoid_bwd(const double* y, const double* up, double* dx, i64 n);
void gelu(const double* x, double* y, i64 n);
void gelu_bwd(const double* x, const double* up, double* dx, i64 n);

// Row-wise softmax / log-softmax over the last axis, max-subtracted.
void softmax_rows(const double* x, double* y, i64 rows, i64 cols);
void softmax_rows_bwd(const double* y, const double* up, double* dx, i64 rows, i64 cols);
void log_softmax_rows(const double* x, double* y, i64 rows, i64 cols);
void log_softmax_rows_bwd(const double* y, const double* up, double* dx, i64 rows, i64 cols);

// Gated softmax: weights proportional to g * exp(s) over entries with
// g > 0; rows whose gates are all zero produce all-zero weights. Gradients
// flow to both scores and gates (d/dg through s + log g).
void masked_softmax(const double* s, const double* g, double* y, i64 rows, i64 cols);
void masked_softmax_bwd(const double* y, const double* g, const double* up,
                        double* ds, double* dg, i64 rows, i64 cols);

// Layer normalization over the last axis with affine gain/bias.
// aux caches (mean, rstd) per position for the backward pass.
void layer_norm(const double* x, const double* gain, const double* bias, double* y,
                double* aux, i64 lead, i64 cols);
void layer_norm_bwd(const double* x, const double* gain, const double* aux,
                    const double* up, double* dx, double* dgain, double* dbias,
                    i64 lead, i64 cols);

// s[b,j] = scale * dot(q[b,:], k[b,j,:])   q: [b,e], k: [b,d,e]
void attn_scores(const double* q, const double* k, double* s, double sc,
                 i64 b, i64 d, i64 e);
void attn_scores_bwd(const double* q, const double* k, const double* up, double sc,
                     double* dq, double* dk, i64 b, i64 d, i64 e);

// c[b,:] = sum_j w[b,j] * v[b,j,:]; entries with w == 0 are skipped so an
// excluded feature's values never touch the output.
void attn_context(const double* w, const double* v, double* c, i64 b, i64 d, i64 e);
void attn_context_bwd(const double* w, const double* v, const double* up,
                      double* dw, double* dv, i64 b, i64 d, i64 e);

// Deterministic chunked sum (order independent of thread count).
double reduce_sum(const double* x, i64 n);

namespace ref {

void matmul(const double* a, const double* b, double* c, i64 n, i64 k, i64 m);
void matmul_acc_nt(const double* up, const double* b, double* da, i64 n, i64 k, i64 m);
void matmul_acc_tn(const double* a, const double* up, double* db, i64 n, i64 k, i64 m);
void softmax_rows(const double* x, double* y, i64 rows, i64 cols);
void masked_softmax(const double* s, const double* g, double* y, i64 rows, i64 cols);
void layer_norm(const double* x, const double* gain, const double* bias, double* y,
                double* aux, i64 lead, i64 cols);
void attn_scores(const double* q, const double* k, double* s, double sc,
                 i64 b, i64 d, i64 e);
void attn_context(const double* w, const double* v, double* c, i64 b, i64 d, i64 e);
double reduce_sum(const double* x, i64 n);

}  // namespace ref

}  // namespace lsam::kern
