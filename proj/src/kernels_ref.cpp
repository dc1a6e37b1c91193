#include <algorithm>
#include <cmath>

#include "lsam/kernels.hpp"

// Plain serial implementations, written as the textbook loops. Tests check
// the OpenMP kernels against these; the benchmark compares their speed.

namespace lsam::kern::ref {

void matmul(const double* a, const double* b, double* c, i64 n, i64 k, i64 m) {
  for (i64 i = 0; i < n; ++i) {
    for (i64 j = 0; j < m; ++j) {
      double acc = 0.0;
      for (i64 p = 0; p < k; ++p) acc += a[i * k + p] * b[p * m + j];
      c[i * m + j] = acc;
    }
  }
}

void matmul_acc_nt(const double* up, const double* b, double* da, i64 n, i64 k, i64 m) {
  for (i64 i = 0; i < n; ++i)
    for (i64 p = 0; p < k; ++p) {
      double acc = 0.0;
      for (i64 j = 0; j < m; ++j) acc += up[i * m + j] * b[p * m + j];
      da[i * k + p] += acc;
    }
}

void matmul_acc_tn(const double* a, const double* up, double* db, i64 n, i64 k, i64 m) {
  for (i64 p = 0; p < k; ++p)
    for (i64 j = 0; j < m; ++j) {
      double acc = 0.0;
      for (i64 i = 0; i < n; ++i) acc += a[i * k + p] * up[i * m + j];
      db[p * m + j] += acc;
    }
}

void softmax_rows(const double* x, double* y, i64 rows, i64 cols) {
  for (i64 r = 0; r < rows; ++r) {
    const double* xr = x + r * cols;
    double* yr = y + r * cols;
    double mx = xr[0];
    for (i64 j = 1; j < cols; ++j) mx = std::max(mx, xr[j]);
    double denom = 0.0;
    for (i64 j = 0; j < cols; ++j) {
      yr[j] = std::exp(xr[j] - mx);
      denom += yr[j];
    }
    for (i64 j = 0; j < cols; ++j) yr[j] /= denom;
  }
}

void masked_softmax(const double* s, const double* g, double* y, i64 rows, i64 cols) {
  for (i64 r = 0; r < rows; ++r) {
    const double* sr = s + r * cols;
    const double* gr = g + r * cols;
    double* yr = y + r * cols;
    double mx = -1e300;
    for (i64 j = 0; j < cols; ++j)
      if (gr[j] > 0.0) mx = std::max(mx, sr[j] + std::log(gr[j]));
    if (mx == -1e300) {
      for (i64 j = 0; j < cols; ++j) yr[j] = 0.0;
      continue;
    }
    double denom = 0.0;
    for (i64 j = 0; j < cols; ++j) {
      yr[j] = gr[j] > 0.0 ? std::exp(sr[j] + std::log(gr[j]) - mx) : 0.0;
      denom += yr[j];
    }
    const double inv = 1.0 / denom;
    for (i64 j = 0; j < cols; ++j) yr[j] *= inv;
  }
}

void layer_norm(const double* x, const double* gain, const double* bias, double* y,
                double* aux, i64 lead, i64 cols) {
  constexpr double kEps = 1e-5;
  for (i64 r = 0; r < lead; ++r) {
    const double* xr = x + r * cols;
    double* yr = y + r * cols;
    double mean = 0.0;
    for (i64 j = 0; j < cols; ++j) mean += xr[j];
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (i64 j = 0; j < cols; ++j) {
      const double c = xr[j] - mean;
      var += c * c;
    }
    var /= static_cast<double>(cols);
    const double rstd = 1.0 / std::sqrt(var + kEps);
    aux[2 * r] = mean;
    aux[2 * r + 1] = rstd;
    for (i64 j = 0; j < cols; ++j) yr[j] = (xr[j] - mean) * rstd * gain[j] + bias[j];
  }
}

void attn_scores(const double* q, const double* k, double* s, double sc,
                 i64 b, i64 d, i64 e) {
  for (i64 i = 0; i < b; ++i)
    for (i64 j = 0; j < d; ++j) {
      double acc = 0.0;
      for (i64 p = 0; p < e; ++p) acc += q[i * e + p] * k[(i * d + j) * e + p];
      s[i * d + j] = acc * sc;
    }
}

void attn_context(const double* w, const double* v, double* c, i64 b, i64 d, i64 e) {
  for (i64 i = 0; i < b; ++i) {
    for (i64 p = 0; p < e; ++p) c[i * e + p] = 0.0;
    for (i64 j = 0; j < d; ++j) {
      const double wj = w[i * d + j];
      if (wj == 0.0) continue;
      for (i64 p = 0; p < e; ++p) c[i * e + p] += wj * v[(i * d + j) * e + p];
    }
  }
}

double reduce_sum(const double* x, i64 n) {
  double acc = 0.0;
  for (i64 i = 0; i < n; ++i) acc += x[i];
  return acc;
}

}  // namespace lsam::kern::ref
