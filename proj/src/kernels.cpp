#include "lsam/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace lsam::kern {

namespace {
// Below this many inner operations the parallel region costs more than it
// saves.
constexpr i64 kGrain = 16 * 1024;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace

void matmul(const double* a, const double* b, double* c, i64 n, i64 k, i64 m) {
#pragma omp parallel for if (n * k * m > kGrain) schedule(static)
  for (i64 i = 0; i < n; ++i) {
    double* ci = c + i * m;
    for (i64 j = 0; j < m; ++j) ci[j] = 0.0;
    const double* ai = a + i * k;
    for (i64 p = 0; p < k; ++p) {
      const double aip = ai[p];
      const double* bp = b + p * m;
      for (i64 j = 0; j < m; ++j) ci[j] += aip * bp[j];
    }
  }
}

void matmul_acc_nt(const double* up, const double* b, double* da, i64 n, i64 k, i64 m) {
#pragma omp parallel for if (n * k * m > kGrain) schedule(static)
  for (i64 i = 0; i < n; ++i) {
    const double* ui = up + i * m;
    double* di = da + i * k;
    for (i64 p = 0; p < k; ++p) {
      const double* bp = b + p * m;
      double acc = 0.0;
      for (i64 j = 0; j < m; ++j) acc += ui[j] * bp[j];
      di[p] += acc;
    }
  }
}

void matmul_acc_tn(const double* a, const double* up, double* db, i64 n, i64 k, i64 m) {
// Partitioned over output rows p so each db element has one writer.
#pragma omp parallel for if (n * k * m > kGrain) schedule(static)
  for (i64 p = 0; p < k; ++p) {
    double* dp = db + p * m;
    for (i64 i = 0; i < n; ++i) {
      const double aip = a[i * k + p];
      const double* ui = up + i * m;
      for (i64 j = 0; j < m; ++j) dp[j] += aip * ui[j];
    }
  }
}

void add(const double* a, const double* b, double* c, i64 n) {
#pragma omp parallel for if (n > kGrain) schedule(static)
  for (i64 i = 0; i < n; ++i) c[i] = a[i] + b[i];
}

void mul(const double* a, const double* b, double* c, i64 n) {
#pragma omp parallel for if (n > kGrain) schedule(static)
  for (i64 i = 0; i < n; ++i) c[i] = a[i] * b[i];
}

void scale(const double* a, double s, double* c, i64 n) {
#pragma omp parallel for if (n > kGrain) schedule(static)
  for (i64 i = 0; i < n; ++i) c[i] = a[i] * s;
}

void sigmoid(const double* x, double* y, i64 n) {
#pragma omp parallel for if (n > kGrain / 8) schedule(static)
  for (i64 i = 0; i < n; ++i) {
    const double v = x[i];
    y[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                    : std::exp(v) / (1.0 + std::exp(v));
  }
}

void sigmoid_bwd(const double* y, const double* up, double* dx, i64 n) {
#pragma omp parallel for if (n > kGrain) schedule(static)
  for (i64 i = 0; i < n; ++i) dx[i] += up[i] * y[i] * (1.0 - y[i]);
}

void gelu(const double* x, double* y, i64 n) {
#pragma omp parallel for if (n > kGrain / 8) schedule(static)
  for (i64 i = 0; i < n; ++i) {
    const double v = x[i];
    y[i] = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
  }
}

void gelu_bwd(const double* x, const double* up, double* dx, i64 n) {
#pragma omp parallel for if (n > kGrain / 8) schedule(static)
  for (i64 i = 0; i < n; ++i) {
    const double v = x[i];
    const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
    dx[i] += up[i] * (cdf + v * pdf);
  }
}

void softmax_rows(const double* x, double* y, i64 rows, i64 cols) {
#pragma omp parallel for if (rows * cols > kGrain / 8) schedule(static)
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
    const double inv = 1.0 / denom;
    for (i64 j = 0; j < cols; ++j) yr[j] *= inv;
  }
}

void softmax_rows_bwd(const double* y, const double* up, double* dx, i64 rows, i64 cols) {
#pragma omp parallel for if (rows * cols > kGrain) schedule(static)
  for (i64 r = 0; r < rows; ++r) {
    const double* yr = y + r * cols;
    const double* ur = up + r * cols;
    double* dr = dx + r * cols;
    double dot = 0.0;
    for (i64 j = 0; j < cols; ++j) dot += ur[j] * yr[j];
    for (i64 j = 0; j < cols; ++j) dr[j] += yr[j] * (ur[j] - dot);
  }
}

void log_softmax_rows(const double* x, double* y, i64 rows, i64 cols) {
#pragma omp parallel for if (rows * cols > kGrain / 8) schedule(static)
  for (i64 r = 0; r < rows; ++r) {
    const double* xr = x + r * cols;
    double* yr = y + r * cols;
    double mx = xr[0];
    for (i64 j = 1; j < cols; ++j) mx = std::max(mx, xr[j]);
    double denom = 0.0;
    for (i64 j = 0; j < cols; ++j) denom += std::exp(xr[j] - mx);
    const double lse = mx + std::log(denom);
    for (i64 j = 0; j < cols; ++j) yr[j] = xr[j] - lse;
  }
}

void log_softmax_rows_bwd(const double* y, const double* up, double* dx, i64 rows, i64 cols) {
#pragma omp parallel for if (rows * cols > kGrain / 8) schedule(static)
  for (i64 r = 0; r < rows; ++r) {
    const double* yr = y + r * cols;
    const double* ur = up + r * cols;
    double* dr = dx + r * cols;
    double usum = 0.0;
    for (i64 j = 0; j < cols; ++j) usum += ur[j];
    for (i64 j = 0; j < cols; ++j) dr[j] += ur[j] - std::exp(yr[j]) * usum;
  }
}

void masked_softmax(const double* s, const double* g, double* y, i64 rows, i64 cols) {
#pragma omp parallel for if (rows * cols > kGrain / 8) schedule(static)
  for (i64 r = 0; r < rows; ++r) {
    const double* sr = s + r * cols;
    const double* gr = g + r * cols;
    double* yr = y + r * cols;
    double mx = -1e300;
    for (i64 j = 0; j < cols; ++j) {
      if (gr[j] > 0.0) mx = std::max(mx, sr[j] + std::log(gr[j]));
    }
    if (mx == -1e300) {  // nothing participates: defined as all-zero weights
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

void masked_softmax_bwd(const double* y, const double* g, const double* up,
                        double* ds, double* dg, i64 rows, i64 cols) {
#pragma omp parallel for if (rows * cols > kGrain) schedule(static)
  for (i64 r = 0; r < rows; ++r) {
    const double* yr = y + r * cols;
    const double* gr = g + r * cols;
    const double* ur = up + r * cols;
    double* dsr = ds + r * cols;
    double* dgr = dg + r * cols;
    double dot = 0.0;
    for (i64 j = 0; j < cols; ++j) dot += ur[j] * yr[j];
    for (i64 j = 0; j < cols; ++j) {
      const double d_logit = yr[j] * (ur[j] - dot);
      dsr[j] += d_logit;
      if (gr[j] > 0.0) dgr[j] += d_logit / gr[j];
    }
  }
}

void layer_norm(const double* x, const double* gain, const double* bias, double* y,
                double* aux, i64 lead, i64 cols) {
  constexpr double kEps = 1e-5;
#pragma omp parallel for if (lead * cols > kGrain) schedule(static)
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

void layer_norm_bwd(const double* x, const double* gain, const double* aux,
                    const double* up, double* dx, double* dgain, double* dbias,
                    i64 lead, i64 cols) {
  // dgain/dbias accumulate across positions; kept serial over the lead axis
  // so the accumulation order is fixed.
  for (i64 r = 0; r < lead; ++r) {
    const double* xr = x + r * cols;
    const double* ur = up + r * cols;
    double* dxr = dx + r * cols;
    const double mean = aux[2 * r];
    const double rstd = aux[2 * r + 1];
    double sum_ug = 0.0, sum_ugx = 0.0;
    for (i64 j = 0; j < cols; ++j) {
      const double xhat = (xr[j] - mean) * rstd;
      const double ug = ur[j] * gain[j];
      sum_ug += ug;
      sum_ugx += ug * xhat;
      dgain[j] += ur[j] * xhat;
      dbias[j] += ur[j];
    }
    const double inv_n = 1.0 / static_cast<double>(cols);
    for (i64 j = 0; j < cols; ++j) {
      const double xhat = (xr[j] - mean) * rstd;
      dxr[j] += rstd * (ur[j] * gain[j] - inv_n * sum_ug - inv_n * xhat * sum_ugx);
    }
  }
}

void attn_scores(const double* q, const double* k, double* s, double sc,
                 i64 b, i64 d, i64 e) {
#pragma omp parallel for if (b * d * e > kGrain) schedule(static)
  for (i64 i = 0; i < b; ++i) {
    const double* qi = q + i * e;
    const double* ki = k + i * d * e;
    double* si = s + i * d;
    for (i64 j = 0; j < d; ++j) {
      const double* kij = ki + j * e;
      double acc = 0.0;
      for (i64 p = 0; p < e; ++p) acc += qi[p] * kij[p];
      si[j] = acc * sc;
    }
  }
}

void attn_scores_bwd(const double* q, const double* k, const double* up, double sc,
                     double* dq, double* dk, i64 b, i64 d, i64 e) {
#pragma omp parallel for if (b * d * e > kGrain) schedule(static)
  for (i64 i = 0; i < b; ++i) {
    const double* qi = q + i * e;
    const double* ki = k + i * d * e;
    const double* ui = up + i * d;
    double* dqi = dq + i * e;
    double* dki = dk + i * d * e;
    for (i64 j = 0; j < d; ++j) {
      const double u = ui[j] * sc;
      const double* kij = ki + j * e;
      double* dkij = dki + j * e;
      for (i64 p = 0; p < e; ++p) {
        dqi[p] += u * kij[p];
        dkij[p] += u * qi[p];
      }
    }
  }
}

void attn_context(const double* w, const double* v, double* c, i64 b, i64 d, i64 e) {
#pragma omp parallel for if (b * d * e > kGrain) schedule(static)
  for (i64 i = 0; i < b; ++i) {
    const double* wi = w + i * d;
    const double* vi = v + i * d * e;
    double* ci = c + i * e;
    for (i64 p = 0; p < e; ++p) ci[p] = 0.0;
    for (i64 j = 0; j < d; ++j) {
      const double wj = wi[j];
      if (wj == 0.0) continue;  // excluded features must not touch the sum
      const double* vij = vi + j * e;
      for (i64 p = 0; p < e; ++p) ci[p] += wj * vij[p];
    }
  }
}

void attn_context_bwd(const double* w, const double* v, const double* up,
                      double* dw, double* dv, i64 b, i64 d, i64 e) {
#pragma omp parallel for if (b * d * e > kGrain) schedule(static)
  for (i64 i = 0; i < b; ++i) {
    const double* wi = w + i * d;
    const double* vi = v + i * d * e;
    const double* ui = up + i * e;
    double* dwi = dw + i * d;
    double* dvi = dv + i * d * e;
    for (i64 j = 0; j < d; ++j) {
      const double* vij = vi + j * e;
      double* dvij = dvi + j * e;
      double acc = 0.0;
      const double wj = wi[j];
      for (i64 p = 0; p < e; ++p) {
        acc += ui[p] * vij[p];
        dvij[p] += wj * ui[p];
      }
      dwi[j] += acc;
    }
  }
}

double reduce_sum(const double* x, i64 n) {
  constexpr i64 kChunk = 4096;
  const i64 nchunks = (n + kChunk - 1) / kChunk;
  if (nchunks <= 1) {
    double acc = 0.0;
    for (i64 i = 0; i < n; ++i) acc += x[i];
    return acc;
  }
  double partials[256];
  double* part = partials;
  std::vector<double> heap;
  if (nchunks > 256) {
    heap.resize(static_cast<size_t>(nchunks));
    part = heap.data();
  }
#pragma omp parallel for schedule(static)
  for (i64 c = 0; c < nchunks; ++c) {
    const i64 lo = c * kChunk;
    const i64 hi = std::min(n, lo + kChunk);
    double acc = 0.0;
    for (i64 i = lo; i < hi; ++i) acc += x[i];
    part[c] = acc;
  }
  double total = 0.0;
  for (i64 c = 0; c < nchunks; ++c) total += part[c];
  return total;
}

}  // namespace lsam::kern
