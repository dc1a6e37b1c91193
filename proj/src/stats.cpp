#include "lsam/stats.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "lsam/error.hpp"

namespace lsam {

double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

TTest two_sample_t_test(std::span<const double> a, std::span<const double> b) {
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  if (a.size() < 2 || b.size() < 2) throw Error("t-test: needs at least 2 samples per group");
  const double ma = mean_of(a), mb = mean_of(b);
  const double va = sample_variance(a), vb = sample_variance(b);
  const double dof = na + nb - 2.0;
  const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / dof;
  TTest out;
  if (pooled <= 0.0) {
    out.statistic = ma == mb ? 0.0 : std::numeric_limits<double>::infinity();
    out.p_value = ma == mb ? 1.0 : 0.0;
    return out;
  }
  out.statistic = (ma - mb) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  boost::math::students_t_distribution<double> dist(dof);
  out.p_value = 2.0 * boost::math::cdf(dist, -std::abs(out.statistic));
  return out;
}

double chi_square_p_value(double statistic, double dof) {
  boost::math::chi_squared_distribution<double> dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

double chi_square_independence(std::span<const int> flags, std::span<const int> bins,
                               int n_bins) {
  if (flags.size() != bins.size() || flags.empty()) {
    throw Error("chi-square: flag and bin vectors must match and be nonempty");
  }
  std::vector<double> table(static_cast<std::size_t>(2 * n_bins), 0.0);
  double row_tot[2] = {0.0, 0.0};
  std::vector<double> col_tot(static_cast<std::size_t>(n_bins), 0.0);
  const double n = static_cast<double>(flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i) {
    const int f = flags[i] ? 1 : 0;
    table[static_cast<std::size_t>(f * n_bins + bins[i])] += 1.0;
    row_tot[f] += 1.0;
    col_tot[static_cast<std::size_t>(bins[i])] += 1.0;
  }
  double stat = 0.0;
  for (int f = 0; f < 2; ++f) {
    for (int c = 0; c < n_bins; ++c) {
      const double expected = row_tot[f] * col_tot[static_cast<std::size_t>(c)] / n;
      if (expected <= 0.0) continue;
      const double diff = table[static_cast<std::size_t>(f * n_bins + c)] - expected;
      stat += diff * diff / expected;
    }
  }
  return chi_square_p_value(stat, static_cast<double>(n_bins - 1));
}

}  // namespace lsam
