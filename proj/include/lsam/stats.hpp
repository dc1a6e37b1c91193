#pragma once

#include <span>
#include <utility>

namespace lsam {

double mean_of(std::span<const double> xs);
// Unbiased (n-1) sample variance.
double sample_variance(std::span<const double> xs);

struct TTest {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample Student t-test, equal variance (pooled), two-tailed. Degenerate
// zero-variance samples give p = 1 when the means agree and p = 0 otherwise.
TTest two_sample_t_test(std::span<const double> a, std::span<const double> b);

// Upper-tail p-value of a chi-square statistic.
double chi_square_p_value(double statistic, double dof);

// Pearson chi-square independence test of a binary flag against value bins
// (contingency 2 x bins built from flags/bin indices). Returns the p-value.
double chi_square_independence(std::span<const int> flags, std::span<const int> bins,
                               int n_bins);

}  // namespace lsam
